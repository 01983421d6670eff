//! Point samplers for the distributions that appear in the simulations.

use nalgebra::DMatrix;
use rand::distr::weighted::WeightedIndex;
use rand::distr::Uniform;
use rand::Rng;
use rand_distr::{
    Beta, Binomial, ChiSquared, Distribution, Exp, Gamma, Normal, Poisson, StandardNormal, Weibull,
};

use crate::error::{Error, Result};

/// One-dimensional law, used coordinatewise in product distributions.
#[derive(Debug, Clone, PartialEq)]
pub enum Marginal {
    Normal {
        mean: f64,
        sd: f64,
    },
    Exponential {
        rate: f64,
    },
    Weibull {
        shape: f64,
        scale: f64,
    },
    Uniform {
        low: f64,
        high: f64,
    },
    /// Shape and rate (mean `shape / rate`).
    Gamma {
        shape: f64,
        rate: f64,
    },
    Beta {
        a: f64,
        b: f64,
    },
    Poisson {
        mean: f64,
    },
    Binomial {
        trials: u64,
        p: f64,
    },
    ChiSquared {
        df: f64,
    },
    Laplace {
        location: f64,
        rate: f64,
    },
    /// Uniform over a finite set of values.
    Choice(Vec<f64>),
    /// `scale * S * X` with `S = +-1` equally likely, independent of `X`.
    SignFlip {
        base: Box<Marginal>,
        scale: f64,
    },
}

/// A law on `R^d` that can produce i.i.d. points.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    /// Independent coordinates with a common marginal, shifted by `shift`
    /// (whose length is the dimension).
    Product { marginal: Marginal, shift: Vec<f64> },
    /// `mean + L z` with `z` standard normal; `factor` is the lower Cholesky
    /// factor of the covariance, `None` for the identity scaled by `sd`.
    Gaussian {
        mean: Vec<f64>,
        factor: Option<DMatrix<f64>>,
        sd: f64,
    },
    /// Raw count vectors of `trials` categorical draws.
    Multinomial { trials: u64, probs: Vec<f64> },
}

fn invalid<E: std::fmt::Display>(what: &str) -> impl FnOnce(E) -> Error + '_ {
    move |e| Error::InvalidParameter(format!("{what}: {e}"))
}

/// Prepared sampler for a [`Marginal`].
enum Scalar {
    Normal(Normal<f64>),
    Exp(Exp<f64>),
    Weibull(Weibull<f64>),
    Uniform(Uniform<f64>),
    Gamma(Gamma<f64>),
    Beta(Beta<f64>),
    Poisson(Poisson<f64>),
    Binomial(Binomial),
    ChiSquared(ChiSquared<f64>),
    Laplace { location: f64, rate: f64 },
    Choice(Vec<f64>),
    SignFlip(Box<Scalar>, f64),
}

impl Scalar {
    fn new(m: &Marginal) -> Result<Self> {
        Ok(match m {
            Marginal::Normal { mean, sd } => {
                Scalar::Normal(Normal::new(*mean, *sd).map_err(invalid("normal"))?)
            }
            Marginal::Exponential { rate } => {
                Scalar::Exp(Exp::new(*rate).map_err(invalid("exponential"))?)
            }
            Marginal::Weibull { shape, scale } => {
                Scalar::Weibull(Weibull::new(*scale, *shape).map_err(invalid("Weibull"))?)
            }
            Marginal::Uniform { low, high } => {
                Scalar::Uniform(Uniform::new(*low, *high).map_err(invalid("uniform"))?)
            }
            Marginal::Gamma { shape, rate } => {
                if !(*rate > 0.0) {
                    return Err(Error::InvalidParameter(format!("gamma rate {rate}")));
                }
                Scalar::Gamma(Gamma::new(*shape, 1.0 / rate).map_err(invalid("gamma"))?)
            }
            Marginal::Beta { a, b } => Scalar::Beta(Beta::new(*a, *b).map_err(invalid("beta"))?),
            Marginal::Poisson { mean } => {
                Scalar::Poisson(Poisson::new(*mean).map_err(invalid("Poisson"))?)
            }
            Marginal::Binomial { trials, p } => {
                Scalar::Binomial(Binomial::new(*trials, *p).map_err(invalid("binomial"))?)
            }
            Marginal::ChiSquared { df } => {
                Scalar::ChiSquared(ChiSquared::new(*df).map_err(invalid("chi-square"))?)
            }
            Marginal::Laplace { location, rate } => {
                if !(*rate > 0.0 && rate.is_finite() && location.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "Laplace location {location}, rate {rate}"
                    )));
                }
                Scalar::Laplace {
                    location: *location,
                    rate: *rate,
                }
            }
            Marginal::Choice(values) => {
                if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
                    return Err(Error::InvalidParameter("choice needs finite values".into()));
                }
                Scalar::Choice(values.clone())
            }
            Marginal::SignFlip { base, scale } => {
                Scalar::SignFlip(Box::new(Scalar::new(base)?), *scale)
            }
        })
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Scalar::Normal(d) => d.sample(rng),
            Scalar::Exp(d) => d.sample(rng),
            Scalar::Weibull(d) => d.sample(rng),
            Scalar::Uniform(d) => d.sample(rng),
            Scalar::Gamma(d) => d.sample(rng),
            Scalar::Beta(d) => d.sample(rng),
            Scalar::Poisson(d) => d.sample(rng),
            Scalar::Binomial(d) => d.sample(rng) as f64,
            Scalar::ChiSquared(d) => d.sample(rng),
            Scalar::Laplace { location, rate } => {
                // Inverse CDF on u in the open interval (-1/2, 1/2).
                let u: f64 = 0.5 - rng.sample::<f64, _>(rand::distr::Open01);
                location - u.signum() * (1.0 - 2.0 * u.abs()).ln() / rate
            }
            Scalar::Choice(values) => values[rng.random_range(0..values.len())],
            Scalar::SignFlip(base, scale) => {
                let s = if rng.random::<bool>() { 1.0 } else { -1.0 };
                scale * s * base.sample(rng)
            }
        }
    }
}

/// Lower Cholesky factor of `rho^|i - j|`.
pub fn ar_factor(d: usize, rho: f64) -> Result<DMatrix<f64>> {
    let cov = DMatrix::from_fn(d, d, |i, j| rho.powi((i as i32 - j as i32).abs()));
    cov.cholesky()
        .map(|c| c.l())
        .ok_or_else(|| Error::NotSpd(format!("AR covariance with rho {rho}")))
}

impl Law {
    pub fn dim(&self) -> usize {
        match self {
            Law::Product { shift, .. } => shift.len(),
            Law::Gaussian { mean, .. } => mean.len(),
            Law::Multinomial { probs, .. } => probs.len(),
        }
    }

    /// Product law without a shift.
    pub fn iid(marginal: Marginal, dim: usize) -> Self {
        Law::Product {
            marginal,
            shift: vec![0.0; dim],
        }
    }

    /// `m` i.i.d. points, row-major.
    pub fn sample<R: Rng + ?Sized>(&self, m: usize, rng: &mut R) -> Result<Vec<f64>> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::InvalidParameter("law of dimension 0".into()));
        }
        let mut out = Vec::with_capacity(m * d);
        match self {
            Law::Product { marginal, shift } => {
                let s = Scalar::new(marginal)?;
                for _ in 0..m {
                    out.extend(shift.iter().map(|c| c + s.sample(rng)));
                }
            }
            Law::Gaussian { mean, factor, sd } => {
                if let Some(l) = factor {
                    if l.nrows() != d || l.ncols() != d {
                        return Err(Error::DimensionMismatch {
                            left: d,
                            right: l.nrows(),
                        });
                    }
                }
                if !(*sd > 0.0 && sd.is_finite()) {
                    return Err(Error::InvalidParameter(format!("Gaussian sd {sd}")));
                }
                let mut z = vec![0.0; d];
                for _ in 0..m {
                    for v in z.iter_mut() {
                        *v = rng.sample(StandardNormal);
                    }
                    match factor {
                        None => out.extend(mean.iter().zip(&z).map(|(mu, v)| mu + sd * v)),
                        Some(l) => {
                            for i in 0..d {
                                let lz: f64 = (0..=i).map(|j| l[(i, j)] * z[j]).sum();
                                out.push(mean[i] + sd * lz);
                            }
                        }
                    }
                }
            }
            Law::Multinomial { trials, probs } => {
                let pick = WeightedIndex::new(probs).map_err(invalid("multinomial"))?;
                for _ in 0..m {
                    let start = out.len();
                    out.resize(start + d, 0.0);
                    for _ in 0..*trials {
                        out[start + pick.sample(rng)] += 1.0;
                    }
                }
            }
        }
        Ok(out)
    }
}
