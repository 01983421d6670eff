//! Closed-form transport and depth values for parametric families.
//!
//! These are the oracles the empirical estimators are checked against: the
//! Gaussian (Bures) transport map and distance, the 1-D quantile matching,
//! the Euclidean spatial depth, and the population depth of the four
//! simulated family/population pairings.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};
use crate::ot::TransportMap;

/// Eigenvalues at or below this fraction of the trace count as zero.
pub const SPD_RELATIVE_FLOOR: f64 = 1e-12;

/// Single distributions with known transport structure.
#[derive(Debug, Clone, PartialEq)]
pub enum FamilySpec {
    /// Exponential with rate `lambda > 0`.
    Exponential {
        rate: f64,
    },
    /// Weibull with unit scale and shape 1 or 2.
    Weibull {
        shape: u32,
    },
    /// `N(center, sd^2 I)`.
    GaussianIso {
        center: Vec<f64>,
        sd: f64,
    },
    Gaussian(Gaussian),
    /// Uniform on `[0, side]^dim`.
    UniformCube {
        side: f64,
        dim: usize,
    },
    /// Uniform on `[0, upper]^dim`, product form.
    UniformInterval {
        upper: f64,
        dim: usize,
    },
    /// 1-D Laplace with unit rate.
    Laplace {
        location: f64,
    },
}

impl FamilySpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match self {
            FamilySpec::Exponential { rate } if !(*rate > 0.0 && rate.is_finite()) => {
                bad(format!("rate {rate}"))
            }
            FamilySpec::Weibull { shape } if !matches!(shape, 1 | 2) => {
                bad(format!("Weibull shape {shape}"))
            }
            FamilySpec::GaussianIso { center, sd }
                if center.is_empty() || !(*sd > 0.0 && sd.is_finite()) =>
            {
                bad(format!("isotropic Gaussian sd {sd}, dim {}", center.len()))
            }
            FamilySpec::UniformCube { side, dim }
            | FamilySpec::UniformInterval { upper: side, dim }
                if !(*side > 0.0 && side.is_finite()) || *dim == 0 =>
            {
                bad(format!("uniform box side {side}, dim {dim}"))
            }
            FamilySpec::Laplace { location } if !location.is_finite() => {
                bad(format!("location {location}"))
            }
            _ => Ok(()),
        }
    }
}

/// Gaussian with validated SPD covariance.
#[derive(Debug, Clone, PartialEq)]
pub struct Gaussian {
    mean: DVector<f64>,
    cov: DMatrix<f64>,
}

impl Gaussian {
    pub fn new(mean: Vec<f64>, cov: DMatrix<f64>) -> Result<Self> {
        let d = mean.len();
        if d == 0 || cov.nrows() != d || cov.ncols() != d {
            return Err(Error::DimensionMismatch {
                left: d,
                right: cov.nrows(),
            });
        }
        if mean.iter().chain(cov.iter()).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter(
                "non-finite Gaussian parameter".into(),
            ));
        }
        let scale = cov.iter().fold(1.0f64, |m, x| m.max(x.abs()));
        for i in 0..d {
            for j in 0..i {
                if (cov[(i, j)] - cov[(j, i)]).abs() > 1e-12 * scale {
                    return Err(Error::NotSpd(format!(
                        "covariance not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        let cov = (&cov + cov.transpose()) * 0.5;
        spd_eigen(&cov)?;
        Ok(Self {
            mean: DVector::from_vec(mean),
            cov,
        })
    }

    pub fn isotropic(center: Vec<f64>, sd: f64) -> Result<Self> {
        let d = center.len();
        Self::new(center, DMatrix::identity(d, d) * (sd * sd))
    }

    pub fn dim(&self) -> usize {
        self.mean.len()
    }

    pub fn mean(&self) -> &DVector<f64> {
        &self.mean
    }

    pub fn cov(&self) -> &DMatrix<f64> {
        &self.cov
    }
}

/// Affine optimal map `x -> mean_p + A (x - mean_q)` between Gaussians.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianMapParts {
    pub a: DMatrix<f64>,
    pub mean_q: DVector<f64>,
    pub mean_p: DVector<f64>,
}

impl GaussianMapParts {
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let x = DVector::from_column_slice(x);
        (&self.mean_p + &self.a * (x - &self.mean_q))
            .iter()
            .copied()
            .collect()
    }

    /// Mean and covariance of the push-forward of `N(mean_q, cov_q)`.
    pub fn push_forward(&self, cov_q: &DMatrix<f64>) -> (DVector<f64>, DMatrix<f64>) {
        (self.mean_p.clone(), &self.a * cov_q * self.a.transpose())
    }
}

fn spd_eigen(m: &DMatrix<f64>) -> Result<SymmetricEigen<f64, nalgebra::Dyn>> {
    let trace = m.trace();
    let eig = SymmetricEigen::new(m.clone());
    let floor = SPD_RELATIVE_FLOOR * trace.abs();
    if let Some(lambda) = eig.eigenvalues.iter().find(|&&l| l <= floor) {
        return Err(Error::NotSpd(format!(
            "eigenvalue {lambda:e} at or below {floor:e}"
        )));
    }
    Ok(eig)
}

fn from_eigen(eig: &SymmetricEigen<f64, nalgebra::Dyn>, f: impl Fn(f64) -> f64) -> DMatrix<f64> {
    let vals = DMatrix::from_diagonal(&eig.eigenvalues.map(f));
    let m = &eig.eigenvectors * vals * eig.eigenvectors.transpose();
    (&m + m.transpose()) * 0.5
}

/// Square root of a symmetric positive semidefinite matrix; roundoff
/// negatives are clamped to zero.
fn psd_sqrt(m: &DMatrix<f64>) -> DMatrix<f64> {
    let sym = (m + m.transpose()) * 0.5;
    from_eigen(&SymmetricEigen::new(sym), |l| l.max(0.0).sqrt())
}

/// Optimal map and `W2` between two Gaussians.
pub fn gaussian_ot(q: &Gaussian, p: &Gaussian) -> Result<(GaussianMapParts, f64)> {
    if q.dim() != p.dim() {
        return Err(Error::DimensionMismatch {
            left: q.dim(),
            right: p.dim(),
        });
    }
    let eig_q = spd_eigen(&q.cov)?;
    let root_q = from_eigen(&eig_q, f64::sqrt);
    let inv_root_q = from_eigen(&eig_q, |l| 1.0 / l.sqrt());
    let middle = psd_sqrt(&(&root_q * &p.cov * &root_q));
    let a = &inv_root_q * middle * &inv_root_q;
    let a = (&a + a.transpose()) * 0.5;

    let root_p = psd_sqrt(&p.cov);
    let cross = psd_sqrt(&(&root_p * &q.cov * &root_p));
    let bures = (p.cov.trace() + q.cov.trace() - 2.0 * cross.trace()).max(0.0);
    let shift = (&p.mean - &q.mean).norm_squared();
    let w2 = (shift + bures).sqrt();

    Ok((
        GaussianMapParts {
            a,
            mean_q: q.mean.clone(),
            mean_p: p.mean.clone(),
        },
        w2,
    ))
}

/// Empirical `F_P^{-1} o F_Q` on order statistics: the i-th smallest value
/// of `q_sorted` goes to the i-th smallest of `p_sorted`.
pub fn quantile_map_1d(q_sorted: &[f64], p_sorted: &[f64]) -> Result<TransportMap> {
    if q_sorted.len() != p_sorted.len() {
        return Err(Error::LengthMismatch {
            left: q_sorted.len(),
            right: p_sorted.len(),
        });
    }
    if q_sorted.is_empty() {
        return Err(Error::InvalidCloud("empty sample".into()));
    }
    for (name, xs) in [("source", q_sorted), ("target", p_sorted)] {
        if xs.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidParameter(format!(
                "{name} sample is not sorted ascending"
            )));
        }
    }
    Ok(TransportMap::new(p_sorted.to_vec(), 1))
}

/// `1 - |mean of unit vectors from x to each point|`, with coincident points
/// contributing the zero vector. `points` is row-major `n x x.len()`.
pub fn euclid_spatial_depth(x: &[f64], points: &[f64]) -> Result<f64> {
    let d = x.len();
    if d == 0 || points.is_empty() || points.len() % d != 0 {
        return Err(Error::DimensionMismatch {
            left: d,
            right: points.len(),
        });
    }
    let n = points.len() / d;
    let mut sum = vec![0.0; d];
    for p in points.chunks_exact(d) {
        let norm = crate::numeric::squared_distance(p, x).sqrt();
        if norm > 0.0 {
            for ((s, a), b) in sum.iter_mut().zip(p).zip(x) {
                *s += (a - b) / norm;
            }
        }
    }
    let norm = sum.iter().map(|s| s * s).sum::<f64>().sqrt() / n as f64;
    Ok((1.0 - norm).clamp(0.0, 1.0))
}

/// Populations of distributions with closed-form depth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PopulationFamily {
    /// Exponentials with rate drawn from `Beta(2, 2)`.
    ExponentialBetaRate,
    /// Unit-scale Weibulls with shape uniform on `{1, 2}`.
    WeibullUniformShape,
    /// `N(mu, I)` in the plane, `mu` uniform on `{(+-1, 0), (0, +-1)}`.
    GaussianFourCenters,
    /// Uniform on `[0, c]^d` with `c` uniform on `[1, 2]`.
    UniformCubeUniformSide,
}

pub const FOUR_CENTERS: [[f64; 2]; 4] = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];

/// Population depth of `q` under one of the supported pairings.
pub fn analytic_wsd(q: &FamilySpec, population: PopulationFamily) -> Result<f64> {
    q.validate()?;
    let unsupported = || {
        Err(Error::UnsupportedPairing(format!(
            "{q:?} against {population:?}"
        )))
    };
    match (q, population) {
        (FamilySpec::Exponential { rate }, PopulationFamily::ExponentialBetaRate) => {
            if *rate > 1.0 {
                return unsupported();
            }
            // E[sign(1/rate - 1/lambda)] under Beta(2, 2).
            let l = *rate;
            Ok(1.0 - (1.0 + 4.0 * l.powi(3) - 6.0 * l * l).abs())
        }
        (FamilySpec::Weibull { .. }, PopulationFamily::WeibullUniformShape) => Ok(0.5),
        (FamilySpec::GaussianIso { center, sd }, PopulationFamily::GaussianFourCenters) => {
            if center.len() != 2 || *sd != 1.0 {
                return unsupported();
            }
            let centers: Vec<f64> = FOUR_CENTERS.iter().flatten().copied().collect();
            euclid_spatial_depth(center, &centers)
        }
        (FamilySpec::UniformCube { side, .. }, PopulationFamily::UniformCubeUniformSide) => {
            // P(c < side) - P(c > side) for c ~ U[1, 2].
            let below = (side - 1.0).clamp(0.0, 1.0);
            Ok(1.0 - (2.0 * below - 1.0).abs())
        }
        _ => unsupported(),
    }
}
