//! Populations of distributions and the planted clouds of each study.

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};

use super::dist::{ar_factor, Law, Marginal};
use super::Experiment;
use crate::analytic::FOUR_CENTERS;
use crate::error::{Error, Result};

/// Rates drawn from `Beta(2, 2)` are floored here so that `Exp(rate)` stays
/// sampleable.
pub const MIN_RATE: f64 = 1e-6;

/// One distribution drawn from a population, with the parameter that
/// generated it (rate, shape, side, center or location).
#[derive(Debug, Clone, PartialEq)]
pub struct Member {
    pub law: Law,
    pub tag: String,
    pub param: Vec<f64>,
}

impl Member {
    fn new(law: Law, tag: &str, param: Vec<f64>) -> Self {
        Self {
            law,
            tag: tag.to_string(),
            param,
        }
    }
}

/// Dimension a study case runs in, or `None` when any `d` works.
pub fn fixed_dim(experiment: Experiment, case: u8) -> Option<usize> {
    match (experiment, case) {
        (Experiment::Consistency, 1 | 2) => Some(1),
        (Experiment::Consistency, _) => Some(2),
        (Experiment::LocationEquivalence, 4) => Some(1),
        (Experiment::LocationEquivalence, _) => None,
        // The multinomial outliers have ten categories.
        (Experiment::Outliers, _) => Some(10),
        // Both exotic sets contain a three-dimensional law.
        (Experiment::KernelComparison, _) => Some(3),
    }
}

pub fn case_count(experiment: Experiment) -> u8 {
    match experiment {
        Experiment::Consistency | Experiment::LocationEquivalence => 4,
        Experiment::Outliers | Experiment::KernelComparison => 2,
    }
}

fn uniform_box(high: f64, d: usize) -> Law {
    Law::iid(Marginal::Uniform { low: 0.0, high }, d)
}

fn gaussian(mean: Vec<f64>, sd: f64) -> Law {
    Law::Gaussian {
        mean,
        factor: None,
        sd,
    }
}

fn beta22<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    Beta::new(2.0, 2.0).expect("valid Beta(2, 2)").sample(rng)
}

/// Draws one regular member of the population of `(experiment, case)`.
pub fn draw_regular<R: Rng + ?Sized>(
    experiment: Experiment,
    case: u8,
    d: usize,
    rng: &mut R,
) -> Result<Member> {
    let normal_vec =
        |rng: &mut R| -> Vec<f64> { (0..d).map(|_| rng.sample(StandardNormal)).collect() };
    Ok(match (experiment, case) {
        (Experiment::Consistency, 1) => {
            let rate = beta22(rng).max(MIN_RATE);
            Member::new(
                Law::iid(Marginal::Exponential { rate }, 1),
                "exponential",
                vec![rate],
            )
        }
        (Experiment::Consistency, 2) => {
            let shape = if rng.random::<bool>() { 1.0 } else { 2.0 };
            Member::new(
                Law::iid(Marginal::Weibull { shape, scale: 1.0 }, 1),
                "weibull",
                vec![shape],
            )
        }
        (Experiment::Consistency, 3) => {
            let center = FOUR_CENTERS[rng.random_range(0..4)].to_vec();
            Member::new(gaussian(center.clone(), 1.0), "gaussian", center)
        }
        (Experiment::Consistency, 4) => {
            let side = rng.random_range(1.0..2.0);
            Member::new(uniform_box(side, 2), "uniform-square", vec![side])
        }
        (Experiment::LocationEquivalence, 1 | 2) => {
            let center: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let factor = if case == 2 {
                Some(ar_factor(d, 0.2)?)
            } else {
                None
            };
            let law = Law::Gaussian {
                mean: center.clone(),
                factor,
                sd: 1.0,
            };
            Member::new(law, "gaussian", center)
        }
        (Experiment::LocationEquivalence, 3) => {
            let center = normal_vec(rng);
            let law = Law::Product {
                marginal: Marginal::Uniform {
                    low: -0.5,
                    high: 0.5,
                },
                shift: center.clone(),
            };
            Member::new(law, "unit-cube", center)
        }
        (Experiment::LocationEquivalence, 4) => {
            let location: f64 = rng.sample(StandardNormal);
            let law = Law::iid(
                Marginal::Laplace {
                    location,
                    rate: 1.0,
                },
                1,
            );
            Member::new(law, "laplace", vec![location])
        }
        (Experiment::Outliers, 1) => {
            let center = normal_vec(rng);
            Member::new(gaussian(center.clone(), 1.0), "gaussian", center)
        }
        (Experiment::Outliers, 2) => {
            let upper = rng.random_range(1.0..2.0);
            Member::new(uniform_box(upper, d), "uniform-box", vec![upper])
        }
        (Experiment::KernelComparison, 1) => {
            let center = normal_vec(rng);
            let sd = rng.random_range(0.8..1.0);
            let mut param = center.clone();
            param.push(sd);
            Member::new(gaussian(center, sd), "gaussian", param)
        }
        (Experiment::KernelComparison, 2) => {
            let upper = beta22(rng) + 1.0;
            Member::new(uniform_box(upper, d), "uniform-box", vec![upper])
        }
        _ => {
            return Err(Error::InvalidParameter(format!(
                "no case {case} for {experiment}"
            )))
        }
    })
}

/// The planted clouds appended after the regular ones.
pub fn planted(experiment: Experiment, case: u8, d: usize) -> Result<Vec<Member>> {
    let iid = |m: Marginal| Law::iid(m, d);
    let filled = |v: f64| vec![v; d];
    let ar = |mean: Vec<f64>| -> Result<Law> {
        Ok(Law::Gaussian {
            factor: Some(ar_factor(mean.len(), 0.5)?),
            mean,
            sd: 1.0,
        })
    };
    let multinomial = |probs: &[f64]| -> Result<Law> {
        if probs.len() != d {
            return Err(Error::InvalidParameter(format!(
                "multinomial with {} categories needs d = {}, got {d}",
                probs.len(),
                probs.len()
            )));
        }
        Ok(Law::Multinomial {
            trials: 2 * d as u64,
            probs: probs.to_vec(),
        })
    };
    let list: Vec<(Law, &str)> = match (experiment, case) {
        (Experiment::Outliers, 1) => vec![
            (gaussian(filled(5.0), 1.0), "gaussian-shifted"),
            (ar(filled(5.0))?, "gaussian-ar"),
            (
                iid(Marginal::Gamma {
                    shape: 3.0,
                    rate: 2.0,
                }),
                "gamma",
            ),
            (
                iid(Marginal::Uniform {
                    low: -6.0,
                    high: 6.0,
                }),
                "uniform-wide",
            ),
            (iid(Marginal::Beta { a: 0.1, b: 0.1 }), "beta"),
            (
                multinomial(&[0.25, 0.25, 0.15, 0.15, 0.15, 0.01, 0.01, 0.01, 0.01, 0.01])?,
                "multinomial",
            ),
        ],
        (Experiment::Outliers, 2) => vec![
            (gaussian(filled(3.0), 1.0), "gaussian-shifted"),
            (ar(filled(-1.0))?, "gaussian-ar"),
            (iid(Marginal::Poisson { mean: 3.0 }), "poisson"),
            (
                iid(Marginal::Binomial {
                    trials: d as u64,
                    p: 0.2,
                }),
                "binomial",
            ),
            (iid(Marginal::ChiSquared { df: 10.0 }), "chi-square"),
            (
                multinomial(&[0.25, 0.15, 0.1, 0.1, 0.15, 0.05, 0.05, 0.05, 0.05, 0.05])?,
                "multinomial",
            ),
        ],
        (Experiment::KernelComparison, 1) => {
            if d != 3 {
                return Err(Error::InvalidParameter(format!(
                    "kernel case 1 runs in d = 3, got {d}"
                )));
            }
            vec![
                (
                    iid(Marginal::Gamma {
                        shape: 3.0,
                        rate: 2.0,
                    }),
                    "gamma",
                ),
                (
                    iid(Marginal::SignFlip {
                        base: Box::new(Marginal::Weibull {
                            shape: 2.0,
                            scale: 1.0,
                        }),
                        scale: 3.0,
                    }),
                    "weibull-signed",
                ),
                (
                    iid(Marginal::Choice(vec![-3.5, -2.5, 2.5, 3.5])),
                    "four-points",
                ),
                (ar(vec![-3.0, 3.0, -3.0])?, "gaussian-ar"),
            ]
        }
        (Experiment::KernelComparison, 2) => vec![
            (iid(Marginal::Poisson { mean: 1.0 }), "poisson"),
            (
                iid(Marginal::SignFlip {
                    base: Box::new(Marginal::Exponential { rate: 2.0 }),
                    scale: 1.0,
                }),
                "exponential-signed",
            ),
            (iid(Marginal::Choice(vec![1.0, 2.0, 3.0])), "three-points"),
            (multinomial(&[0.1, 0.2, 0.7])?, "multinomial"),
        ],
        _ => Vec::new(),
    };
    Ok(list
        .into_iter()
        .map(|(law, tag)| Member::new(law, tag, Vec::new()))
        .collect())
}

/// Query law at a grid value of a consistency case.
pub fn consistency_query(case: u8, value: f64) -> Result<Law> {
    let bad = || Error::InvalidParameter(format!("grid value {value} for consistency case {case}"));
    Ok(match case {
        1 if value > 0.0 && value <= 1.0 => Law::iid(Marginal::Exponential { rate: value }, 1),
        2 if value == 1.0 || value == 2.0 => Law::iid(
            Marginal::Weibull {
                shape: value,
                scale: 1.0,
            },
            1,
        ),
        3 if matches!(value as usize, 1..=4) && value.fract() == 0.0 => {
            gaussian(FOUR_CENTERS[value as usize - 1].to_vec(), 1.0)
        }
        4 if value > 0.0 && value.is_finite() => uniform_box(value, 2),
        _ => return Err(bad()),
    })
}

/// Default grid of query parameters per consistency case. Case 3 indexes the
/// four centers from 1.
pub fn default_grid(case: u8) -> Vec<f64> {
    match case {
        1 => vec![0.3, 0.5, 0.8],
        2 => vec![1.0, 2.0],
        3 => vec![1.0, 2.0, 3.0, 4.0],
        _ => vec![1.2, 1.5, 1.8],
    }
}
