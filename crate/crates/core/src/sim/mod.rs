//! Seeded two-stage sampling and the simulation studies built on it.
//!
//! A data array is drawn in two stages: first `n` distributions from a
//! population of distributions, then `m` points from each. Every cloud gets
//! its own random stream keyed by `(seed, repetition, cloud index)`, so the
//! coordinates do not depend on the order in which clouds are generated.

mod cases;
mod dist;
mod experiments;

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

pub use cases::{
    consistency_query, default_grid, draw_regular, fixed_dim, planted, Member, MIN_RATE,
};
pub use dist::{ar_factor, Law, Marginal};
pub use experiments::{
    run_consistency, run_kernel_comparison, run_location_equivalence, run_outlier_experiment,
    ConsistencyRow, KernelRun, LocationRun, OutlierRun,
};

use crate::cloud::Cloud;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Experiment {
    Consistency,
    LocationEquivalence,
    Outliers,
    KernelComparison,
}

impl Experiment {
    pub fn name(&self) -> &'static str {
        match self {
            Experiment::Consistency => "consistency",
            Experiment::LocationEquivalence => "location-equivalence",
            Experiment::Outliers => "outliers",
            Experiment::KernelComparison => "kernel-comparison",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.replace('_', "-").as_str() {
            "consistency" => Experiment::Consistency,
            "location-equivalence" | "location" => Experiment::LocationEquivalence,
            "outliers" => Experiment::Outliers,
            "kernel-comparison" | "kernel" => Experiment::KernelComparison,
            _ => return Err(Error::InvalidParameter(format!("unknown experiment {s:?}"))),
        })
    }
}

/// Parameters of one simulation study.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub case: u8,
    /// Number of regular distributions.
    pub n: usize,
    /// Points per distribution.
    pub m: usize,
    /// Dimension; `None` picks the case default.
    pub d: Option<usize>,
    pub repetitions: usize,
    pub seed: u64,
    pub threshold: f64,
    /// Gaussian kernel bandwidth for the kernel comparison.
    pub bandwidth: f64,
    /// Query parameters of the consistency study; `None` uses the default grid.
    pub grid: Option<Vec<f64>>,
}

impl ExperimentConfig {
    pub fn new(experiment: Experiment, case: u8) -> Self {
        Self {
            experiment,
            case,
            n: 100,
            m: 100,
            d: None,
            repetitions: 1,
            seed: 0,
            threshold: if experiment == Experiment::Outliers {
                0.01
            } else {
                0.05
            },
            bandwidth: crate::depth::DEFAULT_BANDWIDTH,
            grid: None,
        }
    }

    /// Dimension after defaults.
    pub fn dim(&self) -> usize {
        fixed_dim(self.experiment, self.case)
            .or(self.d)
            .unwrap_or(10)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        if !(1..=cases::case_count(self.experiment)).contains(&self.case) {
            return bad(format!("{} has no case {}", self.experiment, self.case));
        }
        if self.experiment == Experiment::KernelComparison && self.n == 0 {
            return Err(Error::EmptyPopulation);
        }
        if self.n < 2 && self.experiment != Experiment::KernelComparison {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if self.m == 0 {
            return bad("m must be at least 1".into());
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if let (Some(fixed), Some(d)) = (fixed_dim(self.experiment, self.case), self.d) {
            if fixed != d {
                return bad(format!(
                    "{} case {} runs in d = {fixed}, got {d}",
                    self.experiment, self.case
                ));
            }
        }
        if self.d == Some(0) {
            return bad("d must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.threshold) {
            return bad(format!("threshold {} outside [0, 1]", self.threshold));
        }
        if !(self.bandwidth > 0.0 && self.bandwidth.is_finite()) {
            return Err(Error::NonpositiveBandwidth(self.bandwidth));
        }
        if let Some(grid) = &self.grid {
            if grid.is_empty() {
                return bad("empty parameter grid".into());
            }
            for &v in grid {
                consistency_query(self.case, v)?;
            }
        }
        Ok(())
    }
}

/// The observed sample: `clouds[i]` holds `m` points drawn from the i-th
/// distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct DataArray {
    pub clouds: Vec<Cloud>,
    pub tags: Vec<String>,
    /// Generating parameter of each cloud (empty for planted clouds).
    pub params: Vec<Vec<f64>>,
    pub seed: u64,
    pub repetition: usize,
    /// Number of regular clouds; planted ones follow.
    pub n_regular: usize,
}

impl DataArray {
    pub fn len(&self) -> usize {
        self.clouds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clouds.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.clouds.first().map_or(0, |c| c.dim())
    }

    pub fn planted(&self) -> std::ops::Range<usize> {
        self.n_regular..self.clouds.len()
    }
}

/// Random stream of cloud `index` in repetition `repetition`.
pub fn cloud_rng(seed: u64, repetition: usize, index: usize) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    key[8..16].copy_from_slice(&(repetition as u64).to_le_bytes());
    let mut rng = ChaCha8Rng::from_seed(key);
    rng.set_stream(index as u64);
    rng
}

/// Draws the data array of repetition 0.
pub fn sample_two_stage(config: &ExperimentConfig) -> Result<DataArray> {
    sample_repetition(config, 0)
}

/// Draws the regular and planted clouds of one repetition.
pub fn sample_repetition(config: &ExperimentConfig, repetition: usize) -> Result<DataArray> {
    config.validate()?;
    let d = config.dim();
    let (experiment, case) = (config.experiment, config.case);
    let extra = planted(experiment, case, d)?;
    let total = config.n + extra.len();
    let drawn: Vec<(Cloud, String, Vec<f64>)> = (0..total)
        .into_par_iter()
        .map(|i| {
            let mut rng = cloud_rng(config.seed, repetition, i);
            let member = if i < config.n {
                draw_regular(experiment, case, d, &mut rng)?
            } else {
                extra[i - config.n].clone()
            };
            let cloud = Cloud::uniform(member.law.sample(config.m, &mut rng)?, d)?;
            Ok((cloud, member.tag, member.param))
        })
        .collect::<Result<_>>()?;
    let mut out = DataArray {
        clouds: Vec::with_capacity(total),
        tags: Vec::with_capacity(total),
        params: Vec::with_capacity(total),
        seed: config.seed,
        repetition,
        n_regular: config.n,
    };
    for (c, t, p) in drawn {
        out.clouds.push(c);
        out.tags.push(t);
        out.params.push(p);
    }
    Ok(out)
}
