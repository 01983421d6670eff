use super::{
    cloud_rng, consistency_query, default_grid, sample_repetition, Experiment, ExperimentConfig,
};
use crate::analytic::{
    analytic_wsd, euclid_spatial_depth, FamilySpec, PopulationFamily, FOUR_CENTERS,
};
use crate::cloud::Cloud;
use crate::depth::{depth_all, wsd_all, wsd_empirical, wsd_sweep, DepthReport, Method};
use crate::error::{Error, Result};
use crate::numeric::{mean, spearman, std_dev};

fn expect(config: &ExperimentConfig, experiment: Experiment) -> Result<()> {
    if config.experiment != experiment {
        return Err(Error::InvalidParameter(format!(
            "configuration is for {}, not {experiment}",
            config.experiment
        )));
    }
    config.validate()
}

/// One grid value of the consistency study.
#[derive(Debug, Clone, PartialEq)]
pub struct ConsistencyRow {
    pub param: f64,
    pub analytic: f64,
    /// Empirical depth of the query in each repetition.
    pub values: Vec<f64>,
    pub mean: f64,
    pub sd: f64,
}

fn analytic_for(case: u8, value: f64) -> Result<f64> {
    let (spec, family) = match case {
        1 => (
            FamilySpec::Exponential { rate: value },
            PopulationFamily::ExponentialBetaRate,
        ),
        2 => (
            FamilySpec::Weibull {
                shape: value as u32,
            },
            PopulationFamily::WeibullUniformShape,
        ),
        3 => (
            FamilySpec::GaussianIso {
                center: FOUR_CENTERS[value as usize - 1].to_vec(),
                sd: 1.0,
            },
            PopulationFamily::GaussianFourCenters,
        ),
        _ => (
            FamilySpec::UniformCube {
                side: value,
                dim: 2,
            },
            PopulationFamily::UniformCubeUniformSide,
        ),
    };
    analytic_wsd(&spec, family)
}

/// Empirical depth of fresh query samples against sampled populations,
/// next to the population depth at the query's parameter.
///
/// Queries are drawn outside the population (`n_q = n`), one per grid value
/// and repetition, from their own random streams.
pub fn run_consistency(config: &ExperimentConfig) -> Result<Vec<ConsistencyRow>> {
    expect(config, Experiment::Consistency)?;
    let grid = config
        .grid
        .clone()
        .unwrap_or_else(|| default_grid(config.case));
    let analytic: Vec<f64> = grid
        .iter()
        .map(|&v| analytic_for(config.case, v))
        .collect::<Result<_>>()?;
    let mut values = vec![Vec::with_capacity(config.repetitions); grid.len()];
    for rep in 0..config.repetitions {
        let data = sample_repetition(config, rep)?;
        for (g, &v) in grid.iter().enumerate() {
            let mut rng = cloud_rng(config.seed, rep, data.len() + g);
            let q = Cloud::uniform(
                consistency_query(config.case, v)?.sample(config.m, &mut rng)?,
                data.dim(),
            )?;
            values[g].push(wsd_empirical(&q, &data.clouds, None)?);
        }
    }
    Ok(grid
        .into_iter()
        .zip(analytic)
        .zip(values)
        .map(|((param, analytic), values)| ConsistencyRow {
            param,
            analytic,
            mean: mean(&values),
            sd: std_dev(&values),
            values,
        })
        .collect())
}

/// WSD next to the spatial depth of the generating locations, one draw.
#[derive(Debug, Clone, PartialEq)]
pub struct LocationRun {
    pub wsd: Vec<f64>,
    pub spatial: Vec<f64>,
    pub max_gap: f64,
    pub spearman: f64,
}

pub fn run_location_equivalence(config: &ExperimentConfig) -> Result<Vec<LocationRun>> {
    expect(config, Experiment::LocationEquivalence)?;
    (0..config.repetitions)
        .map(|rep| {
            let data = sample_repetition(config, rep)?;
            let (wsd, _) = wsd_sweep(&data.clouds)?;
            let spatial = location_depths(&data.params)?;
            let max_gap = wsd
                .iter()
                .zip(&spatial)
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let spearman = spearman(&wsd, &spatial);
            Ok(LocationRun {
                wsd,
                spatial,
                max_gap,
                spearman: if spearman.is_nan() { 1.0 } else { spearman },
            })
        })
        .collect()
}

/// Leave-one-out spatial depth of each location among the others.
fn location_depths(locations: &[Vec<f64>]) -> Result<Vec<f64>> {
    (0..locations.len())
        .map(|i| {
            let others: Vec<f64> = locations
                .iter()
                .enumerate()
                .filter(|(k, _)| *k != i)
                .flat_map(|(_, l)| l.iter().copied())
                .collect();
            euclid_spatial_depth(&locations[i], &others)
        })
        .collect()
}

/// Outcome of one outlier-detection repetition.
#[derive(Debug, Clone, PartialEq)]
pub struct OutlierRun {
    pub report: DepthReport,
    pub planted: Vec<usize>,
    /// Planted clouds among the flagged ones.
    pub recovered: usize,
    /// Whether the planted clouds hold exactly the smallest depths.
    pub bottom: bool,
}

impl OutlierRun {
    pub fn recovery_fraction(&self) -> f64 {
        if self.planted.is_empty() {
            return 1.0;
        }
        self.recovered as f64 / self.planted.len() as f64
    }
}

fn occupy_bottom(values: &[f64], targets: &[usize]) -> bool {
    // Strict separation: every target below every other value.
    let worst_target = targets
        .iter()
        .map(|&i| values[i])
        .fold(f64::NEG_INFINITY, f64::max);
    let best_other = (0..values.len())
        .filter(|i| !targets.contains(i))
        .map(|i| values[i])
        .fold(f64::INFINITY, f64::min);
    worst_target < best_other
}

pub fn run_outlier_experiment(config: &ExperimentConfig) -> Result<Vec<OutlierRun>> {
    expect(config, Experiment::Outliers)?;
    (0..config.repetitions)
        .map(|rep| {
            let data = sample_repetition(config, rep)?;
            let report = wsd_all(&data.clouds, config.threshold)?;
            let planted: Vec<usize> = data.planted().collect();
            let recovered = planted.iter().filter(|&&i| report.flags[i]).count();
            let bottom = occupy_bottom(&report.values, &planted);
            Ok(OutlierRun {
                report,
                planted,
                recovered,
                bottom,
            })
        })
        .collect()
}

/// WSD next to the kernel spatial depth, one draw.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelRun {
    pub wsd: Vec<f64>,
    pub kernel: Vec<f64>,
    pub exotic: Vec<usize>,
    /// Exotic clouds hold the smallest WSD values.
    pub wsd_separates: bool,
    /// Same question for the kernel depth.
    pub kernel_separates: bool,
}

pub fn run_kernel_comparison(config: &ExperimentConfig) -> Result<Vec<KernelRun>> {
    expect(config, Experiment::KernelComparison)?;
    (0..config.repetitions)
        .map(|rep| {
            let data = sample_repetition(config, rep)?;
            let (wsd, _) = wsd_sweep(&data.clouds)?;
            let kernel = depth_all(
                &data.clouds,
                Method::KernelSpatial {
                    bandwidth: config.bandwidth,
                },
                config.threshold,
            )?
            .values;
            let exotic: Vec<usize> = data.planted().collect();
            Ok(KernelRun {
                wsd_separates: occupy_bottom(&wsd, &exotic),
                kernel_separates: occupy_bottom(&kernel, &exotic),
                wsd,
                kernel,
                exotic,
            })
        })
        .collect()
}
