//! Empirical Wasserstein spatial depth and competing depths for collections
//! of clouds.

mod kernel;
mod metric;
mod wsd;

use std::fmt;
use std::str::FromStr;

pub use kernel::{embedding_gram, embedding_inner, kernel_spatial_all, kernel_spatial_depth};
pub use metric::{lens_depth, metric_spatial_depth};
pub use wsd::{wsd_discrete, wsd_empirical, wsd_sweep, RADICAND_FLOOR};

use crate::cloud::Cloud;
use crate::error::{Error, Result};
use crate::ot::w2_matrix;

/// Bandwidth of the Gaussian kernel when none is given.
pub const DEFAULT_BANDWIDTH: f64 = 1.0;

/// Slack subtracted before rounding `threshold * n` up, so that products
/// like `0.01 * 600` do not gain a spurious extra flag.
const FLAG_COUNT_SLACK: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    Wsd,
    WsdDiscrete,
    Lens,
    MetricSpatial,
    KernelSpatial { bandwidth: f64 },
}

impl Method {
    pub fn name(&self) -> &'static str {
        match self {
            Method::Wsd => "wsd",
            Method::WsdDiscrete => "wsd-discrete",
            Method::Lens => "lens",
            Method::MetricSpatial => "metric-spatial",
            Method::KernelSpatial { .. } => "kernel-spatial",
        }
    }

    /// Upper end of the value range.
    pub fn max_value(&self) -> f64 {
        match self {
            Method::MetricSpatial => 2.0,
            _ => 1.0,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "wsd" => Method::Wsd,
            "wsd-discrete" => Method::WsdDiscrete,
            "lens" => Method::Lens,
            "metric-spatial" => Method::MetricSpatial,
            "kernel-spatial" => Method::KernelSpatial {
                bandwidth: DEFAULT_BANDWIDTH,
            },
            other => {
                return Err(Error::InvalidParameter(format!(
                    "unknown depth method {other:?}"
                )))
            }
        })
    }
}

/// Depth of every distribution in a collection, with ranks and flags.
#[derive(Debug, Clone, PartialEq)]
pub struct DepthReport {
    pub method: Method,
    pub values: Vec<f64>,
    /// 1 for the smallest value; ties go to the lower index first.
    pub ranks: Vec<usize>,
    /// Whether each value was computed with the distribution left out of
    /// its own population.
    pub excluded_self: bool,
    pub threshold: f64,
    pub flags: Vec<bool>,
}

impl DepthReport {
    pub fn new(
        method: Method,
        values: Vec<f64>,
        excluded_self: bool,
        threshold: f64,
    ) -> Result<Self> {
        let ranks = ranks(&values);
        let flags = flags_from_ranks(&ranks, threshold)?;
        Ok(Self {
            method,
            values,
            ranks,
            excluded_self,
            threshold,
            flags,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Indices sorted from the smallest value up.
    pub fn ascending(&self) -> Vec<usize> {
        let mut order = vec![0; self.len()];
        for (i, &r) in self.ranks.iter().enumerate() {
            order[r - 1] = i;
        }
        order
    }
}

/// Ascending ranks starting at 1. Equal values are ranked by index.
pub fn ranks(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]).then(a.cmp(&b)));
    let mut ranks = vec![0; values.len()];
    for (r, &i) in order.iter().enumerate() {
        ranks[i] = r + 1;
    }
    ranks
}

/// Number of values flagged at `threshold`: `ceil(threshold * n)`.
pub fn flag_count(n: usize, threshold: f64) -> Result<usize> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(Error::InvalidParameter(format!(
            "threshold {threshold} outside [0, 1]"
        )));
    }
    Ok(((threshold * n as f64 - FLAG_COUNT_SLACK).ceil().max(0.0) as usize).min(n))
}

fn flags_from_ranks(ranks: &[usize], threshold: f64) -> Result<Vec<bool>> {
    let k = flag_count(ranks.len(), threshold)?;
    Ok(ranks.iter().map(|&r| r <= k).collect())
}

pub(crate) fn check_same_dim(clouds: &[Cloud]) -> Result<()> {
    if let Some(first) = clouds.first() {
        if let Some(c) = clouds.iter().find(|c| c.dim() != first.dim()) {
            return Err(Error::DimensionMismatch {
                left: first.dim(),
                right: c.dim(),
            });
        }
    }
    Ok(())
}

/// Leave-one-out WSD of every cloud.
pub fn wsd_all(clouds: &[Cloud], threshold: f64) -> Result<DepthReport> {
    let (values, _) = wsd_sweep(clouds)?;
    DepthReport::new(Method::Wsd, values, true, threshold)
}

/// Leave-one-out depth of every cloud under `method`.
pub fn depth_all(clouds: &[Cloud], method: Method, threshold: f64) -> Result<DepthReport> {
    let n = clouds.len();
    if n < 2 {
        return Err(Error::TooFewDistributions(n));
    }
    check_same_dim(clouds)?;
    let values = match method {
        Method::Wsd => wsd_sweep(clouds)?.0,
        Method::WsdDiscrete => (0..n)
            .map(|q| wsd_discrete(&clouds[q], clouds, Some(q)))
            .collect::<Result<_>>()?,
        Method::Lens | Method::MetricSpatial => {
            let dist = w2_matrix(clouds)?;
            (0..n)
                .map(|q| match method {
                    Method::Lens => lens_depth(dist.row(q), &dist, Some(q)),
                    _ => metric_spatial_depth(dist.row(q), &dist, Some(q)),
                })
                .collect::<Result<_>>()?
        }
        Method::KernelSpatial { bandwidth } => kernel_spatial_all(clouds, bandwidth)?,
    };
    DepthReport::new(method, values, true, threshold)
}
