//! Spatial depth of kernel mean embeddings under a Gaussian kernel.
//!
//! Everything is expressed through inner products of embeddings,
//! `<f_A, f_B> = sum_a sum_b w_a w_b k(a, b)`, so the embeddings themselves
//! are never formed.

use rayon::prelude::*;

use crate::cloud::Cloud;
use crate::error::{Error, Result};
use crate::numeric::{squared_distance, Neumaier};

/// Embedding distances below this fraction of the embedding norms are
/// treated as zero.
const ZERO_MMD_REL: f64 = 1e-12;

fn check_bandwidth(h: f64) -> Result<()> {
    if h > 0.0 && h.is_finite() {
        Ok(())
    } else {
        Err(Error::NonpositiveBandwidth(h))
    }
}

/// `<f_a, f_b>` for the kernel `exp(-|x - y|^2 / (2 h^2))`.
pub fn embedding_inner(a: &Cloud, b: &Cloud, bandwidth: f64) -> f64 {
    let s = -0.5 / (bandwidth * bandwidth);
    let mut total = Neumaier::new();
    for (x, wa) in a.rows().zip(a.weights()) {
        let row: f64 = b
            .rows()
            .zip(b.weights())
            .map(|(y, wb)| wb * (s * squared_distance(x, y)).exp())
            .sum();
        total.add(wa * row);
    }
    total.value()
}

/// Gram matrix of embeddings, row-major `n x n`.
pub fn embedding_gram(clouds: &[Cloud], bandwidth: f64) -> Result<Vec<f64>> {
    check_bandwidth(bandwidth)?;
    let n = clouds.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| embedding_inner(&clouds[i], &clouds[j], bandwidth))
        .collect();
    let mut g = vec![0.0; n * n];
    for (&(i, j), v) in pairs.iter().zip(values) {
        g[i * n + j] = v;
        g[j * n + i] = v;
    }
    Ok(g)
}

/// Kernel spatial depth from a Gram matrix over `{members} + {query}`:
/// `gram(i, j)` for members, `cross[i] = <f_i, f_Q>`, `self_q = <f_Q, f_Q>`.
fn from_gram(
    gram: impl Fn(usize, usize) -> f64,
    cross: &[f64],
    self_q: f64,
    members: &[usize],
) -> Result<f64> {
    if members.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    // Inverse embedding distance per member; zero for coincident embeddings.
    let inv: Vec<f64> = members
        .iter()
        .map(|&i| {
            let sq = gram(i, i) + self_q - 2.0 * cross[i];
            if sq <= ZERO_MMD_REL * (gram(i, i) + self_q) {
                0.0
            } else {
                1.0 / sq.sqrt()
            }
        })
        .collect();
    let n = members.len();
    if n == 1 {
        return Ok(if inv[0] > 0.0 { 0.0 } else { 1.0 });
    }
    let mut total = Neumaier::new();
    for (a, &i) in members.iter().enumerate() {
        if inv[a] == 0.0 {
            continue;
        }
        for (b, &k) in members.iter().enumerate() {
            if inv[b] == 0.0 {
                continue;
            }
            let e = gram(i, k) - cross[i] - cross[k] + self_q;
            total.add(inv[a] * inv[b] * e);
        }
    }
    let radicand = total.value() / (n * n) as f64;
    super::wsd::finish(radicand)
}

/// Kernel spatial depth of `q` with respect to `population`.
pub fn kernel_spatial_depth(q: &Cloud, population: &[Cloud], bandwidth: f64) -> Result<f64> {
    check_bandwidth(bandwidth)?;
    if let Some(p) = population.iter().find(|p| p.dim() != q.dim()) {
        return Err(Error::DimensionMismatch {
            left: q.dim(),
            right: p.dim(),
        });
    }
    let n = population.len();
    let gram = embedding_gram(population, bandwidth)?;
    let cross: Vec<f64> = population
        .par_iter()
        .map(|p| embedding_inner(p, q, bandwidth))
        .collect();
    let self_q = embedding_inner(q, q, bandwidth);
    let members: Vec<usize> = (0..n).collect();
    from_gram(|i, j| gram[i * n + j], &cross, self_q, &members)
}

/// Leave-one-out kernel spatial depth of every cloud, sharing one Gram matrix.
pub fn kernel_spatial_all(clouds: &[Cloud], bandwidth: f64) -> Result<Vec<f64>> {
    let n = clouds.len();
    if n < 2 {
        return Err(Error::TooFewDistributions(n));
    }
    super::check_same_dim(clouds)?;
    let gram = embedding_gram(clouds, bandwidth)?;
    (0..n)
        .map(|q| {
            let members: Vec<usize> = (0..n).filter(|&i| i != q).collect();
            from_gram(
                |i, j| gram[i * n + j],
                &gram[q * n..(q + 1) * n],
                gram[q * n + q],
                &members,
            )
        })
        .collect()
}
