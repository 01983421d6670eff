//! Exact discrete optimal transport under squared Euclidean cost.
//!
//! [`solve_ot`] dispatches to a sorted matching for 1-D uniform clouds of
//! equal size, to a dense Jonker-Volgenant assignment for other uniform
//! equal-size pairs, and to a network simplex for everything else.

pub mod assignment;
pub mod network_simplex;

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::cloud::Cloud;
use crate::error::{Error, Result};
use crate::numeric::{exact_sum, squared_distance};

/// Marginal tolerance checked by [`barycentric_map`].
pub const MAP_MARGINAL_TOL: f64 = 1e-6;

/// Reduced-cost termination tolerance of the simplex, relative to the
/// largest cost entry.
pub const SIMPLEX_TOL: f64 = 1e-11;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entry {
    pub source: usize,
    pub target: usize,
    pub mass: f64,
}

/// Sparse transport plan. Entries are sorted by `(source, target)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Coupling {
    entries: Vec<Entry>,
    row_start: Vec<usize>,
    source_size: usize,
    target_size: usize,
}

impl Coupling {
    /// Builds a coupling from arbitrary entries; zero masses are dropped and
    /// duplicate `(source, target)` pairs merged.
    pub fn from_entries(
        source_size: usize,
        target_size: usize,
        mut entries: Vec<Entry>,
    ) -> Result<Self> {
        if let Some(e) = entries
            .iter()
            .find(|e| e.source >= source_size || e.target >= target_size)
        {
            return Err(Error::InvalidParameter(format!(
                "entry ({}, {}) outside a {source_size} x {target_size} plan",
                e.source, e.target
            )));
        }
        if let Some(e) = entries.iter().find(|e| !e.mass.is_finite() || e.mass < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "entry mass {} is negative or not finite",
                e.mass
            )));
        }
        entries.retain(|e| e.mass > 0.0);
        entries.sort_by(|x, y| (x.source, x.target).cmp(&(y.source, y.target)));
        entries.dedup_by(|later, kept| {
            let same = later.source == kept.source && later.target == kept.target;
            if same {
                kept.mass += later.mass;
            }
            same
        });
        Ok(Self::from_sorted(source_size, target_size, entries))
    }

    fn from_sorted(source_size: usize, target_size: usize, entries: Vec<Entry>) -> Self {
        let mut row_start = vec![0usize; source_size + 1];
        for e in &entries {
            row_start[e.source + 1] += 1;
        }
        for i in 0..source_size {
            row_start[i + 1] += row_start[i];
        }
        Self {
            entries,
            row_start,
            source_size,
            target_size,
        }
    }

    fn from_permutation(a: &Cloud, sigma: &[usize]) -> Self {
        let entries = sigma
            .iter()
            .enumerate()
            .map(|(i, &j)| Entry {
                source: i,
                target: j,
                mass: a.weight(i),
            })
            .collect();
        Self::from_sorted(sigma.len(), sigma.len(), entries)
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    /// Entries leaving source atom `i`.
    pub fn row(&self, i: usize) -> &[Entry] {
        &self.entries[self.row_start[i]..self.row_start[i + 1]]
    }

    pub fn source_size(&self) -> usize {
        self.source_size
    }

    pub fn target_size(&self) -> usize {
        self.target_size
    }

    pub fn row_sums(&self) -> Vec<f64> {
        (0..self.source_size)
            .map(|i| exact_sum(self.row(i).iter().map(|e| e.mass)))
            .collect()
    }

    pub fn col_sums(&self) -> Vec<f64> {
        let mut cols = vec![Vec::new(); self.target_size];
        for e in &self.entries {
            cols[e.target].push(e.mass);
        }
        cols.into_iter().map(exact_sum).collect()
    }

    /// Exactly one entry per row and per column.
    pub fn is_permutation(&self) -> bool {
        if self.source_size != self.target_size || self.entries.len() != self.source_size {
            return false;
        }
        let mut seen = vec![false; self.target_size];
        (0..self.source_size).all(|i| {
            let row = self.row(i);
            row.len() == 1 && !std::mem::replace(&mut seen[row[0].target], true)
        })
    }

    pub fn transpose(&self) -> Coupling {
        let mut entries: Vec<Entry> = self
            .entries
            .iter()
            .map(|e| Entry {
                source: e.target,
                target: e.source,
                mass: e.mass,
            })
            .collect();
        entries.sort_by(|x, y| (x.source, x.target).cmp(&(y.source, y.target)));
        Self::from_sorted(self.target_size, self.source_size, entries)
    }

    /// `sum_ij pi_ij |x_i - y_j|^2`, correctly rounded.
    pub fn transport_cost(&self, a: &Cloud, b: &Cloud) -> f64 {
        exact_sum(
            self.entries
                .iter()
                .map(|e| e.mass * squared_distance(a.point(e.source), b.point(e.target))),
        )
    }
}

/// Image of every source atom under a (barycentric) transport map.
#[derive(Debug, Clone, PartialEq)]
pub struct TransportMap {
    images: Vec<f64>,
    dim: usize,
}

impl TransportMap {
    pub fn new(images: Vec<f64>, dim: usize) -> Self {
        debug_assert!(dim > 0 && images.len() % dim == 0);
        Self { images, dim }
    }

    pub fn len(&self) -> usize {
        self.images.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn image(&self, i: usize) -> &[f64] {
        &self.images[i * self.dim..(i + 1) * self.dim]
    }

    pub fn images(&self) -> &[f64] {
        &self.images
    }
}

fn check_pair(a: &Cloud, b: &Cloud) -> Result<()> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            left: a.dim(),
            right: b.dim(),
        });
    }
    Ok(())
}

/// Dense row-major squared Euclidean cost matrix.
pub fn cost_matrix(a: &Cloud, b: &Cloud) -> Vec<f64> {
    let mut cost = Vec::with_capacity(a.len() * b.len());
    for x in a.rows() {
        cost.extend(b.rows().map(|y| squared_distance(x, y)));
    }
    cost
}

/// An optimal coupling of `a` and `b` for the squared Euclidean cost.
///
/// The problem is always solved in one canonical orientation (by cloud
/// content), so `solve_ot(b, a)` is exactly `solve_ot(a, b).transpose()`.
pub fn solve_ot(a: &Cloud, b: &Cloud) -> Result<Coupling> {
    check_pair(a, b)?;
    if a.content_cmp(b) == Ordering::Greater {
        return Ok(solve_oriented(b, a)?.transpose());
    }
    solve_oriented(a, b)
}

/// Costs between the mean-centered clouds. Translating either cloud only
/// adds a row term and a column term to every cost, which leaves the optimal
/// plans unchanged, while offset clouds slow both solvers down a lot.
fn centered_cost_matrix(a: &Cloud, b: &Cloud) -> Vec<f64> {
    let (ma, mb) = (a.mean(), b.mean());
    let shift: Vec<f64> = ma.iter().zip(&mb).map(|(x, y)| x - y).collect();
    let mut cost = Vec::with_capacity(a.len() * b.len());
    let mut xs = vec![0.0; a.dim()];
    for x in a.rows() {
        xs.iter_mut().zip(x.iter().zip(&shift)).for_each(|(o, (v, s))| *o = v - s);
        cost.extend(b.rows().map(|y| squared_distance(&xs, y)));
    }
    cost
}

fn solve_oriented(a: &Cloud, b: &Cloud) -> Result<Coupling> {
    let uniform_square = a.is_uniform() && b.is_uniform() && a.len() == b.len();
    if uniform_square {
        if a.dim() == 1 {
            return Ok(Coupling::from_permutation(a, &sorted_matching(a, b)));
        }
        let sigma = assignment::solve(a.len(), &centered_cost_matrix(a, b));
        return Ok(Coupling::from_permutation(a, &sigma));
    }
    let sol = network_simplex::solve(a.weights(), b.weights(), &centered_cost_matrix(a, b), SIMPLEX_TOL)?;
    let entries = sol
        .flows
        .into_iter()
        .map(|(source, target, mass)| Entry {
            source,
            target,
            mass,
        })
        .collect();
    Ok(Coupling::from_sorted(a.len(), b.len(), entries))
}

/// Monotone matching of two equal-size 1-D clouds. Ties keep index order.
fn sorted_matching(a: &Cloud, b: &Cloud) -> Vec<usize> {
    let order = |c: &Cloud| {
        let mut idx: Vec<usize> = (0..c.len()).collect();
        idx.sort_by(|&i, &j| c.point(i)[0].total_cmp(&c.point(j)[0]).then(i.cmp(&j)));
        idx
    };
    let (oa, ob) = (order(a), order(b));
    let mut sigma = vec![0; a.len()];
    for (&i, &j) in oa.iter().zip(&ob) {
        sigma[i] = j;
    }
    sigma
}

/// Optimal coupling together with its transport cost `W2^2`.
pub fn transport(a: &Cloud, b: &Cloud) -> Result<(Coupling, f64)> {
    let plan = solve_ot(a, b)?;
    let cost = plan.transport_cost(a, b);
    Ok((plan, cost))
}

/// 2-Wasserstein distance between two clouds.
pub fn w2(a: &Cloud, b: &Cloud) -> Result<f64> {
    Ok(transport(a, b)?.1.max(0.0).sqrt())
}

/// Conditional mean of the target given each source atom.
pub fn barycentric_map(plan: &Coupling, a: &Cloud, b: &Cloud) -> Result<TransportMap> {
    check_pair(a, b)?;
    if plan.source_size() != a.len() || plan.target_size() != b.len() {
        return Err(Error::LengthMismatch {
            left: plan.source_size() * plan.target_size(),
            right: a.len() * b.len(),
        });
    }
    let d = a.dim();
    let mut images = vec![0.0; a.len() * d];
    for i in 0..a.len() {
        let row = plan.row(i);
        let mass = exact_sum(row.iter().map(|e| e.mass));
        let w = a.weight(i);
        if (mass - w).abs() > MAP_MARGINAL_TOL {
            return Err(Error::MarginalMismatch {
                row: i,
                expected: w,
                actual: mass,
            });
        }
        let out = &mut images[i * d..(i + 1) * d];
        if let [only] = row {
            out.copy_from_slice(b.point(only.target));
            continue;
        }
        for e in row {
            for (o, y) in out.iter_mut().zip(b.point(e.target)) {
                *o += e.mass * y;
            }
        }
        for o in out.iter_mut() {
            *o /= w;
        }
    }
    Ok(TransportMap::new(images, d))
}

/// Symmetric matrix of pairwise distances with an exactly zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn from_fn<F: FnMut(usize, usize) -> f64>(n: usize, mut f: F) -> Self {
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = f(i, j);
                data[i * n + j] = v;
                data[j * n + i] = v;
            }
        }
        Self { n, data }
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }
}

/// Solves every unordered pair once. Pairs may run in parallel on the
/// current rayon pool; each entry comes from an independent solve, so the
/// matrix does not depend on scheduling.
pub fn w2_matrix(clouds: &[Cloud]) -> Result<DistanceMatrix> {
    let n = clouds.len();
    if let Some(first) = clouds.first() {
        for (j, c) in clouds.iter().enumerate().skip(1) {
            if c.dim() != first.dim() {
                return Err(Error::Pair {
                    i: 0,
                    j,
                    source: Box::new(Error::DimensionMismatch {
                        left: first.dim(),
                        right: c.dim(),
                    }),
                });
            }
        }
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let values: Vec<f64> = pairs
        .par_iter()
        .map(|&(i, j)| {
            w2(&clouds[i], &clouds[j]).map_err(|e| Error::Pair {
                i,
                j,
                source: Box::new(e),
            })
        })
        .collect::<Result<_>>()?;
    let mut it = values.into_iter();
    Ok(DistanceMatrix::from_fn(n, |_, _| {
        it.next().expect("one value per pair")
    }))
}
