use rayon::prelude::*;

use crate::cloud::Cloud;
use crate::error::{Error, Result};
use crate::numeric::{exact_sum, squared_distance, Neumaier};
use crate::ot::{barycentric_map, solve_ot, Coupling, DistanceMatrix};

/// Radicands below this are reported instead of clamped.
pub const RADICAND_FLOOR: f64 = -1e-8;

/// Displacement `x - T(x)` of every query atom under one optimal plan.
struct Field {
    disp: Vec<f64>,
    /// `W2^2`, the transport cost of the plan.
    cost: f64,
    /// `sum_j q_j |x_j - T(x_j)|^2`. Equals `cost` for permutation plans.
    bary: f64,
}

fn field(q: &Cloud, p: &Cloud, plan: &Coupling) -> Result<Field> {
    let map = barycentric_map(plan, q, p)?;
    let d = q.dim();
    let mut disp = Vec::with_capacity(q.len() * d);
    for j in 0..q.len() {
        disp.extend(q.point(j).iter().zip(map.image(j)).map(|(x, t)| x - t));
    }
    let bary =
        exact_sum((0..q.len()).map(|j| q.weight(j) * squared_distance(q.point(j), map.image(j))));
    Ok(Field {
        disp,
        cost: plan.transport_cost(q, p),
        bary,
    })
}

/// Running sum of normalized displacement fields for one query.
struct Accumulator {
    sum: Vec<Neumaier>,
    count: usize,
    /// `bary / cost` of the first nonzero field, used when the population
    /// has a single member.
    single: f64,
}

impl Accumulator {
    fn new(len: usize) -> Self {
        Self {
            sum: vec![Neumaier::new(); len],
            count: 0,
            single: 0.0,
        }
    }

    fn add(&mut self, f: &Field) {
        self.count += 1;
        if f.cost <= 0.0 {
            return;
        }
        let w = f.cost.sqrt();
        for (acc, x) in self.sum.iter_mut().zip(&f.disp) {
            acc.add(x / w);
        }
        if self.count == 1 {
            self.single = f.bary / f.cost;
        }
    }

    fn depth(&self, q: &Cloud) -> Result<f64> {
        if self.count == 0 {
            return Err(Error::EmptyPopulation);
        }
        let radicand = if self.count == 1 {
            self.single
        } else {
            let n = self.count as f64;
            let d = q.dim();
            exact_sum((0..q.len()).map(|j| {
                let norm2: f64 = self.sum[j * d..(j + 1) * d]
                    .iter()
                    .map(|s| {
                        let v = s.value() / n;
                        v * v
                    })
                    .sum();
                q.weight(j) * norm2
            }))
        };
        finish(radicand)
    }
}

/// `1 - sqrt(r)` with `r` clamped to `[0, 1]`.
pub(crate) fn finish(radicand: f64) -> Result<f64> {
    if radicand.is_nan() || radicand < RADICAND_FLOOR {
        return Err(Error::Numerical(format!(
            "depth radicand {radicand} is negative"
        )));
    }
    Ok(1.0 - radicand.clamp(0.0, 1.0).sqrt())
}

fn check_dims(q: &Cloud, population: &[Cloud]) -> Result<()> {
    match population.iter().find(|p| p.dim() != q.dim()) {
        Some(p) => Err(Error::DimensionMismatch {
            left: q.dim(),
            right: p.dim(),
        }),
        None => Ok(()),
    }
}

/// Empirical Wasserstein spatial depth of `q` with respect to `population`.
///
/// `exclude` drops one member (leave-one-out when `q` belongs to the
/// population). Members at distance zero from `q` contribute a zero
/// displacement but still count in the average.
pub fn wsd_empirical(q: &Cloud, population: &[Cloud], exclude: Option<usize>) -> Result<f64> {
    check_dims(q, population)?;
    let members: Vec<usize> = (0..population.len())
        .filter(|&i| Some(i) != exclude)
        .collect();
    if members.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let fields: Vec<Field> = members
        .par_iter()
        .map(|&i| {
            let p = &population[i];
            field(q, p, &solve_ot(q, p)?)
        })
        .collect::<Result<_>>()?;
    let mut acc = Accumulator::new(q.len() * q.dim());
    for f in &fields {
        acc.add(f);
    }
    acc.depth(q)
}

/// Leave-one-out depth of every cloud, plus the pairwise distance matrix.
///
/// Each unordered pair is solved once and both orientations of the plan are
/// used. Contributions reach every query in ascending member order, so the
/// values agree bit for bit with [`wsd_empirical`] called with `exclude`.
pub fn wsd_sweep(clouds: &[Cloud]) -> Result<(Vec<f64>, DistanceMatrix)> {
    let n = clouds.len();
    if n < 2 {
        return Err(Error::TooFewDistributions(n));
    }
    for (j, c) in clouds.iter().enumerate() {
        if c.dim() != clouds[0].dim() {
            return Err(Error::Pair {
                i: 0,
                j,
                source: Box::new(Error::DimensionMismatch {
                    left: clouds[0].dim(),
                    right: c.dim(),
                }),
            });
        }
    }

    let mut acc: Vec<Accumulator> = clouds
        .iter()
        .map(|c| Accumulator::new(c.len() * c.dim()))
        .collect();
    let mut dist = vec![0.0; n * n];
    for i in 0..n {
        let row: Vec<(Field, Field)> = (i + 1..n)
            .into_par_iter()
            .map(|k| {
                let (a, b) = (&clouds[i], &clouds[k]);
                let pair = || -> Result<(Field, Field)> {
                    let plan = solve_ot(a, b)?;
                    Ok((field(a, b, &plan)?, field(b, a, &plan.transpose())?))
                };
                pair().map_err(|e| Error::Pair {
                    i,
                    j: k,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()?;
        for (k, (fwd, back)) in (i + 1..n).zip(&row) {
            acc[i].add(fwd);
            acc[k].add(back);
            let w = fwd.cost.max(0.0).sqrt();
            dist[i * n + k] = w;
            dist[k * n + i] = w;
        }
    }
    let values = acc
        .iter()
        .zip(clouds)
        .map(|(a, c)| a.depth(c))
        .collect::<Result<Vec<_>>>()?;
    Ok((values, DistanceMatrix::from_fn(n, |i, k| dist[i * n + k])))
}

/// Depth through the glued three-plan expression: the average over ordered
/// member pairs of the `L2(q)` inner product of their normalized
/// displacement fields, each field integrated against its own plan.
///
/// Mathematically this is the same number as [`wsd_empirical`]; it is kept
/// as a separate route that never forms the barycentric map.
pub fn wsd_discrete(q: &Cloud, population: &[Cloud], exclude: Option<usize>) -> Result<f64> {
    check_dims(q, population)?;
    let members: Vec<usize> = (0..population.len())
        .filter(|&i| Some(i) != exclude)
        .collect();
    if members.is_empty() {
        return Err(Error::EmptyPopulation);
    }
    let d = q.dim();
    // v_P(x) = sum_y pi(x, y) / q_x * (x - y) / W2(q, P). Conditional
    // independence of y and y' given x makes each Gram entry an inner
    // product of two such fields, the diagonal included. The fields are kept
    // unnormalized so that a permutation plan's diagonal entry is exactly 1.
    let fields: Vec<Option<(Vec<f64>, f64)>> = members
        .par_iter()
        .map(|&i| {
            let p = &population[i];
            let plan = solve_ot(q, p)?;
            let cost = plan.transport_cost(q, p);
            if cost <= 0.0 {
                return Ok(None);
            }
            let mut u = vec![0.0; q.len() * d];
            for e in plan.entries() {
                let (x, y) = (q.point(e.source), p.point(e.target));
                let scale = e.mass / q.weight(e.source);
                for (o, (xk, yk)) in u[e.source * d..(e.source + 1) * d]
                    .iter_mut()
                    .zip(x.iter().zip(y))
                {
                    *o += scale * (xk - yk);
                }
            }
            Ok(Some((u, cost)))
        })
        .collect::<Result<_>>()?;

    let inner = |ua: &[f64], ub: &[f64]| {
        exact_sum((0..q.len()).map(|j| {
            let dot: f64 = ua[j * d..(j + 1) * d]
                .iter()
                .zip(&ub[j * d..(j + 1) * d])
                .map(|(s, t)| s * t)
                .sum();
            q.weight(j) * dot
        }))
    };
    let mut total = Neumaier::new();
    for (a, fa) in fields.iter().enumerate() {
        let Some((ua, ca)) = fa else { continue };
        total.add(inner(ua, ua) / ca);
        for (ub, cb) in fields[a + 1..].iter().flatten() {
            total.add(2.0 * inner(ua, ub) / (ca.sqrt() * cb.sqrt()));
        }
    }
    let n = members.len();
    finish(total.value() / (n * n) as f64)
}
