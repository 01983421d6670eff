//! Acceptance run: one line per criterion.
//!
//! Exits 0 after reporting so the workspace test run completes; set
//! `ACCEPTANCE_STRICT=1` to turn any FAIL into a failing exit status.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::process::Command;
use std::time::{Duration, Instant};

use nalgebra::DMatrix;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use wsd_core::depth::{depth_all, wsd_all, wsd_discrete, wsd_empirical, Method};
use wsd_core::numeric::{mean, skewness_kurtosis, squared_distance};
use wsd_core::sim::{
    cloud_rng, run_consistency, run_location_equivalence, run_outlier_experiment, Experiment,
    ExperimentConfig, Law,
};
use wsd_core::{solve_ot, Cloud};

const OT_TOL: f64 = 1e-9;
const BURES_REL_TOL: f64 = 0.05;
const CONSISTENCY_TOL: f64 = 0.10;
const LOCATION_MIN_RHO: f64 = 0.90;
const LOCATION_MAX_GAP: f64 = 0.15;
const RIGID_TOL: f64 = 1e-9;
const DISCRETE_TOL: f64 = 1e-10;
const MAX_SKEW: f64 = 0.5;
const MAX_EXCESS_KURTOSIS: f64 = 1.0;

#[derive(Clone, Copy, PartialEq)]
enum Status {
    Pass,
    Fail,
    Warn,
}

struct Verdict {
    ok: bool,
    detail: String,
}

fn verdict(ok: bool, detail: String) -> Verdict {
    Verdict { ok, detail }
}

fn within(elapsed: Duration, limit_s: u64) -> bool {
    elapsed <= Duration::from_secs(limit_s)
}

fn random_cloud(rng: &mut StdRng, m: usize, d: usize) -> Cloud {
    Cloud::uniform((0..m * d).map(|_| rng.random_range(-1.0..1.0)).collect(), d).unwrap()
}

fn random_weighted(rng: &mut StdRng, m: usize, d: usize) -> Cloud {
    let raw: Vec<f64> = (0..m).map(|_| rng.random_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let mut w: Vec<f64> = raw.iter().map(|x| x / total).collect();
    let rest: f64 = w[1..].iter().sum();
    w[0] = 1.0 - rest;
    Cloud::weighted(
        (0..m * d).map(|_| rng.random_range(-1.0..1.0)).collect(),
        d,
        w,
    )
    .unwrap()
}

/// Every permutation cost of `a -> b`, in no particular order.
fn permutation_costs(a: &Cloud, b: &Cloud) -> Vec<f64> {
    let m = a.len();
    let mut perm: Vec<usize> = (0..m).collect();
    let mut out = Vec::new();
    // Heap's algorithm.
    let mut c = vec![0; m];
    let cost = |p: &[usize]| {
        (0..m)
            .map(|i| squared_distance(a.point(i), b.point(p[i])))
            .sum::<f64>()
            / m as f64
    };
    out.push(cost(&perm));
    let mut i = 0;
    while i < m {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            out.push(cost(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    out
}

fn c1_ot_oracle() -> Verdict {
    let start = Instant::now();
    let mut rng = StdRng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    for _ in 0..200 {
        let (m, d) = (rng.random_range(1..=7), rng.random_range(1..=3));
        let (a, b) = (random_cloud(&mut rng, m, d), random_cloud(&mut rng, m, d));
        let got = solve_ot(&a, &b).unwrap().transport_cost(&a, &b);
        let best = permutation_costs(&a, &b)
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        worst = worst.max((got - best).abs());
    }
    let t = start.elapsed();
    verdict(
        worst <= OT_TOL && within(t, 10),
        format!("200 pairs, m<=7, d<=3: max |cost - brute force| = {worst:.2e} (tol {OT_TOL:e}), {t:.1?} (limit 10 s)"),
    )
}

/// `W2` between 2-D Gaussians: `tr sqrt(M) = sqrt(tr M + 2 sqrt(det M))` for
/// 2x2 positive semidefinite `M = A^(1/2) B A^(1/2)`, whose trace is `tr(AB)`.
fn bures_2d(ma: [f64; 2], a: [[f64; 2]; 2], mb: [f64; 2], b: [[f64; 2]; 2]) -> f64 {
    let tr = |m: [[f64; 2]; 2]| m[0][0] + m[1][1];
    let det = |m: [[f64; 2]; 2]| m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let tr_ab = a[0][0] * b[0][0] + a[0][1] * b[1][0] + a[1][0] * b[0][1] + a[1][1] * b[1][1];
    let cross = (tr_ab + 2.0 * (det(a) * det(b)).sqrt()).sqrt();
    let shift = (ma[0] - mb[0]).powi(2) + (ma[1] - mb[1]).powi(2);
    (shift + tr(a) + tr(b) - 2.0 * cross).sqrt()
}

fn gaussian_law(mean: [f64; 2], cov: [[f64; 2]; 2]) -> Law {
    let l = nalgebra::Cholesky::new(DMatrix::from_fn(2, 2, |i, j| cov[i][j]))
        .unwrap()
        .l();
    Law::Gaussian {
        mean: mean.to_vec(),
        factor: Some(l),
        sd: 1.0,
    }
}

fn c2_bures() -> Verdict {
    let start = Instant::now();
    let (ma, a) = ([0.0, 0.0], [[1.0, 0.3], [0.3, 0.5]]);
    let (mb, b) = ([1.0, -1.0], [[2.0, -0.4], [-0.4, 1.0]]);
    let exact = bures_2d(ma, a, mb, b);
    let (la, lb) = (gaussian_law(ma, a), gaussian_law(mb, b));
    let m = 2000;
    let errors: Vec<f64> = (0..20)
        .map(|seed| {
            let x = Cloud::uniform(la.sample(m, &mut cloud_rng(seed, 0, 0)).unwrap(), 2).unwrap();
            let y = Cloud::uniform(lb.sample(m, &mut cloud_rng(seed, 0, 1)).unwrap(), 2).unwrap();
            (wsd_core::w2(&x, &y).unwrap() - exact).abs() / exact
        })
        .collect();
    let good = errors.iter().filter(|&&e| e <= BURES_REL_TOL).count();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    let t = start.elapsed();
    verdict(
        good >= 19 && within(t, 120),
        format!(
            "m=2000, W2 exact {exact:.5}: {good}/20 seeds within {:.0}% (need 19), worst {:.2}%, {t:.1?} (limit 2 min)",
            BURES_REL_TOL * 100.0,
            worst * 100.0
        ),
    )
}

fn consistency(case: u8, grid: Option<Vec<f64>>) -> (bool, String) {
    let mut c = ExperimentConfig::new(Experiment::Consistency, case);
    c.n = 200;
    c.m = 200;
    c.repetitions = 20;
    c.grid = grid;
    let rows = run_consistency(&c).unwrap();
    let mut ok = true;
    let parts: Vec<String> = rows
        .iter()
        .map(|r| {
            let gap = (r.mean - r.analytic).abs();
            ok &= gap <= CONSISTENCY_TOL;
            format!(
                "{}: {:.3} vs {:.4} (gap {gap:.3})",
                r.param, r.mean, r.analytic
            )
        })
        .collect();
    (ok, parts.join(", "))
}

fn c3_consistency_exponential() -> Verdict {
    let start = Instant::now();
    let (ok, text) = consistency(1, Some(vec![0.3, 0.5, 0.8]));
    let t = start.elapsed();
    verdict(
        ok && within(t, 600),
        format!("n=m=200, 20 reps, rate {text}; tol {CONSISTENCY_TOL}, {t:.1?} (limit 10 min)"),
    )
}

fn c4_consistency_other_cases() -> Verdict {
    let start = Instant::now();
    let mut ok = true;
    let mut text = Vec::new();
    for (case, label) in [
        (2, "weibull shape"),
        (3, "gaussian center"),
        (4, "square side"),
    ] {
        let (good, t) = consistency(case, None);
        ok &= good;
        text.push(format!("{label} {t}"));
    }
    verdict(
        ok,
        format!(
            "n=m=200, 20 reps; {}; tol {CONSISTENCY_TOL}, {:.1?}",
            text.join("; "),
            start.elapsed()
        ),
    )
}

fn c5_location() -> Verdict {
    let start = Instant::now();
    let mut c = ExperimentConfig::new(Experiment::LocationEquivalence, 1);
    c.n = 100;
    c.m = 300;
    c.d = Some(5);
    let run = &run_location_equivalence(&c).unwrap()[0];
    let t = start.elapsed();
    verdict(
        run.spearman >= LOCATION_MIN_RHO && run.max_gap <= LOCATION_MAX_GAP && within(t, 900),
        format!(
            "n=100, m=300, d=5: spearman {:.4} (need >= {LOCATION_MIN_RHO}), max gap {:.4} (need <= {LOCATION_MAX_GAP}), {t:.1?} (limit 15 min)",
            run.spearman, run.max_gap
        ),
    )
}

fn c6_outliers() -> Verdict {
    let start = Instant::now();
    let mut c = ExperimentConfig::new(Experiment::Outliers, 1);
    c.n = 100;
    c.m = 200;
    c.repetitions = 10;
    let runs = run_outlier_experiment(&c).unwrap();
    let bottom = runs.iter().filter(|r| r.bottom).count();
    // Which planted clouds failed to separate, by tag order.
    let tags = [
        "gaussian-shifted",
        "gaussian-ar",
        "gamma",
        "uniform-wide",
        "beta",
        "multinomial",
    ];
    let mut missed = vec![0; 6];
    for r in &runs {
        let threshold = (0..r.report.len())
            .filter(|i| !r.planted.contains(i))
            .map(|i| r.report.values[i])
            .fold(f64::INFINITY, f64::min);
        for (k, &i) in r.planted.iter().enumerate() {
            if r.report.values[i] >= threshold {
                missed[k] += 1;
            }
        }
    }
    let missed: Vec<String> = tags
        .iter()
        .zip(&missed)
        .filter(|(_, &n)| n > 0)
        .map(|(t, n)| format!("{t} {n}x"))
        .collect();
    verdict(
        bottom >= 9,
        format!(
            "n=100+6, m=200, d=10: planted clouds hold the 6 smallest depths in {bottom}/10 reps (need 9); not below every regular cloud: {}; {:.1?}",
            if missed.is_empty() { "none".to_string() } else { missed.join(", ") },
            start.elapsed()
        ),
    )
}

fn rotation(rng: &mut StdRng, d: usize) -> Vec<Vec<f64>> {
    // Gram-Schmidt on a random matrix.
    let mut basis: Vec<Vec<f64>> = Vec::new();
    while basis.len() < d {
        let mut v: Vec<f64> = (0..d).map(|_| rng.random_range(-1.0..1.0)).collect();
        for b in &basis {
            let dot: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            v.iter_mut().zip(b).for_each(|(x, y)| *x -= dot * y);
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-3 {
            basis.push(v.into_iter().map(|x| x / norm).collect());
        }
    }
    basis
}

fn moved(c: &Cloud, rot: &[Vec<f64>], shift: &[f64]) -> Cloud {
    c.map_points(|x| {
        rot.iter()
            .zip(shift)
            .map(|(row, s)| row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + s)
            .collect()
    })
    .unwrap()
}

fn c7_axioms() -> Verdict {
    let mut rng = StdRng::seed_from_u64(7);
    let mut failures: Vec<String> = Vec::new();
    let mut worst_rigid: f64 = 0.0;
    for inst in 0..50 {
        let (n, d) = (rng.random_range(3..=6), rng.random_range(1..=3));
        let clouds: Vec<Cloud> = (0..n)
            .map(|_| {
                let m = rng.random_range(1..=6);
                random_cloud(&mut rng, m, d)
            })
            .collect();
        for method in [
            Method::Wsd,
            Method::WsdDiscrete,
            Method::Lens,
            Method::MetricSpatial,
            Method::KernelSpatial { bandwidth: 1.0 },
        ] {
            let values = depth_all(&clouds, method, 0.1).unwrap().values;
            if values
                .iter()
                .any(|v| !(0.0..=method.max_value()).contains(v))
            {
                failures.push(format!("range {method} #{inst}"));
            }
        }
        let rot = rotation(&mut rng, d);
        let shift: Vec<f64> = (0..d).map(|_| rng.random_range(-5.0..5.0)).collect();
        let base = wsd_all(&clouds, 0.1).unwrap().values;
        let turned: Vec<Cloud> = clouds.iter().map(|c| moved(c, &rot, &shift)).collect();
        for (a, b) in base.iter().zip(wsd_all(&turned, 0.1).unwrap().values) {
            worst_rigid = worst_rigid.max((a - b).abs());
        }

        let far: Vec<f64> = [10.0, 100.0, 1000.0]
            .iter()
            .map(|&t| {
                let q = clouds[0]
                    .map_points(|x| {
                        x.iter()
                            .enumerate()
                            .map(|(k, v)| if k == 0 { v + t } else { *v })
                            .collect()
                    })
                    .unwrap();
                wsd_empirical(&q, &clouds[1..], None).unwrap()
            })
            .collect();
        if !(far[0] > far[1] && far[1] > far[2] && far[2] < 1e-3) {
            failures.push(format!("far query #{inst}: {far:?}"));
        }

        let m = rng.random_range(1..=6);
        let (q, p) = (random_cloud(&mut rng, m, d), random_cloud(&mut rng, m, d));
        if wsd_empirical(&q, &[p], None).unwrap() != 0.0 {
            failures.push(format!("single member #{inst}"));
        }
        if wsd_empirical(&q, &[q.clone(), q.clone(), q.clone()], None).unwrap() != 1.0 {
            failures.push(format!("identical population #{inst}"));
        }
    }
    if worst_rigid > RIGID_TOL {
        failures.push(format!("rigid motion gap {worst_rigid:.2e}"));
    }
    verdict(
        failures.is_empty(),
        format!(
            "50 instances: ranges, rigid motion (max gap {worst_rigid:.1e}, tol {RIGID_TOL:e}), far query at t=10,100,1000, single member = 0, identical = 1; failures: {}",
            if failures.is_empty() { "none".to_string() } else { failures.join("; ") }
        ),
    )
}

/// Literal glued sum over ordered member pairs and atoms.
fn triple_sum(q: &Cloud, population: &[Cloud]) -> f64 {
    let d = q.dim();
    let plans: Vec<Vec<Vec<f64>>> = population
        .iter()
        .map(|p| {
            let mut dense = vec![vec![0.0; p.len()]; q.len()];
            for e in solve_ot(q, p).unwrap().entries() {
                dense[e.source][e.target] = e.mass;
            }
            dense
        })
        .collect();
    let w: Vec<f64> = population
        .iter()
        .zip(&plans)
        .map(|(p, pi)| {
            let mut c = 0.0;
            for x in 0..q.len() {
                for y in 0..p.len() {
                    c += pi[x][y] * squared_distance(q.point(x), p.point(y));
                }
            }
            c.sqrt()
        })
        .collect();
    let n = population.len();
    let mut total = 0.0;
    for a in 0..n {
        for b in 0..n {
            if w[a] == 0.0 || w[b] == 0.0 {
                continue;
            }
            for x in 0..q.len() {
                for y in 0..population[a].len() {
                    for y2 in 0..population[b].len() {
                        let glue = plans[a][x][y] * plans[b][x][y2] / q.weight(x);
                        let dot: f64 = (0..d)
                            .map(|k| {
                                (q.point(x)[k] - population[a].point(y)[k])
                                    * (q.point(x)[k] - population[b].point(y2)[k])
                            })
                            .sum();
                        total += glue * dot / (w[a] * w[b]);
                    }
                }
            }
        }
    }
    1.0 - (total / (n * n) as f64).clamp(0.0, 1.0).sqrt()
}

fn unique_optimum(q: &Cloud, p: &Cloud) -> bool {
    let mut costs = permutation_costs(q, p);
    costs.sort_by(f64::total_cmp);
    costs.len() < 2 || costs[1] - costs[0] > 1e-6
}

fn c8_discrete() -> Verdict {
    let mut rng = StdRng::seed_from_u64(8);
    let mut worst_uniform: f64 = 0.0;
    let mut done = 0;
    while done < 100 {
        let (m, d, n) = (
            rng.random_range(2..=6),
            rng.random_range(1..=3),
            rng.random_range(2..=5),
        );
        let q = random_cloud(&mut rng, m, d);
        let pop: Vec<Cloud> = (0..n).map(|_| random_cloud(&mut rng, m, d)).collect();
        if !pop.iter().all(|p| unique_optimum(&q, p)) {
            continue;
        }
        let gap =
            (wsd_discrete(&q, &pop, None).unwrap() - wsd_empirical(&q, &pop, None).unwrap()).abs();
        worst_uniform = worst_uniform.max(gap);
        done += 1;
    }
    let mut worst_weighted: f64 = 0.0;
    for _ in 0..20 {
        let d = rng.random_range(1..=2);
        let mq = rng.random_range(1..=5);
        let q = random_weighted(&mut rng, mq, d);
        let pop: Vec<Cloud> = (0..rng.random_range(1..=4))
            .map(|_| {
                let m = rng.random_range(1..=5);
                random_weighted(&mut rng, m, d)
            })
            .collect();
        let gap = (wsd_discrete(&q, &pop, None).unwrap() - triple_sum(&q, &pop)).abs();
        worst_weighted = worst_weighted.max(gap);
    }
    verdict(
        worst_uniform <= DISCRETE_TOL && worst_weighted <= DISCRETE_TOL,
        format!(
            "100 unique-permutation instances: max gap {worst_uniform:.1e}; 20 weighted m<=5 vs triple sum: max gap {worst_weighted:.1e} (tol {DISCRETE_TOL:e})"
        ),
    )
}

fn c9_clt() -> Verdict {
    let start = Instant::now();
    let mut c = ExperimentConfig::new(Experiment::Consistency, 1);
    c.n = 200;
    c.m = 500;
    c.repetitions = 200;
    c.grid = Some(vec![0.3]);
    let values = &run_consistency(&c).unwrap()[0].values;
    let (skew, kurt) = skewness_kurtosis(values);
    verdict(
        skew.abs() < MAX_SKEW && kurt.abs() < MAX_EXCESS_KURTOSIS,
        format!(
            "rate 0.3, n=200, m=500, 200 reps (mean {:.4}): skewness {skew:.3} (|.| < {MAX_SKEW}), excess kurtosis {kurt:.3} (|.| < {MAX_EXCESS_KURTOSIS}), {:.1?}",
            mean(values),
            start.elapsed()
        ),
    )
}

fn write_climate(path: &Path) {
    let mut rng = StdRng::seed_from_u64(1940);
    let mut text = String::from("year");
    for k in 1..=12 {
        text.push_str(&format!(",m{k}"));
    }
    text.push('\n');
    for year in 1870..2020 {
        let shift: f64 = rng.random_range(-0.5..0.5);
        for _ in 0..40 {
            text.push_str(&year.to_string());
            for _ in 0..12 {
                text.push_str(&format!(",{}", shift + rng.random_range(-1.0..1.0)));
            }
            text.push('\n');
        }
    }
    std::fs::write(path, text).unwrap();
}

fn c10_determinism() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("climate.csv");
    write_climate(&input);
    let input = input.to_str().unwrap().to_string();
    let mut jobs: Vec<(String, Vec<String>)> = Vec::new();
    for method in [
        "wsd",
        "wsd-discrete",
        "lens",
        "metric-spatial",
        "kernel-spatial",
    ] {
        let args = format!("depth --input {input} --group-col year --method {method} --seed 3");
        jobs.push((
            format!("depth {method}"),
            args.split(' ').map(String::from).collect(),
        ));
    }
    for (exp, extra) in [
        ("consistency", "--case 3 --n 20 --m 30 --reps 2"),
        (
            "location-equivalence",
            "--case 2 --n 15 --m 25 --d 3 --reps 2",
        ),
        ("outliers", "--case 1 --n 20 --m 20 --reps 2"),
        ("kernel-comparison", "--case 2 --n 15 --m 20 --reps 2"),
    ] {
        let args = format!("experiment --experiment {exp} {extra} --seed 11");
        jobs.push((
            format!("experiment {exp}"),
            args.split(' ').map(String::from).collect(),
        ));
    }
    let mut mismatched = Vec::new();
    for (name, args) in &jobs {
        let mut outputs = Vec::new();
        for threads in [1, 4, 8] {
            let out = dir.path().join(format!("out-{threads}"));
            let summary = dir.path().join(format!("summary-{threads}"));
            let mut cmd = Command::new(env!("CARGO_BIN_EXE_wsd"));
            cmd.args(args).args([
                "--threads",
                &threads.to_string(),
                "--out",
                out.to_str().unwrap(),
            ]);
            if args[0] == "experiment" {
                cmd.args(["--summary", summary.to_str().unwrap()]);
            }
            let status = cmd.status().unwrap();
            assert!(
                status.success(),
                "{name} with {threads} threads exited with {status}"
            );
            let mut bytes = std::fs::read(&out).unwrap();
            if let Ok(s) = std::fs::read(&summary) {
                bytes.extend(s);
            }
            outputs.push(bytes);
        }
        if outputs.windows(2).any(|w| w[0] != w[1]) {
            mismatched.push(name.clone());
        }
    }
    verdict(
        mismatched.is_empty(),
        format!(
            "{} commands at threads 1, 4, 8: differing outputs: {}",
            jobs.len(),
            if mismatched.is_empty() {
                "none".to_string()
            } else {
                mismatched.join(", ")
            }
        ),
    )
}

fn main() {
    let criteria: [(u8, &str, fn() -> Verdict, bool); 10] = [
        (1, "ot-oracle", c1_ot_oracle, false),
        (2, "bures-convergence", c2_bures, false),
        (
            3,
            "consistency-exponential",
            c3_consistency_exponential,
            false,
        ),
        (
            4,
            "consistency-weibull-gaussian-uniform",
            c4_consistency_other_cases,
            false,
        ),
        (5, "location-equivalence", c5_location, false),
        (6, "outlier-recovery", c6_outliers, false),
        (7, "depth-axioms", c7_axioms, false),
        (8, "discrete-equals-empirical", c8_discrete, false),
        (9, "clt-diagnostic", c9_clt, true),
        (10, "determinism", c10_determinism, false),
    ];
    let mut statuses = Vec::new();
    for (id, name, run, soft) in criteria {
        let (status, detail) = match catch_unwind(AssertUnwindSafe(run)) {
            Ok(v) if v.ok => (Status::Pass, v.detail),
            Ok(v) => (if soft { Status::Warn } else { Status::Fail }, v.detail),
            Err(e) => {
                let msg = e
                    .downcast_ref::<String>()
                    .cloned()
                    .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                    .unwrap_or_default();
                (Status::Fail, format!("panicked: {msg}"))
            }
        };
        let tag = match status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Warn => "WARN",
        };
        println!("criterion {id:>2} {tag} {name}: {detail}");
        statuses.push(status);
    }
    let count = |s: Status| statuses.iter().filter(|&&x| x == s).count();
    println!(
        "acceptance: {} passed, {} failed, {} warned",
        count(Status::Pass),
        count(Status::Fail),
        count(Status::Warn)
    );
    if count(Status::Fail) > 0 && std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1") {
        std::process::exit(1);
    }
}
