//! Dense linear assignment by Jonker-Volgenant shortest augmenting paths.
//!
//! Column reduction seeds the duals and a partial assignment, then each
//! remaining free row is assigned along a Dijkstra-like shortest path in the
//! reduced costs. (The augmenting row reduction phase of the original method
//! is left out: on Euclidean costs it cost more than it saved.)
//!
//! Scans run in ascending column order, so among equally cheap columns the
//! lowest index is taken.

const NONE: usize = usize::MAX;

/// Solves `min sum_i cost[i][sigma(i)]` over permutations of an `n x n`
/// row-major matrix. Returns `sigma` as a row-to-column vector.
pub fn solve(n: usize, cost: &[f64]) -> Vec<usize> {
    assert_eq!(cost.len(), n * n, "cost matrix must be n x n");
    match n {
        0 => return Vec::new(),
        1 => return vec![0],
        _ => {}
    }

    let mut row_sol = vec![NONE; n];
    let mut col_sol = vec![NONE; n];
    let mut v = vec![0.0; n];
    let mut free_rows = vec![0usize; n];

    let n_free = column_reduction(n, cost, &mut row_sol, &mut col_sol, &mut v, &mut free_rows);
    if n_free > 0 {
        augment(
            n,
            cost,
            &free_rows[..n_free],
            &mut row_sol,
            &mut col_sol,
            &mut v,
        );
    }
    row_sol
}

#[inline]
fn c(cost: &[f64], n: usize, i: usize, j: usize) -> f64 {
    cost[i * n + j]
}

fn column_reduction(
    n: usize,
    cost: &[f64],
    row_sol: &mut [usize],
    col_sol: &mut [usize],
    v: &mut [f64],
    free_rows: &mut [usize],
) -> usize {
    v.fill(f64::INFINITY);
    col_sol.fill(0);
    for i in 0..n {
        for j in 0..n {
            let x = c(cost, n, i, j);
            if x < v[j] {
                v[j] = x;
                col_sol[j] = i;
            }
        }
    }

    let mut unique = vec![true; n];
    for j in (0..n).rev() {
        let i = col_sol[j];
        if row_sol[i] == NONE {
            row_sol[i] = j;
        } else {
            unique[i] = false;
            col_sol[j] = NONE;
        }
    }

    let mut n_free = 0;
    for i in 0..n {
        if row_sol[i] == NONE {
            free_rows[n_free] = i;
            n_free += 1;
        } else if unique[i] {
            let j = row_sol[i];
            let mut min = f64::INFINITY;
            for j2 in 0..n {
                if j2 != j {
                    let x = c(cost, n, i, j2) - v[j2];
                    if x < min {
                        min = x;
                    }
                }
            }
            v[j] -= min;
        }
    }
    n_free
}

fn augment(
    n: usize,
    cost: &[f64],
    free_rows: &[usize],
    row_sol: &mut [usize],
    col_sol: &mut [usize],
    v: &mut [f64],
) {
    let mut pred = vec![0usize; n];
    let mut cols = vec![0usize; n];
    let mut d = vec![0.0; n];
    for &free_i in free_rows {
        let mut j = find_path(n, cost, free_i, col_sol, v, &mut pred, &mut cols, &mut d);
        loop {
            let i = pred[j];
            col_sol[j] = i;
            std::mem::swap(&mut j, &mut row_sol[i]);
            if i == free_i {
                break;
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn find_path(
    n: usize,
    cost: &[f64],
    start_i: usize,
    col_sol: &[usize],
    v: &mut [f64],
    pred: &mut [usize],
    cols: &mut [usize],
    d: &mut [f64],
) -> usize {
    for j in 0..n {
        cols[j] = j;
        pred[j] = start_i;
        d[j] = c(cost, n, start_i, j) - v[j];
    }
    let (mut lo, mut hi) = (0usize, 0usize);
    let mut n_ready = 0;
    let mut final_j = NONE;

    while final_j == NONE {
        if lo == hi {
            n_ready = lo;
            hi = collect_minimal(n, lo, d, cols);
            for &j in &cols[lo..hi] {
                if col_sol[j] == NONE {
                    final_j = j;
                    break;
                }
            }
        }
        if final_j == NONE {
            final_j = scan(n, cost, &mut lo, &mut hi, d, cols, pred, col_sol, v);
        }
    }

    let mind = d[cols[lo]];
    for &j in &cols[..n_ready] {
        v[j] += d[j] - mind;
    }
    final_j
}

/// Moves every column of minimal `d` among `cols[lo..]` to the front of
/// that range and returns the end of the moved block.
fn collect_minimal(n: usize, lo: usize, d: &[f64], cols: &mut [usize]) -> usize {
    let mut hi = lo + 1;
    let mut mind = d[cols[lo]];
    for k in hi..n {
        let j = cols[k];
        if d[j] <= mind {
            if d[j] < mind {
                hi = lo;
                mind = d[j];
            }
            cols[k] = cols[hi];
            cols[hi] = j;
            hi += 1;
        }
    }
    hi
}

#[allow(clippy::too_many_arguments)]
fn scan(
    n: usize,
    cost: &[f64],
    plo: &mut usize,
    phi: &mut usize,
    d: &mut [f64],
    cols: &mut [usize],
    pred: &mut [usize],
    col_sol: &[usize],
    v: &[f64],
) -> usize {
    let (mut lo, mut hi) = (*plo, *phi);
    while lo != hi {
        let j = cols[lo];
        lo += 1;
        let i = col_sol[j];
        let mind = d[j];
        let h = c(cost, n, i, j) - v[j] - mind;
        for k in hi..n {
            let j = cols[k];
            let cred = c(cost, n, i, j) - v[j] - h;
            if cred < d[j] {
                d[j] = cred;
                pred[j] = i;
                if cred == mind {
                    if col_sol[j] == NONE {
                        return j;
                    }
                    cols[k] = cols[hi];
                    cols[hi] = j;
                    hi += 1;
                }
            }
        }
    }
    *plo = lo;
    *phi = hi;
    NONE
}
