//! Primal network simplex for the dense transportation problem.
//!
//! The spanning tree is kept in the parent/thread representation with
//! successor counts, and the basis is strongly feasible: when several tree
//! arcs block the cycle, the leaving arc is the last one met walking from the
//! entering arc toward the join node on the second side. That rule is what
//! keeps degenerate pivots from cycling. All real arcs are uncapacitated, so
//! an arc is either in the tree or at its lower bound.

use crate::error::{Error, Result};

const STATE_TREE: i8 = 0;
const STATE_LOWER: i8 = 1;
const DIR_UP: i8 = 1;
const DIR_DOWN: i8 = -1;
const NONE: usize = usize::MAX;

/// Hard cap on pivots; far above what dense transport needs in practice.
const MAX_PIVOTS_PER_ARC: usize = 64;

pub struct Solution {
    /// `(source, target, mass)` with strictly positive mass, sorted.
    pub flows: Vec<(usize, usize, f64)>,
    pub pivots: usize,
}

/// Minimizes `sum_ij f_ij cost[i][j]` subject to row sums `supply` and
/// column sums `demand`. `cost` is row-major `supply.len() x demand.len()`.
/// Pivoting stops once no reduced cost is below `-tol_scale * max(cost)`.
pub fn solve(supply: &[f64], demand: &[f64], cost: &[f64], tol_scale: f64) -> Result<Solution> {
    let (na, nb) = (supply.len(), demand.len());
    assert_eq!(cost.len(), na * nb, "cost matrix shape");
    let mut sp = Simplex::new(supply, demand, cost, tol_scale);
    let pivots = sp.run()?;
    Ok(Solution {
        flows: sp.flows(supply, demand),
        pivots,
    })
}

struct Simplex {
    na: usize,
    nb: usize,
    arc_num: usize,

    source: Vec<usize>,
    target: Vec<usize>,
    cost: Vec<f64>,
    flow: Vec<f64>,
    state: Vec<i8>,

    pi: Vec<f64>,
    parent: Vec<usize>,
    pred: Vec<usize>,
    pred_dir: Vec<i8>,
    thread: Vec<usize>,
    rev_thread: Vec<usize>,
    succ_num: Vec<usize>,
    last_succ: Vec<usize>,
    dirty_revs: Vec<usize>,

    block_size: usize,
    next_arc: usize,
    tol: f64,

    in_arc: usize,
    join: usize,
    u_in: usize,
    v_in: usize,
    u_out: usize,
    delta: f64,
}

impl Simplex {
    fn new(supply: &[f64], demand: &[f64], cost: &[f64], tol_scale: f64) -> Self {
        let (na, nb) = (supply.len(), demand.len());
        let node_num = na + nb;
        let arc_num = na * nb;
        let all_arc_num = arc_num + node_num;
        let root = node_num;

        let mut source = vec![0; all_arc_num];
        let mut target = vec![0; all_arc_num];
        let mut arc_cost = vec![0.0; all_arc_num];
        for i in 0..na {
            for j in 0..nb {
                let e = i * nb + j;
                source[e] = i;
                target[e] = na + j;
                arc_cost[e] = cost[e];
            }
        }
        let max_cost = cost.iter().fold(0.0f64, |m, &c| m.max(c.abs()));
        let art_cost = (max_cost + 1.0) * node_num as f64;

        let node_supply: Vec<f64> = supply
            .iter()
            .copied()
            .chain(demand.iter().map(|d| -d))
            .collect();

        let mut s = Self {
            na,
            nb,
            arc_num,
            source,
            target,
            cost: arc_cost,
            flow: vec![0.0; all_arc_num],
            state: vec![STATE_LOWER; all_arc_num],
            pi: vec![0.0; node_num + 1],
            parent: vec![NONE; node_num + 1],
            pred: vec![NONE; node_num + 1],
            pred_dir: vec![DIR_UP; node_num + 1],
            thread: vec![0; node_num + 1],
            rev_thread: vec![0; node_num + 1],
            succ_num: vec![0; node_num + 1],
            last_succ: vec![0; node_num + 1],
            dirty_revs: Vec::new(),
            block_size: ((arc_num as f64).sqrt().ceil() as usize).max(10),
            next_arc: 0,
            tol: tol_scale * max_cost,
            in_arc: 0,
            join: 0,
            u_in: 0,
            v_in: 0,
            u_out: 0,
            delta: 0.0,
        };

        s.thread[root] = 0;
        s.rev_thread[0] = root;
        s.succ_num[root] = node_num + 1;
        s.last_succ[root] = root - 1;

        for (u, &sup) in node_supply.iter().enumerate() {
            let e = arc_num + u;
            s.parent[u] = root;
            s.pred[u] = e;
            s.thread[u] = u + 1;
            s.rev_thread[u + 1] = u;
            s.succ_num[u] = 1;
            s.last_succ[u] = u;
            s.state[e] = STATE_TREE;
            if sup >= 0.0 {
                s.pred_dir[u] = DIR_UP;
                s.source[e] = u;
                s.target[e] = root;
                s.flow[e] = sup;
                s.cost[e] = 0.0;
                s.pi[u] = 0.0;
            } else {
                s.pred_dir[u] = DIR_DOWN;
                s.source[e] = root;
                s.target[e] = u;
                s.flow[e] = -sup;
                s.cost[e] = art_cost;
                s.pi[u] = art_cost;
            }
        }
        s
    }

    fn run(&mut self) -> Result<usize> {
        let max_pivots = MAX_PIVOTS_PER_ARC * (self.arc_num + self.na + self.nb) + 1000;
        let mut pivots = 0;
        while self.find_entering_arc() {
            self.find_join_node();
            let change = self.find_leaving_arc();
            if !self.delta.is_finite() {
                return Err(Error::Numerical("transport problem is unbounded".into()));
            }
            self.change_flow(change);
            if change {
                self.update_tree_structure();
                self.update_potential();
            }
            pivots += 1;
            if pivots > max_pivots {
                return Err(Error::Numerical(format!(
                    "network simplex exceeded {max_pivots} pivots"
                )));
            }
        }
        Ok(pivots)
    }

    #[inline]
    fn reduced(&self, e: usize) -> f64 {
        self.state[e] as f64 * (self.cost[e] + self.pi[self.source[e]] - self.pi[self.target[e]])
    }

    /// Block search pivot rule over the real arcs.
    fn find_entering_arc(&mut self) -> bool {
        let mut min = -self.tol;
        let mut found = false;
        let mut cnt = self.block_size;
        let m = self.arc_num;
        let mut e = self.next_arc;
        for _ in 0..m {
            let c = self.reduced(e);
            if c < min {
                min = c;
                self.in_arc = e;
                found = true;
            }
            e += 1;
            if e == m {
                e = 0;
            }
            cnt -= 1;
            if cnt == 0 {
                if found {
                    break;
                }
                cnt = self.block_size;
            }
        }
        if found {
            self.next_arc = e;
        }
        found
    }

    fn find_join_node(&mut self) {
        let (mut u, mut v) = (self.source[self.in_arc], self.target[self.in_arc]);
        while u != v {
            if self.succ_num[u] < self.succ_num[v] {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        self.join = u;
    }

    fn find_leaving_arc(&mut self) -> bool {
        // Entering arcs always sit at their lower bound.
        let first = self.source[self.in_arc];
        let second = self.target[self.in_arc];
        self.delta = f64::INFINITY;
        let mut result = 0;

        let mut u = first;
        while u != self.join {
            let e = self.pred[u];
            let d = if self.pred_dir[u] == DIR_UP {
                self.flow[e]
            } else {
                f64::INFINITY
            };
            if d < self.delta {
                self.delta = d;
                self.u_out = u;
                result = 1;
            }
            u = self.parent[u];
        }

        let mut u = second;
        while u != self.join {
            let e = self.pred[u];
            let d = if self.pred_dir[u] == DIR_DOWN {
                self.flow[e]
            } else {
                f64::INFINITY
            };
            if d <= self.delta {
                self.delta = d;
                self.u_out = u;
                result = 2;
            }
            u = self.parent[u];
        }

        if result == 1 {
            self.u_in = first;
            self.v_in = second;
        } else {
            self.u_in = second;
            self.v_in = first;
        }
        result != 0
    }

    fn change_flow(&mut self, change: bool) {
        if self.delta > 0.0 {
            let val = self.delta;
            self.flow[self.in_arc] += val;
            let mut u = self.source[self.in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] -= self.pred_dir[u] as f64 * val;
                u = self.parent[u];
            }
            let mut u = self.target[self.in_arc];
            while u != self.join {
                let e = self.pred[u];
                self.flow[e] += self.pred_dir[u] as f64 * val;
                u = self.parent[u];
            }
        }
        if change {
            self.state[self.in_arc] = STATE_TREE;
            let out = self.pred[self.u_out];
            self.flow[out] = 0.0;
            self.state[out] = STATE_LOWER;
        }
    }

    fn update_tree_structure(&mut self) {
        let u_in = self.u_in;
        let v_in = self.v_in;
        let u_out = self.u_out;
        let join = self.join;
        let in_arc = self.in_arc;

        let old_rev_thread = self.rev_thread[u_out];
        let old_succ_num = self.succ_num[u_out];
        let old_last_succ = self.last_succ[u_out];
        let v_out = self.parent[u_out];

        if u_in == u_out {
            self.parent[u_in] = v_in;
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] {
                DIR_UP
            } else {
                DIR_DOWN
            };

            if self.thread[v_in] != u_out {
                let mut after = self.thread[old_last_succ];
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
                after = self.thread[v_in];
                self.thread[v_in] = u_out;
                self.rev_thread[u_out] = v_in;
                self.thread[old_last_succ] = after;
                self.rev_thread[after] = old_last_succ;
            }
        } else {
            let thread_continue = if old_rev_thread == v_in {
                self.thread[old_last_succ]
            } else {
                self.thread[v_in]
            };

            // Reverse the stem between u_in and u_out.
            let mut stem = u_in;
            let mut par_stem = v_in;
            let mut last = self.last_succ[u_in];
            let mut after = self.thread[last];
            self.thread[v_in] = u_in;
            self.dirty_revs.clear();
            self.dirty_revs.push(v_in);
            while stem != u_out {
                let next_stem = self.parent[stem];
                self.thread[last] = next_stem;
                self.dirty_revs.push(last);

                let before = self.rev_thread[stem];
                self.thread[before] = after;
                self.rev_thread[after] = before;

                self.parent[stem] = par_stem;
                par_stem = stem;
                stem = next_stem;

                last = if self.last_succ[stem] == self.last_succ[par_stem] {
                    self.rev_thread[par_stem]
                } else {
                    self.last_succ[stem]
                };
                after = self.thread[last];
            }
            self.parent[u_out] = par_stem;
            self.thread[last] = thread_continue;
            self.rev_thread[thread_continue] = last;
            self.last_succ[u_out] = last;

            if old_rev_thread != v_in {
                self.thread[old_rev_thread] = after;
                self.rev_thread[after] = old_rev_thread;
            }

            for k in 0..self.dirty_revs.len() {
                let u = self.dirty_revs[k];
                let t = self.thread[u];
                self.rev_thread[t] = u;
            }

            let mut tmp_sc = 0usize;
            let tmp_ls = self.last_succ[u_out];
            let mut u = u_out;
            while u != u_in {
                let p = self.parent[u];
                self.pred[u] = self.pred[p];
                self.pred_dir[u] = -self.pred_dir[p];
                // succ_num[u] - succ_num[p] is negative along the old stem;
                // accumulate in signed arithmetic.
                tmp_sc = (tmp_sc as isize + self.succ_num[u] as isize - self.succ_num[p] as isize)
                    as usize;
                self.succ_num[u] = tmp_sc;
                self.last_succ[p] = tmp_ls;
                u = p;
            }
            self.pred[u_in] = in_arc;
            self.pred_dir[u_in] = if u_in == self.source[in_arc] {
                DIR_UP
            } else {
                DIR_DOWN
            };
            self.succ_num[u_in] = old_succ_num;
        }

        let up_limit_out = if self.last_succ[join] == v_in {
            join
        } else {
            NONE
        };
        let last_succ_out = self.last_succ[u_out];
        let mut u = v_in;
        while u != NONE && self.last_succ[u] == v_in {
            self.last_succ[u] = last_succ_out;
            u = self.parent[u];
        }

        if join != old_rev_thread && v_in != old_rev_thread {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = old_rev_thread;
                u = self.parent[u];
            }
        } else if last_succ_out != old_last_succ {
            let mut u = v_out;
            while u != up_limit_out && u != NONE && self.last_succ[u] == old_last_succ {
                self.last_succ[u] = last_succ_out;
                u = self.parent[u];
            }
        }

        let mut u = v_in;
        while u != join {
            self.succ_num[u] += old_succ_num;
            u = self.parent[u];
        }
        let mut u = v_out;
        while u != join {
            self.succ_num[u] -= old_succ_num;
            u = self.parent[u];
        }
    }

    fn update_potential(&mut self) {
        let u_in = self.u_in;
        let sigma = self.pi[self.v_in]
            - self.pi[u_in]
            - self.pred_dir[u_in] as f64 * self.cost[self.in_arc];
        let end = self.thread[self.last_succ[u_in]];
        let mut u = u_in;
        while u != end {
            self.pi[u] += sigma;
            u = self.thread[u];
        }
    }

    fn flows(&self, supply: &[f64], demand: &[f64]) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for i in 0..self.na {
            for j in 0..self.nb {
                let f = self.flow[i * self.nb + j];
                // Degenerate pivots leave rounding dust on basic arcs.
                if f > 1e-13 * supply[i].min(demand[j]) {
                    out.push((i, j, f));
                }
            }
        }
        out
    }
}
