//! Cyclical monotonicity of finitely supported plans.
//!
//! For support pairs `(x_k, y_k)` a cycle `i_1, ..., i_L` is violating when
//! `Σ c(x_{i_l}, y_{i_{l+1}}) < Σ c(x_{i_l}, y_{i_l})`. Writing
//! `w(k, l) = c(x_k, y_l) - c(x_k, y_k)`, this is a negative cycle in the
//! complete digraph on support indices, searched by min-plus walk powers when
//! the length is bounded and by Bellman-Ford otherwise.

/// Slack allowed before a cycle counts as violating.
pub const CYCLE_TOL: f64 = 1e-9;

/// A cycle of support indices whose cyclic shift lowers the cost.
#[derive(Clone, Debug, PartialEq)]
pub struct CycleWitness {
    /// Support indices `i_1, ..., i_L`; mass moves `x_{i_l} -> y_{i_{l+1}}`.
    pub cycle: Vec<usize>,
    /// Shifted cost minus original cost (negative).
    pub excess: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Monotonicity {
    Pass,
    Fail(CycleWitness),
}

impl Monotonicity {
    pub fn passed(&self) -> bool {
        matches!(self, Monotonicity::Pass)
    }

    pub fn witness(&self) -> Option<&CycleWitness> {
        match self {
            Monotonicity::Pass => None,
            Monotonicity::Fail(w) => Some(w),
        }
    }
}

/// Checks every cycle of length at most `max_cycle` for the cost matrix
/// `cost[k][l] = c(x_k, y_l)` over support pairs.
pub fn check_cost_matrix(cost: &[Vec<f64>], max_cycle: usize) -> Monotonicity {
    let k = cost.len();
    if k < 2 || max_cycle < 2 {
        return Monotonicity::Pass;
    }
    let w = |a: usize, b: usize| cost[a][b] - cost[a][a];
    let found = if max_cycle >= k {
        bellman_ford(k, &w)
    } else {
        bounded_walks(k, max_cycle, &w)
    };
    match found {
        Some(cycle) => {
            let excess = cycle_weight(&cycle, &w);
            if excess < -CYCLE_TOL {
                Monotonicity::Fail(CycleWitness { cycle, excess })
            } else {
                Monotonicity::Pass
            }
        }
        None => Monotonicity::Pass,
    }
}

fn cycle_weight(cycle: &[usize], w: &impl Fn(usize, usize) -> f64) -> f64 {
    (0..cycle.len())
        .map(|i| w(cycle[i], cycle[(i + 1) % cycle.len()]))
        .sum()
}

/// Splits a closed walk into simple cycles and returns the lightest one.
fn lightest_simple_cycle(walk: &[usize], w: &impl Fn(usize, usize) -> f64) -> Vec<usize> {
    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut stack: Vec<usize> = Vec::new();
    for &v in walk {
        if let Some(pos) = stack.iter().position(|&x| x == v) {
            let cycle: Vec<usize> = stack.drain(pos..).collect();
            let weight = cycle_weight(&cycle, w);
            if best.as_ref().is_none_or(|(bw, _)| weight < *bw) {
                best = Some((weight, cycle));
            }
        }
        stack.push(v);
    }
    if !stack.is_empty() {
        let weight = cycle_weight(&stack, w);
        if best.as_ref().is_none_or(|(bw, _)| weight < *bw) {
            best = Some((weight, stack));
        }
    }
    best.map(|(_, c)| c).unwrap_or_default()
}

fn bounded_walks(k: usize, max_len: usize, w: &impl Fn(usize, usize) -> f64) -> Option<Vec<usize>> {
    // dist[s][i][j]: lightest walk with s+1 edges from i to j
    let edge = |a: usize, b: usize| if a == b { f64::INFINITY } else { w(a, b) };
    let mut dist: Vec<Vec<Vec<f64>>> = vec![(0..k)
        .map(|i| (0..k).map(|j| edge(i, j)).collect())
        .collect()];
    let mut pred: Vec<Vec<Vec<usize>>> = vec![vec![vec![usize::MAX; k]; k]];
    for len in 2..=max_len {
        let prev = &dist[len - 2];
        let mut next = vec![vec![f64::INFINITY; k]; k];
        let mut p = vec![vec![usize::MAX; k]; k];
        for i in 0..k {
            for mid in 0..k {
                let base = prev[i][mid];
                if !base.is_finite() {
                    continue;
                }
                for j in 0..k {
                    let cand = base + edge(mid, j);
                    if cand < next[i][j] {
                        next[i][j] = cand;
                        p[i][j] = mid;
                    }
                }
            }
        }
        let closing = (0..k)
            .filter(|&i| next[i][i] < -CYCLE_TOL)
            .min_by(|&a, &b| next[a][a].total_cmp(&next[b][b]));
        dist.push(next);
        pred.push(p);
        if let Some(i) = closing {
            let mut walk = vec![i];
            let mut at = i;
            for s in (1..len).rev() {
                at = pred[s][i][at];
                walk.push(at);
            }
            walk.reverse();
            return Some(lightest_simple_cycle(&walk, w));
        }
    }
    None
}

fn bellman_ford(k: usize, w: &impl Fn(usize, usize) -> f64) -> Option<Vec<usize>> {
    let margin = CYCLE_TOL / (10.0 * k as f64);
    let mut dist = vec![0.0f64; k];
    let mut pred = vec![usize::MAX; k];
    let mut last = None;
    for _ in 0..k {
        last = None;
        for a in 0..k {
            for b in 0..k {
                if a != b && dist[a] + w(a, b) < dist[b] - margin {
                    dist[b] = dist[a] + w(a, b);
                    pred[b] = a;
                    last = Some(b);
                }
            }
        }
        last?;
    }
    let mut v = last?;
    for _ in 0..k {
        v = pred[v];
    }
    let mut cycle = vec![v];
    let mut at = pred[v];
    while at != v {
        cycle.push(at);
        at = pred[at];
    }
    // predecessors were followed backwards
    cycle.reverse();
    Some(cycle)
}
