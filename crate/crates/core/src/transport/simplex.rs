//! Transportation simplex on the bipartite transportation polytope.
//!
//! The basis is a spanning tree of the bipartite graph (sources + sinks) with
//! `m + n - 1` cells, possibly carrying zero flow. Entering cells are chosen by
//! Bland's rule (lowest `(source, sink)` index with negative reduced cost), and
//! leaving cells among ties by lowest index, which rules out cycling on
//! degenerate pivots. Costs may have any sign.

use std::collections::VecDeque;

/// Result of a transportation problem.
#[derive(Clone, Debug)]
pub struct TransportSolution {
    /// `(source, sink, mass)` for every cell carrying positive mass, sorted.
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
    /// Row potentials.
    pub u: Vec<f64>,
    /// Column potentials.
    pub v: Vec<f64>,
    pub pivots: usize,
}

impl TransportSolution {
    /// Largest violation of dual feasibility, `max(0, -(c_ij - u_i - v_j))`,
    /// and of complementary slackness on cells with positive flow.
    pub fn certificate_gap(&self, cost: &[Vec<f64>]) -> f64 {
        let mut gap: f64 = 0.0;
        for (i, row) in cost.iter().enumerate() {
            for (j, &c) in row.iter().enumerate() {
                gap = gap.max(-(c - self.u[i] - self.v[j]));
            }
        }
        for &(i, j, _) in &self.flows {
            gap = gap.max((cost[i][j] - self.u[i] - self.v[j]).abs());
        }
        gap
    }
}

/// Solves `min sum c_ij x_ij` subject to row sums `supply` and column sums
/// `demand`. Both sides must be nonempty with positive entries and (nearly)
/// equal totals; any residual imbalance is absorbed by the last cell.
pub fn solve(supply: &[f64], demand: &[f64], cost: &[Vec<f64>]) -> TransportSolution {
    let (m, n) = (supply.len(), demand.len());
    assert!(
        m > 0 && n > 0,
        "transport problem needs both sides nonempty"
    );
    assert_eq!(cost.len(), m);

    let scale = cost
        .iter()
        .flatten()
        .fold(1.0f64, |acc, c| acc.max(c.abs()));
    let tol = 1e-12 * scale;

    // flow[i][j] is Some(x) for basic cells.
    let mut flow: Vec<Vec<Option<f64>>> = vec![vec![None; n]; m];
    let mut a = supply.to_vec();
    let mut b = demand.to_vec();
    let (mut i, mut j) = (0, 0);
    loop {
        let x = a[i].min(b[j]).max(0.0);
        flow[i][j] = Some(x);
        a[i] -= x;
        b[j] -= x;
        if i == m - 1 && j == n - 1 {
            break;
        }
        if j == n - 1 || (i < m - 1 && a[i] <= b[j]) {
            i += 1;
        } else {
            j += 1;
        }
    }

    let mut pivots = 0;
    let (mut u, mut v);
    loop {
        (u, v) = potentials(&flow, cost);
        let entering = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .find(|&(i, j)| flow[i][j].is_none() && cost[i][j] - u[i] - v[j] < -tol);
        let Some((ei, ej)) = entering else { break };

        let cycle = basis_path(&flow, ej, ei);
        // entering cell gains theta; path cells alternate -, +, ..., - from its row
        let mut theta = f64::INFINITY;
        let mut leaving = None;
        for (k, &(ci, cj)) in cycle.iter().enumerate() {
            if k % 2 == 0 {
                let x = flow[ci][cj].unwrap();
                let better = x < theta || (x == theta && leaving.is_none_or(|l| (ci, cj) < l));
                if better {
                    theta = x;
                    leaving = Some((ci, cj));
                }
            }
        }
        let (li, lj) = leaving.expect("pivot cycle has a decreasing cell");
        for (k, &(ci, cj)) in cycle.iter().enumerate() {
            let x = flow[ci][cj].as_mut().unwrap();
            if k % 2 == 0 {
                *x = (*x - theta).max(0.0);
            } else {
                *x += theta;
            }
        }
        flow[ei][ej] = Some(theta);
        flow[li][lj] = None;
        pivots += 1;
    }

    let mut flows = Vec::new();
    let mut total = 0.0;
    for i in 0..m {
        for j in 0..n {
            if let Some(x) = flow[i][j] {
                if x > 1e-15 {
                    flows.push((i, j, x));
                    total += x * cost[i][j];
                }
            }
        }
    }
    TransportSolution {
        flows,
        cost: total,
        u,
        v,
        pivots,
    }
}

/// Node indexing: sources are `0..m`, sinks `m..m+n`.
fn adjacency(flow: &[Vec<Option<f64>>]) -> Vec<Vec<usize>> {
    let (m, n) = (flow.len(), flow[0].len());
    let mut adj = vec![Vec::new(); m + n];
    for (i, row) in flow.iter().enumerate() {
        for (j, cell) in row.iter().enumerate() {
            if cell.is_some() {
                adj[i].push(m + j);
                adj[m + j].push(i);
            }
        }
    }
    adj
}

fn potentials(flow: &[Vec<Option<f64>>], cost: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let (m, n) = (flow.len(), flow[0].len());
    let adj = adjacency(flow);
    let mut pot = vec![f64::NAN; m + n];
    pot[0] = 0.0;
    let mut queue = VecDeque::from([0]);
    while let Some(x) = queue.pop_front() {
        for &y in &adj[x] {
            if pot[y].is_nan() {
                pot[y] = if x < m {
                    cost[x][y - m] - pot[x]
                } else {
                    cost[y][x - m] - pot[x]
                };
                queue.push_back(y);
            }
        }
    }
    let (u, v) = pot.split_at(m);
    (u.to_vec(), v.to_vec())
}

/// Cells on the basis-tree path from sink `sink` to source `source`, in order.
fn basis_path(flow: &[Vec<Option<f64>>], sink: usize, source: usize) -> Vec<(usize, usize)> {
    let m = flow.len();
    let adj = adjacency(flow);
    let start = m + sink;
    let mut prev = vec![usize::MAX; adj.len()];
    prev[start] = start;
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        if x == source {
            break;
        }
        for &y in &adj[x] {
            if prev[y] == usize::MAX {
                prev[y] = x;
                queue.push_back(y);
            }
        }
    }
    let mut cells = Vec::new();
    let mut x = source;
    while x != start {
        let p = prev[x];
        let cell = if x < m { (x, p - m) } else { (p, x - m) };
        cells.push(cell);
        x = p;
    }
    cells
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_force_permutation(cost: &[Vec<f64>]) -> f64 {
        fn rec(cost: &[Vec<f64>], row: usize, used: &mut Vec<bool>) -> f64 {
            if row == cost.len() {
                return 0.0;
            }
            let mut best = f64::INFINITY;
            for j in 0..cost.len() {
                if !used[j] {
                    used[j] = true;
                    best = best.min(cost[row][j] + rec(cost, row + 1, used));
                    used[j] = false;
                }
            }
            best
        }
        rec(cost, 0, &mut vec![false; cost.len()])
    }

    #[test]
    fn single_cell() {
        let sol = solve(&[1.0], &[1.0], &[vec![3.0]]);
        assert_eq!(sol.flows, vec![(0, 0, 1.0)]);
        assert_eq!(sol.cost, 3.0);
    }

    #[test]
    fn dirac_source_is_forced() {
        let sol = solve(&[1.0], &[0.5, 0.5], &[vec![4.0, 4.0]]);
        assert_eq!(sol.flows, vec![(0, 0, 0.5), (0, 1, 0.5)]);
        assert_eq!(sol.cost, 4.0);
    }

    #[test]
    fn matches_assignment_enumeration() {
        let cost = vec![
            vec![4.0, 1.0, 3.0, 7.0],
            vec![2.0, 0.0, 5.0, 1.0],
            vec![3.0, 2.0, 2.0, 6.0],
            vec![9.0, 4.0, 1.0, 2.0],
        ];
        let w = vec![0.25; 4];
        let sol = solve(&w, &w, &cost);
        let expected = brute_force_permutation(&cost) / 4.0;
        assert!((sol.cost - expected).abs() < 1e-12);
        assert!(sol.certificate_gap(&cost) < 1e-9);
    }

    #[test]
    fn negative_costs_are_fine() {
        let cost = vec![vec![-1.0, -4.0], vec![-3.0, 0.0]];
        let sol = solve(&[0.5, 0.5], &[0.5, 0.5], &cost);
        assert!((sol.cost - (-3.5)).abs() < 1e-12);
        assert!(sol.certificate_gap(&cost) < 1e-12);
    }

    #[test]
    fn degenerate_marginals_terminate() {
        // equal partial sums force zero-valued basic cells
        let cost = vec![
            vec![1.0, 2.0, 3.0],
            vec![2.0, 1.0, 2.0],
            vec![3.0, 2.0, 1.0],
        ];
        let w = [1.0 / 3.0; 3];
        let sol = solve(&w, &w, &cost);
        assert!((sol.cost - 1.0).abs() < 1e-12);
        let sol = solve(&w, &w, &cost.iter().rev().cloned().collect::<Vec<_>>());
        assert!((sol.cost - 1.0).abs() < 1e-12);
        let neg: Vec<Vec<f64>> = cost
            .iter()
            .map(|r| r.iter().map(|c| -c).collect())
            .collect();
        let sol = solve(&w, &w, &neg);
        assert!((sol.cost + 7.0 / 3.0).abs() < 1e-12);
    }
}
