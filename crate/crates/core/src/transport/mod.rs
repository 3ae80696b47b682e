//! Exact quadratic optimal transport between discrete measures on a tree.

mod measure;
pub mod monotone;
pub mod simplex;

use thiserror::Error;

use crate::metric_tree::MetricTree;

pub use measure::{DiscreteMeasure, PlanEntry, TransportPlan, MASS_EPS};
pub use monotone::{CycleWitness, Monotonicity, CYCLE_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TransportError {
    #[error("invalid mass {0}")]
    InvalidMass(f64),
    #[error("measure has no atoms")]
    EmptyMeasure,
    #[error("masses sum to {0}, expected 1")]
    NotProbability(f64),
}

/// Optimal plan, its cost and the duality certificate.
#[derive(Clone, Debug)]
pub struct Wasserstein {
    pub distance: f64,
    pub cost: f64,
    pub plan: TransportPlan,
    /// Largest dual infeasibility or slackness violation of the returned potentials.
    pub certificate_gap: f64,
}

/// Quadratic Wasserstein distance with an optimal plan.
pub fn wasserstein2(tree: &MetricTree, mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Wasserstein {
    let cost: Vec<Vec<f64>> = mu
        .atoms()
        .iter()
        .map(|&(p, _)| {
            nu.atoms()
                .iter()
                .map(|&(q, _)| tree.distance(p, q).powi(2))
                .collect()
        })
        .collect();
    let supply: Vec<f64> = mu.atoms().iter().map(|(_, m)| *m).collect();
    let demand: Vec<f64> = nu.atoms().iter().map(|(_, m)| *m).collect();
    let sol = simplex::solve(&supply, &demand, &cost);
    let plan = TransportPlan::new(
        sol.flows
            .iter()
            .map(|&(i, j, mass)| PlanEntry {
                source: mu.atoms()[i].0,
                target: nu.atoms()[j].0,
                mass,
            })
            .collect(),
    );
    Wasserstein {
        distance: sol.cost.max(0.0).sqrt(),
        cost: sol.cost,
        certificate_gap: sol.certificate_gap(&cost),
        plan,
    }
}

/// Default cycle-length bound: `min(support size, 8)`.
pub fn default_max_cycle(plan: &TransportPlan) -> usize {
    plan.len().min(8)
}

/// Checks quadratic-cost cyclical monotonicity over cycles of at most
/// `max_cycle` support pairs.
pub fn is_cyclically_monotone(
    tree: &MetricTree,
    plan: &TransportPlan,
    max_cycle: usize,
) -> Monotonicity {
    let cost: Vec<Vec<f64>> = plan
        .entries
        .iter()
        .map(|a| {
            plan.entries
                .iter()
                .map(|b| tree.distance(a.source, b.target).powi(2))
                .collect()
        })
        .collect();
    monotone::check_cost_matrix(&cost, max_cycle)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_tree::fixtures::*;
    use crate::metric_tree::{TreePoint, TreeSpec};

    fn v(tree: &MetricTree, name: &str) -> TreePoint {
        TreePoint::Vertex(tree.vertex_id(name).unwrap())
    }

    #[test]
    fn dirac_to_two_leaves() {
        let t = tripod();
        let mu = DiscreteMeasure::dirac(v(&t, "a"));
        let nu = DiscreteMeasure::new(vec![(v(&t, "b"), 0.5), (v(&t, "c"), 0.5)]).unwrap();
        let w = wasserstein2(&t, &mu, &nu);
        assert!((w.distance - 2.0).abs() < 1e-12);
        assert_eq!(w.plan.len(), 2);
        assert!(w.plan.has_marginals(&mu, &nu, 1e-12));
        assert!(w.certificate_gap < 1e-7);
    }

    #[test]
    fn self_distance_is_zero() {
        let t = tripod();
        let mu = DiscreteMeasure::new(vec![(v(&t, "a"), 0.3), (v(&t, "c"), 0.7)]).unwrap();
        let w = wasserstein2(&t, &mu, &mu);
        assert!(w.distance.abs() < 1e-12);
        assert!(w.plan.entries.iter().all(|e| e.source == e.target));
    }

    #[test]
    fn optimal_plan_is_monotone() {
        let t = tripod();
        let mu = DiscreteMeasure::new(vec![(v(&t, "a"), 0.5), (v(&t, "b"), 0.5)]).unwrap();
        let nu = DiscreteMeasure::new(vec![(v(&t, "c"), 0.25), (v(&t, "o"), 0.75)]).unwrap();
        let w = wasserstein2(&t, &mu, &nu);
        let k = w.plan.len();
        assert!(is_cyclically_monotone(&t, &w.plan, k).passed());
        assert_eq!(default_max_cycle(&w.plan), k.min(8));
    }

    #[test]
    fn single_entry_plan_passes() {
        let t = tripod();
        let plan = TransportPlan::new(vec![PlanEntry {
            source: v(&t, "a"),
            target: v(&t, "b"),
            mass: 1.0,
        }]);
        assert!(is_cyclically_monotone(&t, &plan, 8).passed());
    }

    #[test]
    fn aligned_points_crossing_plan_fails() {
        // y' -- y -- y'' on a line with a tail; sending y'' to y' while y stays
        // is beaten by y'' -> y, y -> y'.
        let t = TreeSpec::new()
            .vertex("yp")
            .vertex("y")
            .vertex("ypp")
            .vertex("tail")
            .edge("e1", "yp", "y", 1.0)
            .edge("e2", "y", "ypp", 1.0)
            .edge("e3", "y", "tail", 0.5)
            .build()
            .unwrap();
        let plan = TransportPlan::new(vec![
            PlanEntry {
                source: v(&t, "ypp"),
                target: v(&t, "yp"),
                mass: 0.5,
            },
            PlanEntry {
                source: v(&t, "y"),
                target: v(&t, "y"),
                mass: 0.5,
            },
        ]);
        let res = is_cyclically_monotone(&t, &plan, 2);
        let w = res.witness().expect("crossing plan is not monotone");
        assert_eq!(w.cycle.len(), 2);
        // original 4 + 0, shifted 1 + 1
        assert!((w.excess + 2.0).abs() < 1e-12);
    }

    #[test]
    fn tripod_pair_has_two_optimal_plans() {
        // x, x' on one side, y, z equidistant from both
        let t = TreeSpec::new()
            .vertex("o")
            .vertex("p")
            .vertex("x")
            .vertex("xp")
            .vertex("y")
            .vertex("z")
            .edge("op", "o", "p", 1.0)
            .edge("px", "p", "x", 1.0)
            .edge("pxp", "p", "xp", 1.0)
            .edge("oy", "o", "y", 1.0)
            .edge("oz", "o", "z", 1.0)
            .build()
            .unwrap();
        let (x, xp, y, z) = (v(&t, "x"), v(&t, "xp"), v(&t, "y"), v(&t, "z"));
        let straight = TransportPlan::new(vec![
            PlanEntry {
                source: x,
                target: y,
                mass: 0.5,
            },
            PlanEntry {
                source: xp,
                target: z,
                mass: 0.5,
            },
        ]);
        let crossed = TransportPlan::new(vec![
            PlanEntry {
                source: x,
                target: z,
                mass: 0.5,
            },
            PlanEntry {
                source: xp,
                target: y,
                mass: 0.5,
            },
        ]);
        assert_ne!(straight, crossed);
        assert!((straight.cost(&t) - crossed.cost(&t)).abs() < 1e-12);
        let mu = DiscreteMeasure::new(vec![(x, 0.5), (xp, 0.5)]).unwrap();
        let nu = DiscreteMeasure::new(vec![(y, 0.5), (z, 0.5)]).unwrap();
        let w = wasserstein2(&t, &mu, &nu);
        assert!((w.cost - straight.cost(&t)).abs() < 1e-12);
        assert!(is_cyclically_monotone(&t, &straight, 2).passed());
        assert!(is_cyclically_monotone(&t, &crossed, 2).passed());
    }
}
