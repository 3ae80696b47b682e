use std::collections::BTreeMap;

use crate::metric_tree::{EdgeId, IntervalKind, MetricTree, EPS};
use crate::transport::{self, Monotonicity, PlanEntry, TransportPlan};

use super::{DynamicalPlan, DynamicsError};

/// Two support geodesics following a common stretch of `edge` in opposite directions.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Antagonism {
    pub first: usize,
    pub second: usize,
    pub edge: EdgeId,
}

/// Every antagonist pair of atoms, each with the lowest shared edge as witness.
pub fn antagonist_pairs(plan: &DynamicalPlan) -> Vec<Antagonism> {
    // edge -> (atom, forward, lo, hi)
    let mut by_edge: BTreeMap<EdgeId, Vec<(usize, bool, f64, f64)>> = BTreeMap::new();
    for (i, (g, _)) in plan.atoms().iter().enumerate() {
        for tr in g.traversals() {
            by_edge
                .entry(tr.edge)
                .or_default()
                .push((i, tr.forward, tr.lo, tr.hi));
        }
    }
    let mut found: BTreeMap<(usize, usize), EdgeId> = BTreeMap::new();
    for (&edge, list) in &by_edge {
        for (x, a) in list.iter().enumerate() {
            for b in &list[x + 1..] {
                if a.0 == b.0 || a.1 == b.1 {
                    continue;
                }
                let overlap = a.3.min(b.3) - a.2.max(b.2);
                if overlap > EPS {
                    let key = (a.0.min(b.0), a.0.max(b.0));
                    found.entry(key).or_insert(edge);
                }
            }
        }
    }
    found
        .into_iter()
        .map(|((first, second), edge)| Antagonism {
            first,
            second,
            edge,
        })
        .collect()
}

/// Verdict of [`is_optimal_dynamical`].
#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityCertificate {
    pub antagonists: Vec<Antagonism>,
    /// Cyclical monotonicity of `(e_s, e_t)_# μ` at the sampled pairs.
    pub sampled: Vec<(f64, f64, Monotonicity)>,
}

impl OptimalityCertificate {
    pub fn passed(&self) -> bool {
        self.antagonists.is_empty()
    }

    /// Both criteria agree.
    pub fn consistent(&self) -> bool {
        self.passed() == self.sampled.iter().all(|(_, _, m)| m.passed())
    }
}

/// Five time pairs covering the plan: the whole window, its halves, the middle
/// half and the first quarter. For unbounded plans the window spans every time
/// at which an atom meets a vertex, padded by one unit, and two wider pairs
/// centred on it are added.
pub fn sample_time_pairs(tree: &MetricTree, plan: &DynamicalPlan) -> Vec<(f64, f64)> {
    let iv = plan.interval();
    let (lo, hi) = match iv.kind() {
        IntervalKind::Segment => (iv.start, iv.end),
        _ => {
            let mut times: Vec<f64> = [iv.start, iv.end]
                .into_iter()
                .filter(|t| t.is_finite())
                .collect();
            for (g, _) in plan.atoms() {
                for v in g.vertices(tree) {
                    if let Some(t) = g.time_at_vertex(tree, v) {
                        times.push(t);
                    }
                }
            }
            let min = times.iter().copied().fold(f64::INFINITY, f64::min);
            let max = times.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let (min, max) = if min.is_finite() {
                (min, max)
            } else {
                (0.0, 0.0)
            };
            ((min - 1.0).max(iv.start), (max + 1.0).min(iv.end))
        }
    };
    let at = |f: f64| lo + f * (hi - lo);
    let mut pairs: Vec<(f64, f64)> = [
        (0.0, 1.0),
        (0.0, 0.5),
        (0.5, 1.0),
        (0.25, 0.75),
        (0.0, 0.25),
    ]
    .into_iter()
    .map(|(a, b)| (at(a), at(b)))
    .collect();
    // Geodesics running opposite ways along a ray only cross-pair cheaply once
    // both sit far out on it, so reach well past the vertex times.
    if iv.kind() != IntervalKind::Segment {
        let mid = 0.5 * (lo + hi);
        let width = (hi - lo).max(1.0);
        for k in [2.0, 8.0] {
            let (s, t) = (
                (mid - k * width).max(iv.start),
                (mid + k * width).min(iv.end),
            );
            if t > s {
                pairs.push((s, t));
            }
        }
    }
    pairs
}

/// Antagonist pairs of a dynamical plan, cross-checked by cyclical
/// monotonicity of the projections at [`sample_time_pairs`]. For complete
/// unit-speed plans the two agree; plans on a segment with unequal speeds
/// can fail either way, so `consistent()` may be false there.
pub fn is_optimal_dynamical(
    tree: &MetricTree,
    plan: &DynamicalPlan,
) -> Result<OptimalityCertificate, DynamicsError> {
    let antagonists = antagonist_pairs(plan);
    let sampled = sample_time_pairs(tree, plan)
        .into_iter()
        .map(|(s, t)| {
            let proj = plan.projection(tree, s, t)?;
            Ok((
                s,
                t,
                transport::is_cyclically_monotone(tree, &proj, proj.len()),
            ))
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    Ok(OptimalityCertificate {
        antagonists,
        sampled,
    })
}

/// Verdict of [`validate_complete_plan`].
#[derive(Clone, Debug, PartialEq)]
pub struct CompletePlanCertificate {
    /// Atoms whose speed differs from 1.
    pub off_speed: Vec<usize>,
    /// Two atoms of different speeds whose `(e_{-t}, e_t)` projection is not
    /// cyclically monotone, with the time used.
    pub witness: Option<(usize, usize, f64, Monotonicity)>,
}

impl CompletePlanCertificate {
    pub fn passed(&self) -> bool {
        self.off_speed.is_empty()
    }
}

/// Time at which mixed-speed witnesses are evaluated.
pub const WITNESS_TIME: f64 = 1e3;

/// Complete geodesics of the Wasserstein space only charge unit-speed geodesics.
pub fn validate_complete_plan(
    tree: &MetricTree,
    plan: &DynamicalPlan,
) -> Result<CompletePlanCertificate, DynamicsError> {
    let iv = plan.interval();
    if iv.kind() != IntervalKind::Complete {
        return Err(DynamicsError::WrongInterval {
            expected: "(-inf, inf)",
            start: iv.start,
            end: iv.end,
        });
    }
    let atoms = plan.atoms();
    let off_speed: Vec<usize> = atoms
        .iter()
        .enumerate()
        .filter(|(_, (g, _))| (g.speed() - 1.0).abs() > EPS)
        .map(|(i, _)| i)
        .collect();
    let mut witness = None;
    'search: for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            if (atoms[i].0.speed() - atoms[j].0.speed()).abs() <= EPS {
                continue;
            }
            let t = WITNESS_TIME;
            let entry = |k: usize| -> Result<PlanEntry, DynamicsError> {
                let g = &atoms[k].0;
                Ok(PlanEntry {
                    source: g.evaluate(tree, -t)?,
                    target: g.evaluate(tree, t)?,
                    mass: atoms[k].1,
                })
            };
            let pair = TransportPlan::new(vec![entry(i)?, entry(j)?]);
            let verdict = transport::is_cyclically_monotone(tree, &pair, 2);
            if !verdict.passed() {
                witness = Some((i, j, t, verdict));
                break 'search;
            }
        }
    }
    Ok(CompletePlanCertificate { off_speed, witness })
}
