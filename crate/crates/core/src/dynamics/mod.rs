//! Dynamical transport plans: finitely supported measures on geodesics.

mod antagonism;
mod dirac;

use thiserror::Error;

use crate::metric_tree::{Interval, MetricTree, TreeError, TreeGeodesic, TreePoint, EPS};
use crate::transport::{
    self, CycleWitness, DiscreteMeasure, Monotonicity, TransportError, TransportPlan, MASS_EPS,
};

pub use antagonism::{
    antagonist_pairs, is_optimal_dynamical, sample_time_pairs, validate_complete_plan, Antagonism,
    CompletePlanCertificate, OptimalityCertificate,
};
pub use dirac::{
    dirac_interpolation, extend_from_dirac, midpoint, supported_on_geodesic_test, MidpointSample,
    SupportTest,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DynamicsError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error("plan has no atoms")]
    EmptyPlan,
    #[error("invalid atom mass {0}")]
    InvalidMass(f64),
    #[error("atom masses sum to {0}, expected 1")]
    NotProbability(f64),
    #[error("atom {0} is parametrized on a different interval than the plan")]
    MixedIntervals(usize),
    #[error("transport plan is not optimal: cycle {:?} lowers the cost by {}", .0.cycle, -.0.excess)]
    PlanNotOptimal(CycleWitness),
    #[error("coupling marginals do not match the pushforwards at time {0}")]
    MarginalMismatch(f64),
    #[error("tree has leaves; geodesics cannot always be continued")]
    LeafyTree,
    #[error("pushforward at the initial time is not a Dirac mass")]
    NotDiracBased,
    #[error("expected a plan on {expected}, found one on [{start}, {end}]")]
    WrongInterval {
        expected: &'static str,
        start: f64,
        end: f64,
    },
    #[error("geodesic is not maximal")]
    NotMaximal,
}

/// A probability measure on geodesics sharing one parameter interval.
#[derive(Clone, Debug, PartialEq)]
pub struct DynamicalPlan {
    atoms: Vec<(TreeGeodesic, f64)>,
    interval: Interval,
}

impl DynamicalPlan {
    pub fn new(atoms: Vec<(TreeGeodesic, f64)>, interval: Interval) -> Result<Self, DynamicsError> {
        for (i, (g, m)) in atoms.iter().enumerate() {
            if !(*m >= 0.0) || !m.is_finite() {
                return Err(DynamicsError::InvalidMass(*m));
            }
            let gi = g.interval();
            let same = |a: f64, b: f64| a == b || (a - b).abs() <= EPS;
            if !same(gi.start, interval.start) || !same(gi.end, interval.end) {
                return Err(DynamicsError::MixedIntervals(i));
            }
        }
        let plan = Self::merged(atoms, interval);
        if plan.atoms.is_empty() {
            return Err(DynamicsError::EmptyPlan);
        }
        let total: f64 = plan.atoms.iter().map(|(_, m)| m).sum();
        if (total - 1.0).abs() > MASS_EPS {
            return Err(DynamicsError::NotProbability(total));
        }
        Ok(plan)
    }

    /// Merges atoms with identical locus, speed and parametrization.
    pub(crate) fn merged(atoms: Vec<(TreeGeodesic, f64)>, interval: Interval) -> Self {
        let mut out: Vec<(TreeGeodesic, f64)> = Vec::with_capacity(atoms.len());
        for (g, m) in atoms {
            if m <= 0.0 {
                continue;
            }
            match out.iter_mut().find(|(h, _)| h.approx_eq(&g)) {
                Some((_, acc)) => *acc += m,
                None => out.push((g, m)),
            }
        }
        Self {
            atoms: out,
            interval,
        }
    }

    pub fn atoms(&self) -> &[(TreeGeodesic, f64)] {
        &self.atoms
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    /// Root mean square speed, `(∫ s(γ)² dμ)^{1/2}`.
    pub fn speed(&self) -> f64 {
        self.atoms
            .iter()
            .map(|(g, m)| m * g.speed() * g.speed())
            .sum::<f64>()
            .sqrt()
    }

    /// Restriction of every atom to a sub-interval.
    pub fn restrict(&self, tree: &MetricTree, interval: Interval) -> Result<Self, DynamicsError> {
        let atoms = self
            .atoms
            .iter()
            .map(|(g, m)| Ok((g.restrict(tree, interval)?, *m)))
            .collect::<Result<Vec<_>, TreeError>>()?;
        Ok(Self::merged(atoms, interval))
    }

    /// The plan `(e_s, e_t)_# μ` between the time-`s` and time-`t` marginals.
    pub fn projection(
        &self,
        tree: &MetricTree,
        s: f64,
        t: f64,
    ) -> Result<TransportPlan, DynamicsError> {
        let entries = self
            .atoms
            .iter()
            .map(|(g, m)| {
                Ok(transport::PlanEntry {
                    source: g.evaluate(tree, s)?,
                    target: g.evaluate(tree, t)?,
                    mass: *m,
                })
            })
            .collect::<Result<Vec<_>, TreeError>>()?;
        Ok(TransportPlan::new(entries))
    }
}

/// The measure `(e_t)_# μ`.
pub fn pushforward_at(
    tree: &MetricTree,
    plan: &DynamicalPlan,
    t: f64,
) -> Result<DiscreteMeasure, DynamicsError> {
    let atoms = plan
        .atoms
        .iter()
        .map(|(g, m)| Ok((g.evaluate(tree, t)?, *m)))
        .collect::<Result<Vec<_>, TreeError>>()?;
    Ok(DiscreteMeasure::merged(atoms))
}

/// Displacement interpolation on `[0, 1]` of an optimal plan.
///
/// The plan is first certified by a full cyclical-monotonicity check.
pub fn interpolate_plan(
    tree: &MetricTree,
    plan: &TransportPlan,
) -> Result<DynamicalPlan, DynamicsError> {
    if let Monotonicity::Fail(w) = transport::is_cyclically_monotone(tree, plan, plan.len()) {
        return Err(DynamicsError::PlanNotOptimal(w));
    }
    let interval = Interval::segment(0.0, 1.0);
    let atoms = plan
        .entries
        .iter()
        .map(|e| Ok((tree.geodesic_segment(e.source, e.target, 0.0, 1.0)?, e.mass)))
        .collect::<Result<Vec<_>, TreeError>>()?;
    DynamicalPlan::new(atoms, interval)
}

/// Displacement interpolation between two measures through an optimal plan.
pub fn interpolate(
    tree: &MetricTree,
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
) -> Result<DynamicalPlan, DynamicsError> {
    interpolate_plan(tree, &transport::wasserstein2(tree, mu, nu).plan)
}

/// Coupling of atoms produced by [`lift`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LiftEntry {
    pub mu_atom: usize,
    pub sigma_atom: usize,
    pub mass: f64,
}

/// Lifts a coupling of the time-`t` marginals to a coupling of the atoms of
/// two dynamical plans. Within each pair of points the mass is split
/// proportionally to the atom masses through those points (the most
/// independent lift).
pub fn lift(
    tree: &MetricTree,
    mu: &DynamicalPlan,
    sigma: &DynamicalPlan,
    plan_t: &TransportPlan,
    t: f64,
) -> Result<Vec<LiftEntry>, DynamicsError> {
    let mu_t = pushforward_at(tree, mu, t)?;
    let sigma_t = pushforward_at(tree, sigma, t)?;
    if !plan_t.has_marginals(&mu_t, &sigma_t, MASS_EPS) {
        return Err(DynamicsError::MarginalMismatch(t));
    }
    let positions = |plan: &DynamicalPlan| -> Result<Vec<TreePoint>, TreeError> {
        plan.atoms
            .iter()
            .map(|(g, _)| g.evaluate(tree, t))
            .collect()
    };
    let (mu_pos, sigma_pos) = (positions(mu)?, positions(sigma)?);

    let mut out: Vec<LiftEntry> = Vec::new();
    for entry in &plan_t.entries {
        let through =
            |pos: &[TreePoint], plan: &DynamicalPlan, p: &TreePoint| -> Vec<(usize, f64)> {
                pos.iter()
                    .enumerate()
                    .filter(|(_, q)| q.approx_eq(p))
                    .map(|(i, _)| (i, plan.atoms[i].1))
                    .collect()
            };
        let a = through(&mu_pos, mu, &entry.source);
        let b = through(&sigma_pos, sigma, &entry.target);
        let a_tot: f64 = a.iter().map(|(_, m)| m).sum();
        let b_tot: f64 = b.iter().map(|(_, m)| m).sum();
        for &(i, ma) in &a {
            for &(j, mb) in &b {
                let mass = entry.mass * (ma / a_tot) * (mb / b_tot);
                match out.iter_mut().find(|e| e.mu_atom == i && e.sigma_atom == j) {
                    Some(e) => e.mass += mass,
                    None => out.push(LiftEntry {
                        mu_atom: i,
                        sigma_atom: j,
                        mass,
                    }),
                }
            }
        }
    }
    out.sort_by_key(|e| (e.mu_atom, e.sigma_atom));
    Ok(out)
}
