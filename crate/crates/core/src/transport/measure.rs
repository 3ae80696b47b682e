use crate::metric_tree::{MetricTree, TreePoint};

use super::TransportError;

/// Tolerance on total mass of a probability measure.
pub const MASS_EPS: f64 = 1e-9;

/// Finitely supported probability measure on tree points.
///
/// Atoms are kept in first-seen order with coincident points merged and
/// zero masses dropped.
#[derive(Clone, Debug, PartialEq)]
pub struct DiscreteMeasure {
    atoms: Vec<(TreePoint, f64)>,
}

impl DiscreteMeasure {
    pub fn new(atoms: Vec<(TreePoint, f64)>) -> Result<Self, TransportError> {
        for &(_, m) in &atoms {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(TransportError::InvalidMass(m));
            }
        }
        let measure = Self::merged(atoms);
        if measure.atoms.is_empty() {
            return Err(TransportError::EmptyMeasure);
        }
        let total = measure.total_mass();
        if (total - 1.0).abs() > MASS_EPS {
            return Err(TransportError::NotProbability(total));
        }
        Ok(measure)
    }

    /// Merges coincident atoms without checking the total mass.
    pub(crate) fn merged(atoms: Vec<(TreePoint, f64)>) -> Self {
        let mut out: Vec<(TreePoint, f64)> = Vec::with_capacity(atoms.len());
        for (p, m) in atoms {
            if m <= 0.0 {
                continue;
            }
            match out.iter_mut().find(|(q, _)| q.approx_eq(&p)) {
                Some((_, acc)) => *acc += m,
                None => out.push((p, m)),
            }
        }
        Self { atoms: out }
    }

    pub fn dirac(p: TreePoint) -> Self {
        Self {
            atoms: vec![(p, 1.0)],
        }
    }

    pub fn uniform(points: &[TreePoint]) -> Result<Self, TransportError> {
        let m = 1.0 / points.len() as f64;
        Self::new(points.iter().map(|&p| (p, m)).collect())
    }

    pub fn atoms(&self) -> &[(TreePoint, f64)] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn total_mass(&self) -> f64 {
        self.atoms.iter().map(|(_, m)| m).sum()
    }

    pub fn is_dirac(&self) -> Option<TreePoint> {
        match self.atoms.as_slice() {
            [(p, _)] => Some(*p),
            _ => None,
        }
    }

    /// Mass of the atom at `p` (zero if absent).
    pub fn mass_at(&self, p: &TreePoint) -> f64 {
        self.atoms
            .iter()
            .filter(|(q, _)| q.approx_eq(p))
            .map(|(_, m)| m)
            .sum()
    }

    /// `∫ d(x, p)² dμ(x)`
    pub fn second_moment(&self, tree: &MetricTree, p: TreePoint) -> f64 {
        self.atoms
            .iter()
            .map(|&(q, m)| m * tree.distance(p, q).powi(2))
            .sum()
    }

    /// Same atoms up to order, with masses within `tol`.
    pub fn approx_eq(&self, other: &DiscreteMeasure, tol: f64) -> bool {
        let covers = |a: &DiscreteMeasure, b: &DiscreteMeasure| {
            a.atoms.iter().all(|(p, m)| (b.mass_at(p) - m).abs() <= tol)
        };
        covers(self, other) && covers(other, self)
    }
}

/// One entry of a transport plan.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanEntry {
    pub source: TreePoint,
    pub target: TreePoint,
    pub mass: f64,
}

/// Finitely supported coupling of two discrete measures.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TransportPlan {
    pub entries: Vec<PlanEntry>,
}

impl TransportPlan {
    pub fn new(entries: Vec<PlanEntry>) -> Self {
        Self { entries }
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn source_marginal(&self) -> DiscreteMeasure {
        DiscreteMeasure::merged(self.entries.iter().map(|e| (e.source, e.mass)).collect())
    }

    pub fn target_marginal(&self) -> DiscreteMeasure {
        DiscreteMeasure::merged(self.entries.iter().map(|e| (e.target, e.mass)).collect())
    }

    /// `Σ mass · d(source, target)²`
    pub fn cost(&self, tree: &MetricTree) -> f64 {
        self.entries
            .iter()
            .map(|e| e.mass * tree.distance(e.source, e.target).powi(2))
            .sum()
    }

    pub fn has_marginals(&self, mu: &DiscreteMeasure, nu: &DiscreteMeasure, tol: f64) -> bool {
        self.source_marginal().approx_eq(mu, tol) && self.target_marginal().approx_eq(nu, tol)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric_tree::VertexId;

    #[test]
    fn merges_and_drops_zero_atoms() {
        let a = TreePoint::Vertex(VertexId(0));
        let b = TreePoint::Vertex(VertexId(1));
        let m = DiscreteMeasure::new(vec![(a, 0.25), (b, 0.0), (a, 0.75)]).unwrap();
        assert_eq!(m.atoms(), &[(a, 1.0)]);
        assert_eq!(m.is_dirac(), Some(a));
    }

    #[test]
    fn rejects_bad_masses() {
        let a = TreePoint::Vertex(VertexId(0));
        assert!(matches!(
            DiscreteMeasure::new(vec![(a, 0.5)]),
            Err(TransportError::NotProbability(_))
        ));
        assert!(matches!(
            DiscreteMeasure::new(vec![(a, -0.5), (a, 1.5)]),
            Err(TransportError::InvalidMass(_))
        ));
        assert!(matches!(
            DiscreteMeasure::new(vec![]),
            Err(TransportError::EmptyMeasure)
        ));
    }
}
