//! Complete Wasserstein geodesics with prescribed ends: flows of boundary
//! measures, the realizability criterion and an explicit construction.

mod comb;
mod construct;

use std::collections::VecDeque;

use thiserror::Error;

use crate::dynamics::DynamicsError;
use crate::metric_tree::{EdgeId, MetricTree, TreeEnd, TreePoint, VertexId};
use crate::transport::MASS_EPS;

pub use comb::{comb_generator, Comb};
pub use construct::{
    construct_geodesic, d0_cost, d0_transport, ConstructedGeodesic, ConstructionCertificate,
    D0Transport,
};

/// Flows below this magnitude are neutral.
pub const FLOW_EPS: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EndsError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("invalid boundary measure: {0}")]
    InvalidMeasure(String),
    #[error("boundary measures share the end `{0}` and are not antipodal")]
    NotAntipodal(String),
    #[error("plan charges the diagonal pair at end `{0}`, where D0 is infinite")]
    DiagonalMass(String),
    #[error("ends are not realizable: realizability sum {verdict} up to depth {depth}")]
    NotRealizable { verdict: Verdict, depth: usize },
    #[error("comb depth must be at least 2, got {0}")]
    CombTooShallow(usize),
    #[error("mass exponent must be finite, got {0}")]
    BadExponent(f64),
}

/// Finitely supported probability measure on ends.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundaryMeasure {
    atoms: Vec<(TreeEnd, f64)>,
}

impl BoundaryMeasure {
    pub fn new(atoms: Vec<(TreeEnd, f64)>) -> Result<Self, EndsError> {
        let mut out: Vec<(TreeEnd, f64)> = Vec::new();
        for (e, m) in atoms {
            if !(m >= 0.0) || !m.is_finite() {
                return Err(EndsError::InvalidMeasure(format!("mass {m}")));
            }
            if m == 0.0 {
                continue;
            }
            match out.iter_mut().find(|(f, _)| *f == e) {
                Some((_, acc)) => *acc += m,
                None => out.push((e, m)),
            }
        }
        if out.is_empty() {
            return Err(EndsError::InvalidMeasure("no atoms".into()));
        }
        let total: f64 = out.iter().map(|(_, m)| m).sum();
        if (total - 1.0).abs() > MASS_EPS {
            return Err(EndsError::InvalidMeasure(format!("masses sum to {total}")));
        }
        Ok(Self { atoms: out })
    }

    pub fn atoms(&self) -> &[(TreeEnd, f64)] {
        &self.atoms
    }

    pub fn mass_at(&self, end: TreeEnd) -> f64 {
        self.atoms
            .iter()
            .filter(|(e, _)| *e == end)
            .map(|(_, m)| m)
            .sum()
    }

    /// Same atoms up to order, masses within `tol`.
    pub fn approx_eq(&self, other: &BoundaryMeasure, tol: f64) -> bool {
        self.atoms
            .iter()
            .all(|&(e, m)| (other.mass_at(e) - m).abs() <= tol)
            && other
                .atoms
                .iter()
                .all(|&(e, m)| (self.mass_at(e) - m).abs() <= tol)
    }
}

/// Antipodality of two boundary measures. Distinct ends of a tree are always
/// joined by a geodesic, so for finitely supported measures both notions
/// reduce to disjoint supports.
#[derive(Clone, Debug, PartialEq)]
pub struct Antipodality {
    pub antipodal: bool,
    pub uniformly_antipodal: bool,
    /// Ends charged by both measures.
    pub shared: Vec<TreeEnd>,
}

pub fn is_antipodal(nu_minus: &BoundaryMeasure, nu_plus: &BoundaryMeasure) -> Antipodality {
    let shared: Vec<TreeEnd> = nu_minus
        .atoms
        .iter()
        .map(|(e, _)| *e)
        .filter(|e| nu_plus.mass_at(*e) > 0.0)
        .collect();
    let ok = shared.is_empty();
    Antipodality {
        antipodal: ok,
        uniformly_antipodal: ok,
        shared,
    }
}

pub(crate) fn require_antipodal(
    tree: &MetricTree,
    nu_minus: &BoundaryMeasure,
    nu_plus: &BoundaryMeasure,
) -> Result<(), EndsError> {
    match is_antipodal(nu_minus, nu_plus).shared.first() {
        None => Ok(()),
        Some(e) => Err(EndsError::NotAntipodal(tree.edge(e.edge()).name.clone())),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowSign {
    Positive,
    Neutral,
    Negative,
}

impl FlowSign {
    pub fn of(flow: f64) -> Self {
        if flow > FLOW_EPS {
            FlowSign::Positive
        } else if flow < -FLOW_EPS {
            FlowSign::Negative
        } else {
            FlowSign::Neutral
        }
    }
}

/// Flow through every edge and vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct FlowTable {
    /// `φ(tail → head)` per edge; for an infinite edge, towards its end.
    pub edge_flow: Vec<f64>,
    /// `φ(x)`
    pub vertex_flow: Vec<f64>,
    /// `φ⁰(x)`
    pub specific_flow: Vec<f64>,
    /// `d(x, x₀)`
    pub basepoint_distance: Vec<f64>,
}

impl FlowTable {
    /// Flow through `edge` oriented away from `from`.
    pub fn flow_from(&self, tree: &MetricTree, edge: EdgeId, from: VertexId) -> f64 {
        if tree.edge(edge).tail == from {
            self.edge_flow[edge.0]
        } else {
            -self.edge_flow[edge.0]
        }
    }

    pub fn sign_from(&self, tree: &MetricTree, edge: EdgeId, from: VertexId) -> FlowSign {
        FlowSign::of(self.flow_from(tree, edge, from))
    }
}

/// Flows of `ν = ν₊ − ν₋`: `φ(xy) = ν((xy)₊)`, the signed mass of the ends
/// lying beyond `y`.
pub fn flow_table(
    tree: &MetricTree,
    nu_minus: &BoundaryMeasure,
    nu_plus: &BoundaryMeasure,
) -> Result<FlowTable, EndsError> {
    require_antipodal(tree, nu_minus, nu_plus)?;
    let nu = |e: EdgeId| nu_plus.mass_at(TreeEnd(e)) - nu_minus.mass_at(TreeEnd(e));

    // subtree sums from vertex 0; `below[v]` is ν of the ends beyond v seen from the root
    let n = tree.vertex_count();
    let mut parent_edge: Vec<Option<EdgeId>> = vec![None; n];
    let mut order = Vec::with_capacity(n);
    let mut seen = vec![false; n];
    let mut queue = VecDeque::from([VertexId(0)]);
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for &e in tree.incident(v) {
            if let Some(w) = tree.edge(e).other(v) {
                if !seen[w.0] {
                    seen[w.0] = true;
                    parent_edge[w.0] = Some(e);
                    queue.push_back(w);
                }
            }
        }
    }
    let mut below = vec![0.0; n];
    for &v in order.iter().rev() {
        for &e in tree.incident(v) {
            if tree.edge(e).is_infinite() {
                below[v.0] += nu(e);
            }
        }
        if let Some(pe) = parent_edge[v.0] {
            let p = tree.edge(pe).other(v).expect("parent edges are finite");
            below[p.0] += below[v.0];
        }
    }

    let mut edge_flow = vec![0.0; tree.edge_count()];
    for e in tree.edge_ids() {
        let edge = tree.edge(e);
        edge_flow[e.0] = match edge.head {
            None => nu(e),
            Some(h) => {
                // the child side of the edge carries `below`
                if parent_edge[h.0] == Some(e) {
                    below[h.0]
                } else {
                    -below[edge.tail.0]
                }
            }
        };
    }

    let toward = tree.edges_toward(tree.basepoint());
    let basepoint_distance = tree.distances_from(tree.basepoint());
    let mut vertex_flow = vec![0.0; n];
    let mut specific_flow = vec![0.0; n];
    let flow_from = |e: EdgeId, v: VertexId| {
        if tree.edge(e).tail == v {
            edge_flow[e.0]
        } else {
            -edge_flow[e.0]
        }
    };
    for v in tree.vertices() {
        // exact values; the neutrality threshold only labels signs
        let phi: f64 = tree
            .incident(v)
            .iter()
            .map(|&e| flow_from(e, v).max(0.0))
            .sum();
        vertex_flow[v.0] = phi;
        let at_basepoint = tree.basepoint() == TreePoint::Vertex(v);
        specific_flow[v.0] = match toward[v.0] {
            // a positive edge towards x₀ is one of the outflows, a negative one
            // one of the inflows; both total φ(x)
            Some(e) if !at_basepoint => phi - flow_from(e, v).abs(),
            _ => phi,
        };
    }
    Ok(FlowTable {
        edge_flow,
        vertex_flow,
        specific_flow,
        basepoint_distance,
    })
}

/// Outcome of the realizability test.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    /// Finite tree: the sum is a finite number.
    Finite,
    Diverges,
    Converges,
    Undecided,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::Finite => "FINITE",
            Verdict::Diverges => "DIVERGES",
            Verdict::Converges => "CONVERGES",
            Verdict::Undecided => "UNDECIDED",
        })
    }
}

/// Increment per depth doubling above which a truncated sum is declared divergent.
pub const DIVERGENCE_INCREMENT: f64 = 0.25;
/// Change over the last three doublings below which a truncated sum is declared convergent.
pub const CONVERGENCE_TOL: f64 = 1e-3;

#[derive(Clone, Debug, PartialEq)]
pub struct Realizability {
    /// `Σ φ⁰(x) d(x, x₀)²` over the whole (possibly truncated) tree.
    pub value: f64,
    /// `(n, S(n))` with `S(n)` the sum over vertices fewer than `n` hops from
    /// the basepoint, at doubling depths; empty for untruncated trees.
    pub partial_sums: Vec<(usize, f64)>,
    pub verdict: Verdict,
    pub depth: Option<usize>,
}

/// `Σ_x φ⁰(x) d(x, x₀)²`. For truncations of infinite trees the verdict comes
/// from the growth of the partial sums over the last three depth doublings.
pub fn realizability_sum(tree: &MetricTree, flow: &FlowTable) -> Realizability {
    let terms: Vec<f64> = tree
        .vertices()
        .map(|v| flow.specific_flow[v.0] * flow.basepoint_distance[v.0].powi(2))
        .collect();
    let value: f64 = terms.iter().sum();
    let Some(depth) = tree.truncation_depth() else {
        return Realizability {
            value,
            partial_sums: Vec::new(),
            verdict: Verdict::Finite,
            depth: None,
        };
    };

    let hops = hops_from_basepoint(tree);
    let max_hop = hops.iter().copied().max().unwrap_or(0);
    let mut by_hop = vec![0.0; max_hop + 1];
    for v in tree.vertices() {
        by_hop[hops[v.0]] += terms[v.0];
    }
    let mut prefix = Vec::with_capacity(by_hop.len() + 1);
    prefix.push(0.0);
    for x in &by_hop {
        prefix.push(prefix.last().unwrap() + x);
    }
    let s = |n: usize| prefix[n.min(prefix.len() - 1)];
    let mut marks = Vec::new();
    let mut n = 1;
    while n < depth {
        marks.push(n);
        n *= 2;
    }
    marks.push(depth);
    let partial_sums: Vec<(usize, f64)> = marks.iter().map(|&n| (n, s(n))).collect();

    let verdict = {
        let k = partial_sums.len();
        let doubling = |i: usize| partial_sums[i].0 == 2 * partial_sums[i - 1].0;
        if k < 4 || !(k - 3..k).all(doubling) {
            Verdict::Undecided
        } else {
            let inc = |i: usize| partial_sums[i].1 - partial_sums[i - 1].1;
            if (k - 3..k).all(|i| inc(i) >= DIVERGENCE_INCREMENT) {
                Verdict::Diverges
            } else if (partial_sums[k - 1].1 - partial_sums[k - 4].1).abs() < CONVERGENCE_TOL {
                Verdict::Converges
            } else {
                Verdict::Undecided
            }
        }
    };
    Realizability {
        value,
        partial_sums,
        verdict,
        depth: Some(depth),
    }
}

/// Hop count from the basepoint to every vertex.
fn hops_from_basepoint(tree: &MetricTree) -> Vec<usize> {
    let n = tree.vertex_count();
    let mut hops = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    match tree.basepoint() {
        TreePoint::Vertex(v) => {
            hops[v.0] = 0;
            queue.push_back(v);
        }
        TreePoint::OnEdge { edge, .. } => {
            let e = tree.edge(edge);
            for v in std::iter::once(e.tail).chain(e.head) {
                hops[v.0] = 0;
                queue.push_back(v);
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for &e in tree.incident(v) {
            if let Some(w) = tree.edge(e).other(v) {
                if hops[w.0] == usize::MAX {
                    hops[w.0] = hops[v.0] + 1;
                    queue.push_back(w);
                }
            }
        }
    }
    hops
}
