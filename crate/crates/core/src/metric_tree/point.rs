use std::cmp::Ordering;

use super::{EdgeId, VertexId, EPS};

/// A location in the tree: a vertex, or a point strictly inside an edge at
/// `offset` from the edge's tail.
///
/// Values produced by [`MetricTree`](super::MetricTree) are canonical: offsets
/// at an endpoint are stored as the vertex itself.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum TreePoint {
    Vertex(VertexId),
    OnEdge { edge: EdgeId, offset: f64 },
}

impl TreePoint {
    pub fn vertex(self) -> Option<VertexId> {
        match self {
            TreePoint::Vertex(v) => Some(v),
            TreePoint::OnEdge { .. } => None,
        }
    }

    /// Equality up to [`EPS`] on edge offsets.
    pub fn approx_eq(&self, other: &TreePoint) -> bool {
        match (self, other) {
            (TreePoint::Vertex(a), TreePoint::Vertex(b)) => a == b,
            (
                TreePoint::OnEdge { edge: e, offset: a },
                TreePoint::OnEdge { edge: f, offset: b },
            ) => e == f && (a - b).abs() <= EPS,
            _ => false,
        }
    }

    /// Deterministic total order: vertices first, then by edge and offset.
    pub fn total_cmp(&self, other: &TreePoint) -> Ordering {
        match (self, other) {
            (TreePoint::Vertex(a), TreePoint::Vertex(b)) => a.cmp(b),
            (TreePoint::Vertex(_), TreePoint::OnEdge { .. }) => Ordering::Less,
            (TreePoint::OnEdge { .. }, TreePoint::Vertex(_)) => Ordering::Greater,
            (
                TreePoint::OnEdge { edge: e, offset: a },
                TreePoint::OnEdge { edge: f, offset: b },
            ) => e.cmp(f).then(a.total_cmp(b)),
        }
    }
}
