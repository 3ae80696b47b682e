//! Locally finite metric trees with finitely many vertices.
//!
//! A tree is a set of vertices joined by edges of positive length. Edges with
//! a single endpoint have infinite length and each carries one boundary end.
//! Edge and vertex identifiers are indices into the order in which they were
//! supplied; "lowest edge id" tie-breaking elsewhere in the crate refers to
//! that order.

mod geodesic;
mod point;

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use thiserror::Error;

pub use geodesic::{Interval, IntervalKind, Locus, Segment, Traversal, TreeGeodesic};
pub use point::TreePoint;

/// Absolute tolerance used for point and length comparisons.
pub const EPS: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId(pub usize);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgeId(pub usize);

/// A boundary point of the tree, identified with the infinite edge leading to it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TreeEnd(pub EdgeId);

impl TreeEnd {
    pub fn edge(self) -> EdgeId {
        self.0
    }
}

/// Why a tree description was rejected.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Malformation {
    Empty,
    DuplicateVertex(String),
    DuplicateEdge(String),
    UnknownVertex(String),
    SelfLoop(String),
    BadEndpointCount(String),
    NonPositiveLength(String),
    /// An infinite edge listed with two endpoints; it must be split by the caller.
    InfiniteEdgeWithTwoEnds(String),
    FiniteEdgeWithOneEnd(String),
    Cycle(String),
    Disconnected,
    BadBasepoint(String),
}

impl fmt::Display for Malformation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Malformation::Empty => write!(f, "tree has no vertices"),
            Malformation::DuplicateVertex(v) => write!(f, "duplicate vertex `{v}`"),
            Malformation::DuplicateEdge(e) => write!(f, "duplicate edge `{e}`"),
            Malformation::UnknownVertex(v) => write!(f, "edge refers to unknown vertex `{v}`"),
            Malformation::SelfLoop(e) => write!(f, "edge `{e}` is a loop"),
            Malformation::BadEndpointCount(e) => {
                write!(f, "edge `{e}` must have one or two endpoints")
            }
            Malformation::NonPositiveLength(e) => {
                write!(f, "edge `{e}` has a non-positive or undefined length")
            }
            Malformation::InfiniteEdgeWithTwoEnds(e) => write!(
                f,
                "edge `{e}` is infinite but has two endpoints; split it into two rays"
            ),
            Malformation::FiniteEdgeWithOneEnd(e) => {
                write!(f, "edge `{e}` has one endpoint but finite length")
            }
            Malformation::Cycle(e) => write!(f, "edge `{e}` closes a cycle"),
            Malformation::Disconnected => write!(f, "tree is disconnected"),
            Malformation::BadBasepoint(why) => write!(f, "invalid basepoint: {why}"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TreeError {
    #[error("malformed tree: {0}")]
    MalformedTree(Malformation),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("edge `{0}` is finite and has no boundary end")]
    NotAnEnd(String),
    #[error("offset {offset} is outside edge `{edge}`")]
    InvalidOffset { edge: String, offset: f64 },
    #[error("time {t} lies outside the geodesic's interval")]
    OutOfInterval { t: f64 },
    #[error("geodesic is constant")]
    ConstantGeodesic,
    #[error("the two ends coincide")]
    EqualEnds,
    #[error("invalid flag: {0}")]
    FlagInvalid(String),
    #[error("invalid parameter interval [{0}, {1}]")]
    InvalidInterval(f64, f64),
}

/// Edge as supplied by a caller, before validation.
#[derive(Clone, Debug, PartialEq)]
pub struct EdgeSpec {
    pub id: String,
    pub ends: Vec<String>,
    pub length: f64,
}

/// Point as supplied by a caller, in terms of names.
#[derive(Clone, Debug, PartialEq)]
pub enum PointSpec {
    Vertex(String),
    OnEdge { edge: String, offset: f64 },
}

/// Unvalidated tree description.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct TreeSpec {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeSpec>,
    pub basepoint: Option<PointSpec>,
}

impl TreeSpec {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn vertex(mut self, name: &str) -> Self {
        self.vertices.push(name.to_string());
        self
    }

    pub fn edge(mut self, id: &str, a: &str, b: &str, length: f64) -> Self {
        self.edges.push(EdgeSpec {
            id: id.to_string(),
            ends: vec![a.to_string(), b.to_string()],
            length,
        });
        self
    }

    pub fn ray(mut self, id: &str, a: &str) -> Self {
        self.edges.push(EdgeSpec {
            id: id.to_string(),
            ends: vec![a.to_string()],
            length: f64::INFINITY,
        });
        self
    }

    pub fn basepoint(mut self, point: PointSpec) -> Self {
        self.basepoint = Some(point);
        self
    }

    pub fn basepoint_vertex(self, name: &str) -> Self {
        self.basepoint(PointSpec::Vertex(name.to_string()))
    }

    pub fn build(&self) -> Result<MetricTree, TreeError> {
        MetricTree::from_spec(self)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub name: String,
    pub tail: VertexId,
    pub head: Option<VertexId>,
    pub length: f64,
}

impl Edge {
    pub fn is_infinite(&self) -> bool {
        self.head.is_none()
    }

    /// The endpoint opposite to `v`, or `None` for the point at infinity.
    pub fn other(&self, v: VertexId) -> Option<VertexId> {
        if self.tail == v {
            self.head
        } else {
            Some(self.tail)
        }
    }
}

/// Summary produced by [`validate`].
#[derive(Clone, Debug, PartialEq)]
pub struct ValidationReport {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub infinite_edges: Vec<String>,
    pub leaves: Vec<String>,
    pub valency_two: Vec<String>,
}

impl ValidationReport {
    /// Whether the tree satisfies the extra requirements of the Radon operations.
    pub fn radon_ready(&self) -> bool {
        self.leaves.is_empty() && self.valency_two.is_empty()
    }
}

/// Checks a tree description and summarises it.
pub fn validate(spec: &TreeSpec) -> Result<ValidationReport, TreeError> {
    Ok(MetricTree::from_spec(spec)?.report())
}

/// A validated, immutable metric tree with a basepoint.
#[derive(Clone, Debug)]
pub struct MetricTree {
    vertex_names: Vec<String>,
    vertex_index: HashMap<String, VertexId>,
    edges: Vec<Edge>,
    edge_index: HashMap<String, EdgeId>,
    incident: Vec<Vec<EdgeId>>,
    basepoint: TreePoint,
    // rooted at vertex 0 along finite edges
    parent: Vec<Option<(VertexId, EdgeId)>>,
    depth: Vec<usize>,
    root_dist: Vec<f64>,
    ancestors: Vec<Vec<VertexId>>,
    truncation_depth: Option<usize>,
}

impl MetricTree {
    pub fn from_spec(spec: &TreeSpec) -> Result<Self, TreeError> {
        use Malformation as M;
        let bad = |m: Malformation| TreeError::MalformedTree(m);

        if spec.vertices.is_empty() {
            return Err(bad(M::Empty));
        }
        let mut vertex_index = HashMap::new();
        for (i, name) in spec.vertices.iter().enumerate() {
            if vertex_index.insert(name.clone(), VertexId(i)).is_some() {
                return Err(bad(M::DuplicateVertex(name.clone())));
            }
        }

        let n = spec.vertices.len();
        let mut edges = Vec::with_capacity(spec.edges.len());
        let mut edge_index = HashMap::new();
        let mut incident = vec![Vec::new(); n];
        let mut uf = UnionFind::new(n);
        for (i, e) in spec.edges.iter().enumerate() {
            if edge_index.insert(e.id.clone(), EdgeId(i)).is_some() {
                return Err(bad(M::DuplicateEdge(e.id.clone())));
            }
            if !(e.length > 0.0) {
                return Err(bad(M::NonPositiveLength(e.id.clone())));
            }
            let ends: Vec<VertexId> = e
                .ends
                .iter()
                .map(|v| {
                    vertex_index
                        .get(v)
                        .copied()
                        .ok_or_else(|| bad(M::UnknownVertex(v.clone())))
                })
                .collect::<Result<_, _>>()?;
            let (tail, head) = match ends.as_slice() {
                [a] => {
                    if e.length.is_finite() {
                        return Err(bad(M::FiniteEdgeWithOneEnd(e.id.clone())));
                    }
                    (*a, None)
                }
                [a, b] => {
                    if !e.length.is_finite() {
                        return Err(bad(M::InfiniteEdgeWithTwoEnds(e.id.clone())));
                    }
                    if a == b {
                        return Err(bad(M::SelfLoop(e.id.clone())));
                    }
                    if !uf.union(a.0, b.0) {
                        return Err(bad(M::Cycle(e.id.clone())));
                    }
                    (*a, Some(*b))
                }
                _ => return Err(bad(M::BadEndpointCount(e.id.clone()))),
            };
            incident[tail.0].push(EdgeId(i));
            if let Some(h) = head {
                incident[h.0].push(EdgeId(i));
            }
            edges.push(Edge {
                name: e.id.clone(),
                tail,
                head,
                length: e.length,
            });
        }
        if (1..n).any(|v| uf.find(v) != uf.find(0)) {
            return Err(bad(M::Disconnected));
        }

        let mut parent = vec![None; n];
        let mut depth = vec![0usize; n];
        let mut root_dist = vec![0.0; n];
        let mut seen = vec![false; n];
        let mut queue = VecDeque::from([VertexId(0)]);
        seen[0] = true;
        while let Some(v) = queue.pop_front() {
            for &eid in &incident[v.0] {
                let edge = &edges[eid.0];
                if let Some(w) = edge.other(v) {
                    if !seen[w.0] {
                        seen[w.0] = true;
                        parent[w.0] = Some((v, eid));
                        depth[w.0] = depth[v.0] + 1;
                        root_dist[w.0] = root_dist[v.0] + edge.length;
                        queue.push_back(w);
                    }
                }
            }
        }

        let levels = usize::BITS as usize - n.leading_zeros() as usize;
        let mut ancestors = vec![(0..n)
            .map(|v| parent[v].map_or(VertexId(v), |(p, _)| p))
            .collect::<Vec<_>>()];
        for k in 1..levels.max(1) {
            let prev = &ancestors[k - 1];
            let next = (0..n).map(|v| prev[prev[v].0]).collect();
            ancestors.push(next);
        }

        let mut tree = MetricTree {
            vertex_names: spec.vertices.clone(),
            vertex_index,
            edges,
            edge_index,
            incident,
            basepoint: TreePoint::Vertex(VertexId(0)),
            parent,
            depth,
            root_dist,
            ancestors,
            truncation_depth: None,
        };
        tree.basepoint = match &spec.basepoint {
            None => TreePoint::Vertex(VertexId(0)),
            Some(p) => tree
                .resolve_point(p)
                .map_err(|e| bad(M::BadBasepoint(e.to_string())))?,
        };
        Ok(tree)
    }

    pub fn report(&self) -> ValidationReport {
        let mut leaves = Vec::new();
        let mut valency_two = Vec::new();
        for v in self.vertices() {
            match self.valency(v) {
                1 => leaves.push(self.vertex_name(v).to_string()),
                2 => valency_two.push(self.vertex_name(v).to_string()),
                _ => {}
            }
        }
        ValidationReport {
            vertex_count: self.vertex_count(),
            edge_count: self.edge_count(),
            infinite_edges: self
                .ends()
                .map(|e| self.edge(e.edge()).name.clone())
                .collect(),
            leaves,
            valency_two,
        }
    }

    /// Marks the tree as a finite truncation of an infinite tree at the given depth.
    pub fn with_truncation_depth(mut self, depth: usize) -> Self {
        self.truncation_depth = Some(depth);
        self
    }

    pub fn truncation_depth(&self) -> Option<usize> {
        self.truncation_depth
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_names.len()).map(VertexId)
    }

    pub fn edge_ids(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len()).map(EdgeId)
    }

    /// All boundary ends, in edge order.
    pub fn ends(&self) -> impl Iterator<Item = TreeEnd> + '_ {
        self.edge_ids()
            .filter(|&e| self.edge(e).is_infinite())
            .map(TreeEnd)
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertex_names[v.0]
    }

    pub fn vertex_id(&self, name: &str) -> Result<VertexId, TreeError> {
        self.vertex_index
            .get(name)
            .copied()
            .ok_or_else(|| TreeError::UnknownVertex(name.to_string()))
    }

    pub fn edge_id(&self, name: &str) -> Result<EdgeId, TreeError> {
        self.edge_index
            .get(name)
            .copied()
            .ok_or_else(|| TreeError::UnknownEdge(name.to_string()))
    }

    pub fn end(&self, name: &str) -> Result<TreeEnd, TreeError> {
        let e = self.edge_id(name)?;
        if self.edge(e).is_infinite() {
            Ok(TreeEnd(e))
        } else {
            Err(TreeError::NotAnEnd(name.to_string()))
        }
    }

    /// Edges incident to `v`, sorted by id.
    pub fn incident(&self, v: VertexId) -> &[EdgeId] {
        &self.incident[v.0]
    }

    pub fn valency(&self, v: VertexId) -> usize {
        self.incident[v.0].len()
    }

    pub fn basepoint(&self) -> TreePoint {
        self.basepoint
    }

    /// Returns a copy of the tree with another basepoint.
    pub fn with_basepoint(&self, basepoint: TreePoint) -> Self {
        let mut t = self.clone();
        t.basepoint = basepoint;
        t
    }

    pub fn is_leaf_free(&self) -> bool {
        self.vertices().all(|v| self.valency(v) != 1)
    }

    /// Leaf-free and without vertices of valency two.
    pub fn is_radon_ready(&self) -> bool {
        self.vertices().all(|v| self.valency(v) >= 3)
    }

    /// Hop depth from the root vertex used internally.
    pub fn hop_depth(&self, v: VertexId) -> usize {
        self.depth[v.0]
    }

    /// Canonical point at `offset` along `edge`, measured from the edge's tail.
    pub fn point_on_edge(&self, edge: EdgeId, offset: f64) -> Result<TreePoint, TreeError> {
        let e = self.edge(edge);
        if !(offset >= -EPS && offset <= e.length + EPS) || !offset.is_finite() {
            return Err(TreeError::InvalidOffset {
                edge: e.name.clone(),
                offset,
            });
        }
        Ok(self.canonical(edge, offset))
    }

    /// Snaps offsets within [`EPS`] of an endpoint onto the vertex.
    pub fn canonical(&self, edge: EdgeId, offset: f64) -> TreePoint {
        let e = self.edge(edge);
        if offset <= EPS {
            TreePoint::Vertex(e.tail)
        } else if let Some(h) = e.head.filter(|_| offset >= e.length - EPS) {
            TreePoint::Vertex(h)
        } else {
            TreePoint::OnEdge { edge, offset }
        }
    }

    pub fn resolve_point(&self, spec: &PointSpec) -> Result<TreePoint, TreeError> {
        match spec {
            PointSpec::Vertex(v) => Ok(TreePoint::Vertex(self.vertex_id(v)?)),
            PointSpec::OnEdge { edge, offset } => self.point_on_edge(self.edge_id(edge)?, *offset),
        }
    }

    pub fn point_spec(&self, p: TreePoint) -> PointSpec {
        match p {
            TreePoint::Vertex(v) => PointSpec::Vertex(self.vertex_name(v).to_string()),
            TreePoint::OnEdge { edge, offset } => PointSpec::OnEdge {
                edge: self.edge(edge).name.clone(),
                offset,
            },
        }
    }

    fn lca(&self, mut u: VertexId, mut v: VertexId) -> VertexId {
        if self.depth[u.0] < self.depth[v.0] {
            std::mem::swap(&mut u, &mut v);
        }
        let mut diff = self.depth[u.0] - self.depth[v.0];
        let mut k = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                u = self.ancestors[k][u.0];
            }
            diff >>= 1;
            k += 1;
        }
        if u == v {
            return u;
        }
        for k in (0..self.ancestors.len()).rev() {
            let (a, b) = (self.ancestors[k][u.0], self.ancestors[k][v.0]);
            if a != b {
                u = a;
                v = b;
            }
        }
        self.parent[u.0].map_or(u, |(p, _)| p)
    }

    pub fn vertex_distance(&self, u: VertexId, v: VertexId) -> f64 {
        if u == v {
            return 0.0;
        }
        let w = self.lca(u, v);
        (self.root_dist[u.0] - self.root_dist[w.0]) + (self.root_dist[v.0] - self.root_dist[w.0])
    }

    /// Vertices and edges along the injective path from `u` to `v`.
    pub fn vertex_path(&self, u: VertexId, v: VertexId) -> (Vec<VertexId>, Vec<EdgeId>) {
        let w = self.lca(u, v);
        let mut up_vertices = vec![u];
        let mut up_edges = Vec::new();
        let mut x = u;
        while x != w {
            let (p, e) = self.parent[x.0].expect("non-root vertex has a parent");
            up_edges.push(e);
            up_vertices.push(p);
            x = p;
        }
        let mut down_vertices = Vec::new();
        let mut down_edges = Vec::new();
        let mut x = v;
        while x != w {
            let (p, e) = self.parent[x.0].expect("non-root vertex has a parent");
            down_vertices.push(x);
            down_edges.push(e);
            x = p;
        }
        down_vertices.reverse();
        down_edges.reverse();
        up_vertices.extend(down_vertices);
        up_edges.extend(down_edges);
        (up_vertices, up_edges)
    }

    /// Vertices adjacent to `p` paired with their distance to `p`.
    pub(crate) fn anchors(&self, p: TreePoint) -> Vec<(VertexId, f64)> {
        match p {
            TreePoint::Vertex(v) => vec![(v, 0.0)],
            TreePoint::OnEdge { edge, offset } => {
                let e = self.edge(edge);
                let mut out = vec![(e.tail, offset)];
                if let Some(h) = e.head {
                    out.push((h, e.length - offset));
                }
                out
            }
        }
    }

    /// Length of the unique injective path between two points.
    pub fn distance(&self, p: TreePoint, q: TreePoint) -> f64 {
        if let (
            TreePoint::OnEdge {
                edge: e1,
                offset: a,
            },
            TreePoint::OnEdge {
                edge: e2,
                offset: b,
            },
        ) = (p, q)
        {
            if e1 == e2 {
                return (a - b).abs();
            }
        }
        let mut best = f64::INFINITY;
        for (u, du) in self.anchors(p) {
            for (v, dv) in self.anchors(q) {
                best = best.min(du + self.vertex_distance(u, v) + dv);
            }
        }
        best
    }

    /// Distances from `p` to every vertex, by a single traversal.
    pub fn distances_from(&self, p: TreePoint) -> Vec<f64> {
        let mut dist = vec![f64::INFINITY; self.vertex_count()];
        let mut queue = VecDeque::new();
        for (v, d) in self.anchors(p) {
            dist[v.0] = d;
            queue.push_back(v);
        }
        while let Some(v) = queue.pop_front() {
            for &eid in self.incident(v) {
                let e = self.edge(eid);
                if let Some(w) = e.other(v) {
                    let cand = dist[v.0] + e.length;
                    if cand < dist[w.0] {
                        dist[w.0] = cand;
                        queue.push_back(w);
                    }
                }
            }
        }
        dist
    }

    /// Vertices of the perpendicular at `x` to the pair of incident edges `{e, f}`:
    /// `x` together with every vertex in a component of the tree minus `x` that
    /// contains neither `e` nor `f`.
    pub fn perpendicular(
        &self,
        x: VertexId,
        e: EdgeId,
        f: EdgeId,
    ) -> Result<Vec<VertexId>, TreeError> {
        self.check_flag(x, e, f)?;
        let mut out = vec![x];
        for &g in self.incident(x) {
            if g == e || g == f {
                continue;
            }
            if let Some(w) = self.edge(g).other(x) {
                out.extend(self.component_beyond(x, w));
            }
        }
        out.sort();
        Ok(out)
    }

    pub fn check_flag(&self, x: VertexId, e: EdgeId, f: EdgeId) -> Result<(), TreeError> {
        if e == f {
            return Err(TreeError::FlagInvalid(format!(
                "edges of a flag must differ (got `{}` twice)",
                self.edge(e).name
            )));
        }
        for g in [e, f] {
            if !self.incident(x).contains(&g) {
                return Err(TreeError::FlagInvalid(format!(
                    "edge `{}` is not incident to `{}`",
                    self.edge(g).name,
                    self.vertex_name(x)
                )));
            }
        }
        Ok(())
    }

    /// Vertices reachable from `start` without passing through `blocked`.
    pub(crate) fn component_beyond(&self, blocked: VertexId, start: VertexId) -> Vec<VertexId> {
        let mut seen = HashSet::from([blocked, start]);
        let mut stack = vec![start];
        let mut out = vec![start];
        while let Some(v) = stack.pop() {
            for &eid in self.incident(v) {
                if let Some(w) = self.edge(eid).other(v) {
                    if seen.insert(w) {
                        out.push(w);
                        stack.push(w);
                    }
                }
            }
        }
        out
    }

    /// For each vertex, the edge leading one step closer to `p` (none at `p` itself).
    pub(crate) fn edges_toward(&self, p: TreePoint) -> Vec<Option<EdgeId>> {
        let mut toward = vec![None; self.vertex_count()];
        let mut seen = vec![false; self.vertex_count()];
        let mut queue = VecDeque::new();
        match p {
            TreePoint::Vertex(v) => {
                seen[v.0] = true;
                queue.push_back(v);
            }
            TreePoint::OnEdge { edge, .. } => {
                let e = self.edge(edge);
                for v in std::iter::once(e.tail).chain(e.head) {
                    seen[v.0] = true;
                    toward[v.0] = Some(edge);
                    queue.push_back(v);
                }
            }
        }
        while let Some(v) = queue.pop_front() {
            for &eid in self.incident(v) {
                if let Some(w) = self.edge(eid).other(v) {
                    if !seen[w.0] {
                        seen[w.0] = true;
                        toward[w.0] = Some(eid);
                        queue.push_back(w);
                    }
                }
            }
        }
        toward
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false if `a` and `b` were already connected.
    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}
