//! Perpendicular Radon transform of measures and the combinatorial Radon
//! transform of vertex functions, with its inversion formula.

use std::collections::{BTreeMap, VecDeque};

use thiserror::Error;

use crate::metric_tree::{EdgeId, MetricTree, TreeError, TreeGeodesic, TreePoint, VertexId, EPS};
use crate::transport::DiscreteMeasure;

/// Tolerance of the re-transform consistency check.
pub const CONSISTENCY_TOL: f64 = 1e-7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RadonError {
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error("tree is not fit for the Radon transform: {0}")]
    MalformedForRadon(String),
    #[error("no value given for the flag at `{vertex}` with edges `{e}`, `{f}`")]
    MissingFlag {
        vertex: String,
        e: String,
        f: String,
    },
    #[error("data is not a Radon transform: flag at `{vertex}` has value {given}, reconstruction gives {recomputed}")]
    InconsistentData {
        vertex: String,
        given: f64,
        recomputed: f64,
    },
}

/// A vertex with an unordered pair of distinct incident edges, stored with
/// the lower edge id first.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Flag {
    pub vertex: VertexId,
    pub edges: (EdgeId, EdgeId),
}

impl Flag {
    pub fn new(
        tree: &MetricTree,
        vertex: VertexId,
        e: EdgeId,
        f: EdgeId,
    ) -> Result<Self, RadonError> {
        tree.check_flag(vertex, e, f)?;
        Ok(Self {
            vertex,
            edges: (e.min(f), e.max(f)),
        })
    }
}

/// Every flag of the tree, ordered by vertex then edge ids.
pub fn flags(tree: &MetricTree) -> Vec<Flag> {
    let mut out = Vec::new();
    for x in tree.vertices() {
        let mut inc = tree.incident(x).to_vec();
        inc.sort();
        for (i, &e) in inc.iter().enumerate() {
            for &f in &inc[i + 1..] {
                out.push(Flag {
                    vertex: x,
                    edges: (e, f),
                });
            }
        }
    }
    out
}

/// A real function on the vertices.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexFunction {
    values: Vec<f64>,
}

impl VertexFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(tree: &MetricTree) -> Self {
        Self::new(vec![0.0; tree.vertex_count()])
    }

    pub fn get(&self, v: VertexId) -> f64 {
        self.values[v.0]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn total(&self) -> f64 {
        self.values.iter().sum()
    }
}

fn require_radon_ready(tree: &MetricTree) -> Result<(), RadonError> {
    if let Some(v) = tree.vertices().find(|&v| tree.valency(v) < 3) {
        return Err(RadonError::MalformedForRadon(format!(
            "vertex `{}` has valency {}",
            tree.vertex_name(v),
            tree.valency(v)
        )));
    }
    Ok(())
}

/// `ℛμ(γ) = (p_γ)_# μ`: the projection of `μ` onto the locus of `γ`.
pub fn radon_measure(
    tree: &MetricTree,
    mu: &DiscreteMeasure,
    gamma: &TreeGeodesic,
) -> Result<DiscreteMeasure, RadonError> {
    let atoms = mu
        .atoms()
        .iter()
        .map(|&(p, m)| Ok((tree.project_to_geodesic(p, gamma)?, m)))
        .collect::<Result<Vec<_>, TreeError>>()?;
    Ok(DiscreteMeasure::merged(atoms))
}

/// For every edge, the sum of `h` over the vertices on each side:
/// `(side of the tail, side of the head)`; infinite edges have nothing
/// beyond their end.
fn side_sums(tree: &MetricTree, h: &VertexFunction) -> Vec<(f64, f64)> {
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
    let mut below: Vec<f64> = h.values.clone();
    for &v in order.iter().rev() {
        if let Some(pe) = parent_edge[v.0] {
            let p = tree.edge(pe).other(v).expect("parent edges are finite");
            below[p.0] += below[v.0];
        }
    }
    let total = h.total();
    tree.edge_ids()
        .map(|e| {
            let edge = tree.edge(e);
            match edge.head {
                None => (total, 0.0),
                Some(hd) if parent_edge[hd.0] == Some(e) => (total - below[hd.0], below[hd.0]),
                Some(_) => (below[edge.tail.0], total - below[edge.tail.0]),
            }
        })
        .collect()
}

/// `ℛh(x, ef) = Σ_{y ∈ ⊥^x(ef)} h(y)` on every flag.
pub fn combinatorial_radon(
    tree: &MetricTree,
    h: &VertexFunction,
) -> Result<BTreeMap<Flag, f64>, RadonError> {
    require_radon_ready(tree)?;
    let sides = side_sums(tree, h);
    // mass beyond `e` seen from `x`
    let beyond = |x: VertexId, e: EdgeId| {
        let (tail_side, head_side) = sides[e.0];
        if tree.edge(e).tail == x {
            head_side
        } else {
            tail_side
        }
    };
    let total = h.total();
    Ok(flags(tree)
        .into_iter()
        .map(|fl| {
            let (e, f) = fl.edges;
            (fl, total - beyond(fl.vertex, e) - beyond(fl.vertex, f))
        })
        .collect())
}

/// Recovers `h` from its transform and total:
/// `h(x) = (Σ_{ef ∋ x} ℛh(x, ef) − C(k−1, 2) Σh) / (k − 1)` with `k` the valency.
/// The result is transformed again and compared with the input.
pub fn radon_invert(
    tree: &MetricTree,
    data: &BTreeMap<Flag, f64>,
    total: f64,
) -> Result<VertexFunction, RadonError> {
    require_radon_ready(tree)?;
    let mut values = vec![0.0; tree.vertex_count()];
    let mut sums = vec![0.0; tree.vertex_count()];
    for fl in flags(tree) {
        let Some(r) = data.get(&fl) else {
            return Err(RadonError::MissingFlag {
                vertex: tree.vertex_name(fl.vertex).to_string(),
                e: tree.edge(fl.edges.0).name.clone(),
                f: tree.edge(fl.edges.1).name.clone(),
            });
        };
        sums[fl.vertex.0] += r;
    }
    for x in tree.vertices() {
        let k = tree.valency(x) as f64;
        let pairs = (k - 1.0) * (k - 2.0) / 2.0;
        values[x.0] = (sums[x.0] - pairs * total) / (k - 1.0);
    }
    let h = VertexFunction::new(values);
    let again = combinatorial_radon(tree, &h)?;
    for (fl, given) in data {
        let recomputed = again.get(fl).copied().unwrap_or(f64::NAN);
        if !((recomputed - given).abs() <= CONSISTENCY_TOL * (1.0 + given.abs())) {
            return Err(RadonError::InconsistentData {
                vertex: tree.vertex_name(fl.vertex).to_string(),
                given: *given,
                recomputed,
            });
        }
    }
    Ok(h)
}

/// Outcome of [`measure_radon_roundtrip`].
#[derive(Clone, Debug, PartialEq)]
pub struct RoundTrip {
    /// Atoms inside edges, read off the projections onto geodesics through each edge.
    pub edge_part: Vec<(TreePoint, f64)>,
    /// Vertex masses, recovered by inversion.
    pub vertex_part: VertexFunction,
    pub reconstructed: DiscreteMeasure,
    /// Largest mass difference with the input over all atoms of either measure.
    pub max_error: f64,
}

/// Recovers a measure from its perpendicular Radon transform. Edge-interior
/// mass is read off the projection onto one complete geodesic through each
/// edge; vertex mass is obtained from the projections onto geodesics through
/// every flag, minus the edge-interior mass they collect, by inversion.
pub fn measure_radon_roundtrip(
    tree: &MetricTree,
    mu: &DiscreteMeasure,
) -> Result<RoundTrip, RadonError> {
    require_radon_ready(tree)?;
    let no_geodesic =
        || RadonError::MalformedForRadon("no complete geodesic through an edge".into());

    let mut edge_part: Vec<(TreePoint, f64)> = Vec::new();
    for e in tree.edge_ids() {
        let gamma = tree.complete_geodesic_through(e).ok_or_else(no_geodesic)?;
        for &(p, m) in radon_measure(tree, mu, &gamma)?.atoms() {
            if matches!(p, TreePoint::OnEdge { edge, .. } if edge == e) {
                edge_part.push((p, m));
            }
        }
    }

    let mut data = BTreeMap::new();
    for fl in flags(tree) {
        let (e, f) = fl.edges;
        let gamma = tree
            .complete_geodesic_through_flag(fl.vertex, e, f)?
            .ok_or_else(no_geodesic)?;
        let x = TreePoint::Vertex(fl.vertex);
        let collected = radon_measure(tree, mu, &gamma)?.mass_at(&x);
        let mut interior = 0.0;
        for &(p, m) in &edge_part {
            if tree.project_to_geodesic(p, &gamma)?.approx_eq(&x) {
                interior += m;
            }
        }
        data.insert(fl, collected - interior);
    }
    let vertex_total = mu.total_mass() - edge_part.iter().map(|(_, m)| m).sum::<f64>();
    let vertex_part = radon_invert(tree, &data, vertex_total)?;

    let mut atoms = edge_part.clone();
    for v in tree.vertices() {
        let m = vertex_part.get(v);
        if m.abs() > EPS {
            atoms.push((TreePoint::Vertex(v), m));
        }
    }
    let reconstructed = DiscreteMeasure::merged(atoms);
    let mut max_error: f64 = 0.0;
    for (p, _) in mu.atoms().iter().chain(reconstructed.atoms()) {
        max_error = max_error.max((mu.mass_at(p) - reconstructed.mass_at(p)).abs());
    }
    Ok(RoundTrip {
        edge_part,
        vertex_part,
        reconstructed,
        max_error,
    })
}
