#![allow(dead_code)]

use std::collections::{BTreeMap, VecDeque};

use rand::distributions::uniform::SampleRange;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use w2tree::metric_tree::{EdgeId, MetricTree, TreeEnd, TreePoint, TreeSpec, VertexId};
use w2tree::radon::{Flag, VertexFunction};
use w2tree::transport::DiscreteMeasure;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn length(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.25..3.0)
}

/// Random recursive tree with a vertex count and a number of infinite edges
/// drawn from the given ranges; rays sit at random vertices. Basepoint: a
/// random vertex.
pub fn random_tree(
    rng: &mut ChaCha8Rng,
    vertices: impl SampleRange<usize>,
    rays: impl SampleRange<usize>,
) -> MetricTree {
    let n = rng.gen_range(vertices);
    let rays = rng.gen_range(rays);
    let mut spec = TreeSpec::new();
    for i in 0..n {
        spec = spec.vertex(&format!("v{i}"));
    }
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        spec = spec.edge(
            &format!("e{i}"),
            &format!("v{parent}"),
            &format!("v{i}"),
            length(rng),
        );
    }
    for r in 0..rays {
        let at = rng.gen_range(0..n);
        spec = spec.ray(&format!("r{r}"), &format!("v{at}"));
    }
    let base = rng.gen_range(0..n);
    spec.basepoint_vertex(&format!("v{base}")).build().unwrap()
}

/// Random tree in which every vertex carries enough rays to reach valency
/// three: no leaves and no vertices of valency two.
pub fn leaf_free_tree(rng: &mut ChaCha8Rng, vertices: impl SampleRange<usize>) -> MetricTree {
    let n = rng.gen_range(vertices);
    let mut spec = TreeSpec::new();
    let mut valency = vec![0usize; n];
    for i in 0..n {
        spec = spec.vertex(&format!("v{i}"));
    }
    for i in 1..n {
        let parent = rng.gen_range(0..i);
        valency[parent] += 1;
        valency[i] += 1;
        spec = spec.edge(
            &format!("e{i}"),
            &format!("v{parent}"),
            &format!("v{i}"),
            length(rng),
        );
    }
    let mut r = 0;
    for (i, &k) in valency.iter().enumerate() {
        let extra = 3usize.saturating_sub(k) + usize::from(rng.gen_bool(0.3));
        for _ in 0..extra {
            spec = spec.ray(&format!("r{r}"), &format!("v{i}"));
            r += 1;
        }
    }
    let base = rng.gen_range(0..n);
    spec.basepoint_vertex(&format!("v{base}")).build().unwrap()
}

/// A vertex, or a point inside a random edge (at most 4 units out on rays).
pub fn random_point(rng: &mut ChaCha8Rng, tree: &MetricTree) -> TreePoint {
    if tree.edge_count() == 0 || rng.gen_bool(0.4) {
        return TreePoint::Vertex(VertexId(rng.gen_range(0..tree.vertex_count())));
    }
    let e = tree.edge_ids().collect::<Vec<_>>()[rng.gen_range(0..tree.edge_count())];
    let len = tree.edge(e).length.min(4.0);
    tree.point_on_edge(e, rng.gen_range(0.05..0.95) * len)
        .unwrap()
}

pub fn random_masses(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let raw: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..1.0)).collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter().map(|m| m / total).collect()
}

pub fn random_measure(rng: &mut ChaCha8Rng, tree: &MetricTree, n: usize) -> DiscreteMeasure {
    let masses = random_masses(rng, n);
    DiscreteMeasure::new(
        (0..n)
            .map(|i| (random_point(rng, tree), masses[i]))
            .collect(),
    )
    .unwrap()
}

pub fn ends(tree: &MetricTree) -> Vec<TreeEnd> {
    tree.ends().collect()
}

pub fn pick_ends(rng: &mut ChaCha8Rng, tree: &MetricTree, k: usize) -> Vec<TreeEnd> {
    let mut all = ends(tree);
    all.shuffle(rng);
    all.truncate(k);
    all
}

/// Distance computed from the edge list alone: vertex distances by a
/// traversal from each vertex, then the best combination of edge endpoints.
pub struct DistanceOracle {
    vertex: Vec<Vec<f64>>,
    ends: Vec<(usize, Option<usize>, f64)>,
}

impl DistanceOracle {
    pub fn new(tree: &MetricTree) -> Self {
        let n = tree.vertex_count();
        let ends: Vec<(usize, Option<usize>, f64)> = tree
            .edge_ids()
            .map(|e| {
                let edge = tree.edge(e);
                (edge.tail.0, edge.head.map(|h| h.0), edge.length)
            })
            .collect();
        let mut adj = vec![Vec::new(); n];
        for &(a, b, len) in &ends {
            if let Some(b) = b {
                adj[a].push((b, len));
                adj[b].push((a, len));
            }
        }
        let vertex = (0..n)
            .map(|s| {
                let mut d = vec![f64::NAN; n];
                d[s] = 0.0;
                let mut stack = vec![s];
                while let Some(u) = stack.pop() {
                    for &(w, len) in &adj[u] {
                        if d[w].is_nan() {
                            d[w] = d[u] + len;
                            stack.push(w);
                        }
                    }
                }
                d
            })
            .collect();
        DistanceOracle { vertex, ends }
    }

    /// `(edge index, offset)` or a vertex, as reachable endpoints with their distances.
    fn anchors(&self, p: TreePoint) -> Vec<(usize, f64)> {
        match p {
            TreePoint::Vertex(v) => vec![(v.0, 0.0)],
            TreePoint::OnEdge { edge, offset } => {
                let (a, b, len) = self.ends[edge.0];
                let mut out = vec![(a, offset)];
                if let Some(b) = b {
                    out.push((b, len - offset));
                }
                out
            }
        }
    }

    pub fn distance(&self, p: TreePoint, q: TreePoint) -> f64 {
        if let (
            TreePoint::OnEdge { edge: e, offset: s },
            TreePoint::OnEdge { edge: f, offset: t },
        ) = (p, q)
        {
            if e == f {
                return (s - t).abs();
            }
        }
        let mut best = f64::INFINITY;
        for (a, da) in self.anchors(p) {
            for (b, db) in self.anchors(q) {
                best = best.min(da + self.vertex[a][b] + db);
            }
        }
        best
    }
}

/// Minimum of `Σ_i c(i, σ(i)) / n` over all permutations.
pub fn best_assignment(cost: &[Vec<f64>]) -> f64 {
    let n = cost.len();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut best = f64::INFINITY;
    permute(&mut perm, 0, cost, &mut best);
    best / n as f64
}

fn permute(perm: &mut Vec<usize>, k: usize, cost: &[Vec<f64>], best: &mut f64) {
    if k == perm.len() {
        let c: f64 = perm.iter().enumerate().map(|(i, &j)| cost[i][j]).sum();
        *best = best.min(c);
        return;
    }
    for i in k..perm.len() {
        perm.swap(k, i);
        permute(perm, k + 1, cost, best);
        perm.swap(k, i);
    }
}

/// `ℛh(x, ef)` by summing `h` over vertices whose path from `x` avoids `e` and `f`.
pub fn radon_oracle(tree: &MetricTree, h: &VertexFunction) -> BTreeMap<Flag, f64> {
    let mut out = BTreeMap::new();
    for x in tree.vertices() {
        // first edge used on the way from x to every vertex
        let mut first: Vec<Option<EdgeId>> = vec![None; tree.vertex_count()];
        let mut seen = vec![false; tree.vertex_count()];
        seen[x.0] = true;
        let mut queue = VecDeque::from([x]);
        while let Some(v) = queue.pop_front() {
            for &e in tree.incident(v) {
                if let Some(w) = tree.edge(e).other(v) {
                    if !seen[w.0] {
                        seen[w.0] = true;
                        first[w.0] = if v == x { Some(e) } else { first[v.0] };
                        queue.push_back(w);
                    }
                }
            }
        }
        let incident = tree.incident(x);
        for (i, &e) in incident.iter().enumerate() {
            for &f in &incident[i + 1..] {
                let sum: f64 = tree
                    .vertices()
                    .filter(|y| first[y.0] != Some(e) && first[y.0] != Some(f))
                    .map(|y| h.get(y))
                    .sum();
                out.insert(Flag::new(tree, x, e, f).unwrap(), sum);
            }
        }
    }
    out
}
