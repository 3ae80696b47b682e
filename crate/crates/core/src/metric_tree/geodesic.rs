use super::{EdgeId, MetricTree, TreeEnd, TreeError, TreePoint, VertexId, EPS};

/// Parameter interval of a geodesic; either bound may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntervalKind {
    /// `[t0, t1]`
    Segment,
    /// `[t0, +inf)`
    Ray,
    /// `(-inf, t1]`
    ReverseRay,
    /// `(-inf, +inf)`
    Complete,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn segment(t0: f64, t1: f64) -> Self {
        Self::new(t0, t1)
    }

    pub fn ray() -> Self {
        Self::new(0.0, f64::INFINITY)
    }

    pub fn complete() -> Self {
        Self::new(f64::NEG_INFINITY, f64::INFINITY)
    }

    pub fn kind(&self) -> IntervalKind {
        match (self.start.is_finite(), self.end.is_finite()) {
            (true, true) => IntervalKind::Segment,
            (true, false) => IntervalKind::Ray,
            (false, true) => IntervalKind::ReverseRay,
            (false, false) => IntervalKind::Complete,
        }
    }

    pub fn contains(&self, t: f64) -> bool {
        let slack = 1e-12 * t.abs().max(1.0);
        t >= self.start - slack && t <= self.end + slack
    }

    fn same_as(&self, other: &Interval) -> bool {
        close(self.start, other.start) && close(self.end, other.end)
    }
}

fn close(a: f64, b: f64) -> bool {
    a == b || (a - b).abs() <= EPS
}

/// One edge (or part of one) traversed by a path, in path coordinates.
///
/// Path coordinates increase along the direction of travel. The edge offset
/// at coordinate `c` is `c - tail_coord` when traversing tail to head, and
/// `tail_coord - c` otherwise.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Segment {
    pub edge: EdgeId,
    pub forward: bool,
    pub start: f64,
    pub end: f64,
    pub tail_coord: f64,
}

impl Segment {
    pub fn offset_at(&self, c: f64) -> f64 {
        if self.forward {
            c - self.tail_coord
        } else {
            self.tail_coord - c
        }
    }

    fn coord_of(&self, offset: f64) -> f64 {
        if self.forward {
            self.tail_coord + offset
        } else {
            self.tail_coord - offset
        }
    }

    fn shifted(&self, delta: f64) -> Segment {
        Segment {
            start: self.start + delta,
            end: self.end + delta,
            tail_coord: self.tail_coord + delta,
            ..*self
        }
    }

    fn approx_eq(&self, other: &Segment) -> bool {
        self.edge == other.edge
            && self.forward == other.forward
            && close(self.start, other.start)
            && close(self.end, other.end)
            && close(self.tail_coord, other.tail_coord)
    }
}

/// A traversal of part of an edge, in edge offsets.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Traversal {
    pub edge: EdgeId,
    pub forward: bool,
    pub lo: f64,
    pub hi: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Locus {
    /// Constant geodesic, or a geodesic on a degenerate interval.
    Point(TreePoint),
    Path(Vec<Segment>),
}

/// A constant-speed parametrized geodesic: `γ(t)` is the locus point at path
/// coordinate `speed * t`.
#[derive(Clone, Debug, PartialEq)]
pub struct TreeGeodesic {
    speed: f64,
    interval: Interval,
    locus: Locus,
}

#[derive(Clone, Copy, Debug)]
struct Hop {
    edge: EdgeId,
    forward: bool,
    from: f64,
    to: f64,
}

impl TreeGeodesic {
    /// Builds a geodesic from raw parts, as read back from a serialized plan.
    pub fn from_parts(speed: f64, interval: Interval, locus: Locus) -> Self {
        Self {
            speed,
            interval,
            locus,
        }
    }

    pub fn constant(point: TreePoint, interval: Interval) -> Self {
        Self {
            speed: 0.0,
            interval,
            locus: Locus::Point(point),
        }
    }

    pub fn speed(&self) -> f64 {
        self.speed
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn locus(&self) -> &Locus {
        &self.locus
    }

    pub fn is_constant(&self) -> bool {
        matches!(self.locus, Locus::Point(_))
    }

    pub fn segments(&self) -> &[Segment] {
        match &self.locus {
            Locus::Point(_) => &[],
            Locus::Path(s) => s,
        }
    }

    /// End reached as `t -> +inf`.
    pub fn forward_end(&self) -> Option<TreeEnd> {
        self.segments()
            .last()
            .filter(|s| s.end == f64::INFINITY)
            .map(|s| TreeEnd(s.edge))
    }

    /// End reached as `t -> -inf`.
    pub fn backward_end(&self) -> Option<TreeEnd> {
        self.segments()
            .first()
            .filter(|s| s.start == f64::NEG_INFINITY)
            .map(|s| TreeEnd(s.edge))
    }

    /// The point occupied at time `t`.
    pub fn evaluate(&self, tree: &MetricTree, t: f64) -> Result<TreePoint, TreeError> {
        if !self.interval.contains(t) || t.is_nan() || t.is_infinite() {
            return Err(TreeError::OutOfInterval { t });
        }
        Ok(match &self.locus {
            Locus::Point(p) => *p,
            Locus::Path(_) => self.point_at_coord(tree, self.speed * t),
        })
    }

    pub(crate) fn point_at_coord(&self, tree: &MetricTree, c: f64) -> TreePoint {
        let segs = self.segments();
        let idx = segs.partition_point(|s| s.end < c).min(segs.len() - 1);
        let seg = &segs[idx];
        let c = c.clamp(seg.start, seg.end);
        let len = tree.edge(seg.edge).length;
        let offset = seg.offset_at(c).clamp(0.0, len);
        tree.canonical(seg.edge, offset)
    }

    /// Coordinate range of the locus.
    pub(crate) fn coord_range(&self) -> (f64, f64) {
        let segs = self.segments();
        (segs[0].start, segs[segs.len() - 1].end)
    }

    /// Edge traversals in travel order.
    pub fn traversals(&self) -> Vec<Traversal> {
        self.segments()
            .iter()
            .map(|s| {
                let (a, b) = (s.offset_at(s.start), s.offset_at(s.end));
                Traversal {
                    edge: s.edge,
                    forward: s.forward,
                    lo: a.min(b),
                    hi: a.max(b),
                }
            })
            .collect()
    }

    /// Vertices on the locus, in travel order.
    pub fn vertices(&self, tree: &MetricTree) -> Vec<VertexId> {
        let mut out: Vec<VertexId> = Vec::new();
        let mut push = |v: VertexId| {
            if out.last() != Some(&v) {
                out.push(v);
            }
        };
        match &self.locus {
            Locus::Point(p) => {
                if let Some(v) = p.vertex() {
                    push(v);
                }
            }
            Locus::Path(segs) => {
                for s in segs {
                    for c in [s.start, s.end] {
                        if c.is_finite() {
                            if let TreePoint::Vertex(v) = self.point_at_coord(tree, c) {
                                push(v);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Time at which the geodesic is at the vertex `v`, if it passes there.
    pub fn time_at_vertex(&self, tree: &MetricTree, v: VertexId) -> Option<f64> {
        match &self.locus {
            Locus::Point(p) => (p.vertex() == Some(v)).then_some(self.interval.start),
            Locus::Path(segs) => segs.iter().find_map(|s| {
                [s.start, s.end]
                    .into_iter()
                    .filter(|c| c.is_finite())
                    .find(|&c| self.point_at_coord(tree, c) == TreePoint::Vertex(v))
                    .map(|c| c / self.speed)
            }),
        }
    }

    /// Time after which the geodesic stays inside the infinite edge it escapes
    /// along; `None` if it does not escape to infinity.
    pub fn exit_time(&self) -> Option<f64> {
        if self.is_constant() {
            return Some(self.interval.start);
        }
        self.forward_end()?;
        let last = self.segments().last()?;
        Some(if last.start.is_finite() {
            last.start / self.speed
        } else {
            f64::NEG_INFINITY
        })
    }

    /// Maximal geodesics are complete, or end at leaves on every finite side.
    pub fn is_maximal(&self, tree: &MetricTree) -> bool {
        let segs = self.segments();
        if segs.is_empty() {
            return false;
        }
        let (lo, hi) = self.coord_range();
        [lo, hi].into_iter().all(|c| {
            !c.is_finite()
                || matches!(self.point_at_coord(tree, c), TreePoint::Vertex(v) if tree.valency(v) == 1)
        })
    }

    /// Whether `p` lies on the locus.
    pub fn contains_point(&self, tree: &MetricTree, p: TreePoint) -> bool {
        match &self.locus {
            Locus::Point(q) => q.approx_eq(&p),
            Locus::Path(_) => self
                .project_coord(tree, p)
                .map(|(_, _, d)| d <= EPS)
                .unwrap_or(false),
        }
    }

    /// Closest locus point to `y`, with its path coordinate and distance.
    pub(crate) fn project_coord(
        &self,
        tree: &MetricTree,
        y: TreePoint,
    ) -> Result<(f64, TreePoint, f64), TreeError> {
        let segs = match &self.locus {
            Locus::Point(_) => return Err(TreeError::ConstantGeodesic),
            Locus::Path(s) => s,
        };
        let mut candidates = Vec::with_capacity(2 * segs.len() + 1);
        for s in segs {
            candidates.extend([s.start, s.end].into_iter().filter(|c| c.is_finite()));
            if let TreePoint::OnEdge { edge, offset } = y {
                if edge == s.edge {
                    let c = s.coord_of(offset);
                    if c >= s.start && c <= s.end {
                        candidates.push(c);
                    }
                }
            }
        }
        let mut best: Option<(f64, TreePoint, f64)> = None;
        for c in candidates {
            let p = self.point_at_coord(tree, c);
            let d = tree.distance(y, p);
            if best.is_none_or(|(_, _, bd)| d < bd) {
                best = Some((c, p, d));
            }
        }
        Ok(best.expect("a non-constant locus has a finite coordinate"))
    }

    /// Restriction to a sub-interval.
    pub fn restrict(&self, tree: &MetricTree, interval: Interval) -> Result<Self, TreeError> {
        if !(interval.start <= interval.end)
            || interval.start < self.interval.start - EPS
            || interval.end > self.interval.end + EPS
        {
            return Err(TreeError::InvalidInterval(interval.start, interval.end));
        }
        let locus = match &self.locus {
            Locus::Point(p) => Locus::Point(*p),
            Locus::Path(segs) => {
                let (lo, hi) = (self.speed * interval.start, self.speed * interval.end);
                if interval.start == interval.end {
                    Locus::Point(self.point_at_coord(tree, lo))
                } else {
                    let clipped: Vec<Segment> = segs
                        .iter()
                        .filter(|s| s.end > lo && s.start < hi)
                        .map(|s| Segment {
                            start: s.start.max(lo),
                            end: s.end.min(hi),
                            ..*s
                        })
                        .collect();
                    Locus::Path(clipped)
                }
            }
        };
        Ok(Self {
            speed: self.speed,
            interval,
            locus,
        })
    }

    /// The same motion started `dt` time units later.
    pub fn delayed(&self, dt: f64) -> Self {
        let locus = match &self.locus {
            Locus::Point(p) => Locus::Point(*p),
            Locus::Path(segs) => {
                Locus::Path(segs.iter().map(|s| s.shifted(self.speed * dt)).collect())
            }
        };
        Self {
            speed: self.speed,
            interval: Interval::new(self.interval.start + dt, self.interval.end + dt),
            locus,
        }
    }

    /// The time-reversed geodesic `t -> γ(-t)`.
    pub fn reversed(&self) -> Self {
        let interval = Interval::new(-self.interval.end, -self.interval.start);
        let locus = match &self.locus {
            Locus::Point(p) => Locus::Point(*p),
            Locus::Path(segs) => Locus::Path(
                segs.iter()
                    .rev()
                    .map(|s| Segment {
                        edge: s.edge,
                        forward: !s.forward,
                        start: -s.end,
                        end: -s.start,
                        tail_coord: -s.tail_coord,
                    })
                    .collect(),
            ),
        };
        Self {
            speed: self.speed,
            interval,
            locus,
        }
    }

    /// Same locus, speed and parametrization up to [`EPS`].
    pub fn approx_eq(&self, other: &TreeGeodesic) -> bool {
        if !close(self.speed, other.speed) || !self.interval.same_as(&other.interval) {
            return false;
        }
        match (&self.locus, &other.locus) {
            (Locus::Point(p), Locus::Point(q)) => p.approx_eq(q),
            (Locus::Path(a), Locus::Path(b)) => {
                a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.approx_eq(y))
            }
            _ => false,
        }
    }
}

impl MetricTree {
    fn hop_to_vertex(&self, edge: EdgeId, from: f64, v: VertexId) -> Hop {
        let e = self.edge(edge);
        let to = if v == e.tail { 0.0 } else { e.length };
        Hop {
            edge,
            forward: to > from,
            from,
            to,
        }
    }

    fn vertex_hops(&self, u: VertexId, v: VertexId) -> Vec<Hop> {
        let (vs, es) = self.vertex_path(u, v);
        es.iter()
            .zip(vs.windows(2))
            .map(|(&e, w)| {
                let forward = self.edge(e).tail == w[0];
                let len = self.edge(e).length;
                let (from, to) = if forward { (0.0, len) } else { (len, 0.0) };
                Hop {
                    edge: e,
                    forward,
                    from,
                    to,
                }
            })
            .collect()
    }

    fn point_hops(&self, p: TreePoint, q: TreePoint) -> Vec<Hop> {
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
                return vec![Hop {
                    edge: e1,
                    forward: b > a,
                    from: a,
                    to: b,
                }];
            }
        }
        let mut best = (f64::INFINITY, VertexId(0), VertexId(0));
        for (u, du) in self.anchors(p) {
            for (v, dv) in self.anchors(q) {
                let d = du + self.vertex_distance(u, v) + dv;
                if d < best.0 {
                    best = (d, u, v);
                }
            }
        }
        let (_, u, v) = best;
        let mut hops = Vec::new();
        if let TreePoint::OnEdge { edge, offset } = p {
            hops.push(self.hop_to_vertex(edge, offset, u));
        }
        hops.extend(self.vertex_hops(u, v));
        if let TreePoint::OnEdge { edge, offset } = q {
            let back = self.hop_to_vertex(edge, offset, v);
            hops.push(Hop {
                edge,
                forward: !back.forward,
                from: back.to,
                to: back.from,
            });
        }
        hops
    }

    fn hops_to_end(&self, p: TreePoint, end: TreeEnd) -> Vec<Hop> {
        let r = end.edge();
        let tail = self.edge(r).tail;
        let ray = |from: f64| Hop {
            edge: r,
            forward: true,
            from,
            to: f64::INFINITY,
        };
        match p {
            TreePoint::OnEdge { edge, offset } if edge == r => vec![ray(offset)],
            _ => {
                let mut hops = self.point_hops(p, TreePoint::Vertex(tail));
                hops.push(ray(0.0));
                hops
            }
        }
    }

    /// Lays hops out in path coordinates; coordinate 0 is the first finite position.
    fn layout(&self, hops: &[Hop]) -> Vec<Segment> {
        let mut segs = Vec::with_capacity(hops.len());
        let mut c = 0.0;
        for h in hops {
            if h.from.is_infinite() {
                segs.push(Segment {
                    edge: h.edge,
                    forward: h.forward,
                    start: f64::NEG_INFINITY,
                    end: c,
                    tail_coord: c + h.to,
                });
                continue;
            }
            let len = (h.to - h.from).abs();
            if len <= 0.0 {
                continue;
            }
            let tail_coord = if h.forward { c - h.from } else { c + h.from };
            segs.push(Segment {
                edge: h.edge,
                forward: h.forward,
                start: c,
                end: c + len,
                tail_coord,
            });
            c += len;
        }
        segs
    }

    /// The geodesic with `γ(t0) = p` and `γ(t1) = q`.
    pub fn geodesic_segment(
        &self,
        p: TreePoint,
        q: TreePoint,
        t0: f64,
        t1: f64,
    ) -> Result<TreeGeodesic, TreeError> {
        if !(t0 < t1) || !t0.is_finite() || !t1.is_finite() {
            return Err(TreeError::InvalidInterval(t0, t1));
        }
        let interval = Interval::segment(t0, t1);
        if p.approx_eq(&q) {
            return Ok(TreeGeodesic::constant(p, interval));
        }
        let speed = self.distance(p, q) / (t1 - t0);
        let segs = self
            .layout(&self.point_hops(p, q))
            .into_iter()
            .map(|s| s.shifted(speed * t0))
            .collect();
        Ok(TreeGeodesic {
            speed,
            interval,
            locus: Locus::Path(segs),
        })
    }

    /// The ray from `p` towards the end `xi` with the given speed, on `[0, inf)`.
    pub fn ray_to_end(&self, p: TreePoint, xi: TreeEnd, speed: f64) -> TreeGeodesic {
        if speed <= 0.0 {
            return TreeGeodesic::constant(p, Interval::ray());
        }
        TreeGeodesic {
            speed,
            interval: Interval::ray(),
            locus: Locus::Path(self.layout(&self.hops_to_end(p, xi))),
        }
    }

    /// Unit-speed complete geodesic from `xi` (at `-inf`) to `zeta` (at `+inf`),
    /// parametrized so that time 0 is the locus point closest to the basepoint.
    pub fn geodesic_between_ends(
        &self,
        xi: TreeEnd,
        zeta: TreeEnd,
    ) -> Result<TreeGeodesic, TreeError> {
        if xi == zeta {
            return Err(TreeError::EqualEnds);
        }
        let r = xi.edge();
        let mut hops = vec![Hop {
            edge: r,
            forward: false,
            from: f64::INFINITY,
            to: 0.0,
        }];
        hops.extend(self.hops_to_end(TreePoint::Vertex(self.edge(r).tail), zeta));
        let mut g = TreeGeodesic {
            speed: 1.0,
            interval: Interval::complete(),
            locus: Locus::Path(self.layout(&hops)),
        };
        let (c, _, _) = g.project_coord(self, self.basepoint())?;
        if let Locus::Path(segs) = &mut g.locus {
            for s in segs.iter_mut() {
                *s = s.shifted(-c);
            }
        }
        Ok(g)
    }

    /// Distance from the basepoint to the geodesic joining two ends; infinite
    /// when the ends coincide.
    pub fn gromov_product(&self, xi: TreeEnd, zeta: TreeEnd) -> f64 {
        match self.geodesic_between_ends(xi, zeta) {
            Err(_) => f64::INFINITY,
            Ok(g) => {
                let anchor = g.point_at_coord(self, 0.0);
                self.distance(self.basepoint(), anchor)
            }
        }
    }

    /// The locus point closest to `y`.
    pub fn project_to_geodesic(
        &self,
        y: TreePoint,
        gamma: &TreeGeodesic,
    ) -> Result<TreePoint, TreeError> {
        gamma.project_coord(self, y).map(|(_, p, _)| p)
    }

    /// Walks away from `v` without backtracking, always taking the lowest
    /// unused edge id, until an infinite edge is reached. `came_from` is the
    /// edge used to arrive at `v`, if any.
    fn escape_route(&self, v: VertexId, came_from: Option<EdgeId>) -> Option<Vec<Hop>> {
        let mut hops = Vec::new();
        let mut at = v;
        let mut prev = came_from;
        loop {
            let next = self
                .incident(at)
                .iter()
                .copied()
                .find(|&e| Some(e) != prev)?;
            let e = self.edge(next);
            match e.other(at) {
                None => {
                    hops.push(Hop {
                        edge: next,
                        forward: true,
                        from: 0.0,
                        to: f64::INFINITY,
                    });
                    return Some(hops);
                }
                Some(w) => {
                    hops.extend(self.vertex_hops(at, w));
                    prev = Some(next);
                    at = w;
                }
            }
        }
    }

    /// The end reached from `p` by the lowest-edge-id walk. Points inside a
    /// finite edge move towards its head first. `None` if the walk hits a leaf.
    pub fn escape_end(&self, p: TreePoint) -> Option<TreeEnd> {
        let route = match p {
            TreePoint::Vertex(v) => self.escape_route(v, None)?,
            TreePoint::OnEdge { edge, .. } => match self.edge(edge).head {
                None => return Some(TreeEnd(edge)),
                Some(h) => self.escape_route(h, Some(edge))?,
            },
        };
        route.last().map(|h| TreeEnd(h.edge))
    }

    /// Extends a non-constant geodesic beyond its last point along the lowest
    /// edge ids, producing a ray on `[interval.start, inf)`. Returns `None`
    /// when the walk runs into a leaf.
    pub fn extend_forward(&self, gamma: &TreeGeodesic) -> Option<TreeGeodesic> {
        let segs = gamma.segments();
        let last = *segs.last()?;
        if last.end == f64::INFINITY {
            return Some(gamma.clone());
        }
        let len = self.edge(last.edge).length;
        let off = last.offset_at(last.end).clamp(0.0, len);
        let mut extra = Vec::new();
        let (vertex, came_from) = match self.canonical(last.edge, off) {
            TreePoint::Vertex(v) => (v, Some(last.edge)),
            TreePoint::OnEdge { .. } => {
                let e = self.edge(last.edge);
                let target = if last.forward { e.head } else { Some(e.tail) };
                match target {
                    None => {
                        extra.push(Hop {
                            edge: last.edge,
                            forward: true,
                            from: off,
                            to: f64::INFINITY,
                        });
                        return Some(self.append(gamma, &extra));
                    }
                    Some(w) => {
                        extra.push(self.hop_to_vertex(last.edge, off, w));
                        (w, Some(last.edge))
                    }
                }
            }
        };
        extra.extend(self.escape_route(vertex, came_from)?);
        Some(self.append(gamma, &extra))
    }

    fn append(&self, gamma: &TreeGeodesic, hops: &[Hop]) -> TreeGeodesic {
        let mut segs = gamma.segments().to_vec();
        let base = segs.last().map_or(0.0, |s| s.end);
        for s in self.layout(hops) {
            let s = s.shifted(base);
            match segs.last_mut() {
                Some(prev) if prev.edge == s.edge && prev.forward == s.forward => {
                    prev.end = s.end;
                }
                _ => segs.push(s),
            }
        }
        TreeGeodesic {
            speed: gamma.speed,
            interval: Interval::new(gamma.interval.start, f64::INFINITY),
            locus: Locus::Path(segs),
        }
    }

    /// A complete unit-speed geodesic containing the whole of `edge`, continued
    /// on both sides along the lowest edge ids. Requires a leaf-free tree.
    pub fn complete_geodesic_through(&self, edge: EdgeId) -> Option<TreeGeodesic> {
        let e = self.edge(edge);
        let mut hops = Vec::new();
        match e.head {
            Some(h) => {
                let back = self.escape_route(e.tail, Some(edge))?;
                for hop in back.iter().rev() {
                    hops.push(Hop {
                        edge: hop.edge,
                        forward: !hop.forward,
                        from: hop.to,
                        to: hop.from,
                    });
                }
                hops.push(Hop {
                    edge,
                    forward: true,
                    from: 0.0,
                    to: e.length,
                });
                hops.extend(self.escape_route(h, Some(edge))?);
            }
            None => {
                let back = self.escape_route(e.tail, Some(edge))?;
                for hop in back.iter().rev() {
                    hops.push(Hop {
                        edge: hop.edge,
                        forward: !hop.forward,
                        from: hop.to,
                        to: hop.from,
                    });
                }
                hops.push(Hop {
                    edge,
                    forward: true,
                    from: 0.0,
                    to: f64::INFINITY,
                });
            }
        }
        Some(TreeGeodesic {
            speed: 1.0,
            interval: Interval::complete(),
            locus: Locus::Path(self.layout(&hops)),
        })
    }

    /// A complete unit-speed geodesic through the flag `(x, {e, f})`: it enters
    /// `x` along `e` and leaves along `f`, continued along the lowest edge ids.
    pub fn complete_geodesic_through_flag(
        &self,
        x: VertexId,
        e: EdgeId,
        f: EdgeId,
    ) -> Result<Option<TreeGeodesic>, TreeError> {
        self.check_flag(x, e, f)?;
        let side = |edge: EdgeId| -> Option<Vec<Hop>> {
            let ed = self.edge(edge);
            match ed.other(x) {
                None => Some(vec![Hop {
                    edge,
                    forward: true,
                    from: 0.0,
                    to: f64::INFINITY,
                }]),
                Some(w) => {
                    let mut hops = self.vertex_hops(x, w);
                    hops.extend(self.escape_route(w, Some(edge))?);
                    Some(hops)
                }
            }
        };
        let (Some(back), Some(front)) = (side(e), side(f)) else {
            return Ok(None);
        };
        let mut hops: Vec<Hop> = back
            .iter()
            .rev()
            .map(|h| Hop {
                edge: h.edge,
                forward: !h.forward,
                from: h.to,
                to: h.from,
            })
            .collect();
        hops.extend(front);
        Ok(Some(TreeGeodesic {
            speed: 1.0,
            interval: Interval::complete(),
            locus: Locus::Path(self.layout(&hops)),
        }))
    }
}
