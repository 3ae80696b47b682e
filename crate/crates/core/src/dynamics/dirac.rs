use crate::metric_tree::{
    Interval, IntervalKind, Locus, MetricTree, TreeError, TreeGeodesic, TreePoint,
};
use crate::transport::DiscreteMeasure;

use super::{pushforward_at, DynamicalPlan, DynamicsError};

/// Tolerance on the midpoint identity.
const MIDPOINT_TOL: f64 = 1e-9;

/// The point halfway between `a` and `b`.
pub fn midpoint(tree: &MetricTree, a: TreePoint, b: TreePoint) -> TreePoint {
    match tree.geodesic_segment(a, b, 0.0, 1.0) {
        Ok(g) => g.evaluate(tree, 0.5).unwrap_or(a),
        Err(_) => a,
    }
}

/// Extends every atom of a plan issued from a Dirac mass into a ray, so that
/// the time-`t` marginals form a Wasserstein ray. Constant atoms stay put;
/// continuation follows the lowest edge ids.
pub fn extend_from_dirac(
    tree: &MetricTree,
    plan: &DynamicalPlan,
) -> Result<DynamicalPlan, DynamicsError> {
    if !tree.is_leaf_free() {
        return Err(DynamicsError::LeafyTree);
    }
    let iv = plan.interval();
    if iv.kind() != IntervalKind::Segment {
        return Err(DynamicsError::WrongInterval {
            expected: "[a, b]",
            start: iv.start,
            end: iv.end,
        });
    }
    let start = iv.start;
    let x = pushforward_at(tree, plan, start)?
        .is_dirac()
        .ok_or(DynamicsError::NotDiracBased)?;
    let interval = Interval::new(start, f64::INFINITY);
    let atoms = plan
        .atoms()
        .iter()
        .map(|(g, m)| {
            let ray = match g.locus() {
                Locus::Point(p) if g.speed() > 0.0 => {
                    let end = tree.escape_end(*p).ok_or(DynamicsError::LeafyTree)?;
                    tree.ray_to_end(x, end, g.speed()).delayed(start)
                }
                Locus::Point(p) => TreeGeodesic::constant(*p, interval),
                Locus::Path(_) => tree.extend_forward(g).ok_or(DynamicsError::LeafyTree)?,
            };
            Ok((ray, *m))
        })
        .collect::<Result<Vec<_>, DynamicsError>>()?;
    DynamicalPlan::new(atoms, interval)
}

/// The interpolation `x^t · μ`: every atom moved a fraction `t` of the way
/// from `x` towards it.
pub fn dirac_interpolation(
    tree: &MetricTree,
    x: TreePoint,
    mu: &DiscreteMeasure,
    t: f64,
) -> Result<DiscreteMeasure, DynamicsError> {
    if !(0.0..=1.0).contains(&t) {
        return Err(TreeError::OutOfInterval { t }.into());
    }
    let atoms = mu
        .atoms()
        .iter()
        .map(|&(y, m)| {
            if t == 0.0 || y.approx_eq(&x) {
                return Ok((x, m));
            }
            Ok((tree.geodesic_segment(x, y, 0.0, 1.0)?.evaluate(tree, t)?, m))
        })
        .collect::<Result<Vec<_>, TreeError>>()?;
    Ok(DiscreteMeasure::merged(atoms))
}

/// One evaluation of the midpoint identity
/// `W(x^{1/2} μ, δ_{(x+g)/2}) = W(μ, δ_g) / 2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MidpointSample {
    pub x: TreePoint,
    pub g: TreePoint,
    pub lhs: f64,
    pub rhs: f64,
}

impl MidpointSample {
    pub fn gap(&self) -> f64 {
        self.rhs - self.lhs
    }
}

/// Result of [`supported_on_geodesic_test`].
#[derive(Clone, Debug, PartialEq)]
pub struct SupportTest {
    /// Every atom lies on the geodesic.
    pub supported: bool,
    /// The sample with the largest gap.
    pub worst: Option<MidpointSample>,
    pub samples: usize,
}

impl SupportTest {
    /// A sample breaking the identity, if any.
    pub fn witness(&self) -> Option<MidpointSample> {
        self.worst.filter(|s| s.gap() > MIDPOINT_TOL)
    }

    /// Largest deviation from the identity over the samples.
    pub fn max_gap(&self) -> f64 {
        self.worst.map_or(0.0, |s| s.gap().abs())
    }
}

/// Decides whether `μ` is supported on the maximal geodesic `γ` and checks the
/// midpoint identity for pairs of points of `γ` taken among its vertices, the
/// projections of the atoms and one unit beyond them on unbounded sides.
pub fn supported_on_geodesic_test(
    tree: &MetricTree,
    mu: &DiscreteMeasure,
    gamma: &TreeGeodesic,
) -> Result<SupportTest, DynamicsError> {
    if gamma.is_constant() || !gamma.is_maximal(tree) {
        return Err(DynamicsError::NotMaximal);
    }
    let supported = mu
        .atoms()
        .iter()
        .all(|&(p, _)| gamma.contains_point(tree, p));

    let mut coords: Vec<f64> = Vec::new();
    for s in gamma.segments() {
        coords.extend([s.start, s.end].into_iter().filter(|c| c.is_finite()));
    }
    for &(p, _) in mu.atoms() {
        coords.push(gamma.project_coord(tree, p)?.0);
    }
    let (lo, hi) = gamma.coord_range();
    let min = coords.iter().copied().fold(f64::INFINITY, f64::min);
    let max = coords.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if lo == f64::NEG_INFINITY {
        coords.push(min - 1.0);
    }
    if hi == f64::INFINITY {
        coords.push(max + 1.0);
    }
    coords.sort_by(f64::total_cmp);
    coords.dedup_by(|a, b| (*a - *b).abs() <= crate::metric_tree::EPS);
    let points: Vec<TreePoint> = coords
        .iter()
        .map(|&c| gamma.point_at_coord(tree, c))
        .collect();

    let w_to_dirac = |nu: &DiscreteMeasure, z: TreePoint| nu.second_moment(tree, z).sqrt();
    let mut worst: Option<MidpointSample> = None;
    let mut samples = 0;
    for &x in &points {
        let half = dirac_interpolation(tree, x, mu, 0.5)?;
        for &g in &points {
            if x == g {
                continue;
            }
            let sample = MidpointSample {
                x,
                g,
                lhs: w_to_dirac(&half, midpoint(tree, x, g)),
                rhs: 0.5 * w_to_dirac(mu, g),
            };
            samples += 1;
            if worst.is_none_or(|w| sample.gap().abs() > w.gap().abs()) {
                worst = Some(sample);
            }
        }
    }
    Ok(SupportTest {
        supported,
        worst,
        samples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{is_optimal_dynamical, pushforward_at};
    use crate::metric_tree::fixtures::*;
    use crate::transport::wasserstein2;

    fn v(tree: &MetricTree, name: &str) -> TreePoint {
        TreePoint::Vertex(tree.vertex_id(name).unwrap())
    }

    #[test]
    fn dirac_interpolation_on_tripod() {
        let t = tripod();
        let mu = DiscreteMeasure::new(vec![(v(&t, "b"), 0.5), (v(&t, "c"), 0.5)]).unwrap();
        let half = dirac_interpolation(&t, v(&t, "a"), &mu, 0.5).unwrap();
        assert_eq!(half.atoms(), &[(v(&t, "o"), 1.0)]);
        let zero = dirac_interpolation(&t, v(&t, "a"), &mu, 0.0).unwrap();
        assert_eq!(zero.is_dirac(), Some(v(&t, "a")));
        let one = dirac_interpolation(&t, v(&t, "a"), &mu, 1.0).unwrap();
        assert!(one.approx_eq(&mu, 1e-12));
        assert!(dirac_interpolation(&t, v(&t, "a"), &mu, 1.5).is_err());
    }

    #[test]
    fn extension_from_dirac_is_a_ray() {
        let s = tripod_completed();
        let x = v(&s, "o");
        let mu = DiscreteMeasure::dirac(x);
        let nu =
            DiscreteMeasure::new(vec![(v(&s, "a"), 0.5), (v(&s, "b"), 0.25), (x, 0.25)]).unwrap();
        let plan = crate::dynamics::interpolate(&s, &mu, &nu).unwrap();
        let ray = extend_from_dirac(&s, &plan).unwrap();
        assert_eq!(ray.interval().kind(), IntervalKind::Ray);
        let speed = ray.speed();
        let m0 = pushforward_at(&s, &ray, 0.0).unwrap();
        for &t in &[0.5, 1.0, 3.0, 10.0] {
            let mt = pushforward_at(&s, &ray, t).unwrap();
            let w = wasserstein2(&s, &m0, &mt).distance;
            assert!((w - speed * t).abs() < 1e-9, "t={t}");
        }
        assert!(is_optimal_dynamical(&s, &ray).unwrap().passed());
    }

    #[test]
    fn degenerate_interval_extension() {
        let s = star(3);
        let o = v(&s, "o");
        let g = TreeGeodesic::from_parts(2.0, Interval::segment(0.0, 0.0), Locus::Point(o));
        let plan = DynamicalPlan::new(vec![(g, 1.0)], Interval::segment(0.0, 0.0)).unwrap();
        let ray = extend_from_dirac(&s, &plan).unwrap();
        let p = pushforward_at(&s, &ray, 1.5).unwrap();
        let r1 = s.point_on_edge(s.edge_id("r1").unwrap(), 3.0).unwrap();
        assert_eq!(p.is_dirac(), Some(r1));
    }

    #[test]
    fn extension_preconditions() {
        let t = tripod();
        let plan = crate::dynamics::interpolate(
            &t,
            &DiscreteMeasure::dirac(v(&t, "a")),
            &DiscreteMeasure::dirac(v(&t, "b")),
        )
        .unwrap();
        assert!(matches!(
            extend_from_dirac(&t, &plan),
            Err(DynamicsError::LeafyTree)
        ));

        let s = tripod_completed();
        let mu = DiscreteMeasure::new(vec![(v(&s, "a"), 0.5), (v(&s, "b"), 0.5)]).unwrap();
        let plan =
            crate::dynamics::interpolate(&s, &mu, &DiscreteMeasure::dirac(v(&s, "c"))).unwrap();
        assert!(matches!(
            extend_from_dirac(&s, &plan),
            Err(DynamicsError::NotDiracBased)
        ));
    }

    #[test]
    fn midpoint_identity_on_and_off_a_geodesic() {
        let s = star(3);
        let gamma = s
            .geodesic_between_ends(s.end("r1").unwrap(), s.end("r2").unwrap())
            .unwrap();
        let on = |e: &str, off: f64| s.point_on_edge(s.edge_id(e).unwrap(), off).unwrap();
        let mu = DiscreteMeasure::new(vec![(on("r1", 1.0), 0.5), (on("r2", 2.0), 0.5)]).unwrap();
        let res = supported_on_geodesic_test(&s, &mu, &gamma).unwrap();
        assert!(res.supported);
        assert!(res.witness().is_none());
        assert!(res.max_gap() < 1e-9);
        assert!(res.samples > 0);

        let off = DiscreteMeasure::dirac(on("r3", 1.0));
        let res = supported_on_geodesic_test(&s, &off, &gamma).unwrap();
        assert!(!res.supported);
        let w = res
            .witness()
            .expect("off-geodesic mass breaks the identity");
        assert!(w.gap() > 1e-9);
    }

    #[test]
    fn non_maximal_geodesic_is_refused() {
        let t = tripod();
        let g = t
            .geodesic_segment(v(&t, "a"), v(&t, "o"), 0.0, 1.0)
            .unwrap();
        let mu = DiscreteMeasure::dirac(v(&t, "a"));
        assert!(matches!(
            supported_on_geodesic_test(&t, &mu, &g),
            Err(DynamicsError::NotMaximal)
        ));
        let full = t
            .geodesic_segment(v(&t, "a"), v(&t, "b"), 0.0, 1.0)
            .unwrap();
        assert!(
            supported_on_geodesic_test(&t, &mu, &full)
                .unwrap()
                .supported
        );
    }
}
