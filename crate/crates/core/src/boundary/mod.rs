//! The boundary cone: asymptotic measures of Wasserstein rays and the
//! asymptotic formula `lim W(μ_t, σ_t) / t = W∞(μ∞, σ∞)`.

use thiserror::Error;

use crate::dynamics::{pushforward_at, DynamicalPlan, DynamicsError};
use crate::metric_tree::{
    EdgeId, Interval, IntervalKind, MetricTree, TreeEnd, TreeGeodesic, TreePoint, EPS,
};
use crate::transport::{simplex, wasserstein2, MASS_EPS};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundaryError {
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error("invalid cone measure: {0}")]
    InvalidCone(String),
    #[error("cone measure has ∫ v² dν = {0}, expected 1")]
    NonUnitMeasure(f64),
    #[error("plan is not parametrized on a ray [a, inf)")]
    NotRay,
    #[error("grid time {0} is not a positive time of both plans")]
    BadGridTime(f64),
}

/// A point `(ξ, s)` of the cone over the boundary; the apex has no end.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConePoint {
    pub end: Option<TreeEnd>,
    pub speed: f64,
}

impl ConePoint {
    pub fn apex() -> Self {
        Self {
            end: None,
            speed: 0.0,
        }
    }

    /// Speed 0 collapses to the apex whatever the end.
    pub fn new(end: TreeEnd, speed: f64) -> Self {
        if speed == 0.0 {
            Self::apex()
        } else {
            Self {
                end: Some(end),
                speed,
            }
        }
    }

    pub fn is_apex(&self) -> bool {
        self.end.is_none()
    }

    fn approx_eq(&self, other: &ConePoint) -> bool {
        self.end == other.end && (self.speed - other.speed).abs() <= EPS
    }
}

/// Finitely supported probability measure on the cone.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeMeasure {
    atoms: Vec<(ConePoint, f64)>,
}

impl ConeMeasure {
    pub fn new(atoms: Vec<(ConePoint, f64)>) -> Result<Self, BoundaryError> {
        for (p, m) in &atoms {
            if !(p.speed >= 0.0) || !p.speed.is_finite() {
                return Err(BoundaryError::InvalidCone(format!("speed {}", p.speed)));
            }
            if !(*m >= 0.0) || !m.is_finite() {
                return Err(BoundaryError::InvalidCone(format!("mass {m}")));
            }
        }
        let out = Self::merged(atoms);
        if out.atoms.is_empty() {
            return Err(BoundaryError::InvalidCone("no atoms".into()));
        }
        let total: f64 = out.atoms.iter().map(|(_, m)| m).sum();
        if (total - 1.0).abs() > MASS_EPS {
            return Err(BoundaryError::InvalidCone(format!("masses sum to {total}")));
        }
        Ok(out)
    }

    fn merged(atoms: Vec<(ConePoint, f64)>) -> Self {
        let mut out: Vec<(ConePoint, f64)> = Vec::new();
        for (p, m) in atoms {
            let p = if p.speed == 0.0 { ConePoint::apex() } else { p };
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

    /// Unit-speed measure on ends.
    pub fn on_ends(atoms: &[(TreeEnd, f64)]) -> Result<Self, BoundaryError> {
        Self::new(
            atoms
                .iter()
                .map(|&(e, m)| (ConePoint::new(e, 1.0), m))
                .collect(),
        )
    }

    pub fn atoms(&self) -> &[(ConePoint, f64)] {
        &self.atoms
    }

    /// `∫ v² dν`
    pub fn second_moment(&self) -> f64 {
        self.atoms.iter().map(|(p, m)| m * p.speed * p.speed).sum()
    }

    pub fn is_unit(&self) -> bool {
        (self.second_moment() - 1.0).abs() <= 1e-9
    }

    /// Same atoms up to order, masses within `tol`.
    pub fn approx_eq(&self, other: &ConeMeasure, tol: f64) -> bool {
        let mass = |c: &ConeMeasure, p: &ConePoint| -> f64 {
            c.atoms
                .iter()
                .filter(|(q, _)| q.approx_eq(p))
                .map(|(_, m)| m)
                .sum()
        };
        self.atoms
            .iter()
            .all(|(p, m)| (mass(other, p) - m).abs() <= tol)
            && other
                .atoms
                .iter()
                .all(|(p, m)| (mass(self, p) - m).abs() <= tol)
    }
}

/// The cone metric: `|s - t|` on a common ray of the cone, `s + t` otherwise.
pub fn d_infinity(a: ConePoint, b: ConePoint) -> f64 {
    if a.is_apex() || b.is_apex() || a.end == b.end {
        (a.speed - b.speed).abs()
    } else {
        a.speed + b.speed
    }
}

/// Optimal transport between cone measures for the cost `d∞²`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConeTransport {
    pub distance: f64,
    /// `(atom of ν1, atom of ν2, mass)`
    pub plan: Vec<(usize, usize, f64)>,
    pub certificate_gap: f64,
}

pub fn w_infinity(nu1: &ConeMeasure, nu2: &ConeMeasure) -> ConeTransport {
    let cost: Vec<Vec<f64>> = nu1
        .atoms
        .iter()
        .map(|(a, _)| {
            nu2.atoms
                .iter()
                .map(|(b, _)| d_infinity(*a, *b).powi(2))
                .collect()
        })
        .collect();
    let supply: Vec<f64> = nu1.atoms.iter().map(|(_, m)| *m).collect();
    let demand: Vec<f64> = nu2.atoms.iter().map(|(_, m)| *m).collect();
    let sol = simplex::solve(&supply, &demand, &cost);
    ConeTransport {
        distance: sol.cost.max(0.0).sqrt(),
        certificate_gap: sol.certificate_gap(&cost),
        plan: sol.flows,
    }
}

fn check_ray(plan: &DynamicalPlan) -> Result<(), BoundaryError> {
    let iv = plan.interval();
    match iv.kind() {
        IntervalKind::Ray => Ok(()),
        _ => Err(BoundaryError::NotRay),
    }
}

/// `(e∞)_# μ`: the end and speed of every support ray.
pub fn asymptotic_measure(plan: &DynamicalPlan) -> Result<ConeMeasure, BoundaryError> {
    check_ray(plan)?;
    let atoms = plan
        .atoms()
        .iter()
        .map(|(g, m)| {
            if g.is_constant() {
                return Ok((ConePoint::apex(), *m));
            }
            let end = g.forward_end().ok_or(BoundaryError::NotRay)?;
            Ok((ConePoint::new(end, g.speed()), *m))
        })
        .collect::<Result<Vec<_>, BoundaryError>>()?;
    Ok(ConeMeasure::merged(atoms))
}

/// The ray issued from `δ_x` whose asymptotic measure is `ν`: one ray towards
/// each end with the prescribed speed. With `unit` set, `ν` must satisfy
/// `∫ v² dν = 1`.
pub fn ray_from_asymptotic_measure(
    tree: &MetricTree,
    x: TreePoint,
    nu: &ConeMeasure,
    unit: bool,
) -> Result<DynamicalPlan, BoundaryError> {
    if unit && !nu.is_unit() {
        return Err(BoundaryError::NonUnitMeasure(nu.second_moment()));
    }
    let atoms = nu
        .atoms
        .iter()
        .map(|(p, m)| {
            let g = match p.end {
                None => TreeGeodesic::constant(x, Interval::ray()),
                Some(end) => tree.ray_to_end(x, end, p.speed),
            };
            (g, *m)
        })
        .collect();
    Ok(DynamicalPlan::new(atoms, Interval::ray())?)
}

/// Grid used when none is given.
pub const DEFAULT_GRID: [f64; 6] = [1.0, 10.0, 1e2, 1e3, 1e4, 1e6];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AsymptoticRow {
    pub t: f64,
    pub ratio: f64,
    pub target: f64,
    pub error: f64,
}

/// Long-time behaviour of `W(μ_t, σ_t)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Growth {
    /// Bounded distance: the rays are asymptotic.
    Asymptotic,
    /// Distance growing with the given slope.
    Linear(f64),
}

/// Output of [`asymptotic_formula_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct AsymptoticReport {
    pub rows: Vec<AsymptoticRow>,
    /// `W∞(μ∞, σ∞)`
    pub target: f64,
    /// Time after which every atom runs inside its final infinite edge and no
    /// two atoms on a common edge cross any more.
    pub exit_time: f64,
    /// Exact limit of the ratio computed from the per-pair slopes past
    /// `exit_time`.
    pub certified_limit: f64,
    /// Largest `|α|` in the affine pair distances `α + βt` past `exit_time`;
    /// bounds `t · |ratio − certified_limit|` there.
    pub intercept_bound: f64,
    pub growth: Growth,
    /// The ratio is nondecreasing along the grid.
    pub monotone: bool,
}

impl AsymptoticReport {
    /// `|ratio − target|` at the largest grid time.
    pub fn final_error(&self) -> f64 {
        self.rows.last().map_or(0.0, |r| r.error)
    }
}

/// Position of an atom on its final infinite edge: `offset(t) = a + s·t`.
#[derive(Clone, Copy)]
struct Tail {
    edge: Option<EdgeId>,
    a: f64,
    s: f64,
}

fn tail_of(tree: &MetricTree, g: &TreeGeodesic) -> Result<(Tail, f64), BoundaryError> {
    let start = g.interval().start;
    if g.is_constant() {
        let p = g.evaluate(tree, start).map_err(DynamicsError::from)?;
        let edge = match p {
            TreePoint::OnEdge { edge, offset } if tree.edge(edge).is_infinite() => {
                return Ok((
                    Tail {
                        edge: Some(edge),
                        a: offset,
                        s: 0.0,
                    },
                    start,
                ));
            }
            _ => None,
        };
        return Ok((
            Tail {
                edge,
                a: 0.0,
                s: 0.0,
            },
            start,
        ));
    }
    let end = g.forward_end().ok_or(BoundaryError::NotRay)?;
    let t0 = g.exit_time().unwrap_or(start).max(start);
    let offset = match g.evaluate(tree, t0).map_err(DynamicsError::from)? {
        TreePoint::OnEdge { offset, .. } => offset,
        TreePoint::Vertex(_) => 0.0,
    };
    Ok((
        Tail {
            edge: Some(end.edge()),
            a: offset - g.speed() * t0,
            s: g.speed(),
        },
        t0,
    ))
}

/// Tabulates `W(μ_t, σ_t) / t` over `grid` against `W∞(μ∞, σ∞)`, and certifies
/// the limit exactly: past the exit time every pair distance is affine in `t`,
/// so the limit is the square root of an optimal transport cost between slopes.
pub fn asymptotic_formula_check(
    tree: &MetricTree,
    mu: &DynamicalPlan,
    sigma: &DynamicalPlan,
    grid: &[f64],
) -> Result<AsymptoticReport, BoundaryError> {
    check_ray(mu)?;
    check_ray(sigma)?;
    let target = w_infinity(&asymptotic_measure(mu)?, &asymptotic_measure(sigma)?).distance;

    let start = mu.interval().start.max(sigma.interval().start);
    let mut rows = Vec::with_capacity(grid.len());
    for &t in grid {
        if !(t > 0.0) || t < start || !t.is_finite() {
            return Err(BoundaryError::BadGridTime(t));
        }
        let w = wasserstein2(
            tree,
            &pushforward_at(tree, mu, t)?,
            &pushforward_at(tree, sigma, t)?,
        )
        .distance;
        let ratio = w / t;
        rows.push(AsymptoticRow {
            t,
            ratio,
            target,
            error: (ratio - target).abs(),
        });
    }
    let monotone = rows
        .windows(2)
        .all(|w| w[1].ratio >= w[0].ratio - 1e-12 * (1.0 + w[0].ratio));

    // exit time, then same-edge crossings
    let tails = |plan: &DynamicalPlan| -> Result<Vec<(Tail, f64)>, BoundaryError> {
        plan.atoms().iter().map(|(g, _)| tail_of(tree, g)).collect()
    };
    let (tm, ts) = (tails(mu)?, tails(sigma)?);
    let mut exit = start;
    for (_, t0) in tm.iter().chain(&ts) {
        exit = exit.max(*t0);
    }
    let all: Vec<Tail> = tm.iter().chain(&ts).map(|(t, _)| *t).collect();
    let mut crossing = exit;
    for (i, p) in all.iter().enumerate() {
        for q in &all[i + 1..] {
            if p.edge.is_some() && p.edge == q.edge && (p.s - q.s).abs() > 0.0 {
                crossing = crossing.max((q.a - p.a) / (p.s - q.s));
            }
        }
    }
    let exit_time = crossing;

    // affine pair distances past the exit time
    let (t1, t2) = (exit_time.max(0.0) + 1.0, exit_time.max(0.0) + 2.0);
    let at = |plan: &DynamicalPlan, t: f64| -> Result<Vec<TreePoint>, BoundaryError> {
        plan.atoms()
            .iter()
            .map(|(g, _)| {
                g.evaluate(tree, t)
                    .map_err(|e| DynamicsError::from(e).into())
            })
            .collect()
    };
    let (m1, m2, s1, s2) = (at(mu, t1)?, at(mu, t2)?, at(sigma, t1)?, at(sigma, t2)?);
    let mut slope_cost = vec![vec![0.0; s1.len()]; m1.len()];
    let mut intercept_bound: f64 = 0.0;
    for i in 0..m1.len() {
        for j in 0..s1.len() {
            let d1 = tree.distance(m1[i], s1[j]);
            let d2 = tree.distance(m2[i], s2[j]);
            let beta = (d2 - d1) / (t2 - t1);
            intercept_bound = intercept_bound.max((d1 - beta * t1).abs());
            slope_cost[i][j] = beta * beta;
        }
    }
    let supply: Vec<f64> = mu.atoms().iter().map(|(_, m)| *m).collect();
    let demand: Vec<f64> = sigma.atoms().iter().map(|(_, m)| *m).collect();
    let certified_limit = simplex::solve(&supply, &demand, &slope_cost)
        .cost
        .max(0.0)
        .sqrt();
    let growth = if certified_limit <= 1e-12 {
        Growth::Asymptotic
    } else {
        Growth::Linear(certified_limit)
    };

    Ok(AsymptoticReport {
        rows,
        target,
        exit_time,
        certified_limit,
        intercept_bound,
        growth,
        monotone,
    })
}
