use crate::boundary::{asymptotic_measure, BoundaryError, ConeMeasure};
use crate::dynamics::{antagonist_pairs, validate_complete_plan, DynamicalPlan, DynamicsError};
use crate::metric_tree::{Interval, MetricTree, TreeEnd, TreePoint};
use crate::transport::simplex;

use super::{
    flow_table, realizability_sum, require_antipodal, BoundaryMeasure, EndsError, FlowTable,
    Realizability, Verdict,
};

/// Solution of the optimal transport problem between `ν₋` and `ν₊` for the
/// cost `−D₀²`.
#[derive(Clone, Debug, PartialEq)]
pub struct D0Transport {
    pub value: f64,
    /// `(end of ν₋, end of ν₊, mass)`
    pub plan: Vec<(TreeEnd, TreeEnd, f64)>,
    pub certificate_gap: f64,
}

pub fn d0_transport(
    tree: &MetricTree,
    nu_minus: &BoundaryMeasure,
    nu_plus: &BoundaryMeasure,
) -> Result<D0Transport, EndsError> {
    require_antipodal(tree, nu_minus, nu_plus)?;
    let cost: Vec<Vec<f64>> = nu_minus
        .atoms()
        .iter()
        .map(|&(xi, _)| {
            nu_plus
                .atoms()
                .iter()
                .map(|&(zeta, _)| -tree.gromov_product(xi, zeta).powi(2))
                .collect()
        })
        .collect();
    let supply: Vec<f64> = nu_minus.atoms().iter().map(|(_, m)| *m).collect();
    let demand: Vec<f64> = nu_plus.atoms().iter().map(|(_, m)| *m).collect();
    let sol = simplex::solve(&supply, &demand, &cost);
    Ok(D0Transport {
        value: sol.cost,
        certificate_gap: sol.certificate_gap(&cost),
        plan: sol
            .flows
            .iter()
            .map(|&(i, j, m)| (nu_minus.atoms()[i].0, nu_plus.atoms()[j].0, m))
            .collect(),
    })
}

/// `∫ −D₀² dΠ` for a given coupling of ends.
pub fn d0_cost(tree: &MetricTree, plan: &[(TreeEnd, TreeEnd, f64)]) -> Result<f64, EndsError> {
    let mut total = 0.0;
    for &(xi, zeta, m) in plan {
        if m <= 0.0 {
            continue;
        }
        if xi == zeta {
            return Err(EndsError::DiagonalMass(tree.edge(xi.edge()).name.clone()));
        }
        total -= m * tree.gromov_product(xi, zeta).powi(2);
    }
    Ok(total)
}

/// Checks run on a constructed complete geodesic.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstructionCertificate {
    /// Every atom has unit speed.
    pub unit_speed: bool,
    pub antagonist_free: bool,
    /// Asymptotic measures at `−∞` and `+∞` equal `ν₋` and `ν₊`.
    pub ends_match: bool,
    /// `max |μ(xy) − max(φ(xy), 0)|` over oriented edges.
    pub edge_gap: f64,
    /// `max |μ(x) − φ(x)|` over vertices.
    pub vertex_gap: f64,
    /// `max |μ⁰(x) − φ⁰(x)|`; only defined for a vertex basepoint.
    pub specific_gap: Option<f64>,
    /// `∫ d(x, x₀)² dμ₀`
    pub second_moment: f64,
    /// `Σ φ⁰(x) d(x, x₀)²`
    pub flow_sum: f64,
    /// Optimal value of the `−D₀²` problem.
    pub d0_value: f64,
}

impl ConstructionCertificate {
    pub fn passed(&self, tol: f64) -> bool {
        self.unit_speed
            && self.antagonist_free
            && self.ends_match
            && self.edge_gap <= tol
            && self.vertex_gap <= tol
            && self
                .specific_gap
                .is_none_or(|g| g <= tol && (self.flow_sum - self.second_moment).abs() <= tol)
            && (self.second_moment + self.d0_value).abs() <= tol
    }
}

#[derive(Clone, Debug)]
pub struct ConstructedGeodesic {
    pub plan: DynamicalPlan,
    pub transport: D0Transport,
    pub flows: FlowTable,
    pub realizability: Realizability,
    pub certificate: ConstructionCertificate,
}

/// A complete unit-speed Wasserstein geodesic from `ν₋` to `ν₊`: the image of
/// a `−D₀²`-optimal coupling of ends under the map sending a pair of ends to
/// the geodesic joining them, nearest to the basepoint at time 0.
pub fn construct_geodesic(
    tree: &MetricTree,
    nu_minus: &BoundaryMeasure,
    nu_plus: &BoundaryMeasure,
) -> Result<ConstructedGeodesic, EndsError> {
    let flows = flow_table(tree, nu_minus, nu_plus)?;
    let realizability = realizability_sum(tree, &flows);
    if let Some(depth) = realizability.depth {
        if realizability.verdict != Verdict::Converges {
            return Err(EndsError::NotRealizable {
                verdict: realizability.verdict,
                depth,
            });
        }
    }
    let transport = d0_transport(tree, nu_minus, nu_plus)?;
    let atoms = transport
        .plan
        .iter()
        .map(|&(xi, zeta, m)| Ok((tree.geodesic_between_ends(xi, zeta)?, m)))
        .collect::<Result<Vec<_>, crate::metric_tree::TreeError>>()
        .map_err(DynamicsError::from)?;
    let plan = DynamicalPlan::new(atoms, Interval::complete())?;
    let certificate = certify(
        tree,
        &plan,
        nu_minus,
        nu_plus,
        &flows,
        &realizability,
        &transport,
    )?;
    Ok(ConstructedGeodesic {
        plan,
        transport,
        flows,
        realizability,
        certificate,
    })
}

fn boundary_err(e: BoundaryError) -> EndsError {
    match e {
        BoundaryError::Dynamics(d) => EndsError::Dynamics(d),
        other => EndsError::InvalidMeasure(other.to_string()),
    }
}

fn certify(
    tree: &MetricTree,
    plan: &DynamicalPlan,
    nu_minus: &BoundaryMeasure,
    nu_plus: &BoundaryMeasure,
    flows: &FlowTable,
    realizability: &Realizability,
    transport: &D0Transport,
) -> Result<ConstructionCertificate, EndsError> {
    let unit_speed = validate_complete_plan(tree, plan)?.passed();
    let antagonist_free = antagonist_pairs(plan).is_empty();

    let slice = |nu: &BoundaryMeasure| ConeMeasure::on_ends(nu.atoms()).map_err(boundary_err);
    let forward = plan.restrict(tree, Interval::ray())?;
    let backward = DynamicalPlan::new(
        plan.atoms()
            .iter()
            .map(|(g, m)| (g.reversed(), *m))
            .collect(),
        Interval::complete(),
    )?
    .restrict(tree, Interval::ray())?;
    let ends_match = asymptotic_measure(&forward)
        .map_err(boundary_err)?
        .approx_eq(&slice(nu_plus)?, 1e-9)
        && asymptotic_measure(&backward)
            .map_err(boundary_err)?
            .approx_eq(&slice(nu_minus)?, 1e-9);

    let mut through_edge = vec![[0.0f64; 2]; tree.edge_count()];
    let mut through_vertex = vec![0.0; tree.vertex_count()];
    let mut nearest = vec![0.0; tree.vertex_count()];
    let mut second_moment = 0.0;
    for (g, m) in plan.atoms() {
        let mut seen: Vec<(usize, bool)> = Vec::new();
        for tr in g.traversals() {
            if !seen.contains(&(tr.edge.0, tr.forward)) {
                seen.push((tr.edge.0, tr.forward));
                through_edge[tr.edge.0][usize::from(!tr.forward)] += m;
            }
        }
        for v in g.vertices(tree) {
            through_vertex[v.0] += m;
        }
        let p = g.evaluate(tree, 0.0).map_err(DynamicsError::from)?;
        if let TreePoint::Vertex(v) = p {
            nearest[v.0] += m;
        }
        second_moment += m * tree.distance(p, tree.basepoint()).powi(2);
    }

    let mut edge_gap: f64 = 0.0;
    for e in tree.edge_ids() {
        let phi = flows.edge_flow[e.0];
        edge_gap = edge_gap
            .max((through_edge[e.0][0] - phi.max(0.0)).abs())
            .max((through_edge[e.0][1] - (-phi).max(0.0)).abs());
    }
    let mut vertex_gap: f64 = 0.0;
    let mut specific: f64 = 0.0;
    for v in tree.vertices() {
        vertex_gap = vertex_gap.max((through_vertex[v.0] - flows.vertex_flow[v.0]).abs());
        specific = specific.max((nearest[v.0] - flows.specific_flow[v.0]).abs());
    }
    let specific_gap = matches!(tree.basepoint(), TreePoint::Vertex(_)).then_some(specific);

    Ok(ConstructionCertificate {
        unit_speed,
        antagonist_free,
        ends_match,
        edge_gap,
        vertex_gap,
        specific_gap,
        second_moment,
        flow_sum: realizability.value,
        d0_value: transport.value,
    })
}
