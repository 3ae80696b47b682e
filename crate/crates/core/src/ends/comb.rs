use crate::metric_tree::{MetricTree, TreeSpec};

use super::{BoundaryMeasure, EndsError};

/// A finite truncation of the comb with its pair of boundary measures.
#[derive(Clone, Debug)]
pub struct Comb {
    pub tree: MetricTree,
    pub nu_minus: BoundaryMeasure,
    pub nu_plus: BoundaryMeasure,
}

/// Comb of the given depth: base vertices `v1 … vN` joined by unit edges
/// `b1 … b(N-1)`, one infinite tooth `tn` at each `vn`, and massless base
/// rays `left` at `v1` and `right` at `vN` so that no vertex has valency two.
/// Odd teeth carry `ν₋` and even teeth `ν₊`, with masses proportional to
/// `n^(−mass_exponent)`, each measure normalized on its own. The basepoint
/// is `v1`.
pub fn comb_generator(depth: usize, mass_exponent: f64) -> Result<Comb, EndsError> {
    if depth < 2 {
        return Err(EndsError::CombTooShallow(depth));
    }
    if !mass_exponent.is_finite() {
        return Err(EndsError::BadExponent(mass_exponent));
    }
    let mut spec = TreeSpec::new();
    for n in 1..=depth {
        spec = spec.vertex(&format!("v{n}"));
    }
    for n in 1..depth {
        spec = spec.edge(
            &format!("b{n}"),
            &format!("v{n}"),
            &format!("v{}", n + 1),
            1.0,
        );
    }
    for n in 1..=depth {
        spec = spec.ray(&format!("t{n}"), &format!("v{n}"));
    }
    spec = spec
        .ray("left", "v1")
        .ray("right", &format!("v{depth}"))
        .basepoint_vertex("v1");
    let tree = spec
        .build()
        .expect("comb specification is well formed")
        .with_truncation_depth(depth);

    let side = |parity: usize| -> Result<BoundaryMeasure, EndsError> {
        let raw: Vec<(usize, f64)> = (1..=depth)
            .filter(|n| n % 2 == parity)
            .map(|n| (n, (n as f64).powf(-mass_exponent)))
            .collect();
        let total: f64 = raw.iter().map(|(_, w)| w).sum();
        BoundaryMeasure::new(
            raw.into_iter()
                .map(|(n, w)| {
                    let end = tree.end(&format!("t{n}")).expect("tooth exists");
                    (end, w / total)
                })
                .collect(),
        )
    };
    Ok(Comb {
        nu_minus: side(1)?,
        nu_plus: side(0)?,
        tree,
    })
}
