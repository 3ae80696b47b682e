//! JSON readers and writers for trees, measures, plans and Radon data.
//!
//! Numbers are read from JSON numbers or strings (`"0.5"`, `"1/3"`, `"inf"`)
//! and written as strings in shortest round-trip form, so every emitted
//! artifact parses back to the same values.

use std::collections::BTreeMap;
use std::fmt;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::boundary::{BoundaryError, ConeMeasure, ConePoint};
use crate::dynamics::{DynamicalPlan, DynamicsError};
use crate::ends::{BoundaryMeasure, EndsError};
use crate::metric_tree::{
    EdgeSpec, Interval, Locus, MetricTree, PointSpec, Segment, TreeError, TreeGeodesic, TreePoint,
    TreeSpec, EPS,
};
use crate::radon::{Flag, RadonError, VertexFunction};
use crate::transport::{DiscreteMeasure, PlanEntry, TransportError, TransportPlan};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Transport(#[from] TransportError),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
    #[error(transparent)]
    Boundary(#[from] BoundaryError),
    #[error(transparent)]
    Ends(#[from] EndsError),
    #[error(transparent)]
    Radon(#[from] RadonError),
    #[error("{0}")]
    Invalid(String),
}

/// Shortest representation that parses back to the same value.
pub fn fmt_num(x: f64) -> String {
    if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else if x == 0.0 {
        "0".into()
    } else {
        format!("{x}")
    }
}

/// Fixed 12-decimal representation for reported quantities.
pub fn fmt_fixed(x: f64) -> String {
    if x.is_infinite() {
        fmt_num(x)
    } else if x == 0.0 {
        format!("{:.12}", 0.0)
    } else {
        format!("{x:.12}")
    }
}

/// Parses a decimal, a fraction `p/q` or `inf`.
pub fn parse_num(s: &str) -> Result<f64, String> {
    let t = s.trim();
    match t.to_ascii_lowercase().as_str() {
        "inf" | "+inf" | "infinity" | "+infinity" => return Ok(f64::INFINITY),
        "-inf" | "-infinity" => return Ok(f64::NEG_INFINITY),
        _ => {}
    }
    if let Some((p, q)) = t.split_once('/') {
        let p: f64 = p.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
        let q: f64 = q.trim().parse().map_err(|_| format!("bad number `{s}`"))?;
        if q == 0.0 {
            return Err(format!("zero denominator in `{s}`"));
        }
        return Ok(p / q);
    }
    let x: f64 = t.parse().map_err(|_| format!("bad number `{s}`"))?;
    if x.is_nan() {
        return Err(format!("bad number `{s}`"));
    }
    Ok(x)
}

/// A number in JSON: accepted as a number or a string, written as a string.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Num(pub f64);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&fmt_num(self.0))
    }
}

impl<'de> Deserialize<'de> for Num {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = Num;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a number or a numeric string")
            }
            fn visit_f64<E: de::Error>(self, v: f64) -> Result<Num, E> {
                Ok(Num(v))
            }
            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Num, E> {
                Ok(Num(v as f64))
            }
            fn visit_str<E: de::Error>(self, v: &str) -> Result<Num, E> {
                parse_num(v).map(Num).map_err(E::custom)
            }
        }
        d.deserialize_any(V)
    }
}

// ---- trees and points ----

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EdgeJson {
    pub id: String,
    pub ends: Vec<String>,
    pub length: Num,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PointJson {
    Vertex { vertex: String },
    OnEdge { edge: String, offset: Num },
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TreeJson {
    pub vertices: Vec<String>,
    pub edges: Vec<EdgeJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub basepoint: Option<PointJson>,
}

impl From<&PointJson> for PointSpec {
    fn from(p: &PointJson) -> Self {
        match p {
            PointJson::Vertex { vertex } => PointSpec::Vertex(vertex.clone()),
            PointJson::OnEdge { edge, offset } => PointSpec::OnEdge {
                edge: edge.clone(),
                offset: offset.0,
            },
        }
    }
}

impl From<&PointSpec> for PointJson {
    fn from(p: &PointSpec) -> Self {
        match p {
            PointSpec::Vertex(v) => PointJson::Vertex { vertex: v.clone() },
            PointSpec::OnEdge { edge, offset } => PointJson::OnEdge {
                edge: edge.clone(),
                offset: Num(*offset),
            },
        }
    }
}

impl From<&TreeJson> for TreeSpec {
    fn from(t: &TreeJson) -> Self {
        TreeSpec {
            vertices: t.vertices.clone(),
            edges: t
                .edges
                .iter()
                .map(|e| EdgeSpec {
                    id: e.id.clone(),
                    ends: e.ends.clone(),
                    length: e.length.0,
                })
                .collect(),
            basepoint: t.basepoint.as_ref().map(PointSpec::from),
        }
    }
}

/// Parses a tree description without validating it.
pub fn parse_tree_spec(text: &str) -> Result<TreeSpec, IoError> {
    let t: TreeJson = serde_json::from_str(text)?;
    Ok(TreeSpec::from(&t))
}

pub fn read_tree(text: &str) -> Result<MetricTree, IoError> {
    Ok(parse_tree_spec(text)?.build()?)
}

pub fn tree_to_json(tree: &MetricTree) -> Value {
    let t = TreeJson {
        vertices: tree
            .vertices()
            .map(|v| tree.vertex_name(v).to_string())
            .collect(),
        edges: tree
            .edge_ids()
            .map(|e| {
                let edge = tree.edge(e);
                EdgeJson {
                    id: edge.name.clone(),
                    ends: std::iter::once(edge.tail)
                        .chain(edge.head)
                        .map(|v| tree.vertex_name(v).to_string())
                        .collect(),
                    length: Num(edge.length),
                }
            })
            .collect(),
        basepoint: Some(PointJson::from(&tree.point_spec(tree.basepoint()))),
    };
    serde_json::to_value(t).expect("tree serializes")
}

pub fn point_to_json(tree: &MetricTree, p: TreePoint) -> Value {
    serde_json::to_value(PointJson::from(&tree.point_spec(p))).expect("point serializes")
}

pub fn point_from_json(tree: &MetricTree, p: &PointJson) -> Result<TreePoint, IoError> {
    Ok(tree.resolve_point(&PointSpec::from(p))?)
}

pub fn read_point(tree: &MetricTree, text: &str) -> Result<TreePoint, IoError> {
    point_from_json(tree, &serde_json::from_str(text)?)
}

// ---- measures and plans ----

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct AtomJson {
    pub point: PointJson,
    pub mass: Num,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MeasureJson {
    pub atoms: Vec<AtomJson>,
}

pub fn read_measure(tree: &MetricTree, text: &str) -> Result<DiscreteMeasure, IoError> {
    let m: MeasureJson = serde_json::from_str(text)?;
    let atoms = m
        .atoms
        .iter()
        .map(|a| Ok((point_from_json(tree, &a.point)?, a.mass.0)))
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(DiscreteMeasure::new(atoms)?)
}

pub fn measure_to_json(tree: &MetricTree, mu: &DiscreteMeasure) -> Value {
    json!({
        "atoms": mu.atoms().iter().map(|&(p, m)| json!({
            "point": point_to_json(tree, p),
            "mass": fmt_num(m),
        })).collect::<Vec<_>>()
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct EntryJson {
    pub source: PointJson,
    pub target: PointJson,
    pub mass: Num,
}

/// Any object with a `plan` array of entries, such as the output of `w2`.
#[derive(Clone, Debug, Deserialize)]
struct PlanFile {
    plan: Vec<EntryJson>,
}

pub fn read_plan(tree: &MetricTree, text: &str) -> Result<TransportPlan, IoError> {
    let value: Value = serde_json::from_str(text)?;
    let entries: Vec<EntryJson> = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        serde_json::from_value::<PlanFile>(value)?.plan
    };
    let entries = entries
        .iter()
        .map(|e| {
            if !(e.mass.0 >= 0.0) || !e.mass.0.is_finite() {
                return Err(IoError::Invalid(format!("invalid plan mass {}", e.mass.0)));
            }
            Ok(PlanEntry {
                source: point_from_json(tree, &e.source)?,
                target: point_from_json(tree, &e.target)?,
                mass: e.mass.0,
            })
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(TransportPlan::new(entries))
}

pub fn plan_to_json(tree: &MetricTree, plan: &TransportPlan) -> Value {
    Value::Array(
        plan.entries
            .iter()
            .map(|e| {
                json!({
                    "source": point_to_json(tree, e.source),
                    "target": point_to_json(tree, e.target),
                    "mass": fmt_num(e.mass),
                })
            })
            .collect(),
    )
}

// ---- geodesics and dynamical plans ----

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IntervalJson {
    pub start: Num,
    pub end: Num,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentJson {
    pub edge: String,
    pub forward: bool,
    pub start: Num,
    pub end: Num,
    pub tail_coord: Num,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocusJson {
    Point(PointJson),
    Path(Vec<SegmentJson>),
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SegmentSpecJson {
    pub from: PointJson,
    pub to: PointJson,
    #[serde(default)]
    pub t0: Option<Num>,
    #[serde(default)]
    pub t1: Option<Num>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RaySpecJson {
    pub from: PointJson,
    pub end: String,
    pub speed: Num,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LineSpecJson {
    pub from_end: String,
    pub to_end: String,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConstantSpecJson {
    pub point: PointJson,
    pub interval: IntervalJson,
}

/// A geodesic, either in stored form or through one of the constructors.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum GeodesicJson {
    Stored {
        speed: Num,
        interval: IntervalJson,
        locus: LocusJson,
    },
    Segment {
        segment: SegmentSpecJson,
    },
    Ray {
        ray: RaySpecJson,
    },
    Line {
        line: LineSpecJson,
    },
    Constant {
        constant: ConstantSpecJson,
    },
}

fn interval_of(i: &IntervalJson) -> Result<Interval, IoError> {
    if !(i.start.0 <= i.end.0) || i.start.0 == f64::INFINITY || i.end.0 == f64::NEG_INFINITY {
        return Err(TreeError::InvalidInterval(i.start.0, i.end.0).into());
    }
    Ok(Interval::new(i.start.0, i.end.0))
}

/// Checks that stored segments describe a continuous injective path on the tree.
fn check_path(tree: &MetricTree, segs: &[Segment]) -> Result<(), IoError> {
    let bad = |msg: String| Err(IoError::Invalid(format!("invalid geodesic path: {msg}")));
    if segs.is_empty() {
        return bad("no segments".into());
    }
    for (i, s) in segs.iter().enumerate() {
        let len = tree.edge(s.edge).length;
        if !(s.start < s.end) {
            return bad(format!("segment {i} is empty"));
        }
        for c in [s.start, s.end] {
            if c.is_finite() {
                let off = s.offset_at(c);
                if off < -EPS || off > len + EPS {
                    return bad(format!("segment {i} leaves its edge"));
                }
            } else if len.is_finite() {
                return bad(format!("segment {i} is unbounded on a finite edge"));
            } else {
                // only the far side of an infinite edge is unbounded
                let outward = (c > 0.0) == s.forward;
                if !outward {
                    return bad(format!("segment {i} runs past the vertex of its edge"));
                }
            }
        }
        if i > 0 {
            let p = &segs[i - 1];
            if (p.end - s.start).abs() > EPS || !p.end.is_finite() {
                return bad(format!("segments {} and {i} are not contiguous", i - 1));
            }
            let a = tree.canonical(
                p.edge,
                p.offset_at(p.end).clamp(0.0, tree.edge(p.edge).length),
            );
            let b = tree.canonical(
                s.edge,
                s.offset_at(s.start).clamp(0.0, tree.edge(s.edge).length),
            );
            if !a.approx_eq(&b) || p.edge == s.edge {
                return bad(format!(
                    "segments {} and {i} do not meet at a vertex",
                    i - 1
                ));
            }
        }
    }
    Ok(())
}

pub fn geodesic_from_json(tree: &MetricTree, g: &GeodesicJson) -> Result<TreeGeodesic, IoError> {
    Ok(match g {
        GeodesicJson::Stored {
            speed,
            interval,
            locus,
        } => {
            let interval = interval_of(interval)?;
            if !(speed.0 >= 0.0) || !speed.0.is_finite() {
                return Err(IoError::Invalid(format!("invalid speed {}", speed.0)));
            }
            let locus = match locus {
                LocusJson::Point(p) => Locus::Point(point_from_json(tree, p)?),
                LocusJson::Path(segs) => {
                    let segs = segs
                        .iter()
                        .map(|s| {
                            Ok(Segment {
                                edge: tree.edge_id(&s.edge)?,
                                forward: s.forward,
                                start: s.start.0,
                                end: s.end.0,
                                tail_coord: s.tail_coord.0,
                            })
                        })
                        .collect::<Result<Vec<_>, IoError>>()?;
                    check_path(tree, &segs)?;
                    Locus::Path(segs)
                }
            };
            TreeGeodesic::from_parts(speed.0, interval, locus)
        }
        GeodesicJson::Segment { segment } => tree.geodesic_segment(
            point_from_json(tree, &segment.from)?,
            point_from_json(tree, &segment.to)?,
            segment.t0.map_or(0.0, |t| t.0),
            segment.t1.map_or(1.0, |t| t.0),
        )?,
        GeodesicJson::Ray { ray } => {
            if !(ray.speed.0 >= 0.0) || !ray.speed.0.is_finite() {
                return Err(IoError::Invalid(format!("invalid speed {}", ray.speed.0)));
            }
            tree.ray_to_end(
                point_from_json(tree, &ray.from)?,
                tree.end(&ray.end)?,
                ray.speed.0,
            )
        }
        GeodesicJson::Line { line } => {
            tree.geodesic_between_ends(tree.end(&line.from_end)?, tree.end(&line.to_end)?)?
        }
        GeodesicJson::Constant { constant } => TreeGeodesic::constant(
            point_from_json(tree, &constant.point)?,
            interval_of(&constant.interval)?,
        ),
    })
}

pub fn read_geodesic(tree: &MetricTree, text: &str) -> Result<TreeGeodesic, IoError> {
    geodesic_from_json(tree, &serde_json::from_str(text)?)
}

fn interval_to_json(i: Interval) -> Value {
    json!({ "start": fmt_num(i.start), "end": fmt_num(i.end) })
}

pub fn geodesic_to_json(tree: &MetricTree, g: &TreeGeodesic) -> Value {
    let locus = match g.locus() {
        Locus::Point(p) => json!({ "point": point_to_json(tree, *p) }),
        Locus::Path(segs) => json!({
            "path": segs.iter().map(|s| json!({
                "edge": tree.edge(s.edge).name,
                "forward": s.forward,
                "start": fmt_num(s.start),
                "end": fmt_num(s.end),
                "tail_coord": fmt_num(s.tail_coord),
            })).collect::<Vec<_>>()
        }),
    };
    json!({
        "speed": fmt_num(g.speed()),
        "interval": interval_to_json(g.interval()),
        "locus": locus,
    })
}

#[derive(Clone, Debug, Deserialize)]
pub struct DynamicalAtomJson {
    pub geodesic: GeodesicJson,
    pub mass: Num,
}

#[derive(Clone, Debug, Deserialize)]
pub struct DynamicalPlanJson {
    #[serde(default)]
    pub interval: Option<IntervalJson>,
    pub atoms: Vec<DynamicalAtomJson>,
}

/// Reads a dynamical plan; without an explicit interval the first atom's is used.
pub fn read_dynamical_plan(tree: &MetricTree, text: &str) -> Result<DynamicalPlan, IoError> {
    let p: DynamicalPlanJson = serde_json::from_str(text)?;
    let atoms = p
        .atoms
        .iter()
        .map(|a| Ok((geodesic_from_json(tree, &a.geodesic)?, a.mass.0)))
        .collect::<Result<Vec<_>, IoError>>()?;
    let interval = match &p.interval {
        Some(i) => interval_of(i)?,
        None => atoms
            .first()
            .map(|(g, _)| g.interval())
            .ok_or(DynamicsError::EmptyPlan)?,
    };
    Ok(DynamicalPlan::new(atoms, interval)?)
}

pub fn dynamical_plan_to_json(tree: &MetricTree, plan: &DynamicalPlan) -> Value {
    json!({
        "interval": interval_to_json(plan.interval()),
        "atoms": plan.atoms().iter().map(|(g, m)| json!({
            "geodesic": geodesic_to_json(tree, g),
            "mass": fmt_num(*m),
        })).collect::<Vec<_>>()
    })
}

// ---- boundary measures ----

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConeAtomJson {
    /// Absent for the apex.
    #[serde(default)]
    pub end: Option<String>,
    pub speed: Num,
    pub mass: Num,
}

#[derive(Clone, Debug, Deserialize)]
pub struct ConeMeasureJson {
    pub atoms: Vec<ConeAtomJson>,
}

pub fn read_cone_measure(tree: &MetricTree, text: &str) -> Result<ConeMeasure, IoError> {
    let c: ConeMeasureJson = serde_json::from_str(text)?;
    let atoms = c
        .atoms
        .iter()
        .map(|a| {
            let p = match &a.end {
                None if a.speed.0 == 0.0 => ConePoint::apex(),
                None => {
                    return Err(IoError::Invalid(
                        "a cone atom without an end must have speed 0".into(),
                    ))
                }
                Some(e) => ConePoint::new(tree.end(e)?, a.speed.0),
            };
            Ok((p, a.mass.0))
        })
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(ConeMeasure::new(atoms)?)
}

pub fn cone_measure_to_json(tree: &MetricTree, nu: &ConeMeasure) -> Value {
    json!({
        "atoms": nu.atoms().iter().map(|(p, m)| {
            let mut o = Map::new();
            if let Some(e) = p.end {
                o.insert("end".into(), json!(tree.edge(e.edge()).name));
            }
            o.insert("speed".into(), json!(fmt_num(p.speed)));
            o.insert("mass".into(), json!(fmt_num(*m)));
            Value::Object(o)
        }).collect::<Vec<_>>()
    })
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EndAtomJson {
    pub end: String,
    pub mass: Num,
}

#[derive(Clone, Debug, Deserialize)]
pub struct BoundaryMeasureJson {
    pub atoms: Vec<EndAtomJson>,
}

pub fn read_boundary_measure(tree: &MetricTree, text: &str) -> Result<BoundaryMeasure, IoError> {
    let b: BoundaryMeasureJson = serde_json::from_str(text)?;
    let atoms = b
        .atoms
        .iter()
        .map(|a| Ok((tree.end(&a.end)?, a.mass.0)))
        .collect::<Result<Vec<_>, IoError>>()?;
    Ok(BoundaryMeasure::new(atoms)?)
}

pub fn boundary_measure_to_json(tree: &MetricTree, nu: &BoundaryMeasure) -> Value {
    json!({
        "atoms": nu.atoms().iter().map(|(e, m)| json!({
            "end": tree.edge(e.edge()).name,
            "mass": fmt_num(*m),
        })).collect::<Vec<_>>()
    })
}

// ---- Radon data ----

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlagValueJson {
    pub vertex: String,
    pub edges: [String; 2],
    pub value: Num,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
enum RadonDataJson {
    Bare(Vec<FlagValueJson>),
    WithTotal {
        flags: Vec<FlagValueJson>,
        #[serde(default)]
        total: Option<Num>,
    },
}

/// Flag values, with the total if the file records one.
pub fn read_radon_data(
    tree: &MetricTree,
    text: &str,
) -> Result<(BTreeMap<Flag, f64>, Option<f64>), IoError> {
    let (flags, total) = match serde_json::from_str::<RadonDataJson>(text)? {
        RadonDataJson::Bare(f) => (f, None),
        RadonDataJson::WithTotal { flags, total } => (flags, total.map(|t| t.0)),
    };
    let mut out = BTreeMap::new();
    for f in flags {
        let flag = Flag::new(
            tree,
            tree.vertex_id(&f.vertex)?,
            tree.edge_id(&f.edges[0])?,
            tree.edge_id(&f.edges[1])?,
        )?;
        if out.insert(flag, f.value.0).is_some() {
            return Err(IoError::Invalid(format!(
                "flag at `{}` with edges `{}`, `{}` given twice",
                f.vertex, f.edges[0], f.edges[1]
            )));
        }
    }
    Ok((out, total))
}

pub fn radon_data_to_json(tree: &MetricTree, data: &BTreeMap<Flag, f64>, total: f64) -> Value {
    json!({
        "flags": data.iter().map(|(fl, v)| json!({
            "vertex": tree.vertex_name(fl.vertex),
            "edges": [tree.edge(fl.edges.0).name.clone(), tree.edge(fl.edges.1).name.clone()],
            "value": fmt_num(*v),
        })).collect::<Vec<_>>(),
        "total": fmt_num(total),
    })
}

/// `{"vertex name": "value", ...}`; vertices left out are zero.
pub fn read_vertex_function(tree: &MetricTree, text: &str) -> Result<VertexFunction, IoError> {
    let map: BTreeMap<String, Num> = serde_json::from_str(text)?;
    let mut values = vec![0.0; tree.vertex_count()];
    for (name, v) in map {
        values[tree.vertex_id(&name)?.0] = v.0;
    }
    Ok(VertexFunction::new(values))
}

pub fn vertex_function_to_json(tree: &MetricTree, h: &VertexFunction) -> Value {
    let mut o = Map::new();
    for v in tree.vertices() {
        o.insert(tree.vertex_name(v).to_string(), json!(fmt_num(h.get(v))));
    }
    Value::Object(o)
}
