use std::fs;
use std::io::Write as _;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{debug, info, LevelFilter};
use serde_json::{json, Map, Value};

use w2tree::boundary::{asymptotic_formula_check, w_infinity, Growth, DEFAULT_GRID};
use w2tree::dynamics::{interpolate, is_optimal_dynamical, pushforward_at, validate_complete_plan};
use w2tree::ends::{
    comb_generator, construct_geodesic, flow_table, realizability_sum, FlowSign, Realizability,
};
use w2tree::io::{self, fmt_fixed, fmt_num, IoError};
use w2tree::metric_tree::{IntervalKind, MetricTree, TreeEnd};
use w2tree::radon::{combinatorial_radon, radon_invert, radon_measure};
use w2tree::transport::{default_max_cycle, is_cyclically_monotone, wasserstein2, Monotonicity};

const SCHEMAS: &str = r#"INPUT FORMATS
Every input is a path to a JSON file, or the JSON text itself if it starts
with '{' or '['. Numbers may be JSON numbers or strings: "0.5", "1/3", "inf".

  tree      {"vertices": ["o", "a", ...],
             "edges": [{"id": "e1", "ends": ["o", "a"], "length": "1"},
                       {"id": "r1", "ends": ["o"], "length": "inf"}],
             "basepoint": POINT}            basepoint optional, default first vertex
            An edge with one end is an infinite ray; its id names the end.
  POINT     {"vertex": "o"}  or  {"edge": "e1", "offset": "0.5"}
            offset is measured from the first listed end of the edge.
  measure   {"atoms": [{"point": POINT, "mass": "0.5"}, ...]}   masses sum to 1
  plan      {"plan": [{"source": POINT, "target": POINT, "mass": "0.5"}, ...]}
            (a bare array of entries is also accepted; extra fields are ignored,
            so the output of `w2` is a valid plan)
  dynamical plan
            {"interval": {"start": "0", "end": "1"},     optional, else the first atom's
             "atoms": [{"geodesic": GEODESIC, "mass": "0.5"}, ...]}
  GEODESIC  one of
            {"segment": {"from": POINT, "to": POINT, "t0": "0", "t1": "1"}}  t0, t1 optional
            {"ray": {"from": POINT, "end": "r1", "speed": "1"}}        on [0, inf)
            {"line": {"from_end": "r1", "to_end": "r2"}}                unit speed on (-inf, inf)
            {"constant": {"point": POINT, "interval": {"start": .., "end": ..}}}
            {"speed": .., "interval": .., "locus": {"point": POINT} | {"path": [SEGMENT, ...]}}
  SEGMENT   {"edge": "e1", "forward": true, "start": "0", "end": "1", "tail_coord": "0"}
            the geodesic sits at coordinate speed*t; on the segment the offset
            along the edge is coord - tail_coord (forward) or tail_coord - coord.
  cone measure
            {"atoms": [{"end": "r1", "speed": "2", "mass": "0.5"},
                       {"speed": "0", "mass": "0.5"}, ...]}     no end: the apex
  boundary measure
            {"atoms": [{"end": "r1", "mass": "0.5"}, ...]}
  radon data
            {"flags": [{"vertex": "u", "edges": ["r1", "r2"], "value": "7"}, ...],
             "total": "7"}                  or a bare array of flags
  vertex function
            {"u": "2", "v": "5"}            missing vertices are 0

OUTPUT
JSON on stdout (or --out). Reported scalars use 12 decimals; masses, points
and plans use the shortest exact decimal so outputs can be fed back as inputs.

EXIT STATUS
  0 success, 1 domain error (invalid tree, non-antipodal or non-realizable
  measures, inconsistent data, ...), 2 unreadable input or bad usage.

ENVIRONMENT
  W2_LOG=quiet|info|debug   diagnostics on stderr (default quiet)"#;

#[derive(Parser)]
#[command(
    name = "w2tree",
    version,
    about = "Exact quadratic optimal transport on metric trees",
    after_long_help = SCHEMAS
)]
struct Cli {
    /// Write the result to this file instead of stdout.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct TreeArg {
    /// Tree JSON (see --help for the schema).
    #[arg(long)]
    tree: String,
}

#[derive(Args)]
struct EndsArgs {
    #[command(flatten)]
    tree: TreeArg,
    /// Boundary measure at −∞.
    #[arg(long)]
    nu_minus: String,
    /// Boundary measure at +∞.
    #[arg(long)]
    nu_plus: String,
}

#[derive(Subcommand)]
enum Command {
    /// Check a tree and report its leaves, valency-two vertices and rays.
    Validate(TreeArg),
    /// Distance between two points.
    Distance {
        #[command(flatten)]
        tree: TreeArg,
        /// POINT JSON.
        #[arg(long)]
        x: String,
        /// POINT JSON.
        #[arg(long)]
        y: String,
    },
    /// Quadratic Wasserstein distance and an optimal plan between two measures.
    W2 {
        #[command(flatten)]
        tree: TreeArg,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        nu: String,
    },
    /// Displacement interpolation on [0, 1] between two measures.
    Interpolate {
        #[command(flatten)]
        tree: TreeArg,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        nu: String,
        /// Also report the interpolated measure at these times (repeatable).
        #[arg(long = "t")]
        times: Vec<f64>,
    },
    /// Certify a transport plan (cyclical monotonicity) or a dynamical plan (antagonism).
    CertifyPlan {
        #[command(flatten)]
        tree: TreeArg,
        /// Transport plan or dynamical plan JSON.
        #[arg(long)]
        plan: String,
        /// Longest cycle checked for transport plans; default the support size.
        #[arg(long)]
        max_cycle: Option<usize>,
    },
    /// Table of W(μ_t, σ_t)/t against W∞(μ∞, σ∞) for two ray plans, as CSV.
    Asymptotic {
        #[command(flatten)]
        tree: TreeArg,
        /// Dynamical plan on [0, inf).
        #[arg(long)]
        mu: String,
        /// Dynamical plan on [0, inf).
        #[arg(long)]
        sigma: String,
        /// `default` or comma-separated times.
        #[arg(long, default_value = "default")]
        grid: String,
        /// Emit the full report as JSON instead of CSV.
        #[arg(long)]
        json: bool,
    },
    /// W∞ distance between two cone measures.
    WInfinity {
        #[command(flatten)]
        tree: TreeArg,
        #[arg(long)]
        mu: String,
        #[arg(long)]
        nu: String,
    },
    /// Flows of ν₊ − ν₋ through every edge and vertex.
    Flows(EndsArgs),
    /// The sum Σ φ⁰(x) d(x, x₀)² and its verdict.
    Realizability {
        #[command(flatten)]
        ends: EndsArgs,
        /// Treat the tree as a truncation of an infinite tree at this hop depth.
        #[arg(long)]
        depth: Option<usize>,
    },
    /// Complete unit-speed geodesic from ν₋ to ν₊ with its certificate.
    BuildGeodesic(EndsArgs),
    /// Radon transform of a vertex function, or projection of a measure onto a geodesic.
    Radon {
        #[command(flatten)]
        tree: TreeArg,
        /// Vertex function JSON.
        #[arg(long, conflicts_with_all = ["mu", "geodesic"], required_unless_present = "mu")]
        h: Option<String>,
        /// Measure JSON; requires --geodesic.
        #[arg(long, requires = "geodesic")]
        mu: Option<String>,
        /// GEODESIC JSON of a complete geodesic.
        #[arg(long, requires = "mu")]
        geodesic: Option<String>,
    },
    /// Recover a vertex function from its Radon transform.
    RadonInvert {
        #[command(flatten)]
        tree: TreeArg,
        /// Radon data JSON.
        #[arg(long)]
        data: String,
        /// Σh; overrides a total recorded in the data.
        #[arg(long, allow_hyphen_values = true)]
        total: Option<String>,
    },
    /// Comb tree with power-law boundary measures and its realizability verdict.
    Comb {
        /// Number of teeth.
        #[arg(long, default_value_t = 4096)]
        depth: usize,
        /// Tooth masses are proportional to n^(−p).
        #[arg(long, allow_hyphen_values = true)]
        mass_exponent: f64,
        /// Include the tree and both measures in the output.
        #[arg(long)]
        full: bool,
    },
}

/// Input that could not be read or parsed.
#[derive(Debug)]
struct InputError(String);

impl std::fmt::Display for InputError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for InputError {}

fn load(arg: &str) -> Result<String> {
    let t = arg.trim_start();
    if t.starts_with('{') || t.starts_with('[') {
        return Ok(arg.to_string());
    }
    fs::read_to_string(arg).map_err(|e| InputError(format!("cannot read `{arg}`: {e}")).into())
}

/// Attaches the input name, keeping JSON syntax errors distinguishable.
fn parsed<T>(what: &str, r: Result<T, IoError>) -> Result<T> {
    r.map_err(|e| match e {
        IoError::Json(j) => InputError(format!("{what}: {j}")).into(),
        other => anyhow::Error::new(other).context(what.to_string()),
    })
}

fn tree_of(a: &TreeArg) -> Result<MetricTree> {
    parsed("tree", io::read_tree(&load(&a.tree)?))
}

fn end_name(tree: &MetricTree, e: TreeEnd) -> String {
    tree.edge(e.edge()).name.clone()
}

fn monotonicity_json(m: &Monotonicity) -> Value {
    match m {
        Monotonicity::Pass => json!({ "monotone": true }),
        Monotonicity::Fail(w) => json!({
            "monotone": false,
            "witness": { "cycle": w.cycle, "excess": fmt_fixed(w.excess) },
        }),
    }
}

fn realizability_json(r: &Realizability) -> Value {
    json!({
        "value": fmt_fixed(r.value),
        "partial_sums": r.partial_sums.iter().map(|(n, s)| json!({
            "depth": n,
            "sum": fmt_fixed(*s),
        })).collect::<Vec<_>>(),
        "verdict": r.verdict.to_string(),
        "depth": r.depth,
    })
}

fn parse_grid(s: &str) -> Result<Vec<f64>> {
    if s.trim() == "default" {
        return Ok(DEFAULT_GRID.to_vec());
    }
    s.split(',')
        .map(|x| io::parse_num(x).map_err(|e| InputError(format!("grid: {e}")).into()))
        .collect()
}

enum Output {
    Json(Value),
    Text(String),
}

fn run(cmd: Command) -> Result<Output> {
    Ok(Output::Json(match cmd {
        Command::Validate(t) => {
            let spec = parsed("tree", io::parse_tree_spec(&load(&t.tree)?))?;
            let tree = spec.build().context("tree")?;
            let r = tree.report();
            json!({
                "valid": true,
                "vertex_count": r.vertex_count,
                "edge_count": r.edge_count,
                "infinite_edges": r.infinite_edges,
                "leaves": r.leaves,
                "valency_two": r.valency_two,
                "leaf_free": tree.is_leaf_free(),
                "radon_ready": r.radon_ready(),
            })
        }
        Command::Distance { tree, x, y } => {
            let tree = tree_of(&tree)?;
            let p = parsed("x", io::read_point(&tree, &load(&x)?))?;
            let q = parsed("y", io::read_point(&tree, &load(&y)?))?;
            json!({ "distance": fmt_fixed(tree.distance(p, q)) })
        }
        Command::W2 { tree, mu, nu } => {
            let tree = tree_of(&tree)?;
            let mu = parsed("mu", io::read_measure(&tree, &load(&mu)?))?;
            let nu = parsed("nu", io::read_measure(&tree, &load(&nu)?))?;
            let w = wasserstein2(&tree, &mu, &nu);
            info!(
                "w2: {} x {} atoms, plan support {}",
                mu.len(),
                nu.len(),
                w.plan.len()
            );
            debug!("w2: certificate gap {:e}", w.certificate_gap);
            json!({
                "distance": fmt_fixed(w.distance),
                "cost": fmt_fixed(w.cost),
                "certificate_gap": fmt_fixed(w.certificate_gap),
                "plan": io::plan_to_json(&tree, &w.plan),
            })
        }
        Command::Interpolate {
            tree,
            mu,
            nu,
            times,
        } => {
            let tree = tree_of(&tree)?;
            let mu = parsed("mu", io::read_measure(&tree, &load(&mu)?))?;
            let nu = parsed("nu", io::read_measure(&tree, &load(&nu)?))?;
            let plan = interpolate(&tree, &mu, &nu)?;
            info!(
                "interpolate: {} geodesics, speed {}",
                plan.len(),
                plan.speed()
            );
            let mut out = Map::new();
            out.insert("distance".into(), json!(fmt_fixed(plan.speed())));
            out.insert("plan".into(), io::dynamical_plan_to_json(&tree, &plan));
            if !times.is_empty() {
                let mut slices = Vec::new();
                for t in times {
                    let m = pushforward_at(&tree, &plan, t)?;
                    slices.push(
                        json!({ "t": fmt_num(t), "measure": io::measure_to_json(&tree, &m) }),
                    );
                }
                out.insert("measures".into(), Value::Array(slices));
            }
            Value::Object(out)
        }
        Command::CertifyPlan {
            tree,
            plan,
            max_cycle,
        } => {
            let tree = tree_of(&tree)?;
            let text = load(&plan)?;
            let value: Value =
                serde_json::from_str(&text).map_err(|e| InputError(format!("plan: {e}")))?;
            if value.get("atoms").is_some() {
                let plan = parsed("plan", io::read_dynamical_plan(&tree, &text))?;
                let cert = is_optimal_dynamical(&tree, &plan)?;
                let mut out = Map::new();
                out.insert("kind".into(), json!("dynamical"));
                out.insert("optimal".into(), json!(cert.passed()));
                out.insert(
                    "antagonists".into(),
                    cert.antagonists
                        .iter()
                        .map(|a| {
                            json!({
                                "first": a.first,
                                "second": a.second,
                                "edge": tree.edge(a.edge).name,
                            })
                        })
                        .collect(),
                );
                out.insert(
                    "sampled".into(),
                    cert.sampled
                        .iter()
                        .map(|(s, t, m)| {
                            let mut o = monotonicity_json(m);
                            o["s"] = json!(fmt_num(*s));
                            o["t"] = json!(fmt_num(*t));
                            o
                        })
                        .collect(),
                );
                out.insert("consistent".into(), json!(cert.consistent()));
                if plan.interval().kind() == IntervalKind::Complete {
                    let c = validate_complete_plan(&tree, &plan)?;
                    out.insert(
                        "complete".into(),
                        json!({
                            "unit_speed": c.passed(),
                            "off_speed": c.off_speed,
                            "witness": c.witness.map(|(i, j, t, m)| {
                                let mut o = monotonicity_json(&m);
                                o["atoms"] = json!([i, j]);
                                o["t"] = json!(fmt_num(t));
                                o
                            }),
                        }),
                    );
                }
                Value::Object(out)
            } else {
                let plan = parsed("plan", io::read_plan(&tree, &text))?;
                let k = max_cycle.unwrap_or(plan.len()).max(1);
                debug!(
                    "certify-plan: default bound would be {}",
                    default_max_cycle(&plan)
                );
                let m = is_cyclically_monotone(&tree, &plan, k);
                let mut o = monotonicity_json(&m);
                o["kind"] = json!("static");
                o["max_cycle"] = json!(k);
                o["cost"] = json!(fmt_fixed(plan.cost(&tree)));
                o
            }
        }
        Command::Asymptotic {
            tree,
            mu,
            sigma,
            grid,
            json,
        } => {
            let tree = tree_of(&tree)?;
            let mu = parsed("mu", io::read_dynamical_plan(&tree, &load(&mu)?))?;
            let sigma = parsed("sigma", io::read_dynamical_plan(&tree, &load(&sigma)?))?;
            let grid = parse_grid(&grid)?;
            let r = asymptotic_formula_check(&tree, &mu, &sigma, &grid)?;
            info!(
                "asymptotic: exit time {}, certified limit {}, monotone {}",
                fmt_fixed(r.exit_time),
                fmt_fixed(r.certified_limit),
                r.monotone
            );
            if !json {
                let mut csv = String::from("t,ratio,target,abs_error\n");
                for row in &r.rows {
                    csv.push_str(&format!(
                        "{},{},{},{}\n",
                        fmt_num(row.t),
                        fmt_fixed(row.ratio),
                        fmt_fixed(row.target),
                        fmt_fixed(row.error)
                    ));
                }
                return Ok(Output::Text(csv));
            }
            json!({
                "rows": r.rows.iter().map(|row| json!({
                    "t": fmt_num(row.t),
                    "ratio": fmt_fixed(row.ratio),
                    "target": fmt_fixed(row.target),
                    "abs_error": fmt_fixed(row.error),
                })).collect::<Vec<_>>(),
                "target": fmt_fixed(r.target),
                "exit_time": fmt_fixed(r.exit_time),
                "certified_limit": fmt_fixed(r.certified_limit),
                "intercept_bound": fmt_fixed(r.intercept_bound),
                "growth": match r.growth {
                    Growth::Asymptotic => json!("asymptotic"),
                    Growth::Linear(s) => json!({ "linear": fmt_fixed(s) }),
                },
                "monotone": r.monotone,
            })
        }
        Command::WInfinity { tree, mu, nu } => {
            let tree = tree_of(&tree)?;
            let a = parsed("mu", io::read_cone_measure(&tree, &load(&mu)?))?;
            let b = parsed("nu", io::read_cone_measure(&tree, &load(&nu)?))?;
            let w = w_infinity(&a, &b);
            let cone_point = |p: &w2tree::boundary::ConePoint| {
                let mut o = Map::new();
                if let Some(e) = p.end {
                    o.insert("end".into(), json!(end_name(&tree, e)));
                }
                o.insert("speed".into(), json!(fmt_num(p.speed)));
                Value::Object(o)
            };
            json!({
                "distance": fmt_fixed(w.distance),
                "certificate_gap": fmt_fixed(w.certificate_gap),
                "plan": w.plan.iter().map(|&(i, j, m)| json!({
                    "source": cone_point(&a.atoms()[i].0),
                    "target": cone_point(&b.atoms()[j].0),
                    "mass": fmt_num(m),
                })).collect::<Vec<_>>(),
            })
        }
        Command::Flows(e) => {
            let tree = tree_of(&e.tree)?;
            let (minus, plus) = boundary_pair(&tree, &e)?;
            let ft = flow_table(&tree, &minus, &plus)?;
            json!({
                "edges": tree.edge_ids().map(|id| {
                    let edge = tree.edge(id);
                    let f = ft.edge_flow[id.0];
                    json!({
                        "edge": edge.name,
                        "from": tree.vertex_name(edge.tail),
                        "to": edge.head.map(|h| tree.vertex_name(h).to_string()),
                        "flow": fmt_fixed(f),
                        "sign": sign_name(FlowSign::of(f)),
                    })
                }).collect::<Vec<_>>(),
                "vertices": tree.vertices().map(|v| json!({
                    "vertex": tree.vertex_name(v),
                    "flow": fmt_fixed(ft.vertex_flow[v.0]),
                    "specific_flow": fmt_fixed(ft.specific_flow[v.0]),
                    "basepoint_distance": fmt_fixed(ft.basepoint_distance[v.0]),
                })).collect::<Vec<_>>(),
            })
        }
        Command::Realizability { ends, depth } => {
            let mut tree = tree_of(&ends.tree)?;
            if let Some(d) = depth {
                tree = tree.with_truncation_depth(d);
            }
            let (minus, plus) = boundary_pair(&tree, &ends)?;
            let r = realizability_sum(&tree, &flow_table(&tree, &minus, &plus)?);
            realizability_json(&r)
        }
        Command::BuildGeodesic(e) => {
            let tree = tree_of(&e.tree)?;
            let (minus, plus) = boundary_pair(&tree, &e)?;
            let c = construct_geodesic(&tree, &minus, &plus)?;
            let cert = &c.certificate;
            info!(
                "build-geodesic: {} geodesics, certificate passed {}",
                c.plan.len(),
                cert.passed(1e-9)
            );
            json!({
                "plan": io::dynamical_plan_to_json(&tree, &c.plan),
                "coupling": c.transport.plan.iter().map(|&(a, b, m)| json!({
                    "from_end": end_name(&tree, a),
                    "to_end": end_name(&tree, b),
                    "mass": fmt_num(m),
                })).collect::<Vec<_>>(),
                "d0_value": fmt_fixed(c.transport.value),
                "realizability": realizability_json(&c.realizability),
                "certificate": {
                    "passed": cert.passed(1e-9),
                    "unit_speed": cert.unit_speed,
                    "antagonist_free": cert.antagonist_free,
                    "ends_match": cert.ends_match,
                    "edge_gap": fmt_fixed(cert.edge_gap),
                    "vertex_gap": fmt_fixed(cert.vertex_gap),
                    "specific_gap": cert.specific_gap.map(fmt_fixed),
                    "second_moment": fmt_fixed(cert.second_moment),
                    "flow_sum": fmt_fixed(cert.flow_sum),
                },
            })
        }
        Command::Radon {
            tree,
            h,
            mu,
            geodesic,
        } => {
            let tree = tree_of(&tree)?;
            match (h, mu, geodesic) {
                (Some(h), _, _) => {
                    let h = parsed("h", io::read_vertex_function(&tree, &load(&h)?))?;
                    let data = combinatorial_radon(&tree, &h)?;
                    io::radon_data_to_json(&tree, &data, h.total())
                }
                (None, Some(mu), Some(g)) => {
                    let mu = parsed("mu", io::read_measure(&tree, &load(&mu)?))?;
                    let g = parsed("geodesic", io::read_geodesic(&tree, &load(&g)?))?;
                    io::measure_to_json(&tree, &radon_measure(&tree, &mu, &g)?)
                }
                _ => bail!(InputError(
                    "radon needs --h, or --mu with --geodesic".into()
                )),
            }
        }
        Command::RadonInvert { tree, data, total } => {
            let tree = tree_of(&tree)?;
            let (data, recorded) = parsed("data", io::read_radon_data(&tree, &load(&data)?))?;
            let total = match total {
                Some(t) => io::parse_num(&t).map_err(|e| InputError(format!("total: {e}")))?,
                None => recorded.ok_or_else(|| {
                    InputError("no total: pass --total or record it in the data".into())
                })?,
            };
            io::vertex_function_to_json(&tree, &radon_invert(&tree, &data, total)?)
        }
        Command::Comb {
            depth,
            mass_exponent,
            full,
        } => {
            let c = comb_generator(depth, mass_exponent)?;
            let r = realizability_sum(&c.tree, &flow_table(&c.tree, &c.nu_minus, &c.nu_plus)?);
            info!(
                "comb: depth {depth}, exponent {mass_exponent}, verdict {}",
                r.verdict
            );
            let mut out = Map::new();
            out.insert("depth".into(), json!(depth));
            out.insert("mass_exponent".into(), json!(fmt_num(mass_exponent)));
            out.insert("realizability".into(), realizability_json(&r));
            if full {
                out.insert("tree".into(), io::tree_to_json(&c.tree));
                out.insert(
                    "nu_minus".into(),
                    io::boundary_measure_to_json(&c.tree, &c.nu_minus),
                );
                out.insert(
                    "nu_plus".into(),
                    io::boundary_measure_to_json(&c.tree, &c.nu_plus),
                );
            }
            Value::Object(out)
        }
    }))
}

fn sign_name(s: FlowSign) -> &'static str {
    match s {
        FlowSign::Positive => "positive",
        FlowSign::Negative => "negative",
        FlowSign::Neutral => "neutral",
    }
}

fn boundary_pair(
    tree: &MetricTree,
    e: &EndsArgs,
) -> Result<(w2tree::ends::BoundaryMeasure, w2tree::ends::BoundaryMeasure)> {
    Ok((
        parsed(
            "nu-minus",
            io::read_boundary_measure(tree, &load(&e.nu_minus)?),
        )?,
        parsed(
            "nu-plus",
            io::read_boundary_measure(tree, &load(&e.nu_plus)?),
        )?,
    ))
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.chain().any(|c| c.is::<InputError>()) {
        2
    } else {
        1
    }
}

fn main() -> ExitCode {
    let level = match std::env::var("W2_LOG").as_deref() {
        Err(_) | Ok("") | Ok("quiet") => LevelFilter::Off,
        Ok("info") => LevelFilter::Info,
        Ok("debug") => LevelFilter::Debug,
        Ok(other) => {
            eprintln!("error: W2_LOG must be quiet, info or debug, not `{other}`");
            return ExitCode::from(2);
        }
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .format_target(false)
        .init();
    let cli = Cli::parse();
    let result = run(cli.command).and_then(|out| {
        let text = match out {
            Output::Json(v) => format!("{}\n", serde_json::to_string_pretty(&v)?),
            Output::Text(t) => t,
        };
        match &cli.out {
            Some(path) => {
                fs::write(path, text).with_context(|| format!("cannot write `{}`", path.display()))
            }
            None => std::io::stdout()
                .write_all(text.as_bytes())
                .map_err(|e| anyhow!("cannot write output: {e}")),
        }
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
