use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const TRIPOD: &str = r#"{"vertices":["o","a","b","c"],"edges":[
  {"id":"ea","ends":["o","a"],"length":"1"},
  {"id":"eb","ends":["o","b"],"length":"1"},
  {"id":"ec","ends":["o","c"],"length":"1"}],"basepoint":{"vertex":"o"}}"#;

const BARBELL: &str = r#"{"vertices":["u","v"],"edges":[
  {"id":"uv","ends":["u","v"],"length":"1"},
  {"id":"ray1","ends":["u"],"length":"inf"},{"id":"ray2","ends":["u"],"length":"inf"},
  {"id":"ray3","ends":["v"],"length":"inf"},{"id":"ray4","ends":["v"],"length":"inf"}],
  "basepoint":{"vertex":"u"}}"#;

const STAR3: &str = r#"{"vertices":["o"],"edges":[
  {"id":"r1","ends":["o"],"length":"inf"},
  {"id":"r2","ends":["o"],"length":"inf"},
  {"id":"r3","ends":["o"],"length":"inf"}]}"#;

struct Sandbox {
    dir: TempDir,
}

impl Sandbox {
    fn new() -> Self {
        Sandbox {
            dir: TempDir::new().unwrap(),
        }
    }

    fn file(&self, name: &str, text: &str) -> String {
        let p = self.dir.path().join(name);
        fs::write(&p, text).unwrap();
        p.to_string_lossy().into_owned()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }
}

fn w2tree(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_w2tree"))
        .args(args)
        .env_remove("W2_LOG")
        .output()
        .unwrap()
}

fn ok_json(args: &[&str]) -> Value {
    let out = w2tree(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    w2tree(args).status.code().unwrap()
}

fn read(p: &Path) -> String {
    fs::read_to_string(p).unwrap()
}

#[test]
fn w2_tripod_and_plan_round_trip() {
    let s = Sandbox::new();
    let tree = s.file("tripod.json", TRIPOD);
    let a = s.file(
        "a.json",
        r#"{"atoms":[{"point":{"vertex":"a"},"mass":"1"}]}"#,
    );
    let bc = s.file(
        "bc.json",
        r#"{"atoms":[{"point":{"vertex":"b"},"mass":"0.5"},{"point":{"vertex":"c"},"mass":"0.5"}]}"#,
    );
    let out = s.path("w2.json");
    let status = w2tree(&[
        "w2",
        "--tree",
        &tree,
        "--mu",
        &a,
        "--nu",
        &bc,
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(status.status.success());
    assert!(status.stdout.is_empty());
    let v: Value = serde_json::from_str(&read(&out)).unwrap();
    assert_eq!(v["distance"], "2.000000000000");
    assert_eq!(v["plan"].as_array().unwrap().len(), 2);

    // the emitted plan is accepted back as an input
    let cert = ok_json(&[
        "certify-plan",
        "--tree",
        &tree,
        "--plan",
        out.to_str().unwrap(),
    ]);
    assert_eq!(cert["monotone"], true);
    assert_eq!(cert["cost"], "4.000000000000");
}

#[test]
fn non_optimal_plan_gets_a_witness() {
    let s = Sandbox::new();
    let tree = s.file("tripod.json", TRIPOD);
    let plan = r#"{"plan":[
        {"source":{"vertex":"a"},"target":{"vertex":"b"},"mass":"0.5"},
        {"source":{"vertex":"b"},"target":{"vertex":"a"},"mass":"0.5"}]}"#;
    let cert = ok_json(&["certify-plan", "--tree", &tree, "--plan", plan]);
    assert_eq!(cert["monotone"], false);
    assert_eq!(cert["witness"]["cycle"].as_array().unwrap().len(), 2);
}

#[test]
fn interpolation_plan_certifies_as_optimal() {
    let s = Sandbox::new();
    let tree = s.file("tripod.json", TRIPOD);
    let mu = r#"{"atoms":[{"point":{"vertex":"a"},"mass":"0.5"},{"point":{"vertex":"b"},"mass":"0.5"}]}"#;
    let nu = r#"{"atoms":[{"point":{"vertex":"c"},"mass":"0.5"},{"point":{"edge":"ea","offset":"0.5"},"mass":"0.5"}]}"#;
    let v = ok_json(&[
        "interpolate",
        "--tree",
        &tree,
        "--mu",
        mu,
        "--nu",
        nu,
        "--t",
        "0.5",
        "--t",
        "1",
    ]);
    let measures = v["measures"].as_array().unwrap();
    assert_eq!(measures.len(), 2);
    let plan = s.file("plan.json", &v["plan"].to_string());
    let cert = ok_json(&["certify-plan", "--tree", &tree, "--plan", &plan]);
    assert_eq!(cert["kind"], "dynamical");
    assert_eq!(cert["optimal"], true);
    assert_eq!(cert["consistent"], true);

    // the slice at t = 1 is the target measure and feeds back into w2
    let end = s.file("end.json", &measures[1]["measure"].to_string());
    let w = ok_json(&["w2", "--tree", &tree, "--mu", &end, "--nu", nu]);
    assert_eq!(w["distance"], "0.000000000000");
}

#[test]
fn asymptotic_star_table() {
    let s = Sandbox::new();
    let tree = s.file("star3.json", STAR3);
    let ray = |end: &str, m: &str| {
        format!(
            r#"{{"geodesic":{{"ray":{{"from":{{"vertex":"o"}},"end":"{end}","speed":"1"}}}},"mass":"{m}"}}"#
        )
    };
    let mu = s.file(
        "m.json",
        &format!(r#"{{"atoms":[{},{}]}}"#, ray("r1", "0.5"), ray("r2", "0.5")),
    );
    let sigma = s.file("s.json", &format!(r#"{{"atoms":[{}]}}"#, ray("r1", "1")));
    let out = w2tree(&[
        "asymptotic",
        "--tree",
        &tree,
        "--mu",
        &mu,
        "--sigma",
        &sigma,
        "--grid",
        "default",
    ]);
    assert!(out.status.success());
    let csv = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,ratio,target,abs_error");
    assert_eq!(lines.len(), 7);
    assert_eq!(
        lines.last().unwrap().split(',').nth(2).unwrap(),
        format!("{:.12}", 2f64.sqrt())
    );

    let v = ok_json(&[
        "asymptotic",
        "--tree",
        &tree,
        "--mu",
        &mu,
        "--sigma",
        &sigma,
        "--grid",
        "1,2,4",
        "--json",
    ]);
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    assert_eq!(v["monotone"], true);
    assert_eq!(v["certified_limit"], v["target"]);
}

#[test]
fn radon_and_inversion() {
    let s = Sandbox::new();
    let tree = s.file("barbell.json", BARBELL);
    let data = s.path("r.json");
    let st = w2tree(&[
        "radon",
        "--tree",
        &tree,
        "--h",
        r#"{"u":"2","v":"5"}"#,
        "--out",
        data.to_str().unwrap(),
    ]);
    assert!(st.status.success());
    let d: Value = serde_json::from_str(&read(&data)).unwrap();
    assert_eq!(d["total"], "7");
    assert_eq!(d["flags"].as_array().unwrap().len(), 6);

    let h = ok_json(&[
        "radon-invert",
        "--tree",
        &tree,
        "--data",
        data.to_str().unwrap(),
        "--total",
        "7",
    ]);
    assert_eq!(h, serde_json::json!({"u": "2", "v": "5"}));
    // total read from the file
    let h = ok_json(&[
        "radon-invert",
        "--tree",
        &tree,
        "--data",
        data.to_str().unwrap(),
    ]);
    assert_eq!(h, serde_json::json!({"u": "2", "v": "5"}));

    // the wrong total contradicts the flag values
    assert_eq!(
        code(&[
            "radon-invert",
            "--tree",
            &tree,
            "--data",
            data.to_str().unwrap(),
            "--total",
            "8"
        ]),
        1
    );
    // bare-array data without a total
    let bare = s.file("bare.json", &d["flags"].to_string());
    assert_eq!(code(&["radon-invert", "--tree", &tree, "--data", &bare]), 2);
    // leaves make the transform undefined
    let tripod = s.file("tripod.json", TRIPOD);
    assert_eq!(
        code(&["radon", "--tree", &tripod, "--h", r#"{"o":"1"}"#]),
        1
    );
}

#[test]
fn radon_projection_of_a_measure() {
    let s = Sandbox::new();
    let tree = s.file("barbell.json", BARBELL);
    let mu = r#"{"atoms":[{"point":{"edge":"ray3","offset":"2"},"mass":"1"}]}"#;
    let g = r#"{"line":{"from_end":"ray1","to_end":"ray2"}}"#;
    let v = ok_json(&["radon", "--tree", &tree, "--mu", mu, "--geodesic", g]);
    assert_eq!(v["atoms"][0]["point"]["vertex"], "u");
    assert_eq!(v["atoms"][0]["mass"], "1");
}

#[test]
fn ends_commands() {
    let s = Sandbox::new();
    let tree = s.file("barbell.json", BARBELL);
    let minus = s.file(
        "m.json",
        r#"{"atoms":[{"end":"ray3","mass":"0.5"},{"end":"ray1","mass":"0.5"}]}"#,
    );
    let plus = s.file(
        "p.json",
        r#"{"atoms":[{"end":"ray4","mass":"0.5"},{"end":"ray2","mass":"0.5"}]}"#,
    );
    let args = [
        "--tree",
        tree.as_str(),
        "--nu-minus",
        minus.as_str(),
        "--nu-plus",
        plus.as_str(),
    ];

    let flows = ok_json(&[&["flows"], &args[..]].concat());
    assert_eq!(flows["edges"].as_array().unwrap().len(), 5);
    let uv = &flows["edges"][0];
    assert_eq!(
        (
            uv["edge"].as_str(),
            uv["flow"].as_str(),
            uv["sign"].as_str()
        ),
        (Some("uv"), Some("0.000000000000"), Some("neutral"))
    );

    let r = ok_json(&[&["realizability"], &args[..]].concat());
    assert_eq!(r["verdict"], "FINITE");
    assert_eq!(r["value"], "0.500000000000");

    let g = ok_json(&[&["build-geodesic"], &args[..]].concat());
    assert_eq!(g["certificate"]["passed"], true);
    assert_eq!(g["d0_value"], "-0.500000000000");
    let plan = s.file("plan.json", &g["plan"].to_string());
    let cert = ok_json(&["certify-plan", "--tree", &tree, "--plan", &plan]);
    assert_eq!(cert["optimal"], true);
    assert_eq!(cert["complete"]["unit_speed"], true);

    // shared end: not antipodal
    assert_eq!(
        code(&[
            "build-geodesic",
            "--tree",
            &tree,
            "--nu-minus",
            &minus,
            "--nu-plus",
            &minus
        ]),
        1
    );
}

#[test]
fn comb_verdicts_and_full_output() {
    let v = ok_json(&["comb", "--depth", "4096", "--mass-exponent", "3"]);
    assert_eq!(v["realizability"]["verdict"], "DIVERGES");
    let v = ok_json(&["comb", "--depth", "4096", "--mass-exponent", "4"]);
    assert_eq!(v["realizability"]["verdict"], "CONVERGES");

    let s = Sandbox::new();
    let v = ok_json(&["comb", "--depth", "8", "--mass-exponent", "3", "--full"]);
    let tree = s.file("comb.json", &v["tree"].to_string());
    let minus = s.file("m.json", &v["nu_minus"].to_string());
    let plus = s.file("p.json", &v["nu_plus"].to_string());
    let r = ok_json(&[
        "realizability",
        "--tree",
        &tree,
        "--nu-minus",
        &minus,
        "--nu-plus",
        &plus,
        "--depth",
        "8",
    ]);
    assert_eq!(r, v["realizability"]);
    assert_eq!(
        code(&[
            "build-geodesic",
            "--tree",
            &tree,
            "--nu-minus",
            &minus,
            "--nu-plus",
            &plus
        ]),
        0
    );
    assert_eq!(code(&["comb", "--depth", "1", "--mass-exponent", "3"]), 1);
}

#[test]
fn w_infinity_visibility() {
    let s = Sandbox::new();
    let tree = s.file("star3.json", STAR3);
    let v = ok_json(&[
        "w-infinity",
        "--tree",
        &tree,
        "--mu",
        r#"{"atoms":[{"end":"r1","speed":"1","mass":"1"}]}"#,
        "--nu",
        r#"{"atoms":[{"end":"r2","speed":"1","mass":"1"}]}"#,
    ]);
    assert_eq!(v["distance"], "2.000000000000");
    let v = ok_json(&[
        "w-infinity",
        "--tree",
        &tree,
        "--mu",
        r#"{"atoms":[{"speed":"0","mass":"1"}]}"#,
        "--nu",
        r#"{"atoms":[{"end":"r2","speed":"3","mass":"1"}]}"#,
    ]);
    assert_eq!(v["distance"], "3.000000000000");
    assert!(v["plan"][0]["source"].get("end").is_none());
}

#[test]
fn validate_and_distance() {
    let s = Sandbox::new();
    let tree = s.file("tripod.json", TRIPOD);
    let v = ok_json(&["validate", "--tree", &tree]);
    assert_eq!(v["valid"], true);
    assert_eq!(v["leaves"], serde_json::json!(["a", "b", "c"]));
    assert_eq!(v["radon_ready"], false);

    let d = ok_json(&[
        "distance",
        "--tree",
        &tree,
        "--x",
        r#"{"vertex":"a"}"#,
        "--y",
        r#"{"edge":"eb","offset":"1/4"}"#,
    ]);
    assert_eq!(d["distance"], "1.250000000000");

    let cycle = r#"{"vertices":["a","b"],"edges":[{"id":"e","ends":["a","b"],"length":1},{"id":"f","ends":["a","b"],"length":1}]}"#;
    assert_eq!(code(&["validate", "--tree", cycle]), 1);
    let negative = r#"{"vertices":["a","b"],"edges":[{"id":"e","ends":["a","b"],"length":"-1"}]}"#;
    assert_eq!(code(&["validate", "--tree", negative]), 1);
}

#[test]
fn exit_codes_and_environment() {
    let s = Sandbox::new();
    let tree = s.file("tripod.json", TRIPOD);
    let a = r#"{"atoms":[{"point":{"vertex":"a"},"mass":"1"}]}"#;
    assert_eq!(
        code(&["w2", "--tree", &tree, "--mu", "{\"atoms\":[", "--nu", a]),
        2
    );
    assert_eq!(
        code(&[
            "w2",
            "--tree",
            "/nonexistent/tree.json",
            "--mu",
            a,
            "--nu",
            a
        ]),
        2
    );
    assert_eq!(code(&["w2", "--tree", &tree, "--mu", a]), 2);
    assert_eq!(code(&["no-such-command"]), 2);
    // unknown vertex and non-probability masses are domain errors
    assert_eq!(
        code(&[
            "w2",
            "--tree",
            &tree,
            "--mu",
            a,
            "--nu",
            r#"{"atoms":[{"point":{"vertex":"z"},"mass":"1"}]}"#
        ]),
        1
    );
    assert_eq!(
        code(&[
            "w2",
            "--tree",
            &tree,
            "--mu",
            a,
            "--nu",
            r#"{"atoms":[{"point":{"vertex":"b"},"mass":"0.4"}]}"#
        ]),
        1
    );

    let bad = Command::new(env!("CARGO_BIN_EXE_w2tree"))
        .args(["validate", "--tree", &tree])
        .env("W2_LOG", "loud")
        .output()
        .unwrap();
    assert_eq!(bad.status.code(), Some(2));
    let info = Command::new(env!("CARGO_BIN_EXE_w2tree"))
        .args(["w2", "--tree", &tree, "--mu", a, "--nu", a])
        .env("W2_LOG", "info")
        .output()
        .unwrap();
    assert!(info.status.success());
    assert!(String::from_utf8_lossy(&info.stderr).contains("INFO"));
}

#[test]
fn output_is_deterministic() {
    let s = Sandbox::new();
    let tree = s.file("barbell.json", BARBELL);
    let minus = s.file(
        "m.json",
        r#"{"atoms":[{"end":"ray1","mass":"1/3"},{"end":"ray3","mass":"2/3"}]}"#,
    );
    let plus = s.file(
        "p.json",
        r#"{"atoms":[{"end":"ray2","mass":"1/2"},{"end":"ray4","mass":"1/2"}]}"#,
    );
    let run = || {
        w2tree(&[
            "build-geodesic",
            "--tree",
            &tree,
            "--nu-minus",
            &minus,
            "--nu-plus",
            &plus,
        ])
        .stdout
    };
    let first = run();
    assert!(!first.is_empty());
    assert_eq!(first, run());
}

#[test]
fn help_documents_the_schemas() {
    let out = w2tree(&["--help"]);
    let text = String::from_utf8(out.stdout).unwrap();
    for field in [
        "vertices",
        "edges",
        "basepoint",
        "offset",
        "atoms",
        "mass",
        "geodesic",
        "tail_coord",
        "speed",
        "flags",
        "total",
        "W2_LOG",
    ] {
        assert!(text.contains(field), "missing `{field}` in --help");
    }
    let out = w2tree(&["radon-invert", "--help"]);
    assert!(String::from_utf8(out.stdout).unwrap().contains("--total"));
}
