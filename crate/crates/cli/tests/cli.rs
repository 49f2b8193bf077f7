use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::Arc;

use muxlock::corpus::{self, SynthSpec};
use muxlock::{write_netlist, CellLibrary};
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_muxlock"))
}

fn run(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn lib() -> Arc<CellLibrary> {
    Arc::new(CellLibrary::builtin())
}

fn write_design(dir: &Path, name: &str) -> PathBuf {
    let n = corpus::load(name, lib()).unwrap();
    let p = dir.join(format!("{name}.bench"));
    fs::write(&p, write_netlist(&n)).unwrap();
    p
}

fn json(bytes: &[u8]) -> Value {
    serde_json::from_slice(bytes).expect("valid json")
}

fn strip_timings(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("timings");
    v
}

#[test]
fn analyze_c17() {
    let d = tempfile::tempdir().unwrap();
    write_design(d.path(), "c17");
    let out = run(d.path(), &["analyze", "c17.bench"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out.stdout);
    let a = &v["analysis"];
    assert_eq!(a["ffs"], 0);
    assert_eq!(a["uncovered_nets"], 0);
    assert_eq!(a["covered_nets"], a["nets"]);
    assert_eq!(a["site_usage"]["total"], 36);
    for field in ["lock", "verification", "attack", "export"] {
        assert!(v[field].is_null(), "{field}");
    }
    assert_eq!(v["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn analyze_counts_low_controllability() {
    let d = tempfile::tempdir().unwrap();
    let text = "INPUT(a)\nINPUT(b)\nINPUT(c)\nINPUT(e)\nINPUT(f)\nINPUT(g)\nINPUT(h)\nINPUT(i)\nOUTPUT(y)\n\
                p = AND4(a, b, c, e)\nq = AND4(f, g, h, i)\ny = AND2(p, q)\n";
    fs::write(d.path().join("rare.bench"), text).unwrap();
    let v = json(&run(d.path(), &["analyze", "rare.bench"]).stdout);
    assert!(v["analysis"]["lcn"].as_u64().unwrap() >= 1);
    assert!(v["analysis"]["lcc"].as_u64().unwrap() >= 1);
}

#[test]
fn io_errors_exit_2() {
    let d = tempfile::tempdir().unwrap();
    write_design(d.path(), "c17");
    let out = run(d.path(), &["analyze", "c17.bench", "--lib", "missing.lib"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.lib"));
    assert_eq!(run(d.path(), &["analyze", "missing.bench"]).status.code(), Some(2));
    fs::write(d.path().join("bad.bench"), "INPUT(a\n").unwrap();
    assert_eq!(run(d.path(), &["analyze", "bad.bench"]).status.code(), Some(2));

    assert!(run(d.path(), &["lock", "c17.bench", "-o", "l"]).status.success());
    let out = run(d.path(), &["attack", "l.bench", "--key", "missing.key"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn semantic_errors_exit_3() {
    let d = tempfile::tempdir().unwrap();
    write_design(d.path(), "s27");
    fs::write(d.path().join("assets"), "G5\nNOPE\n").unwrap();
    let out = run(d.path(), &["lock", "s27.bench", "--assets", "assets", "-o", "l"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("NOPE"));

    assert!(run(d.path(), &["lock", "s27.bench", "-o", "l"]).status.success());
    fs::write(d.path().join("short.key"), "k=1\n0\n").unwrap();
    let out = run(d.path(), &["verify", "s27.bench", "l.bench", "--key", "short.key"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn lock_is_deterministic() {
    let d = tempfile::tempdir().unwrap();
    write_design(d.path(), "c432_like");
    for prefix in ["a", "b"] {
        let out = run(d.path(), &["lock", "c432_like.bench", "--seed", "7", "-o", prefix]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    let read = |f: &str| fs::read(d.path().join(f)).unwrap();
    assert_eq!(read("a.bench"), read("b.bench"));
    assert_eq!(read("a.key"), read("b.key"));

    let report = |f: &str| {
        let mut v = strip_timings(json(&read(f)));
        let lock = v["lock"].as_object_mut().unwrap();
        lock.remove("bench");
        lock.remove("key");
        v
    };
    assert_eq!(report("a.report.json"), report("b.report.json"));
}

#[test]
fn seeds_change_the_key() {
    let d = tempfile::tempdir().unwrap();
    write_design(d.path(), "c880_like");
    for (seed, prefix) in [("7", "s7"), ("8", "s8")] {
        let out = run(d.path(), &["lock", "c880_like.bench", "--seed", seed, "--no-verify", "-o", prefix]);
        assert!(out.status.success());
    }
    let k7 = fs::read_to_string(d.path().join("s7.key")).unwrap();
    let k8 = fs::read_to_string(d.path().join("s8.key")).unwrap();
    let len = |k: &str| k.lines().nth(1).unwrap().len();
    assert!(len(&k7) >= 64, "key length {}", len(&k7));
    assert_ne!(k7.lines().nth(1), k8.lines().nth(1));
    let v = json(&fs::read(d.path().join("s7.report.json")).unwrap());
    assert!(v["lock"]["harden"]["verification"].is_null());
}

#[test]
fn ten_assets_all_locked() {
    let d = tempfile::tempdir().unwrap();
    let spec = SynthSpec { inputs: 8, outputs: 6, gates: 80, ffs: 10, seed: 10 };
    let n = corpus::synthesize(spec, lib());
    fs::write(d.path().join("ten.bench"), write_netlist(&n)).unwrap();
    let names: Vec<String> = (0..10).map(|i| format!("R{i}")).collect();
    fs::write(d.path().join("assets"), names.join("\n")).unwrap();
    let out = run(d.path(), &["lock", "ten.bench", "--assets", "assets", "-o", "t"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&fs::read(d.path().join("t.report.json")).unwrap());
    assert_eq!(v["lock"]["lsa"], "10/10");
    let locked: Vec<&str> = v["lock"]["records"].as_array().unwrap().iter().map(|r| r["locked_cell"].as_str().unwrap()).collect();
    for name in &names {
        assert!(locked.contains(&name.as_str()), "{name}");
    }
}

#[test]
fn lock_verify_attack_export_round_trip() {
    let d = tempfile::tempdir().unwrap();
    write_design(d.path(), "s344_like");
    assert!(run(d.path(), &["lock", "s344_like.bench", "-o", "l"]).status.success());

    let out = run(d.path(), &["verify", "s344_like.bench", "l.bench", "--key", "l.key"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let v = json(&out.stdout);
    assert_eq!(v["verification"]["equivalent"], true);
    assert_eq!(v["verification"]["verdict"]["mode"], "exhaustive");

    let key = fs::read_to_string(d.path().join("l.key")).unwrap();
    let bits = key.lines().nth(1).unwrap();
    let wrong: String = bits.chars().map(|c| if c == '0' { '1' } else { '0' }).collect();
    fs::write(d.path().join("wrong.key"), format!("k={}\n{wrong}\n", bits.len())).unwrap();
    let out = run(d.path(), &["verify", "s344_like.bench", "l.bench", "--key", "wrong.key"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(json(&out.stdout)["verification"]["equivalent"], false);

    let out = run(d.path(), &["attack", "l.bench", "--key", "l.key", "-o", "attack.json"]);
    assert!(out.status.success());
    let v = json(&fs::read(d.path().join("attack.json")).unwrap());
    let a = &v["attack"];
    assert_eq!(a["predictions"].as_str().unwrap().len(), bits.len());
    assert_eq!(a["probe"]["nonzero"], 0);
    assert!(a["ac"].as_f64().unwrap() <= a["pc"].as_f64().unwrap());

    let out = run(d.path(), &["export", "l.bench", "--ffs-as-pseudo-io", "-o", "ex.bench"]);
    assert!(out.status.success());
    let text = fs::read_to_string(d.path().join("ex.bench")).unwrap();
    assert!(!text.contains("MUX2"));
    assert!(text.contains("keyinput0"));
}

#[test]
fn explicit_floorplan() {
    let d = tempfile::tempdir().unwrap();
    write_design(d.path(), "c17");
    let v = json(&run(d.path(), &["analyze", "c17.bench", "--rows", "4", "--sites-per-row", "10"]).stdout);
    assert_eq!(v["analysis"]["site_usage"]["total"], 40);
    let out = run(d.path(), &["analyze", "c17.bench", "--rows", "4"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(d.path(), &["lock", "c17.bench", "--rows", "1", "--sites-per-row", "5", "-o", "x"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn naive_scheme_is_broken() {
    let d = tempfile::tempdir().unwrap();
    write_design(d.path(), "c2670_like");
    let out = run(d.path(), &["lock", "c2670_like.bench", "--scheme", "naive", "--no-verify", "-o", "n"]);
    assert!(out.status.success());
    let v = json(&run(d.path(), &["attack", "n.bench", "--key", "n.key", "--no-probe"]).stdout);
    assert!(v["attack"]["ac"].as_f64().unwrap() > 70.0, "{}", v["attack"]["ac"]);
    assert!(v["attack"]["probe"].is_null());
}
