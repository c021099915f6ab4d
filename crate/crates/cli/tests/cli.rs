use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn comcat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_comcat")).args(args).env_remove("COMCAT_TOLERANCE").output().unwrap()
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("stdout is not json: {e}\n{}", String::from_utf8_lossy(&out.stdout)))
}

fn write(dir: &Path, name: &str, v: &Value) -> String {
    let p = dir.join(name);
    std::fs::write(&p, v.to_string()).unwrap();
    p.to_str().unwrap().to_string()
}

#[test]
fn report_envelope_and_hash() {
    let out = comcat(&["validate", "builtin:classical3"]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(&out);
    assert_eq!(r["schema_version"], "comcat.report/1");
    assert_eq!(r["body"]["command"], "validate");
    assert_eq!(r["body"]["verdict"], "verified");
    assert_eq!(r["body"]["result"]["dim"], 3);
    assert!(r["meta"]["runtime_ms"].is_u64());
    let hash = hex::encode(Sha256::digest(r["body"].to_string().as_bytes()));
    assert_eq!(r["body_sha256"], hash);
}

#[test]
fn seed_and_tolerance_are_recorded() {
    let r = report(&comcat(&["--seed", "7", "--tolerance", "1e-6", "validate", "builtin:gbit"]));
    assert_eq!(r["body"]["seed"], 7);
    assert_eq!(r["body"]["tolerance"], 1e-6);
    let env = Command::new(env!("CARGO_BIN_EXE_comcat")).args(["validate", "builtin:gbit"]).env("COMCAT_TOLERANCE", "1e-7").output().unwrap();
    assert_eq!(report(&env)["body"]["tolerance"], 1e-7);
}

#[test]
fn broken_model_is_refuted_with_a_witness() {
    let dir = tempfile::tempdir().unwrap();
    // an "effect" that is negative on a state
    let model = serde_json::json!({
        "label": "broken",
        "state_cone": { "kind": "polyhedral", "generators": [["1", "0"], ["0", "1"]] },
        "effect_cone": { "kind": "polyhedral", "generators": [["1", "-1"], ["0", "1"]] },
        "unit": ["1", "1"]
    });
    let path = write(dir.path(), "broken.json", &model);
    let out = comcat(&["validate", &path]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out);
    assert_eq!(r["body"]["verdict"], "refuted");
    assert!(!r["body"]["result"]["violations"].as_array().unwrap().is_empty());
    assert_eq!(r["body"]["inputs"][0]["name"], path.as_str());
}

#[test]
fn usage_and_input_errors_exit_2() {
    for args in [
        &["validate", "builtin:nonsense"][..],
        &["validate", "/definitely/not/here.json"],
        &["tensor", "--kind", "spatial", "builtin:gbit", "builtin:gbit"],
        &["--tolerance", "-1", "validate", "builtin:gbit"],
        &["wsd", "builtin:qubit"],
        &["bogus-command"],
    ] {
        let out = comcat(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn tensor_output_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sq.json");
    let out = comcat(&["-o", path.to_str().unwrap(), "tensor", "--kind", "max", "builtin:gbit", "builtin:gbit"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(report(&out)["body"]["result"]["check"]["is_composite"], true);
    let back = comcat(&["validate", path.to_str().unwrap()]);
    assert_eq!(back.status.code(), Some(0), "{}", String::from_utf8_lossy(&back.stdout));
    assert_eq!(report(&back)["body"]["result"]["dim"], 9);
}

#[test]
fn teleport_verdicts() {
    let ok = comcat(&["teleport", "builtin:classical2", "builtin:classical2", "--composite", "min"]);
    assert_eq!(ok.status.code(), Some(0));
    assert_eq!(report(&ok)["body"]["result"]["certificate"]["c"], "1/2");
    let none = comcat(&["teleport", "builtin:gbit", "builtin:gbit", "--composite", "max"]);
    assert_eq!(none.status.code(), Some(1));
    let dir = tempfile::tempdir().unwrap();
    let cand = write(dir.path(), "cand.json", &serde_json::json!({ "omega": { "matrix": [[0.5, 0.0], [0.0, 0.5]] } }));
    let bad = comcat(&["teleport", "builtin:qubit", "builtin:qubit", "--composite", "spatial", "--candidate", &cand]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn dagger_and_self_duality() {
    assert_eq!(comcat(&["dagger", "builtin:qubit"]).status.code(), Some(0));
    assert_eq!(comcat(&["dagger", "builtin:gbit-rotation"]).status.code(), Some(1));
    let r = report(&comcat(&["wsd", "builtin:gbit", "--symmetric"]));
    assert_eq!(r["body"]["verdict"], "verified");
}

#[test]
fn theory_structures_map() {
    let dir = tempfile::tempdir().unwrap();
    let refl = write(dir.path(), "r.json", &serde_json::json!({ "objects": ["builtin:gbit"], "structures": { "gbit": "builtin:gbit-reflection" } }));
    assert_eq!(comcat(&["dagger", &refl]).status.code(), Some(0));
    let rot = write(dir.path(), "t.json", &serde_json::json!({ "objects": ["builtin:gbit"], "structures": { "gbit": "builtin:gbit-rotation" } }));
    assert_eq!(comcat(&["dagger", &rot]).status.code(), Some(1));
    let unknown = write(dir.path(), "u.json", &serde_json::json!({ "objects": ["builtin:gbit"], "structures": { "nope": "builtin:gbit-rotation" } }));
    assert_eq!(comcat(&["dagger", &unknown]).status.code(), Some(2));
}

#[test]
fn theory_composite_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let bb = dir.path().join("bb.json");
    assert_eq!(comcat(&["-o", bb.to_str().unwrap(), "tensor", "--kind", "min", "builtin:classical2", "builtin:classical2"]).status.code(), Some(0));
    let custom = write(
        dir.path(),
        "c.json",
        &serde_json::json!({ "objects": ["builtin:classical2"], "composites": [{ "a": "classical2", "b": "classical2", "com": bb.to_str().unwrap() }] }),
    );
    let out = comcat(&["compact-check", &custom]);
    assert_eq!(out.status.code(), Some(0));
    // the composite file is recorded as an input
    assert_eq!(report(&out)["body"]["inputs"].as_array().unwrap().len(), 2);

    let gbits = write(
        dir.path(),
        "g.json",
        &serde_json::json!({ "objects": ["builtin:gbit"], "composite": "max", "composites": [{ "a": "gbit", "b": "gbit", "kind": "min" }] }),
    );
    assert_eq!(comcat(&["compact-check", &gbits]).status.code(), Some(1));

    // a 4-dimensional composite for two squares is rejected on load
    let wrong = write(
        dir.path(),
        "w.json",
        &serde_json::json!({ "objects": ["builtin:gbit"], "composites": [{ "a": "gbit", "b": "gbit", "com": bb.to_str().unwrap() }] }),
    );
    assert_eq!(comcat(&["compact-check", &wrong]).status.code(), Some(2));
}

#[test]
fn verdicts_do_not_depend_on_the_seed() {
    let runs: &[&[&str]] = &[
        &["validate", "builtin:pentagon"],
        &["tensor", "--kind", "min", "builtin:gbit", "builtin:classical2"],
        &["teleport", "builtin:qubit", "builtin:qubit", "--composite", "spatial"],
        &["dagger", "builtin:qubit"],
        &["wsd", "builtin:gbit"],
    ];
    for args in runs {
        let verdicts: Vec<Value> = ["1", "2", "99"]
            .iter()
            .map(|seed| {
                let mut full = vec!["--seed", seed];
                full.extend_from_slice(args);
                report(&comcat(&full))["body"]["verdict"].clone()
            })
            .collect();
        assert!(verdicts.windows(2).all(|w| w[0] == w[1]), "{args:?}: {verdicts:?}");
    }
}

#[test]
fn structure_uris_in_wsd_and_theories() {
    let r = report(&comcat(&["wsd", "builtin:qubit", "--structure", "builtin:qubit"]));
    assert_eq!(r["body"]["verdict"], "verified");
    let r = report(&comcat(&["wsd", "builtin:gbit", "--structure", "builtin:gbit-rotation"]));
    assert_eq!(r["body"]["result"]["structure"]["symmetry_equivalence"]["ii"], false);

    let dir = tempfile::tempdir().unwrap();
    let theory = serde_json::json!({
        "objects": ["builtin:classical2", "builtin:gbit-reflection", { "com": "builtin:qubit", "structure": "builtin:qubit" }],
        "composites": [{ "a": "qubit", "b": "qubit", "kind": "spatial" }],
    });
    let path = write(dir.path(), "theory.json", &theory);
    let out = comcat(&["compact-check", &path]);
    assert_eq!(out.status.code(), Some(1));
    let partners: Vec<Value> = report(&out)["body"]["result"]["objects"].as_array().unwrap().iter().map(|o| o["partner"].clone()).collect();
    assert_eq!(partners, [Value::from("classical2"), Value::Null, Value::from("qubit")]);
    assert_eq!(comcat(&["dagger", &path]).status.code(), Some(0));
}
