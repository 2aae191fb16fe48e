use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("waffle-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

/// Runs the binary; returns (exit code, parsed report, raw stdout).
fn waffle(args: &[&str]) -> (i32, Value, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_waffle")).args(args).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let report = serde_json::from_str(&text).unwrap_or(Value::Null);
    (out.status.code().unwrap(), report, text)
}

fn with_input(cmd: &str, file: &PathBuf) -> (i32, Value, String) {
    waffle(&[cmd, "--input", file.to_str().unwrap()])
}

fn edited(name: &str, f: impl Fn(&mut Value)) -> PathBuf {
    let mut v: Value = serde_json::from_str(&std::fs::read_to_string(data(name)).unwrap()).unwrap();
    f(&mut v);
    let p = scratch(&format!("{}-{name}", std::thread::current().name().unwrap_or("t").replace("::", "_")));
    std::fs::write(&p, serde_json::to_string_pretty(&v).unwrap()).unwrap();
    p
}

#[test]
fn minimal_certifies() {
    let (code, r, _) = with_input("certify", &data("minimal.json"));
    assert_eq!(code, 0);
    assert_eq!(r["outcome"]["kind"], "certificate");
    let stages: Vec<&str> = r["stages"].as_array().unwrap().iter().map(|s| s["stage"].as_str().unwrap()).collect();
    assert_eq!(stages, ["strands", "clutching", "balance", "group", "certify"]);
}

#[test]
fn tree_records_derived_coweights() {
    let (code, r, _) = with_input("group", &data("tree.json"));
    assert_eq!(code, 0);
    let cw = &r["stages"][0]["result"]["coweights"];
    assert_eq!(cw[1]["coweight"], 3);
    assert_eq!(cw[1]["mode"], "derived");
    assert_eq!(cw[1]["derivation"], "flap family 2 of churro c");
    // w1 — c — w2 with cowt 2, 3: A_w1 = L(3), A_w2 = L(2)
    let aug = &r["stages"][1]["result"]["augmentation"];
    assert_eq!(aug[0]["flap_contribution"], "3");
    assert_eq!(aug[1]["flap_contribution"], "2");
    assert!(r["stages"][1]["result"]["tree_edges"].as_array().unwrap().iter().all(|m| m["strict"] == true));
}

#[test]
fn unbalanced_cycle_is_an_obstruction() {
    let (code, r, _) = with_input("certify", &data("unbalanced.json"));
    assert_eq!(code, 2);
    let d = &r["outcome"]["diagnostic"];
    assert_eq!(r["outcome"]["stage"], "group");
    assert_eq!((d["odd_product"].as_str(), d["even_product"].as_str()), (Some("2"), Some("1")));
    assert_eq!(d["mismatch"]["iso"], false);
    let (code, r, _) = with_input("balance", &data("unbalanced.json"));
    assert_eq!(code, 2);
    assert_eq!(r["outcome"]["diagnostic"]["cycle"].as_array().unwrap().len(), 4);
}

#[test]
fn non_filling_curve_names_its_chamber() {
    let (code, r, _) = with_input("check-filling", &data("nonfilling.json"));
    assert_eq!(code, 3);
    let d = &r["outcome"]["diagnostic"];
    assert!(d["witness"]["chamber"].is_u64());
    assert_eq!(d["witness"]["bounded"], false);
    assert_eq!(d["report"]["filling"], false);
}

#[test]
fn schema_errors() {
    let p = edited("minimal.json", |v| {
        v["edges"][0]["colour"] = "red".into();
    });
    let (code, r, _) = with_input("balance", &p);
    assert_eq!(code, 3);
    let e = &r["outcome"]["diagnostic"]["errors"][0];
    assert_eq!(e["kind"], "SchemaError");
    assert_eq!(e["field"], "colour");
    assert_eq!(e["path"], "edges[0].colour");
    assert!(e["line"].as_u64().unwrap() > 1);

    let p = edited("minimal.json", |v| {
        v["edges"][0]["from"] = "c".into();
        v["edges"][0]["to"] = "w".into();
    });
    let (code, r, _) = with_input("balance", &p);
    assert_eq!(code, 3);
    assert_eq!(r["outcome"]["diagnostic"]["errors"][0]["kind"], "OrientationViolation");

    let (code, r, _) = with_input("balance", &scratch("does-not-exist.json"));
    assert_eq!(code, 3);
    assert_eq!(r["outcome"]["diagnostic"]["errors"][0]["kind"], "Io");

    let cfg = scratch("bad-config.json");
    std::fs::write(&cfg, r#"{ "tolerances": { "ratio_mach": 1e-6 } }"#).unwrap();
    let (code, r, _) = waffle(&["balance", "--input", data("tree.json").to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 3);
    assert_eq!(r["outcome"]["diagnostic"]["errors"][0]["field"], "ratio_mach");
}

#[test]
fn reports_are_byte_identical() {
    let a = waffle(&["certify", "--input", data("tree.json").to_str().unwrap()]).2;
    let b = waffle(&["certify", "--input", data("tree.json").to_str().unwrap()]).2;
    assert_eq!(a, b);
    let out = scratch("report.json");
    let (code, _, stdout) = waffle(&["certify", "--input", data("tree.json").to_str().unwrap(), "--output", out.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(stdout.is_empty());
    assert_eq!(std::fs::read_to_string(&out).unwrap(), a);
}

#[test]
fn tolerances_are_traced() {
    let cfg = scratch("config.json");
    std::fs::write(&cfg, r#"{ "tolerances": { "ratio_match": 1e-6 }, "seed": 9 }"#).unwrap();
    let p = edited("tree.json", |v| {
        v["tolerances"] = serde_json::json!({ "filling_margin": 0.75 });
    });
    let (code, r, _) = waffle(&["balance", "--input", p.to_str().unwrap(), "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 0);
    let t = &r["configuration"]["tolerances"];
    assert_eq!(t["ratio_match"]["value"], 1e-6);
    assert_eq!(t["ratio_match"]["source"], "config");
    assert_eq!(t["filling_margin"]["source"], "input");
    assert_eq!(t["endpoint"]["source"], "default");
    assert_eq!(r["configuration"]["seed"], 9);
}

#[test]
fn windows_pipeline_with_figures() {
    let dir = scratch("figures");
    let (code, r, _) = waffle(&["certify", "--input", data("filling_pair.json").to_str().unwrap(), "--figures", dir.to_str().unwrap()]);
    assert_eq!(code, 0, "{r}");
    let strands = &r["stages"][2]["result"]["edges"];
    for e in strands.as_array().unwrap() {
        // alpha crosses beta four times per period
        assert!((e["tau"].as_f64().unwrap() - 4.0).abs() < 1e-9);
        assert_eq!(e["mode"], "windows");
    }
    let fill = &r["stages"][0]["result"]["surfaces"][0];
    assert_eq!((fill["crossing_orbits"].as_u64(), fill["euler_characteristic"].as_i64()), (Some(4), Some(-2)));
    assert_eq!(r["stages"][1]["result"]["surfaces"][0]["dimension"], 2);
    let figures = r["figures"].as_array().unwrap();
    assert_eq!(figures.len(), 6);
    for f in figures {
        let body = std::fs::read_to_string(dir.join(f.as_str().unwrap())).unwrap();
        assert!(body.starts_with("<svg") && body.trim_end().ends_with("</svg>"));
    }
}

#[test]
fn supplied_taus_are_cross_checked_against_windows() {
    let p = edited("filling_pair.json", |v| {
        v["edges"][0]["tau"] = 2.0.into();
        v["edges"][1]["tau"] = 2.0.into();
    });
    let (code, r, _) = with_input("clutching", &p);
    assert_eq!(code, 0);
    let c = &r["stages"][1]["result"]["churros"][0];
    assert_eq!(c["cross_check"]["matched"], true);
    assert_eq!(c["flaps"][0]["mode"], "supplied");

    let p = edited("filling_pair.json", |v| {
        v["edges"][0]["tau"] = 2.0.into();
        v["edges"][1]["tau"] = 3.0.into();
    });
    let (code, r, _) = with_input("clutching", &p);
    assert_eq!(code, 2);
    assert_eq!(r["outcome"]["diagnostic"]["flaps"], serde_json::json!(["e1", "e2"]));
}

#[test]
fn missing_tau_without_window_is_a_precondition() {
    let p = edited("minimal.json", |v| {
        v["edges"][0].as_object_mut().unwrap().remove("tau");
    });
    let (code, r, _) = with_input("certify", &p);
    assert_eq!(code, 3);
    assert_eq!(r["outcome"]["stage"], "strands");
}

#[test]
fn oracles() {
    let (code, r, _) = waffle(&["oracle", "quadrature", "--seed", "4"]);
    assert_eq!(code, 0);
    assert!(r["result"]["quadrature_error"].as_f64().unwrap() <= 1e-5);
    assert_eq!(r["configuration"]["seed"], 4);

    let (code, r, _) = waffle(&["oracle", "clique", "--input", data("filling_pair.json").to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["surfaces"][0]["max_crossing_clique"], 2);

    let (code, r, _) = waffle(&["oracle", "automorphisms", "--input", data("nonfilling.json").to_str().unwrap()]);
    assert_eq!(code, 0, "{r}");

    let (code, _, _) = waffle(&["oracle", "clique"]);
    assert_eq!(code, 3);
}

#[test]
fn bad_arguments_are_preconditions() {
    let (code, _, _) = waffle(&["certify", "--bogus"]);
    assert_eq!(code, 3);
    let (code, _, _) = waffle(&["--help"]);
    assert_eq!(code, 0);
}
