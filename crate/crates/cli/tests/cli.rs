use std::path::{Path, PathBuf};

use vetra_cli::config::ConfigFile;
use vetra_cli::{parse_config, parse_config_str, run, ConfigError};

fn example(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples").join(name)
}

fn run_in(out: &Path, args: &[&str]) -> i32 {
    let mut full = vec!["vetra".to_string()];
    full.extend(args.iter().map(|s| s.to_string()));
    full.extend(["--out".to_string(), out.display().to_string()]);
    run(full)
}

fn minimal() -> serde_json::Value {
    serde_json::json!({
        "schema": 1,
        "chain": {
            "omega": [0.0, 1.0, 0.0],
            "g": [0.5, 1.5, 0.5],
            "lambda": 0.1,
            "kappa": 0.2,
            "gamma": 1100.0,
            "nbar": 5.0
        },
        "integration": { "horizon": 20.0, "samples": 21 }
    })
}

fn write_json(dir: &Path, name: &str, v: &serde_json::Value) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

#[test]
fn bundled_configs_parse() {
    for name in [
        "detuned_chain.json",
        "frequency_disorder.json",
        "coupling_disorder.json",
        "coherence_pair.json",
        "weak_site.json",
        "weak_site_physical.json",
        "n2_adiabatic.json",
    ] {
        parse_config(&example(name)).unwrap_or_else(|e| panic!("{name}: {e}"));
    }
}

#[test]
fn detuned_chain_file_matches_preset() {
    let rc = parse_config(&example("detuned_chain.json")).unwrap();
    assert_eq!(rc.chain.params(), vetra::presets::detuned_chain_default::<f64>().params());
    assert_eq!(rc.grid, Some(vetra::presets::detuned_grid()));
    let (vib, bare) = vetra::presets::coherence_pair::<f64>();
    let rc4 = parse_config(&example("coherence_pair.json")).unwrap();
    assert_eq!(rc4.chain.params(), vib.params());
    assert_eq!(rc4.coherence_reference().unwrap().params(), bare.params());
    let rc2 = parse_config(&example("frequency_disorder.json")).unwrap();
    let spec = rc2.disorder.unwrap();
    assert_eq!(spec.means, vetra::presets::frequency_disorder::<f64>(1000, 0).means);
    assert_eq!(spec.n_realizations, 1000);
}

#[test]
fn physical_block_routes_through_bridge() {
    let a = parse_config(&example("weak_site_physical.json")).unwrap();
    let b = parse_config(&example("weak_site.json")).unwrap();
    for (x, y) in a.chain.g().iter().zip(b.chain.g()) {
        assert!((x - y).abs() < 1e-15);
    }
    let mut v = minimal();
    v["chain"].as_object_mut().unwrap().remove("gamma");
    assert!(matches!(
        parse_config_str(&v.to_string()),
        Err(ConfigError::Schema { ref field, .. }) if field == "gamma"
    ));
    v["physical"] = serde_json::to_value(vetra_cli::config::PhysicalSection::from(
        vetra::experiments::PhysicalParams::gaas_beam(),
    ))
    .unwrap();
    let rc = parse_config_str(&v.to_string()).unwrap();
    assert!((rc.chain.gamma() - 0.01).abs() < 1e-15);
    assert!((rc.chain.g()[1] - 0.045).abs() < 1e-15);
}

#[test]
fn empty_file_is_parse_error() {
    assert!(matches!(parse_config_str(""), Err(ConfigError::Parse(_))));
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("empty.json");
    std::fs::write(&p, "").unwrap();
    assert!(matches!(parse_config(&p), Err(ConfigError::Parse(_))));
}

#[test]
fn length_mismatch_names_g() {
    let mut v = minimal();
    v["chain"]["n_sites"] = 3.into();
    v["chain"]["g"] = serde_json::json!([0.5, 1.5]);
    let err = parse_config_str(&v.to_string()).unwrap_err();
    assert!(matches!(&err, ConfigError::Schema { field, .. } if field == "g"));
    assert!(err.to_string().contains("`g`"));

    let mut v = minimal();
    v["chain"]["g"] = serde_json::json!([0.5]);
    let err = parse_config_str(&v.to_string()).unwrap_err();
    assert!(err.to_string().contains("`g`"));
}

#[test]
fn unknown_keys_rejected() {
    let mut v = minimal();
    v["chain"]["temperature"] = 4.0.into();
    let err = parse_config_str(&v.to_string()).unwrap_err().to_string();
    assert!(err.contains("temperature"), "{err}");
    assert!(err.contains("line"), "{err}");
    let mut v = minimal();
    v["extra"] = 1.into();
    assert!(parse_config_str(&v.to_string()).is_err());
}

#[test]
fn schema_version_and_invariants() {
    let mut v = minimal();
    v["schema"] = 2.into();
    assert!(matches!(
        parse_config_str(&v.to_string()),
        Err(ConfigError::Schema { ref field, .. }) if field == "schema"
    ));
    let mut v = minimal();
    v["chain"]["lambda"] = (-0.1).into();
    assert!(matches!(parse_config_str(&v.to_string()), Err(ConfigError::Model(_))));
    let mut v = minimal();
    v["initial"] = serde_json::json!({ "site": 7 });
    assert!(parse_config_str(&v.to_string()).is_err());
}

#[test]
fn simulate_writes_documented_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(dir.path(), "c.json", &minimal());
    let out = dir.path().join("out");
    assert_eq!(run_in(&out, &["simulate", "--config", cfg.to_str().unwrap(), "--svg"]), 0);
    let csv = std::fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,p0,p1,p2,p3,re_s03,im_s03,trace,efficiency"
    );
    assert_eq!(csv.lines().count(), 22);
    assert!(!csv.contains('\r'));
    for line in csv.lines().skip(1) {
        let vals: Vec<f64> = line.split(',').map(|f| f.parse().unwrap()).collect();
        assert_eq!(vals.len(), 9);
        // Conservation: trace + efficiency = 1.
        assert!((vals[7] + vals[8] - 1.0).abs() < 1e-8);
    }
    assert!(out.join("trajectory.svg").exists());
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("simulate.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "simulate");
    assert_eq!(manifest["outputs"][0], "trajectory.csv");
    assert_eq!(manifest["tolerances"]["rel"], 1e-8);
}

#[test]
fn sweep_csv_is_reproducible_and_unaffected_by_svg() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(dir.path(), "c.json", &minimal());
    let c = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run_in(&a, &["sweep", "--config", c, "--beta0", "0:2:5"]), 0);
    assert_eq!(run_in(&b, &["sweep", "--config", c, "--beta0", "0:2:5", "--svg"]), 0);
    let ca = std::fs::read(a.join("sweep.csv")).unwrap();
    assert_eq!(ca, std::fs::read(b.join("sweep.csv")).unwrap());
    let text = String::from_utf8(ca).unwrap();
    assert!(text.starts_with("beta0,efficiency,baseline\n"));
    assert_eq!(text.lines().count(), 6);
    assert!(!a.join("sweep.svg").exists());
    assert!(b.join("sweep.svg").exists());
}

#[test]
fn manifest_config_reproduces_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(dir.path(), "c.json", &minimal());
    let a = dir.path().join("a");
    let args = ["sweep", "--config", cfg.to_str().unwrap(), "--beta0", "0:1:3", "--horizon", "15"];
    assert_eq!(run_in(&a, &args), 0);
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("sweep.manifest.json")).unwrap()).unwrap();
    let file: ConfigFile = serde_json::from_value(manifest["config"].clone()).unwrap();
    let replay = write_json(dir.path(), "replay.json", &serde_json::to_value(file).unwrap());
    let b = dir.path().join("b");
    assert_eq!(run_in(&b, &["sweep", "--config", replay.to_str().unwrap()]), 0);
    assert_eq!(
        std::fs::read(a.join("sweep.csv")).unwrap(),
        std::fs::read(b.join("sweep.csv")).unwrap()
    );
}

#[test]
fn ensemble_independent_of_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = minimal();
    v["disorder"] = serde_json::json!({
        "target": "couplings",
        "std": 0.3,
        "n_realizations": 5,
        "master_seed": 11
    });
    let cfg = write_json(dir.path(), "c.json", &v);
    let c = cfg.to_str().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(run_in(&a, &["ensemble", "--config", c, "--beta0", "0:2:3", "--workers", "1"]), 0);
    assert_eq!(run_in(&b, &["ensemble", "--config", c, "--beta0", "0:2:3", "--workers", "3"]), 0);
    let ca = std::fs::read_to_string(a.join("ensemble.csv")).unwrap();
    assert_eq!(ca, std::fs::read_to_string(b.join("ensemble.csv")).unwrap());
    assert!(ca.starts_with("beta0,efficiency,stderr,baseline\n"));
    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("ensemble.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 11);

    let c2 = dir.path().join("c");
    assert_eq!(
        run_in(&c2, &["ensemble", "--config", c, "--beta0", "0:2:3", "--seed", "12"]),
        0
    );
    assert_ne!(ca, std::fs::read_to_string(c2.join("ensemble.csv")).unwrap());
}

#[test]
fn ensemble_without_disorder_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(dir.path(), "c.json", &minimal());
    assert_eq!(run_in(dir.path(), &["ensemble", "--config", cfg.to_str().unwrap()]), 1);
}

#[test]
fn resonance_report_lists_suppression_points() {
    let dir = tempfile::tempdir().unwrap();
    let detuned_chain = example("detuned_chain.json");
    assert_eq!(run_in(dir.path(), &["resonance", "--config", detuned_chain.to_str().unwrap()]), 0);
    let text = std::fs::read_to_string(dir.path().join("resonance.txt")).unwrap();
    assert!(text.contains("1.3547"));
    assert!(text.contains("2.4804"));
    assert!(text.contains("heuristic"));
    let csv = std::fs::read_to_string(dir.path().join("resonance.csv")).unwrap();
    assert!(csv.starts_with("bond,delta_omega,delta_g,order,k,suppression_beta0,window_lo,window_hi\n"));
}

#[test]
fn coherence_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let pair = example("coherence_pair.json");
    let args = ["coherence", "--config", pair.to_str().unwrap(), "--horizon", "10", "--svg"];
    assert_eq!(run_in(dir.path(), &args), 0);
    let csv = std::fs::read_to_string(dir.path().join("coherence.csv")).unwrap();
    assert!(csv.starts_with("t,with_vibration,without_vibration\n"));
    assert_eq!(csv.lines().count(), 1002);
    assert!(dir.path().join("coherence.svg").exists());
}

#[test]
fn validate_short_run_within_tolerance() {
    let dir = tempfile::tempdir().unwrap();
    let n2 = example("n2_adiabatic.json");
    let args = ["validate", "--config", n2.to_str().unwrap(), "--horizon", "4"];
    assert_eq!(run_in(dir.path(), &args), 0);
    let text = std::fs::read_to_string(dir.path().join("validate.txt")).unwrap();
    assert!(text.contains("within tolerance"));
}

#[test]
fn convert_units_defaults() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run_in(dir.path(), &["convert-units"]), 0);
    let v: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.path().join("units.json")).unwrap()).unwrap();
    assert!((v["g_model"].as_f64().unwrap() - 0.03).abs() < 1e-12);
    let phys = example("weak_site_physical.json");
    assert_eq!(
        run_in(dir.path(), &["convert-units", "--config", phys.to_str().unwrap()]),
        0
    );
    let detuned_chain = example("detuned_chain.json");
    assert_eq!(
        run_in(dir.path(), &["convert-units", "--config", detuned_chain.to_str().unwrap()]),
        1
    );
}

#[test]
fn bad_flags_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(dir.path(), "c.json", &minimal());
    let c = cfg.to_str().unwrap();
    assert_eq!(run_in(dir.path(), &["sweep", "--config", c, "--beta0", "3:0:5"]), 1);
    assert_eq!(run_in(dir.path(), &["simulate", "--config", c, "--rel-tol=-1"]), 1);
    assert_eq!(run_in(dir.path(), &["simulate", "--config", "/no/such/file.json"]), 1);
}

#[test]
fn numerical_failure_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = minimal();
    v["chain"]["beta0"] = 2.0.into();
    v["integration"]["rel_tol"] = 1e-15.into();
    v["integration"]["abs_tol"] = 1e-300.into();
    let cfg = write_json(dir.path(), "c.json", &v);
    let code = run_in(dir.path(), &["simulate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code, 2);
}
