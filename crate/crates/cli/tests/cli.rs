use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn ptho(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_ptho"));
    cmd.args(args).env_remove("PTHO_SEED").env_remove("PTHO_TOL").env_remove("PTHO_DEFAULT_GRID_N");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn temp_path(name: &str) -> PathBuf {
    std::env::temp_dir().join(format!("ptho-{}-{name}", std::process::id()))
}

#[test]
fn spectrum_csv_layout() {
    let out = ptho(&["spectrum", "--output-format", "csv", "--g-min=-0.5", "--g-max", "0", "--steps", "3", "--n-levels", "2"], &[]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "G,n,Q,re_E,im_E");
    assert_eq!(lines.len(), 1 + 3 * 4);
    // G = -1/2: Im E = ∓2·(1/2) on the two branches
    let first: Vec<&str> = lines[1].split(',').collect();
    assert_eq!(first[0].parse::<f64>().unwrap(), -0.5);
    assert_eq!(first[4].parse::<f64>().unwrap().abs(), 1.0);
    // G = -1/4: both branches meet at 4n + 2
    let at_quarter: Vec<Vec<f64>> = lines[5..9]
        .iter()
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert!(at_quarter.iter().all(|r| r[0] == -0.25 && r[4] == 0.0 && r[3] == 4.0 * r[1] + 2.0));
}

#[test]
fn json_reports_carry_the_schema() {
    for args in [
        vec!["ep-table", "--k", "1,2"],
        vec!["metric", "--k", "0", "--alpha", "0.3", "--m", "2"],
        vec!["factor", "--k", "1", "--alpha", "1.2", "--m", "2", "--b", "0.5"],
        vec!["evolve", "--k", "0", "--alpha", "0.4", "--m", "2", "--t-final", "1", "--rows", "10"],
    ] {
        let mut full = args.clone();
        full.extend(["--output-format", "json"]);
        let out = ptho(&full, &[]);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        let v = json(&out);
        for key in ["schema_version", "command", "params", "results", "thresholds", "pass"] {
            assert!(v.get(key).is_some(), "{args:?} lacks {key}");
        }
        assert_eq!(v["command"], args[0]);
    }
}

#[test]
fn verify_passes_for_a_consistent_configuration() {
    let out = ptho(&["verify", "--k", "0", "--alpha", "0.1", "--m", "4", "--b", "0", "--output-format", "json"], &[]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["pass"], Value::Bool(true));
    let r = &v["results"];
    for key in ["dieudonne_residual", "l_space_cholesky", "l_space_trig"] {
        assert!(r[key].as_f64().unwrap() < 1e-10, "{key}");
    }
    assert!(r["metric_min_eigenvalue"].as_f64().unwrap() > 0.0);
    assert!(r["evolution_drift"].as_f64().unwrap() <= 1e-7);
}

#[test]
fn verify_rejects_exceptional_point() {
    let out = ptho(&["verify", "--k", "1", "--alpha", "1.0"], &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("exceptional point: no metric exists"), "{err}");
}

#[test]
fn verify_names_the_violated_threshold() {
    let out = ptho(&["verify", "--k", "0", "--alpha", "0.2", "--m", "2", "--tol", "1e-30", "--output-format", "json"], &[]);
    assert_eq!(out.status.code(), Some(4));
    assert_eq!(json(&out)["pass"], Value::Bool(false));
    assert!(String::from_utf8(out.stderr).unwrap().contains("dieudonne_residual"));
}

#[test]
fn validation_errors_exit_with_two() {
    for args in [
        vec!["spectrum", "--g-min", "2", "--g-max", "1"],
        vec!["metric", "--k", "0", "--alpha", "0.3", "--b", "1.5"],
        vec!["discretize", "--alpha", "0.5", "--points", "15"],
        vec!["discretize", "--alpha", "0.5", "--order", "3"],
        vec!["evolve", "--k", "0", "--alpha", "0.3", "--m", "1", "--dt", "1"],
        vec!["metric", "--k", "0", "--alpha", "0.3", "--m", "3", "--b", "0.1,0.2"],
    ] {
        let out = ptho(&args, &[]);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
}

#[test]
fn seeded_runs_are_byte_identical() {
    let args = |path: &str| {
        vec![
            "verify".to_owned(),
            "--k".into(),
            "2".into(),
            "--alpha".into(),
            "2.15".into(),
            "--m".into(),
            "3".into(),
            "--b".into(),
            "random".into(),
            "--seed".into(),
            "7".into(),
            "--output-format".into(),
            "json".into(),
            "--output".into(),
            path.into(),
        ]
    };
    let (a, b) = (temp_path("a.json"), temp_path("b.json"));
    for path in [&a, &b] {
        let list = args(path.to_str().unwrap());
        let refs: Vec<&str> = list.iter().map(String::as_str).collect();
        assert!(ptho(&refs, &[]).status.success());
    }
    let (ra, rb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ra, rb);
    let bs = serde_json::from_slice::<Value>(&ra).unwrap()["params"]["b"].clone();
    assert_eq!(bs.as_array().unwrap().len(), 3);
    let _ = std::fs::remove_file(a);
    let _ = std::fs::remove_file(b);
}

#[test]
fn environment_sets_defaults_and_flags_win() {
    let base = ["metric", "--k", "0", "--alpha", "0.3", "--m", "2", "--b", "random", "--output-format", "json"];
    let b_of = |out: &Output| json(out)["params"]["b"].clone();
    let from_env = b_of(&ptho(&base, &[("PTHO_SEED", "9")]));
    let mut flagged = base.to_vec();
    flagged.extend(["--seed", "9"]);
    assert_eq!(from_env, b_of(&ptho(&flagged, &[])));
    let mut override_env = base.to_vec();
    override_env.extend(["--seed", "3"]);
    assert_ne!(from_env, b_of(&ptho(&override_env, &[("PTHO_SEED", "9")])));

    let out = ptho(&["discretize", "--alpha", "0.5", "--output-format", "json"], &[("PTHO_DEFAULT_GRID_N", "60")]);
    assert_eq!(json(&out)["params"]["N"], 60);
    let out = ptho(&["verify", "--k", "0", "--alpha", "0.3", "--m", "2", "--output-format", "json"], &[("PTHO_TOL", "1e-30")]);
    assert_eq!(out.status.code(), Some(4));
}

#[test]
fn discretize_reports_accuracy_and_phase() {
    let out = ptho(&["discretize", "--alpha", "0.5", "--points", "400", "--output-format", "json"], &[]);
    assert!(out.status.success());
    let v = json(&out);
    assert_eq!(v["results"]["rows"].as_array().unwrap().len(), 6);
    assert!(v["results"]["max_error"].as_f64().unwrap() < 1e-4);
    assert_eq!(v["results"]["broken_phase"], Value::Bool(false));

    let out = ptho(&["discretize", "--coupling=-0.5", "--points", "200", "--output-format", "json"], &[]);
    let v = json(&out);
    assert_eq!(v["results"]["broken_phase"], Value::Bool(true));
    assert!(v["results"]["max_imag"].as_f64().unwrap() > 0.1);

    // the coarsest admissible grid reports large errors without failing
    let out = ptho(&["discretize", "--alpha", "0.5", "--points", "16", "--n-levels", "3", "--output-format", "json"], &[]);
    assert!(out.status.success());
    let err = json(&out)["results"]["max_error"].as_f64().unwrap();
    assert!(err.is_finite() && err > 1e-3);
}

#[test]
fn discretize_refinement_ratios() {
    let out = ptho(
        &["discretize", "--alpha", "0.5", "--points", "99", "--refine", "--output-format", "json"],
        &[],
    );
    let v = json(&out);
    let ratios = v["results"]["refinement"]["ratios"].as_array().unwrap();
    assert!(ratios.iter().all(|r| r.as_f64().unwrap() >= 12.0), "{ratios:?}");
}

#[test]
fn evolve_trace_is_sampled() {
    let out = ptho(
        &["evolve", "--k", "1", "--alpha", "1.3", "--m", "2", "--t-final", "2", "--rows", "5", "--output-format", "csv"],
        &[],
    );
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "step,t,theta_norm,k_norm,theta_drift");
    assert!(lines.len() >= 6 && lines.len() <= 7, "{}", lines.len());
    let last: Vec<f64> = lines.last().unwrap().split(',').map(|x| x.parse().unwrap()).collect();
    assert!((last[1] - 2.0).abs() < 1e-12);
    assert!(last[4] < 1e-10);
}

#[test]
fn pretty_output_is_default() {
    let out = ptho(&["ep-table", "--k", "0"], &[]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("# ep-table"));
    assert!(text.contains("E_0^(+)=E_0^(-)"));
}
