//! End-to-end pipeline tests driving the `mfcforge` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mfcforge"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn mfcforge")
}

fn tmpdir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("mfcforge-cli-{name}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_params(dir: &Path) -> PathBuf {
    let path = dir.join("params.json");
    fs::write(
        &path,
        r#"{"m": 1372.0, "vx": 9.72, "Iz": 1990.0, "Cf": 37022.5, "Cr": 35900.0, "lf": 0.98, "lr": 1.48}"#,
    )
    .unwrap();
    path
}

fn build_plant(dir: &Path) -> PathBuf {
    let params = write_params(dir);
    let plant = dir.join("plant.json");
    let out = run(&[
        "plant",
        "--params",
        params.to_str().unwrap(),
        "--ts",
        "0.05",
        "--out",
        plant.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    plant
}

#[test]
fn plant_stage_writes_degree_4_model() {
    let dir = tmpdir("plant");
    let plant = build_plant(&dir);
    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&plant).unwrap()).unwrap();
    assert_eq!(parsed["ts"], 0.05);
    let den = parsed["tf"]["den"].as_array().unwrap();
    assert_eq!(den.len(), 5); // monic degree-4 denominator
    assert_eq!(den[4], 1.0);
    let num = parsed["tf"]["num"].as_array().unwrap();
    assert!(num.len() <= 4);
    // Continuous A matrix selector row.
    assert_eq!(parsed["continuous"]["a"][0][1], 1.0);
}

#[test]
fn plant_stage_rejects_missing_key() {
    let dir = tmpdir("badparams");
    let params = dir.join("params.json");
    fs::write(
        &params,
        r#"{"m": 1372.0, "Iz": 1990.0, "Cf": 37022.5, "Cr": 35900.0, "lf": 0.98, "lr": 1.48}"#,
    )
    .unwrap();
    let out = run(&[
        "plant",
        "--params",
        params.to_str().unwrap(),
        "--out",
        dir.join("plant.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
}

#[test]
fn stabset_rejects_invalid_sweep() {
    let dir = tmpdir("badsweep");
    let plant = build_plant(&dir);
    let out = run(&[
        "stabset",
        "--plant",
        plant.to_str().unwrap(),
        "--kind",
        "pid",
        "--gate-lo",
        "0",
        "--gate-hi",
        "0.28",
        "--steps",
        "1",
        "--out",
        dir.join("set.json").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

fn build_set(dir: &Path, plant: &Path) -> PathBuf {
    let set = dir.join("set.json");
    let out = run(&[
        "stabset",
        "--plant",
        plant.to_str().unwrap(),
        "--kind",
        "pid",
        "--filter-c",
        "4",
        "--gate-lo",
        "0.0",
        "--gate-hi",
        "0.28",
        "--steps",
        "80",
        "--param-lo",
        "-40",
        "--param-hi",
        "40",
        "--out",
        set.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    set
}

#[test]
fn full_pipeline_runs_and_reruns_identically() {
    let dir = tmpdir("pipeline");
    let plant = build_plant(&dir);
    let set = build_set(&dir, &plant);

    let parsed: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&set).unwrap()).unwrap();
    assert_eq!(parsed["empty"], false);
    assert!(parsed["slices"].as_array().unwrap().len() > 10);

    // Determinism: byte-identical set file on rerun.
    let first = fs::read(&set).unwrap();
    build_set(&dir, &plant);
    assert_eq!(
        first,
        fs::read(&set).unwrap(),
        "set file changed between reruns"
    );

    // Transform to an iPD cloud.
    let cloud = dir.join("cloud.csv");
    let out = run(&[
        "transform",
        "--set",
        set.to_str().unwrap(),
        "--method",
        "nonlinear",
        "--grid",
        "12",
        "--out",
        cloud.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&cloud).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "K3,K1,K2,Kp,Kd,alpha");
    assert!(lines.count() > 20);

    // Filter the cloud with time-response bounds.
    let subset = dir.join("subset.csv");
    let report = dir.join("report.json");
    let out = run(&[
        "filter",
        "--cloud",
        cloud.to_str().unwrap(),
        "--plant",
        plant.to_str().unwrap(),
        "--os-max",
        "40",
        "--st-max",
        "15",
        "--band",
        "0.02",
        "--out",
        subset.to_str().unwrap(),
        "--report",
        report.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let subset_text = fs::read_to_string(&subset).unwrap();
    assert!(subset_text.lines().next().unwrap() == "K3,K1,K2,Kp,Kd,alpha");
    let survivors = subset_text.lines().count() - 1;
    assert!(survivors > 0, "time-response subset is empty");
    let report_json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert!(report_json["candidates"].as_array().unwrap().len() > survivors);

    // Refiltering the subset with the same bounds keeps everything.
    let subset2 = dir.join("subset2.csv");
    let out = run(&[
        "filter",
        "--cloud",
        subset.to_str().unwrap(),
        "--plant",
        plant.to_str().unwrap(),
        "--os-max",
        "40",
        "--st-max",
        "15",
        "--band",
        "0.02",
        "--out",
        subset2.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    assert_eq!(
        fs::read_to_string(&subset).unwrap(),
        fs::read_to_string(&subset2).unwrap(),
        "refiltering is not idempotent"
    );
}

#[test]
fn filter_requires_bounds() {
    let dir = tmpdir("nobounds");
    let plant = build_plant(&dir);
    let set = build_set(&dir, &plant);
    let out = run(&[
        "filter",
        "--set",
        set.to_str().unwrap(),
        "--plant",
        plant.to_str().unwrap(),
        "--out",
        dir.join("subset.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn transform_rejects_pi_sets() {
    let dir = tmpdir("pikind");
    let plant = build_plant(&dir);
    let set = dir.join("set_pi.json");
    let out = run(&[
        "stabset",
        "--plant",
        plant.to_str().unwrap(),
        "--kind",
        "pi",
        "--filter-c",
        "4",
        "--gate-lo",
        "-2",
        "--gate-hi",
        "2",
        "--steps",
        "40",
        "--out",
        set.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let out = run(&[
        "transform",
        "--set",
        set.to_str().unwrap(),
        "--out",
        dir.join("cloud.csv").to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("kind_mismatch"));
}

fn write_controller(dir: &Path, kp: f64, kd: f64, alpha: f64) -> PathBuf {
    let path = dir.join("controller.json");
    fs::write(
        &path,
        format!(r#"{{"Kp": {kp}, "Kd": {kd}, "alpha": {alpha}, "n": 2, "C": 4.0, "Ts": 0.05}}"#),
    )
    .unwrap();
    path
}

#[test]
fn simulate_and_margins_on_case_study_controller() {
    let dir = tmpdir("simulate");
    let plant = build_plant(&dir);
    let ctrl = write_controller(&dir, 0.00093, 0.043, 315.7);
    let trace = dir.join("trace.csv");
    let metrics = dir.join("metrics.json");
    let out = run(&[
        "simulate",
        "--plant",
        plant.to_str().unwrap(),
        "--controller",
        ctrl.to_str().unwrap(),
        "--ref",
        "step",
        "--n",
        "1200",
        "--out",
        trace.to_str().unwrap(),
        "--metrics",
        metrics.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&trace).unwrap();
    assert_eq!(text.lines().next().unwrap(), "t,ref,y,e,u");
    assert_eq!(text.lines().count(), 1201);
    let m: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(&metrics).unwrap()).unwrap();
    assert_eq!(m["diverged"], false);
    assert!(m["os_pct"].as_f64().unwrap() > 0.0);

    let out = run(&[
        "margins",
        "--plant",
        plant.to_str().unwrap(),
        "--controller",
        ctrl.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("GM ="), "{stdout}");
}

#[test]
fn simulate_zero_amplitude_gives_zero_trace() {
    let dir = tmpdir("zeroamp");
    let plant = build_plant(&dir);
    let ctrl = write_controller(&dir, 0.00093, 0.043, 315.7);
    let trace = dir.join("trace.csv");
    let out = run(&[
        "simulate",
        "--plant",
        plant.to_str().unwrap(),
        "--controller",
        ctrl.to_str().unwrap(),
        "--amplitude",
        "0",
        "--n",
        "200",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    for line in fs::read_to_string(&trace).unwrap().lines().skip(1) {
        for field in line.split(',').skip(1) {
            assert_eq!(field.parse::<f64>().unwrap(), 0.0);
        }
    }
}

#[test]
fn simulate_divergence_exits_3_with_partial_trace() {
    let dir = tmpdir("diverge");
    let plant = build_plant(&dir);
    // Far outside the stabilizing set: large positive Kp with tiny alpha.
    let ctrl = write_controller(&dir, 500.0, 0.0, 1.0);
    let trace = dir.join("trace.csv");
    let out = run(&[
        "simulate",
        "--plant",
        plant.to_str().unwrap(),
        "--controller",
        ctrl.to_str().unwrap(),
        "--n",
        "2000",
        "--out",
        trace.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("divergence"));
    let lines = fs::read_to_string(&trace).unwrap().lines().count();
    assert!(
        lines > 1 && lines < 2001,
        "partial trace expected, got {lines} lines"
    );
}
