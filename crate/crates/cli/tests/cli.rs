use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qdpath(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qdpath"))
        .args(args)
        .env_remove("QDPATH_CACHE_DIR")
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn run_preset_writes_trajectory_and_meta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = qdpath(&["run", "--preset", "fig1a", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t_ps,re_rho_00,im_rho_00,re_rho_01,im_rho_01,re_rho_11,im_rho_11,trace_drift"
    );
    assert_eq!(lines.count(), 1001);
    let meta: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
    assert_eq!(meta["preset"], "fig1a");
    assert_eq!(meta["n_steps"], 1000);
    assert!(meta["diagnostics"]["max_trace_drift"].as_f64().unwrap() < 1e-10);
}

#[test]
fn malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let bad_syntax = write(dir.path(), "a.toml", "[numerics\ndt_ps = 0.1\n");
    let bad_value = write(dir.path(), "b.toml", "[numerics]\ndt_ps = -0.1\n");
    let bad_key = write(dir.path(), "c.toml", "[model]\nfield = 1.0\n");
    for cfg in [&bad_syntax, &bad_value, &bad_key] {
        let o = qdpath(&["run", "--preset", "fig1a", "--config", cfg, "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(2), "{cfg}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = qdpath(&["run", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = qdpath(&["run", "--preset", "missing", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn memory_budget_exceeded_exits_2_before_allocating() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "b.toml", "[numerics]\nmemory_depth = 12\nmemory_budget_mib = 1.0\n");
    let out = dir.path().join("o");
    let o = qdpath(&["run", "--preset", "fig1d", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("budget"));
    assert!(!out.join("trajectory.csv").exists());
}

#[test]
fn sweep_without_values_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = qdpath(&["sweep", "--preset", "fig1a", "--parameter", "detuning", "--values", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = qdpath(&["sweep", "--preset", "fig1a", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let o = qdpath(&["sweep", "--preset", "fig1a", "--parameter", "colour", "--values", "1", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn sweep_writes_points_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "s.toml", "[numerics]\nduration_ps = 5.0\n");
    let out = dir.path().join("o");
    let o = qdpath(&[
        "sweep", "--preset", "fig1d", "--config", &cfg, "--parameter", "temperature", "--values", "1,50,100", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("sweep_summary.csv")).unwrap();
    let rows: Vec<&str> = summary.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("1,") && rows[3].starts_with("100,"));
    for i in 0..3 {
        assert!(out.join(format!("point_{i:02}/trajectory.csv")).exists());
    }
}

#[test]
fn output_is_identical_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", "[numerics]\nduration_ps = 20.0\n");
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = dir.path().join(format!("t{threads}"));
        let o = qdpath(&[
            "--threads", threads, "run", "--preset", "fig4-T1K", "--config", &cfg, "--out", out.to_str().unwrap(),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        outputs.push(fs::read(out.join("trajectory.csv")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn kernel_cache_is_reused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "t.toml", "[numerics]\nduration_ps = 2.0\n");
    let cache = dir.path().join("cache");
    let mut hits = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("r{k}"));
        let o = Command::new(env!("CARGO_BIN_EXE_qdpath"))
            .args(["run", "--preset", "fig1d", "--config", &cfg, "--out", out.to_str().unwrap()])
            .env("QDPATH_CACHE_DIR", &cache)
            .output()
            .unwrap();
        assert!(o.status.success());
        let meta: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(out.join("meta.json")).unwrap()).unwrap();
        hits.push(meta["kernel"]["cache_hit"].as_bool().unwrap());
    }
    assert_eq!(hits, [false, true]);
}

#[test]
fn converge_without_coupling_gives_flat_memory_rows() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "z.toml",
        "[model]\nphonons = false\n[numerics]\nduration_ps = 10.0\nmemory_depth = 4\n",
    );
    let out = dir.path().join("o");
    let o = qdpath(&["converge", "--preset", "fig1d", "--config", &cfg, "--dt-levels", "2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("converge.json")).unwrap()).unwrap();
    let rows = report["rows"].as_array().unwrap();
    let depth_rows: Vec<_> = rows.iter().filter(|r| r["study"] == "memory_depth").collect();
    assert_eq!(depth_rows.len(), 5);
    for r in &depth_rows {
        if let Some(d) = r["max_dev_to_next"].as_f64() {
            assert_eq!(d, 0.0);
        }
    }
    assert_eq!(report["recommended_memory_depth"], 2);
    assert!(out.join("converge.csv").exists());
}

#[test]
fn verify_passes_and_writes_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = qdpath(&["verify", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success());
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert_eq!(stdout.lines().filter(|l| l.starts_with("[PASS]")).count(), 5);
    assert!(dir.path().join("verify.json").exists());
}

#[test]
fn presets_listing_and_round_trip() {
    let o = qdpath(&["presets"]);
    assert!(o.status.success());
    let listing = String::from_utf8_lossy(&o.stdout);
    for name in ["fig1a", "fig1d", "fig2c-sweep", "fig4-T1K", "fig4-T100K"] {
        assert!(listing.contains(name));
    }
    let dir = tempfile::tempdir().unwrap();
    let o = qdpath(&["presets", "--preset", "fig2c-sweep"]);
    assert!(o.status.success());
    let cfg = write(dir.path(), "p.toml", &String::from_utf8_lossy(&o.stdout));
    let text = fs::read_to_string(&cfg).unwrap();
    assert!(text.contains("[sweep]"));
    let o = qdpath(&["presets", "--preset", "nope"]);
    assert_eq!(o.status.code(), Some(2));
}

fn converge_report(dir: &Path, temperature: f64) -> serde_json::Value {
    let cfg = write(
        dir,
        &format!("g{temperature}.toml"),
        &format!("[model]\ntemperature_k = {temperature}\n[numerics]\nduration_ps = 50.0\n"),
    );
    let out = dir.join(format!("c{temperature}"));
    let o = qdpath(&["converge", "--preset", "fig1d", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_str(&fs::read_to_string(out.join("converge.json")).unwrap()).unwrap()
}

#[test]
fn converge_gaas_deviations_shrink_and_colder_needs_more_memory() {
    let dir = tempfile::tempdir().unwrap();
    let hot = converge_report(dir.path(), 100.0);
    for study in ["memory_depth", "dt"] {
        let devs: Vec<f64> = hot["rows"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|r| r["study"] == study)
            .filter_map(|r| r["max_dev_to_next"].as_f64())
            .collect();
        assert!(devs.len() >= 2);
        assert!(devs.windows(2).all(|w| w[1] < w[0]), "{study}: {devs:?}");
    }
    let cold = converge_report(dir.path(), 10.0);
    let n = |r: &serde_json::Value| r["recommended_memory_depth"].as_u64().unwrap();
    assert!(n(&cold) >= n(&hot));
}

#[test]
fn phonon_free_rate_sweep_matches_closed_form() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "g.toml", "[model]\ndetuning_mev = 0.5\n[numerics]\ndt_ps = 0.02\nduration_ps = 60.0\n");
    let out = dir.path().join("o");
    let o = qdpath(&[
        "sweep", "--preset", "fig1a", "--config", &cfg, "--parameter", "rate", "--values", "0.5,1,2,4", "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = fs::read_to_string(out.join("sweep_summary.csv")).unwrap();
    for row in summary.lines().skip(1) {
        let (gamma, mean) = row.split_once(',').unwrap();
        let (gamma, mean): (f64, f64) = (gamma.parse().unwrap(), mean.parse().unwrap());
        let exact = qdpath::models::stationary_occupation_no_phonons(1.0, gamma, 0.5).unwrap();
        assert!((mean - exact).abs() < 1e-6, "γ = {gamma}: {mean} vs {exact}");
    }
}
