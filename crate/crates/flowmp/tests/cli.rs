//! End-to-end checks of the `flowmp` binary: file outputs, format toggles,
//! exit codes, and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn flowmp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_flowmp"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const SIM_CONFIG: &str = r#"{
    "dataset": {"generator": {"name": "two-clusters", "seed": 7, "spread": 0.05}},
    "label": "A",
    "fields": {
        "cond": {"kind": "perturbed", "epsilon": 0.1, "seed": 11},
        "uncond": {"kind": "perturbed", "epsilon": 0.1, "seed": 13}
    },
    "sampler": {
        "method": "cfg-mp-plus",
        "steps": 6,
        "guidance": 1.5,
        "projection_iters": 2,
        "t_min": 0.1,
        "seed": 5,
        "chains": 8,
        "record": "full-trajectory"
    },
    "output": {"dir": "OUTDIR", "format": "both", "svg": true}
}"#;

#[test]
fn simulate_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let config = write_config(
        dir.path(),
        "sim.json",
        &SIM_CONFIG.replace("OUTDIR", &out.to_string_lossy()),
    );
    let result = flowmp(&["simulate", "--config", &config]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let samples = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    assert!(samples.starts_with("chain,x0,x1"));
    assert_eq!(samples.lines().count(), 1 + 8);
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    // effective config echo includes defaulted fields
    assert_eq!(summary["config"]["sampler"]["lambda"], 0.5);
    assert_eq!(summary["config"]["sampler"]["aa"]["window"], 1);
    assert!(summary["sample_quality"]["energy_distance"].is_f64());
    assert!(summary["gap_profile"]["per_step"].as_array().unwrap().len() == 6);
    let trajectory: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("trajectory.json")).unwrap())
            .unwrap();
    assert_eq!(trajectory.as_array().unwrap().len(), 8);
    let svg = std::fs::read_to_string(out.join("trajectory.svg")).unwrap();
    assert!(svg.starts_with("<svg"));
}

#[test]
fn simulate_single_point_world_hits_the_target() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let config = write_config(
        dir.path(),
        "point.json",
        &format!(
            r#"{{
            "dataset": {{"inline": {{
                "dimension": 2,
                "points": [[1.0, 0.5]],
                "labels": ["A"]
            }}}},
            "label": "A",
            "sampler": {{"method": "cfg", "steps": 8, "guidance": 3.0, "seed": 2, "chains": 4}},
            "output": {{"dir": "{}", "format": "csv"}}
        }}"#,
            out.to_string_lossy()
        ),
    );
    let result = flowmp(&["simulate", "--config", &config]);
    assert!(result.status.success());
    let csv = std::fs::read_to_string(out.join("samples.csv")).unwrap();
    for line in csv.lines().skip(1) {
        let cols: Vec<f64> = line
            .split(',')
            .skip(1)
            .map(|c| c.parse().unwrap())
            .collect();
        assert!((cols[0] - 1.0).abs() <= 1e-12 && (cols[1] - 0.5).abs() <= 1e-12);
    }
}

#[test]
fn format_json_omits_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let config = write_config(
        dir.path(),
        "sim.json",
        &SIM_CONFIG
            .replace("OUTDIR", &out.to_string_lossy())
            .replace("\"svg\": true", "\"svg\": false"),
    );
    let result = flowmp(&["simulate", "--config", &config, "--format", "json"]);
    assert!(result.status.success());
    assert!(!out.join("samples.csv").exists());
    assert!(out.join("summary.json").exists());
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let out1 = dir.path().join("run1");
    let out2 = dir.path().join("run2");
    let config = write_config(
        dir.path(),
        "sim.json",
        &SIM_CONFIG.replace("OUTDIR", "ignored"),
    );
    for (out, threads) in [(&out1, "1"), (&out2, "4")] {
        let result = Command::new(env!("CARGO_BIN_EXE_flowmp"))
            .args(["simulate", "--config", &config, "--out"])
            .arg(out)
            .env("RAYON_NUM_THREADS", threads)
            .output()
            .unwrap();
        assert!(result.status.success());
    }
    for name in ["samples.csv", "trajectory.json", "trajectory.svg"] {
        let a = std::fs::read(out1.join(name)).unwrap();
        let b = std::fs::read(out2.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between runs");
    }
    // summaries differ only in the echoed output dir; normalize and compare
    let norm = |p: &Path| {
        std::fs::read_to_string(p.join("summary.json"))
            .unwrap()
            .replace("run1", "run")
            .replace("run2", "run")
    };
    assert_eq!(norm(&out1), norm(&out2));
}

#[test]
fn invalid_config_exits_two_with_field_path() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "bad.json",
        r#"{
            "dataset": {"generator": {"name": "two-clusters"}},
            "label": "A",
            "sampler": {"method": "cfg", "projection_iters": 3}
        }"#,
    );
    let result = flowmp(&["simulate", "--config", &config]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("projection_iters"), "stderr: {stderr}");
}

#[test]
fn verify_suites_pass_and_unknown_suite_exits_two() {
    let result = flowmp(&["verify", "gradient-identity"]);
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(stdout.contains("PASS gradient-identity/central-differences"));

    let result = flowmp(&["verify", "decomposition", "--seed", "7"]);
    assert!(result.status.success());

    let result = flowmp(&["verify", "foo"]);
    assert_eq!(result.status.code(), Some(2));
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("usage"), "stderr: {stderr}");
}

#[test]
fn verify_all_reports_every_suite() {
    let result = flowmp(&["verify", "all"]);
    assert!(result.status.success());
    let stdout = String::from_utf8_lossy(&result.stdout);
    for name in [
        "gradient-identity/",
        "decomposition/",
        "anderson/",
        "operators/",
    ] {
        assert!(stdout.contains(name), "missing {name} in:\n{stdout}");
    }
    assert!(!stdout.contains("FAIL"));
}

#[test]
fn compare_emits_table_with_expected_ordering() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let config = write_config(
        dir.path(),
        "compare.json",
        &format!(
            r#"{{
            "dataset": {{"generator": {{"name": "two-clusters", "seed": 7, "spread": 0.05}}}},
            "label": "A",
            "fields": {{
                "cond": {{"kind": "perturbed", "epsilon": 0.1, "seed": 11}},
                "uncond": {{"kind": "perturbed", "epsilon": 0.1, "seed": 13}}
            }},
            "runs": [
                {{"method": "cfg", "steps": 5, "guidance": 1.5, "t_min": 0.1, "seed": 17, "chains": 64}},
                {{"method": "cfg-mp", "steps": 5, "guidance": 1.5, "projection_iters": 2, "t_min": 0.1, "seed": 17, "chains": 64}},
                {{"method": "cfg-mp-plus", "steps": 5, "guidance": 1.5, "projection_iters": 2, "t_min": 0.1, "seed": 17, "chains": 64}}
            ],
            "output": {{"dir": "{}", "format": "both"}}
        }}"#,
            out.to_string_lossy()
        ),
    );
    let result = flowmp(&["compare", "--config", &config]);
    assert!(
        result.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&result.stderr)
    );
    let csv = std::fs::read_to_string(out.join("compare.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().starts_with("method,guidance,steps"));
    assert_eq!(csv.lines().count(), 1 + 3);

    let rows: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("compare.json")).unwrap()).unwrap();
    let mean_r = |i: usize| rows[i]["mean_r"].as_f64();
    // pinned study direction: cfg-mp-plus mean r <= cfg-mp mean r <= 0
    assert!(mean_r(0).is_none());
    let mp = mean_r(1).unwrap();
    let mpp = mean_r(2).unwrap();
    assert!(mpp <= mp && mp <= 0.0, "mp {mp}, mp+ {mpp}");
}

#[test]
fn compare_duplicate_runs_give_identical_rows() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("cmp");
    let config = write_config(
        dir.path(),
        "compare.json",
        &format!(
            r#"{{
            "dataset": {{"generator": {{"name": "two-clusters", "seed": 7}}}},
            "label": "A",
            "runs": [
                {{"method": "cfg", "steps": 6, "guidance": 2.0, "seed": 3, "chains": 8}},
                {{"method": "cfg", "steps": 6, "guidance": 2.0, "seed": 3, "chains": 8}}
            ],
            "output": {{"dir": "{}", "format": "csv"}}
        }}"#,
            out.to_string_lossy()
        ),
    );
    let result = flowmp(&["compare", "--config", &config]);
    assert!(result.status.success());
    let csv = std::fs::read_to_string(out.join("compare.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    // identical up to the wall-time column
    let strip = |row: &str| {
        let mut cols: Vec<&str> = row.split(',').collect();
        cols.pop();
        cols.join(",")
    };
    assert_eq!(strip(rows[0]), strip(rows[1]));
}

#[test]
fn trajectory_dumps_one_chain() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        "sim.json",
        &SIM_CONFIG
            .replace("OUTDIR", "ignored")
            .replace("\"svg\": true", "\"svg\": false"),
    );
    let result = flowmp(&["trajectory", "--config", &config, "--chain", "3"]);
    assert!(result.status.success());
    let record: serde_json::Value =
        serde_json::from_slice(&result.stdout).expect("stdout is a JSON record");
    assert_eq!(record["chain"], 3);
    assert_eq!(record["steps"].as_array().unwrap().len(), 6);

    let result = flowmp(&["trajectory", "--config", &config, "--chain", "99"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_two() {
    let result = flowmp(&["simulate"]); // missing --config
    assert_eq!(result.status.code(), Some(2));
    let result = flowmp(&["nonsense"]);
    assert_eq!(result.status.code(), Some(2));
    let result = flowmp(&["simulate", "--config", "/nonexistent/x.json"]);
    assert_eq!(result.status.code(), Some(2));
}

#[test]
fn strict_mode_flags_divergence() {
    // a singular-time projection config that reliably diverges: tiny t_min
    // pushes the final projection deep into the expansive regime
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let config = write_config(
        dir.path(),
        "diverge.json",
        &format!(
            r#"{{
            "dataset": {{"inline": {{
                "dimension": 2,
                "points": [[1.0, 0.0], [-1.0, 0.0]],
                "labels": ["A", "B"]
            }}}},
            "label": "A",
            "sampler": {{
                "method": "cfg-mp",
                "steps": 2,
                "guidance": 1.5,
                "projection_iters": 400,
                "t_min": 1e-6,
                "seed": 1,
                "chains": 2,
                "record": "final-only",
                "record_gaps": false
            }},
            "diagnostics": {{"sample_quality": false, "gap_profile": false}},
            "output": {{"dir": "{}", "format": "json"}}
        }}"#,
            out.to_string_lossy()
        ),
    );
    let ok = flowmp(&["simulate", "--config", &config]);
    assert!(
        ok.status.success(),
        "divergence must be recorded, not fatal: {}",
        String::from_utf8_lossy(&ok.stderr)
    );
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert!(summary["summary"]["divergences"].as_u64().unwrap() > 0);

    let strict = flowmp(&["simulate", "--config", &config, "--strict"]);
    assert_eq!(strict.status.code(), Some(1));
}
