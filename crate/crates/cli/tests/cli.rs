use lattice_limit_core::lattice::{GridFunction, LatticeSpec, PotentialKind, PotentialSpec};
use serde_json::Value;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lattice-limit"))
        .args(args)
        .env("RUST_LOG", "warn")
        .output()
        .expect("binary runs")
}

fn run(cfg: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["run", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    cli(&args)
}

fn report(out: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn phi_check_passes_and_embeds_resolved_config() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("phi-check.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let r = report(dir.path());
    assert_eq!(r["pass"], true);
    assert_eq!(r["experiment"], "phi-check");
    let cfg = &r["config"];
    for key in ["lattice", "potential", "probe", "scaling", "tolerances", "m_shift", "seed"] {
        assert!(!cfg[key].is_null(), "missing {key}");
    }
    assert!(r["checks"][0]["value"].as_f64().unwrap() <= 1e-10);
    let csv = std::fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("h,error,bound"));
}

#[test]
fn free_rates_have_slope_two() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("free-rates.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    let reports = r["reports"].as_array().unwrap();
    assert_eq!(reports.len(), 2);
    for rep in reports {
        let slope = rep["slope"].as_f64().unwrap();
        assert!((slope - 2.0).abs() < 0.1, "{rep}");
        assert_eq!(rep["pass"], true);
        for key in ["experiment", "pairs", "intercept", "r2", "expected"] {
            assert!(rep.get(key).is_some());
        }
    }
    let csv = std::fs::read_to_string(dir.path().join("rates.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 12);
}

#[test]
fn hausdorff_trials_pass() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("hausdorff.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let r = report(dir.path());
    assert_eq!(r["details"]["outcome"]["violations"], 0);
    assert_eq!(r["details"]["outcome"]["trials"], 1000);
}

#[test]
fn reports_are_byte_identical_across_runs_and_thread_counts() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = config("projection-oscillator.json");
    assert_eq!(run(&cfg, a.path(), &["--threads", "1"]).status.code(), Some(0));
    assert_eq!(run(&cfg, b.path(), &["--threads", "4"]).status.code(), Some(0));
    for file in ["report.json", "rates.csv", "grids/eigenvector_0.bin"] {
        let x = std::fs::read(a.path().join(file)).unwrap();
        let y = std::fs::read(b.path().join(file)).unwrap();
        assert!(x == y, "{file} differs");
    }
}

#[test]
fn snapshot_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(&config("commutator-hoelder.json"), dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let grids = dir.path().join("grids");
    let sidecar: Value = serde_json::from_str(&std::fs::read_to_string(grids.join("potential.json")).unwrap()).unwrap();
    let spec = LatticeSpec::new(
        sidecar["d"].as_u64().unwrap() as usize,
        sidecar["h"].as_f64().unwrap(),
        sidecar["N"].as_u64().unwrap() as usize,
    )
    .unwrap();
    assert_eq!(spec.n, 2048);
    let bytes = std::fs::read(grids.join("potential.bin")).unwrap();
    assert_eq!(bytes.len(), 16 * spec.len());
    let grid = GridFunction::from_le_bytes(spec, &bytes).unwrap();
    let pot: PotentialSpec = PotentialKind::Hoelder {
        alpha: 0.5,
        wavenumber: 0.25,
    }
    .into();
    for (i, v) in grid.values.iter().enumerate() {
        assert_eq!(v.re, pot.eval(&spec.site(i)));
        assert_eq!(v.im, 0.0);
    }
}

#[test]
fn invalid_configs_report_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        "{\n  \"experiment\": \"free-rates\",\n  \"seed\": 1,\n  \"h_list\": [0.25, 0.125]\n}\n",
    );
    let out = cli(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 4") && err.contains("h_list"), "{err}");

    let path = write_config(dir.path(), "{\n  \"experiment\": \"phi-check\",\n  \"seed\": \"x\"\n}\n");
    let out = cli(&["validate", "--config", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = cli(&["validate", "--config", config("resolvent-hoelder.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn failed_verdict_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        r#"{"experiment": "phi-check", "seed": 1,
            "scaling": {"profile": "meyer", "support_radius": 0.6666666666666666, "nu_degree": 4, "dimension": 1, "amplitude": 0.9}}"#,
    );
    let out_dir = dir.path().join("out");
    let out = run(&path, &out_dir, &[]);
    assert_eq!(out.status.code(), Some(1));
    let r = report(&out_dir);
    assert_eq!(r["pass"], false);
    assert!((r["checks"][0]["value"].as_f64().unwrap() - 0.19).abs() < 1e-12);
}

#[test]
fn solver_failure_names_experiment_and_mesh() {
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(
        dir.path(),
        r#"{"experiment": "resolvent-rates", "seed": 1,
            "lattice": {"dimension": 1, "extent": 4.0, "refinement": 4},
            "potential": {"kind": "bounded_uc", "wavenumber": 0.25},
            "h_list": [0.125, 0.0625, 0.03125],
            "tolerances": {"solver": 1e-17}}"#,
    );
    let out = run(&path, &dir.path().join("out"), &[]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("resolvent-rates") && err.contains("at h = "), "{err}");
}
