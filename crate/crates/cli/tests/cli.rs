use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

const LIGHT_EXACT: [f64; 4] = [543059.0, 593915.0, 1685209.0, 1716743.0];

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_blfq-vqe"))
}

fn configs_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("configs")
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--output")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run_ok(args: &[&str], config: &Path, out: &Path) -> Value {
    let o = run(args, config, out);
    assert!(
        o.status.success(),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> PathBuf {
    let p = dir.path().join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn read_json(p: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

fn floats(v: &Value) -> Vec<f64> {
    v.as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .collect()
}

const LIGHT_HEA: &str = r#"
hamiltonian = { builtin = "builtin_1_1" }
ansatz = { kind = "hea", reps = 2 }
ssvqe = { reference_states = [0, 1, 2, 3] }
"#;

#[test]
fn exact_reports_light_masses() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "c.toml", LIGHT_HEA);
    let out = dir.path().join("out");
    let s = run_ok(&["exact"], &cfg, &out);
    for (e, want) in floats(&s["energies_MeV2"]).iter().zip(LIGHT_EXACT) {
        assert!((e - want).abs() < 1e-6, "{e} vs {want}");
    }
    let masses = floats(&s["masses_MeV"]);
    assert!((masses[0] - 736.925).abs() < 1e-3);
    assert!(out.join("spectrum.json").exists());
}

#[test]
fn encode_writes_both_registers() {
    let dir = TempDir::new().unwrap();
    let compact = write_config(&dir, "c.toml", LIGHT_HEA);
    let s = run_ok(&["encode"], &compact, &dir.path().join("c"));
    assert_eq!(s["n_qubits"], 2);
    assert_eq!(s["n_terms"], 4);
    let text = std::fs::read_to_string(dir.path().join("c/hamiltonian_compact.pauli")).unwrap();
    assert!(text.contains("-566244.5 IZ"), "{text}");

    let direct = write_config(
        &dir,
        "d.toml",
        r#"
hamiltonian = { builtin = "builtin_1_1" }
encoding = "direct"
method = "vqe"
ansatz = { kind = "ucc_single" }
"#,
    );
    let s = run_ok(&["encode"], &direct, &dir.path().join("d"));
    assert_eq!(s["n_qubits"], 4);
    assert!(dir.path().join("d/hamiltonian_direct.pauli").exists());
}

#[test]
fn bundled_sv_ssvqe_matches_exact() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    run_ok(&["solve"], &configs_dir().join("ssvqe_11_sv.toml"), &out);
    let r = read_json(&out.join("result.json"));
    let states = r["states"].as_array().unwrap();
    for s in states {
        let rank = s["rank"].as_u64().unwrap() as usize;
        let e = s["energy_MeV2"].as_f64().unwrap();
        assert!(
            (e - LIGHT_EXACT[rank]).abs() < 1.0,
            "{e} vs {}",
            LIGHT_EXACT[rank]
        );
        assert!(e >= LIGHT_EXACT[rank] - 1e-6);
    }
    for d in r["decay"].as_array().unwrap() {
        assert!((d["f_MeV"].as_f64().unwrap() - 178.184).abs() < 1e-2);
    }
    for f in [
        "trace.csv",
        "trace_state3.csv",
        "pdf_state1.csv",
        "density_state0.json",
        "config.snapshot.toml",
    ] {
        assert!(out.join(f).exists(), "{f}");
    }
    // The snapshot is itself a valid config.
    run_ok(
        &["encode"],
        &out.join("config.snapshot.toml"),
        &dir.path().join("again"),
    );
}

#[test]
fn shot_runs_are_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "s.toml",
        r#"
hamiltonian = { builtin = "builtin_1_1" }
method = "vqe"
ansatz = { kind = "hea", reps = 1 }
tier = "shots"
shots = 2000

[optimizer]
kind = "spsa"
max_iterations = 60
restarts = 1
"#,
    );
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let c = dir.path().join("c");
    run_ok(&["solve", "--seed", "7"], &cfg, &a);
    run_ok(&["solve", "--seed", "7"], &cfg, &b);
    run_ok(&["solve", "--seed", "8"], &cfg, &c);
    let trace = |d: &Path| std::fs::read_to_string(d.join("trace.csv")).unwrap();
    assert_eq!(trace(&a), trace(&b));
    assert_ne!(trace(&a), trace(&c));
    assert_eq!(read_json(&a.join("result.json"))["seed"], 7);
}

#[test]
fn unknown_key_is_a_structured_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.toml", &format!("{LIGHT_HEA}shotz = 3\n"));
    let o = run(&["solve"], &cfg, &dir.path().join("out"));
    assert!(!o.status.success());
    let err: Value = serde_json::from_slice(&o.stderr).expect("stderr is JSON");
    assert_eq!(err["error"]["kind"], "config");
    assert!(err["error"]["message"].as_str().unwrap().contains("shotz"));
}

#[test]
fn missing_ssvqe_table_is_rejected() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "c.toml",
        "hamiltonian = { builtin = \"builtin_1_1\" }\nansatz = { kind = \"hea\" }\n",
    );
    let o = run(&["solve"], &cfg, &dir.path().join("out"));
    assert!(!o.status.success());
    let err: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert!(err["error"]["message"]
        .as_str()
        .unwrap()
        .contains("[ssvqe]"));
}

#[test]
fn external_diagonal_matrix() {
    let dir = TempDir::new().unwrap();
    let cat = dir.path().join("cat");
    run_ok(&["encode"], &write_config(&dir, "c.toml", LIGHT_HEA), &cat);
    std::fs::copy(cat.join("catalog.txt"), dir.path().join("catalog.txt")).unwrap();
    std::fs::write(
        dir.path().join("h.txt"),
        "dim 4 units MeV2\n4e5 0 0 0\n0 1e5 0 0\n0 0 3e5 0\n0 0 0 2e5\n",
    )
    .unwrap();
    let cfg = write_config(
        &dir,
        "ext.toml",
        r#"
hamiltonian = { matrix = "h.txt", catalog = "catalog.txt", params = { kappa = 560.0, m_q = 300.0, m_qbar = 300.0, n_f = 3, alpha_s0 = 0.89 } }
ansatz = { kind = "hea", reps = 2 }
ssvqe = { reference_states = [0, 1, 2, 3] }

[optimizer]
kind = "grad"
max_iterations = 300
"#,
    );
    let s = run_ok(&["exact"], &cfg, &dir.path().join("exact"));
    assert_eq!(floats(&s["energies_MeV2"]), [1e5, 2e5, 3e5, 4e5]);
    let s = run_ok(&["solve"], &cfg, &dir.path().join("solve"));
    let mut e = floats(&s["energies_MeV2"]);
    e.sort_by(f64::total_cmp);
    for (got, want) in e.iter().zip([1e5, 2e5, 3e5, 4e5]) {
        assert!((got - want).abs() < 1.0, "{got} vs {want}");
    }
}

#[test]
fn bundled_configs_validate() {
    let dir = TempDir::new().unwrap();
    let mut n = 0;
    for entry in std::fs::read_dir(configs_dir()).unwrap() {
        let p = entry.unwrap().path();
        if p.extension().is_some_and(|e| e == "toml") {
            let name = p.file_stem().unwrap().to_str().unwrap().to_string();
            run_ok(&["encode"], &p, &dir.path().join(&name));
            run_ok(&["calibrate"], &p, &dir.path().join(name + "_cal"));
            n += 1;
        }
    }
    assert!(n >= 8);
}

#[test]
fn calibrate_writes_readout_matrix_when_mitigating() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("out");
    run_ok(
        &["calibrate"],
        &configs_dir().join("ssvqe_11_noisy_mitigated.toml"),
        &out,
    );
    let c = read_json(&out.join("calibration.json"));
    let m = c["readout_calibration"].as_array().unwrap();
    assert_eq!(m.len(), 4);
    for col in 0..4 {
        let s: f64 = m.iter().map(|r| r[col].as_f64().unwrap()).sum();
        assert!((s - 1.0).abs() < 1e-9);
    }
    let k = c["K_MeV"]["pseudoscalar"].as_f64().unwrap();
    assert!((k - 125.995).abs() < 1e-2);
}
