use std::process::{Command, Output};

use gradload::amplify::RunReport;
use gradload::amplitudes::AmplitudeFile;
use gradload::bootstrap::BitWeightProfile;
use gradload::distributions::{read_csv, SWEEP_COLUMNS};
use gradload::{Circuit, StateVector};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gradload")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn quantize_triangle() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.json");
    let o = run(&["quantize", "--dist", "triangle", "--n", "8", "--g", "4", "-o", path.to_str().unwrap()]);
    assert!(o.status.success());
    let f = AmplitudeFile::read(&path).unwrap();
    assert_eq!(f.bits.len(), 8);
    assert!(f.bits.iter().all(|r| r.len() == 4));
    assert_eq!(f.quantized().unwrap().n(), 8);
}

#[test]
fn quantize_delta_bits() {
    let o = run(&["quantize", "--dist", "delta", "--n", "4", "--g", "2"]);
    assert!(o.status.success());
    let f: AmplitudeFile = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(f.bits[0], vec![1, 1]);
}

#[test]
fn validation_errors_exit_two() {
    assert_eq!(run(&["quantize", "--dist", "powerlaw", "--k", "2", "--n", "0"]).status.code(), Some(2));
    assert_eq!(run(&["quantize", "--dist", "powerlaw", "--n", "8"]).status.code(), Some(2));
    assert_eq!(run(&["quantize", "--bogus"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "--dist", "delta", "--n", "16", "--frobnicate"]).status.code(), Some(2));
    assert_eq!(run(&["circuit", "--what", "permutation"]).status.code(), Some(2));
}

#[test]
fn simulate_uniform_bootstrap() {
    let o = run(&["simulate", "--dist", "uniform", "--n", "4", "--g", "2", "--bootstrap"]);
    let r: RunReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r.final_fidelity >= 1.0 - 1e-9);
    assert!(r.bootstrap);
    // |alpha|_1 = 2 makes 2^-g N / |alpha|_1 = 1/2
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn simulate_delta_core_rounds() {
    let o = run(&["simulate", "--dist", "delta", "--n", "16", "--g", "9"]);
    assert_eq!(o.status.code(), Some(0));
    let r: RunReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.core, 4);
    assert!(r.bounds.is_some());
}

#[test]
fn simulate_is_deterministic() {
    let args = ["simulate", "--dist", "random", "--n", "32", "--g", "8", "--shots", "64", "--seed", "9"];
    let a = run(&args);
    let b = run(&args);
    assert!(!a.stdout.is_empty());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn simulate_from_files() {
    let dir = tempfile::tempdir().unwrap();
    let amp = dir.path().join("a.json");
    let prof = dir.path().join("p.json");
    assert!(run(&["quantize", "--dist", "sine", "--n", "16", "--g", "8", "-o", amp.to_str().unwrap()])
        .status
        .success());
    let o = run(&["estimate", "--input", amp.to_str().unwrap(), "--shots", "16", "-o", prof.to_str().unwrap()]);
    assert!(o.status.success());
    let p = BitWeightProfile::read(&prof).unwrap();
    assert_eq!(p.shots, Some(16));
    let o = run(&[
        "simulate",
        "--input",
        amp.to_str().unwrap(),
        "--profile",
        prof.to_str().unwrap(),
        "--mode",
        "postselect",
    ]);
    let r: RunReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(r.bootstrap);
    assert_eq!(r.rounds2, 0);
    assert!(r.final_fidelity > 0.9);
}

#[test]
fn sweep_schema_and_order() {
    let o = run(&["sweep", "--dist", "uniform,powerlaw", "--k", "2,0.5", "--n", "128,64", "--simulate-up-to", "700"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().next().unwrap(), SWEEP_COLUMNS.join(","));
    let rows = read_csv(text.as_bytes()).unwrap();
    let keys: Vec<(String, String, usize)> = rows.iter().map(|r| (r.family.clone(), r.param.clone(), r.n)).collect();
    assert_eq!(
        keys,
        vec![
            ("uniform".into(), "".into(), 64),
            ("uniform".into(), "".into(), 128),
            ("powerlaw".into(), "2".into(), 64),
            ("powerlaw".into(), "2".into(), 128),
            ("powerlaw".into(), "0.5".into(), 64),
            ("powerlaw".into(), "0.5".into(), 128),
        ]
    );
    assert!(rows.iter().all(|r| r.lp_core == 2 || r.family == "powerlaw"));
    assert!(rows[0].fidelity.is_some() && rows[1].fidelity.is_none());
    assert_eq!(
        run(&["sweep", "--dist", "uniform,powerlaw", "--k", "2,0.5", "--n", "128,64", "--simulate-up-to", "700"])
            .stdout,
        o.stdout
    );
}

#[test]
fn resources_table() {
    let o = run(&["resources", "--g", "32"]);
    let text = stdout(&o);
    let row = |label: &str| {
        text.lines().find(|l| l.starts_with(label)).unwrap().split_whitespace().last().unwrap().to_string()
    };
    assert_eq!(row("ancillas ours_v1"), "5");
    assert_eq!(row("ancillas sanders_v2"), "34");
    assert_eq!(row("toffoli sanders_v2"), "126");
    let json = run(&["resources", "--json", "--g", "4"]);
    let v: serde_json::Value = serde_json::from_slice(&json.stdout).unwrap();
    assert_eq!(v.as_array().unwrap().len(), 4);
}

#[test]
fn permutation_dump_simulates() {
    let o = run(&["circuit", "--what", "permutation", "--q", "2"]);
    let c = Circuit::parse(&stdout(&o)).unwrap();
    assert_eq!(c.n_wires(), 6);
    // address |2> with data qubit 2 set picks up a sign
    let mut bits = vec![0usize; 6];
    bits[2] = 1;
    bits[4] = 1;
    let dims = vec![2; 6];
    let s = StateVector::basis(dims, &bits).unwrap();
    let out = c.simulate(&s).unwrap();
    assert!((out.overlap(&s).unwrap().re + 1.0).abs() < 1e-12);
}

#[test]
fn gradient_dump_has_stages() {
    let o = run(&["circuit", "--what", "gradient", "--g", "3"]);
    let text = stdout(&o);
    assert_eq!(text.lines().filter(|l| l.starts_with("SQRTCNOT ")).count(), 3);
    let o = run(&["circuit", "--what", "gradient", "--g", "3", "--split", "sqrtswap"]);
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("SQRTSWAP ")).count(), 3);
}
