use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn pdqc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pdqc")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn grover_run_passes_and_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = pdqc(&["run", "grover3", "--protocol", "p2", "--M", "2", "--shots", "300", "--seed", "4", "--out", out]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.trim_end().ends_with("PASS"), "{text}");
    for f in ["distribution.json", "summary.json", "transcript.jsonl", "server1_view.json", "adversary.json"] {
        assert!(dir.path().join(f).is_file(), "missing {f}");
    }
    let dist: serde_json::Value = serde_json::from_str(&fs::read_to_string(dir.path().join("distribution.json")).unwrap()).unwrap();
    let counts = dist["counts"].as_object().unwrap();
    assert!(counts.keys().all(|k| k == "101" || k == "110"));
    assert_eq!(counts.values().map(|v| v.as_u64().unwrap()).sum::<u64>(), 300);
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), fs::read(&p).unwrap()))
        .collect();
    files.sort();
    files
}

#[test]
fn same_seed_replays_byte_identically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let o = pdqc(&["run", "qaoa3", "--protocol", "p4", "--seed", "9", "--trap-density", "0.5", "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let (fa, fb) = (artifacts(a.path()), artifacts(b.path()));
    assert!(fa.iter().any(|(n, _)| n == "server2_view.json"));
    assert_eq!(fa, fb);
}

#[test]
fn tampering_server_fails_verification() {
    let o = pdqc(&["run", "qnn3", "--protocol", "p3", "--M", "2", "--shots", "20", "--verify", "--adversary", "drop:1"]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(text.contains("Dishonest") && text.trim_end().ends_with("FAIL"), "{text}");
}

#[test]
fn errors_exit_with_two() {
    assert_eq!(pdqc(&["run", "no_such_circuit.json"]).status.code(), Some(2));
    assert_eq!(pdqc(&["run", "grover3", "--protocol", "p3", "--M", "1"]).status.code(), Some(2));
    assert_eq!(pdqc(&["run", "grover3", "--adversary", "bribe"]).status.code(), Some(2));
    assert_eq!(pdqc(&["verify-experiment", "--N", "2,3", "--N-prime", "2", "--n", "1"]).status.code(), Some(2));
}

#[test]
fn circuit_files_and_profiles_load() {
    let dir = tempfile::tempdir().unwrap();
    let circuit = dir.path().join("bell.json");
    fs::write(
        &circuit,
        r#"[{"kind":"H","params":[],"targets":[0],"tag":"public"},
            {"kind":"CNOT","params":[],"targets":[0,1],"tag":"public"},
            {"kind":"RZ","params":[0.4],"targets":[1],"tag":"private_angle"}]"#,
    )
    .unwrap();
    let profile = dir.path().join("profile.json");
    fs::write(&profile, pdqc::circuit::CapabilityProfile::one_qubit_computers(1).to_json().unwrap()).unwrap();
    let o = pdqc(&["run", circuit.to_str().unwrap(), "--protocol", "p3", "--profile", profile.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}{}", stdout(&o), String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("fidelity 1.0000"));
}

#[test]
fn verify_experiment_prints_csv() {
    let o = pdqc(&["verify-experiment", "--N", "2", "--N-prime", "2", "--n", "1,3", "--trials", "200", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("N,N',n,trials,empirical_nondetect"));
    assert_eq!(lines.count(), 2);
}
