use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn qrd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qrd")).args(args).env("QRD_THREADS", "2").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(o)))
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn matrix(dir: &Path, name: &str, diag: &[f64]) -> PathBuf {
    let d = diag.len();
    let mut re = vec![0.0; d * d];
    for (i, x) in diag.iter().enumerate() {
        re[i * d + i] = *x;
    }
    write(dir, name, &serde_json::json!({ "dim": d, "re": re }).to_string())
}

struct Files {
    _dir: tempfile::TempDir,
    mixed: PathBuf,
    biased: PathBuf,
    singular: PathBuf,
}

fn files() -> Files {
    let dir = tempfile::tempdir().unwrap();
    Files {
        mixed: matrix(dir.path(), "mixed.json", &[0.5, 0.5]),
        biased: matrix(dir.path(), "biased.json", &[0.75, 0.25]),
        singular: matrix(dir.path(), "singular.json", &[1.0, 0.0]),
        _dir: dir,
    }
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn umegaki_of_equal_states_is_zero() {
    let f = files();
    let o = qrd(&["eval", "--kind", "umegaki", "--rho", s(&f.mixed), "--sigma", s(&f.mixed)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["value"], serde_json::json!(0.0));
}

#[test]
fn dmax_of_pure_family() {
    let o = qrd(&["eval", "--kind", "dmax", "--family", r#"{"family":"pure_family","c":1,"eps":0.25}"#]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o)["value"].as_f64().unwrap();
    assert!((v - 2f64.ln()).abs() < 1e-12, "{v}");
}

#[test]
fn support_violation_prints_inf() {
    let f = files();
    let o =
        qrd(&["eval", "--kind", "daz", "--alpha", "2", "--z", "1", "--rho", s(&f.mixed), "--sigma", s(&f.singular)]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(json(&o)["value"], serde_json::json!("inf"));
}

#[test]
fn daz_closed_form() {
    let f = files();
    let o = qrd(&["eval", "--kind", "daz", "--alpha", "2", "--z", "7", "--rho", s(&f.biased), "--sigma", s(&f.mixed)]);
    let v = json(&o)["value"].as_f64().unwrap();
    assert!((v - 1.25f64.ln()).abs() < 1e-12, "{v}");
    assert_eq!(json(&o)["metadata"]["kind"], "daz");
}

#[test]
fn sweep_writes_csv_with_empty_infinite_cells() {
    let f = files();
    let o = qrd(&["sweep", "--rho", s(&f.mixed), "--sigma", s(&f.singular), "--alphas", "0.5,2", "--z", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "alpha,z,value");
    assert!(lines[1].starts_with("0.5,1,"));
    assert!(!lines[1].ends_with(','));
    assert_eq!(lines[2], "2,1,");
}

#[test]
fn sweep_z_modes() {
    let f = files();
    let o = qrd(&["sweep", "--rho", s(&f.biased), "--sigma", s(&f.mixed), "--alphas", "2,3", "--z-mode", "alpha-half"]);
    assert_eq!(stdout(&o).lines().nth(2).unwrap().split(',').nth(1), Some("1.5"));
}

#[test]
fn exit_codes() {
    let f = files();
    let dir = tempfile::tempdir().unwrap();
    let broken = write(dir.path(), "broken.json", "{\"dim\": 2, \"re\": [1, 0]}");
    let skew = write(dir.path(), "skew.json", "{\"dim\": 2, \"re\": [1, 1, 0, 1]}");

    let malformed = qrd(&["eval", "--kind", "dmax", "--rho", s(&broken), "--sigma", s(&f.mixed)]);
    assert_eq!(malformed.status.code(), Some(2));
    let not_hermitian = qrd(&["eval", "--kind", "dmax", "--rho", s(&skew), "--sigma", s(&f.mixed)]);
    assert_eq!(not_hermitian.status.code(), Some(2));
    let missing = qrd(&["eval", "--kind", "dmax", "--rho", "/nonexistent.json", "--sigma", s(&f.mixed)]);
    assert_eq!(missing.status.code(), Some(2));

    let bad_alpha =
        qrd(&["eval", "--kind", "daz", "--alpha=0", "--z", "1", "--rho", s(&f.mixed), "--sigma", s(&f.mixed)]);
    assert_eq!(bad_alpha.status.code(), Some(3));
    let no_seed = qrd(&["eval", "--kind", "measured", "--alpha", "2", "--rho", s(&f.mixed), "--sigma", s(&f.mixed)]);
    assert_eq!(no_seed.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&no_seed.stderr).contains("seed"));
}

fn channel_files(dir: &Path) -> (PathBuf, PathBuf) {
    let id = write(dir, "id.json", r#"{"d_in":2,"d_out":2,"kraus":[{"rows":2,"cols":2,"re":[1,0,0,1]}]}"#);
    // depolarizing(0.2): Weyl-Kraus with weights 0.85, 0.05, 0.05, 0.05
    let (a, b) = (0.85f64.sqrt(), 0.05f64.sqrt());
    let dep = serde_json::json!({
        "d_in": 2, "d_out": 2,
        "kraus": [
            {"rows": 2, "cols": 2, "re": [a, 0.0, 0.0, a]},
            {"rows": 2, "cols": 2, "re": [0.0, b, b, 0.0]},
            {"rows": 2, "cols": 2, "re": [0.0, 0.0, 0.0, 0.0], "im": [0.0, -b, b, 0.0]},
            {"rows": 2, "cols": 2, "re": [b, 0.0, 0.0, -b]}
        ]
    });
    (id, write(dir, "dep.json", &dep.to_string()))
}

#[test]
fn channel_dmax_and_whitelist() {
    let dir = tempfile::tempdir().unwrap();
    let (id, dep) = channel_files(dir.path());
    let o = qrd(&["channel", "--n1", s(&id), "--n2", s(&dep), "--kind", "dmax", "--alphas", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v = json(&o)["channel_dmax"].as_f64().unwrap();
    assert!((v - (1.0 / 0.85f64).ln()).abs() < 1e-8, "{v}");

    // z = 0.9 (α − 1) is outside the monotone region
    let o = qrd(&[
        "channel",
        "--n1",
        s(&id),
        "--n2",
        s(&dep),
        "--kind",
        "renyi",
        "--alphas",
        "2",
        "--z",
        "0.9",
        "--seed",
        "1",
    ]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn channel_sweep_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let (id, dep) = channel_files(dir.path());
    let args = [
        "channel",
        "--n1",
        s(&id),
        "--n2",
        s(&dep),
        "--kind",
        "sandwiched",
        "--alphas",
        "1.5,2",
        "--restarts",
        "4",
        "--seed",
        "5",
    ];
    let a = qrd(&args);
    let b = qrd(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(json(&a)["dominated"], serde_json::json!(true));
}

#[test]
fn measured_is_reproducible_and_timing_stays_off_stdout() {
    let f = files();
    let args =
        ["eval", "--kind", "measured", "--alpha", "2", "--rho", s(&f.biased), "--sigma", s(&f.mixed), "--seed", "3"];
    let plain = qrd(&args);
    let mut timed_args = args.to_vec();
    timed_args.insert(0, "--timing");
    let timed = qrd(&timed_args);
    assert_eq!(plain.stdout, timed.stdout);
    assert!(String::from_utf8_lossy(&timed.stderr).contains("wall_time_ms"));
    let v = json(&plain)["value"].as_f64().unwrap();
    // commuting pair: measured equals the classical value ln(2·(9/16 + 1/16)) = ln 1.25
    assert!((v - 1.25f64.ln()).abs() < 1e-8, "{v}");
    assert_eq!(json(&plain)["metadata"]["seed"], serde_json::json!(3));
}

#[test]
fn verify_reports_and_records() {
    let dir = tempfile::tempdir().unwrap();
    let records = dir.path().join("records.json");
    let o = qrd(&["verify", "--suite", "nszkola", "--trials", "4", "--seed", "1", "--records", s(&records)]);
    assert_eq!(o.status.code(), Some(0));
    let report = json(&o);
    assert_eq!(report["passed"], serde_json::json!(true));
    let recs: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&records).unwrap()).unwrap();
    assert_eq!(recs.as_array().unwrap().len(), 4);

    let o = qrd(&["verify", "--suite", "caratheodory", "--trials", "3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("reversetests.caratheodory_bound"));

    let o = qrd(&["verify", "--suite", "nope", "--trials", "3", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_overrides_flags_and_rejects_unknown_fields() {
    let f = files();
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out.csv");
    let cfg = write(
        dir.path(),
        "cfg.json",
        &serde_json::json!({ "alpha": [3.0], "z": [1.0], "output": { "path": out.to_str().unwrap(), "format": "csv" } })
            .to_string(),
    );
    let o = qrd(&[
        "--config",
        s(&cfg),
        "sweep",
        "--rho",
        s(&f.biased),
        "--sigma",
        s(&f.mixed),
        "--alphas",
        "2",
        "--z",
        "2",
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("3,1,"), "{text}");

    let bad = write(dir.path(), "bad.json", r#"{"alphas": [1]}"#);
    let o = qrd(&["--config", s(&bad), "eval", "--kind", "dmax", "--rho", s(&f.mixed), "--sigma", s(&f.mixed)]);
    assert_eq!(o.status.code(), Some(2));
}
