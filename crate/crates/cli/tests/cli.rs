use std::fs;
use std::process::{Command, Output};

fn rankmetric(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rankmetric"))
        .args(args)
        .env_remove("RANKMETRIC_CAP")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn embed_verify_reports_no_failures() {
    let o = rankmetric(&["embed-verify", "--q", "2", "--n", "1", "--m", "2", "--trials", "1000", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["failures"], 0);
    assert_eq!(v["trials"], 1000);
    assert_eq!(v["seed"], 7);
}

#[test]
fn gluck_ratios_stay_below_bound() {
    let o = rankmetric(&["gluck", "--q", "5", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut rows = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let headers = rows.headers().unwrap().clone();
    assert_eq!(headers.iter().collect::<Vec<_>>(), ["q", "n", "class_rep", "delta", "metric", "value"]);
    let mut count = 0;
    for r in rows.records() {
        let v: f64 = r.unwrap()[5].parse().unwrap();
        assert!(v < 1.6);
        count += 1;
    }
    assert!(count > 0);
}

#[test]
fn csv_ends_with_metadata_trailer() {
    let o = rankmetric(&["--seed", "11", "diameter", "--n", "3", "--q", "2", "--samples", "50"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let last = text.lines().last().unwrap();
    assert!(last.starts_with("# seed=11, version="), "{last}");
    assert!(last.contains("method="));
}

#[test]
fn ramsey_succeeds_on_every_trial() {
    let o = rankmetric(&["ramsey", "--q", "2", "--eps", "0.5", "--k", "3", "--m", "2", "--n", "512", "--trials", "100"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("successes=100,") && text.contains("hypothesis=true"));
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["--seed", "5", "levy", "--n", "6", "--samples", "2000", "--certificate-pairs", "100"];
    let a = rankmetric(&args);
    let b = rankmetric(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = rankmetric(&["--seed", "6", "levy", "--n", "6", "--samples", "2000", "--certificate-pairs", "100"]);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn invalid_input_exits_with_two() {
    assert_eq!(rankmetric(&["gluck", "--q", "6"]).status.code(), Some(2));
    assert_eq!(rankmetric(&["diameter", "--n", "2"]).status.code(), Some(2));
    assert_eq!(rankmetric(&["folner", "--levels", "3..1", "--elements", "(1)"]).status.code(), Some(2));
    assert_eq!(rankmetric(&["center", "--q", "3", "--format", "csv"]).status.code(), Some(2));
}

#[test]
fn cap_exceeded_exits_with_three() {
    let o = Command::new(env!("CARGO_BIN_EXE_rankmetric"))
        .args(["center", "--q", "5"])
        .env("RANKMETRIC_CAP", "100")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    let o = rankmetric(&["--cap", "1000", "folner", "--group", "z:2", "--levels", "6", "--elements", "(1,0)"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn config_supplies_defaults_and_flags_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    fs::write(&cfg, "# folner run\ngroup = z:2\nlevels = 1..2\nelements = (1,0)\n").unwrap();
    let cfg = cfg.to_str().unwrap();
    let o = rankmetric(&["folner", "--config", cfg]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("group=z:2"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 3);
    let o = rankmetric(&["folner", "--config", cfg, "--levels", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().nth(1).unwrap().starts_with("3,64,"));
}

#[test]
fn out_writes_the_artifact_to_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("center.json");
    let o = rankmetric(&["center", "--q", "3", "--n", "2", "-o", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["matches"], true);
    assert_eq!(v["center"].as_array().unwrap().len(), 2);
}
