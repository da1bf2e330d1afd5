use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_oplab"))
}

fn spec(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../specs").join(name)
}

fn run(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    eprintln!("{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn analyze_example() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec("hyponormal_example.json");
    let o = run(&["analyze", p.to_str().unwrap(), "--dims", "64,128,256", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let flags = &report["classification"]["flags"];
    let all = |class: &str, mode: &str| {
        let v: Vec<bool> = flags[class]
            .as_array()
            .unwrap()
            .iter()
            .filter(|f| f["mode"] == mode)
            .map(|f| f["holds"].as_bool().unwrap())
            .collect();
        assert!(!v.is_empty(), "{class} {mode}");
        v.iter().all(|&b| b)
    };
    assert!(all("hyponormal", "interior"));
    assert!(all("closure_an", "symbolic"));
    assert!(!all("quasinormal", "interior"));
    assert!(dir.path().join("summary.txt").exists());
}

#[test]
fn decompose_example_hyponormal() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec("hyponormal_example.json");
    let o = run(&["decompose", p.to_str().unwrap(), "--form", "hyponormal", "--dims", "128", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    let entries = report["a_entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    let a = entries[0][2].as_f64().unwrap();
    assert!((a - 0.5f64.sqrt()).abs() < 1e-15, "{a}");
    assert_eq!(report["normality"]["normal"], false);
    let csv = std::fs::read_to_string(dir.path().join("a.csv")).unwrap();
    assert!(csv.starts_with("row,col,re,im\n"));
}

#[test]
fn analyze_identity_is_trivial() {
    let dir = tempfile::tempdir().unwrap();
    let p = spec("identity.json");
    let o = run(&["analyze", p.to_str().unwrap(), "--dims", "16,32,64", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(dir.path().join("report.json")).unwrap()).unwrap();
    for (class, flags) in report["classification"]["flags"].as_object().unwrap() {
        for f in flags.as_array().unwrap() {
            assert_eq!(f["holds"], true, "{class}");
        }
    }
    let d = &report["decomposition"];
    assert_eq!(d["upper_blocks"].as_array().unwrap().len(), 0);
    assert_eq!(d["lower_blocks"].as_array().unwrap().len(), 0);
    assert_eq!(d["essential_kind"], "unitary");
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\"kind\": \"weighted_shift\",\n \"params\": {}}").unwrap();
    let o = run(&["analyze", bad.to_str().unwrap(), "--dims", "16,32,64"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("$.params.weights"));

    std::fs::write(&bad, "{\"kind\": ").unwrap();
    let o = run(&["analyze", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    let p = spec("identity.json");
    assert_eq!(run(&["analyze", p.to_str().unwrap(), "--dims", "64,32"]).status.code(), Some(2));
    assert_eq!(run(&["analyze", p.to_str().unwrap(), "--tol-eq", "-1"]).status.code(), Some(2));
    assert_eq!(run(&["decompose", p.to_str().unwrap(), "--form", "sideways"]).status.code(), Some(2));

    let shift = spec("unilateral_shift.json");
    let o = run(&["verify", shift.to_str().unwrap(), "--criterion", "weyl,equal-kernels", "--dims", "32,64"]);
    assert_eq!(o.status.code(), Some(1));
    let o = run(&["decompose", shift.to_str().unwrap(), "--form", "positive", "--dims", "32"]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(run(&["generate", "--class", "quasinormal-AN", "--recipe-less"]).status.code(), Some(2));
}

#[test]
fn verify_identity() {
    let p = spec("identity.json");
    let o = run(&["verify", p.to_str().unwrap(), "--criterion", "invertible,equal-kernels", "--dims", "16,32"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn study_is_deterministic() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let p = spec("hyponormal_example.json");
    for d in [&a, &b] {
        let o = run(&["study", p.to_str().unwrap(), "--dims", "64,96", "--out", d.path().to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0));
    }
    let x = std::fs::read(a.path().join("study.csv")).unwrap();
    let y = std::fs::read(b.path().join("study.csv")).unwrap();
    assert_eq!(x, y);
    let text = String::from_utf8(x).unwrap();
    assert!(text.starts_with("n,metric,value\n"));
    assert!(!text.contains('\r'));
    for line in text.lines().skip(1) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 3);
        let mantissa = cols[2].trim_start_matches('-').split('e').next().unwrap();
        assert_eq!(mantissa.replace('.', "").len(), 17, "{line}");
    }
    assert!(text.contains("96,bb_margin,"));
}

#[test]
fn generate_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    for seed in ["1", "2"] {
        let o = run(&["generate", "--class", "quasinormal-AN", "--seed", seed, "--out", out]);
        assert_eq!(o.status.code(), Some(0));
    }
    let spec_path = dir.path().join("quasinormal-AN-1.json");
    let first = std::fs::read(&spec_path).unwrap();
    let again = run(&["generate", "--class", "quasinormal-AN", "--seed", "1"]);
    assert_eq!(again.stdout, first);
    assert!(dir.path().join("quasinormal-AN-1.construction.json").exists());
    let o = run(&["analyze", spec_path.to_str().unwrap(), "--mode", "symbolic"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("quasinormal      symbolic=true"));

    let recipe = dir.path().join("recipe.json");
    std::fs::write(&recipe, r#"{"class": "quasinormal-AN", "tail": "below"}"#).unwrap();
    let o = run(&["generate", "--recipe", recipe.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("infeasible"));
    assert_eq!(run(&["generate", "--class", "banana"]).status.code(), Some(2));
}
