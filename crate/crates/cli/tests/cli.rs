use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use decay_core::{Dataset, Role};
use tempfile::TempDir;

fn decay(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_decay"))
        .args(args)
        .current_dir(dir)
        .env_remove("DECAY_DATA_DIR")
        .output()
        .expect("spawn decay")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn without_timestamp(json: &str) -> serde_json::Value {
    let mut v: serde_json::Value = serde_json::from_str(json).unwrap();
    v.as_object_mut().unwrap().remove("timestamp");
    v
}

#[test]
fn predict_writes_table_and_plot_data() {
    let dir = TempDir::new().unwrap();
    let o = decay(dir.path(), &["predict", "--data", "embedded", "--out", "pred.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("pred.csv")).unwrap();
    assert_eq!(text.lines().count(), 101);
    assert!(text.starts_with("row,label,decay_class,role,"));
    let alpha = fs::read_to_string(dir.path().join("pred_alpha.csv")).unwrap();
    assert!(alpha.starts_with("lg_T_exp,lg_T_model\n"));
    let counted: usize = ["alpha", "cluster", "spontaneous_fission"]
        .iter()
        .map(|c| fs::read_to_string(dir.path().join(format!("pred_{c}.csv"))).unwrap().lines().count() - 1)
        .sum();
    assert_eq!(counted, 100);

    let manifest = fs::read_to_string(dir.path().join("pred.csv.manifest.json")).unwrap();
    let v: serde_json::Value = serde_json::from_str(&manifest).unwrap();
    assert_eq!(v["command"], "predict");
    assert_eq!(v["params_sha256"].as_str().unwrap().len(), 64);
    assert!(v["timestamp"].is_string());
}

#[test]
fn params_file_round_trip_matches_embedded() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("table4.params"), decay_core::ParameterSet::table4().to_file_string()).unwrap();
    let a = decay(dir.path(), &["predict", "--params", "table4.params", "--out", "a.csv"]);
    let b = decay(dir.path(), &["predict", "--out", "b.csv"]);
    assert!(a.status.success() && b.status.success());
    let read = |n: &str| fs::read(dir.path().join(n)).unwrap();
    assert_eq!(read("a.csv"), read("b.csv"));
}

#[test]
fn repeated_runs_are_identical() {
    let dir = TempDir::new().unwrap();
    for out in ["one.csv", "two.csv"] {
        let o = decay(dir.path(), &["simulate", "--barrier", "3", "--traj", "64", "--seed", "5", "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let read = |n: &str| fs::read_to_string(dir.path().join(n)).unwrap();
    assert_eq!(read("one.csv"), read("two.csv"));
    assert_eq!(read("one_summary.txt"), read("two_summary.txt"));
    let m1 = without_timestamp(&read("one.csv.manifest.json"));
    let m2 = without_timestamp(&read("two.csv.manifest.json"));
    assert_eq!(m1["seed"], 5);
    assert_eq!(m1["inputs"], m2["inputs"]);
}

#[test]
fn simulate_report_layout() {
    let dir = TempDir::new().unwrap();
    let o = decay(dir.path(), &["simulate", "--barrier", "3", "--gamma", "1.0", "--traj", "20", "--out", "sim.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(dir.path().join("sim.csv")).unwrap();
    assert!(csv.starts_with("traj_id,escape_time,censored\n"));
    assert_eq!(csv.lines().count(), 21);
    let summary = String::from_utf8(o.stdout).unwrap();
    for key in ["mfpt =", "mfpt_stderr =", "rate =", "analytic_rate =", "ratio ="] {
        assert!(summary.contains(key), "{key}");
    }
}

#[test]
fn help_and_usage_exit_codes() {
    let dir = TempDir::new().unwrap();
    let help = decay(dir.path(), &["predict", "--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&help.stdout).contains("--params"));
    let bad = decay(dir.path(), &["predict", "--bogus"]);
    assert_eq!(bad.status.code(), Some(2));
    let none = decay(dir.path(), &[]);
    assert_eq!(none.status.code(), Some(2));
    let bad_variant = decay(dir.path(), &["predict", "--variant", "sideways"]);
    assert_eq!(bad_variant.status.code(), Some(2));
}

#[test]
fn missing_file_names_path() {
    let dir = TempDir::new().unwrap();
    let o = decay(dir.path(), &["predict", "--data", "missing.csv"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("missing.csv"));
}

#[test]
fn too_few_fit_rows_is_a_model_error() {
    let dir = TempDir::new().unwrap();
    let mut ds = Dataset::embedded();
    let mut kept = 0;
    ds.records.retain(|r| {
        if r.role != Role::Fit {
            return true;
        }
        kept += 1;
        kept <= 20
    });
    let mut buf = Vec::new();
    ds.write_csv(&mut buf).unwrap();
    fs::write(dir.path().join("small.csv"), buf).unwrap();
    let o = decay(dir.path(), &["fit", "--data", "small.csv", "--init", "zero"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("underdetermined"), "{}", stderr(&o));
    assert!(!dir.path().join("fit.params").exists());
}

#[test]
fn fit_report_parses_as_parameters() {
    let dir = TempDir::new().unwrap();
    let o = decay(dir.path(), &["fit", "--max-iter", "3", "--out", "fit.params"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(dir.path().join("fit.params")).unwrap();
    for key in ["# chi2 =", "# ndf = 73", "# rms_lg =", "# converged =", "# iterations ="] {
        assert!(text.contains(key), "{key}");
    }
    decay_core::parse_params(&text).unwrap();
}

#[test]
fn data_dir_overrides_embedded_tables() {
    let dir = TempDir::new().unwrap();
    let mut ds = Dataset::embedded();
    ds.records.truncate(30);
    let mut buf = Vec::new();
    ds.write_csv(&mut buf).unwrap();
    fs::write(dir.path().join("nuclides.csv"), buf).unwrap();
    fs::write(dir.path().join("table4.params"), decay_core::ParameterSet::table4().to_file_string()).unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_decay"))
        .args(["predict", "--data", "embedded", "--out", "p.csv"])
        .current_dir(dir.path())
        .env("DECAY_DATA_DIR", dir.path())
        .output()
        .unwrap();
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(fs::read_to_string(dir.path().join("p.csv")).unwrap().lines().count(), 31);
}

#[test]
fn validate_invert_compare_outputs() {
    let dir = TempDir::new().unwrap();
    assert!(decay(dir.path(), &["validate", "--out", "v.csv"]).status.success());
    let v = fs::read_to_string(dir.path().join("v.csv")).unwrap();
    assert_eq!(v.lines().count(), 6);
    assert!(decay(dir.path(), &["invert", "--out", "i.csv"]).status.success());
    let i = fs::read_to_string(dir.path().join("i.csv")).unwrap();
    assert_eq!(i.lines().count(), 3);
    assert!(decay(dir.path(), &["compare", "--out", "c.csv"]).status.success());
    let gn = fs::read_to_string(dir.path().join("c_gn.csv")).unwrap();
    assert!(gn.starts_with("family,source,n,C,B,R2\n"));
    assert!(gn.contains("\nPo,gamow,"));
}

#[test]
fn printed_variant_is_selectable() {
    let dir = TempDir::new().unwrap();
    let o = decay(dir.path(), &["predict", "--variant", "as-printed", "--out", "p.csv"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let m = fs::read_to_string(dir.path().join("p.csv.manifest.json")).unwrap();
    assert!(m.contains("as-printed"));
    let rms: f64 = String::from_utf8(o.stdout)
        .unwrap()
        .lines()
        .find_map(|l| l.strip_prefix("rms_lg_fit = "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(rms > 1.0, "{rms}");
}
