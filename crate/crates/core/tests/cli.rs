use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use dataqa::dataset::write_csv;
use dataqa::synthetic::{gaussian_blobs, BlobSpec};

fn dataqa(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dataqa"))
        .args(args)
        .output()
        .unwrap()
}

fn text(bytes: &[u8]) -> String {
    String::from_utf8_lossy(bytes).into_owned()
}

struct Fixture {
    dir: tempfile::TempDir,
}

impl Fixture {
    fn new() -> Self {
        let dir = tempfile::tempdir().unwrap();
        write_csv(
            &gaussian_blobs(&BlobSpec::new(100, 10, 5.0, 1)),
            dir.path().join("blobs.csv"),
        )
        .unwrap();
        write_csv(
            &gaussian_blobs(&BlobSpec::new(40, 10, 5.0, 2)),
            dir.path().join("blobs_test.csv"),
        )
        .unwrap();
        Self { dir }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn arg(&self, name: &str) -> String {
        self.path(name).to_string_lossy().into_owned()
    }
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap()
}

#[test]
fn assess_reports_are_byte_identical() {
    let f = Fixture::new();
    let data = f.arg("blobs.csv");
    let mut reports = Vec::new();
    for (i, jobs) in ["1", "1", "8"].iter().enumerate() {
        let out = f.arg(&format!("r{i}.json"));
        let o = dataqa(&[
            "--jobs",
            jobs,
            "assess",
            "--data",
            &data,
            "--label",
            "y",
            "--seed",
            "7",
            "--resamples",
            "4",
            "--output",
            &out,
        ]);
        assert!(o.status.success(), "{}", text(&o.stderr));
        let line = text(&o.stdout);
        assert!(
            line.starts_with("qa=")
                && line.contains(" qa1=")
                && line.contains(" qa2=")
                && line.contains(" level=")
        );
        reports.push(read(&f.path(&format!("r{i}.json"))));
    }
    assert_eq!(reports[0], reports[1]);
    assert_eq!(reports[0], reports[2]);
    let json: serde_json::Value = serde_json::from_str(&reports[0]).unwrap();
    assert_eq!(json["score"]["resample_count"], 4);
    assert_eq!(json["config"]["master_seed"], 7);
    assert_eq!(json["derived_seeds"]["splits"].as_array().unwrap().len(), 4);
}

#[test]
fn trusted_test_gives_one_resample() {
    let f = Fixture::new();
    let o = dataqa(&[
        "assess",
        "--data",
        &f.arg("blobs.csv"),
        "--label",
        "y",
        "--test",
        &f.arg("blobs_test.csv"),
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["score"]["resample_count"], 1);
}

#[test]
fn single_class_exits_with_user_error() {
    let f = Fixture::new();
    std::fs::write(f.path("single.csv"), "x,y\n1,a\n2,a\n3,a\n").unwrap();
    let o = dataqa(&["assess", "--data", &f.arg("single.csv"), "--label", "y"]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    assert!(err.contains("class") && err.contains('1'), "{err}");
}

#[test]
fn bad_input_exit_codes() {
    let f = Fixture::new();
    assert_eq!(
        dataqa(&["assess", "--data", &f.arg("nope.csv"), "--label", "y"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        dataqa(&["assess", "--data", &f.arg("blobs.csv")])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(dataqa(&["assess", "--bogus"]).status.code(), Some(2));
    assert_eq!(
        dataqa(&[
            "assess",
            "--data",
            &f.arg("blobs.csv"),
            "--label",
            "y",
            "--p",
            "1.5"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        dataqa(&[
            "sweep",
            "--data",
            &f.arg("blobs.csv"),
            "--label",
            "y",
            "--from",
            "0.5",
            "--to",
            "0.2"
        ])
        .status
        .code(),
        Some(2)
    );
}

fn csv_fields(s: &str) -> Vec<Vec<String>> {
    s.lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn inject_missing_blanks_exact_cell_count() {
    let f = Fixture::new();
    let o = dataqa(&[
        "inject",
        "--data",
        &f.arg("blobs.csv"),
        "--label",
        "y",
        "--error",
        "missing",
        "--rate",
        "0.05",
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let rows = csv_fields(&text(&o.stdout));
    assert_eq!(rows.len(), 100);
    let empty = rows.iter().flatten().filter(|c| c.is_empty()).count();
    assert_eq!(empty, 50);
}

#[test]
fn inject_rate_zero_is_identity() {
    let f = Fixture::new();
    let o = dataqa(&[
        "inject",
        "--data",
        &f.arg("blobs.csv"),
        "--label",
        "y",
        "--error",
        "outlier",
        "--rate",
        "0",
    ]);
    assert!(o.status.success());
    let parse = |s: &str| -> Vec<Vec<f64>> {
        csv_fields(s)
            .iter()
            .map(|r| r.iter().map(|c| c.parse().unwrap()).collect())
            .collect()
    };
    assert_eq!(parse(&text(&o.stdout)), parse(&read(&f.path("blobs.csv"))));
}

#[test]
fn inject_fuzzing_replaces_rows() {
    let f = Fixture::new();
    write_csv(
        &gaussian_blobs(&BlobSpec::new(50, 4, 5.0, 3)),
        f.path("small.csv"),
    )
    .unwrap();
    let out = f.arg("fuzzed.csv");
    let o = dataqa(&[
        "inject",
        "--data",
        &f.arg("small.csv"),
        "--label",
        "y",
        "--error",
        "fuzzing",
        "--rate",
        "0.1",
        "--seed",
        "4",
        "--output",
        &out,
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let before = csv_fields(&read(&f.path("small.csv")));
    let after = csv_fields(&read(&f.path("fuzzed.csv")));
    assert_eq!(before.len(), after.len());
    assert_eq!(before.iter().zip(&after).filter(|(a, b)| a != b).count(), 5);
}

fn aggregate_levels(csv: &str) -> Vec<String> {
    csv.lines()
        .filter(|l| l.starts_with("aggregate,"))
        .map(|l| l.split(',').nth(2).unwrap().to_string())
        .collect()
}

#[test]
fn sweep_level_grids() {
    let f = Fixture::new();
    let data = f.arg("blobs.csv");
    let o = dataqa(&[
        "sweep",
        "--data",
        &data,
        "--label",
        "y",
        "--errors",
        "missing",
        "--from",
        "0",
        "--to",
        "0.95",
        "--step",
        "0.05",
        "--iterations",
        "1",
        "--models",
        "gaussian_nb",
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert_eq!(aggregate_levels(&text(&o.stdout)).len(), 20);

    let out = f.arg("grid.csv");
    let o = dataqa(&[
        "sweep",
        "--data",
        &data,
        "--label",
        "y",
        "--errors",
        "fuzzing",
        "--from",
        "0.3",
        "--to",
        "0.5",
        "--step",
        "0.05",
        "--iterations",
        "1",
        "--models",
        "knn",
        "--output",
        &out,
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    assert_eq!(
        aggregate_levels(&read(&f.path("grid.csv"))),
        ["0.3", "0.35", "0.4", "0.45", "0.5"]
    );
}

#[test]
fn compare_has_max_and_blend_columns() {
    let f = Fixture::new();
    let o = dataqa(&[
        "compare",
        "--data",
        &f.arg("blobs.csv"),
        "--label",
        "y",
        "--errors",
        "missing",
        "--levels",
        "0,0.4",
        "--iterations",
        "1",
        "--models",
        "gaussian_nb,knn",
        "--alphas",
        "0.25,0.5,0.75",
    ]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let out = text(&o.stdout);
    let mut lines = out.lines();
    assert_eq!(
        lines.next().unwrap(),
        "error,level,qa1,qa2,max,alpha=0.25,alpha=0.5,alpha=0.75"
    );
    for l in lines {
        let v: Vec<f64> = l.split(',').skip(2).map(|x| x.parse().unwrap()).collect();
        assert!(v[3..].iter().all(|b| *b <= v[2]));
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let f = Fixture::new();
    let cfg = f.path("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "data = {:?}\nlabel = \"y\"\nseed = 3\nresamples = 2\nmodels = [\"gaussian_nb\", \"knn\"]\n",
            f.arg("blobs.csv")
        ),
    )
    .unwrap();
    let o = dataqa(&["--config", &f.arg("run.toml"), "assess"]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["score"]["resample_count"], 2);
    assert_eq!(json["config"]["suite"].as_array().unwrap().len(), 2);

    let o = dataqa(&[
        "--config",
        &f.arg("run.toml"),
        "assess",
        "--resamples",
        "3",
        "--seed",
        "9",
    ]);
    let json: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(json["score"]["resample_count"], 3);
    assert_eq!(json["config"]["master_seed"], 9);

    std::fs::write(&cfg, "resampels = 2\n").unwrap();
    assert_eq!(
        dataqa(&["--config", &f.arg("run.toml"), "assess"])
            .status
            .code(),
        Some(2)
    );
}
