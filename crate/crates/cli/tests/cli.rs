use std::path::Path;
use std::process::{Command, Output};

fn subdom(args: &[&str], env_seed: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_subdom"));
    cmd.args(args);
    match env_seed {
        Some(s) => cmd.env("SUBDOM_SEED", s),
        None => cmd.env_remove("SUBDOM_SEED"),
    };
    cmd.output().expect("binary runs")
}

fn csv_body(out: &Output) -> (String, Vec<String>, Vec<Vec<String>>) {
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout.clone()).unwrap();
    let mut lines = text.lines();
    let comment = lines.next().unwrap().to_string();
    let header = lines.next().unwrap().split(',').map(String::from).collect();
    let rows = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    (comment, header, rows)
}

fn num(s: &str) -> f64 {
    s.parse().unwrap()
}

#[test]
fn fig1_peaks_at_integers() {
    let (comment, header, rows) = csv_body(&subdom(&["fig1", "--l", "8", "--grid", "2000"], None));
    assert!(comment.starts_with("# config: {"));
    assert_eq!(header, ["tau", "abs_f", "abs_sinc"]);
    assert_eq!(rows.len(), 2001);
    for r in &rows {
        let (tau, f) = (num(&r[0]), num(&r[1]));
        assert!(f <= 1.0 + 1e-12);
        if tau.fract() == 0.0 {
            assert!((f - 1.0).abs() < 1e-12, "tau={tau} |f|={f}");
        }
    }
}

#[test]
fn fig2_maximum_at_zero() {
    let (_, header, rows) = csv_body(&subdom(&["fig2", "--theta-star", "1.5707963", "--l", "2"], None));
    assert_eq!(header, ["cos_theta", "abs_f"]);
    let zero = rows.iter().find(|r| num(&r[0]) == 0.0).unwrap();
    assert!((num(&zero[1]) - 1.0).abs() < 1e-12);
    assert!(rows.iter().all(|r| num(&r[1]) <= num(&zero[1]) + 1e-12));
}

#[test]
fn schemas() {
    let cases: &[(&[&str], &[&str])] = &[
        (&["fig3", "--l", "2", "--grid", "10"], &["cos_theta", "k", "abs_f", "in_bin"]),
        (&["fig4", "--l", "4", "--trials", "5"], &["omega", "k", "mean_magnitude", "average_a"]),
        (&["fig5", "--grid", "20"], &["cos_theta", "abs_f_kout"]),
        (&["sweep", "--l", "4", "--trials", "5"], &["omega", "k", "mean_magnitude"]),
        (&["rank", "--trials", "3"], &["trial", "rank", "diversity"]),
        (
            &["rank", "--trials", "3", "--rank-model", "paths"],
            &["trial", "rank", "diversity", "cos_rank_approx"],
        ),
        (&["diversity", "--trials", "3", "--l-list", "2,4"], &["l", "mean_diversity"]),
        (&["simulate"], &["vector", "index", "re", "im"]),
    ];
    for (args, columns) in cases {
        let (_, header, rows) = csv_body(&subdom(args, None));
        assert_eq!(&header, columns, "{args:?}");
        assert!(!rows.is_empty());
        assert!(rows.iter().all(|r| r.len() == columns.len()));
    }
}

#[test]
fn sweep_rows_cover_schedule() {
    let (_, _, rows) = csv_body(&subdom(&["sweep", "--l", "4", "--c-index", "2", "--omega-steps", "4", "--trials", "3"], None));
    assert_eq!(rows.len(), 5 * 5);
    assert_eq!(num(&rows.last().unwrap()[0]), std::f64::consts::PI);
}

#[test]
fn validation_exit_code_names_field() {
    let out = subdom(&["fig1", "--l", "0"], None);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("l must be ≥ 1"), "{err}");

    let out = subdom(&["fig5", "--l", "4", "--k-out", "4"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("fig5 requires k_out > l"));

    let out = subdom(&["rank", "--sigma-sq", "-1"], None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("sigma_sq"));

    let out = subdom(&["fig1"], Some("not-a-number"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn io_failures_exit_one() {
    let out = subdom(&["fig1", "--config", "/definitely/missing.toml"], None);
    assert_eq!(out.status.code(), Some(1));
    let out = subdom(&["fig1", "--output", "/definitely/missing/dir/out.csv"], None);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn config_file_and_env_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.toml");
    std::fs::write(&path, "l = 4\ngrid = 10\nseed = 9\n").unwrap();
    let p = path.to_str().unwrap();

    let (comment, _, rows) = csv_body(&subdom(&["fig2", "--config", p, "--grid", "20"], Some("5")));
    assert_eq!(rows.len(), 21);
    assert!(comment.contains("\"l\":4") && comment.contains("\"seed\":9"), "{comment}");

    std::fs::write(&path, "l = 4\n").unwrap();
    let (comment, _, _) = csv_body(&subdom(&["fig2", "--config", p], Some("5")));
    assert!(comment.contains("\"seed\":5"), "{comment}");

    std::fs::write(&path, "unknown_key = 1\n").unwrap();
    assert_eq!(subdom(&["fig2", "--config", p], None).status.code(), Some(2));
}

#[test]
fn json_outputs() {
    let out = subdom(&["fig5", "--grid", "20", "--format", "json"], None);
    assert!(out.status.success());
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["columns"], serde_json::json!(["cos_theta", "abs_f_kout"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 21);
    assert_eq!(v["config"]["k_out"], 4);

    let out = subdom(&["simulate", "--l", "4", "--format", "json"], None);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rec = &v["record"];
    for key in ["input", "subcarriers", "fourier_transmittance", "noise", "output", "domain_output"] {
        let arr = rec[key].as_array().unwrap();
        assert_eq!(arr.len(), 4);
        assert_eq!(arr[0].as_array().unwrap().len(), 2);
    }
}

#[test]
fn simulate_twice_is_identical() {
    let dir = tempfile::tempdir().unwrap();
    let files: Vec<_> = ["a.csv", "b.csv"].iter().map(|n| dir.path().join(n)).collect();
    for f in &files {
        let out = subdom(&["simulate", "--l", "4", "--seed", "7", "--output", f.to_str().unwrap()], None);
        assert!(out.status.success());
        let summary = String::from_utf8_lossy(&out.stderr);
        assert!(summary.contains("rows") && summary.contains("seed 7") && summary.contains("ms"));
    }
    assert_eq!(std::fs::read(&files[0]).unwrap(), std::fs::read(&files[1]).unwrap());
    assert!(Path::new(&files[0]).exists());
}
