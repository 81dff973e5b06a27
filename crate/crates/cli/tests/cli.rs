use std::path::Path;
use std::process::{Command, Output};

fn lowsnr(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowsnr"))
        .args(args)
        .arg("--out-dir")
        .arg(dir)
        .output()
        .expect("binary runs")
}

fn lowsnr_plain(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lowsnr")).args(args).output().expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap()
}

#[test]
fn missing_target_mean_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = lowsnr(&["design", "--low-snr", "--D", "100"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--mu-o"));
}

#[test]
fn design_mode_must_be_chosen() {
    let dir = tempfile::tempdir().unwrap();
    let out = lowsnr(&["design", "--mu-o", "10"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    let out = lowsnr(&["design", "--general", "--mu-o", "10"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_trials_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = lowsnr(&["efficiency", "--snr-db", "-10", "--trials", "0"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--trials"));
}

#[test]
fn keyrate_without_eve_table_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = lowsnr(&["keyrate"], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--ie-table"));

    let empty = dir.path().join("ie.csv");
    std::fs::write(&empty, "distance_km,i_e\n").unwrap();
    let out = lowsnr(&["keyrate", "--ie-table", empty.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));

    std::fs::write(&empty, "10;0.1\n").unwrap();
    let out = lowsnr(&["keyrate", "--ie-table", empty.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains(":1:"));
}

#[test]
fn design_reproduces_published_column() {
    let dir = tempfile::tempdir().unwrap();
    let out = lowsnr(&["design", "--low-snr", "--D", "100", "--mu-o", "30"], dir.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&read(&dir.path().join("design.json"))).unwrap();
    let eta = report["eta"].as_f64().unwrap();
    let beta = report["beta"].as_f64().unwrap();
    assert!((eta - 0.968).abs() <= 0.01, "{eta}");
    assert!((beta - 10.5821).abs() <= 0.3, "{beta}");
    assert_eq!(report["meta"]["command"], "design");
    assert_eq!(report["meta"]["config_sha256"].as_str().unwrap().len(), 64);

    // The text distribution feeds back into the simulator.
    let dist = dir.path().join("distribution.txt");
    let out = lowsnr_plain(&["decode-demo", "--k", "190", "--snr-db", "-10", "--dist", dist.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn reruns_are_byte_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let args = [
        "efficiency", "--snr-db", "-10,-5", "--k", "190", "--trials", "3", "--D", "20", "--mu-o", "10", "--seed", "9",
    ];
    for dir in [&a, &b] {
        let out = lowsnr(&args, dir.path());
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    }
    for file in ["efficiency.csv", "trials.csv"] {
        let x = read(&a.path().join(file));
        assert_eq!(x, read(&b.path().join(file)));
        assert!(x.starts_with("# lowsnr efficiency\n# seed=9\n# config_sha256="));
    }
    let rows = read(&a.path().join("trials.csv")).lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 1 + 2 * 3);

    let demo = ["decode-demo", "--k", "190", "--snr-db", "-5", "--D", "20", "--mu-o", "10", "--seed", "3"];
    let x = lowsnr_plain(&demo);
    let y = lowsnr_plain(&demo);
    assert!(x.status.success());
    assert_eq!(x.stdout, y.stdout);
    let v: serde_json::Value = serde_json::from_slice(&x.stdout).unwrap();
    assert_eq!(v["k"], 190);
}

#[test]
fn fixed_rate_column_never_exceeds_rateless() {
    let dir = tempfile::tempdir().unwrap();
    let table = dir.path().join("ie.csv");
    std::fs::write(&table, "distance_km,i_e\n0,0.02\n100,0.0005\n").unwrap();
    let out = lowsnr(
        &["keyrate", "--ie-table", table.to_str().unwrap(), "--p-w", "0.1", "--distances", "0,25,50,75,100"],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = read(&dir.path().join("keyrate.csv"));
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = |name| header.iter().position(|&h| h == name).unwrap();
    let (rate, fixed, dist) = (col("key_rate"), col("key_rate_fixed"), col("distance_km"));
    let rows: Vec<Vec<f64>> = lines.map(|l| l.split(',').map(|f| f.parse().unwrap()).collect()).collect();
    assert_eq!(rows.len(), 5);
    for r in &rows {
        assert!(r[fixed] <= r[rate]);
    }
    assert!(rows.windows(2).all(|w| w[1][rate] <= w[0][rate] && w[0][dist] < w[1][dist]));
    assert!(rows[0][fixed] > 0.0);
}
