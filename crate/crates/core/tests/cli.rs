use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use sha2::{Digest, Sha256};

const SMALL_1D: &str = r#"
schema_version = 1
scenario = "small-1d"
seed = 5

[grid]
dim = 1
n = 32
L = 1.0

[entropy]
m = 2.0
k = 1.0

[potentials]
c_k = 0.05
kernel = { kind = "wrapped-gaussian", amplitude = -1.0, width = 0.25 }
confinement = { kind = "cosine-mode", amplitude = 0.1, modes = [1] }

[initial]
density = { kind = "gaussian-bump", base = 0.5, amplitude = 1.0, width = 0.2 }
velocity = { kind = "well-prepared" }

[solver]
epsilon = 0.1
t_end = T_END
snapshot_stride = 20

[output]
formats = ["csv", "binary"]
"#;

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_relax-hydro"))
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .env("RELAX_HYDRO_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    fs::write(&path, text).unwrap();
    path
}

fn sorted_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> =
        fs::read_dir(dir).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    names.sort();
    names
}

#[test]
fn euler_is_deterministic() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL_1D.replace("T_END", "0.05"));
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(run(&["euler"], &cfg, &a).status.code(), Some(0));
    assert_eq!(run(&["euler"], &cfg, &b).status.code(), Some(0));
    let files = sorted_files(&a);
    assert_eq!(files, sorted_files(&b));
    assert!(files.iter().any(|f| f.ends_with(".csv")));
    for f in &files {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
}

#[test]
fn zero_horizon_writes_only_the_initial_snapshot() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL_1D.replace("T_END", "0.0"));
    let out = tmp.path().join("out");
    let res = run(&["euler"], &cfg, &out);
    assert_eq!(res.status.code(), Some(0), "{}", String::from_utf8_lossy(&res.stderr));
    let snaps: Vec<String> = sorted_files(&out).into_iter().filter(|f| f.starts_with("euler_rho_")).collect();
    assert_eq!(snaps, ["euler_rho_000000.bin", "euler_rho_000000.csv"]);
    let steps = fs::read_to_string(out.join("euler_steps.csv")).unwrap();
    assert_eq!(steps.lines().count(), 2);
}

#[test]
fn report_hashes_match_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL_1D.replace("T_END", "0.05"));
    let out = tmp.path().join("out");
    let res = run(&["limit"], &cfg, &out);
    assert_eq!(res.status.code(), Some(0));
    let report = fs::read_to_string(out.join("report.txt")).unwrap();
    assert_eq!(report, String::from_utf8(res.stdout).unwrap());
    assert!(report.ends_with("result: PASS\n"));
    let mut seen = 0;
    for line in report.lines().filter(|l| l.starts_with("artifact ")) {
        let mut parts = line.split_whitespace().skip(1);
        let name = parts.next().unwrap();
        let hash = parts.next().unwrap().strip_prefix("sha256=").unwrap();
        let bytes = fs::read(out.join(name)).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&bytes)), hash, "{name}");
        seen += 1;
    }
    assert!(seen > 0);
}

#[test]
fn invalid_config_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");

    let cfg = write_config(tmp.path(), &SMALL_1D.replace("T_END", "-1.0"));
    let res = run(&["euler"], &cfg, &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("t-end"));

    let cfg = write_config(tmp.path(), &SMALL_1D.replace("T_END", "= oops"));
    let res = run(&["euler"], &cfg, &out);
    assert_eq!(res.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&res.stderr).contains("line"));

    let cfg = write_config(tmp.path(), &SMALL_1D.replace("T_END", "0.1"));
    let res = run(&["subsolution"], &cfg, &out);
    assert_eq!(res.status.code(), Some(2), "1D subsolution is a usage error");
}

#[test]
fn missing_config_exits_with_3() {
    let tmp = tempfile::tempdir().unwrap();
    let res = run(&["euler"], &tmp.path().join("absent.toml"), &tmp.path().join("out"));
    assert_eq!(res.status.code(), Some(3));
}

#[test]
fn bad_thread_count_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL_1D.replace("T_END", "0.0"));
    let res = Command::new(env!("CARGO_BIN_EXE_relax-hydro"))
        .args(["euler", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path().join("out"))
        .env("RELAX_HYDRO_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(res.status.code(), Some(2));
}
