use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn polybm(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polybm"))
        .args(args)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn same_seed_gives_identical_bytes() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    let args = ["strong", "--seed", "42", "--paths", "300", "--steps", "5,10,20", "--workers", "2"];
    assert!(polybm(&args, &a).status.success());
    assert!(polybm(&args, &b).status.success());
    assert_eq!(fs::read(a.join("strong.csv")).unwrap(), fs::read(b.join("strong.csv")).unwrap());
    assert_eq!(fs::read(a.join("slopes.csv")).unwrap(), fs::read(b.join("slopes.csv")).unwrap());

    let paths = ["paths", "--seed", "42", "--paths", "3", "--degree", "5"];
    assert!(polybm(&paths, &a).status.success());
    assert!(polybm(&paths, &b).status.success());
    assert_eq!(read(&a, "paths.csv"), read(&b, "paths.csv"));
}

#[test]
fn headers_match_the_documented_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    assert!(polybm(&["basis", "--max-k", "2", "--grid", "4"], d).status.success());
    assert!(polybm(&["paths", "--paths", "1"], d).status.success());
    assert!(polybm(&["igbm-paths", "--steps", "10", "--paths", "1"], d).status.success());
    assert!(polybm(&["weak", "--paths", "200", "--steps", "5,10,20"], d).status.success());
    let first = |name: &str| read(d, name).lines().next().unwrap().to_string();
    assert_eq!(first("basis.csv"), "k,t,e_k(t)");
    assert_eq!(first("paths.csv"), "path_id,t,kl_value");
    assert_eq!(first("coefficients.csv"), "path_id,k,I_k");
    assert_eq!(first("igbm_paths.csv"), "path_id,t,y");
    assert_eq!(first("weak.csv"), "scheme,N,h,error,std_err");
    assert_eq!(first("slopes.csv"), "scheme,metric,slope,slope_stderr");
    assert_eq!(read(d, "basis.csv").lines().count(), 1 + 2 * 5);
    assert_eq!(read(d, "weak.csv").lines().count(), 1 + 5 * 3);
    assert!(read(d, "slopes.csv").lines().skip(1).all(|l| l.contains(",weak,")));
}

#[test]
fn manifest_reloads_as_config() {
    let tmp = tempfile::tempdir().unwrap();
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert!(polybm(&["igbm-paths", "--seed", "9", "--steps", "20", "--paths", "2", "--sigma", "0.3"], &a)
        .status
        .success());
    let manifest = a.join("manifest.txt");
    assert!(read(&a, "manifest.txt").contains("sigma = 0.3"));
    let out = polybm(&["igbm-paths", "--config", manifest.to_str().unwrap()], &b);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(read(&a, "igbm_paths.csv"), read(&b, "igbm_paths.csv"));
}

#[test]
fn flags_override_config_file() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.cfg");
    fs::write(&cfg, "# basis only\nmax_k = 2\ngrid = 3\n").unwrap();
    let out = tmp.path().join("o");
    assert!(polybm(&["basis", "--config", cfg.to_str().unwrap(), "--grid", "5"], &out).status.success());
    assert_eq!(read(&out, "basis.csv").lines().count(), 1 + 2 * 6);
}

#[test]
fn invalid_input_fails_with_one_line() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.cfg");
    fs::write(&cfg, "seeed = 1\n").unwrap();
    for args in [
        vec!["strong", "--steps", "0"],
        vec!["weak", "--steps", "10,10,20"],
        vec!["basis", "--max-k", "500"],
        vec!["igbm-paths", "--scheme", "heun"],
        vec!["igbm-paths", "--sigma", "-1"],
        vec!["basis", "--config", cfg.to_str().unwrap()],
    ] {
        let out = polybm(&args, tmp.path());
        assert!(!out.status.success(), "{args:?}");
        let err = String::from_utf8_lossy(&out.stderr);
        assert_eq!(err.trim_end().lines().count(), 1, "{args:?}: {err}");
        assert!(err.starts_with("error: "), "{err}");
    }
}

#[test]
fn check_passes() {
    let tmp = tempfile::tempdir().unwrap();
    let out = polybm(&["check"], tmp.path());
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stdout));
    assert!(String::from_utf8_lossy(&out.stdout).contains(", 0 failed"));
}
