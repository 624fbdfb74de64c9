use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn pathvisc(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pathvisc"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("PATHVISC_OUT")
        .output()
        .unwrap()
}

fn config(name: &str) -> String {
    configs().join(name).to_string_lossy().into_owned()
}

#[test]
fn unknown_verb_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(pathvisc(&["frobnicate"], dir.path()).status.code(), Some(2));
}

#[test]
fn bad_config_exits_2_with_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    std::fs::write(&cfg, "[grid]\npoints = lots\n").unwrap();
    let o = pathvisc(&["solve", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("[grid] points"));
}

#[test]
fn compare1_zigzag_passes_and_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let oa = pathvisc(&["compare1", "--config", &config("zigzag.ini")], a.path());
    let ob = pathvisc(&["compare1", "--config", &config("zigzag.ini")], b.path());
    assert_eq!(
        oa.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&oa.stdout)
    );
    let stdout = String::from_utf8_lossy(&oa.stdout);
    assert!(stdout.starts_with("name,measured,bound,margin,status\nzigzag-flat,"));
    assert!(stdout.contains(",PASS"));
    let report = std::fs::read_to_string(a.path().join("report.csv")).unwrap();
    assert_eq!(report.lines().count(), 2);
    assert_eq!(
        report,
        std::fs::read_to_string(b.path().join("report.csv")).unwrap()
    );
    assert_eq!(oa.stdout, ob.stdout);
}

#[test]
fn bound_failure_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("tight.ini");
    std::fs::write(
        &cfg,
        "[grid]\npoints = 40\n[signal.a]\nkind = linear\nslope = 1\n[run]\nhorizon = 0.2\n[geometry]\nupsilon = 1e-3\n",
    )
    .unwrap();
    let o = pathvisc(&["compare1", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn seed_override_changes_brownian_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bm.ini");
    std::fs::write(
        &cfg,
        "[grid]\npoints = 20\n[signal.a]\nkind = brownian\nlevel = 3\n[run]\nhorizon = 0.25\n",
    )
    .unwrap();
    let read = |seed: &str, sub: &str| {
        let out = dir.path().join(sub);
        let o = pathvisc(
            &["solve", "--config", cfg.to_str().unwrap(), "--seed", seed],
            &out,
        );
        assert_eq!(o.status.code(), Some(0));
        std::fs::read_to_string(out.join("signal.csv")).unwrap()
    };
    assert_ne!(read("1", "a"), read("2", "b"));
    assert_eq!(read("1", "c"), read("1", "d"));
}

#[test]
fn env_var_sets_default_out_dir() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("s.ini");
    std::fs::write(&cfg, "[grid]\npoints = 16\n[run]\nhorizon = 0.1\n").unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pathvisc"))
        .args(["solve", "--config", cfg.to_str().unwrap()])
        .env("PATHVISC_OUT", dir.path().join("envout"))
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("envout/solution.csv").exists());
}
