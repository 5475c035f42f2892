use std::fs;
use std::path::Path;
use std::process::Command;

use elastic_joint::cli::{run, EXIT_CONFIG, EXIT_FAULT, EXIT_OK};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn cli(args: &[&str]) -> Run {
    let (mut out, mut err) = (Vec::new(), Vec::new());
    let argv = std::iter::once("elastic-joint").chain(args.iter().copied());
    let code = run(argv, &mut out, &mut err);
    Run {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_owned()
}

fn without_out_dir(p: &Path) -> String {
    fs::read_to_string(p)
        .unwrap()
        .lines()
        .filter(|l| !l.starts_with("out_dir"))
        .collect::<Vec<_>>()
        .join("\n")
}

#[test]
fn every_subcommand_is_listed() {
    let r = cli(&["--help"]);
    assert_eq!(r.code, EXIT_OK);
    for sub in [
        "bode-open-loop",
        "dob-verify",
        "pid-step",
        "leaky-demo",
        "discretize",
        "pendulum-chirp",
        "fit",
    ] {
        assert!(r.stdout.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn discretize_writes_config_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("pn");
    let r = cli(&["discretize", "--tf", "pn", "--rate", "1000", "--out", path(&out)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert!(out.join("config.toml").is_file());
    let summary: toml::Table = fs::read_to_string(out.join("summary.toml")).unwrap().parse().unwrap();
    assert_eq!(summary["experiment"].as_str(), Some("discretize"));
}

#[test]
fn bad_value_names_its_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[control]\nk_p = -1.0\n");
    let r = cli(&["pid-step", "--config", &cfg, "--out", path(dir.path())]);
    assert_eq!(r.code, EXIT_CONFIG);
    assert!(r.stderr.contains("control.k_p"), "{}", r.stderr);
}

#[test]
fn unknown_key_names_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[plant]\nbogus = 1\n");
    let r = cli(&["pid-step", "--config", &cfg]);
    assert_eq!(r.code, EXIT_CONFIG);
    assert!(r.stderr.contains("plant.bogus"), "{}", r.stderr);
}

#[test]
fn wrong_type_names_its_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "bad.toml", "[scenario]\nduration = \"long\"\n");
    let r = cli(&["pid-step", "--config", &cfg]);
    assert_eq!(r.code, EXIT_CONFIG);
    assert!(r.stderr.contains("scenario.duration"), "{}", r.stderr);
}

#[test]
fn usage_errors_are_config_errors() {
    assert_eq!(cli(&["no-such-experiment"]).code, EXIT_CONFIG);
    assert_eq!(cli(&["discretize", "--tf", "nope"]).code, EXIT_CONFIG);
}

#[test]
fn unstable_loop_is_a_numeric_fault() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "hot.toml", "[control]\nk_p = 1e6\n");
    let r = cli(&["pid-step", "--config", &cfg, "--out", path(&dir.path().join("o"))]);
    assert_eq!(r.code, EXIT_FAULT);
    assert!(r.stderr.contains("numeric fault"), "{}", r.stderr);
}

#[test]
fn same_seed_same_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "noisy.toml", "[plant]\nforce_noise = 2.0\n");
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let r = cli(&["pid-step", "--config", &cfg, "--seed", "17", "--out", path(out)]);
        assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    }
    let mut names: Vec<_> = fs::read_dir(&a).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert!(names.len() > 2);
    for name in names.iter().filter(|n| *n != "config.toml") {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name:?}"
        );
    }
    assert_eq!(
        without_out_dir(&a.join("config.toml")),
        without_out_dir(&b.join("config.toml"))
    );
    let c = dir.path().join("c");
    cli(&["pid-step", "--config", &cfg, "--seed", "18", "--out", path(&c)]);
    assert_ne!(
        fs::read(a.join("summary.toml")).unwrap(),
        fs::read(c.join("summary.toml")).unwrap()
    );
}

#[test]
fn echoed_config_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first");
    let r = cli(&["leaky-demo", "--seed", "5", "--out", path(&first)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let echoed = first.join("config.toml");
    let second = dir.path().join("second");
    let r = cli(&["leaky-demo", "--config", path(&echoed), "--out", path(&second)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    assert_eq!(without_out_dir(&echoed), without_out_dir(&second.join("config.toml")));
    assert_eq!(
        fs::read(first.join("summary.toml")).unwrap(),
        fs::read(second.join("summary.toml")).unwrap()
    );
}

#[test]
fn config_for_another_experiment_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("leaky");
    assert_eq!(cli(&["leaky-demo", "--out", path(&out)]).code, EXIT_OK);
    let r = cli(&["pid-step", "--config", path(&out.join("config.toml"))]);
    assert_eq!(r.code, EXIT_CONFIG, "{}", r.stderr);
}

#[test]
fn chirp_then_fit() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "short.toml",
        "[scenario]\nduration = 10.0\n[sysid]\nf_start = 1.0\ngrid_lo_hz = 1.0\n",
    );
    let bode = dir.path().join("bode");
    let r = cli(&["bode-open-loop", "--config", &cfg, "--out", path(&bode)]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let fit = dir.path().join("fit");
    let r = cli(&[
        "fit",
        "--frf",
        path(&bode.join("frf.csv")),
        "--num",
        "0",
        "--den",
        "3",
        "--out",
        path(&fit),
    ]);
    assert_eq!(r.code, EXIT_OK, "{}", r.stderr);
    let summary: toml::Table = fs::read_to_string(fit.join("summary.toml")).unwrap().parse().unwrap();
    assert_eq!(summary["stable"].as_bool(), Some(true));
    assert_eq!(summary["den"].as_array().unwrap().len(), 4);
}

#[test]
fn binary_exit_status_matches() {
    let dir = tempfile::tempdir().unwrap();
    let bin = env!("CARGO_BIN_EXE_elastic-joint");
    let ok = Command::new(bin)
        .args(["discretize", "--out", path(dir.path())])
        .output()
        .unwrap();
    assert_eq!(ok.status.code(), Some(EXIT_OK));
    let bad = Command::new(bin).args(["discretize", "--rate=-5"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(EXIT_CONFIG));
    assert!(String::from_utf8_lossy(&bad.stderr).contains("lti.rate_hz"));
}
