use std::path::Path;
use std::process::{Command, Output};

fn minsurf(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_minsurf"))
        .args(args)
        .env("MINSURF_OUTPUT_DIR", out)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn long_help_lists_every_config_section() {
    let dir = tempfile::tempdir().unwrap();
    let o = minsurf(&["--help"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    for key in [
        "seed",
        "output_dir",
        "[scenario]",
        "[grid]",
        "[newton]",
        "[forward]",
        "[linearization]",
        "[cgo]",
        "[recovery]",
        "[comparison]",
        "[tolerances]",
        "MINSURF_OUTPUT_DIR",
    ] {
        assert!(text.contains(key), "help is missing {key}");
    }
    for cmd in ["verify-derivation", "forward", "dn", "linearize", "cgo-check", "recover", "compare", "report"] {
        assert!(text.contains(cmd), "help is missing {cmd}");
    }
}

#[test]
fn verify_derivation_writes_outputs_into_the_env_directory() {
    let dir = tempfile::tempdir().unwrap();
    let o = minsurf(&["verify-derivation"], dir.path());
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("PASS"));
    for f in ["run.json", "timings.json"] {
        assert!(dir.path().join(f).is_file(), "{f} missing");
    }
    let tables: Vec<_> = std::fs::read_dir(dir.path().join("tables")).unwrap().collect();
    assert!(!tables.is_empty());

    let again = minsurf(&["report"], dir.path());
    assert!(again.status.success());
    assert!(stdout(&again).contains("derivation"));
}

#[test]
fn output_dir_flag_beats_the_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let flag_dir = tempfile::tempdir().unwrap();
    let flag = flag_dir.path().to_str().unwrap();
    let o = minsurf(&["verify-derivation", "--output-dir", flag], env_dir.path());
    assert!(o.status.success());
    assert!(flag_dir.path().join("run.json").is_file());
    assert!(!env_dir.path().join("run.json").exists());
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["dn", "--scenario", "exp-cubic", "--grid", "17", "--f-spec", "trig:1,-0.5;0.2", "--amplitude", "0.02"];
    let files = ["run.json", "tables/dn.record.csv", "fields/dn.solution.csv"];
    let read = || -> Vec<String> {
        files
            .iter()
            .map(|f| std::fs::read_to_string(dir.path().join(f)).unwrap_or_else(|e| panic!("{f}: {e}")))
            .collect()
    };
    assert!(minsurf(&args, dir.path()).status.success());
    let first = read();
    assert!(minsurf(&args, dir.path()).status.success());
    for (f, (a, b)) in files.iter().zip(first.iter().zip(read())) {
        assert!(*a == b, "{f} differs between runs");
    }
}

#[test]
fn bad_config_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "[grid]\nnodez = 3\n").unwrap();
    let o = minsurf(&["forward", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
}

#[test]
fn amplitude_above_the_small_data_bound_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let o = minsurf(&["dn", "--grid", "17", "--amplitude", "5"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn report_without_a_run_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = minsurf(&["report", "--dir", dir.path().to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(2));
}
