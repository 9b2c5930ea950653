use nls_gibbs_lab::config::RunConfig;
use nls_gibbs_lab::manifest::RunManifest;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nls-lab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("NLS_LAB_SEED")
        .env_remove("NLS_LAB_CONFIG")
        .output()
        .expect("spawn nls-lab")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn graphs_with_positional_assignments() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["graphs", "m=2", "r=0", "family=R"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("9 pairings"));
    let csv = std::fs::read_to_string(dir.path().join("graphs/pairings.csv")).unwrap();
    assert_eq!(csv.lines().count(), 10);
}

#[test]
fn family_q_counts_include_self_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["graphs", "--m", "1", "--r", "0", "--family", "Q"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(": 2 pairings"), "{}", stdout(&o));
}

#[test]
fn invalid_config_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "[torus]\nd = 2\n[expansion]\neta = 0\n").unwrap();
    let o = lab(&["--config", cfg.to_str().unwrap(), "kernels"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("eta"));
    assert!(o.stdout.is_empty());
}

#[test]
fn unknown_key_and_bad_assignment_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "[torus]\nradius = 3\n").unwrap();
    assert_eq!(lab(&["--config", cfg.to_str().unwrap(), "kernels"], dir.path()).status.code(), Some(2));
    assert_eq!(lab(&["graphs", "family=X"], dir.path()).status.code(), Some(2));
    assert_eq!(lab(&["graphs", "m"], dir.path()).status.code(), Some(2));
}

#[test]
fn bounds_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = lab(&["--sequential", "bounds"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bounds/summary.json")).unwrap()).unwrap();
    assert_eq!(summary["pass"], true);
    let m = RunManifest::read(dir.path()).unwrap();
    assert_eq!(m.subcommand, "bounds");
    assert!(m.wall_clock_secs.is_some());
    assert!(!m.artifacts["bounds"].is_empty());
}

#[test]
fn sequential_runs_are_bit_identical() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [a.path(), b.path()] {
        assert_eq!(lab(&["--sequential", "--seed", "7", "mc"], d).status.code(), Some(0));
    }
    for f in ["mc/moments.csv", "mc/state.csv"] {
        assert_eq!(std::fs::read(a.path().join(f)).unwrap(), std::fs::read(b.path().join(f)).unwrap());
    }
    let (ma, mb) = (RunManifest::read(a.path()).unwrap(), RunManifest::read(b.path()).unwrap());
    assert_eq!(ma.seed, 7);
    // output dir differs but is excluded from the hash
    assert_eq!(ma.config_hash, mb.config_hash);
}

#[test]
fn seed_changes_results_and_env_sets_it() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    assert_eq!(lab(&["--sequential", "--seed", "1", "mc"], a.path()).status.code(), Some(0));
    let o = Command::new(env!("CARGO_BIN_EXE_nls-lab"))
        .args(["--out", b.path().to_str().unwrap(), "--sequential", "mc"])
        .env("NLS_LAB_SEED", "2")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(RunManifest::read(b.path()).unwrap().seed, 2);
    assert_ne!(std::fs::read(a.path().join("mc/moments.csv")).unwrap(), std::fs::read(b.path().join("mc/moments.csv")).unwrap());
}

#[test]
fn printed_config_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    for flag in [None, Some("--json")] {
        let mut args = vec!["--seed", "99", "config"];
        args.extend(flag);
        let o = lab(&args, dir.path());
        assert_eq!(o.status.code(), Some(0));
        let cfg = RunConfig::parse(&stdout(&o)).unwrap();
        assert_eq!(cfg.seed, 99);
        assert_eq!(cfg.out, dir.path());
        let path = dir.path().join("c.cfg");
        std::fs::write(&path, stdout(&o)).unwrap();
        assert_eq!(RunConfig::load(&path).unwrap(), cfg);
    }
}

#[test]
fn coeffs_in_one_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("d1.cfg");
    std::fs::write(
        &cfg,
        "[torus]\nd = 1\ncutoff = 3\n[potential]\nvariant = constant\nparam = 0.5\n[expansion]\neta = 0\nobservable = identity\nm_max = 1\ntaus = [1, 100]\n",
    )
    .unwrap();
    let o = lab(&["--config", cfg.to_str().unwrap(), "coeffs"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.path().join("coeffs/coefficients.csv")).unwrap();
    assert_eq!(csv.lines().count(), 1 + 2 * 3);
}
