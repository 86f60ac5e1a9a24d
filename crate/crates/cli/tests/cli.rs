use std::path::PathBuf;
use std::process::Command;

use ch_parareal::{AlgorithmVariant, InitialCondition};
use ch_parareal_cli::{parse_config, preset, reproduce, run_experiment, FineChoice, RunConfig, RunStatus, TraceFile};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ch-parareal"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ch-parareal-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn small(extra: &[&str]) -> RunConfig {
    let mut args = vec![
        "--algorithm",
        "pa1",
        "--T",
        "0.5",
        "--N",
        "5",
        "--J",
        "10",
        "--h-den",
        "16",
        "--eps",
        "0.1",
    ];
    args.extend_from_slice(extra);
    parse_config(args).unwrap()
}

#[test]
fn baseline_flags_give_the_published_configuration() {
    let c = parse_config([
        "--algorithm",
        "pa1",
        "--T",
        "1",
        "--N",
        "20",
        "--J",
        "200",
        "--h-den",
        "64",
        "--eps",
        "0.0725",
    ])
    .unwrap();
    assert_eq!(c.algorithm, AlgorithmVariant::Pa1);
    assert_eq!(
        (c.t_final, c.slices, c.fine_steps, c.h_den, c.eps),
        (1.0, 20, 200, 64, 0.0725)
    );
    assert_eq!(c.tol, 1e-6);
    assert_eq!(c.ic, InitialCondition::default());
}

#[test]
fn missing_algorithm_is_named() {
    let e = parse_config(["--N", "20"]).unwrap_err().to_string();
    assert!(e.contains("algorithm"), "{e}");
}

#[test]
fn neumann_neumann_flags() {
    let c = parse_config(["--algorithm", "pa1", "--fine", "nn", "--nn-sub", "8", "--theta", "0.25"]).unwrap();
    assert_eq!(
        c.fine,
        FineChoice::NeumannNeumann {
            subdomains: 8,
            theta: 0.25,
            nn_tol: 1e-10
        }
    );
    let e = parse_config(["--algorithm", "pa2", "--fine", "nn"])
        .unwrap_err()
        .to_string();
    assert!(e.contains("pa1 or pa3"), "{e}");
}

#[test]
fn flags_override_presets() {
    let c = parse_config(["--preset", "pa1-fig1-small-eps", "--N", "50"]).unwrap();
    assert_eq!(c.slices, 50);
    assert_eq!(c.max_iter, 52);
    assert_eq!(c.eps, 0.0725);
    assert_eq!(preset("pa1-fig1-large-eps").unwrap().eps, 0.725);
    assert!(parse_config(["--preset", "nope"])
        .unwrap_err()
        .to_string()
        .contains("pa1-nn"));
}

#[test]
fn config_file_layers_between_preset_and_flags() {
    let path = scratch("layer.conf");
    std::fs::write(&path, "# PA-III\nalgorithm = PA-III\neps = 0.1\nN = 10\n").unwrap();
    let p = path.to_str().unwrap();
    let c = parse_config(["--preset", "pa1-nn", "--config", p, "--N", "8"]).unwrap();
    assert_eq!(c.algorithm, AlgorithmVariant::Pa3);
    assert_eq!((c.eps, c.slices, c.h_den), (0.1, 8, 128));
    assert!(matches!(c.fine, FineChoice::NeumannNeumann { .. }));

    std::fs::write(&path, "algorithm = pa1\nresolution = 3\n").unwrap();
    let e = parse_config(["--config", p]).unwrap_err().to_string();
    assert!(e.contains("unknown key `resolution`") && e.contains("line 2"), "{e}");
}

#[test]
fn header_round_trips_and_reruns_identically() {
    let mut config = small(&["--ic", "random:11:0.5", "--tol", "1e-9"]);
    config.output = Some(scratch("roundtrip.csv"));
    let outcome = run_experiment(&config).unwrap();
    assert!(matches!(outcome.status, RunStatus::Converged { .. }));

    let loaded = TraceFile::load(config.output.as_ref().unwrap()).unwrap();
    assert_eq!(loaded.config, config);
    assert_eq!(loaded.rows, outcome.trace.rows);

    let (again, same) = reproduce(&loaded, None).unwrap();
    assert!(same);
    assert_eq!(again.trace.errors(), loaded.errors());
}

#[test]
fn error_column_decreases_to_tolerance_under_the_bound() {
    let outcome = run_experiment(&small(&[])).unwrap();
    let rows = &outcome.trace.rows;
    assert_eq!(
        outcome.status,
        RunStatus::Converged {
            iterations: rows.len() - 1
        }
    );
    assert!(rows.last().unwrap().error <= 1e-6);
    for w in rows.windows(2) {
        assert!(w[1].error < w[0].error);
    }
    for r in rows {
        assert!(r.bound.unwrap() >= r.error);
    }
    assert!(outcome.trace.summary_value("alpha").is_some());
}

#[test]
fn worker_count_does_not_change_the_trace() {
    let errors = |w: &str| run_experiment(&small(&["--workers", w])).unwrap().trace.errors();
    let one = errors("1");
    assert_eq!(one, errors("4"));
    assert_eq!(one, errors("8"));
}

#[test]
fn npa_trace_records_the_lte_constant() {
    let c = parse_config([
        "--algorithm",
        "npa1",
        "--T",
        "2",
        "--N",
        "4",
        "--J",
        "10",
        "--h-den",
        "16",
    ])
    .unwrap();
    let outcome = run_experiment(&c).unwrap();
    let c1: f64 = outcome.trace.summary_value("C1").unwrap().parse().unwrap();
    assert!(c1 > 0.0);
    assert!(outcome.trace.summary_value("newton_max_residual").is_some());
}

#[test]
fn solver_failure_still_writes_a_trace() {
    let mut config = parse_config([
        "--algorithm",
        "npa1",
        "--N",
        "4",
        "--J",
        "4",
        "--h-den",
        "8",
        "--ic",
        "sine:1e200:1",
    ])
    .unwrap();
    config.output = Some(scratch("failed.csv"));
    let outcome = run_experiment(&config).unwrap();
    assert!(matches!(outcome.status, RunStatus::Failed(_)));
    assert_eq!(outcome.status.exit_code(), 1);
    let loaded = TraceFile::load(config.output.as_ref().unwrap()).unwrap();
    assert_eq!(loaded.summary_value("status"), Some("failed"));
    assert!(loaded.summary_value("failure").is_some());
}

#[test]
fn exit_codes() {
    let base = [
        "run",
        "--algorithm",
        "pa1",
        "--T",
        "0.5",
        "--N",
        "5",
        "--J",
        "10",
        "--h-den",
        "16",
    ];
    let out = bin().args(base).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.starts_with("# ch-parareal trace"));

    let capped = bin().args(base).args(["--max-iter", "1"]).output().unwrap();
    assert_eq!(capped.status.code(), Some(2));

    let missing = bin().args(["run", "--N", "5"]).output().unwrap();
    assert_eq!(missing.status.code(), Some(1));
    assert!(String::from_utf8(missing.stderr).unwrap().contains("algorithm"));
}

#[test]
fn rerun_subcommand_confirms_reproducibility() {
    let first = scratch("first.csv");
    let second = scratch("second.csv");
    let status = bin()
        .args(["run", "--preset", "pa2-baseline", "--N", "5", "--J", "20", "-o"])
        .arg(&first)
        .status()
        .unwrap();
    assert_eq!(status.code(), Some(0));
    let out = bin().arg("rerun").arg(&first).arg("-o").arg(&second).output().unwrap();
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8(out.stderr).unwrap().contains("identical"));
}

#[test]
fn bounds_and_presets_subcommands() {
    let out = bin()
        .args(["bounds", "--preset", "pa1-fig1-small-eps", "--k-max", "3"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# alpha = ") && text.contains("k,bound_over_e0\n1,"));
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 4);

    let out = bin().arg("presets").output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("npa2-baseline") && text.contains("pa1-nn"));
}
