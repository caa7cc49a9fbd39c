use std::io::Write;

use sparselab_cli::config::{parse_args, parse_config_text};
use sparselab_cli::error::{EXIT_CONFIG, EXIT_OK};
use sparselab_cli::schema::CommandName;
use sparselab_cli::{CliError, Value};

fn args(line: &str) -> Vec<String> {
    std::iter::once("sparselab".to_string())
        .chain(line.split_whitespace().map(String::from))
        .collect()
}

#[test]
fn phase_diagram_invocation_parses() {
    let c = parse_args(args(
        "phase-diagram --n 256 --s 2,4,8,16 --m 10:10:200 --dist laplace --trials 100 --seed 7",
    ))
    .unwrap();
    assert_eq!(c.command, CommandName::PhaseDiagram);
    assert_eq!(c.count("n"), Some(256));
    assert_eq!(c.counts("s"), Some(&[2, 4, 8, 16][..]));
    let m = c.counts("m").unwrap();
    assert_eq!((m.len(), m[0], m[19]), (20, 10, 200));
    assert_eq!(c.seed(), 7);
}

#[test]
fn epsilon_out_of_range_is_config_error() {
    let err = parse_args(args("net --n 8 --s 2 --epsilon 1.5")).unwrap_err();
    assert!(
        matches!(&err, CliError::Config(msg) if msg.contains("epsilon")),
        "{err}"
    );
    assert_eq!(err.exit_code(), EXIT_CONFIG);
}

#[test]
fn exact_rub_rejects_tall_matrices() {
    let err = parse_args(args("rub --m 17 --n 20 --k 2 --method exact_tiny")).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
    assert!(parse_args(args("rub --m 16 --n 20 --k 2 --method exact_tiny")).is_ok());
    assert!(parse_args(args("rub --m 17 --n 20 --k 2 --method monte_carlo")).is_ok());
}

#[test]
fn lambda_without_s_is_rejected() {
    let err = parse_args(args("rub --m 6 --n 8 --k 2 --lambda 2")).unwrap_err();
    assert_eq!(err.exit_code(), EXIT_CONFIG);
}

#[test]
fn flags_override_config_file_over_defaults() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(
        file,
        "# concentration settings\ntrials = 500\nseed = 3\nprobe = flat"
    )
    .unwrap();
    let path = file.path().to_str().unwrap();
    let c = parse_args(args(&format!("concentration --config {path} --seed 11"))).unwrap();
    assert_eq!(c.count("trials"), Some(500));
    assert_eq!(c.seed(), 11);
    assert_eq!(c.text("probe"), Some("flat"));
    assert_eq!(c.get("dist"), Some(&Value::Text("laplace".into())));
}

#[test]
fn unknown_config_key_is_rejected() {
    let mut file = tempfile::NamedTempFile::new().unwrap();
    writeln!(file, "trials = 500\nbogus = 1").unwrap();
    let path = file.path().to_str().unwrap();
    let err = parse_args(args(&format!("concentration --config {path}"))).unwrap_err();
    assert!(
        matches!(&err, CliError::Config(msg) if msg.contains("bogus")),
        "{err}"
    );
}

#[test]
fn duplicate_and_malformed_lines_are_rejected() {
    assert!(parse_config_text("seed = 1\nseed = 2").is_err());
    assert!(parse_config_text("seed 1").is_err());
    let ok = parse_config_text("value_law = normal # trailing\n\n").unwrap();
    assert_eq!(ok.get("value-law").map(String::as_str), Some("normal"));
}

#[test]
fn unknown_flag_and_help_exit_codes() {
    assert_eq!(
        parse_args(args("net --n 8 --s 2 --nope 1"))
            .unwrap_err()
            .exit_code(),
        EXIT_CONFIG
    );
    assert_eq!(parse_args(args("--help")).unwrap_err().exit_code(), EXIT_OK);
}

#[test]
fn bad_grids_are_rejected() {
    assert!(parse_args(args("phase-diagram --n 64 --s 4,2 --m 4:4:20")).is_err());
    assert!(parse_args(args("phase-diagram --n 64 --s 2,4 --m 4:x:20")).is_err());
    assert!(parse_args(args("concentration --trials 50")).is_err());
}

#[test]
fn snapshot_round_trips_through_flags() {
    let c = parse_args(args("phase-diagram --n 64 --s 2,4 --m 4:4:20 --trials 10")).unwrap();
    let mut line = String::from("phase-diagram");
    for (k, v) in c.snapshot() {
        line.push_str(&format!(" --{k} {v}"));
    }
    assert_eq!(parse_args(args(&line)).unwrap(), c);
}
