use std::path::Path;
use std::process::{Command as Process, Output};

use cantor_spectra_cli::*;
use proptest::prelude::*;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_cantor-spectra");

fn args(line: &str) -> Vec<String> {
    std::iter::once("cantor-spectra")
        .chain(line.split_whitespace())
        .map(String::from)
        .collect()
}

fn stdout_of(line: &str) -> String {
    let cfg = parse_args(args(line)).unwrap();
    let mut buf = Vec::new();
    run_to(&cfg, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

fn json_of(line: &str) -> Value {
    serde_json::from_str(&stdout_of(line)).unwrap()
}

fn binary(line: &str, cache: Option<&Path>) -> Output {
    let mut cmd = Process::new(BIN);
    cmd.args(line.split_whitespace()).env_remove("CANTOR_SPECTRA_CACHE");
    if let Some(dir) = cache {
        cmd.arg("--cache").arg(dir);
    }
    cmd.output().unwrap()
}

#[test]
fn spectrum_defaults_are_filled() {
    let cfg = parse_args(args("spectrum --lambda 1.0 --level 12")).unwrap();
    let Command::Spectrum(s) = &cfg.command else {
        panic!("wrong command: {cfg:?}");
    };
    assert_eq!(s.lambda, 1.0);
    assert_eq!(s.level.level, 12);
    assert_eq!(s.level.resolution, 1e-4);
    assert_eq!(s.format(), OutputFormat::Json);
    assert_eq!(cfg.cache, None);
    assert_eq!(cfg.threads, None);
}

#[test]
fn negative_coupling_is_a_usage_error() {
    let err = parse_args(args("spectrum --lambda -1")).unwrap_err();
    assert_eq!(err.exit_code(), 2);
    assert!(err.to_string().contains("--lambda"), "{err}");
    let out = binary("spectrum --lambda -1", None);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--lambda"));
}

#[test]
fn unknown_flags_and_commands_are_rejected() {
    for line in [
        "spectrum --lambda 1 --bogus 3",
        "teleport",
        "orbit --energy 0",
        "phase --l1 0:8:4 --l2 1:2:2",
    ] {
        let err = parse_args(args(line)).unwrap_err();
        assert_eq!(err.exit_code(), 2, "{line}");
    }
    assert!(parse_args(args("spectrum --lambda 1 --json --csv")).is_err());
    assert!(parse_args(args("lyapunov --lambda 1 --steps 31"))
        .unwrap_err()
        .to_string()
        .contains("--steps"));
}

#[test]
fn phase_grid_is_parsed() {
    let cfg = parse_args(args("phase --l1 0.1:8:40 --l2 0.1:8:40")).unwrap();
    let Command::Phase(p) = cfg.command else {
        panic!("wrong command");
    };
    assert_eq!((p.l1.lo, p.l1.hi, p.l1.n), (0.1, 8.0, 40));
    assert_eq!(p.l1, p.l2);
    assert_eq!(p.margin, 0.05);
    assert_eq!(p.level.level, 12);
}

#[test]
fn free_orbit_is_bounded_up_to_budget() {
    let v = json_of("orbit --energy 0 --lambda 0");
    assert_eq!(v["status"], "bounded_up_to");
    assert_eq!(v["steps"], 200);
    assert_eq!(v["schema_version"], 1);
    assert_eq!(v["max_norm"], 1.0);
    let v = json_of("orbit --energy 10 --lambda 0");
    assert_eq!(v["status"], "escaped");
    assert!(v["steps"].as_u64().unwrap() <= 5);
}

#[test]
fn free_sumset_is_one_interval() {
    let v = json_of("sumset --lambda1 0 --lambda2 0 --level 12");
    let iv = v["intervals"].as_array().unwrap();
    assert_eq!(iv.len(), 1);
    assert!((iv[0][0].as_f64().unwrap() + 4.0).abs() < 1e-3);
    assert!((iv[0][1].as_f64().unwrap() - 4.0).abs() < 1e-3);
}

#[test]
fn spectrum_csv_matches_json() {
    let v = json_of("spectrum --lambda 2 --level 6");
    let csv = stdout_of("spectrum --lambda 2 --level 6 --csv");
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    let iv = v["intervals"].as_array().unwrap();
    assert_eq!(rows.len(), iv.len());
    for (row, pair) in rows.iter().zip(iv) {
        let (lo, hi) = row.split_once(',').unwrap();
        assert_eq!(lo.parse::<f64>().unwrap(), pair[0].as_f64().unwrap());
        assert_eq!(hi.parse::<f64>().unwrap(), pair[1].as_f64().unwrap());
    }
}

#[test]
fn measures_flow_through_convolve_and_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    let b = dir.path().join("b.json");
    std::fs::write(&a, stdout_of("dos --lambda 1 --level 8")).unwrap();
    std::fs::write(&b, stdout_of("dos --lambda 2 --level 8")).unwrap();
    let conv = stdout_of(&format!("convolve --in {} --in {}", a.display(), b.display()));
    let v: Value = serde_json::from_str(&conv).unwrap();
    let total: f64 = v["atoms"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a[2].as_f64().unwrap())
        .sum();
    assert!((total - 1.0).abs() < 1e-9);
    let c = dir.path().join("c.json");
    std::fs::write(&c, conv).unwrap();
    let d = json_of(&format!("dimension --measure {} --samples 200 --seed 5", c.display()));
    let (lo, med, hi) = (
        d["lower"].as_f64().unwrap(),
        d["median"].as_f64().unwrap(),
        d["upper"].as_f64().unwrap(),
    );
    assert!(0.0 <= lo && lo <= med && med <= hi && hi <= 1.0, "{d}");
}

#[test]
fn convolve_needs_two_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.json");
    std::fs::write(&a, stdout_of("dos --lambda 1 --level 4")).unwrap();
    let out = binary(&format!("convolve --in {}", a.display()), None);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "invalid_parameter");
    assert_eq!(err["schema_version"], 1);
}

#[test]
fn computational_failures_exit_one_with_json() {
    let out = binary("spectrum --lambda 1 --resolution 1e-9", None);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["error"]["kind"], "budget_exceeded");
    assert!(out.stdout.is_empty());
}

#[test]
fn dos_oracle_reports_distance() {
    let v = json_of("dos --lambda 1 --level 10 --oracle-sites 3000");
    assert!(v["oracle"]["sup_distance"].as_f64().unwrap() <= 0.05);
}

#[test]
fn lyapunov_reports_entropy_ratio() {
    let v = json_of("lyapunov --lambda 1 --level 10 --energies 300 --steps 20 --entropy 0.4812");
    let exponent = v["exponent"].as_f64().unwrap();
    assert!(exponent > 0.0);
    assert!((v["ratio"].as_f64().unwrap() - cantor_spectra::format::round_sig(0.4812 / exponent)).abs() < 1e-10);
}

#[test]
fn phase_outputs_are_byte_identical_cold_and_warm() {
    let cache = tempfile::tempdir().unwrap();
    let out1 = tempfile::tempdir().unwrap();
    let out2 = tempfile::tempdir().unwrap();
    let line = |dir: &Path| {
        format!(
            "phase --l1 0.5:3:4 --l2 0.5:3:4 --level 8 --samples 100 --out {}",
            dir.display()
        )
    };
    let cold = binary(&line(out1.path()), Some(cache.path()));
    let warm = binary(&line(out2.path()), Some(cache.path()));
    assert_eq!(cold.status.code(), Some(0));
    assert_eq!(cold.stdout, warm.stdout);
    for name in ["cells.csv", "diagram.pgm", "provenance.json"] {
        let a = std::fs::read(out1.path().join(name)).unwrap();
        let b = std::fs::read(out2.path().join(name)).unwrap();
        assert_eq!(a, b, "{name}");
    }
    let pgm = std::fs::read(out1.path().join("diagram.pgm")).unwrap();
    assert!(pgm.starts_with(b"P5\n4 4\n255\n"));
    assert_eq!(pgm.len(), b"P5\n4 4\n255\n".len() + 16);
    assert!(std::fs::read_dir(cache.path()).unwrap().count() >= 8);
}

#[test]
fn thread_count_does_not_change_output() {
    let one = binary("--threads 1 spectrum --lambda 1.5 --level 10", None);
    let many = binary("spectrum --lambda 1.5 --level 10 --threads 4", None);
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn orbit_output_is_deterministic(e in -5.0..5.0f64, lambda in 0.0..3.0f64) {
        let line = format!("orbit --energy {e} --lambda {lambda}");
        prop_assert_eq!(stdout_of(&line), stdout_of(&line));
    }

    #[test]
    fn printed_numbers_carry_twelve_digits(lambda in 0.1..5.0f64) {
        let v = json_of(&format!("spectrum --lambda {lambda} --level 5"));
        for pair in v["intervals"].as_array().unwrap() {
            for x in pair.as_array().unwrap() {
                let x = x.as_f64().unwrap();
                prop_assert_eq!(x, cantor_spectra::format::round_sig(x));
            }
        }
    }
}
