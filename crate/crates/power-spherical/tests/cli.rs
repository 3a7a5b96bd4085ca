//! End-to-end checks of the `psphere` binary: exit codes, pinned CSV
//! headers, seed determinism, and format switching.

use std::io::Write;
use std::process::{Command, Output, Stdio};

fn psphere(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_psphere"))
        .args(args)
        .output()
        .expect("spawn psphere")
}

fn psphere_stdin(args: &[&str], input: &str) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_psphere"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawn psphere");
    child
        .stdin
        .as_mut()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().expect("wait psphere")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn sample_is_deterministic_and_unit_norm() {
    let args = [
        "sample", "--d", "3", "--kappa", "5", "--n", "3", "--seed", "7",
    ];
    let a = psphere(&args);
    let b = psphere(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout, "same seed must reproduce bytes");
    let text = stdout(&a);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "t,x0,x1,x2");
    for line in lines {
        let fields: Vec<f64> = line.split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(fields.len(), 4);
        let norm: f64 = fields[1..].iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((norm - 1.0).abs() <= 1e-10);
    }
}

#[test]
fn sample_jsonl_format() {
    let out = psphere(&[
        "sample", "--d", "4", "--kappa", "1", "--n", "2", "--seed", "1", "--format", "jsonl",
    ]);
    assert!(out.status.success());
    for line in stdout(&out).lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v["t"].is_number());
        assert_eq!(v["x"].as_array().unwrap().len(), 4);
    }
}

#[test]
fn malformed_grid_spec_exits_2() {
    let out = psphere(&["stability-sweep", "--d-grid", "nonsense"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn zero_batch_exits_2() {
    let out = psphere(&[
        "bench-timing",
        "--batch",
        "0",
        "--trials",
        "1",
        "--reps",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stability_sweep_small_grid_csv() {
    let out = psphere(&[
        "stability-sweep",
        "--d-grid",
        "2..3 x 10^0..0",
        "--kappa-grid",
        "1..2 x 10^0..1",
        "--samples-per-cell",
        "3",
        "--seed",
        "5",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "d,kappa,ps_stable,vmf_stable,failure_kind");
    assert_eq!(lines.len(), 1 + 2 * 4);
    for row in &lines[1..] {
        assert!(row.contains("true,true,none"), "unexpected row {row}");
    }
}

#[test]
fn bench_timing_small_grid_header() {
    let out = psphere(&[
        "bench-timing",
        "--d",
        "8",
        "--batch",
        "4",
        "--kappa-grid",
        "1..2 x 10^0..0",
        "--trials",
        "2",
        "--reps",
        "2",
    ]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "dist,kappa,mean_ms,std_ms,trials,reps,mean_rejections"
    );
    assert_eq!(lines.len(), 1 + 4);
    assert!(lines[1].starts_with("power_spherical,1,"));
    assert!(lines[3].starts_with("vmf,1,"));
}

#[test]
fn mc_verify_small_run_passes_and_pins_header() {
    let out = psphere(&[
        "mc-verify",
        "--cells",
        "3:0,3:2",
        "--n-samples",
        "5000",
        "--seed",
        "11",
    ]);
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(
        lines[0],
        "quantity,d,kappa,kappa_q,closed_form,mc_estimate,mc_se,pass"
    );
    assert!(out.status.success(), "verify failed:\n{text}");
    // 2 moment cells x 5 rows + 4 kl_vmf + 3 gradient cells x 2 rows.
    assert_eq!(lines.len(), 1 + 10 + 4 + 6);
    let kl_rows: Vec<&&str> = lines.iter().filter(|l| l.starts_with("kl_vmf")).collect();
    assert_eq!(kl_rows.len(), 4);
    // Anti-aligned cases carry a signed kappa_q in the pinned schema.
    assert!(kl_rows.iter().any(|l| l.contains(",-5,")));
}

#[test]
fn logprob_reports_error_rows_with_exit_1() {
    let input = "1,0,0\nbad,row,here\n0,1,0\n";
    let out = psphere_stdin(
        &["logprob", "--d", "3", "--kappa", "0", "--seed", "3"],
        input,
    );
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "row,log_prob_power_spherical,log_prob_vmf,error");
    let expected = -(4.0 * std::f64::consts::PI).ln();
    let first: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
    assert!((first - expected).abs() < 1e-12);
    assert!(lines[2].contains("unparseable"));
}

#[test]
fn logprob_clean_input_exits_0_with_vmf_column() {
    let input = "1,0,0\n0,0,1\n";
    let out = psphere_stdin(
        &[
            "logprob", "--d", "3", "--kappa", "2", "--vmf", "--seed", "3",
        ],
        input,
    );
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        assert!(!fields[1].is_empty() && !fields[2].is_empty());
        let lp: f64 = fields[1].parse().unwrap();
        let lq: f64 = fields[2].parse().unwrap();
        assert!(lp.is_finite() && lq.is_finite());
    }
}

#[test]
fn kl_command_zero_at_kappa_zero() {
    let out = psphere(&["kl", "--d", "3", "--kappa", "0"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "quantity,d,kappa,kappa_q,mu_dot,value");
    let value: f64 = lines[1].split(',').next_back().unwrap().parse().unwrap();
    assert!(value.abs() <= 1e-9);
}

#[test]
fn kl_command_vmf_alignment_ordering() {
    let aligned = psphere(&["kl", "--d", "3", "--kappa", "5", "--kappa-q", "5"]);
    let anti = psphere(&[
        "kl",
        "--d",
        "3",
        "--kappa",
        "5",
        "--kappa-q",
        "5",
        "--mu-dot",
        "-1",
    ]);
    assert!(aligned.status.success() && anti.status.success());
    let last_value = |o: &Output| -> f64 {
        stdout(o)
            .lines()
            .next_back()
            .unwrap()
            .split(',')
            .next_back()
            .unwrap()
            .parse()
            .unwrap()
    };
    let (va, vx) = (last_value(&aligned), last_value(&anti));
    assert!(va >= -1e-9);
    assert!(vx > va, "anti-aligned KL {vx} should exceed aligned {va}");
}

#[test]
fn sample_pipes_into_logprob() {
    let sample = psphere(&[
        "sample", "--d", "3", "--kappa", "4", "--n", "5", "--seed", "9",
    ]);
    assert!(sample.status.success());
    // Strip the leading t column, keep the coordinates.
    let coords: String = stdout(&sample)
        .lines()
        .skip(1)
        .map(|l| l.split_once(',').unwrap().1.to_string() + "\n")
        .collect();
    let out = psphere_stdin(
        &["logprob", "--d", "3", "--kappa", "4", "--seed", "9"],
        &coords,
    );
    assert_eq!(
        out.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
}
