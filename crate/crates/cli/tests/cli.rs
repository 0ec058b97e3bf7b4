use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use ecmid::model::{log_grid, spectrum_from_params};
use ecmid::spectrum_io::write_eis_csv;
use ecmid::{EcmParams, EcmParams64};

const BIN: &str = env!("CARGO_BIN_EXE_ecmid");
const REFERENCE_CELL: [&str; 8] = [
    "--r0-ohm",
    "0.826e-3",
    "--r1-ohm",
    "0.346e-3",
    "--c1-farad",
    "7.07",
    "--aw-ohm-sqrt-rad-s",
    "0.1032e-3",
];

fn reference_cell() -> EcmParams64 {
    EcmParams::new(0.826e-3, 0.346e-3, 7.07, 0.1032e-3).unwrap()
}

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("spawn ecmid")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_spectrum(path: &Path, p: &EcmParams64, grid: &[f64]) {
    let s = spectrum_from_params(p, grid).unwrap();
    let mut f = fs::File::create(path).unwrap();
    write_eis_csv(&mut f, &s).unwrap();
}

fn kv(path: &Path, key: &str) -> f64 {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("{key} missing in {}", path.display()))
        .parse()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn fit_eis_synthetic() {
    let dir = tempfile::tempdir().unwrap();
    let eis = dir.path().join("reference_cell.csv");
    write_spectrum(&eis, &reference_cell(), &log_grid(0.01, 650.0, 10).unwrap());
    let out = dir.path().join("out");
    let o = run(&["fit-eis", s(&eis), "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = out.join("report.kv");
    assert!((kv(&report, "r0_ohm") / 0.826e-3 - 1.0).abs() < 0.02);
    assert!((kv(&report, "aw_ohm_sqrt_rad_s") / 0.1032e-3 - 1.0).abs() < 0.05);
    assert!((kv(&report, "r1_ohm") / 0.346e-3 - 1.0).abs() < 0.10);
    assert!(kv(&report, "rmse_pct") <= 3.0);
    for f in ["report.txt", "model_spectrum.csv", "nyquist.csv", "bode.csv", "error.csv"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let stdout = String::from_utf8(o.stdout).unwrap();
    let rmse_line = stdout.lines().find(|l| l.starts_with("RMSE:")).unwrap();
    // two decimals, as in "RMSE: 1.07 %"
    let num = rmse_line.trim_start_matches("RMSE:").trim().trim_end_matches('%').trim();
    assert_eq!(num.split('.').nth(1).map(str::len), Some(2), "{rmse_line}");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let eis = dir.path().join("reference_cell.csv");
    write_spectrum(&eis, &reference_cell(), &log_grid(0.01, 1e4, 10).unwrap());
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    assert_eq!(code(&run(&["fit-eis", s(&eis), "--out-dir", s(&a)])), 0);
    assert_eq!(code(&run(&["fit-eis", s(&eis), "--out-dir", s(&b)])), 0);
    for f in ["report.txt", "report.kv", "model_spectrum.csv", "nyquist.csv", "bode.csv", "error.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn malformed_csv_is_parse_error() {
    let dir = tempfile::tempdir().unwrap();
    let eis = dir.path().join("bad.csv");
    fs::write(&eis, "freq_hz,re_ohm,im_ohm\n1,1e-3,-1e-4\n2,oops,-1e-4\n3,1e-3,-1e-4\n").unwrap();
    let o = run(&["fit-eis", s(&eis), "--out-dir", s(dir.path())]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
}

#[test]
fn missing_file_is_io_error() {
    let o = run(&["fit-eis", "/nonexistent/spectrum.csv"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn resistor_is_selection_error() {
    let dir = tempfile::tempdir().unwrap();
    let eis = dir.path().join("r.csv");
    let mut text = String::from("freq_hz,re_ohm,im_ohm\n");
    for f in log_grid(0.01, 1e3, 5).unwrap() {
        text.push_str(&format!("{f},1e-3,0\n"));
    }
    fs::write(&eis, text).unwrap();
    assert_eq!(code(&run(&["fit-eis", s(&eis), "--out-dir", s(dir.path())])), 4);
}

#[test]
fn bad_triplet_is_solver_error() {
    let dir = tempfile::tempdir().unwrap();
    let eis = dir.path().join("reference_cell.csv");
    write_spectrum(&eis, &reference_cell(), &log_grid(0.01, 650.0, 10).unwrap());
    // f_high inside the diffusion tail leaves nothing for R1
    let o = run(&[
        "fit-eis",
        s(&eis),
        "--f-low-hz",
        "0.1",
        "--f-mid-hz",
        "0.2",
        "--f-high-hz",
        "0.3",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 5, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn batch_directory() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("in");
    fs::create_dir(&input).unwrap();
    let grid = log_grid(0.01, 1e4, 10).unwrap();
    write_spectrum(&input.join("a.csv"), &reference_cell(), &grid);
    write_spectrum(
        &input.join("b.csv"),
        &EcmParams::new(22.5e-3, 3.35e-3, 0.393, 1.769e-3).unwrap(),
        &grid,
    );
    fs::write(input.join("notes.txt"), "ignored").unwrap();
    let out = dir.path().join("out");
    let o = run(&["fit-eis", s(&input), "--out-dir", s(&out), "--jobs", "2"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!((kv(&out.join("a/report.kv"), "r0_ohm") / 0.826e-3 - 1.0).abs() < 0.02);
    assert!((kv(&out.join("b/report.kv"), "r0_ohm") / 22.5e-3 - 1.0).abs() < 0.02);
}

fn simulate(dir: &Path, freq: &str) -> PathBuf {
    let out = dir.join(format!("p{freq}.csv"));
    let mut args = vec!["simulate", "--freq-hz", freq, "--noise-rms-v", "1e-4", "--out", s(&out)];
    args.extend(REFERENCE_CELL);
    let o = run(&args);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    out
}

#[test]
fn simulate_writes_record_and_truth() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("slow.csv");
    let mut args = vec![
        "simulate",
        "--freq-hz",
        "0.02",
        "--n-periods",
        "3",
        "--sample-rate-hz",
        "1000",
        "--out",
        s(&out),
    ];
    args.extend(REFERENCE_CELL);
    assert_eq!(code(&run(&args)), 0);
    let text = fs::read_to_string(&out).unwrap();
    let last = text.lines().last().unwrap();
    let t: f64 = last.split(',').next().unwrap().parse().unwrap();
    // 150 000 samples: last stamp one step short of 150 s
    assert_eq!(text.lines().count(), 150_001);
    assert!((t + 1e-3 - 150.0).abs() < 1e-9);
    let truth = dir.path().join("slow.csv.truth.txt");
    assert!((kv(&truth, "z_mag_ohm") - 1.393e-3).abs() < 1e-6);
}

#[test]
fn simulate_rejects_zero_duty_and_missing_params() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("x.csv");
    let mut args = vec!["simulate", "--freq-hz", "1", "--duty", "0", "--out", s(&out)];
    args.extend(REFERENCE_CELL);
    assert_eq!(code(&run(&args)), 2);
    let o = run(&["simulate", "--freq-hz", "1", "--r0-ohm", "1e-3", "--out", s(&out)]);
    assert_eq!(code(&o), 2);
}

#[test]
fn fit_pulse_needs_three_records() {
    let dir = tempfile::tempdir().unwrap();
    let a = simulate(dir.path(), "1");
    let b = simulate(dir.path(), "20");
    let o = run(&["fit-pulse", s(&a), s(&b), "--freqs-hz", "1,20"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn fit_pulse_short_record_is_dsp_error() {
    let dir = tempfile::tempdir().unwrap();
    let short = dir.path().join("short.csv");
    let mut args = vec!["simulate", "--freq-hz", "20", "--n-periods", "4", "--out", s(&short)];
    args.extend(REFERENCE_CELL);
    assert_eq!(code(&run(&args)), 0);
    let a = simulate(dir.path(), "0.1");
    let c = simulate(dir.path(), "650");
    let o = run(&[
        "fit-pulse",
        s(&a),
        s(&short),
        s(&c),
        "--freqs-hz",
        "0.1,20,650",
        "--out-dir",
        s(dir.path()),
    ]);
    assert_eq!(code(&o), 6, "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn fit_pulse_reorders_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let recs = [simulate(dir.path(), "650"), simulate(dir.path(), "0.1"), simulate(dir.path(), "20")];
    let out = dir.path().join("out");
    let o = run(&[
        "fit-pulse",
        s(&recs[0]),
        s(&recs[1]),
        s(&recs[2]),
        "--freqs-hz",
        "650,0.1,20",
        "--out-dir",
        s(&out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = fs::read_to_string(out.join("report.kv")).unwrap();
    assert!(report.contains("warning=records reordered"));
    assert_eq!(kv(&out.join("report.kv"), "f_low_hz"), 0.1);
}

/// simulate → fit-pulse agrees with fit-eis on the same triplet.
#[test]
fn pulse_and_spectrum_paths_agree() {
    let dir = tempfile::tempdir().unwrap();
    let freqs = ["0.1", "20", "650"];
    let recs: Vec<PathBuf> = freqs.iter().map(|f| simulate(dir.path(), f)).collect();
    let pulse_out = dir.path().join("pulse");
    let o = run(&[
        "fit-pulse",
        s(&recs[0]),
        s(&recs[1]),
        s(&recs[2]),
        "--freqs-hz",
        "0.1,20,650",
        "--out-dir",
        s(&pulse_out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    // grid that contains the three probe frequencies exactly
    let mut grid = log_grid(0.01, 650.0, 10).unwrap();
    grid.extend([0.1, 20.0]);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let eis = dir.path().join("reference_cell.csv");
    write_spectrum(&eis, &reference_cell(), &grid);
    let eis_out = dir.path().join("eis");
    let o = run(&[
        "fit-eis",
        s(&eis),
        "--f-low-hz",
        "0.1",
        "--f-mid-hz",
        "20",
        "--f-high-hz",
        "650",
        "--out-dir",
        s(&eis_out),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    for key in ["r0_ohm", "r1_ohm", "c1_farad", "aw_ohm_sqrt_rad_s"] {
        let a = kv(&pulse_out.join("report.kv"), key);
        let b = kv(&eis_out.join("report.kv"), key);
        assert!((a / b - 1.0).abs() < 0.02, "{key}: pulse {a} vs eis {b}");
    }
}

#[test]
fn validate_against_own_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let eis = dir.path().join("t2.csv");
    let p = EcmParams::new(23.494e-3, 3.317e-3, 0.566, 0.001857).unwrap();
    write_spectrum(&eis, &p, &log_grid(0.01, 1e4, 10).unwrap());
    let params = dir.path().join("p.kv");
    fs::write(&params, "r0_ohm=0.023494\nr1_ohm=0.003317\nc1_farad=0.566\naw_ohm_sqrt_rad_s=0.001857\n").unwrap();
    let out = dir.path().join("v");
    let o = run(&["validate", s(&eis), "--params", s(&params), "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(kv(&out.join("report.kv"), "rmse_pct"), 0.0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("RMSE: 0.00 %"));

    // a previous report is a valid params file
    let fit_out = dir.path().join("fit");
    assert_eq!(code(&run(&["fit-eis", s(&eis), "--out-dir", s(&fit_out)])), 0);
    let o = run(&["validate", s(&eis), "--params", s(&fit_out.join("report.kv")), "--out-dir", s(&out)]);
    assert_eq!(code(&o), 0);
    assert_eq!(kv(&out.join("report.kv"), "rmse_pct"), kv(&fit_out.join("report.kv"), "rmse_pct"));
}

#[test]
fn validate_params_missing_field() {
    let dir = tempfile::tempdir().unwrap();
    let eis = dir.path().join("e.csv");
    write_spectrum(&eis, &reference_cell(), &log_grid(0.01, 650.0, 10).unwrap());
    let params = dir.path().join("p.kv");
    fs::write(&params, "r0_ohm=0.8e-3\nr1_ohm=0.3e-3\nc1_farad=7\n").unwrap();
    let o = run(&["validate", s(&eis), "--params", s(&params), "--out-dir", s(dir.path())]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("aw_ohm_sqrt_rad_s"));
}
