use std::ffi::OsString;
use std::fmt;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{Context, Result};
use ecmid::dsp::{required_samples, BpfConfig};
use ecmid::metrics::parse_params_kv;
use ecmid::sim::{simulate_pulse, PulseSpec, SimConfig};
use ecmid::spectrum_io::{
    parse_eis_csv, parse_time_series_csv, write_time_series_csv, HighRule, MidRule, SelectionPolicy,
};
use ecmid::{
    fit_pulses, fit_spectrum, randles_impedance, validate_params, EcmParams, Error, PulseRecord,
    PulseSettings,
};

use crate::output::{write_plot_data, write_pulse_table, write_report};
use crate::{FitEisArgs, FitPulseArgs, HighRuleArg, ParamArgs, SelectionArgs, SimulateArgs, ValidateArgs};

/// Command-line misuse that clap cannot detect on its own.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "usage: {}", self.0)
    }
}

impl std::error::Error for UsageError {}

pub fn exit_code(e: &anyhow::Error) -> u8 {
    for cause in e.chain() {
        if cause.is::<UsageError>() {
            return 2;
        }
        if let Some(err) = cause.downcast_ref::<Error>() {
            return match err {
                Error::Io(_) => 1,
                Error::Domain(_) | Error::Validation(_) | Error::Config(_) | Error::Contract(_) => 2,
                Error::Parse { .. } => 3,
                Error::Selection(_) | Error::Range { .. } => 4,
                Error::NonPhysical { .. } | Error::DegenerateInput { .. } => 5,
                Error::InsufficientData { .. } | Error::LowSignal { .. } => 6,
            };
        }
        if cause.is::<std::io::Error>() {
            return 1;
        }
    }
    1
}

fn policy(a: &SelectionArgs) -> SelectionPolicy<f64> {
    SelectionPolicy {
        f_low_hz: a.f_low_hz,
        f_mid_rule: a.f_mid_hz.map_or(MidRule::Knee, MidRule::Explicit),
        f_high_rule: match (a.f_high_hz, a.f_high_rule) {
            (Some(f), _) => HighRule::Explicit(f),
            (None, HighRuleArg::MinImag) => HighRule::MinImag,
            (None, HighRuleArg::ZeroSlope) => HighRule::ZeroSlope,
        },
        min_separation_ratio: a.min_separation_ratio,
    }
}

fn fit_one(input: &Path, policy: &SelectionPolicy<f64>, out_dir: &Path) -> Result<String> {
    let spectrum = parse_eis_csv(input).with_context(|| format!("reading {}", input.display()))?;
    let fit = fit_spectrum(&spectrum, policy).with_context(|| format!("fitting {}", input.display()))?;
    write_report(out_dir, &fit.report)?;
    write_plot_data(out_dir, &spectrum, &fit.score)?;
    Ok(fit.report.to_text())
}

pub fn fit_eis(a: FitEisArgs) -> Result<()> {
    let policy = policy(&a.selection);
    if !a.input.is_dir() {
        let text = fit_one(&a.input, &policy, &a.out_dir)?;
        print!("{text}");
        return Ok(());
    }

    let mut files: Vec<PathBuf> = fs::read_dir(&a.input)
        .with_context(|| format!("listing {}", a.input.display()))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.is_file() && p.extension().is_some_and(|x| x == "csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(UsageError(format!("no .csv files in {}", a.input.display())).into());
    }

    let results: Vec<Mutex<Option<Result<String>>>> = files.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    std::thread::scope(|s| {
        for _ in 0..a.jobs.clamp(1, files.len()) {
            s.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(file) = files.get(i) else { break };
                let stem = file.file_stem().unwrap_or_default();
                let r = fit_one(file, &policy, &a.out_dir.join(stem));
                *results[i].lock().expect("result slot") = Some(r);
            });
        }
    });

    let mut first_err = None;
    for (file, slot) in files.iter().zip(results) {
        match slot.into_inner().expect("result slot").expect("processed") {
            Ok(text) => {
                let rmse = text.lines().find(|l| l.starts_with("RMSE")).unwrap_or("");
                println!("{}: ok {rmse}", file.display());
            }
            Err(e) => {
                eprintln!("{}: error: {e:#}", file.display());
                first_err.get_or_insert(e);
            }
        }
    }
    first_err.map_or(Ok(()), Err)
}

pub fn fit_pulse(a: FitPulseArgs) -> Result<()> {
    if a.records.len() != 3 || a.freqs_hz.len() != 3 {
        return Err(UsageError(format!(
            "fit-pulse needs exactly 3 records and 3 frequencies, got {} and {}",
            a.records.len(),
            a.freqs_hz.len()
        ))
        .into());
    }
    let mut records = Vec::with_capacity(3);
    for (path, &f) in a.records.iter().zip(&a.freqs_hz) {
        let series = parse_time_series_csv(path).with_context(|| format!("reading {}", path.display()))?;
        records.push(PulseRecord { freq_hz: f, series });
    }
    let reference = a
        .reference_eis
        .as_ref()
        .map(|p| parse_eis_csv(p).with_context(|| format!("reading {}", p.display())))
        .transpose()?;
    let settings = PulseSettings {
        k: a.filter.k,
        cascade_order: a.filter.cascade,
        min_separation_ratio: a.min_separation_ratio,
    };
    let fit = fit_pulses(records, &settings, reference.as_ref())?;
    write_report(&a.out_dir, &fit.report)?;
    write_pulse_table(&a.out_dir, &fit.measurements)?;
    if let (Some(spec), Some(score)) = (&reference, &fit.score) {
        write_plot_data(&a.out_dir, spec, score)?;
    }
    print!("{}", fit.report.to_text());
    Ok(())
}

fn read_params(a: &ParamArgs) -> Result<EcmParams<f64>> {
    if let Some(path) = &a.params {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        return parse_params_kv(&text).with_context(|| format!("parameters in {}", path.display()));
    }
    let fields = [
        ("--r0-ohm", a.r0_ohm),
        ("--r1-ohm", a.r1_ohm),
        ("--c1-farad", a.c1_farad),
        ("--aw-ohm-sqrt-rad-s", a.aw_ohm_sqrt_rad_s),
    ];
    let missing: Vec<&str> = fields.iter().filter(|f| f.1.is_none()).map(|f| f.0).collect();
    if !missing.is_empty() {
        return Err(UsageError(format!(
            "parameters need --params or all of --r0-ohm --r1-ohm --c1-farad --aw-ohm-sqrt-rad-s (missing {})",
            missing.join(" ")
        ))
        .into());
    }
    let v: Vec<f64> = fields.iter().map(|f| f.1.unwrap_or_default()).collect();
    Ok(EcmParams::new(v[0], v[1], v[2], v[3])?)
}

fn truth_path(out: &Path) -> PathBuf {
    let mut s = OsString::from(out.as_os_str());
    s.push(".truth.txt");
    PathBuf::from(s)
}

pub fn simulate(a: SimulateArgs) -> Result<()> {
    let params = read_params(&a.params)?;
    let fs_hz = a.sample_rate_hz.unwrap_or(200.0 * a.freq_hz);
    let n_periods = match a.n_periods {
        Some(n) => n,
        None => {
            let cfg = BpfConfig::new(a.freq_hz, a.filter.k, a.filter.cascade)?;
            let per = fs_hz / a.freq_hz;
            (required_samples(&cfg, fs_hz) as f64 / per - 1e-9).ceil() as usize
        }
    };
    let spec = PulseSpec {
        freq_hz: a.freq_hz,
        amplitude_a: a.amplitude_a,
        duty: a.duty,
        n_periods,
        dc_bias_a: a.dc_bias_a,
    };
    let config = SimConfig {
        params,
        ocv_v: a.ocv_v,
        n_harmonics: a.n_harmonics,
        sample_rate_hz: fs_hz,
        noise_rms_v: a.noise_rms_v,
        seed: a.seed,
    };
    let ts = simulate_pulse(&spec, &config)?;

    if let Some(dir) = a.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    let file = fs::File::create(&a.out).with_context(|| format!("creating {}", a.out.display()))?;
    let mut w = BufWriter::new(file);
    write_time_series_csv(&mut w, &ts)?;
    w.flush()?;

    let z = randles_impedance(&params, 2.0 * std::f64::consts::PI * a.freq_hz)?;
    let truth = format!(
        "freq_hz={}\nz_re_ohm={}\nz_im_ohm={}\nz_mag_ohm={}\nz_phase_deg={}\nr0_ohm={}\nr1_ohm={}\nc1_farad={}\naw_ohm_sqrt_rad_s={}\n",
        a.freq_hz,
        z.re,
        z.im,
        z.norm(),
        z.arg().to_degrees(),
        params.r0,
        params.r1,
        params.c1,
        params.aw
    );
    fs::write(truth_path(&a.out), truth)?;
    println!(
        "wrote {} samples ({} s at {} Hz) to {}",
        ts.len(),
        ts.duration_s(),
        fs_hz,
        a.out.display()
    );
    Ok(())
}

pub fn validate(a: ValidateArgs) -> Result<()> {
    let params = read_params(&a.params)?;
    let spectrum = parse_eis_csv(&a.eis).with_context(|| format!("reading {}", a.eis.display()))?;
    let v = validate_params(&params, &spectrum)?;
    write_report(&a.out_dir, &v.report)?;
    write_plot_data(&a.out_dir, &spectrum, &v.score)?;
    print!("{}", v.report.to_text());
    Ok(())
}
