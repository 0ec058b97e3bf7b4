//! Report and plot-data files.

use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use anyhow::{Context, Result};
use ecmid::dsp::PulseMeasurement;
use ecmid::metrics::Score;
use ecmid::spectrum_io::write_eis_csv;
use ecmid::{FitReport, ImpedanceSpectrum};

fn create(path: &Path) -> Result<BufWriter<fs::File>> {
    let f = fs::File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

pub fn write_report(dir: &Path, report: &FitReport<f64>) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    fs::write(dir.join("report.txt"), report.to_text())?;
    fs::write(dir.join("report.kv"), report.to_key_value())?;
    Ok(())
}

/// Model spectrum plus Nyquist, Bode and error-vs-frequency tables.
pub fn write_plot_data(dir: &Path, measured: &ImpedanceSpectrum<f64>, score: &Score<f64>) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let mut w = create(&dir.join("model_spectrum.csv"))?;
    write_eis_csv(&mut w, &score.model)?;
    w.flush()?;

    let pairs = measured.points().iter().zip(score.model.points());
    let mut w = create(&dir.join("nyquist.csv"))?;
    writeln!(w, "freq_hz,meas_re_ohm,meas_neg_im_ohm,model_re_ohm,model_neg_im_ohm")?;
    for (m, z) in pairs.clone() {
        writeln!(w, "{},{},{},{},{}", m.freq_hz, m.z.re, -m.z.im, z.z.re, -z.z.im)?;
    }
    w.flush()?;

    let mut w = create(&dir.join("bode.csv"))?;
    writeln!(w, "freq_hz,meas_mag_ohm,meas_phase_deg,model_mag_ohm,model_phase_deg")?;
    for (m, z) in pairs {
        writeln!(
            w,
            "{},{},{},{},{}",
            m.freq_hz,
            m.magnitude(),
            m.phase_deg(),
            z.magnitude(),
            z.phase_deg()
        )?;
    }
    w.flush()?;

    let mut w = create(&dir.join("error.csv"))?;
    writeln!(w, "freq_hz,error_pct,scored")?;
    for ((f, e), s) in score.per_freq_error_pct.iter().zip(&score.scored) {
        writeln!(w, "{f},{e},{}", u8::from(*s))?;
    }
    w.flush()?;
    Ok(())
}

/// Per-record extraction results of a pulse fit.
pub fn write_pulse_table(dir: &Path, measurements: &[PulseMeasurement<f64>]) -> Result<()> {
    let mut w = create(&dir.join("pulse_impedance.csv"))?;
    writeln!(w, "freq_hz,re_ohm,im_ohm,mag_ohm,phase_deg,lissajous_phase_deg")?;
    for m in measurements {
        writeln!(
            w,
            "{},{},{},{},{},{}",
            m.point.freq_hz,
            m.point.z.re,
            m.point.z.im,
            m.point.magnitude(),
            m.point.phase_deg(),
            m.lissajous_phase_rad.to_degrees()
        )?;
    }
    w.flush()?;
    Ok(())
}
