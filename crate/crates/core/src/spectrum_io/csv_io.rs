//! EIS spectrum and time-series CSV files.
//!
//! EIS: header `freq_hz,re_ohm,im_ohm` or `freq_hz,mag_ohm,phase_deg`
//! (degrees, capacitive negative). Time series: `t_s,i_a,v_v` on a uniform
//! grid. Lines starting with `#` are ignored in both.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex;

use crate::dsp::TimeSeries;
use crate::error::{Error, Result};
use crate::model::{ImpedancePoint, ImpedanceSpectrum};

pub const RECT_HEADER: [&str; 3] = ["freq_hz", "re_ohm", "im_ohm"];
pub const POLAR_HEADER: [&str; 3] = ["freq_hz", "mag_ohm", "phase_deg"];
pub const SERIES_HEADER: [&str; 3] = ["t_s", "i_a", "v_v"];

/// Relative tolerance on time-step uniformity.
pub const TIME_STEP_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EisLayout {
    Rectangular,
    Polar,
}

/// Splits one physical line into trimmed fields.
fn split_fields(line: &str, number: u64) -> Result<Vec<String>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(line.as_bytes());
    match rdr.records().next() {
        None => Ok(Vec::new()),
        Some(r) => Ok(r
            .map_err(|e| parse_err(number, e.to_string()))?
            .iter()
            .map(str::to_string)
            .collect()),
    }
}

/// Non-blank, non-comment lines with their 1-based line numbers.
fn content_lines<R: Read>(mut input: R) -> Result<Vec<(u64, Vec<String>)>> {
    let mut text = String::new();
    input.read_to_string(&mut text)?;
    let mut out = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let t = line.trim();
        if t.is_empty() || t.starts_with('#') {
            continue;
        }
        let number = k as u64 + 1;
        out.push((number, split_fields(t, number)?));
    }
    Ok(out)
}

fn parse_err(line: u64, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Reads the header and the numeric rows; every row must have three finite
/// cells. Returns the header cells and `(line, [x, y, z])` rows.
fn read_table<R: Read>(input: R) -> Result<(Vec<String>, u64, Vec<(u64, [f64; 3])>)> {
    let mut lines = content_lines(input)?.into_iter();
    let (header_line, header) = lines
        .next()
        .ok_or_else(|| parse_err(0, "file has no header"))?;
    let mut rows = Vec::new();
    for (line, r) in lines {
        if r.len() != 3 {
            return Err(parse_err(line, format!("expected 3 columns, found {}", r.len())));
        }
        let mut vals = [0.0; 3];
        for (k, cell) in r.iter().enumerate() {
            let v: f64 = cell
                .parse()
                .map_err(|_| parse_err(line, format!("non-numeric cell {cell:?} in column {}", header[k.min(header.len() - 1)])))?;
            if !v.is_finite() {
                return Err(parse_err(line, format!("non-finite value {cell:?}")));
            }
            vals[k] = v;
        }
        rows.push((line, vals));
    }
    Ok((header, header_line, rows))
}

fn eis_layout(header: &[String], line: u64) -> Result<EisLayout> {
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    if h == RECT_HEADER {
        Ok(EisLayout::Rectangular)
    } else if h == POLAR_HEADER {
        Ok(EisLayout::Polar)
    } else {
        Err(parse_err(
            line,
            format!(
                "unknown header {:?}; expected {} or {}",
                h.join(","),
                RECT_HEADER.join(","),
                POLAR_HEADER.join(",")
            ),
        ))
    }
}

/// Parses an EIS spectrum, sorted by frequency.
pub fn read_eis_csv<R: Read>(input: R) -> Result<ImpedanceSpectrum<f64>> {
    let (header, header_line, rows) = read_table(input)?;
    let layout = eis_layout(&header, header_line)?;
    let mut lines = Vec::with_capacity(rows.len());
    let mut points = Vec::with_capacity(rows.len());
    for (line, [f, a, b]) in rows {
        if f <= 0.0 {
            return Err(parse_err(line, format!("frequency {f} Hz must be positive")));
        }
        let z = match layout {
            EisLayout::Rectangular => Complex::new(a, b),
            EisLayout::Polar => {
                if a < 0.0 {
                    return Err(parse_err(line, format!("negative magnitude {a}")));
                }
                Complex::from_polar(a, b.to_radians())
            }
        };
        let p = ImpedancePoint::new(f, z).map_err(|e| parse_err(line, e.to_string()))?;
        lines.push(line);
        points.push(p);
    }
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&i, &j| points[i].freq_hz.total_cmp(&points[j].freq_hz).then(lines[i].cmp(&lines[j])));
    for w in order.windows(2) {
        if points[w[0]].freq_hz == points[w[1]].freq_hz {
            let (first, dup) = (lines[w[0]].min(lines[w[1]]), lines[w[0]].max(lines[w[1]]));
            return Err(parse_err(
                dup,
                format!("duplicate frequency {} Hz (first seen on line {first})", points[w[0]].freq_hz),
            ));
        }
    }
    let sorted: Vec<_> = order.into_iter().map(|i| points[i]).collect();
    let spectrum = ImpedanceSpectrum::new(sorted)
        .map_err(|e| parse_err(header_line, e.to_string()))?;
    spectrum
        .require_measured()
        .map_err(|e| parse_err(header_line, e.to_string()))?;
    Ok(spectrum)
}

pub fn parse_eis_csv(path: impl AsRef<Path>) -> Result<ImpedanceSpectrum<f64>> {
    read_eis_csv(File::open(path)?)
}

/// Writes a spectrum in rectangular form.
pub fn write_eis_csv<W: Write>(mut out: W, spectrum: &ImpedanceSpectrum<f64>) -> Result<()> {
    writeln!(out, "{}", RECT_HEADER.join(","))?;
    for p in spectrum.points() {
        writeln!(out, "{},{},{}", p.freq_hz, p.z.re, p.z.im)?;
    }
    Ok(())
}

/// Parses a time-series record; the sample rate comes from the time column.
pub fn read_time_series_csv<R: Read>(input: R) -> Result<TimeSeries<f64>> {
    let (header, header_line, rows) = read_table(input)?;
    let h: Vec<&str> = header.iter().map(String::as_str).collect();
    if h != SERIES_HEADER {
        return Err(parse_err(
            header_line,
            format!("unknown header {:?}; expected {}", h.join(","), SERIES_HEADER.join(",")),
        ));
    }
    if rows.len() < 2 {
        return Err(parse_err(header_line, format!("{} samples, at least 2 required", rows.len())));
    }
    let t0 = rows[0].1[0];
    let (last_line, last) = rows[rows.len() - 1];
    let steps = (rows.len() - 1) as f64;
    let dt = (last[0] - t0) / steps;
    if !(dt > 0.0) {
        return Err(parse_err(last_line, "time column must be strictly increasing"));
    }
    for (k, (line, [t, _, _])) in rows.iter().enumerate() {
        let expect = t0 + dt * k as f64;
        if (t - expect).abs() > TIME_STEP_TOLERANCE * dt {
            return Err(parse_err(*line, format!("non-uniform time step at t = {t} s")));
        }
    }
    let mut fs = 1.0 / dt;
    // undo decimal rounding of the time column
    if (fs - fs.round()).abs() < 1e-9 * fs {
        fs = fs.round();
    }
    let current = rows.iter().map(|r| r.1[1]).collect();
    let voltage = rows.iter().map(|r| r.1[2]).collect();
    TimeSeries::new(fs, current, voltage)
}

pub fn parse_time_series_csv(path: impl AsRef<Path>) -> Result<TimeSeries<f64>> {
    read_time_series_csv(File::open(path)?)
}

pub fn write_time_series_csv<W: Write>(mut out: W, ts: &TimeSeries<f64>) -> Result<()> {
    writeln!(out, "{}", SERIES_HEADER.join(","))?;
    for k in 0..ts.len() {
        writeln!(out, "{},{},{}", ts.time_s(k), ts.current[k], ts.voltage[k])?;
    }
    Ok(())
}
