//! Fit quality: per-frequency |Z| error and its RMSE / AME summaries, plus
//! the fit report and its text formats.

use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::model::{spectrum_from_params, EcmParams, ImpedanceSpectrum};
use crate::scalar::Scalar;
use crate::solver::{FrequencyTriplet, TripletMeasurement};

/// `100·(|Z_model| − |Z_meas|)/|Z_meas|` at each frequency, signed.
pub fn magnitude_error_pct<T: Scalar>(
    model: &ImpedanceSpectrum<T>,
    measured: &ImpedanceSpectrum<T>,
) -> Result<Vec<(T, T)>> {
    if model.len() != measured.len() {
        return Err(Error::Contract(format!(
            "grid sizes differ ({} vs {} points)",
            model.len(),
            measured.len()
        )));
    }
    let tol = T::lit(1e-12);
    model
        .points()
        .iter()
        .zip(measured.points())
        .map(|(m, x)| {
            if (m.freq_hz - x.freq_hz).abs() > tol * x.freq_hz {
                return Err(Error::Contract(format!(
                    "grids differ: {} Hz vs {} Hz",
                    m.freq_hz, x.freq_hz
                )));
            }
            let denom = x.magnitude();
            if denom == T::zero() {
                return Err(Error::Domain(format!(
                    "measured |Z| is zero at {} Hz",
                    x.freq_hz
                )));
            }
            Ok((x.freq_hz, T::lit(100.0) * (m.magnitude() - denom) / denom))
        })
        .collect()
}

/// `(rmse, ame)` of percent errors.
pub fn summarize<T: Scalar>(errors: &[T]) -> Result<(T, T)> {
    if errors.is_empty() {
        return Err(Error::Contract("no errors to summarize".into()));
    }
    let n = T::from_usize_lossy(errors.len());
    let sq = errors.iter().fold(T::zero(), |a, &e| a + e * e);
    let ame = errors.iter().fold(T::zero(), |a, &e| a.max(e.abs()));
    // rounding can push sqrt(mean e²) a hair above max |e| when all equal
    Ok(((sq / n).sqrt().min(ame), ame))
}

/// Points that count towards the score: everything with `Im ≤ 0` plus the
/// point of smallest `|Im|`. The inductive tail is outside the model.
pub fn scoring_mask<T: Scalar>(measured: &ImpedanceSpectrum<T>) -> Vec<bool> {
    let pts = measured.points();
    let mut mask: Vec<bool> = pts.iter().map(|p| p.z.im <= T::zero()).collect();
    if let Some(i) = (0..pts.len()).min_by(|&a, &b| {
        pts[a].z.im.abs().partial_cmp(&pts[b].z.im.abs()).expect("finite")
    }) {
        mask[i] = true;
    }
    mask
}

#[derive(Debug, Clone, PartialEq)]
pub struct Score<T> {
    pub model: ImpedanceSpectrum<T>,
    /// Error at every grid point, scored or not.
    pub per_freq_error_pct: Vec<(T, T)>,
    pub scored: Vec<bool>,
    pub rmse_pct: T,
    pub ame_pct: T,
}

/// Evaluates `params` on the measured grid and scores the result.
pub fn score<T: Scalar>(params: &EcmParams<T>, measured: &ImpedanceSpectrum<T>) -> Result<Score<T>> {
    let freqs: Vec<T> = measured.freqs().collect();
    let model = spectrum_from_params(params, &freqs)?;
    let errors = magnitude_error_pct(&model, measured)?;
    let scored = scoring_mask(measured);
    let kept: Vec<T> = errors
        .iter()
        .zip(&scored)
        .filter(|(_, &s)| s)
        .map(|(e, _)| e.1)
        .collect();
    let (rmse_pct, ame_pct) = summarize(&kept)?;
    Ok(Score {
        model,
        per_freq_error_pct: errors,
        scored,
        rmse_pct,
        ame_pct,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct FitReport<T> {
    pub params: EcmParams<T>,
    pub triplet: Option<FrequencyTriplet<T>>,
    /// Impedances the parameters were identified from.
    pub measurement: Option<TripletMeasurement<T>>,
    pub per_freq_error_pct: Vec<(T, T)>,
    pub rmse_pct: Option<T>,
    pub ame_pct: Option<T>,
    pub c1_consistency_gap_pct: Option<T>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> FitReport<T> {
    pub fn new(params: EcmParams<T>) -> Self {
        Self {
            params,
            triplet: None,
            measurement: None,
            per_freq_error_pct: Vec::new(),
            rmse_pct: None,
            ame_pct: None,
            c1_consistency_gap_pct: None,
            warnings: Vec::new(),
        }
    }

    pub fn with_score(mut self, s: &Score<T>) -> Self {
        self.per_freq_error_pct = s.per_freq_error_pct.clone();
        self.rmse_pct = Some(s.rmse_pct);
        self.ame_pct = Some(s.ame_pct);
        self
    }

    /// Flat `key=value` lines; see [`KV_KEYS`]. Values use the shortest
    /// round-trip representation, so output is byte-stable.
    pub fn to_key_value(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let mut put = |k: &str, v: f64| {
            let _ = writeln!(s, "{k}={v}");
        };
        put("r0_ohm", p.r0.as_f64());
        put("r1_ohm", p.r1.as_f64());
        put("c1_farad", p.c1.as_f64());
        put("aw_ohm_sqrt_rad_s", p.aw.as_f64());
        if let Some(t) = &self.triplet {
            put("f_low_hz", t.f_low_hz.as_f64());
            put("f_mid_hz", t.f_mid_hz.as_f64());
            put("f_high_hz", t.f_high_hz.as_f64());
        }
        if let Some(m) = &self.measurement {
            for (name, z) in [("low", m.z_low), ("mid", m.z_mid), ("high", m.z_high)] {
                put(&format!("z_{name}_re_ohm"), z.re.as_f64());
                put(&format!("z_{name}_im_ohm"), z.im.as_f64());
            }
        }
        if let Some(v) = self.rmse_pct {
            put("rmse_pct", v.as_f64());
        }
        if let Some(v) = self.ame_pct {
            put("ame_pct", v.as_f64());
        }
        if let Some(v) = self.c1_consistency_gap_pct {
            put("c1_consistency_gap_pct", v.as_f64());
        }
        for w in &self.warnings {
            let _ = writeln!(s, "warning={w}");
        }
        s
    }

    /// Human-readable summary; percentages to two decimals.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let p = &self.params;
        let _ = writeln!(s, "Randles parameters");
        let _ = writeln!(s, "  R0 = {:.4} mOhm", p.r0.as_f64() * 1e3);
        let _ = writeln!(s, "  R1 = {:.4} mOhm", p.r1.as_f64() * 1e3);
        let _ = writeln!(s, "  C1 = {:.4} F", p.c1.as_f64());
        let _ = writeln!(s, "  Aw = {:.4e} Ohm*(rad/s)^0.5", p.aw.as_f64());
        if let Some(t) = &self.triplet {
            let _ = writeln!(
                s,
                "Probe frequencies: low {} Hz, mid {} Hz, high {} Hz",
                t.f_low_hz, t.f_mid_hz, t.f_high_hz
            );
        }
        if let Some(m) = &self.measurement {
            for (name, f, z) in [
                ("low", m.triplet.f_low_hz, m.z_low),
                ("mid", m.triplet.f_mid_hz, m.z_mid),
                ("high", m.triplet.f_high_hz, m.z_high),
            ] {
                let _ = writeln!(
                    s,
                    "  Z({name}, {f} Hz) = {:.4} mOhm at {:.3} deg",
                    z.norm().as_f64() * 1e3,
                    z.arg().as_f64().to_degrees()
                );
            }
        }
        if let (Some(r), Some(a)) = (self.rmse_pct, self.ame_pct) {
            let _ = writeln!(s, "RMSE: {:.2} %", r.as_f64());
            let _ = writeln!(s, "AME:  {:.2} %", a.as_f64());
        }
        if let Some(g) = self.c1_consistency_gap_pct {
            let _ = writeln!(s, "C1 consistency gap: {:.2} %", g.as_f64());
        }
        if !self.warnings.is_empty() {
            let _ = writeln!(s, "Warnings:");
            for w in &self.warnings {
                let _ = writeln!(s, "  - {w}");
            }
        }
        s
    }
}

/// Keys understood by [`parse_params_kv`]; the first four are required.
pub const KV_KEYS: [&str; 4] = ["r0_ohm", "r1_ohm", "c1_farad", "aw_ohm_sqrt_rad_s"];

/// Reads parameters from `key=value` text. Unknown keys, blank lines and
/// `#` comments are ignored, so a full report is also a valid params file.
pub fn parse_params_kv(text: &str) -> Result<EcmParams<f64>> {
    let mut vals: [Option<f64>; 4] = [None; 4];
    for (k, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Parse {
                line: k as u64 + 1,
                message: format!("expected key=value, got {line:?}"),
            });
        };
        if let Some(slot) = KV_KEYS.iter().position(|&x| x == key.trim()) {
            let v = value.trim().parse::<f64>().map_err(|_| Error::Parse {
                line: k as u64 + 1,
                message: format!("{} is not a number: {:?}", key.trim(), value.trim()),
            })?;
            vals[slot] = Some(v);
        }
    }
    let mut got = [0.0; 4];
    for (i, v) in vals.iter().enumerate() {
        got[i] = v.ok_or_else(|| Error::Validation(format!("missing parameter {}", KV_KEYS[i])))?;
    }
    EcmParams::new(got[0], got[1], got[2], got[3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{log_grid, randles_impedance, ImpedancePoint};
    use crate::solver::identify;
    use crate::spectrum_io::{probe_spectrum, select_frequencies, SelectionPolicy};
    use approx::assert_relative_eq;
    use num_complex::Complex;
    use proptest::prelude::*;

    fn spectrum(points: &[(f64, f64, f64)]) -> ImpedanceSpectrum<f64> {
        ImpedanceSpectrum::new(
            points
                .iter()
                .map(|&(f, re, im)| ImpedancePoint::new(f, Complex::new(re, im)).unwrap())
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn summarize_examples() {
        let (r, a) = summarize(&[3.0, -4.0]).unwrap();
        assert_relative_eq!(r, 12.5f64.sqrt());
        assert!((r - 3.54).abs() < 5e-3);
        assert_eq!(a, 4.0);
        assert_eq!(summarize(&[0.0, 0.0]).unwrap(), (0.0, 0.0));
        assert_eq!(summarize(&[-6.4]).unwrap(), (6.4, 6.4));
        assert!(matches!(summarize::<f64>(&[]), Err(Error::Contract(_))));
    }

    #[test]
    fn error_examples() {
        let m = spectrum(&[(1.0, 1.0, -1.0), (10.0, 2.0, 0.0)]);
        let e = magnitude_error_pct(&m, &m).unwrap();
        assert!(e.iter().all(|&(_, x)| x == 0.0));
        let scaled = spectrum(&[(1.0, 1.01, -1.01), (10.0, 2.02, 0.0)]);
        for (_, x) in magnitude_error_pct(&scaled, &m).unwrap() {
            assert_relative_eq!(x, 1.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn error_contracts() {
        let a = spectrum(&[(1.0, 1.0, -1.0), (10.0, 2.0, 0.0)]);
        let b = spectrum(&[(1.0, 1.0, -1.0), (11.0, 2.0, 0.0)]);
        let c = spectrum(&[(1.0, 1.0, -1.0)]);
        let z = spectrum(&[(1.0, 0.0, 0.0), (10.0, 2.0, 0.0)]);
        assert!(matches!(magnitude_error_pct(&a, &b), Err(Error::Contract(_))));
        assert!(matches!(magnitude_error_pct(&a, &c), Err(Error::Contract(_))));
        assert!(matches!(magnitude_error_pct(&a, &z), Err(Error::Domain(_))));
    }

    #[test]
    fn mask_drops_inductive_tail_but_keeps_crossing() {
        let s = spectrum(&[(1.0, 3.0, -1.0), (10.0, 2.0, -0.01), (100.0, 1.0, 0.002), (1000.0, 1.0, 0.5)]);
        assert_eq!(scoring_mask(&s), vec![true, true, true, false]);
    }

    #[test]
    fn self_fit_is_exact() {
        let p = EcmParams::new(0.826e-3, 0.346e-3, 7.07, 0.1032e-3).unwrap();
        let grid = log_grid(0.01, 650.0, 10).unwrap();
        let s = spectrum_from_params(&p, &grid).unwrap();
        let sc = score(&p, &s).unwrap();
        assert_eq!(sc.rmse_pct, 0.0);
        assert_eq!(sc.ame_pct, 0.0);
    }

    #[test]
    fn reference_cell_fit_error_is_single_digit() {
        let p = EcmParams::new(0.826e-3, 0.346e-3, 7.07, 0.1032e-3).unwrap();
        let grid = log_grid(0.01, 650.0, 10).unwrap();
        let s = spectrum_from_params(&p, &grid).unwrap();
        let t = FrequencyTriplet::new(0.116, 20.55, 648.65).unwrap();
        let g = identify(&probe_spectrum(&s, &t).unwrap()).unwrap();
        let sc = score(&g, &s).unwrap();
        assert!(sc.ame_pct < 10.0 && sc.ame_pct > sc.rmse_pct);
        // the largest deviation is in the transition, not at the extremes
        let worst = sc
            .per_freq_error_pct
            .iter()
            .max_by(|a: &&(f64, f64), b: &&(f64, f64)| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
            .unwrap()
            .0;
        assert!(worst > 0.05 && worst < 100.0, "{worst}");
    }

    /// Fitted cells: R0, R1 (mΩ), C1 (F), Aw, reported RMSE (%).
    pub(crate) const CELL_FITS: [(f64, f64, f64, f64, f64); 9] = [
        (22.533, 3.352, 0.393, 0.001769, 1.14),
        (23.658, 5.055, 0.604, 0.002221, 1.69),
        (24.052, 5.457, 0.624, 0.002582, 1.88),
        (22.421, 2.602, 0.354, 0.001951, 0.76),
        (23.494, 3.317, 0.566, 0.001857, 1.07),
        (23.841, 3.516, 0.631, 0.001919, 1.15),
        (22.339, 2.472, 0.421, 0.002579, 0.94),
        (23.358, 3.406, 0.666, 0.002611, 1.20),
        (23.683, 3.879, 0.727, 0.002684, 1.32),
    ];

    #[test]
    fn cell_fits_regeneration() {
        let grid = log_grid(0.01, 1e4, 10).unwrap();
        for (r0, r1, c1, aw, rmse) in CELL_FITS {
            let p = EcmParams::new(r0 * 1e-3, r1 * 1e-3, c1, aw).unwrap();
            let s = spectrum_from_params(&p, &grid).unwrap();
            let sel = select_frequencies(&s, &SelectionPolicy::default()).unwrap();
            let g = identify(&probe_spectrum(&s, &sel.triplet).unwrap()).unwrap();
            let sc = score(&g, &s).unwrap();
            assert!(sc.rmse_pct <= 2.0 * rmse, "row R0={r0}: {}", sc.rmse_pct);
            assert!((g.r0 / p.r0 - 1.0).abs() < 0.02);
        }
    }

    #[test]
    fn kv_round_trip() {
        let p = EcmParams::new(0.826e-3, 0.346e-3, 7.07, 0.1032e-3).unwrap();
        let mut r = FitReport::new(p);
        r.triplet = Some(FrequencyTriplet::new(0.116, 20.55, 648.65).unwrap());
        r.rmse_pct = Some(1.07);
        r.ame_pct = Some(2.5);
        r.warnings.push("something".into());
        let kv = r.to_key_value();
        assert!(kv.contains("f_mid_hz=20.55\n"));
        assert!(kv.contains("warning=something\n"));
        assert_eq!(parse_params_kv(&kv).unwrap(), p);
        assert!(r.to_text().contains("RMSE: 1.07 %"));
    }

    #[test]
    fn kv_errors() {
        let e = parse_params_kv("r0_ohm=1e-3\nr1_ohm=1e-3\nc1_farad=1\n").unwrap_err();
        assert!(matches!(e, Error::Validation(ref m) if m.contains("aw_ohm_sqrt_rad_s")));
        let e = parse_params_kv("r0_ohm=1e-3\nr1_ohm=x\n").unwrap_err();
        assert!(matches!(e, Error::Parse { line: 2, .. }));
        assert!(parse_params_kv("garbage\n").is_err());
    }

    proptest! {
        #[test]
        fn rmse_bounded_by_ame(errs in proptest::collection::vec(-50.0..50.0f64, 1..40), flip in any::<u64>()) {
            let (r, a) = summarize(&errs).unwrap();
            prop_assert!(r <= a && r >= 0.0);
            let flipped: Vec<f64> = errs
                .iter()
                .enumerate()
                .map(|(i, &e)| if flip >> (i % 64) & 1 == 1 { -e } else { e })
                .collect();
            prop_assert_eq!(summarize(&flipped).unwrap(), (r, a));
        }

        #[test]
        fn error_scales_linearly(s in 0.5..2.0f64, f in 0.01..1e3f64) {
            let p = EcmParams::new(1e-3, 2e-3, 1.0, 1e-4).unwrap();
            let z = randles_impedance(&p, 2.0 * std::f64::consts::PI * f).unwrap();
            let a = spectrum(&[(f, z.re, z.im)]);
            let b = spectrum(&[(f, z.re * s, z.im * s)]);
            let e = magnitude_error_pct(&b, &a).unwrap()[0].1;
            prop_assert!((e - 100.0 * (s - 1.0)).abs() < 1e-9);
        }
    }
}
