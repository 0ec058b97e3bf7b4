//! Automatic choice of the three probe frequencies from a measured spectrum.
//!
//! * f_high sits where the semicircle closes onto the real axis, before any
//!   inductive upturn.
//! * f_mid is one grid point above the semicircle apex (the higher-frequency
//!   flank of the arc).
//! * f_low sits near 0.1 Hz, deep in the Warburg tail but clear of the
//!   lowest, slowest points.

use num_complex::ComplexFloat;

use crate::error::{Error, Result};
use crate::model::ImpedanceSpectrum;
use crate::scalar::Scalar;
use crate::solver::{FrequencyTriplet, DEFAULT_MIN_SEPARATION_RATIO};

/// Preferred low probe frequency.
pub const F_LOW_TARGET_HZ: f64 = 0.1;
/// Automatic f_low never goes below this.
pub const F_LOW_FLOOR_HZ: f64 = 0.05;
/// Zero-slope threshold: `|d|Z|/d log10 f|` below this fraction of `|Z|`.
pub const ZERO_SLOPE_FRACTION: f64 = 0.01;
/// Minimum span of the spectrum, decades.
pub const MIN_SPAN_DECADES: f64 = 2.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MidRule<T> {
    /// Apex of −Im inside the semicircle, stepped one point up in frequency.
    Knee,
    Explicit(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HighRule<T> {
    /// Smallest |Im| between the apex and the inductive tail.
    MinImag,
    /// First point above the apex where |Z| stops changing with log f.
    ZeroSlope,
    Explicit(T),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SelectionPolicy<T> {
    pub f_low_hz: Option<T>,
    pub f_mid_rule: MidRule<T>,
    pub f_high_rule: HighRule<T>,
    pub min_separation_ratio: T,
}

impl<T: Scalar> Default for SelectionPolicy<T> {
    fn default() -> Self {
        Self {
            f_low_hz: None,
            f_mid_rule: MidRule::Knee,
            f_high_rule: HighRule::MinImag,
            min_separation_ratio: T::lit(DEFAULT_MIN_SEPARATION_RATIO),
        }
    }
}

impl<T: Scalar> SelectionPolicy<T> {
    fn fully_explicit(&self) -> bool {
        self.f_low_hz.is_some()
            && matches!(self.f_mid_rule, MidRule::Explicit(_))
            && matches!(self.f_high_rule, HighRule::Explicit(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Selection<T> {
    pub triplet: FrequencyTriplet<T>,
    pub warnings: Vec<String>,
}

fn check_in_range<T: Scalar>(s: &ImpedanceSpectrum<T>, f: T) -> Result<()> {
    if !(f >= s.min_hz() && f <= s.max_hz()) {
        return Err(Error::Range {
            freq_hz: f.as_f64(),
            min_hz: s.min_hz().as_f64(),
            max_hz: s.max_hz().as_f64(),
        });
    }
    Ok(())
}

/// Index of the first point of the high-frequency inductive tail (the
/// maximal suffix with `Im > 0`), or `len` if there is none.
pub fn inductive_tail_start<T: Scalar>(s: &ImpedanceSpectrum<T>) -> usize {
    let pts = s.points();
    let mut i = pts.len();
    while i > 0 && pts[i - 1].z.im > T::zero() {
        i -= 1;
    }
    i
}

/// Highest-frequency strict local maximum of −Im with −Im > 0, excluding
/// the end points and the inductive tail.
pub fn semicircle_apex<T: Scalar>(s: &ImpedanceSpectrum<T>) -> Result<usize> {
    let pts = s.points();
    let tail = inductive_tail_start(s);
    let neg_im = |i: usize| -pts[i].z.im;
    (1..tail.min(pts.len().saturating_sub(1)))
        .rev()
        .find(|&i| neg_im(i) > T::zero() && neg_im(i) >= neg_im(i - 1) && neg_im(i) > neg_im(i + 1))
        .ok_or_else(|| Error::Selection("spectrum has no capacitive semicircle (no interior −Im maximum)".into()))
}

fn log10_span<T: Scalar>(s: &ImpedanceSpectrum<T>) -> T {
    (s.max_hz() / s.min_hz()).log10()
}

/// Chooses `(f_low, f_mid, f_high)` from `spectrum` under `policy`.
///
/// Automatic choices always land on grid points; explicit overrides are
/// returned as given once they are inside the measured range.
pub fn select_frequencies<T: Scalar>(
    spectrum: &ImpedanceSpectrum<T>,
    policy: &SelectionPolicy<T>,
) -> Result<Selection<T>> {
    spectrum.require_measured()?;
    let pts = spectrum.points();
    let f = |i: usize| pts[i].freq_hz;
    let mut warnings = Vec::new();

    for x in [
        policy.f_low_hz,
        match policy.f_mid_rule {
            MidRule::Explicit(x) => Some(x),
            MidRule::Knee => None,
        },
        match policy.f_high_rule {
            HighRule::Explicit(x) => Some(x),
            _ => None,
        },
    ]
    .into_iter()
    .flatten()
    {
        check_in_range(spectrum, x)?;
    }
    if !policy.fully_explicit() && log10_span(spectrum) < T::lit(MIN_SPAN_DECADES) {
        return Err(Error::Selection(format!(
            "spectrum spans {:.2} decades, at least {MIN_SPAN_DECADES} required",
            log10_span(spectrum).as_f64()
        )));
    }

    let tail = inductive_tail_start(spectrum);
    // index of the first candidate above f_mid for the f_high search
    let (f_mid, above_mid) = match policy.f_mid_rule {
        MidRule::Knee => {
            let apex = semicircle_apex(spectrum)?;
            (f(apex + 1), apex + 2)
        }
        MidRule::Explicit(x) => (x, pts.iter().position(|p| p.freq_hz > x).unwrap_or(pts.len())),
    };

    let f_high = match policy.f_high_rule {
        HighRule::Explicit(x) => x,
        HighRule::MinImag => {
            let last = tail.min(pts.len() - 1);
            (above_mid..=last)
                .min_by(|&a, &b| {
                    pts[a].z.im.abs().partial_cmp(&pts[b].z.im.abs()).expect("finite")
                })
                .map(f)
                .ok_or_else(|| Error::Selection(format!("no grid point above f_mid = {f_mid} Hz")))?
        }
        HighRule::ZeroSlope => {
            let capacitive_end = tail.min(pts.len());
            let slope = |i: usize| {
                let (a, b) = if i + 1 < pts.len() { (i - 1, i + 1) } else { (i - 1, i) };
                (pts[b].z.abs() - pts[a].z.abs()) / (f(b) / f(a)).log10()
            };
            let hit = (above_mid.max(1)..capacitive_end)
                .find(|&i| slope(i).abs() < T::lit(ZERO_SLOPE_FRACTION) * pts[i].z.abs());
            match hit {
                Some(i) => f(i),
                None if capacitive_end > above_mid => {
                    let i = capacitive_end - 1;
                    warnings.push(format!(
                        "no zero-slope point found; f_high falls back to {} Hz, the highest capacitive point",
                        f(i)
                    ));
                    f(i)
                }
                None => {
                    return Err(Error::Selection(format!(
                        "no capacitive grid point above f_mid = {f_mid} Hz"
                    )))
                }
            }
        }
    };

    let f_low = match policy.f_low_hz {
        Some(x) => x,
        None => {
            let target = T::lit(F_LOW_TARGET_HZ).ln();
            let candidates = pts
                .iter()
                .filter(|p| p.freq_hz >= T::lit(F_LOW_FLOOR_HZ) && p.freq_hz < f_mid);
            match candidates.min_by(|a, b| {
                let da = (a.freq_hz.ln() - target).abs();
                let db = (b.freq_hz.ln() - target).abs();
                da.partial_cmp(&db).expect("finite")
            }) {
                Some(p) => p.freq_hz,
                None if f(0) < f_mid => f(0),
                None => {
                    return Err(Error::Selection(format!(
                        "no grid point below f_mid = {f_mid} Hz"
                    )))
                }
            }
        }
    };

    let triplet = FrequencyTriplet::new(f_low, f_mid, f_high)
        .map_err(|e| Error::Selection(e.to_string()))?;
    warnings.extend(triplet.separation_warnings(policy.min_separation_ratio));
    Ok(Selection { triplet, warnings })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{log_grid, spectrum_from_params, EcmParams, ImpedancePoint};
    use num_complex::Complex;

    fn reference_cell() -> EcmParams<f64> {
        EcmParams::new(0.826e-3, 0.346e-3, 7.07, 0.1032e-3).unwrap()
    }

    fn reference_cell_spectrum(f_max: f64) -> ImpedanceSpectrum<f64> {
        spectrum_from_params(&reference_cell(), &log_grid(0.01, f_max, 10).unwrap()).unwrap()
    }

    fn close(a: f64, b: f64) -> bool {
        (a / b - 1.0).abs() < 1e-9
    }

    #[test]
    fn reference_cell_auto_selection() {
        // apex of the R1‖C1 arc sits near 1/(2π R1 C1) ≈ 65 Hz
        let s = reference_cell_spectrum(650.0);
        let sel = select_frequencies(&s, &SelectionPolicy::default()).unwrap();
        let t = sel.triplet;
        // endpoint-pinned grid: nearest point to 0.1 Hz is 0.1006 Hz
        assert!((t.f_low_hz / 0.1 - 1.0).abs() < 0.01, "{t:?}");
        assert!(t.f_mid_hz > 20.0 && t.f_mid_hz < 100.0, "{t:?}");
        assert!(close(t.f_high_hz, 650.0), "{t:?}");
        // every automatic pick is a grid point
        for x in t.as_array() {
            assert!(s.freqs().any(|g| g == x));
        }
        assert!(sel.warnings.iter().any(|w| w.contains("f_high/f_mid")));
    }

    #[test]
    fn deterministic() {
        let s = reference_cell_spectrum(1e4);
        let a = select_frequencies(&s, &SelectionPolicy::default()).unwrap();
        let b = select_frequencies(&s, &SelectionPolicy::default()).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pure_resistor_has_no_semicircle() {
        let pts = log_grid(0.01, 1e3, 5)
            .unwrap()
            .into_iter()
            .map(|f| ImpedancePoint::new(f, Complex::new(1e-3, 0.0)).unwrap())
            .collect();
        let s = ImpedanceSpectrum::new(pts).unwrap();
        assert!(matches!(
            select_frequencies(&s, &SelectionPolicy::default()),
            Err(Error::Selection(_))
        ));
    }

    #[test]
    fn explicit_overrides_verbatim() {
        let s = reference_cell_spectrum(650.0);
        let policy = SelectionPolicy {
            f_low_hz: Some(0.116),
            f_mid_rule: MidRule::Explicit(20.55),
            f_high_rule: HighRule::Explicit(648.65),
            min_separation_ratio: 10.0,
        };
        let sel = select_frequencies(&s, &policy).unwrap();
        assert_eq!(sel.triplet.as_array(), [0.116, 20.55, 648.65]);
        assert!(sel.warnings.is_empty());
    }

    #[test]
    fn override_out_of_range() {
        let s = reference_cell_spectrum(650.0);
        let policy = SelectionPolicy {
            f_high_rule: HighRule::Explicit(1000.0),
            ..SelectionPolicy::default()
        };
        assert!(matches!(select_frequencies(&s, &policy), Err(Error::Range { .. })));
    }

    #[test]
    fn inductive_tail_excluded() {
        // add an inductance: Im crosses zero around 1 kHz and turns positive
        let l = 1.3e-7;
        let pts = log_grid(0.01, 1e4, 10)
            .unwrap()
            .into_iter()
            .map(|f| {
                let w = 2.0 * std::f64::consts::PI * f;
                let z = crate::model::randles_impedance(&reference_cell(), w).unwrap() + Complex::new(0.0, w * l);
                ImpedancePoint::new(f, z).unwrap()
            })
            .collect();
        let s = ImpedanceSpectrum::new(pts).unwrap();
        let tail = inductive_tail_start(&s);
        assert!(tail < s.len());
        let sel = select_frequencies(&s, &SelectionPolicy::default()).unwrap();
        let hi = s.freqs().position(|f| f == sel.triplet.f_high_hz).unwrap();
        assert!(hi <= tail);
        // the zero crossing is where |Im| is smallest
        let min_im = s.points()[..=tail]
            .iter()
            .map(|p| p.z.im.abs())
            .fold(f64::INFINITY, f64::min);
        assert_eq!(s.points()[hi].z.im.abs(), min_im);

        let zs = SelectionPolicy {
            f_high_rule: HighRule::ZeroSlope,
            ..SelectionPolicy::default()
        };
        let sel = select_frequencies(&s, &zs).unwrap();
        assert!(sel.triplet.f_high_hz < s.points()[tail].freq_hz);
    }

    #[test]
    fn zero_slope_rule() {
        let s = reference_cell_spectrum(1e4);
        let zs = SelectionPolicy {
            f_high_rule: HighRule::ZeroSlope,
            ..SelectionPolicy::default()
        };
        let sel = select_frequencies(&s, &zs).unwrap();
        let hi = sel.triplet.f_high_hz;
        assert!(hi > sel.triplet.f_mid_hz);
        // |Z| within a couple of percent of R0 once the slope has flattened
        let p = s.points().iter().find(|p| p.freq_hz == hi).unwrap();
        assert!((p.z.norm() / 0.826e-3 - 1.0) < 0.02, "{hi} Hz");
    }

    #[test]
    fn narrow_spectrum_rejected() {
        let s = spectrum_from_params(&reference_cell(), &log_grid(1.0, 50.0, 10).unwrap()).unwrap();
        assert!(matches!(
            select_frequencies(&s, &SelectionPolicy::default()),
            Err(Error::Selection(_))
        ));
    }

    #[test]
    fn f_low_stays_above_floor() {
        let s = spectrum_from_params(&reference_cell(), &log_grid(0.01, 650.0, 2).unwrap()).unwrap();
        let sel = select_frequencies(&s, &SelectionPolicy::default()).unwrap();
        assert!(sel.triplet.f_low_hz >= F_LOW_FLOOR_HZ);
    }
}
