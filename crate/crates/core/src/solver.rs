//! Closed-form identification of the Randles parameters from three impedance
//! measurements.
//!
//! Each probe frequency isolates one asymptote of the circuit:
//!
//! * high: capacitor shorts the branch, `Z ≈ R0`
//! * low: capacitor is open, `Z ≈ R0 + R1 + Aw/sqrt(jω)`
//! * mid: Warburg term is negligible, `Z ≈ R0 + R1/(1 + jωR1C1)`
//!
//! The parameters follow in dependency order `R0 → Aw → R1 → C1` with no
//! iteration, so identical inputs always produce bit-identical outputs.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::EcmParams;
use crate::scalar::Scalar;

/// Recommended minimum ratio between neighbouring probe frequencies.
pub const DEFAULT_MIN_SEPARATION_RATIO: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrequencyTriplet<T> {
    pub f_low_hz: T,
    pub f_mid_hz: T,
    pub f_high_hz: T,
}

impl<T: Scalar> FrequencyTriplet<T> {
    pub fn new(f_low_hz: T, f_mid_hz: T, f_high_hz: T) -> Result<Self> {
        let all_finite = [f_low_hz, f_mid_hz, f_high_hz].iter().all(|f| f.is_finite());
        if !(all_finite && T::zero() < f_low_hz && f_low_hz < f_mid_hz && f_mid_hz < f_high_hz) {
            return Err(Error::Validation(format!(
                "triplet must satisfy 0 < f_low < f_mid < f_high, got ({f_low_hz}, {f_mid_hz}, {f_high_hz}) Hz"
            )));
        }
        Ok(Self {
            f_low_hz,
            f_mid_hz,
            f_high_hz,
        })
    }

    pub fn as_array(&self) -> [T; 3] {
        [self.f_low_hz, self.f_mid_hz, self.f_high_hz]
    }

    /// Warnings for neighbouring ratios below `min_ratio`. The asymptotic
    /// neglect terms grow gradually, so this never fails.
    pub fn separation_warnings(&self, min_ratio: T) -> Vec<String> {
        let mut out = Vec::new();
        let lm = self.f_mid_hz / self.f_low_hz;
        let mh = self.f_high_hz / self.f_mid_hz;
        if lm < min_ratio {
            out.push(format!(
                "f_mid/f_low = {:.3} is below the recommended {}",
                lm.as_f64(),
                min_ratio.as_f64()
            ));
        }
        if mh < min_ratio {
            out.push(format!(
                "f_high/f_mid = {:.3} is below the recommended {}",
                mh.as_f64(),
                min_ratio.as_f64()
            ));
        }
        out
    }
}

/// Impedances measured at the three probe frequencies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripletMeasurement<T> {
    pub triplet: FrequencyTriplet<T>,
    pub z_low: Complex<T>,
    pub z_mid: Complex<T>,
    pub z_high: Complex<T>,
}

impl<T: Scalar> TripletMeasurement<T> {
    /// Both the low and mid points must be capacitive (negative imaginary
    /// part); the high point is unconstrained.
    pub fn new(
        triplet: FrequencyTriplet<T>,
        z_low: Complex<T>,
        z_mid: Complex<T>,
        z_high: Complex<T>,
    ) -> Result<Self> {
        let m = Self {
            triplet,
            z_low,
            z_mid,
            z_high,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (z, f) in [
            (self.z_low, self.triplet.f_low_hz),
            (self.z_mid, self.triplet.f_mid_hz),
            (self.z_high, self.triplet.f_high_hz),
        ] {
            if !(z.re.is_finite() && z.im.is_finite()) {
                return Err(Error::DegenerateInput {
                    freq_hz: f.as_f64(),
                    message: "impedance is not finite".into(),
                });
            }
        }
        for (z, f, name) in [
            (self.z_low, self.triplet.f_low_hz, "low"),
            (self.z_mid, self.triplet.f_mid_hz, "mid"),
        ] {
            if z.im >= T::zero() {
                return Err(Error::DegenerateInput {
                    freq_hz: f.as_f64(),
                    message: format!(
                        "{name}-frequency impedance must be capacitive (Im < 0), got Im = {:e}",
                        z.im.as_f64()
                    ),
                });
            }
        }
        Ok(())
    }
}

fn hz<T: Scalar>(omega: T) -> f64 {
    (omega / (T::two() * T::PI())).as_f64()
}

fn check_omega<T: Scalar>(omega: T) -> Result<()> {
    if !(omega.is_finite() && omega > T::zero()) {
        return Err(Error::Domain(format!(
            "angular frequency {omega} rad/s must be positive"
        )));
    }
    Ok(())
}

/// `R0 = Re(z_high)`. Positivity is checked by [`identify`].
pub fn solve_r0<T: Scalar>(z_high: Complex<T>) -> Result<T> {
    if !(z_high.re.is_finite() && z_high.im.is_finite()) {
        return Err(Error::Domain("high-frequency impedance is not finite".into()));
    }
    Ok(z_high.re)
}

/// `Aw = |Im(z_low)| · sqrt(2 ω_low)`.
pub fn solve_aw<T: Scalar>(z_low: Complex<T>, omega_low: T) -> Result<T> {
    check_omega(omega_low)?;
    if z_low.im == T::zero() {
        return Err(Error::DegenerateInput {
            freq_hz: hz(omega_low),
            message: "zero imaginary part, no diffusion tail observable".into(),
        });
    }
    Ok(z_low.im.abs() * (T::two() * omega_low).sqrt())
}

/// `R1 = Re(z_low) − R0 − Aw / sqrt(2 ω_low)`.
pub fn solve_r1<T: Scalar>(z_low: Complex<T>, r0: T, aw: T, omega_low: T) -> Result<T> {
    check_omega(omega_low)?;
    let r1 = z_low.re - r0 - aw / (T::two() * omega_low).sqrt();
    if !(r1 > T::zero()) {
        return Err(Error::NonPhysical {
            parameter: "r1",
            value: r1.as_f64(),
            freq_hz: hz(omega_low),
        });
    }
    Ok(r1)
}

/// `C1 = |Im(z_mid)| / (α ω_mid R1)` with `α = Re(z_mid) − R0`.
pub fn solve_c1<T: Scalar>(z_mid: Complex<T>, r0: T, r1: T, omega_mid: T) -> Result<T> {
    check_omega(omega_mid)?;
    if !(r1 > T::zero()) {
        return Err(Error::Domain(format!("r1 = {r1} must be positive")));
    }
    if z_mid.im >= T::zero() {
        return Err(Error::DegenerateInput {
            freq_hz: hz(omega_mid),
            message: format!(
                "mid-frequency impedance must be capacitive, got Im = {:e}",
                z_mid.im.as_f64()
            ),
        });
    }
    let alpha = z_mid.re - r0;
    if !(alpha > T::zero()) {
        return Err(Error::NonPhysical {
            parameter: "alpha",
            value: alpha.as_f64(),
            freq_hz: hz(omega_mid),
        });
    }
    Ok(z_mid.im.abs() / (alpha * omega_mid * r1))
}

/// Identification result plus solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Identification<T> {
    pub params: EcmParams<T>,
    /// C1 re-derived from the real part alone: `sqrt(max(R1/α − 1, 0)) / (ω_mid R1)`.
    pub c1_from_real: T,
    /// `|C1 − c1_from_real| / C1`, in percent. Measures how well the
    /// mid-frequency assumption held.
    pub c1_consistency_gap_pct: T,
    /// Imaginary part left at the high probe, ohm.
    pub high_imag_residue: T,
    pub warnings: Vec<String>,
}

/// Runs the four closed-form steps.
pub fn identify<T: Scalar>(m: &TripletMeasurement<T>) -> Result<EcmParams<T>> {
    identify_with_diagnostics(m, T::lit(DEFAULT_MIN_SEPARATION_RATIO)).map(|id| id.params)
}

pub fn identify_with_diagnostics<T: Scalar>(
    m: &TripletMeasurement<T>,
    min_separation_ratio: T,
) -> Result<Identification<T>> {
    m.validate()?;
    let two_pi = T::two() * T::PI();
    let w_low = two_pi * m.triplet.f_low_hz;
    let w_mid = two_pi * m.triplet.f_mid_hz;

    let r0 = solve_r0(m.z_high)?;
    if !(r0 > T::zero()) {
        return Err(Error::NonPhysical {
            parameter: "r0",
            value: r0.as_f64(),
            freq_hz: m.triplet.f_high_hz.as_f64(),
        });
    }
    let aw = solve_aw(m.z_low, w_low)?;
    let r1 = solve_r1(m.z_low, r0, aw, w_low)?;
    let c1 = solve_c1(m.z_mid, r0, r1, w_mid)?;
    if !(c1 > T::zero() && c1.is_finite()) {
        return Err(Error::NonPhysical {
            parameter: "c1",
            value: c1.as_f64(),
            freq_hz: m.triplet.f_mid_hz.as_f64(),
        });
    }

    let alpha = m.z_mid.re - r0;
    let c1_from_real = (r1 / alpha - T::one()).max(T::zero()).sqrt() / (w_mid * r1);
    let gap = (c1 - c1_from_real).abs() / c1 * T::lit(100.0);

    Ok(Identification {
        params: EcmParams { r0, r1, c1, aw },
        c1_from_real,
        c1_consistency_gap_pct: gap,
        high_imag_residue: m.z_high.im,
        warnings: m.triplet.separation_warnings(min_separation_ratio),
    })
}
