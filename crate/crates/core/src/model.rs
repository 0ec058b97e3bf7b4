//! Randles equivalent circuit with a Warburg diffusion element.
//!
//! Topology: `R0` in series with `C1 || (R1 + W)`, where `W = Aw / sqrt(jω)`.
//! All quantities are SI (ohm, farad, rad/s); milliohm scaling only happens
//! in the file formats.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The four Randles parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EcmParams<T> {
    /// Electrolyte (ohmic) resistance, ohm.
    pub r0: T,
    /// Charge-transfer resistance, ohm.
    pub r1: T,
    /// Double-layer capacitance, farad. Zero means the capacitor is absent.
    pub c1: T,
    /// Warburg gain, ohm·(rad/s)^0.5. Zero removes the diffusion element.
    pub aw: T,
}

impl<T: Scalar> EcmParams<T> {
    pub fn new(r0: T, r1: T, c1: T, aw: T) -> Result<Self> {
        let p = Self { r0, r1, c1, aw };
        p.validate()?;
        Ok(p)
    }

    /// Checks `r0 > 0`, `r1 > 0`, `c1 >= 0`, `aw >= 0`, all finite.
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("r0", self.r0, true),
            ("r1", self.r1, true),
            ("c1", self.c1, false),
            ("aw", self.aw, false),
        ];
        for (name, value, strict) in fields {
            if !value.is_finite() {
                return Err(Error::Validation(format!("{name} is not finite")));
            }
            let bad = if strict {
                value <= T::zero()
            } else {
                value < T::zero()
            };
            if bad {
                let rel = if strict { "> 0" } else { ">= 0" };
                return Err(Error::Validation(format!(
                    "{name} = {value} must be {rel}"
                )));
            }
        }
        Ok(())
    }

    /// Converts to another scalar type.
    pub fn cast<U: Scalar>(&self) -> EcmParams<U> {
        EcmParams {
            r0: U::lit(self.r0.as_f64()),
            r1: U::lit(self.r1.as_f64()),
            c1: U::lit(self.c1.as_f64()),
            aw: U::lit(self.aw.as_f64()),
        }
    }
}

/// Complex impedance at one frequency.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ImpedancePoint<T> {
    pub freq_hz: T,
    pub z: Complex<T>,
}

impl<T: Scalar> ImpedancePoint<T> {
    pub fn new(freq_hz: T, z: Complex<T>) -> Result<Self> {
        if !(freq_hz.is_finite() && freq_hz > T::zero()) {
            return Err(Error::Validation(format!(
                "frequency {freq_hz} Hz must be positive and finite"
            )));
        }
        if !(z.re.is_finite() && z.im.is_finite()) {
            return Err(Error::Validation(format!(
                "impedance at {freq_hz} Hz is not finite"
            )));
        }
        Ok(Self { freq_hz, z })
    }

    #[inline]
    pub fn omega(&self) -> T {
        T::two() * T::PI() * self.freq_hz
    }

    pub fn magnitude(&self) -> T {
        self.z.norm()
    }

    pub fn phase_deg(&self) -> T {
        self.z.arg().to_degrees()
    }
}

/// Impedance points ordered by strictly increasing frequency.
///
/// Measured spectra (file input, frequency selection) additionally need at
/// least three points; that is checked by the consumers, so model-generated
/// spectra of any non-zero length are representable.
#[derive(Debug, Clone, PartialEq)]
pub struct ImpedanceSpectrum<T> {
    points: Vec<ImpedancePoint<T>>,
}

impl<T: Scalar> ImpedanceSpectrum<T> {
    /// Minimum size of a spectrum usable for identification or scoring.
    pub const MIN_MEASURED_POINTS: usize = 3;

    pub fn new(points: Vec<ImpedancePoint<T>>) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::Validation("spectrum has no points".into()));
        }
        for w in points.windows(2) {
            if w[1].freq_hz <= w[0].freq_hz {
                return Err(Error::Validation(format!(
                    "frequencies must be strictly increasing ({} Hz followed by {} Hz)",
                    w[0].freq_hz, w[1].freq_hz
                )));
            }
        }
        Ok(Self { points })
    }

    /// Sorts by frequency first, then validates.
    pub fn from_unsorted(mut points: Vec<ImpedancePoint<T>>) -> Result<Self> {
        points.sort_by(|a, b| a.freq_hz.partial_cmp(&b.freq_hz).expect("finite"));
        Self::new(points)
    }

    /// Rejects spectra too short to identify or score against.
    pub fn require_measured(&self) -> Result<()> {
        if self.points.len() < Self::MIN_MEASURED_POINTS {
            return Err(Error::Validation(format!(
                "spectrum has {} points, at least {} required",
                self.points.len(),
                Self::MIN_MEASURED_POINTS
            )));
        }
        Ok(())
    }

    pub fn points(&self) -> &[ImpedancePoint<T>] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn freqs(&self) -> impl Iterator<Item = T> + '_ {
        self.points.iter().map(|p| p.freq_hz)
    }

    pub fn min_hz(&self) -> T {
        self.points[0].freq_hz
    }

    pub fn max_hz(&self) -> T {
        self.points[self.points.len() - 1].freq_hz
    }

    pub fn into_points(self) -> Vec<ImpedancePoint<T>> {
        self.points
    }
}

fn check_omega<T: Scalar>(omega: T) -> Result<()> {
    if !(omega.is_finite() && omega > T::zero()) {
        return Err(Error::Domain(format!(
            "angular frequency {omega} rad/s must be positive and finite"
        )));
    }
    Ok(())
}

/// `Aw / sqrt(jω) = Aw / sqrt(2ω) · (1 − j)`; constant −45° phase.
pub fn warburg_impedance<T: Scalar>(aw: T, omega: T) -> Result<Complex<T>> {
    check_omega(omega)?;
    if !(aw.is_finite() && aw >= T::zero()) {
        return Err(Error::Domain(format!("warburg gain {aw} must be >= 0")));
    }
    let k = aw / (T::two() * omega).sqrt();
    Ok(Complex::new(k, -k))
}

/// Full Randles impedance `R0 + (R1 + W) / (1 + jωC1(R1 + W))`.
///
/// `c1 == 0` is treated as an open capacitor, giving `R0 + R1 + W`.
pub fn randles_impedance<T: Scalar>(params: &EcmParams<T>, omega: T) -> Result<Complex<T>> {
    check_omega(omega)?;
    let w = warburg_impedance(params.aw, omega)?;
    let branch = w + params.r1;
    let r0 = Complex::new(params.r0, T::zero());
    if params.c1 == T::zero() {
        return Ok(r0 + branch);
    }
    let jwc = Complex::new(T::zero(), omega * params.c1);
    Ok(r0 + branch / (jwc * branch + T::one()))
}

/// Evaluates the model at each frequency (Hz), preserving order.
pub fn spectrum_from_params<T: Scalar>(
    params: &EcmParams<T>,
    freqs_hz: &[T],
) -> Result<ImpedanceSpectrum<T>> {
    if freqs_hz.is_empty() {
        return Err(Error::Validation("empty frequency list".into()));
    }
    let points = freqs_hz
        .iter()
        .map(|&f| {
            let z = randles_impedance(params, T::two() * T::PI() * f)?;
            ImpedancePoint::new(f, z)
        })
        .collect::<Result<Vec<_>>>()?;
    ImpedanceSpectrum::new(points)
}

/// Logarithmically spaced grid from `f_min` to `f_max` (inclusive) with the
/// given density per decade.
pub fn log_grid<T: Scalar>(f_min: T, f_max: T, points_per_decade: usize) -> Result<Vec<T>> {
    if !(f_min > T::zero() && f_max > f_min && points_per_decade > 0) {
        return Err(Error::Validation(format!(
            "invalid log grid [{f_min}, {f_max}] with {points_per_decade}/decade"
        )));
    }
    let (lo, hi) = (f_min.log10(), f_max.log10());
    let decades = hi - lo;
    let n = (decades * T::from_usize_lossy(points_per_decade))
        .round()
        .to_usize()
        .unwrap_or(0)
        .max(1);
    let step = decades / T::from_usize_lossy(n);
    let mut grid: Vec<T> = (0..=n)
        .map(|i| T::lit(10.0).powf(lo + step * T::from_usize_lossy(i)))
        .collect();
    // pin the endpoints exactly
    grid[0] = f_min;
    grid[n] = f_max;
    Ok(grid)
}
