//! Quadrature (lock-in style) extraction of a single tone.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::ImpedancePoint;
use crate::scalar::Scalar;

/// Amplitudes below this fraction of the channel's peak are treated as no
/// signal.
pub const LOW_SIGNAL_RATIO: f64 = 1e-9;

/// Tone `amplitude · sin(2π f t + phase)` relative to the first sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Phasor<T> {
    pub amplitude: T,
    /// Radians in (−π, π].
    pub phase_rad: T,
    pub freq_hz: T,
}

impl<T: Scalar> Phasor<T> {
    pub fn as_complex(&self) -> Complex<T> {
        Complex::from_polar(self.amplitude, self.phase_rad)
    }
}

/// Wraps an angle into (−π, π].
pub fn wrap_phase<T: Scalar>(x: T) -> T {
    let two_pi = T::two() * T::PI();
    let mut y = x - two_pi * ((x + T::PI()) / two_pi).floor();
    if y <= -T::PI() {
        y = y + two_pi;
    }
    y
}

/// Largest whole number of cycles of `f0` that fits in `len` samples,
/// as a sample count.
pub fn whole_cycle_window<T: Scalar>(len: usize, f0_hz: T, sample_rate_hz: T) -> usize {
    let per_cycle = sample_rate_hz / f0_hz;
    let cycles = (T::from_usize_lossy(len) / per_cycle + T::lit(1e-9)).floor();
    let n = (cycles * per_cycle).round().to_usize().unwrap_or(0);
    n.min(len)
}

/// Amplitude and phase of the `f0_hz` component of `samples`.
///
/// Integrates the in-phase and quadrature products over the largest
/// whole-cycle window, which nulls every other harmonic of `f0` when the
/// sample rate is an integer multiple of it.
pub fn extract_phasor<T: Scalar>(samples: &[T], f0_hz: T, sample_rate_hz: T) -> Result<Phasor<T>> {
    if !(f0_hz > T::zero() && sample_rate_hz > T::two() * f0_hz) {
        return Err(Error::Config(format!(
            "cannot extract {f0_hz} Hz at {sample_rate_hz} Hz sampling"
        )));
    }
    let n = whole_cycle_window(samples.len(), f0_hz, sample_rate_hz);
    if n == 0 {
        let needed = (sample_rate_hz / f0_hz).ceil().to_usize().unwrap_or(usize::MAX);
        return Err(Error::InsufficientData {
            needed,
            got: samples.len(),
        });
    }
    let cycles_per_sample = f0_hz / sample_rate_hz;
    let two_pi = T::two() * T::PI();
    let (mut in_phase, mut quad) = (T::zero(), T::zero());
    let mut peak = T::zero();
    for (i, &x) in samples[..n].iter().enumerate() {
        let c = T::from_usize_lossy(i) * cycles_per_sample;
        let theta = two_pi * (c - c.floor());
        in_phase = in_phase + x * theta.sin();
        quad = quad + x * theta.cos();
        peak = peak.max(x.abs());
    }
    let scale = T::two() / T::from_usize_lossy(n);
    let (in_phase, quad) = (in_phase * scale, quad * scale);
    let amplitude = in_phase.hypot(quad);
    if !(amplitude.is_finite() && amplitude > T::lit(LOW_SIGNAL_RATIO) * peak && amplitude > T::zero())
    {
        return Err(Error::LowSignal {
            amplitude: amplitude.as_f64(),
        });
    }
    Ok(Phasor {
        amplitude,
        phase_rad: wrap_phase(quad.atan2(in_phase)),
        freq_hz: f0_hz,
    })
}

/// `Z = V / I` from two phasors at the same frequency.
pub fn impedance_from_phasors<T: Scalar>(v: &Phasor<T>, i: &Phasor<T>) -> Result<ImpedancePoint<T>> {
    let tol = T::lit(1e-9) * v.freq_hz.abs().max(i.freq_hz.abs());
    if (v.freq_hz - i.freq_hz).abs() > tol {
        return Err(Error::Contract(format!(
            "voltage at {} Hz and current at {} Hz",
            v.freq_hz, i.freq_hz
        )));
    }
    if !(i.amplitude > T::zero()) {
        return Err(Error::LowSignal {
            amplitude: i.amplitude.as_f64(),
        });
    }
    let mag = v.amplitude / i.amplitude;
    let phase = wrap_phase(v.phase_rad - i.phase_rad);
    ImpedancePoint::new(v.freq_hz, Complex::from_polar(mag, phase))
}
