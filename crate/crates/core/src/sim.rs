//! Synthetic pulse experiments on a Randles cell.
//!
//! The voltage is the steady-state periodic response, built by harmonic
//! superposition: the sampled current is decomposed over one period, each
//! harmonic is scaled by the model impedance at its frequency, and the
//! period is tiled across the record. The current's sampled fundamental and
//! the voltage's fundamental are therefore related by exactly `Z(jω0)`.

use num_complex::Complex;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dsp::{TimeSeries, MIN_SAMPLES_PER_CYCLE};
use crate::error::{Error, Result};
use crate::model::{randles_impedance, EcmParams};
use crate::scalar::Scalar;

pub const MIN_HARMONICS: usize = 10;

/// Square-wave charging pulse train.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSpec<T> {
    pub freq_hz: T,
    /// Peak pulse current above the bias, amperes.
    pub amplitude_a: T,
    /// High fraction of each period, in (0, 1).
    pub duty: T,
    pub n_periods: usize,
    pub dc_bias_a: T,
}

impl<T: Scalar> PulseSpec<T> {
    pub fn validate(&self) -> Result<()> {
        if !(self.freq_hz.is_finite() && self.freq_hz > T::zero()) {
            return Err(Error::Validation(format!("pulse frequency {} Hz must be positive", self.freq_hz)));
        }
        if !(self.amplitude_a.is_finite() && self.amplitude_a > T::zero()) {
            return Err(Error::Validation(format!("pulse amplitude {} A must be positive", self.amplitude_a)));
        }
        if !(self.duty > T::zero() && self.duty < T::one()) {
            return Err(Error::Validation(format!("duty {} must lie in (0, 1)", self.duty)));
        }
        if self.n_periods < 3 {
            return Err(Error::Validation(format!("{} periods requested, at least 3 required", self.n_periods)));
        }
        if !self.dc_bias_a.is_finite() {
            return Err(Error::Validation("dc bias is not finite".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig<T> {
    pub params: EcmParams<T>,
    pub ocv_v: T,
    pub n_harmonics: usize,
    pub sample_rate_hz: T,
    /// Standard deviation of additive white voltage noise.
    pub noise_rms_v: T,
    pub seed: u64,
}

impl<T: Scalar> SimConfig<T> {
    pub fn validate(&self, fundamental_hz: T) -> Result<()> {
        self.params.validate()?;
        if !self.ocv_v.is_finite() {
            return Err(Error::Validation("open-circuit voltage is not finite".into()));
        }
        if !(self.noise_rms_v.is_finite() && self.noise_rms_v >= T::zero()) {
            return Err(Error::Validation(format!("noise rms {} must be >= 0", self.noise_rms_v)));
        }
        if self.n_harmonics < MIN_HARMONICS {
            return Err(Error::Config(format!(
                "{} harmonics requested, at least {MIN_HARMONICS} required",
                self.n_harmonics
            )));
        }
        let floor = T::two() * T::from_usize_lossy(self.n_harmonics) * fundamental_hz;
        if !(self.sample_rate_hz >= floor) {
            return Err(Error::Config(format!(
                "sample rate {} Hz cannot carry {} harmonics of {} Hz (needs {} Hz)",
                self.sample_rate_hz, self.n_harmonics, fundamental_hz, floor
            )));
        }
        Ok(())
    }
}

/// Integer samples per period, or a configuration error.
pub fn samples_per_period<T: Scalar>(freq_hz: T, sample_rate_hz: T) -> Result<usize> {
    let ratio = sample_rate_hz / freq_hz;
    let n = ratio.round();
    if !(ratio.is_finite() && (ratio - n).abs() <= T::lit(1e-9) * n) {
        return Err(Error::Config(format!(
            "sample rate {sample_rate_hz} Hz is not an integer multiple of {freq_hz} Hz"
        )));
    }
    n.to_usize()
        .ok_or_else(|| Error::Config(format!("{ratio} samples per period")))
}

/// Pulse current record; the voltage channel is left at zero.
///
/// Each period starts with `round(duty · N)` high samples.
pub fn square_wave_current<T: Scalar>(spec: &PulseSpec<T>, sample_rate_hz: T) -> Result<TimeSeries<T>> {
    spec.validate()?;
    if !(sample_rate_hz >= T::lit(MIN_SAMPLES_PER_CYCLE) * spec.freq_hz) {
        return Err(Error::Config(format!(
            "sample rate {} Hz is below {}·f = {} Hz",
            sample_rate_hz,
            MIN_SAMPLES_PER_CYCLE,
            T::lit(MIN_SAMPLES_PER_CYCLE) * spec.freq_hz
        )));
    }
    let per = samples_per_period(spec.freq_hz, sample_rate_hz)?;
    let high = (spec.duty * T::from_usize_lossy(per))
        .round()
        .to_usize()
        .unwrap_or(0)
        .min(per);
    let hi = spec.dc_bias_a + spec.amplitude_a;
    let lo = spec.dc_bias_a;
    let total = per * spec.n_periods;
    let current = (0..total)
        .map(|n| if n % per < high { hi } else { lo })
        .collect();
    TimeSeries::new(sample_rate_hz, current, vec![T::zero(); total])
}

/// Complex Fourier coefficients `c_h = (1/N) Σ x[n] e^{-j2πhn/N}` of one
/// period, for `h = 0..=max_h`.
pub fn period_coefficients<T: Scalar>(period: &[T], max_h: usize) -> Vec<Complex<T>> {
    let n = period.len();
    let two_pi = T::two() * T::PI();
    let inv_n = T::one() / T::from_usize_lossy(n);
    (0..=max_h)
        .map(|h| {
            let acc = period
                .iter()
                .enumerate()
                .fold(Complex::new(T::zero(), T::zero()), |acc, (k, &x)| {
                    let th = -two_pi * T::from_usize_lossy((h * k) % n) * inv_n;
                    acc + Complex::new(th.cos(), th.sin()) * x
                });
            acc * inv_n
        })
        .collect()
}

/// Steady-state voltage response of the cell to a periodic current record.
///
/// The DC term uses `R0 + R1` (the Warburg element diverges at DC), which is
/// only meaningful over short horizons; SoC drift is not modelled.
pub fn simulate_voltage<T: Scalar>(
    current: &TimeSeries<T>,
    fundamental_hz: T,
    config: &SimConfig<T>,
) -> Result<TimeSeries<T>> {
    config.validate(fundamental_hz)?;
    if (config.sample_rate_hz - current.sample_rate_hz).abs() > T::lit(1e-9) * current.sample_rate_hz {
        return Err(Error::Contract(format!(
            "record sampled at {} Hz, configuration says {} Hz",
            current.sample_rate_hz, config.sample_rate_hz
        )));
    }
    let per = samples_per_period(fundamental_hz, current.sample_rate_hz)?;
    if current.len() < per {
        return Err(Error::InsufficientData {
            needed: per,
            got: current.len(),
        });
    }
    // strictly below Nyquist so every kept harmonic is a real cosine pair
    let max_h = config.n_harmonics.min((per - 1) / 2);
    let coeffs = period_coefficients(&current.current[..per], max_h);

    let two_pi = T::two() * T::PI();
    let p = &config.params;
    let dc = coeffs[0].re * (p.r0 + p.r1);
    let mut response = Vec::with_capacity(max_h);
    for (h, c) in coeffs.iter().enumerate().skip(1) {
        let omega = two_pi * fundamental_hz * T::from_usize_lossy(h);
        response.push(*c * randles_impedance(p, omega)? * T::two());
    }
    let inv_n = T::one() / T::from_usize_lossy(per);
    let period: Vec<T> = (0..per)
        .map(|k| {
            let ac = response.iter().enumerate().fold(T::zero(), |acc, (idx, r)| {
                let h = idx + 1;
                let th = two_pi * T::from_usize_lossy((h * k) % per) * inv_n;
                acc + r.re * th.cos() - r.im * th.sin()
            });
            config.ocv_v + dc + ac
        })
        .collect();

    let mut voltage: Vec<T> = (0..current.len()).map(|k| period[k % per]).collect();
    if config.noise_rms_v > T::zero() {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        let normal = Normal::new(0.0, config.noise_rms_v.as_f64())
            .map_err(|e| Error::Config(e.to_string()))?;
        for v in &mut voltage {
            *v = *v + T::lit(normal.sample(&mut rng));
        }
    }
    TimeSeries::new(current.sample_rate_hz, current.current.clone(), voltage)
}

/// Pulse current followed by the simulated voltage response.
pub fn simulate_pulse<T: Scalar>(spec: &PulseSpec<T>, config: &SimConfig<T>) -> Result<TimeSeries<T>> {
    let current = square_wave_current(spec, config.sample_rate_hz)?;
    simulate_voltage(&current, spec.freq_hz, config)
}
