//! Second-order band-pass `G(s) = kω0 s / (s² + kω0 s + ω0²)` and its
//! discrete-time realisation.
//!
//! The bilinear map is prewarped at ω0, so the digital response at f0 is the
//! analog one: unity gain, zero phase, for any k.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lowest supported `sample_rate / f0`.
pub const MIN_SAMPLES_PER_CYCLE: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BpfConfig<T> {
    pub f0_hz: T,
    /// Damping gain; 1 balances harmonic attenuation against settling time.
    pub k: T,
    /// Number of identical sections in series (1 or 2).
    pub cascade_order: usize,
}

impl<T: Scalar> BpfConfig<T> {
    pub fn new(f0_hz: T, k: T, cascade_order: usize) -> Result<Self> {
        let c = Self {
            f0_hz,
            k,
            cascade_order,
        };
        c.validate()?;
        Ok(c)
    }

    /// `k = 1`, two cascaded sections.
    pub fn at(f0_hz: T) -> Result<Self> {
        Self::new(f0_hz, T::one(), 2)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f0_hz.is_finite() && self.f0_hz > T::zero()) {
            return Err(Error::Config(format!("f0 = {} Hz must be positive", self.f0_hz)));
        }
        if !(self.k.is_finite() && self.k > T::zero()) {
            return Err(Error::Config(format!("k = {} must be positive", self.k)));
        }
        if !(1..=2).contains(&self.cascade_order) {
            return Err(Error::Config(format!(
                "cascade order {} not supported (1 or 2)",
                self.cascade_order
            )));
        }
        Ok(())
    }

    /// Seconds discarded before measuring: three envelope time constants
    /// `1/(k f0)` per section.
    pub fn settle_time_s(&self) -> T {
        T::lit(3.0) * T::from_usize_lossy(self.cascade_order) / (self.k * self.f0_hz)
    }
}

/// Continuous prototype evaluated at `ω = ratio · ω0`.
pub fn prototype_response<T: Scalar>(k: T, ratio: T) -> Complex<T> {
    let s = Complex::new(T::zero(), ratio);
    let num = s * k;
    let den = s * s + s * k + T::one();
    num / den
}

/// Transposed direct-form II biquad.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Biquad<T> {
    pub b0: T,
    pub b1: T,
    pub b2: T,
    pub a1: T,
    pub a2: T,
    s1: T,
    s2: T,
}

impl<T: Scalar> Biquad<T> {
    pub fn new(b0: T, b1: T, b2: T, a1: T, a2: T) -> Self {
        Self {
            b0,
            b1,
            b2,
            a1,
            a2,
            s1: T::zero(),
            s2: T::zero(),
        }
    }

    #[inline]
    pub fn process(&mut self, x: T) -> T {
        let y = self.b0 * x + self.s1;
        self.s1 = self.b1 * x - self.a1 * y + self.s2;
        self.s2 = self.b2 * x - self.a2 * y;
        y
    }

    pub fn reset(&mut self) {
        self.s1 = T::zero();
        self.s2 = T::zero();
    }

    /// H(e^{jωT}) at `freq_hz`.
    pub fn response(&self, freq_hz: T, sample_rate_hz: T) -> Complex<T> {
        let theta = T::two() * T::PI() * freq_hz / sample_rate_hz;
        let z1 = Complex::new(theta.cos(), -theta.sin());
        let z2 = z1 * z1;
        let num = z1 * self.b1 + z2 * self.b2 + self.b0;
        let den = z1 * self.a1 + z2 * self.a2 + T::one();
        num / den
    }
}

/// Cascade of identical band-pass sections with private state.
#[derive(Debug, Clone, PartialEq)]
pub struct BandPass<T> {
    stages: Vec<Biquad<T>>,
    sample_rate_hz: T,
}

impl<T: Scalar> BandPass<T> {
    #[inline]
    pub fn process(&mut self, x: T) -> T {
        self.stages.iter_mut().fold(x, |acc, s| s.process(acc))
    }

    pub fn process_in_place(&mut self, samples: &mut [T]) {
        for x in samples {
            *x = self.process(*x);
        }
    }

    pub fn reset(&mut self) {
        self.stages.iter_mut().for_each(Biquad::reset);
    }

    pub fn response(&self, freq_hz: T) -> Complex<T> {
        self.stages
            .iter()
            .fold(Complex::new(T::one(), T::zero()), |acc, s| {
                acc * s.response(freq_hz, self.sample_rate_hz)
            })
    }

    pub fn section(&self) -> &Biquad<T> {
        &self.stages[0]
    }

    pub fn sample_rate_hz(&self) -> T {
        self.sample_rate_hz
    }
}

/// Discretises the band-pass for `sample_rate_hz`.
pub fn design_bpf<T: Scalar>(config: &BpfConfig<T>, sample_rate_hz: T) -> Result<BandPass<T>> {
    config.validate()?;
    if !(sample_rate_hz.is_finite()
        && sample_rate_hz >= T::lit(MIN_SAMPLES_PER_CYCLE) * config.f0_hz)
    {
        return Err(Error::Config(format!(
            "sample rate {} Hz is below {}·f0 = {} Hz",
            sample_rate_hz,
            MIN_SAMPLES_PER_CYCLE,
            T::lit(MIN_SAMPLES_PER_CYCLE) * config.f0_hz
        )));
    }
    // s = (ω0/K)(1 - z⁻¹)/(1 + z⁻¹) with K = tan(ω0 T / 2)
    let kk = (T::PI() * config.f0_hz / sample_rate_hz).tan();
    let kd = config.k * kk;
    let kk2 = kk * kk;
    let a0 = T::one() + kd + kk2;
    let section = Biquad::new(
        kd / a0,
        T::zero(),
        -kd / a0,
        T::two() * (kk2 - T::one()) / a0,
        (T::one() - kd + kk2) / a0,
    );
    Ok(BandPass {
        stages: vec![section; config.cascade_order],
        sample_rate_hz,
    })
}
