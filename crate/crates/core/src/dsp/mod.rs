//! Online impedance extraction from a pulsed-current record.
//!
//! Pipeline: band-pass both channels with identical filters, drop the
//! settling interval, take the fundamental phasor of each channel, divide.
//! Because both channels see the same filter, its phase response cancels in
//! the voltage/current phase difference.

mod bpf;
mod lissajous;
mod phasor;

pub use bpf::{design_bpf, prototype_response, BandPass, Biquad, BpfConfig, MIN_SAMPLES_PER_CYCLE};
pub use lissajous::{lissajous_phase, per_unitize};
pub use phasor::{
    extract_phasor, impedance_from_phasors, whole_cycle_window, wrap_phase, Phasor,
    LOW_SIGNAL_RATIO,
};

use crate::error::{Error, Result};
use crate::model::ImpedancePoint;
use crate::scalar::Scalar;

/// Minimum number of whole excitation cycles in the measurement window.
pub const MIN_MEASURED_CYCLES: usize = 3;

/// Uniformly sampled current (A) and voltage (V) channels.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeries<T> {
    pub sample_rate_hz: T,
    pub current: Vec<T>,
    pub voltage: Vec<T>,
}

impl<T: Scalar> TimeSeries<T> {
    pub fn new(sample_rate_hz: T, current: Vec<T>, voltage: Vec<T>) -> Result<Self> {
        if !(sample_rate_hz.is_finite() && sample_rate_hz > T::zero()) {
            return Err(Error::Validation(format!(
                "sample rate {sample_rate_hz} Hz must be positive"
            )));
        }
        if current.len() != voltage.len() {
            return Err(Error::Validation(format!(
                "channel lengths differ ({} vs {})",
                current.len(),
                voltage.len()
            )));
        }
        Ok(Self {
            sample_rate_hz,
            current,
            voltage,
        })
    }

    pub fn len(&self) -> usize {
        self.current.len()
    }

    pub fn is_empty(&self) -> bool {
        self.current.is_empty()
    }

    pub fn duration_s(&self) -> T {
        T::from_usize_lossy(self.len()) / self.sample_rate_hz
    }

    pub fn time_s(&self, index: usize) -> T {
        T::from_usize_lossy(index) / self.sample_rate_hz
    }
}

/// Samples discarded at the start of a filtered record: the settle time
/// rounded up to whole cycles of f0.
pub fn settle_samples<T: Scalar>(config: &BpfConfig<T>, sample_rate_hz: T) -> usize {
    // tolerance keeps 6.0000000001 cycles from rounding up to 7
    let cycles = (config.settle_time_s() * config.f0_hz - T::lit(1e-9)).ceil();
    (cycles * sample_rate_hz / config.f0_hz)
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX)
}

/// Record length required for one measurement.
pub fn required_samples<T: Scalar>(config: &BpfConfig<T>, sample_rate_hz: T) -> usize {
    let per_cycle = sample_rate_hz / config.f0_hz;
    let window = (per_cycle * T::from_usize_lossy(MIN_MEASURED_CYCLES))
        .ceil()
        .to_usize()
        .unwrap_or(usize::MAX);
    settle_samples(config, sample_rate_hz).saturating_add(window)
}

fn mean<T: Scalar>(x: &[T]) -> T {
    x.iter().fold(T::zero(), |a, &b| a + b) / T::from_usize_lossy(x.len().max(1))
}

/// Band-passes both channels with identically designed filters.
///
/// Each channel's mean is subtracted first; the band-pass rejects DC in
/// steady state anyway, this only removes the start-up step so the settle
/// interval covers the AC transient alone.
pub fn filter_fundamental<T: Scalar>(ts: &TimeSeries<T>, config: &BpfConfig<T>) -> Result<TimeSeries<T>> {
    let template = design_bpf(config, ts.sample_rate_hz)?;
    let needed = required_samples(config, ts.sample_rate_hz);
    if ts.len() < needed {
        return Err(Error::InsufficientData {
            needed,
            got: ts.len(),
        });
    }
    let run = |x: &[T]| {
        let mut filter = template.clone();
        let m = mean(x);
        x.iter().map(|&s| filter.process(s - m)).collect::<Vec<T>>()
    };
    TimeSeries::new(ts.sample_rate_hz, run(&ts.current), run(&ts.voltage))
}

/// Fundamental phasors of both channels and the impedance they imply.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseMeasurement<T> {
    pub point: ImpedancePoint<T>,
    pub voltage: Phasor<T>,
    pub current: Phasor<T>,
    /// Phase magnitude read from the Lissajous ellipse, radians.
    pub lissajous_phase_rad: T,
}

/// Full extraction at `config.f0_hz`: filter, discard settling, demodulate.
pub fn measure_impedance<T: Scalar>(ts: &TimeSeries<T>, config: &BpfConfig<T>) -> Result<PulseMeasurement<T>> {
    let filtered = filter_fundamental(ts, config)?;
    let start = settle_samples(config, ts.sample_rate_hz);
    let v = &filtered.voltage[start..];
    let i = &filtered.current[start..];
    let vp = extract_phasor(v, config.f0_hz, ts.sample_rate_hz)?;
    let ip = extract_phasor(i, config.f0_hz, ts.sample_rate_hz)?;
    let point = impedance_from_phasors(&vp, &ip)?;
    let liss = lissajous_phase(&per_unitize(v, vp.amplitude)?, &per_unitize(i, ip.amplitude)?)?;
    Ok(PulseMeasurement {
        point,
        voltage: vp,
        current: ip,
        lissajous_phase_rad: liss,
    })
}
