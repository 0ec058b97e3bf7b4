//! Reading impedances off a spectrum at arbitrary frequencies.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::model::ImpedanceSpectrum;
use crate::scalar::Scalar;
use crate::solver::{FrequencyTriplet, TripletMeasurement};

/// Impedance at `freq_hz`: the grid value when it lies on the grid,
/// otherwise linear interpolation of Re and Im in log frequency.
pub fn probe_at<T: Scalar>(spectrum: &ImpedanceSpectrum<T>, freq_hz: T) -> Result<Complex<T>> {
    let pts = spectrum.points();
    if !(freq_hz >= spectrum.min_hz() && freq_hz <= spectrum.max_hz()) {
        return Err(Error::Range {
            freq_hz: freq_hz.as_f64(),
            min_hz: spectrum.min_hz().as_f64(),
            max_hz: spectrum.max_hz().as_f64(),
        });
    }
    // first point at or above freq_hz
    let hi = pts.partition_point(|p| p.freq_hz < freq_hz);
    if pts[hi].freq_hz == freq_hz {
        return Ok(pts[hi].z);
    }
    let (a, b) = (&pts[hi - 1], &pts[hi]);
    let t = (freq_hz / a.freq_hz).ln() / (b.freq_hz / a.freq_hz).ln();
    Ok(a.z + (b.z - a.z) * t)
}

pub fn probe_spectrum<T: Scalar>(
    spectrum: &ImpedanceSpectrum<T>,
    triplet: &FrequencyTriplet<T>,
) -> Result<TripletMeasurement<T>> {
    TripletMeasurement::new(
        *triplet,
        probe_at(spectrum, triplet.f_low_hz)?,
        probe_at(spectrum, triplet.f_mid_hz)?,
        probe_at(spectrum, triplet.f_high_hz)?,
    )
}
