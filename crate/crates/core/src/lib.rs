//! Closed-form identification of a Randles equivalent circuit (R0, R1‖C1,
//! Warburg) from three impedance samples, plus the signal chain that
//! produces those samples from a pulsed-current record.
//!
//! Everything numeric is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` / `*32` aliases below pin the common choices.

pub mod dsp;
pub mod error;
pub mod metrics;
pub mod model;
pub mod pipeline;
pub mod scalar;
pub mod sim;
pub mod solver;
pub mod spectrum_io;

pub use error::{Error, Result};
pub use model::{
    log_grid, randles_impedance, spectrum_from_params, warburg_impedance, EcmParams,
    ImpedancePoint, ImpedanceSpectrum,
};
pub use metrics::{FitReport, Score};
pub use pipeline::{fit_pulses, fit_spectrum, validate_params, PulseRecord, PulseSettings};
pub use scalar::Scalar;
pub use spectrum_io::SelectionPolicy;
pub use solver::{identify, identify_with_diagnostics, FrequencyTriplet, Identification, TripletMeasurement};

pub type EcmParams64 = EcmParams<f64>;
pub type EcmParams32 = EcmParams<f32>;
pub type ImpedancePoint64 = ImpedancePoint<f64>;
pub type ImpedancePoint32 = ImpedancePoint<f32>;
pub type ImpedanceSpectrum64 = ImpedanceSpectrum<f64>;
pub type ImpedanceSpectrum32 = ImpedanceSpectrum<f32>;
pub type FrequencyTriplet64 = FrequencyTriplet<f64>;
pub type FrequencyTriplet32 = FrequencyTriplet<f32>;
pub type TripletMeasurement64 = TripletMeasurement<f64>;
pub type TimeSeries64 = dsp::TimeSeries<f64>;
pub type TimeSeries32 = dsp::TimeSeries<f32>;
pub type BpfConfig64 = dsp::BpfConfig<f64>;
pub type FitReport64 = FitReport<f64>;
pub type SelectionPolicy64 = SelectionPolicy<f64>;
