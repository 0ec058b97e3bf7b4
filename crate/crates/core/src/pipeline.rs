//! End-to-end flows: spectrum → parameters, pulse records → parameters,
//! parameters → score.

use crate::dsp::{measure_impedance, BpfConfig, PulseMeasurement, TimeSeries};
use crate::error::{Error, Result};
use crate::metrics::{score, FitReport, Score};
use crate::model::{EcmParams, ImpedanceSpectrum};
use crate::scalar::Scalar;
use crate::solver::{identify_with_diagnostics, FrequencyTriplet, TripletMeasurement};
use crate::spectrum_io::{probe_spectrum, select_frequencies, SelectionPolicy};

/// Result of [`fit_spectrum`]: the report and the model spectrum on the
/// measured grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumFit<T> {
    pub report: FitReport<T>,
    pub score: Score<T>,
}

/// Select → probe → identify → score.
pub fn fit_spectrum<T: Scalar>(
    spectrum: &ImpedanceSpectrum<T>,
    policy: &SelectionPolicy<T>,
) -> Result<SpectrumFit<T>> {
    let selection = select_frequencies(spectrum, policy)?;
    let m = probe_spectrum(spectrum, &selection.triplet)?;
    // separation warnings already came from the selection step
    let id = identify_with_diagnostics(&m, T::zero())?;
    let sc = score(&id.params, spectrum)?;
    let mut report = FitReport::new(id.params).with_score(&sc);
    report.triplet = Some(selection.triplet);
    report.measurement = Some(m);
    report.c1_consistency_gap_pct = Some(id.c1_consistency_gap_pct);
    report.warnings = selection.warnings;
    Ok(SpectrumFit { report, score: sc })
}

/// One pulse record and its excitation frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct PulseRecord<T> {
    pub freq_hz: T,
    pub series: TimeSeries<T>,
}

/// Filter settings shared by the three records.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseSettings<T> {
    pub k: T,
    pub cascade_order: usize,
    pub min_separation_ratio: T,
}

impl<T: Scalar> Default for PulseSettings<T> {
    fn default() -> Self {
        Self {
            k: T::one(),
            cascade_order: 2,
            min_separation_ratio: T::lit(crate::solver::DEFAULT_MIN_SEPARATION_RATIO),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PulseFit<T> {
    pub report: FitReport<T>,
    /// Per-record extraction results in ascending frequency.
    pub measurements: [PulseMeasurement<T>; 3],
    pub score: Option<Score<T>>,
}

/// Extracts the impedance of each record, orders them by frequency and
/// identifies. With a reference spectrum the result is also scored.
pub fn fit_pulses<T: Scalar>(
    mut records: Vec<PulseRecord<T>>,
    settings: &PulseSettings<T>,
    reference: Option<&ImpedanceSpectrum<T>>,
) -> Result<PulseFit<T>> {
    if records.len() != 3 {
        return Err(Error::Validation(format!(
            "exactly 3 pulse records required, got {}",
            records.len()
        )));
    }
    let mut warnings = Vec::new();
    if records.windows(2).any(|w| w[1].freq_hz < w[0].freq_hz) {
        records.sort_by(|a, b| a.freq_hz.partial_cmp(&b.freq_hz).expect("finite"));
        warnings.push(format!(
            "records reordered by frequency: {}, {}, {} Hz",
            records[0].freq_hz, records[1].freq_hz, records[2].freq_hz
        ));
    }
    let triplet = FrequencyTriplet::new(records[0].freq_hz, records[1].freq_hz, records[2].freq_hz)?;
    let mut out = Vec::with_capacity(3);
    for r in &records {
        let cfg = BpfConfig::new(r.freq_hz, settings.k, settings.cascade_order)?;
        out.push(measure_impedance(&r.series, &cfg)?);
    }
    let measurements: [PulseMeasurement<T>; 3] = [out[0], out[1], out[2]];
    let m = TripletMeasurement::new(
        triplet,
        measurements[0].point.z,
        measurements[1].point.z,
        measurements[2].point.z,
    )?;
    let id = identify_with_diagnostics(&m, settings.min_separation_ratio)?;
    warnings.extend(id.warnings);
    let sc = reference.map(|s| score(&id.params, s)).transpose()?;
    let mut report = FitReport::new(id.params);
    if let Some(s) = &sc {
        report = report.with_score(s);
    }
    report.triplet = Some(triplet);
    report.measurement = Some(m);
    report.c1_consistency_gap_pct = Some(id.c1_consistency_gap_pct);
    report.warnings = warnings;
    Ok(PulseFit {
        report,
        measurements,
        score: sc,
    })
}

/// Scores given parameters against a spectrum.
pub fn validate_params<T: Scalar>(
    params: &EcmParams<T>,
    spectrum: &ImpedanceSpectrum<T>,
) -> Result<SpectrumFit<T>> {
    spectrum.require_measured()?;
    let sc = score(params, spectrum)?;
    Ok(SpectrumFit {
        report: FitReport::new(*params).with_score(&sc),
        score: sc,
    })
}
