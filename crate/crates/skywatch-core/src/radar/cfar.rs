//! Cell-averaging constant false alarm rate detection on Doppler spectra.

use crate::radar::{DopplerSpectrum, RadarError};

/// A cell whose power exceeds the locally estimated floor by the threshold.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CfarDetection {
    /// Signed Doppler bin offset from zero.
    pub bin_offset: i64,
    /// Power above the estimated floor, dB.
    pub snr_db: f64,
}

/// Runs a one-dimensional CA-CFAR over the spectrum.
///
/// Each candidate cell is compared against the mean of `train` cells on each
/// side, separated by `guard` cells; only cells with a complete training
/// window are evaluated. Detection requires
/// `power > mean(training) * 10^(threshold_db / 10)`.
pub fn ca_cfar(
    spectrum: &DopplerSpectrum,
    guard: usize,
    train: usize,
    threshold_db: f64,
) -> Result<Vec<CfarDetection>, RadarError> {
    let w = spectrum.window_bins();
    if train == 0 {
        return Err(RadarError::DegenerateWindow(
            "at least one training cell per side required".into(),
        ));
    }
    let span = guard + train;
    if w < 2 * span + 1 {
        return Err(RadarError::DegenerateWindow(format!(
            "window of {w} bins cannot hold 2*({guard}+{train})+1 cells"
        )));
    }
    let alpha = 10.0_f64.powf(threshold_db / 10.0);
    let mut detections = Vec::new();
    for i in span..w - span {
        let mut floor = 0.0;
        for k in 1..=train {
            floor += spectrum.power[i - guard - k] + spectrum.power[i + guard + k];
        }
        floor /= (2 * train) as f64;
        if floor <= 0.0 {
            continue;
        }
        let ratio = spectrum.power[i] / floor;
        if ratio > alpha {
            detections.push(CfarDetection {
                bin_offset: spectrum.offset_of(i),
                snr_db: 10.0 * ratio.log10(),
            });
        }
    }
    Ok(detections)
}

/// Design false-alarm probability of the CA-CFAR for exponentially
/// distributed cells: (1 + alpha/N)^(-N) with N total training cells.
pub fn cfar_design_pfa(threshold_db: f64, total_train_cells: usize) -> f64 {
    let alpha = 10.0_f64.powf(threshold_db / 10.0);
    let n = total_train_cells as f64;
    (1.0 + alpha / n).powf(-n)
}
