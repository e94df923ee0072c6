//! Pruned slow-time Fourier transform.
//!
//! Matched series are Doppler-centered by the d1 coefficient, so only a
//! narrow band of bins around zero Doppler carries target energy; the
//! spectrum is evaluated at exactly those bins. Twiddles come from an exact
//! index-folded table, so the pruned bins equal the corresponding bins of a
//! full-length transform to machine precision.

use num_complex::Complex64;

use crate::exec;
use crate::radar::RadarError;

/// Power spectrum over a window of Doppler bins centered on zero.
#[derive(Debug, Clone)]
pub struct DopplerSpectrum {
    /// Power per bin; index i corresponds to bin offset i - (W-1)/2.
    pub power: Vec<f64>,
    /// Doppler bin spacing 1/(M*tau), Hz.
    pub bin_spacing_hz: f64,
}

impl DopplerSpectrum {
    pub fn window_bins(&self) -> usize {
        self.power.len()
    }

    pub fn center_index(&self) -> usize {
        (self.power.len() - 1) / 2
    }

    /// Signed bin offset from zero Doppler for power index `i`.
    pub fn offset_of(&self, i: usize) -> i64 {
        i as i64 - self.center_index() as i64
    }

    /// Doppler frequency of power index `i`, Hz.
    pub fn freq_of(&self, i: usize) -> f64 {
        self.offset_of(i) as f64 * self.bin_spacing_hz
    }
}

/// Evaluates the slow-time power spectrum at `window_bins` bins centered on
/// zero Doppler. `chi` is indexed by pulse j, representing the centered
/// index m = j - (M-1)/2; bin f has frequency f / (M * tau).
pub fn doppler_spectrum(
    chi: &[Complex64],
    window_bins: usize,
    tau_s: f64,
) -> Result<DopplerSpectrum, RadarError> {
    let m_total = chi.len();
    if m_total == 0 {
        return Err(RadarError::InvalidParameter("empty slow-time series".into()));
    }
    if window_bins.is_multiple_of(2) || window_bins > m_total {
        return Err(RadarError::InvalidParameter(format!(
            "window of {window_bins} bins must be odd and at most M = {m_total}"
        )));
    }
    // Exact twiddle table: e^{-j 2 pi r / M}, indexed by (f*m) mod M.
    let table: Vec<Complex64> = (0..m_total)
        .map(|r| Complex64::from_polar(1.0, -std::f64::consts::TAU * r as f64 / m_total as f64))
        .collect();
    let half_w = (window_bins as i64 - 1) / 2;
    let half_m = (m_total as i64 - 1) / 2;
    let m_i64 = m_total as i64;
    let power = exec::map_indexed(window_bins, |i| {
        let f = i as i64 - half_w;
        let mut acc = Complex64::default();
        for (j, c) in chi.iter().enumerate() {
            let m = j as i64 - half_m;
            let r = (f * m).rem_euclid(m_i64);
            acc += c * table[r as usize];
        }
        acc.norm_sqr()
    });
    Ok(DopplerSpectrum {
        power,
        bin_spacing_hz: 1.0 / (m_total as f64 * tau_s),
    })
}
