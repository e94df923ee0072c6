//! Pulse compression and orbit-matched range-bin extraction.
//!
//! Recordings are cut into `M` pulses of nominal length `tau`. Pulse `m`
//! covers samples `[round(m*B*tau), round((m+1)*B*tau))`, which reduces to
//! the usual contiguous grid when `B*tau` is an integer and degrades
//! gracefully (alternating pulse lengths) when it is not. Each pulse of each
//! surveillance channel is correlated against the reference over a window of
//! delay bins via frequency-domain segment correlation.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::exec;
use crate::phasing::PhaseMatrix;
use crate::radar::RadarError;

/// A complex baseband recording: one or more synchronously sampled channels.
#[derive(Debug, Clone)]
pub struct IQRecording {
    pub sample_rate_hz: f64,
    pub start_time_s: f64,
    pub center_freq_hz: f64,
    channels: Vec<Channel>,
}

/// One channel of an [`IQRecording`].
#[derive(Debug, Clone)]
pub struct Channel {
    pub id: String,
    pub samples: Vec<Complex64>,
}

impl IQRecording {
    pub fn new(
        sample_rate_hz: f64,
        start_time_s: f64,
        center_freq_hz: f64,
        channels: Vec<Channel>,
    ) -> Result<Self, RadarError> {
        if channels.is_empty() || channels[0].samples.is_empty() {
            return Err(RadarError::EmptyRecording);
        }
        if sample_rate_hz.is_nan() || sample_rate_hz <= 0.0 {
            return Err(RadarError::InvalidParameter(
                "sample rate must be positive".into(),
            ));
        }
        let len = channels[0].samples.len();
        if channels.iter().any(|c| c.samples.len() != len) {
            return Err(RadarError::RaggedChannels);
        }
        Ok(Self {
            sample_rate_hz,
            start_time_s,
            center_freq_hz,
            channels,
        })
    }

    pub fn channels(&self) -> &[Channel] {
        &self.channels
    }

    pub fn n_samples(&self) -> usize {
        self.channels[0].samples.len()
    }

    /// Extracts a sample range as a new recording (used to slice CPIs).
    pub fn slice(&self, start: usize, len: usize) -> Result<Self, RadarError> {
        if start + len > self.n_samples() {
            return Err(RadarError::InsufficientSamples {
                needed: start + len,
                available: self.n_samples(),
            });
        }
        Ok(Self {
            sample_rate_hz: self.sample_rate_hz,
            start_time_s: self.start_time_s + start as f64 / self.sample_rate_hz,
            center_freq_hz: self.center_freq_hz,
            channels: self
                .channels
                .iter()
                .map(|c| Channel {
                    id: c.id.clone(),
                    samples: c.samples[start..start + len].to_vec(),
                })
                .collect(),
        })
    }
}

/// Complex range-compressed pulses indexed by tile, pulse, and delay bin.
#[derive(Debug, Clone)]
pub struct PulseCube {
    /// Row-major [tile][pulse][delay].
    data: Vec<Complex64>,
    n_tiles: usize,
    n_pulses: usize,
    n_delay_bins: usize,
    /// Nominal pulse length, s.
    tau_s: f64,
    sample_rate_hz: f64,
    /// First delay bin of the window, in samples.
    delay_start_bin: i64,
    /// Start time of the compressed interval, s.
    start_time_s: f64,
    /// Samples consumed from the recordings: round(M * B * tau).
    samples_used: usize,
}

impl PulseCube {
    pub fn n_tiles(&self) -> usize {
        self.n_tiles
    }

    pub fn n_pulses(&self) -> usize {
        self.n_pulses
    }

    pub fn n_delay_bins(&self) -> usize {
        self.n_delay_bins
    }

    pub fn tau_s(&self) -> f64 {
        self.tau_s
    }

    pub fn sample_rate_hz(&self) -> f64 {
        self.sample_rate_hz
    }

    /// Delay of the first bin of the window, s.
    pub fn delay_bin_zero_s(&self) -> f64 {
        self.delay_start_bin as f64 / self.sample_rate_hz
    }

    pub fn samples_used(&self) -> usize {
        self.samples_used
    }

    /// Mid-CPI time: phase matrices and per-pulse delays are referenced here.
    pub fn cpi_center_time_s(&self) -> f64 {
        self.start_time_s + self.samples_used as f64 / (2.0 * self.sample_rate_hz)
    }

    /// Time of the centered pulse index m = j - (M-1)/2 on the uniform grid.
    pub fn pulse_time_s(&self, j: usize) -> f64 {
        let half = (self.n_pulses as i64 - 1) / 2;
        self.cpi_center_time_s() + (j as i64 - half) as f64 * self.tau_s
    }

    /// Compressed value for tile `n`, pulse `j`, absolute delay bin `t`.
    pub fn value(&self, n: usize, j: usize, t_abs: i64) -> Complex64 {
        let dt = (t_abs - self.delay_start_bin) as usize;
        self.data[(n * self.n_pulses + j) * self.n_delay_bins + dt]
    }

    fn tile_pulse_row(&self, n: usize, j: usize) -> &[Complex64] {
        let base = (n * self.n_pulses + j) * self.n_delay_bins;
        &self.data[base..base + self.n_delay_bins]
    }
}

/// Pulse boundaries for pulse `m`: sample range within the recording.
fn pulse_bounds(m: usize, samples_per_pulse: f64) -> (usize, usize) {
    let a = (m as f64 * samples_per_pulse).round() as usize;
    let b = ((m + 1) as f64 * samples_per_pulse).round() as usize;
    (a, b)
}

/// Range-compresses every channel of `surveillance` against the single
/// reference channel over delay bins `[0, ceil(B * max_delay_s))`.
pub fn pulse_compress(
    surveillance: &IQRecording,
    reference: &IQRecording,
    tau_s: f64,
    max_delay_s: f64,
) -> Result<PulseCube, RadarError> {
    pulse_compress_windowed(surveillance, reference, tau_s, 0.0, max_delay_s)
}

/// Range-compression over a delay window `[delay_start_s, delay_start_s +
/// delay_span_s)`, for bounding cube memory when the delay of interest is
/// known. Reference samples outside the recording are treated as zero.
pub fn pulse_compress_windowed(
    surveillance: &IQRecording,
    reference: &IQRecording,
    tau_s: f64,
    delay_start_s: f64,
    delay_span_s: f64,
) -> Result<PulseCube, RadarError> {
    let b = surveillance.sample_rate_hz;
    if (b - reference.sample_rate_hz).abs() > 1e-9 * b {
        return Err(RadarError::MismatchedSampleRate {
            surveillance: b,
            reference: reference.sample_rate_hz,
        });
    }
    // The reference may begin earlier than the surveillance (pre-roll for
    // the propagation delay), but the two must share the sample grid.
    let dt0 = (surveillance.start_time_s - reference.start_time_s) * b;
    if (dt0 - dt0.round()).abs() > 1e-6 {
        return Err(RadarError::MisalignedStart(dt0 / b));
    }
    let ref_offset = dt0.round() as i64;
    if reference.channels().len() != 1 {
        return Err(RadarError::ReferenceChannelCount(reference.channels().len()));
    }
    if tau_s.is_nan()
        || tau_s <= 0.0
        || delay_span_s.is_nan()
        || delay_span_s <= 0.0
        || delay_start_s < 0.0
    {
        return Err(RadarError::InvalidParameter(
            "tau and delay span must be positive, delay start non-negative".into(),
        ));
    }

    let spp = b * tau_s; // samples per pulse, possibly fractional
    let n_samples = surveillance.n_samples();
    // Epsilon guards the exact-fit case against float quotient round-down.
    let mut n_pulses = (n_samples as f64 / spp + 1e-9).floor() as usize;
    if n_pulses.is_multiple_of(2) {
        n_pulses = n_pulses.saturating_sub(1); // centered index set needs odd M
    }
    if n_pulses == 0 {
        return Err(RadarError::InsufficientSamples {
            needed: spp.ceil() as usize,
            available: n_samples,
        });
    }
    let samples_used = (n_pulses as f64 * spp).round() as usize;

    let delay_start_bin = (delay_start_s * b).round() as i64;
    let n_delay_bins = (delay_span_s * b).ceil() as usize;
    let n_tiles = surveillance.channels().len();

    // FFT sizing: the longest pulse plus the delay window, linear (no wrap).
    let max_pulse_len = (0..n_pulses)
        .map(|m| {
            let (a, e) = pulse_bounds(m, spp);
            e - a
        })
        .max()
        .unwrap();
    let fft_len = (max_pulse_len + n_delay_bins - 1).next_power_of_two();
    let mut planner = FftPlanner::new();
    let fwd: Arc<dyn Fft<f64>> = planner.plan_fft_forward(fft_len);
    let inv: Arc<dyn Fft<f64>> = planner.plan_fft_inverse(fft_len);

    let ref_samples = &reference.channels()[0].samples;
    let mut data = vec![Complex64::default(); n_tiles * n_pulses * n_delay_bins];
    exec::for_each_chunk(&mut data, n_pulses * n_delay_bins, |n, tile_out| {
        let surv = &surveillance.channels()[n].samples;
        let mut s_buf = vec![Complex64::default(); fft_len];
        let mut r_buf = vec![Complex64::default(); fft_len];
        let mut scratch = vec![Complex64::default(); fwd.get_inplace_scratch_len().max(inv.get_inplace_scratch_len())];
        for m in 0..n_pulses {
            let (a, e) = pulse_bounds(m, spp);
            let len = e - a;
            s_buf.fill(Complex64::default());
            s_buf[..len].copy_from_slice(&surv[a..e]);
            // Reference segment covering all delays in the window, zero
            // outside the recording.
            r_buf.fill(Complex64::default());
            let lo = ref_offset + a as i64 - delay_start_bin - (n_delay_bins as i64 - 1);
            for (i, r) in r_buf.iter_mut().enumerate().take(len + n_delay_bins - 1) {
                let idx = lo + i as i64;
                if idx >= 0 && (idx as usize) < ref_samples.len() {
                    *r = ref_samples[idx as usize];
                }
            }
            fwd.process_with_scratch(&mut s_buf, &mut scratch);
            fwd.process_with_scratch(&mut r_buf, &mut scratch);
            for (s, r) in s_buf.iter_mut().zip(r_buf.iter()) {
                *s *= r.conj();
            }
            inv.process_with_scratch(&mut s_buf, &mut scratch);
            // s_buf[(fft_len - k) % fft_len] / fft_len = sum_j s[j] conj(r[j + k]);
            // delay bin dt corresponds to k = (D - 1) - dt.
            let row = &mut tile_out[m * n_delay_bins..(m + 1) * n_delay_bins];
            let scale = 1.0 / fft_len as f64;
            for (dt, out) in row.iter_mut().enumerate() {
                let k = n_delay_bins - 1 - dt;
                let idx = (fft_len - k) % fft_len;
                *out = s_buf[idx] * scale;
            }
        }
    });

    Ok(PulseCube {
        data,
        n_tiles,
        n_pulses,
        n_delay_bins,
        tau_s,
        sample_rate_hz: b,
        delay_start_bin,
        start_time_s: surveillance.start_time_s,
        samples_used,
    })
}

/// Applies the phase matrix and sums across tiles at the per-pulse delay
/// bin, producing the fully matched slow-time series.
///
/// `delays_s[j]` is the absolute bistatic delay for pulse `j`; the sampled
/// bin is the nearest sample. A fixed-bin variant is obtained by passing a
/// constant delay vector.
pub fn matched_range_series(
    cube: &PulseCube,
    phase: &PhaseMatrix,
    delays_s: &[f64],
) -> Result<Vec<Complex64>, RadarError> {
    if phase.n_tiles() != cube.n_tiles() || phase.n_pulses() != cube.n_pulses() {
        return Err(RadarError::DimensionMismatch(format!(
            "phase matrix {}x{} vs cube {}x{}",
            phase.n_tiles(),
            phase.n_pulses(),
            cube.n_tiles(),
            cube.n_pulses()
        )));
    }
    if delays_s.len() != cube.n_pulses() {
        return Err(RadarError::DimensionMismatch(format!(
            "{} delays for {} pulses",
            delays_s.len(),
            cube.n_pulses()
        )));
    }
    let b = cube.sample_rate_hz();
    let mut bins = Vec::with_capacity(delays_s.len());
    let mut offending = Vec::new();
    for (j, d) in delays_s.iter().enumerate() {
        let t_abs = (d * b).round() as i64;
        let rel = t_abs - cube.delay_start_bin;
        if rel < 0 || rel as usize >= cube.n_delay_bins() {
            offending.push(j);
        }
        bins.push(rel);
    }
    if !offending.is_empty() {
        return Err(RadarError::DelayOutOfSpan { pulses: offending });
    }

    let mut out = Vec::with_capacity(cube.n_pulses());
    #[allow(clippy::needless_range_loop)] // j indexes the cube, bins, and phase rows together
    for j in 0..cube.n_pulses() {
        let dt = bins[j] as usize;
        let mut acc = Complex64::default();
        for n in 0..cube.n_tiles() {
            acc += phase.entry(n, j) * cube.tile_pulse_row(n, j)[dt];
        }
        out.push(acc);
    }
    Ok(out)
}
