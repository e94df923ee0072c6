//! Synthetic broadcast-band reference waveform.
//!
//! Real analogue broadcasts have content-dependent ambiguity behaviour; the
//! simulator substitutes band-limited complex Gaussian noise, which matches
//! the average-case autocorrelation (main lobe about 1/bandwidth wide) and
//! is reproducible under a seed.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use rustfft::FftPlanner;

use crate::radar::{Channel, IQRecording};

/// Generates a unit-power, band-limited complex Gaussian reference of the
/// given duration. Deterministic for a given seed.
pub fn synth_fm_reference(
    bandwidth_hz: f64,
    duration_s: f64,
    sample_rate_hz: f64,
    seed: u64,
) -> IQRecording {
    assert!(
        bandwidth_hz > 0.0 && bandwidth_hz <= sample_rate_hz,
        "occupied bandwidth must be within the sample rate"
    );
    let n = (duration_s * sample_rate_hz).round() as usize;
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
    let mut samples: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
        .collect();

    // Brick-wall band limit in the frequency domain.
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(n).process(&mut samples);
    let half_bw = bandwidth_hz / 2.0;
    for (k, s) in samples.iter_mut().enumerate() {
        let f = if k <= n / 2 {
            k as f64 * sample_rate_hz / n as f64
        } else {
            (k as f64 - n as f64) * sample_rate_hz / n as f64
        };
        if f.abs() > half_bw {
            *s = Complex64::default();
        }
    }
    planner.plan_fft_inverse(n).process(&mut samples);

    // Normalize to unit mean power.
    let power: f64 = samples.iter().map(|s| s.norm_sqr()).sum::<f64>() / n as f64;
    let scale = 1.0 / power.sqrt();
    for s in &mut samples {
        *s *= scale;
    }

    IQRecording::new(
        sample_rate_hz,
        0.0,
        0.0,
        vec![Channel {
            id: "ref".into(),
            samples,
        }],
    )
    .expect("non-empty reference")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_under_seed() {
        let a = synth_fm_reference(5.0e4, 0.05, 1.0e5, 42);
        let b = synth_fm_reference(5.0e4, 0.05, 1.0e5, 42);
        let c = synth_fm_reference(5.0e4, 0.05, 1.0e5, 43);
        assert_eq!(a.channels()[0].samples, b.channels()[0].samples);
        assert_ne!(a.channels()[0].samples, c.channels()[0].samples);
    }

    #[test]
    fn out_of_band_power_suppressed() {
        let b = 1.0e5;
        let bw = 5.0e4;
        let rec = synth_fm_reference(bw, 0.1, b, 7);
        let mut spec = rec.channels()[0].samples.clone();
        let n = spec.len();
        FftPlanner::new().plan_fft_forward(n).process(&mut spec);
        let mut in_band = 0.0;
        let mut in_count = 0usize;
        let mut out_band = 0.0;
        let mut out_count = 0usize;
        for (k, s) in spec.iter().enumerate() {
            let f = if k <= n / 2 {
                k as f64 * b / n as f64
            } else {
                (k as f64 - n as f64) * b / n as f64
            };
            // Leave a small transition margin around the band edge.
            if f.abs() < 0.45 * bw {
                in_band += s.norm_sqr();
                in_count += 1;
            } else if f.abs() > 0.55 * bw {
                out_band += s.norm_sqr();
                out_count += 1;
            }
        }
        let psd_ratio_db =
            10.0 * ((out_band / out_count as f64) / (in_band / in_count as f64)).log10();
        assert!(psd_ratio_db < -40.0, "out-of-band PSD {psd_ratio_db} dB");
    }

    #[test]
    fn autocorrelation_main_lobe_width_tracks_bandwidth() {
        let b = 1.0e5;
        let bw = 2.5e4;
        let rec = synth_fm_reference(bw, 0.2, b, 9);
        let s = &rec.channels()[0].samples;
        let n = s.len();
        let acf = |lag: usize| -> f64 {
            let mut acc = Complex64::default();
            for i in 0..n - lag {
                acc += s[i + lag] * s[i].conj();
            }
            acc.norm() / (n - lag) as f64
        };
        let r0 = acf(0);
        // Ideal brick-wall autocorrelation is a sinc with first null at
        // 1/bandwidth; at half that lag it is still above 0.5, past the
        // null it stays low.
        let lag_half = (b / (2.0 * bw)).round() as usize;
        let lag_past = (1.6 * b / bw).round() as usize;
        assert!(acf(lag_half) / r0 > 0.5);
        assert!(acf(lag_past) / r0 < 0.3);
    }

    #[test]
    fn unit_mean_power() {
        let rec = synth_fm_reference(5.0e4, 0.05, 1.0e5, 11);
        let p: f64 = rec.channels()[0]
            .samples
            .iter()
            .map(|s| s.norm_sqr())
            .sum::<f64>()
            / rec.n_samples() as f64;
        assert!((p - 1.0).abs() < 1e-9);
    }
}
