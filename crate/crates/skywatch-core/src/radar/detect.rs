//! Orbit-hypothesis evaluation: coefficients at the CPI center, phase
//! matrix, matched combination, pruned spectrum, CFAR, and measurement
//! assembly.

use crate::constants::SPEED_OF_LIGHT;
use crate::dynamics::{azel_series, propagate, slant_series, DynamicsError, StateVector};
use crate::frames::{sez_matrix_aligned, site_kinematics_eci_aligned, GeodeticSite};
use crate::od::{Measurement, MeasurementSigma};
use crate::phasing::{doppler_coeffs, phase_matrix, spatial_coeffs, wavevector_series, TileArray};
use crate::radar::{ca_cfar, doppler_spectrum, matched_range_series, PulseCube, RadarError};

/// Receiver and transmitter geometry shared by simulation and detection.
#[derive(Debug, Clone)]
pub struct SceneGeometry {
    pub rx_site: GeodeticSite,
    pub tiles: TileArray,
    /// Earth-rotation alignment angle at the scenario epoch, rad.
    pub alignment_rad: f64,
    pub transmitters: Vec<TxGeometry>,
}

#[derive(Debug, Clone)]
pub struct TxGeometry {
    pub id: String,
    pub site: GeodeticSite,
    pub carrier_hz: f64,
}

impl SceneGeometry {
    pub fn transmitter(&self, id: &str) -> Option<&TxGeometry> {
        self.transmitters.iter().find(|t| t.id == id)
    }
}

/// How the range bin is sampled across the CPI.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RangeSampling {
    /// Re-evaluate the bistatic delay at every pulse (tracks range
    /// migration across the CPI).
    #[default]
    PerPulse,
    /// Sample the single bin given by the CPI-center delay.
    FixedBin,
}

/// Detection-stage tuning knobs.
#[derive(Debug, Clone)]
pub struct DetectParams {
    /// Pruned Doppler window width, bins (odd).
    pub doppler_window_bins: usize,
    /// CFAR guard cells per side.
    pub guard_bins: usize,
    /// CFAR training cells per side.
    pub train_bins: usize,
    /// CFAR threshold, dB.
    pub threshold_db: f64,
    pub range_sampling: RangeSampling,
}

impl Default for DetectParams {
    fn default() -> Self {
        Self {
            doppler_window_bins: 201,
            guard_bins: 4,
            train_bins: 32,
            threshold_db: 16.0,
            range_sampling: RangeSampling::PerPulse,
        }
    }
}

/// A pulse cube tagged with the transmitter it was compressed against.
#[derive(Debug)]
pub struct TransmitterCube<'a> {
    pub tx_id: String,
    pub cube: &'a PulseCube,
}

/// A confirmed detection of one hypothesis against one transmitter.
#[derive(Debug, Clone)]
pub struct Detection {
    pub tx_id: String,
    pub hypothesis_id: String,
    /// Peak power above the CFAR floor, dB.
    pub snr_db: f64,
    /// Doppler of the peak relative to the hypothesis prediction, Hz.
    pub doppler_offset_hz: f64,
    pub measurement: Measurement,
}

/// Outcome of evaluating a hypothesis against one transmitter's cube.
#[derive(Debug, Clone)]
pub enum TxOutcome {
    Detected(Detection),
    NoDetection,
    /// The hypothesis could not be evaluated; the reason says why.
    Skipped(String),
}

/// Runs the full matched-detection chain for one orbit hypothesis against
/// each transmitter's pulse cube.
///
/// Hypotheses whose geometry cannot produce a measurement (below the
/// receiver horizon, zenith-singular, delay outside the cube's window, or
/// re-entered) are reported as [`TxOutcome::Skipped`] with the reason.
pub fn detect_orbit(
    cubes: &[TransmitterCube<'_>],
    hypothesis: &StateVector,
    hypothesis_id: &str,
    scene: &SceneGeometry,
    params: &DetectParams,
) -> Result<Vec<(String, TxOutcome)>, RadarError> {
    let mut outcomes = Vec::with_capacity(cubes.len());
    for tc in cubes {
        let tx = scene
            .transmitter(&tc.tx_id)
            .ok_or_else(|| RadarError::UnknownTransmitter(tc.tx_id.clone()))?;
        let outcome = evaluate_one(tc.cube, hypothesis, hypothesis_id, tx, scene, params)?;
        outcomes.push((tc.tx_id.clone(), outcome));
    }
    Ok(outcomes)
}

fn evaluate_one(
    cube: &PulseCube,
    hypothesis: &StateVector,
    hypothesis_id: &str,
    tx: &TxGeometry,
    scene: &SceneGeometry,
    params: &DetectParams,
) -> Result<TxOutcome, RadarError> {
    let t_c = cube.cpi_center_time_s();
    let prop = propagate(hypothesis, t_c - hypothesis.epoch_s)?;
    if prop.reentered {
        return Ok(TxOutcome::Skipped("hypothesis re-entered before the CPI".into()));
    }
    let state = prop.state;
    let rx_kin = site_kinematics_eci_aligned(&scene.rx_site, t_c, scene.alignment_rad);
    let tx_kin = site_kinematics_eci_aligned(&tx.site, t_c, scene.alignment_rad);
    let d = sez_matrix_aligned(&scene.rx_site, t_c, scene.alignment_rad);

    let tk = state.kinematics()?;
    let srx = match slant_series(&tk, &rx_kin) {
        Ok(s) => s,
        Err(DynamicsError::CoincidentGeometry) => {
            return Ok(TxOutcome::Skipped("target coincides with receiver".into()))
        }
        Err(e) => return Err(e.into()),
    };
    let stx = slant_series(&tk, &tx_kin)?;

    let q = d.to_sez(&(tk.r - rx_kin.r));
    let qdot = d.to_sez(&(tk.rdot - rx_kin.rdot));
    let qddot = d.to_sez(&(tk.rddot - rx_kin.rddot));
    let angles = match azel_series(&q, &qdot, &qddot) {
        Ok(a) => a,
        Err(DynamicsError::ZenithSingular) => {
            return Ok(TxOutcome::Skipped("zenith-singular geometry".into()))
        }
        Err(e) => return Err(e.into()),
    };
    if angles.phi <= 0.0 {
        return Ok(TxOutcome::Skipped(format!(
            "below receiver horizon (elevation {:.2} deg)",
            angles.phi.to_degrees()
        )));
    }

    let lambda = SPEED_OF_LIGHT / tx.carrier_hz;
    let baseline = (rx_kin.r - tx_kin.r).norm();
    let dc = doppler_coeffs(&stx, &srx, baseline, lambda);
    let ks = wavevector_series(&q, &qdot, &qddot)?;
    let sc = spatial_coeffs(&ks, &scene.tiles, lambda);
    let phase = phase_matrix(&dc, &sc, cube.n_pulses(), cube.tau_s())?;

    // Per-pulse bistatic delay from the cubic series about the CPI center.
    let t_d0 = (srx.rho + stx.rho - baseline) / SPEED_OF_LIGHT;
    let d1 = (srx.rhodot + stx.rhodot) / SPEED_OF_LIGHT;
    let d2 = (srx.rhoddot + stx.rhoddot) / (2.0 * SPEED_OF_LIGHT);
    let d3 = (srx.rhodddot + stx.rhodddot) / (6.0 * SPEED_OF_LIGHT);
    let half = (cube.n_pulses() as i64 - 1) / 2;
    let delays: Vec<f64> = (0..cube.n_pulses())
        .map(|j| match params.range_sampling {
            RangeSampling::FixedBin => t_d0,
            RangeSampling::PerPulse => {
                let t = (j as i64 - half) as f64 * cube.tau_s();
                t_d0 + d1 * t + d2 * t * t + d3 * t * t * t
            }
        })
        .collect();

    let chi = match matched_range_series(cube, &phase, &delays) {
        Ok(c) => c,
        Err(RadarError::DelayOutOfSpan { pulses }) => {
            return Ok(TxOutcome::Skipped(format!(
                "bistatic delay outside cube window for {} of {} pulses",
                pulses.len(),
                cube.n_pulses()
            )))
        }
        Err(e) => return Err(e),
    };
    let window = params.doppler_window_bins.min(cube.n_pulses());
    let spectrum = doppler_spectrum(&chi, window, cube.tau_s())?;
    let detections = ca_cfar(
        &spectrum,
        params.guard_bins,
        params.train_bins,
        params.threshold_db,
    )?;
    let Some(best) = detections
        .iter()
        .max_by(|a, b| a.snr_db.partial_cmp(&b.snr_db).unwrap())
    else {
        return Ok(TxOutcome::NoDetection);
    };

    let f_d_hyp = -(srx.rhodot + stx.rhodot) / lambda;
    let doppler_offset_hz = best.bin_offset as f64 * spectrum.bin_spacing_hz;
    let cpi_s = cube.n_pulses() as f64 * cube.tau_s();
    let aperture = scene.tiles.aperture_m();
    let beamwidth = if aperture > lambda {
        lambda / aperture
    } else {
        std::f64::consts::FRAC_PI_2
    };
    let snr_linear = 10.0_f64.powf(best.snr_db / 10.0);
    let sigma = MeasurementSigma {
        t_d_s: 1.0 / (2.0 * cube.sample_rate_hz()),
        f_d_hz: 1.0 / (2.0 * cpi_s),
        azimuth_rad: beamwidth / (2.0 * snr_linear.sqrt()),
        elevation_rad: beamwidth / (2.0 * snr_linear.sqrt()),
    };
    let measurement = Measurement {
        time_s: t_c,
        tx_id: tx.id.clone(),
        t_d_s: t_d0,
        f_d_hz: f_d_hyp + doppler_offset_hz,
        azimuth_rad: angles.theta,
        elevation_rad: angles.phi,
        snr_db: Some(best.snr_db),
        sigma,
    };
    Ok(TxOutcome::Detected(Detection {
        tx_id: tx.id.clone(),
        hypothesis_id: hypothesis_id.to_string(),
        snr_db: best.snr_db,
        doppler_offset_hz,
        measurement,
    }))
}
