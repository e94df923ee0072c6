//! Orbit determination: measurement prediction, Jacobians, batch
//! least-squares fitting with covariance, multistatic fusion, the
//! Doppler-plane velocity solver, and a circular-orbit hypothesis grid.

mod batch;
mod iod;

pub use batch::{batch_least_squares, doppler_plane_velocity, DopplerObservation, FitOptions};
pub use iod::{iod_candidates, linspace};

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector, Matrix6};
use thiserror::Error;

use crate::constants::SPEED_OF_LIGHT;
use crate::dynamics::{azel_series, propagate, slant_series, DynamicsError, StateVector};
use crate::frames::{sez_matrix_aligned, site_kinematics_eci_aligned};
use crate::radar::SceneGeometry;

#[derive(Debug, Error)]
pub enum OdError {
    #[error("need at least {needed} measurement epochs, got {got}")]
    InsufficientMeasurements { needed: usize, got: usize },
    #[error("zenith-singular measurement geometry at t = {time_s} s")]
    SingularGeometry { time_s: f64 },
    #[error("normal equations are rank-deficient (null space dimension {null_space_dim})")]
    Underdetermined { null_space_dim: usize },
    #[error("fit diverged; last iterate attached")]
    NonConvergence { last: Box<OrbitEstimate> },
    #[error("track times must be strictly increasing")]
    NonMonotonicTrack,
    #[error("measurement sigmas must be positive")]
    NonPositiveSigma,
    #[error("no geometry for transmitter {0:?}")]
    UnknownTransmitter(String),
    #[error(transparent)]
    Dynamics(#[from] DynamicsError),
}

/// Per-component measurement noise standard deviations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementSigma {
    pub t_d_s: f64,
    pub f_d_hz: f64,
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
}

impl MeasurementSigma {
    pub fn is_valid(&self) -> bool {
        self.t_d_s > 0.0 && self.f_d_hz > 0.0 && self.azimuth_rad > 0.0 && self.elevation_rad > 0.0
    }

    /// Resolution-derived defaults: delay from the sample rate, Doppler from
    /// the CPI length, angles from beamwidth and detection SNR.
    pub fn from_resolutions(
        sample_rate_hz: f64,
        cpi_s: f64,
        beamwidth_rad: f64,
        snr_db: f64,
    ) -> Self {
        let angle = beamwidth_rad / (2.0 * 10.0_f64.powf(snr_db / 20.0));
        Self {
            t_d_s: 1.0 / (2.0 * sample_rate_hz),
            f_d_hz: 1.0 / (2.0 * cpi_s),
            azimuth_rad: angle,
            elevation_rad: angle,
        }
    }
}

/// One radar observation: bistatic delay, bistatic Doppler, azimuth and
/// elevation at a time, against a named transmitter.
#[derive(Debug, Clone, PartialEq)]
pub struct Measurement {
    pub time_s: f64,
    pub tx_id: String,
    pub t_d_s: f64,
    pub f_d_hz: f64,
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
    /// Detection SNR, if known; used for optional SNR weighting.
    pub snr_db: Option<f64>,
    pub sigma: MeasurementSigma,
}

/// A time-ordered sequence of measurements from one bistatic pair.
#[derive(Debug, Clone)]
pub struct Track {
    measurements: Vec<Measurement>,
}

impl Track {
    pub fn new(measurements: Vec<Measurement>) -> Result<Self, OdError> {
        for w in measurements.windows(2) {
            if w[1].time_s <= w[0].time_s {
                return Err(OdError::NonMonotonicTrack);
            }
        }
        if measurements.iter().any(|m| !m.sigma.is_valid()) {
            return Err(OdError::NonPositiveSigma);
        }
        Ok(Self { measurements })
    }

    pub fn measurements(&self) -> &[Measurement] {
        &self.measurements
    }

    pub fn len(&self) -> usize {
        self.measurements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measurements.is_empty()
    }
}

/// Fitted state with its linearized error covariance.
#[derive(Debug, Clone)]
pub struct OrbitEstimate {
    pub state: StateVector,
    /// 6x6 covariance in (m, m/s) units, position block first.
    pub covariance: Matrix6<f64>,
    /// Root-mean-square of the sigma-normalized residuals (unitless).
    pub residual_rms: f64,
    pub iterations: usize,
}

impl OrbitEstimate {
    /// Root-sum-square position sigma, m.
    pub fn position_sigma_m(&self) -> f64 {
        (self.covariance[(0, 0)] + self.covariance[(1, 1)] + self.covariance[(2, 2)]).sqrt()
    }

    /// Root-sum-square velocity sigma, m/s.
    pub fn velocity_sigma_mps(&self) -> f64 {
        (self.covariance[(3, 3)] + self.covariance[(4, 4)] + self.covariance[(5, 5)]).sqrt()
    }
}

/// A (time, transmitter) pair at which a measurement is predicted.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementEpoch {
    pub time_s: f64,
    pub tx_id: String,
}

/// Predicted values of the four measurement components.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictedMeasurement {
    pub time_s: f64,
    pub tx_id: String,
    pub t_d_s: f64,
    pub f_d_hz: f64,
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
}

/// Predicts the measurement vector f(x) for a state at the given epochs.
///
/// The state is propagated under two-body dynamics to each distinct time
/// once; measurement components follow the delay/Doppler and angle-series
/// definitions in [`crate::dynamics`].
pub fn predict_measurements(
    x: &StateVector,
    epochs: &[MeasurementEpoch],
    scene: &SceneGeometry,
) -> Result<Vec<PredictedMeasurement>, OdError> {
    // Propagate to each distinct time once, stepping between times.
    let mut times: Vec<f64> = epochs.iter().map(|e| e.time_s).collect();
    times.sort_by(|a, b| a.partial_cmp(b).unwrap());
    times.dedup();
    let mut states: BTreeMap<u64, StateVector> = BTreeMap::new();
    let mut current = *x;
    for &t in &times {
        let p = propagate(&current, t - current.epoch_s)?;
        current = p.state;
        states.insert(t.to_bits(), current);
    }

    let mut out = Vec::with_capacity(epochs.len());
    for e in epochs {
        let tx = scene
            .transmitter(&e.tx_id)
            .ok_or_else(|| OdError::UnknownTransmitter(e.tx_id.clone()))?;
        let state = states[&e.time_s.to_bits()];
        let rx_kin = site_kinematics_eci_aligned(&scene.rx_site, e.time_s, scene.alignment_rad);
        let tx_kin = site_kinematics_eci_aligned(&tx.site, e.time_s, scene.alignment_rad);
        let tk = state.kinematics()?;
        let srx = slant_series(&tk, &rx_kin)?;
        let stx = slant_series(&tk, &tx_kin)?;
        let baseline = (rx_kin.r - tx_kin.r).norm();
        let lambda = SPEED_OF_LIGHT / tx.carrier_hz;
        let d = sez_matrix_aligned(&scene.rx_site, e.time_s, scene.alignment_rad);
        let q = d.to_sez(&(tk.r - rx_kin.r));
        let qdot = d.to_sez(&(tk.rdot - rx_kin.rdot));
        let qddot = d.to_sez(&(tk.rddot - rx_kin.rddot));
        let angles = azel_series(&q, &qdot, &qddot).map_err(|err| match err {
            DynamicsError::ZenithSingular => OdError::SingularGeometry { time_s: e.time_s },
            other => OdError::Dynamics(other),
        })?;
        out.push(PredictedMeasurement {
            time_s: e.time_s,
            tx_id: e.tx_id.clone(),
            t_d_s: (srx.rho + stx.rho - baseline) / SPEED_OF_LIGHT,
            f_d_hz: -(srx.rhodot + stx.rhodot) / lambda,
            azimuth_rad: angles.theta,
            elevation_rad: angles.phi,
        });
    }
    Ok(out)
}

/// Wraps an angle difference to (-pi, pi].
pub(crate) fn wrap_angle(a: f64) -> f64 {
    let mut x = a.rem_euclid(std::f64::consts::TAU);
    if x > std::f64::consts::PI {
        x -= std::f64::consts::TAU;
    }
    x
}

/// Flattens predictions into the 4k measurement vector
/// [t_D, f_D, theta, phi] per epoch.
pub(crate) fn prediction_vector(preds: &[PredictedMeasurement]) -> DVector<f64> {
    let mut v = DVector::zeros(4 * preds.len());
    for (i, p) in preds.iter().enumerate() {
        v[4 * i] = p.t_d_s;
        v[4 * i + 1] = p.f_d_hz;
        v[4 * i + 2] = p.azimuth_rad;
        v[4 * i + 3] = p.elevation_rad;
    }
    v
}

/// Finite-difference Jacobian of the measurement vector with respect to the
/// state, with explicit position/velocity step sizes.
pub fn jacobian_with_steps(
    x0: &StateVector,
    epochs: &[MeasurementEpoch],
    scene: &SceneGeometry,
    step_pos_m: f64,
    step_vel_mps: f64,
) -> Result<DMatrix<f64>, OdError> {
    let rows = 4 * epochs.len();
    let mut jac = DMatrix::zeros(rows, 6);
    for col in 0..6 {
        let step = if col < 3 { step_pos_m } else { step_vel_mps };
        let mut xp = *x0;
        let mut xm = *x0;
        match col {
            0..=2 => {
                xp.r[col] += step;
                xm.r[col] -= step;
            }
            _ => {
                xp.v[col - 3] += step;
                xm.v[col - 3] -= step;
            }
        }
        let fp = prediction_vector(&predict_measurements(&xp, epochs, scene)?);
        let fm = prediction_vector(&predict_measurements(&xm, epochs, scene)?);
        for row in 0..rows {
            let diff = if row % 4 == 2 {
                wrap_angle(fp[row] - fm[row])
            } else {
                fp[row] - fm[row]
            };
            jac[(row, col)] = diff / (2.0 * step);
        }
    }
    Ok(jac)
}

/// [`jacobian_with_steps`] at the default steps of 1 m and 1 mm/s.
pub fn jacobian(
    x0: &StateVector,
    epochs: &[MeasurementEpoch],
    scene: &SceneGeometry,
) -> Result<DMatrix<f64>, OdError> {
    jacobian_with_steps(x0, epochs, scene, 1.0, 1e-3)
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use crate::frames::GeodeticSite;
    use crate::phasing::{Tile, TileArray};
    use crate::radar::TxGeometry;
    use crate::Vec3;

    /// One-receiver scene with up to three spread transmitters.
    pub fn test_scene(n_tx: usize) -> SceneGeometry {
        let tx_sites = [
            ("alpha", -35.0266, 117.8837, 100.0),
            ("bravo", -31.9, 116.1, 300.0),
            ("charlie", -37.8284, 140.3755, 63.0),
        ];
        SceneGeometry {
            rx_site: GeodeticSite::from_degrees("rx", -26.7033, 116.6711, 377.0).unwrap(),
            tiles: TileArray::new(vec![Tile {
                id: "t0".into(),
                u: Vec3::zeros(),
            }])
            .unwrap(),
            alignment_rad: 0.0,
            transmitters: tx_sites[..n_tx]
                .iter()
                .map(|(id, lat, lon, h)| TxGeometry {
                    id: (*id).into(),
                    site: GeodeticSite::from_degrees(*id, *lat, *lon, *h).unwrap(),
                    carrier_hz: 100.0e6,
                })
                .collect(),
        }
    }

    /// A LEO state passing near the receiver zenith region heading north.
    pub fn overhead_state(scene: &SceneGeometry) -> StateVector {
        let rx = crate::frames::site_kinematics_eci(&scene.rx_site, 0.0);
        let up = rx.r.normalize();
        let east = Vec3::new(0.0, 0.0, 1.0).cross(&up).normalize();
        let north = up.cross(&east);
        let pos = rx.r + 650_000.0 * (0.97 * up + 0.18 * east + 0.1 * north).normalize();
        let radius = pos.norm();
        let speed = (crate::constants::MU_EARTH / radius).sqrt();
        let vdir = (north + 0.08 * east).normalize();
        // Remove the radial component to stay near-circular.
        let vdir = (vdir - vdir.dot(&pos.normalize()) * pos.normalize()).normalize();
        StateVector::new(pos, speed * vdir, 0.0)
    }
}
