//! Batch least-squares orbit fitting and the multistatic Doppler-plane
//! velocity solver.
//!
//! The fit iterates Gauss-Newton steps with Levenberg-Marquardt damping on
//! sigma-normalized residuals. The state is internally scaled (position by
//! 1e6 m, velocity by 1e3 m/s) to condition the normal equations; reported
//! covariance is unscaled.

use nalgebra::{DMatrix, DVector, Matrix6, Vector6};

use super::{
    jacobian_with_steps, predict_measurements, prediction_vector, wrap_angle, Measurement,
    MeasurementEpoch, OdError, OrbitEstimate, Track,
};
use crate::dynamics::StateVector;
use crate::frames::SiteKinematics;
use crate::radar::SceneGeometry;
use crate::Vec3;

/// Solver configuration; defaults follow the crate-wide conventions.
#[derive(Debug, Clone)]
pub struct FitOptions {
    pub max_iterations: usize,
    /// Per-component position convergence threshold, m.
    pub tol_pos_m: f64,
    /// Per-component velocity convergence threshold, m/s.
    pub tol_vel_mps: f64,
    /// Initial Levenberg-Marquardt damping.
    pub lm_lambda0: f64,
    /// Finite-difference steps for the Jacobian.
    pub fd_step_pos_m: f64,
    pub fd_step_vel_mps: f64,
    /// Scale sigmas by detection SNR so stronger detections weigh more.
    pub snr_weighting: bool,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            max_iterations: 25,
            tol_pos_m: 1e-2,
            tol_vel_mps: 1e-5,
            lm_lambda0: 1e-3,
            fd_step_pos_m: 1.0,
            fd_step_vel_mps: 1e-3,
            snr_weighting: false,
        }
    }
}

const STATE_SCALE: [f64; 6] = [1e6, 1e6, 1e6, 1e3, 1e3, 1e3];

fn flatten(tracks: &[Track]) -> Vec<&Measurement> {
    tracks.iter().flat_map(|t| t.measurements()).collect()
}

fn epoch_list(measurements: &[&Measurement]) -> Vec<MeasurementEpoch> {
    measurements
        .iter()
        .map(|m| MeasurementEpoch {
            time_s: m.time_s,
            tx_id: m.tx_id.clone(),
        })
        .collect()
}

/// Per-row inverse sigmas, optionally SNR-weighted around the mean SNR.
fn row_weights(measurements: &[&Measurement], snr_weighting: bool) -> DVector<f64> {
    let mean_snr = if snr_weighting {
        let snrs: Vec<f64> = measurements.iter().filter_map(|m| m.snr_db).collect();
        if snrs.is_empty() {
            None
        } else {
            Some(snrs.iter().sum::<f64>() / snrs.len() as f64)
        }
    } else {
        None
    };
    let mut w = DVector::zeros(4 * measurements.len());
    for (i, m) in measurements.iter().enumerate() {
        // Amplitude SNR ratio: sigma shrinks as sqrt of the power ratio.
        let scale = match (mean_snr, m.snr_db) {
            (Some(mean), Some(snr)) => 10.0_f64.powf(-(snr - mean) / 20.0),
            _ => 1.0,
        };
        w[4 * i] = 1.0 / (m.sigma.t_d_s * scale);
        w[4 * i + 1] = 1.0 / (m.sigma.f_d_hz * scale);
        w[4 * i + 2] = 1.0 / (m.sigma.azimuth_rad * scale);
        w[4 * i + 3] = 1.0 / (m.sigma.elevation_rad * scale);
    }
    w
}

fn measurement_vector(measurements: &[&Measurement]) -> DVector<f64> {
    let mut z = DVector::zeros(4 * measurements.len());
    for (i, m) in measurements.iter().enumerate() {
        z[4 * i] = m.t_d_s;
        z[4 * i + 1] = m.f_d_hz;
        z[4 * i + 2] = m.azimuth_rad;
        z[4 * i + 3] = m.elevation_rad;
    }
    z
}

/// Sigma-normalized residual vector with azimuth wrapping.
fn normalized_residuals(
    z: &DVector<f64>,
    f: &DVector<f64>,
    w: &DVector<f64>,
) -> DVector<f64> {
    let mut r = DVector::zeros(z.len());
    for i in 0..z.len() {
        let diff = if i % 4 == 2 {
            wrap_angle(z[i] - f[i])
        } else {
            z[i] - f[i]
        };
        r[i] = diff * w[i];
    }
    r
}

fn apply_step(x: &StateVector, step: &Vector6<f64>) -> StateVector {
    StateVector::new(
        x.r + Vec3::new(step[0], step[1], step[2]),
        x.v + Vec3::new(step[3], step[4], step[5]),
        x.epoch_s,
    )
}

/// Covariance of the fit, (F' Sigma^2 F)^-1 expressed in unscaled units,
/// where the normalized Jacobian is evaluated at `x`.
fn covariance_at(
    x: &StateVector,
    epochs: &[MeasurementEpoch],
    scene: &SceneGeometry,
    w: &DVector<f64>,
    opts: &FitOptions,
) -> Result<Matrix6<f64>, OdError> {
    let jac = jacobian_with_steps(x, epochs, scene, opts.fd_step_pos_m, opts.fd_step_vel_mps)?;
    let js = scaled_normalized_jacobian(&jac, w);
    let jtj = js.transpose() * &js;
    check_rank(&jtj)?;
    let inv = jtj
        .try_inverse()
        .ok_or(OdError::Underdetermined { null_space_dim: 1 })?;
    let mut cov = Matrix6::zeros();
    for r in 0..6 {
        for c in 0..6 {
            cov[(r, c)] = inv[(r, c)] * STATE_SCALE[r] * STATE_SCALE[c];
        }
    }
    Ok(cov)
}

fn scaled_normalized_jacobian(jac: &DMatrix<f64>, w: &DVector<f64>) -> DMatrix<f64> {
    let mut js = jac.clone();
    for r in 0..js.nrows() {
        for c in 0..6 {
            js[(r, c)] *= w[r] * STATE_SCALE[c];
        }
    }
    js
}

fn check_rank(jtj: &DMatrix<f64>) -> Result<(), OdError> {
    let svd = jtj.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-12 * smax)
        .count();
    if rank < 6 {
        return Err(OdError::Underdetermined {
            null_space_dim: 6 - rank,
        });
    }
    Ok(())
}

/// Fits a state vector to one or more tracks of measurements by iterated
/// linearization about `x0`.
///
/// Returns the estimate at the epoch of `x0` together with the linearized
/// covariance; divergence yields [`OdError::NonConvergence`] carrying the
/// last iterate.
pub fn batch_least_squares(
    tracks: &[Track],
    x0: &StateVector,
    scene: &SceneGeometry,
    opts: &FitOptions,
) -> Result<OrbitEstimate, OdError> {
    let measurements = flatten(tracks);
    let mut distinct: Vec<f64> = measurements.iter().map(|m| m.time_s).collect();
    distinct.sort_by(|a, b| a.partial_cmp(b).unwrap());
    distinct.dedup();
    if distinct.len() < 2 || 4 * measurements.len() < 6 {
        return Err(OdError::InsufficientMeasurements {
            needed: 2,
            got: distinct.len(),
        });
    }
    let epochs = epoch_list(&measurements);
    let z = measurement_vector(&measurements);
    let w = row_weights(&measurements, opts.snr_weighting);

    let mut x = *x0;
    let mut lambda = opts.lm_lambda0;
    let mut cost = {
        let f = prediction_vector(&predict_measurements(&x, &epochs, scene)?);
        normalized_residuals(&z, &f, &w).norm_squared()
    };
    let mut iterations = 0;

    for _ in 0..opts.max_iterations {
        iterations += 1;
        let jac = jacobian_with_steps(&x, &epochs, scene, opts.fd_step_pos_m, opts.fd_step_vel_mps)?;
        let js = scaled_normalized_jacobian(&jac, &w);
        let f = prediction_vector(&predict_measurements(&x, &epochs, scene)?);
        let rn = normalized_residuals(&z, &f, &w);
        let jtj = js.transpose() * &js;
        check_rank(&jtj)?;
        let jtr = js.transpose() * &rn;

        // Levenberg-Marquardt damping on the scaled normal matrix; back off
        // until the step reduces the cost or damping saturates.
        let mut accepted = false;
        while lambda < 1e10 {
            let mut a = jtj.clone();
            for i in 0..6 {
                a[(i, i)] += lambda * jtj[(i, i)].max(1e-30);
            }
            let Some(chol) = nalgebra::Cholesky::new(
                nalgebra::Matrix6::from_iterator(a.iter().copied()),
            ) else {
                lambda *= 10.0;
                continue;
            };
            let rhs = Vector6::from_iterator(jtr.iter().copied());
            let step_scaled = chol.solve(&rhs);
            let mut step = Vector6::zeros();
            for i in 0..6 {
                step[i] = step_scaled[i] * STATE_SCALE[i];
            }
            let candidate = apply_step(&x, &step);
            let f_new = prediction_vector(&predict_measurements(&candidate, &epochs, scene)?);
            let cost_new = normalized_residuals(&z, &f_new, &w).norm_squared();
            if cost_new <= cost {
                let converged = step
                    .iter()
                    .enumerate()
                    .all(|(i, s)| s.abs() < if i < 3 { opts.tol_pos_m } else { opts.tol_vel_mps });
                x = candidate;
                cost = cost_new;
                lambda = (lambda / 10.0).max(1e-15);
                accepted = true;
                if converged {
                    let covariance = covariance_at(&x, &epochs, scene, &w, opts)?;
                    return Ok(OrbitEstimate {
                        state: x,
                        covariance,
                        residual_rms: (cost / z.len() as f64).sqrt(),
                        iterations,
                    });
                }
                break;
            }
            lambda *= 10.0;
        }
        if !accepted {
            let covariance = covariance_at(&x, &epochs, scene, &w, opts)
                .unwrap_or_else(|_| Matrix6::identity());
            return Err(OdError::NonConvergence {
                last: Box::new(OrbitEstimate {
                    state: x,
                    covariance,
                    residual_rms: (cost / z.len() as f64).sqrt(),
                    iterations,
                }),
            });
        }
    }

    let covariance = covariance_at(&x, &epochs, scene, &w, opts)?;
    Ok(OrbitEstimate {
        state: x,
        covariance,
        residual_rms: (cost / z.len() as f64).sqrt(),
        iterations,
    })
}

/// One bistatic Doppler observation with the site kinematics at its time.
#[derive(Debug, Clone)]
pub struct DopplerObservation {
    pub f_d_hz: f64,
    pub lambda_m: f64,
    pub tx: SiteKinematics,
    pub rx: SiteKinematics,
}

/// Solves for the velocity consistent with a set of Doppler planes at a
/// known position: each observation constrains the velocity component along
/// the bistatic bisector.
pub fn doppler_plane_velocity(
    position: &Vec3,
    observations: &[DopplerObservation],
) -> Result<Vec3, OdError> {
    let n = observations.len();
    let mut g = DMatrix::zeros(n, 3);
    let mut h = DVector::zeros(n);
    for (i, o) in observations.iter().enumerate() {
        let rho_rx = position - o.rx.r;
        let rho_tx = position - o.tx.r;
        let bisector = rho_rx.normalize() + rho_tx.normalize();
        g[(i, 0)] = bisector.x;
        g[(i, 1)] = bisector.y;
        g[(i, 2)] = bisector.z;
        h[i] = -o.lambda_m * o.f_d_hz
            + rho_rx.dot(&o.rx.rdot) / rho_rx.norm()
            + rho_tx.dot(&o.tx.rdot) / rho_tx.norm();
    }
    let svd = g.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let rank = svd
        .singular_values
        .iter()
        .filter(|&&s| s > 1e-10 * smax.max(1e-300))
        .count();
    if rank < 3 {
        return Err(OdError::Underdetermined {
            null_space_dim: 3 - rank,
        });
    }
    let sol = svd
        .solve(&h, 1e-10 * smax)
        .map_err(|_| OdError::Underdetermined { null_space_dim: 1 })?;
    Ok(Vec3::new(sol[0], sol[1], sol[2]))
}
