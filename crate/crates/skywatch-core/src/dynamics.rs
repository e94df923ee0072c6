//! Two-body orbital motion and the derivative chains that drive both echo
//! simulation and orbit-matched processing: slant range and its first three
//! rates, bistatic delay/Doppler, and topocentric angle series.

use thiserror::Error;

use crate::constants::{MU_EARTH, REENTRY_RADIUS, SPEED_OF_LIGHT};
use crate::frames::SiteKinematics;
use crate::Vec3;

#[derive(Debug, Error)]
pub enum DynamicsError {
    #[error("position vector has zero magnitude")]
    ZeroRadius,
    #[error("target coincides with site")]
    CoincidentGeometry,
    #[error("zenith-singular geometry: azimuth undefined")]
    ZenithSingular,
    #[error("integrator step size underflow at t={0} s")]
    StepUnderflow(f64),
    #[error("non-finite state encountered during propagation")]
    NonFiniteState,
}

/// Inertial position and velocity of an orbiting object at an epoch.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateVector {
    pub r: Vec3,
    pub v: Vec3,
    /// Seconds past the scenario epoch.
    pub epoch_s: f64,
}

impl StateVector {
    pub fn new(r: Vec3, v: Vec3, epoch_s: f64) -> Self {
        Self { r, v, epoch_s }
    }

    /// Specific orbital energy, m²/s².
    pub fn specific_energy(&self) -> f64 {
        0.5 * self.v.norm_squared() - MU_EARTH / self.r.norm()
    }

    /// Magnitude of the specific angular momentum, m²/s.
    pub fn angular_momentum(&self) -> f64 {
        self.r.cross(&self.v).norm()
    }

    /// Position and first three derivatives under two-body gravity.
    pub fn kinematics(&self) -> Result<TargetKinematics, DynamicsError> {
        Ok(TargetKinematics {
            r: self.r,
            rdot: self.v,
            rddot: gravity_accel(&self.r)?,
            rdddot: gravity_jerk(&self.r, &self.v)?,
        })
    }
}

/// Position and first three time derivatives of an orbiting body.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetKinematics {
    pub r: Vec3,
    pub rdot: Vec3,
    pub rddot: Vec3,
    pub rdddot: Vec3,
}

/// Slant range and its first three time derivatives, m and m/s^k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlantSeries {
    pub rho: f64,
    pub rhodot: f64,
    pub rhoddot: f64,
    pub rhodddot: f64,
}

/// Azimuth/elevation and their first two rates in the SEZ frame.
///
/// Azimuth is measured from north toward east and wrapped to [0, 2pi);
/// elevation is positive above the horizon.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AngleSeries {
    pub theta: f64,
    pub thetadot: f64,
    pub thetaddot: f64,
    pub phi: f64,
    pub phidot: f64,
    pub phiddot: f64,
}

/// Result of two-body propagation; `reentered` is set when the trajectory
/// dipped below the Earth's surface at any accepted step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Propagated {
    pub state: StateVector,
    pub reentered: bool,
}

/// Inverse-square gravitational acceleration.
pub fn gravity_accel(r: &Vec3) -> Result<Vec3, DynamicsError> {
    let rn = r.norm();
    if rn == 0.0 {
        return Err(DynamicsError::ZeroRadius);
    }
    Ok(-(MU_EARTH / (rn * rn * rn)) * r)
}

/// Time derivative of [`gravity_accel`] along a trajectory.
pub fn gravity_jerk(r: &Vec3, v: &Vec3) -> Result<Vec3, DynamicsError> {
    let rn = r.norm();
    if rn == 0.0 {
        return Err(DynamicsError::ZeroRadius);
    }
    let r3 = rn * rn * rn;
    let r5 = r3 * rn * rn;
    Ok((3.0 * MU_EARTH * r.dot(v) / r5) * r - (MU_EARTH / r3) * v)
}

// Dormand-Prince 5(4) tableau.
const DP_C: [f64; 6] = [1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const DP_A: [[f64; 6]; 6] = [
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
// 4th-order embedded weights (the 5th-order weights are the last A row).
const DP_B4: [f64; 7] = [
    5179.0 / 57600.0,
    0.0,
    7571.0 / 16695.0,
    393.0 / 640.0,
    -92097.0 / 339200.0,
    187.0 / 2100.0,
    1.0 / 40.0,
];

const RTOL: f64 = 1e-12;
const ATOL_POS: f64 = 1e-6;
const ATOL_VEL: f64 = 1e-9;

type State6 = [f64; 6];

fn rhs(y: &State6) -> State6 {
    let rn = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt();
    let k = -MU_EARTH / (rn * rn * rn);
    [y[3], y[4], y[5], k * y[0], k * y[1], k * y[2]]
}

fn error_norm(y: &State6, y_new: &State6, err: &State6) -> f64 {
    let mut acc = 0.0;
    for i in 0..6 {
        let atol = if i < 3 { ATOL_POS } else { ATOL_VEL };
        let scale = atol + RTOL * y[i].abs().max(y_new[i].abs());
        let e = err[i] / scale;
        acc += e * e;
    }
    (acc / 6.0).sqrt()
}

/// Two-body propagation by `dt` seconds (negative values propagate
/// backward) with an adaptive embedded Runge-Kutta 5(4) scheme.
pub fn propagate(x: &StateVector, dt: f64) -> Result<Propagated, DynamicsError> {
    if x.r.norm() == 0.0 {
        return Err(DynamicsError::ZeroRadius);
    }
    if dt == 0.0 {
        return Ok(Propagated {
            state: *x,
            reentered: x.r.norm() < REENTRY_RADIUS,
        });
    }
    let mut y: State6 = [x.r.x, x.r.y, x.r.z, x.v.x, x.v.y, x.v.z];
    let mut t = 0.0_f64;
    let sign = dt.signum();
    let mut h = sign * dt.abs().min(10.0);
    let mut k1 = rhs(&y);
    let mut reentered = (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt() < REENTRY_RADIUS;

    loop {
        let remaining = dt - t;
        if remaining.abs() <= 1e-12 {
            break;
        }
        if h.abs() > remaining.abs() {
            h = remaining;
        }

        let mut k = [[0.0_f64; 6]; 7];
        k[0] = k1;
        for stage in 0..6 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(stage + 1) {
                let a = DP_A[stage][j];
                if a != 0.0 {
                    for (ysi, kji) in ys.iter_mut().zip(kj.iter()) {
                        *ysi += h * a * kji;
                    }
                }
            }
            let _ = DP_C[stage]; // autonomous system: stage time unused
            k[stage + 1] = rhs(&ys);
        }

        // 5th-order solution (FSAL: weights are the last A row).
        let mut y5 = y;
        for (j, w) in DP_A[5].iter().enumerate() {
            if *w != 0.0 {
                for i in 0..6 {
                    y5[i] += h * w * k[j][i];
                }
            }
        }
        // Embedded 4th-order solution for the error estimate.
        let mut err = [0.0_f64; 6];
        for i in 0..6 {
            let mut y4 = y[i];
            for (j, w) in DP_B4.iter().enumerate() {
                if *w != 0.0 {
                    y4 += h * w * k[j][i];
                }
            }
            err[i] = y5[i] - y4;
        }
        if !y5.iter().all(|v| v.is_finite()) {
            return Err(DynamicsError::NonFiniteState);
        }

        let en = error_norm(&y, &y5, &err);
        if en <= 1.0 {
            t += h;
            y = y5;
            k1 = k[6];
            if (y[0] * y[0] + y[1] * y[1] + y[2] * y[2]).sqrt() < REENTRY_RADIUS {
                reentered = true;
            }
        }
        let factor = if en > 0.0 {
            (0.9 * en.powf(-0.2)).clamp(0.2, 5.0)
        } else {
            5.0
        };
        h *= factor;
        if h.abs() < 1e-12 * dt.abs().max(1.0) {
            return Err(DynamicsError::StepUnderflow(t));
        }
    }

    Ok(Propagated {
        state: StateVector {
            r: Vec3::new(y[0], y[1], y[2]),
            v: Vec3::new(y[3], y[4], y[5]),
            epoch_s: x.epoch_s + dt,
        },
        reentered,
    })
}

/// Slant range and its first three derivatives between a target and a site.
pub fn slant_series(
    target: &TargetKinematics,
    site: &SiteKinematics,
) -> Result<SlantSeries, DynamicsError> {
    let p = target.r - site.r;
    let pd = target.rdot - site.rdot;
    let pdd = target.rddot - site.rddot;
    let pddd = target.rdddot - site.rdddot;

    let rho = p.norm();
    if rho == 0.0 {
        return Err(DynamicsError::CoincidentGeometry);
    }
    let p_pd = p.dot(&pd);
    let rhodot = p_pd / rho;
    let s = pd.norm_squared() + p.dot(&pdd);
    let rhoddot = -(p_pd * p_pd) / (rho * rho * rho) + s / rho;
    let rhodddot = 3.0 * (p_pd * p_pd * p_pd) / rho.powi(5) - 3.0 * (p_pd * s) / (rho * rho * rho)
        + (3.0 * pd.dot(&pdd) + p.dot(&pddd)) / rho;
    Ok(SlantSeries {
        rho,
        rhodot,
        rhoddot,
        rhodddot,
    })
}

/// Instantaneous bistatic delay: excess path over the direct baseline,
/// expressed in seconds.
pub fn bistatic_delay(target: &Vec3, tx: &SiteKinematics, rx: &SiteKinematics) -> f64 {
    let rho_rx = (target - rx.r).norm();
    let rho_tx = (target - tx.r).norm();
    let baseline = (rx.r - tx.r).norm();
    (rho_rx + rho_tx - baseline) / SPEED_OF_LIGHT
}

/// Instantaneous bistatic Doppler shift in Hz at wavelength `lambda_m`.
pub fn bistatic_doppler(
    target: &TargetKinematics,
    tx: &SiteKinematics,
    rx: &SiteKinematics,
    lambda_m: f64,
) -> Result<f64, DynamicsError> {
    let srx = slant_series(target, rx)?;
    let stx = slant_series(target, tx)?;
    Ok(-(srx.rhodot + stx.rhodot) / lambda_m)
}

/// Azimuth/elevation series from a SEZ slant vector and its rates.
///
/// The scalar range rates entering the elevation chain are computed from
/// the same vector series, so the result is exactly the derivative of the
/// instantaneous angles for a frozen SEZ basis.
pub fn azel_series(q: &Vec3, qdot: &Vec3, qddot: &Vec3) -> Result<AngleSeries, DynamicsError> {
    let w2 = q.x * q.x + q.y * q.y;
    let qn2 = q.norm_squared();
    if qn2 == 0.0 || w2 <= 1e-24 * qn2 {
        return Err(DynamicsError::ZenithSingular);
    }
    let w = w2.sqrt();
    let qn = qn2.sqrt();

    // Scalar range rate and acceleration (rotation-invariant).
    let q_qd = q.dot(qdot);
    let qd_scalar = q_qd / qn;
    let qdd_scalar = -(q_qd * q_qd) / (qn * qn * qn) + (qdot.norm_squared() + q.dot(qddot)) / qn;

    // Azimuth from north toward east: two-argument arctangent, wrapped.
    let mut theta = q.y.atan2(-q.x);
    if theta < 0.0 {
        theta += std::f64::consts::TAU;
    }
    let num = qdot.x * q.y - qdot.y * q.x;
    let thetadot = num / w2;
    let thetaddot =
        ((qddot.x * q.y - qddot.y * q.x) * w2 - 2.0 * (qdot.x * q.x + qdot.y * q.y) * num)
            / (w2 * w2);

    let phi = q.z.atan2(w);
    let (sphi, cphi) = phi.sin_cos();
    let phidot = (qdot.z - qd_scalar * sphi) / w;
    let phiddot = ((qd_scalar * sphi - qdot.z) * (qdot.x * q.x + qdot.y * q.y) / w
        + (qddot.z - qdd_scalar * sphi - qd_scalar * phidot * cphi) * w)
        / w2;

    Ok(AngleSeries {
        theta,
        thetadot,
        thetaddot,
        phi,
        phidot,
        phiddot,
    })
}

/// Unit pointing vector in SEZ axes for given azimuth/elevation.
pub fn unit_from_angles(theta: f64, phi: f64) -> Vec3 {
    let (sphi, cphi) = phi.sin_cos();
    let (sth, cth) = theta.sin_cos();
    Vec3::new(-cphi * cth, cphi * sth, sphi)
}
