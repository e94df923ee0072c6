//! Transmitter model and link-budget evaluation.
//!
//! The elevation gain pattern is a piecewise-linear table relative to the
//! peak. Horizon masking uses a spherical-Earth visibility rule with a
//! configurable refraction allowance, reflecting that usable illumination
//! extends a couple of degrees below the geometric horizon.

use crate::constants::EARTH_RADIUS_MEAN;
use crate::frames::GeodeticSite;
use crate::Vec3;

/// Default below-horizon allowance, rad (about two degrees).
pub const DEFAULT_HORIZON_ALLOWANCE_RAD: f64 = 2.0 * std::f64::consts::PI / 180.0;

/// Piecewise-linear elevation gain, dB relative to peak (all entries <= 0).
#[derive(Debug, Clone, PartialEq)]
pub struct ElevationPattern {
    /// (elevation_deg, gain_db), sorted by elevation.
    points: Vec<(f64, f64)>,
}

impl ElevationPattern {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self, String> {
        if points.is_empty() {
            return Err("pattern table must not be empty".into());
        }
        points.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        if points.iter().any(|(e, g)| !e.is_finite() || !g.is_finite()) {
            return Err("pattern entries must be finite".into());
        }
        if points.iter().any(|(_, g)| *g > 0.0) {
            return Err("pattern gain must be at most 0 dB relative to peak".into());
        }
        Ok(Self { points })
    }

    /// Ideal isotropic radiator: 0 dB everywhere.
    pub fn isotropic() -> Self {
        Self {
            points: vec![(-90.0, 0.0), (90.0, 0.0)],
        }
    }

    /// Illustrative broadcast-band pattern: main lobe within a few degrees
    /// of the horizon, a sidelobe shelf near -15 dB at mid elevations,
    /// falling off toward zenith. Shipped as an example shape only.
    pub fn default_broadcast() -> Self {
        Self {
            points: vec![
                (-90.0, -40.0),
                (-5.0, -6.0),
                (-2.0, -2.0),
                (0.0, 0.0),
                (3.0, 0.0),
                (5.0, -3.0),
                (10.0, -15.0),
                (25.0, -15.0),
                (40.0, -20.0),
                (70.0, -28.0),
                (90.0, -32.0),
            ],
        }
    }

    /// Gain at an elevation, dB relative to peak, clamped at the table ends.
    pub fn gain_db(&self, elevation_rad: f64) -> f64 {
        let e = elevation_rad.to_degrees();
        let pts = &self.points;
        if e <= pts[0].0 {
            return pts[0].1;
        }
        if e >= pts[pts.len() - 1].0 {
            return pts[pts.len() - 1].1;
        }
        let i = pts.partition_point(|p| p.0 <= e).min(pts.len() - 1);
        let (e0, g0) = pts[i - 1];
        let (e1, g1) = pts[i];
        if e1 == e0 {
            return g0;
        }
        g0 + (g1 - g0) * (e - e0) / (e1 - e0)
    }

    pub fn gain_linear(&self, elevation_rad: f64) -> f64 {
        10.0_f64.powf(self.gain_db(elevation_rad) / 10.0)
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }
}

/// A broadcast transmitter used as an illuminator of opportunity.
#[derive(Debug, Clone)]
pub struct TransmitterModel {
    pub id: String,
    pub site: GeodeticSite,
    pub eirp_w: f64,
    pub pattern: ElevationPattern,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
}

/// Incident power density on a target, with visibility bookkeeping.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncidentPower {
    /// W/m²; zero when shadowed.
    pub power_w_m2: f64,
    /// Elevation of the target seen from the transmitter, rad.
    pub elevation_rad: f64,
    /// Slant range transmitter-to-target, m.
    pub slant_m: f64,
    /// True when the target is below the horizon beyond the allowance.
    pub shadowed: bool,
}

/// Incident power density at a target position given the transmitter's
/// inertial position. The elevation uses the radial up direction (a
/// spherical-Earth approximation adequate for a gain lookup).
pub fn incident_power(
    tx: &TransmitterModel,
    tx_pos_eci: &Vec3,
    target_eci: &Vec3,
    horizon_allowance_rad: f64,
) -> IncidentPower {
    let slant_vec = target_eci - tx_pos_eci;
    let slant = slant_vec.norm();
    let up = tx_pos_eci.normalize();
    let elevation = (slant_vec.dot(&up) / slant).asin();
    if elevation < -horizon_allowance_rad {
        return IncidentPower {
            power_w_m2: 0.0,
            elevation_rad: elevation,
            slant_m: slant,
            shadowed: true,
        };
    }
    let g = tx.pattern.gain_linear(elevation);
    IncidentPower {
        power_w_m2: tx.eirp_w * g / (4.0 * std::f64::consts::PI * slant * slant),
        elevation_rad: elevation,
        slant_m: slant,
        shadowed: false,
    }
}

/// Spherical-Earth link-budget sample: transmitter on the surface, target at
/// `altitude_m` directly above a point `ground_distance_m` along the surface.
pub fn incident_power_spherical(
    tx: &TransmitterModel,
    ground_distance_m: f64,
    altitude_m: f64,
    horizon_allowance_rad: f64,
) -> IncidentPower {
    let r = EARTH_RADIUS_MEAN;
    let gamma = ground_distance_m / r;
    let rt = r + altitude_m;
    let slant = (r * r + rt * rt - 2.0 * r * rt * gamma.cos()).sqrt();
    let elevation = ((rt * gamma.cos() - r) / slant).asin();
    if elevation < -horizon_allowance_rad {
        return IncidentPower {
            power_w_m2: 0.0,
            elevation_rad: elevation,
            slant_m: slant,
            shadowed: true,
        };
    }
    let g = tx.pattern.gain_linear(elevation);
    IncidentPower {
        power_w_m2: tx.eirp_w * g / (4.0 * std::f64::consts::PI * slant * slant),
        elevation_rad: elevation,
        slant_m: slant,
        shadowed: false,
    }
}

/// Received echo power at one receiving element via the bistatic radar
/// equation: incident density, target reradiation, spreading to the
/// receiver, and the element's effective area.
pub fn echo_power(
    incident: &IncidentPower,
    rcs_m2: f64,
    rx_pos_eci: &Vec3,
    target_eci: &Vec3,
    effective_area_m2: f64,
) -> f64 {
    if incident.shadowed || rcs_m2 <= 0.0 {
        return 0.0;
    }
    let rho_rx = (target_eci - rx_pos_eci).norm();
    incident.power_w_m2 * rcs_m2 / (4.0 * std::f64::consts::PI * rho_rx * rho_rx)
        * effective_area_m2
}
