//! Time and coordinate-frame machinery.
//!
//! Sites are geodetic (WGS84); the inertial frame is realized as a pure
//! z-axis rotation of the Earth-fixed frame at the constant rate
//! [`constants::OMEGA_EARTH`], with a configurable alignment angle at the
//! scenario epoch (default 0). Topocentric work happens in the
//! south-east-zenith (SEZ) frame of a site.

use nalgebra::Matrix3;
use thiserror::Error;

use crate::constants::{OMEGA_EARTH, WGS84_A, WGS84_E2};
use crate::Vec3;

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("latitude {0} rad outside [-pi/2, pi/2]")]
    LatitudeOutOfRange(f64),
    #[error("longitude {0} rad outside (-pi, pi]")]
    LongitudeOutOfRange(f64),
    #[error("non-finite site coordinate")]
    NonFinite,
}

/// A ground site on the WGS84 ellipsoid.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodeticSite {
    pub id: String,
    /// Geodetic latitude, rad, in [-pi/2, pi/2].
    pub latitude_rad: f64,
    /// Longitude, rad, in (-pi, pi].
    pub longitude_rad: f64,
    /// Height above the ellipsoid, m.
    pub height_m: f64,
}

impl GeodeticSite {
    pub fn new(
        id: impl Into<String>,
        latitude_rad: f64,
        longitude_rad: f64,
        height_m: f64,
    ) -> Result<Self, FrameError> {
        if !(latitude_rad.is_finite() && longitude_rad.is_finite() && height_m.is_finite()) {
            return Err(FrameError::NonFinite);
        }
        if latitude_rad.abs() > std::f64::consts::FRAC_PI_2 {
            return Err(FrameError::LatitudeOutOfRange(latitude_rad));
        }
        if longitude_rad <= -std::f64::consts::PI || longitude_rad > std::f64::consts::PI {
            return Err(FrameError::LongitudeOutOfRange(longitude_rad));
        }
        Ok(Self {
            id: id.into(),
            latitude_rad,
            longitude_rad,
            height_m,
        })
    }

    pub fn from_degrees(
        id: impl Into<String>,
        lat_deg: f64,
        lon_deg: f64,
        height_m: f64,
    ) -> Result<Self, FrameError> {
        Self::new(id, lat_deg.to_radians(), lon_deg.to_radians(), height_m)
    }
}

/// Position and its first three time derivatives of a ground site in the
/// inertial frame. Rates follow rigid Earth rotation: rdot = w x r,
/// rddot = w x rdot, rdddot = w x rddot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SiteKinematics {
    pub r: Vec3,
    pub rdot: Vec3,
    pub rddot: Vec3,
    pub rdddot: Vec3,
}

/// Rotation from the site's south-east-zenith axes to the inertial frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SezRotation {
    /// Orthonormal matrix whose columns are the S, E, Z unit vectors in ECI.
    pub matrix: Matrix3<f64>,
}

impl SezRotation {
    /// Applies the inverse rotation (ECI -> SEZ); for an orthonormal matrix
    /// the inverse is the transpose.
    pub fn to_sez(&self, v: &Vec3) -> Vec3 {
        self.matrix.transpose() * v
    }

    /// Applies the forward rotation (SEZ -> ECI).
    pub fn to_eci(&self, v: &Vec3) -> Vec3 {
        self.matrix * v
    }
}

/// Converts a geodetic site to Earth-fixed Cartesian coordinates.
pub fn geodetic_to_ecef(site: &GeodeticSite) -> Vec3 {
    let (slat, clat) = site.latitude_rad.sin_cos();
    let (slon, clon) = site.longitude_rad.sin_cos();
    let n = WGS84_A / (1.0 - WGS84_E2 * slat * slat).sqrt();
    Vec3::new(
        (n + site.height_m) * clat * clon,
        (n + site.height_m) * clat * slon,
        (n * (1.0 - WGS84_E2) + site.height_m) * slat,
    )
}

/// Inverse of [`geodetic_to_ecef`]: recovers (latitude, longitude, height)
/// by fixed-point iteration on the latitude.
pub fn ecef_to_geodetic(r: &Vec3) -> (f64, f64, f64) {
    let p = r.x.hypot(r.y);
    let mut lon = r.y.atan2(r.x);
    if lon <= -std::f64::consts::PI {
        lon = std::f64::consts::PI;
    }
    if p < 1e-9 {
        // On the polar axis the longitude is arbitrary.
        let b = WGS84_A * (1.0 - WGS84_E2).sqrt();
        let lat = if r.z >= 0.0 {
            std::f64::consts::FRAC_PI_2
        } else {
            -std::f64::consts::FRAC_PI_2
        };
        return (lat, lon, r.z.abs() - b);
    }
    let mut lat = r.z.atan2(p * (1.0 - WGS84_E2));
    let mut height = 0.0;
    for _ in 0..32 {
        let slat = lat.sin();
        let n = WGS84_A / (1.0 - WGS84_E2 * slat * slat).sqrt();
        height = p / lat.cos() - n;
        let next = r.z.atan2(p * (1.0 - WGS84_E2 * n / (n + height)));
        if (next - lat).abs() < 1e-15 {
            lat = next;
            break;
        }
        lat = next;
    }
    (lat, lon, height)
}

fn rotation_z(angle: f64) -> Matrix3<f64> {
    let (s, c) = angle.sin_cos();
    Matrix3::new(c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0)
}

/// Site position and rates in the inertial frame at `t` seconds past the
/// scenario epoch, with an explicit Earth-rotation alignment angle at epoch.
pub fn site_kinematics_eci_aligned(
    site: &GeodeticSite,
    t: f64,
    alignment_rad: f64,
) -> SiteKinematics {
    let r_ecef = geodetic_to_ecef(site);
    let r = rotation_z(alignment_rad + OMEGA_EARTH * t) * r_ecef;
    let omega = Vec3::new(0.0, 0.0, OMEGA_EARTH);
    let rdot = omega.cross(&r);
    let rddot = omega.cross(&rdot);
    let rdddot = omega.cross(&rddot);
    SiteKinematics {
        r,
        rdot,
        rddot,
        rdddot,
    }
}

/// [`site_kinematics_eci_aligned`] with the default epoch alignment of zero.
pub fn site_kinematics_eci(site: &GeodeticSite, t: f64) -> SiteKinematics {
    site_kinematics_eci_aligned(site, t, 0.0)
}

/// SEZ -> ECI rotation of a site at `t` seconds past epoch.
pub fn sez_matrix_aligned(site: &GeodeticSite, t: f64, alignment_rad: f64) -> SezRotation {
    let (slat, clat) = site.latitude_rad.sin_cos();
    let (slon, clon) = site.longitude_rad.sin_cos();
    // Columns: south, east, zenith (ellipsoid normal) in ECEF.
    let south = Vec3::new(slat * clon, slat * slon, -clat);
    let east = Vec3::new(-slon, clon, 0.0);
    let zenith = Vec3::new(clat * clon, clat * slon, slat);
    let rz = rotation_z(alignment_rad + OMEGA_EARTH * t);
    SezRotation {
        matrix: Matrix3::from_columns(&[rz * south, rz * east, rz * zenith]),
    }
}

/// [`sez_matrix_aligned`] with the default epoch alignment of zero.
pub fn sez_matrix(site: &GeodeticSite, t: f64) -> SezRotation {
    sez_matrix_aligned(site, t, 0.0)
}

/// Rotates a slant vector and its first two rates into the SEZ frame.
pub fn to_sez(d: &SezRotation, rho: &Vec3, rhodot: &Vec3, rhoddot: &Vec3) -> (Vec3, Vec3, Vec3) {
    (d.to_sez(rho), d.to_sez(rhodot), d.to_sez(rhoddot))
}
