//! Physical and geodetic constants used throughout the crate.

/// Standard gravitational parameter of the Earth, m³/s².
pub const MU_EARTH: f64 = 3.986_004_418e14;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Earth rotation rate, rad/s.
pub const OMEGA_EARTH: f64 = 7.292_115_9e-5;

/// WGS84 semi-major axis, m.
pub const WGS84_A: f64 = 6_378_137.0;

/// WGS84 flattening.
pub const WGS84_F: f64 = 1.0 / 298.257_223_563;

/// WGS84 semi-minor axis, m.
pub const WGS84_B: f64 = WGS84_A * (1.0 - WGS84_F);

/// WGS84 first eccentricity squared.
pub const WGS84_E2: f64 = WGS84_F * (2.0 - WGS84_F);

/// Mean Earth radius used by the spherical-Earth link-budget geometry, m.
pub const EARTH_RADIUS_MEAN: f64 = 6_371_000.0;

/// Radius below which a propagated trajectory is flagged as re-entering, m.
pub const REENTRY_RADIUS: f64 = 6.378e6;
