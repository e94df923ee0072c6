//! Uncued-search seeding: circular-orbit hypotheses along a beam direction.
//!
//! Candidates are placed where the beam crosses each altitude shell, with
//! circular speed and a grid of horizontal headings. Objects are expected
//! to be found near their point of minimum bistatic range, so a narrow
//! parameter fence suffices per pass.

use crate::constants::{MU_EARTH, WGS84_A};
use crate::dynamics::{unit_from_angles, StateVector};
use crate::frames::{sez_matrix_aligned, site_kinematics_eci_aligned, GeodeticSite};
use crate::Vec3;

/// Builds circular-orbit candidates along the beam defined by
/// (azimuth, elevation) at the receiver.
///
/// For each altitude the candidate sits where the beam meets the shell of
/// geocentric radius `WGS84_A + altitude`; its velocity has circular-orbit
/// magnitude, lies perpendicular to the radius vector, and points along the
/// grid heading (measured from local north toward east).
pub fn iod_candidates(
    azimuth_rad: f64,
    elevation_rad: f64,
    rx_site: &GeodeticSite,
    alignment_rad: f64,
    time_s: f64,
    altitudes_m: &[f64],
    headings_rad: &[f64],
) -> Vec<StateVector> {
    let rx = site_kinematics_eci_aligned(rx_site, time_s, alignment_rad);
    let d = sez_matrix_aligned(rx_site, time_s, alignment_rad);
    let beam = d.to_eci(&unit_from_angles(azimuth_rad, elevation_rad));
    let r_dot_beam = rx.r.dot(&beam);

    let mut out = Vec::with_capacity(altitudes_m.len() * headings_rad.len());
    for &alt in altitudes_m {
        let shell = WGS84_A + alt;
        let disc = r_dot_beam * r_dot_beam + shell * shell - rx.r.norm_squared();
        if disc < 0.0 {
            continue; // beam never reaches this shell
        }
        let slant = -r_dot_beam + disc.sqrt();
        let pos = rx.r + slant * beam;
        let up = pos.normalize();
        // Local horizontal basis at the candidate position.
        let mut east = Vec3::new(0.0, 0.0, 1.0).cross(&up);
        if east.norm() < 1e-9 {
            east = Vec3::new(1.0, 0.0, 0.0);
        }
        let east = east.normalize();
        let north = up.cross(&east);
        let speed = (MU_EARTH / pos.norm()).sqrt();
        for &heading in headings_rad {
            let vdir = heading.cos() * north + heading.sin() * east;
            out.push(StateVector::new(pos, speed * vdir, time_s));
        }
    }
    out
}

/// Evenly spaced grid over a closed range, inclusive of both ends.
pub fn linspace(start: f64, stop: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (stop - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
