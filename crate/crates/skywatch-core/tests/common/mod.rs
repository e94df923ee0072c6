//! Scenario builders shared by the integration and acceptance suites.
#![allow(dead_code)] // each test target uses a different subset

use skywatch_core::frames::{site_kinematics_eci, GeodeticSite};
use skywatch_core::phasing::TileLayoutEntry;
use skywatch_core::sim::{
    NoiseSpec, ReceiverSpec, ScenarioConfig, SiteSpec, TargetSpec, TransmitterSpec,
};
use skywatch_core::Vec3;

pub const RX_SITE: (&str, f64, f64, f64) = ("mwa-like", -26.7033, 116.6711, 377.0);
pub const TX_SOUTH: (&str, f64, f64, f64) = ("albany-like", -35.0266, 117.8837, 100.0);
pub const TX_WEST: (&str, f64, f64, f64) = ("perth-like", -31.9, 116.1, 300.0);
pub const TX_FAR: (&str, f64, f64, f64) = ("gambier-like", -37.8284, 140.3755, 63.0);

pub fn rx_geodetic() -> GeodeticSite {
    GeodeticSite::from_degrees(RX_SITE.0, RX_SITE.1, RX_SITE.2, RX_SITE.3).unwrap()
}

pub fn site_spec(s: (&str, f64, f64, f64)) -> SiteSpec {
    SiteSpec {
        id: s.0.into(),
        lat_deg: s.1,
        lon_deg: s.2,
        height_m: s.3,
    }
}

pub fn tx_spec(s: (&str, f64, f64, f64)) -> TransmitterSpec {
    TransmitterSpec {
        id: s.0.into(),
        site: site_spec(s),
        eirp_w: 1.0e5,
        carrier_hz: 100.0e6,
        bandwidth_hz: 5.0e4,
        pattern_deg_db: None,
    }
}

/// Square tile grid centered on the site, `side x side` tiles at `pitch_m`.
pub fn tile_grid(side: usize, pitch_m: f64) -> Vec<TileLayoutEntry> {
    let mut tiles = Vec::with_capacity(side * side);
    let half = (side as f64 - 1.0) / 2.0;
    for i in 0..side {
        for j in 0..side {
            tiles.push(TileLayoutEntry {
                id: format!("tile{:02}", i * side + j),
                east_m: (i as f64 - half) * pitch_m,
                north_m: (j as f64 - half) * pitch_m,
                up_m: 0.0,
            });
        }
    }
    tiles
}

/// A LEO target placed at (elevation, azimuth, range) from the receiver at
/// t = 0, on a circular-speed horizontal trajectory along `heading_deg`
/// (from north toward east).
pub fn pass_target_at(
    id: &str,
    el_deg: f64,
    az_deg: f64,
    range_m: f64,
    heading_deg: f64,
    snr_per_pulse_db: Option<f64>,
) -> TargetSpec {
    let rx = site_kinematics_eci(&rx_geodetic(), 0.0);
    let up = rx.r.normalize();
    let east = Vec3::new(0.0, 0.0, 1.0).cross(&up).normalize();
    let north = up.cross(&east);
    let el = el_deg.to_radians();
    let az = az_deg.to_radians();
    let dir = el.sin() * up + el.cos() * (az.cos() * north + az.sin() * east);
    let pos = rx.r + range_m * dir;
    let speed = (skywatch_core::constants::MU_EARTH / pos.norm()).sqrt();
    let up_t = pos.normalize();
    let east_t = Vec3::new(0.0, 0.0, 1.0).cross(&up_t).normalize();
    let north_t = up_t.cross(&east_t);
    let heading = heading_deg.to_radians();
    let vdir = (heading.cos() * north_t + heading.sin() * east_t).normalize();
    TargetSpec {
        id: id.into(),
        r_m: [pos.x, pos.y, pos.z],
        v_mps: [speed * vdir.x, speed * vdir.y, speed * vdir.z],
        epoch_s: 0.0,
        rcs_m2: 10.0,
        snr_per_pulse_db,
    }
}

/// A LEO target on a northbound pass over the receiver: starts south of the
/// site at moderate elevation and crosses near (but not through) zenith.
pub fn northbound_pass_target(id: &str, snr_per_pulse_db: Option<f64>) -> TargetSpec {
    pass_target_at(id, 42.0, 168.0, 9.5e5, 8.0, snr_per_pulse_db)
}

/// Desk-scale scenario: one transmitter, a tile grid, one pass target.
pub fn desk_scenario(
    tile_side: usize,
    num_pulses: usize,
    cpi_s: f64,
    sample_rate_hz: f64,
    num_cpis: usize,
    snr_per_pulse_db: f64,
    seed: u64,
) -> ScenarioConfig {
    ScenarioConfig {
        schema_version: 1,
        epoch_alignment_rad: 0.0,
        receiver: ReceiverSpec {
            site: site_spec(RX_SITE),
            tiles: tile_grid(tile_side, 25.0),
            tile_effective_area_m2: 25.0,
        },
        transmitters: vec![tx_spec(TX_SOUTH)],
        targets: vec![northbound_pass_target("sat", Some(snr_per_pulse_db))],
        cpi_s,
        num_pulses,
        sample_rate_hz,
        num_cpis,
        noise: NoiseSpec {
            seed,
            power: 1.0,
            reference_snr_db: None,
        },
    }
}

/// Expected post-integration SNR for a matched point target, dB.
pub fn coherent_gain_db(per_pulse_snr_db: f64, n_pulses: usize, n_tiles: usize) -> f64 {
    per_pulse_snr_db + 10.0 * ((n_pulses * n_tiles) as f64).log10()
}
