//! Ground-truth scene generation: band-limited reference waveforms,
//! per-tile target echo rendering with time-varying delay/Doppler/phase,
//! noise, and link-budget evaluation.

mod link;
mod render;
mod waveform;

pub use link::{
    echo_power, incident_power, incident_power_spherical, ElevationPattern, IncidentPower,
    TransmitterModel,
};
pub use render::{render_scene, simulate_scenario, RenderedScene, RenderedTransmitter, TruthLog, TruthRecord};
pub use waveform::synth_fm_reference;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frames::GeodeticSite;
use crate::phasing::{TileArray, TileLayoutEntry};
use crate::radar::{RadarError, SceneGeometry, TxGeometry};

#[derive(Debug, Error)]
pub enum SimError {
    #[error("config field {field:?}: {reason}")]
    Config { field: String, reason: String },
    #[error(transparent)]
    Radar(#[from] RadarError),
    #[error(transparent)]
    Dynamics(#[from] crate::dynamics::DynamicsError),
    #[error(transparent)]
    Phasing(#[from] crate::phasing::PhasingError),
}

fn config_err(field: &str, reason: impl Into<String>) -> SimError {
    SimError::Config {
        field: field.into(),
        reason: reason.into(),
    }
}

/// Geodetic site as written in scenario files (degrees).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SiteSpec {
    pub id: String,
    pub lat_deg: f64,
    pub lon_deg: f64,
    pub height_m: f64,
}

impl SiteSpec {
    fn to_site(&self, field: &str) -> Result<GeodeticSite, SimError> {
        GeodeticSite::from_degrees(&self.id, self.lat_deg, self.lon_deg, self.height_m)
            .map_err(|e| config_err(field, e.to_string()))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReceiverSpec {
    pub site: SiteSpec,
    pub tiles: Vec<TileLayoutEntry>,
    /// Effective collecting area of one tile, m²; used by the physical
    /// link-budget amplitude path.
    #[serde(default = "default_tile_area")]
    pub tile_effective_area_m2: f64,
}

fn default_tile_area() -> f64 {
    25.0
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TransmitterSpec {
    pub id: String,
    pub site: SiteSpec,
    pub eirp_w: f64,
    pub carrier_hz: f64,
    pub bandwidth_hz: f64,
    /// Piecewise-linear elevation gain table [(elevation_deg, gain_db)];
    /// omitted means the illustrative default broadcast pattern.
    #[serde(default)]
    pub pattern_deg_db: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetSpec {
    pub id: String,
    /// ECI position at the target epoch, m.
    pub r_m: [f64; 3],
    /// ECI velocity at the target epoch, m/s.
    pub v_mps: [f64; 3],
    #[serde(default)]
    pub epoch_s: f64,
    /// Bistatic radar cross section, m².
    pub rcs_m2: f64,
    /// When set, overrides the physical amplitude so that the single-tile
    /// per-pulse SNR after pulse compression equals this value.
    #[serde(default)]
    pub snr_per_pulse_db: Option<f64>,
}

impl TargetSpec {
    pub fn state(&self) -> crate::dynamics::StateVector {
        crate::dynamics::StateVector::new(
            crate::Vec3::new(self.r_m[0], self.r_m[1], self.r_m[2]),
            crate::Vec3::new(self.v_mps[0], self.v_mps[1], self.v_mps[2]),
            self.epoch_s,
        )
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub seed: u64,
    /// Per-sample complex noise power in the surveillance channels
    /// (linear; 1.0 means unit variance).
    #[serde(default = "default_noise_power")]
    pub power: f64,
    /// Reference-channel SNR in dB; omitted means a noise-free reference.
    #[serde(default)]
    pub reference_snr_db: Option<f64>,
}

fn default_noise_power() -> f64 {
    1.0
}

/// Full scenario description, stored as versioned JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub schema_version: u32,
    /// Earth-rotation alignment angle at the scenario epoch, rad.
    #[serde(default)]
    pub epoch_alignment_rad: f64,
    pub receiver: ReceiverSpec,
    pub transmitters: Vec<TransmitterSpec>,
    pub targets: Vec<TargetSpec>,
    /// Coherent processing interval, s; the pulse length is cpi_s / num_pulses.
    pub cpi_s: f64,
    /// Pulses per CPI (odd).
    pub num_pulses: usize,
    pub sample_rate_hz: f64,
    #[serde(default = "default_num_cpis")]
    pub num_cpis: usize,
    pub noise: NoiseSpec,
}

fn default_num_cpis() -> usize {
    1
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<Self, SimError> {
        let cfg: Self = serde_json::from_str(text)
            .map_err(|e| config_err("<document>", e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), SimError> {
        if self.schema_version != 1 {
            return Err(config_err(
                "schema_version",
                format!("unsupported version {}", self.schema_version),
            ));
        }
        if self.num_pulses.is_multiple_of(2) || self.num_pulses == 0 {
            return Err(config_err("num_pulses", "must be odd and positive"));
        }
        if self.cpi_s.is_nan() || self.cpi_s <= 0.0 {
            return Err(config_err("cpi_s", "must be positive"));
        }
        if self.sample_rate_hz.is_nan() || self.sample_rate_hz <= 0.0 {
            return Err(config_err("sample_rate_hz", "must be positive"));
        }
        if self.sample_rate_hz * self.cpi_s / (self.num_pulses as f64) < 1.0 {
            return Err(config_err(
                "num_pulses",
                "fewer than one sample per pulse at this cpi_s and sample_rate_hz",
            ));
        }
        if self.num_cpis == 0 {
            return Err(config_err("num_cpis", "must be at least 1"));
        }
        if self.noise.power.is_nan() || self.noise.power <= 0.0 {
            return Err(config_err("noise.power", "must be positive"));
        }
        self.receiver.site.to_site("receiver.site")?;
        if self.receiver.tiles.is_empty() {
            return Err(config_err("receiver.tiles", "at least one tile required"));
        }
        TileArray::from_layout(&self.receiver.tiles)
            .map_err(|e| config_err("receiver.tiles", e.to_string()))?;
        if self.transmitters.is_empty() {
            return Err(config_err("transmitters", "at least one transmitter required"));
        }
        for (i, tx) in self.transmitters.iter().enumerate() {
            let field = format!("transmitters[{i}]");
            tx.site.to_site(&format!("{field}.site"))?;
            if tx.eirp_w.is_nan() || tx.eirp_w <= 0.0 {
                return Err(config_err(&format!("{field}.eirp_w"), "must be positive"));
            }
            if tx.carrier_hz.is_nan() || tx.carrier_hz <= 0.0 {
                return Err(config_err(&format!("{field}.carrier_hz"), "must be positive"));
            }
            if tx.bandwidth_hz.is_nan() || tx.bandwidth_hz <= 0.0 || tx.bandwidth_hz > self.sample_rate_hz {
                return Err(config_err(
                    &format!("{field}.bandwidth_hz"),
                    "must be positive and no larger than sample_rate_hz",
                ));
            }
            if let Some(p) = &tx.pattern_deg_db {
                ElevationPattern::new(p.clone())
                    .map_err(|e| config_err(&format!("{field}.pattern_deg_db"), e))?;
            }
        }
        for (i, t) in self.targets.iter().enumerate() {
            let field = format!("targets[{i}]");
            let r = t.state().r.norm();
            if r <= crate::constants::REENTRY_RADIUS {
                return Err(config_err(
                    &format!("{field}.r_m"),
                    "target starts below the Earth's surface",
                ));
            }
            if t.rcs_m2 < 0.0 {
                return Err(config_err(&format!("{field}.rcs_m2"), "must be non-negative"));
            }
        }
        Ok(())
    }

    /// Pulse length, s.
    pub fn tau_s(&self) -> f64 {
        self.cpi_s / self.num_pulses as f64
    }

    /// Samples per CPI on the rounded pulse grid.
    pub fn samples_per_cpi(&self) -> usize {
        (self.num_pulses as f64 * self.sample_rate_hz * self.tau_s()).round() as usize
    }

    pub fn total_samples(&self) -> usize {
        self.samples_per_cpi() * self.num_cpis
    }

    pub fn duration_s(&self) -> f64 {
        self.total_samples() as f64 / self.sample_rate_hz
    }

    /// Geometry view used by the detection and OD stages.
    pub fn geometry(&self) -> Result<SceneGeometry, SimError> {
        Ok(SceneGeometry {
            rx_site: self.receiver.site.to_site("receiver.site")?,
            tiles: TileArray::from_layout(&self.receiver.tiles)
                .map_err(|e| config_err("receiver.tiles", e.to_string()))?,
            alignment_rad: self.epoch_alignment_rad,
            transmitters: self
                .transmitters
                .iter()
                .map(|tx| {
                    Ok(TxGeometry {
                        id: tx.id.clone(),
                        site: tx.site.to_site("transmitters.site")?,
                        carrier_hz: tx.carrier_hz,
                    })
                })
                .collect::<Result<Vec<_>, SimError>>()?,
        })
    }

    /// Physical transmitter models (site, EIRP, pattern).
    pub fn transmitter_models(&self) -> Result<Vec<TransmitterModel>, SimError> {
        self.transmitters
            .iter()
            .map(|tx| {
                Ok(TransmitterModel {
                    id: tx.id.clone(),
                    site: tx.site.to_site("transmitters.site")?,
                    eirp_w: tx.eirp_w,
                    pattern: match &tx.pattern_deg_db {
                        Some(p) => ElevationPattern::new(p.clone())
                            .map_err(|e| config_err("pattern_deg_db", e))?,
                        None => ElevationPattern::default_broadcast(),
                    },
                    carrier_hz: tx.carrier_hz,
                    bandwidth_hz: tx.bandwidth_hz,
                })
            })
            .collect()
    }
}
