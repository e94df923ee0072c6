//! File formats: IQ recordings (little-endian interleaved f32 I/Q pairs
//! with JSON sidecars), detection and truth CSV files, and the orbit
//! determination report.
//!
//! All writers go through a temp-file-plus-rename so partially written
//! outputs are never observed.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::od::{Measurement, MeasurementSigma, OrbitEstimate};
use crate::radar::{Channel, IQRecording};
use crate::sim::{RenderedScene, RenderedTransmitter, ScenarioConfig, TruthRecord};

#[derive(Debug, Error)]
pub enum IoError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("JSON error in {path}: {source}")]
    Json {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("CSV error in {path}: {message}")]
    Csv { path: PathBuf, message: String },
    #[error("missing sidecar {0}")]
    MissingSidecar(PathBuf),
    #[error("inconsistent recording set: {0}")]
    Inconsistent(String),
    #[error("truncated IQ file {0}: odd number of f32 values")]
    TruncatedIq(PathBuf),
    #[error(transparent)]
    Radar(#[from] crate::radar::RadarError),
}

/// JSON sidecar accompanying each IQ channel file.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Sidecar {
    pub sample_rate_hz: f64,
    pub start_time_s: f64,
    pub channel_id: String,
    pub center_freq_hz: f64,
}

/// Writes bytes through a temp file in the same directory, then renames.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> Result<(), IoError> {
    let dir = path.parent().unwrap_or(Path::new("."));
    fs::create_dir_all(dir)?;
    let tmp = dir.join(format!(
        ".{}.tmp",
        path.file_name().and_then(|n| n.to_str()).unwrap_or("out")
    ));
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)?;
    Ok(())
}

/// Writes one channel as `<stem>.iq` plus `<stem>.json`.
pub fn write_iq_channel(
    dir: &Path,
    stem: &str,
    samples: &[Complex64],
    sidecar: &Sidecar,
) -> Result<(), IoError> {
    let mut bytes = Vec::with_capacity(samples.len() * 8);
    for s in samples {
        bytes.extend_from_slice(&(s.re as f32).to_le_bytes());
        bytes.extend_from_slice(&(s.im as f32).to_le_bytes());
    }
    atomic_write(&dir.join(format!("{stem}.iq")), &bytes)?;
    let json = serde_json::to_vec_pretty(sidecar).expect("sidecar serializes");
    atomic_write(&dir.join(format!("{stem}.json")), &json)?;
    Ok(())
}

/// Reads `<stem>.iq` plus its sidecar.
pub fn read_iq_channel(dir: &Path, stem: &str) -> Result<(Vec<Complex64>, Sidecar), IoError> {
    let iq_path = dir.join(format!("{stem}.iq"));
    let sidecar_path = dir.join(format!("{stem}.json"));
    if !sidecar_path.exists() {
        return Err(IoError::MissingSidecar(sidecar_path));
    }
    let sidecar: Sidecar = serde_json::from_slice(&fs::read(&sidecar_path)?).map_err(|e| {
        IoError::Json {
            path: sidecar_path,
            source: e,
        }
    })?;
    let bytes = fs::read(&iq_path)?;
    if bytes.len() % 8 != 0 {
        return Err(IoError::TruncatedIq(iq_path));
    }
    let samples = bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64;
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]) as f64;
            Complex64::new(re, im)
        })
        .collect();
    Ok((samples, sidecar))
}

fn sanitize(id: &str) -> String {
    id.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Writes every channel of a rendered scene under
/// `dir/recordings/<tx_id>/<channel_id>.iq`.
pub fn write_scene(dir: &Path, scene: &RenderedScene) -> Result<(), IoError> {
    for tx in &scene.transmitters {
        let tx_dir = dir.join("recordings").join(sanitize(&tx.tx_id));
        fs::create_dir_all(&tx_dir)?;
        let write_rec = |rec: &IQRecording| -> Result<(), IoError> {
            for ch in rec.channels() {
                let sidecar = Sidecar {
                    sample_rate_hz: rec.sample_rate_hz,
                    start_time_s: rec.start_time_s,
                    channel_id: ch.id.clone(),
                    center_freq_hz: rec.center_freq_hz,
                };
                write_iq_channel(&tx_dir, &sanitize(&ch.id), &ch.samples, &sidecar)?;
            }
            Ok(())
        };
        write_rec(&tx.reference)?;
        write_rec(&tx.surveillance)?;
    }
    Ok(())
}

/// Reads the channel set written by [`write_scene`], using the scenario
/// config for the expected transmitter and tile names.
pub fn read_scene(dir: &Path, cfg: &ScenarioConfig) -> Result<Vec<RenderedTransmitter>, IoError> {
    let mut out = Vec::with_capacity(cfg.transmitters.len());
    for tx in &cfg.transmitters {
        let tx_dir = dir.join("recordings").join(sanitize(&tx.id));
        let ref_stem = sanitize(&format!("{}-ref", tx.id));
        let (ref_samples, ref_sc) = read_iq_channel(&tx_dir, &ref_stem)?;
        let reference = IQRecording::new(
            ref_sc.sample_rate_hz,
            ref_sc.start_time_s,
            ref_sc.center_freq_hz,
            vec![Channel {
                id: ref_sc.channel_id.clone(),
                samples: ref_samples,
            }],
        )?;
        let mut tiles = Vec::with_capacity(cfg.receiver.tiles.len());
        let mut rate = None;
        let mut start = None;
        for tile in &cfg.receiver.tiles {
            let (samples, sc) = read_iq_channel(&tx_dir, &sanitize(&tile.id))?;
            if *rate.get_or_insert(sc.sample_rate_hz) != sc.sample_rate_hz
                || *start.get_or_insert(sc.start_time_s) != sc.start_time_s
            {
                return Err(IoError::Inconsistent(format!(
                    "channel {} disagrees on sample rate or start time",
                    tile.id
                )));
            }
            tiles.push(Channel {
                id: sc.channel_id,
                samples,
            });
        }
        let surveillance = IQRecording::new(
            rate.unwrap_or(ref_sc.sample_rate_hz),
            start.unwrap_or(ref_sc.start_time_s),
            ref_sc.center_freq_hz,
            tiles,
        )?;
        out.push(RenderedTransmitter {
            tx_id: tx.id.clone(),
            reference,
            surveillance,
        });
    }
    Ok(out)
}

/// One row of the detections CSV.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct DetectionRow {
    pub time_s: f64,
    pub tx_id: String,
    pub hypothesis_id: String,
    pub snr_db: f64,
    pub delay_s: f64,
    pub doppler_hz: f64,
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
}

impl DetectionRow {
    pub fn from_detection(d: &crate::radar::Detection) -> Self {
        Self {
            time_s: d.measurement.time_s,
            tx_id: d.tx_id.clone(),
            hypothesis_id: d.hypothesis_id.clone(),
            snr_db: d.snr_db,
            delay_s: d.measurement.t_d_s,
            doppler_hz: d.measurement.f_d_hz,
            azimuth_rad: d.measurement.azimuth_rad,
            elevation_rad: d.measurement.elevation_rad,
        }
    }

    /// Rebuilds a measurement, deriving sigmas from the given resolutions.
    pub fn to_measurement(&self, sigma: MeasurementSigma) -> Measurement {
        Measurement {
            time_s: self.time_s,
            tx_id: self.tx_id.clone(),
            t_d_s: self.delay_s,
            f_d_hz: self.doppler_hz,
            azimuth_rad: self.azimuth_rad,
            elevation_rad: self.elevation_rad,
            snr_db: Some(self.snr_db),
            sigma,
        }
    }
}

pub fn write_detections_csv(path: &Path, rows: &[DetectionRow]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(|e| IoError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    atomic_write(path, &bytes)
}

pub fn read_detections_csv(path: &Path) -> Result<Vec<DetectionRow>, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| IoError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    r.deserialize()
        .collect::<Result<Vec<DetectionRow>, _>>()
        .map_err(|e| IoError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}

/// One row of the truth CSV (per CPI, target, and transmitter).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TruthRow {
    pub time_s: f64,
    pub target_id: String,
    pub tx_id: String,
    pub t_d_s: f64,
    pub f_d_hz: f64,
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
    pub visible: bool,
}

impl From<&TruthRecord> for TruthRow {
    fn from(r: &TruthRecord) -> Self {
        Self {
            time_s: r.time_s,
            target_id: r.target_id.clone(),
            tx_id: r.tx_id.clone(),
            t_d_s: r.t_d_s,
            f_d_hz: r.f_d_hz,
            azimuth_rad: r.azimuth_rad,
            elevation_rad: r.elevation_rad,
            visible: r.visible,
        }
    }
}

pub fn write_truth_csv(path: &Path, records: &[TruthRecord]) -> Result<(), IoError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for rec in records {
        w.serialize(TruthRow::from(rec)).map_err(|e| IoError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
    }
    let bytes = w.into_inner().map_err(|e| IoError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    atomic_write(path, &bytes)
}

pub fn read_truth_csv(path: &Path) -> Result<Vec<TruthRow>, IoError> {
    let mut r = csv::Reader::from_path(path).map_err(|e| IoError::Csv {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    r.deserialize()
        .collect::<Result<Vec<TruthRow>, _>>()
        .map_err(|e| IoError::Csv {
            path: path.to_path_buf(),
            message: e.to_string(),
        })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportState {
    pub r: [f64; 3],
    pub v: [f64; 3],
    pub epoch: f64,
}

/// Orbit determination report, serialized as JSON.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OdReport {
    pub state: ReportState,
    pub covariance: Vec<Vec<f64>>,
    pub residual_rms: f64,
    pub iterations: usize,
    pub measurements_used: usize,
}

impl OdReport {
    pub fn from_estimate(est: &OrbitEstimate, measurements_used: usize) -> Self {
        Self {
            state: ReportState {
                r: [est.state.r.x, est.state.r.y, est.state.r.z],
                v: [est.state.v.x, est.state.v.y, est.state.v.z],
                epoch: est.state.epoch_s,
            },
            covariance: (0..6)
                .map(|i| (0..6).map(|j| est.covariance[(i, j)]).collect())
                .collect(),
            residual_rms: est.residual_rms,
            iterations: est.iterations,
            measurements_used,
        }
    }
}

pub fn write_od_report(path: &Path, report: &OdReport) -> Result<(), IoError> {
    let json = serde_json::to_vec_pretty(report).map_err(|e| IoError::Json {
        path: path.to_path_buf(),
        source: e,
    })?;
    atomic_write(path, &json)
}

pub fn read_od_report(path: &Path) -> Result<OdReport, IoError> {
    serde_json::from_slice(&fs::read(path)?).map_err(|e| IoError::Json {
        path: path.to_path_buf(),
        source: e,
    })
}
