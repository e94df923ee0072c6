//! Range-compressed pulse cube formation, orbit-matched coherent
//! combination, pruned Doppler spectra, and CA-CFAR detection.

mod cfar;
mod detect;
mod doppler;
mod pulse;

pub use cfar::{ca_cfar, cfar_design_pfa, CfarDetection};
pub use detect::{
    detect_orbit, Detection, DetectParams, RangeSampling, SceneGeometry, TransmitterCube,
    TxGeometry, TxOutcome,
};
pub use doppler::{doppler_spectrum, DopplerSpectrum};
pub use pulse::{
    matched_range_series, pulse_compress, pulse_compress_windowed, Channel, IQRecording,
    PulseCube,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RadarError {
    #[error("sample rates differ: surveillance {surveillance} Hz, reference {reference} Hz")]
    MismatchedSampleRate { surveillance: f64, reference: f64 },
    #[error("recordings are not start-aligned: offset {0} s")]
    MisalignedStart(f64),
    #[error("reference recording must have exactly one channel, found {0}")]
    ReferenceChannelCount(usize),
    #[error("insufficient samples: need at least {needed}, have {available}")]
    InsufficientSamples { needed: usize, available: usize },
    #[error("empty recording or zero-length channels")]
    EmptyRecording,
    #[error("channel lengths differ within a recording")]
    RaggedChannels,
    #[error("{0}")]
    InvalidParameter(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("per-pulse delay outside cube span for pulses {pulses:?}")]
    DelayOutOfSpan { pulses: Vec<usize> },
    #[error("degenerate CFAR window: {0}")]
    DegenerateWindow(String),
    #[error("no geometry for transmitter {0:?}")]
    UnknownTransmitter(String),
    #[error("propagation failed: {0}")]
    Propagation(#[from] crate::dynamics::DynamicsError),
    #[error("phasing failed: {0}")]
    Phasing(#[from] crate::phasing::PhasingError),
}
