//! Passive bistatic radar toolkit for space surveillance.
//!
//! The crate covers the full desk-scale processing chain for detecting and
//! tracking objects in low Earth orbit with broadcast-band illuminators and a
//! distributed receiving array:
//!
//! * [`frames`] — geodetic sites, Earth-rotation kinematics, and the
//!   south-east-zenith topocentric rotation.
//! * [`dynamics`] — two-body orbital motion, slant-range derivative series,
//!   bistatic delay/Doppler, and azimuth/elevation series.
//! * [`phasing`] — orbit hypotheses turned into per-tile, per-pulse
//!   polynomial phase corrections.
//! * [`radar`] — pulse compression, orbit-matched coherent combination,
//!   pruned Doppler spectra, and CA-CFAR detection.
//! * [`od`] — measurement prediction, batch least-squares orbit fitting with
//!   covariance, Doppler-plane velocity solving, and a circular-orbit
//!   hypothesis grid.
//! * [`sim`] — synthetic scene generation: band-limited reference waveforms,
//!   per-tile echo rendering, and link-budget evaluation.
//! * [`io`] — IQ recordings with JSON sidecars, detection/truth CSV files,
//!   and orbit-determination reports.
//!
//! With the default `parallel` feature the hot loops (pulse compression,
//! hypothesis evaluation, scene rendering) run on a rayon pool; disabling it
//! yields a dependency-free sequential build with identical results.

pub mod constants;
pub mod dynamics;
pub mod exec;
pub mod frames;
pub mod io;
pub mod od;
pub mod phasing;
pub mod radar;
pub mod sim;

/// Cartesian 3-vector in meters (or m/s, m/s², m/s³ depending on context).
pub type Vec3 = nalgebra::Vector3<f64>;

pub use dynamics::StateVector;
pub use frames::{GeodeticSite, SiteKinematics};
pub use od::{Measurement, OrbitEstimate, Track};
pub use phasing::{PhaseMatrix, TileArray};
pub use radar::{Detection, IQRecording, PulseCube};
pub use sim::{ScenarioConfig, TransmitterModel};
