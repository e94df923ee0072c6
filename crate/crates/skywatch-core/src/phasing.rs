//! Conversion of an orbit hypothesis into per-tile, per-pulse phase
//! corrections: Doppler coefficients from the bistatic slant series, spatial
//! coefficients from the wavevector series, and the assembled phase matrix.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::SlantSeries;
use crate::exec;
use crate::Vec3;

#[derive(Debug, Error)]
pub enum PhasingError {
    #[error("slant vector has zero magnitude")]
    ZeroVector,
    #[error("pulse count {0} must be odd for a centered pulse index")]
    EvenPulseCount(usize),
    #[error("tile array must contain at least one tile")]
    EmptyArray,
    #[error("duplicate tile id {0:?}")]
    DuplicateTileId(String),
    #[error("coefficient sets cover {spatial} tiles but the matrix has {expected}")]
    TileCountMismatch { spatial: usize, expected: usize },
}

/// A receiving element at a fixed position in the site's local SEZ frame.
#[derive(Debug, Clone, PartialEq)]
pub struct Tile {
    pub id: String,
    /// Position in the local SEZ frame, m.
    pub u: Vec3,
}

/// The receiving array: one entry per tile, unique ids.
#[derive(Debug, Clone, PartialEq)]
pub struct TileArray {
    tiles: Vec<Tile>,
}

/// On-disk tile layout entry: local east/north/up offsets in meters.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TileLayoutEntry {
    pub id: String,
    pub east_m: f64,
    pub north_m: f64,
    pub up_m: f64,
}

impl TileArray {
    pub fn new(tiles: Vec<Tile>) -> Result<Self, PhasingError> {
        if tiles.is_empty() {
            return Err(PhasingError::EmptyArray);
        }
        let mut ids: Vec<&str> = tiles.iter().map(|t| t.id.as_str()).collect();
        ids.sort_unstable();
        if let Some(w) = ids.windows(2).find(|w| w[0] == w[1]) {
            return Err(PhasingError::DuplicateTileId(w[0].to_string()));
        }
        Ok(Self { tiles })
    }

    /// Builds the array from east/north/up layout entries; SEZ axes are
    /// south = -north, east, zenith = up.
    pub fn from_layout(entries: &[TileLayoutEntry]) -> Result<Self, PhasingError> {
        Self::new(
            entries
                .iter()
                .map(|e| Tile {
                    id: e.id.clone(),
                    u: Vec3::new(-e.north_m, e.east_m, e.up_m),
                })
                .collect(),
        )
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    /// Largest pairwise tile separation, m; used as the aperture size when
    /// deriving angular resolution. Returns 0 for a single-tile array.
    pub fn aperture_m(&self) -> f64 {
        let mut best = 0.0_f64;
        for (i, a) in self.tiles.iter().enumerate() {
            for b in &self.tiles[i + 1..] {
                best = best.max((a.u - b.u).norm());
            }
        }
        best
    }
}

/// Unit pointing vector toward the target and its first two derivatives,
/// in the local frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WavevectorSeries {
    pub k: Vec3,
    pub kdot: Vec3,
    pub kddot: Vec3,
}

/// Taylor coefficients of the bistatic Doppler phase, rad/s^k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DopplerCoefficients {
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
    pub d3: f64,
}

impl std::ops::Add for DopplerCoefficients {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Self {
            d0: self.d0 + o.d0,
            d1: self.d1 + o.d1,
            d2: self.d2 + o.d2,
            d3: self.d3 + o.d3,
        }
    }
}

/// Per-tile spatial phase coefficients, rad/s^k.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TileCoefficients {
    pub b0: f64,
    pub b1: f64,
    pub b2: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpatialCoefficients {
    pub per_tile: Vec<TileCoefficients>,
}

impl std::ops::Add for SpatialCoefficients {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        assert_eq!(self.per_tile.len(), o.per_tile.len());
        Self {
            per_tile: self
                .per_tile
                .iter()
                .zip(&o.per_tile)
                .map(|(a, b)| TileCoefficients {
                    b0: a.b0 + b.b0,
                    b1: a.b1 + b.b1,
                    b2: a.b2 + b.b2,
                })
                .collect(),
        }
    }
}

/// Per-tile, per-pulse unit-modulus phase corrections for one orbit
/// hypothesis across one coherent processing interval.
#[derive(Debug, Clone)]
pub struct PhaseMatrix {
    /// Row-major [tile][pulse]; pulse index j maps to m = j - (M-1)/2.
    data: Vec<Complex64>,
    n_tiles: usize,
    n_pulses: usize,
    tau_s: f64,
}

impl PhaseMatrix {
    pub fn n_tiles(&self) -> usize {
        self.n_tiles
    }

    pub fn n_pulses(&self) -> usize {
        self.n_pulses
    }

    pub fn tau_s(&self) -> f64 {
        self.tau_s
    }

    /// Entry for tile `n` and 0-based pulse index `j`.
    pub fn entry(&self, n: usize, j: usize) -> Complex64 {
        self.data[n * self.n_pulses + j]
    }

    pub fn row(&self, n: usize) -> &[Complex64] {
        &self.data[n * self.n_pulses..(n + 1) * self.n_pulses]
    }
}

/// Unit pointing vector toward the target and its rates, by direct
/// differentiation of q/|q|.
pub fn wavevector_series(
    q: &Vec3,
    qdot: &Vec3,
    qddot: &Vec3,
) -> Result<WavevectorSeries, PhasingError> {
    let rho = q.norm();
    if rho == 0.0 {
        return Err(PhasingError::ZeroVector);
    }
    let rhodot = q.dot(qdot) / rho;
    let rhoddot = (qdot.norm_squared() + q.dot(qddot) - rhodot * rhodot) / rho;
    let k = q / rho;
    let kdot = qdot / rho - q * (rhodot / (rho * rho));
    let kddot = qddot / rho - qdot * (2.0 * rhodot / (rho * rho)) - q * (rhoddot / (rho * rho))
        + q * (2.0 * rhodot * rhodot / (rho * rho * rho));
    Ok(WavevectorSeries { k, kdot, kddot })
}

/// Doppler phase coefficients from the transmitter and receiver slant series.
pub fn doppler_coeffs(
    tx: &SlantSeries,
    rx: &SlantSeries,
    baseline_m: f64,
    lambda_m: f64,
) -> DopplerCoefficients {
    let two_pi = std::f64::consts::TAU;
    DopplerCoefficients {
        d0: -(two_pi / lambda_m) * (rx.rho + tx.rho - baseline_m),
        d1: -(two_pi / lambda_m) * (rx.rhodot + tx.rhodot),
        d2: -(std::f64::consts::PI / lambda_m) * (rx.rhoddot + tx.rhoddot),
        d3: -(std::f64::consts::PI / (3.0 * lambda_m)) * (rx.rhodddot + tx.rhodddot),
    }
}

/// Spatial phase coefficients for every tile of the array.
pub fn spatial_coeffs(
    ks: &WavevectorSeries,
    tiles: &TileArray,
    lambda_m: f64,
) -> SpatialCoefficients {
    let two_pi = std::f64::consts::TAU;
    SpatialCoefficients {
        per_tile: tiles
            .tiles()
            .iter()
            .map(|t| TileCoefficients {
                b0: -(two_pi / lambda_m) * ks.k.dot(&t.u),
                b1: -(two_pi / lambda_m) * ks.kdot.dot(&t.u),
                b2: -(std::f64::consts::PI / lambda_m) * ks.kddot.dot(&t.u),
            })
            .collect(),
    }
}

/// Signed exponent of the phase correction for one tile at time `t` past the
/// CPI center: the matrix entry is exp(j * exponent). The constant Doppler
/// term d0 is deliberately excluded.
pub fn phase_exponent(dc: &DopplerCoefficients, tile: &TileCoefficients, t: f64) -> f64 {
    -(tile.b0 + (tile.b1 + dc.d1) * t + (tile.b2 + dc.d2) * (t * t) + dc.d3 * (t * t * t))
}

/// Assembles the phase matrix by sampling each tile's polynomial phase
/// signal at the centered pulse times m*tau, m in [-(M-1)/2, (M-1)/2].
pub fn phase_matrix(
    dc: &DopplerCoefficients,
    sc: &SpatialCoefficients,
    n_pulses: usize,
    tau_s: f64,
) -> Result<PhaseMatrix, PhasingError> {
    if n_pulses.is_multiple_of(2) {
        return Err(PhasingError::EvenPulseCount(n_pulses));
    }
    let n_tiles = sc.per_tile.len();
    if n_tiles == 0 {
        return Err(PhasingError::EmptyArray);
    }
    let half = (n_pulses as i64 - 1) / 2;
    let mut data = vec![Complex64::default(); n_tiles * n_pulses];
    exec::for_each_chunk(&mut data, n_pulses, |n, row| {
        let tile = &sc.per_tile[n];
        for (j, out) in row.iter_mut().enumerate() {
            let t = (j as i64 - half) as f64 * tau_s;
            *out = Complex64::from_polar(1.0, phase_exponent(dc, tile, t));
        }
    });
    Ok(PhaseMatrix {
        data,
        n_tiles,
        n_pulses,
        tau_s,
    })
}
