//! Echo rendering: per-tile, per-transmitter copies of the reference with
//! time-varying delay, carrier phase, and amplitude, plus channel noise.
//!
//! Delay is quantized to the nearest sample once per pulse; carrier phase is
//! applied per sample from the exact path length series at the pulse center.
//! Tile offsets enter through the frozen per-CPI SEZ pointing vector, the
//! same convention the matching stage uses, so a matched hypothesis closes
//! to a constant phase across pulses and tiles.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

use super::link::{incident_power, echo_power, DEFAULT_HORIZON_ALLOWANCE_RAD};
use super::{ScenarioConfig, SimError};
use crate::constants::SPEED_OF_LIGHT;
use crate::dynamics::{azel_series, propagate, slant_series, DynamicsError};
use crate::exec;
use crate::frames::{sez_matrix_aligned, site_kinematics_eci_aligned};
use crate::radar::{Channel, IQRecording};
use crate::Vec3;

/// Ground-truth measurement values at a CPI center.
#[derive(Debug, Clone)]
pub struct TruthRecord {
    pub time_s: f64,
    pub target_id: String,
    pub tx_id: String,
    pub t_d_s: f64,
    pub f_d_hz: f64,
    pub azimuth_rad: f64,
    pub elevation_rad: f64,
    /// Above the receiver horizon and illuminated by the transmitter.
    pub visible: bool,
}

#[derive(Debug, Clone, Default)]
pub struct TruthLog {
    pub records: Vec<TruthRecord>,
}

impl TruthLog {
    pub fn for_pair<'a>(
        &'a self,
        target_id: &'a str,
        tx_id: &'a str,
    ) -> impl Iterator<Item = &'a TruthRecord> {
        self.records
            .iter()
            .filter(move |r| r.target_id == target_id && r.tx_id == tx_id)
    }
}

/// Rendered channels for one transmitter.
#[derive(Debug, Clone)]
pub struct RenderedTransmitter {
    pub tx_id: String,
    pub reference: IQRecording,
    pub surveillance: IQRecording,
}

#[derive(Debug, Clone)]
pub struct RenderedScene {
    pub transmitters: Vec<RenderedTransmitter>,
    pub truth: TruthLog,
}

/// Per-pulse echo parameters for one (target, transmitter) pair.
struct PulseEcho {
    /// Global sample range of the pulse.
    start: usize,
    end: usize,
    /// Echo delay in whole samples.
    delay_samples: i64,
    /// Carrier phase at the pulse center, rad.
    phase0: f64,
    /// Phase rate within the pulse, rad/s.
    phase_rate: f64,
    /// Pulse center time, s.
    t_mid: f64,
    /// Frozen-basis unit vector toward the target (per-CPI SEZ).
    k: Vec3,
    /// Echo amplitude per sample.
    amp: f64,
    visible: bool,
}

struct EchoTable {
    /// Indexed [target][pulse].
    pulses: Vec<Vec<PulseEcho>>,
    lambda: f64,
}

/// Reference pre-roll: echoes lag the direct path by the bistatic excess
/// delay, so the reference recording begins this long before the scenario
/// epoch (10 ms covers excess paths to 3000 km).
pub const REFERENCE_PREROLL_S: f64 = 10.0e-3;

/// Generates references internally (seeded per transmitter) and renders the
/// scene described by the config.
///
/// References start [`REFERENCE_PREROLL_S`] before the epoch so that the
/// surveillance channels carry echo from their very first sample.
pub fn simulate_scenario(cfg: &ScenarioConfig) -> Result<RenderedScene, SimError> {
    cfg.validate()?;
    let duration = cfg.duration_s() + REFERENCE_PREROLL_S;
    let references: Vec<IQRecording> = cfg
        .transmitters
        .iter()
        .enumerate()
        .map(|(i, tx)| {
            let seed = cfg.noise.seed ^ (0xA5A5_0000_u64 + i as u64);
            let mut rec =
                super::synth_fm_reference(tx.bandwidth_hz, duration, cfg.sample_rate_hz, seed);
            rec.start_time_s = -REFERENCE_PREROLL_S;
            rec
        })
        .collect();
    render_scene(cfg, &references)
}

/// Renders per-tile surveillance channels for each transmitter from the
/// given reference recordings (one per transmitter, single channel).
pub fn render_scene(
    cfg: &ScenarioConfig,
    references: &[IQRecording],
) -> Result<RenderedScene, SimError> {
    cfg.validate()?;
    if references.len() != cfg.transmitters.len() {
        return Err(super::config_err(
            "transmitters",
            format!(
                "{} references supplied for {} transmitters",
                references.len(),
                cfg.transmitters.len()
            ),
        ));
    }
    let total = cfg.total_samples();
    for r in references {
        let start_bins = r.start_time_s * cfg.sample_rate_hz;
        if (start_bins - start_bins.round()).abs() > 1e-6 {
            return Err(SimError::Radar(crate::radar::RadarError::MisalignedStart(
                r.start_time_s,
            )));
        }
        // Samples at and after the scenario epoch must cover the scene.
        let avail = r.n_samples() as i64 + start_bins.round() as i64;
        if avail < total as i64 {
            return Err(SimError::Radar(crate::radar::RadarError::InsufficientSamples {
                needed: total,
                available: avail.max(0) as usize,
            }));
        }
    }

    let geometry = cfg.geometry()?;
    let models = cfg.transmitter_models()?;
    let tiles = &geometry.tiles;
    let n_tiles = tiles.len();
    let b = cfg.sample_rate_hz;
    let spp = b * cfg.tau_s();
    let s_cpi = cfg.samples_per_cpi();
    let m = cfg.num_pulses;

    // Per (transmitter, target) pulse tables, shared read-only by the
    // channel renderers.
    let mut tables: Vec<EchoTable> = Vec::with_capacity(cfg.transmitters.len());
    let mut truth = TruthLog::default();
    for (tx_idx, tx_model) in models.iter().enumerate() {
        let lambda = SPEED_OF_LIGHT / tx_model.carrier_hz;
        let mut per_target = Vec::with_capacity(cfg.targets.len());
        for target in &cfg.targets {
            per_target.push(echo_pulse_table(
                cfg, target, tx_idx, tx_model, lambda, b, spp, s_cpi, m,
            )?);
        }
        tables.push(EchoTable {
            pulses: per_target,
            lambda,
        });
        truth
            .records
            .extend(truth_records(cfg, tx_idx, tx_model, lambda, b, s_cpi)?);
    }

    // Render all surveillance channels in parallel; each channel owns a
    // counter-addressed noise stream, so ordering cannot change results.
    let n_channels = cfg.transmitters.len() * n_tiles;
    let noise_sigma = (cfg.noise.power / 2.0).sqrt();
    let channels: Vec<Vec<Complex64>> = exec::map_indexed(n_channels, |ch| {
        let tx_idx = ch / n_tiles;
        let tile_idx = ch % n_tiles;
        let mut rng = ChaCha12Rng::seed_from_u64(cfg.noise.seed);
        rng.set_stream(1 + ch as u64);
        let normal = Normal::new(0.0, noise_sigma).unwrap();
        let mut out: Vec<Complex64> = (0..total)
            .map(|_| Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng)))
            .collect();
        let table = &tables[tx_idx];
        let ref_samples = &references[tx_idx].channels()[0].samples;
        let ref_start = (references[tx_idx].start_time_s * b).round() as i64;
        let u = tiles.tiles()[tile_idx].u;
        let two_pi_over_lambda = std::f64::consts::TAU / table.lambda;
        for pulses in &table.pulses {
            for p in pulses {
                if !p.visible || p.amp == 0.0 {
                    continue;
                }
                let tile_phase = -two_pi_over_lambda * p.k.dot(&u);
                #[allow(clippy::needless_range_loop)] // s addresses output, reference, and time
                for s in p.start..p.end {
                    let ref_idx = s as i64 - p.delay_samples - ref_start;
                    if ref_idx < 0 || ref_idx as usize >= ref_samples.len() {
                        continue;
                    }
                    let t_s = s as f64 / b;
                    let phase = p.phase0 + p.phase_rate * (t_s - p.t_mid) + tile_phase;
                    out[s] += p.amp
                        * ref_samples[ref_idx as usize]
                        * Complex64::from_polar(1.0, phase);
                }
            }
        }
        out
    });

    let mut transmitters = Vec::with_capacity(cfg.transmitters.len());
    for (tx_idx, tx_spec) in cfg.transmitters.iter().enumerate() {
        let ref_start = (references[tx_idx].start_time_s * b).round() as i64;
        let keep = (total as i64 - ref_start) as usize;
        let mut ref_samples = references[tx_idx].channels()[0].samples[..keep].to_vec();
        if let Some(ref_snr_db) = cfg.noise.reference_snr_db {
            // Unit-power reference: noise power 10^(-snr/10).
            let sigma = (10.0_f64.powf(-ref_snr_db / 10.0) / 2.0).sqrt();
            let mut rng = ChaCha12Rng::seed_from_u64(cfg.noise.seed);
            rng.set_stream(0x5EED_0000 + tx_idx as u64);
            let normal = Normal::new(0.0, sigma).unwrap();
            for s in &mut ref_samples {
                *s += Complex64::new(normal.sample(&mut rng), normal.sample(&mut rng));
            }
        }
        let reference = IQRecording::new(
            b,
            references[tx_idx].start_time_s,
            tx_spec.carrier_hz,
            vec![Channel {
                id: format!("{}-ref", tx_spec.id),
                samples: ref_samples,
            }],
        )?;
        let surveillance = IQRecording::new(
            b,
            0.0,
            tx_spec.carrier_hz,
            (0..n_tiles)
                .map(|i| Channel {
                    id: tiles.tiles()[i].id.clone(),
                    samples: channels[tx_idx * n_tiles + i].clone(),
                })
                .collect(),
        )?;
        transmitters.push(RenderedTransmitter {
            tx_id: tx_spec.id.clone(),
            reference,
            surveillance,
        });
    }

    Ok(RenderedScene {
        transmitters,
        truth,
    })
}

#[allow(clippy::too_many_arguments)]
fn echo_pulse_table(
    cfg: &ScenarioConfig,
    target: &super::TargetSpec,
    _tx_idx: usize,
    tx_model: &super::TransmitterModel,
    lambda: f64,
    b: f64,
    spp: f64,
    s_cpi: usize,
    m: usize,
) -> Result<Vec<PulseEcho>, SimError> {
    let rx_site = cfg.receiver.site.to_site("receiver.site")?;
    let tx_site = &tx_model.site;
    let align = cfg.epoch_alignment_rad;
    let mut pulses = Vec::with_capacity(cfg.num_cpis * m);
    let mut state = target.state();
    for c in 0..cfg.num_cpis {
        let cpi_center = (c * s_cpi) as f64 / b + s_cpi as f64 / (2.0 * b);
        let d = sez_matrix_aligned(&rx_site, cpi_center, align);
        for pm in 0..m {
            let a = (pm as f64 * spp).round() as usize;
            let e = ((pm + 1) as f64 * spp).round() as usize;
            let start = c * s_cpi + a;
            let end = c * s_cpi + e;
            let t_mid = (start as f64 + (end - start - 1) as f64 / 2.0) / b;
            state = propagate(&state, t_mid - state.epoch_s)?.state;
            let tk = state.kinematics()?;
            let rx_kin = site_kinematics_eci_aligned(&rx_site, t_mid, align);
            let tx_kin = site_kinematics_eci_aligned(tx_site, t_mid, align);
            let srx = slant_series(&tk, &rx_kin)?;
            let stx = slant_series(&tk, &tx_kin)?;
            let baseline = (rx_kin.r - tx_kin.r).norm();
            let excess = srx.rho + stx.rho - baseline;
            let excess_rate = srx.rhodot + stx.rhodot;
            let q = d.to_sez(&(tk.r - rx_kin.r));
            let above_horizon = q.z > 0.0;
            let inc = incident_power(
                tx_model,
                &tx_kin.r,
                &tk.r,
                DEFAULT_HORIZON_ALLOWANCE_RAD,
            );
            let amp = match target.snr_per_pulse_db {
                Some(snr_db) => {
                    (cfg.noise.power * 10.0_f64.powf(snr_db / 10.0) / spp).sqrt()
                }
                None => echo_power(
                    &inc,
                    target.rcs_m2,
                    &rx_kin.r,
                    &tk.r,
                    cfg.receiver.tile_effective_area_m2,
                )
                .sqrt(),
            };
            pulses.push(PulseEcho {
                start,
                end,
                delay_samples: (excess / SPEED_OF_LIGHT * b).round() as i64,
                phase0: -std::f64::consts::TAU / lambda * excess,
                phase_rate: -std::f64::consts::TAU / lambda * excess_rate,
                t_mid,
                k: q.normalize(),
                amp,
                visible: above_horizon && !inc.shadowed,
            });
        }
    }
    Ok(pulses)
}

fn truth_records(
    cfg: &ScenarioConfig,
    tx_idx: usize,
    tx_model: &super::TransmitterModel,
    lambda: f64,
    b: f64,
    s_cpi: usize,
) -> Result<Vec<TruthRecord>, SimError> {
    let rx_site = cfg.receiver.site.to_site("receiver.site")?;
    let align = cfg.epoch_alignment_rad;
    let tx_spec = &cfg.transmitters[tx_idx];
    let mut records = Vec::new();
    for target in &cfg.targets {
        let mut state = target.state();
        for c in 0..cfg.num_cpis {
            let t_c = (c * s_cpi) as f64 / b + s_cpi as f64 / (2.0 * b);
            state = propagate(&state, t_c - state.epoch_s)?.state;
            let tk = state.kinematics()?;
            let rx_kin = site_kinematics_eci_aligned(&rx_site, t_c, align);
            let tx_kin = site_kinematics_eci_aligned(&tx_model.site, t_c, align);
            let srx = slant_series(&tk, &rx_kin)?;
            let stx = slant_series(&tk, &tx_kin)?;
            let baseline = (rx_kin.r - tx_kin.r).norm();
            let d = sez_matrix_aligned(&rx_site, t_c, align);
            let q = d.to_sez(&(tk.r - rx_kin.r));
            let qdot = d.to_sez(&(tk.rdot - rx_kin.rdot));
            let qddot = d.to_sez(&(tk.rddot - rx_kin.rddot));
            let inc = incident_power(
                tx_model,
                &tx_kin.r,
                &tk.r,
                DEFAULT_HORIZON_ALLOWANCE_RAD,
            );
            let (azimuth, elevation, visible) = match azel_series(&q, &qdot, &qddot) {
                Ok(a) => (a.theta, a.phi, a.phi > 0.0 && !inc.shadowed),
                Err(DynamicsError::ZenithSingular) => {
                    (0.0, std::f64::consts::FRAC_PI_2, false)
                }
                Err(e) => return Err(e.into()),
            };
            records.push(TruthRecord {
                time_s: t_c,
                target_id: target.id.clone(),
                tx_id: tx_spec.id.clone(),
                t_d_s: (srx.rho + stx.rho - baseline) / SPEED_OF_LIGHT,
                f_d_hz: -(srx.rhodot + stx.rhodot) / lambda,
                azimuth_rad: azimuth,
                elevation_rad: elevation,
                visible,
            });
        }
    }
    Ok(records)
}
