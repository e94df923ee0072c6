use std::fs;
use std::path::Path;
use std::time::Instant;

use anyhow::Context;
use serde_json::json;

use skywatch_core::dynamics::StateVector;
use skywatch_core::io::{
    atomic_write, read_detections_csv, read_scene, write_detections_csv, write_od_report,
    write_scene, write_truth_csv, DetectionRow, OdReport,
};
use skywatch_core::od::{
    batch_least_squares, iod_candidates, linspace, predict_measurements, FitOptions, Measurement,
    MeasurementEpoch, MeasurementSigma, OdError, Track,
};
use skywatch_core::radar::{
    detect_orbit, pulse_compress, DetectParams, RangeSampling, SceneGeometry, TransmitterCube,
    TxOutcome,
};
use skywatch_core::sim::{
    incident_power_spherical, simulate_scenario, ElevationPattern, ScenarioConfig, SimError,
    TransmitterModel,
};
use skywatch_core::Vec3;

use crate::{CliError, DetectArgs, LinkbudgetArgs, OdArgs, SimulateArgs};

fn load_config(path: &Path) -> Result<ScenarioConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    ScenarioConfig::from_json(&text).map_err(|e| CliError::Config(e.to_string()))
}

fn write_manifest(
    out: &Path,
    subcommand: &str,
    fields: serde_json::Value,
    timings: &[(&str, f64)],
) -> Result<(), CliError> {
    let manifest = json!({
        "subcommand": subcommand,
        "inputs": fields,
        "timings_s": timings
            .iter()
            .map(|(k, v)| (k.to_string(), serde_json::json!(v)))
            .collect::<serde_json::Map<String, serde_json::Value>>(),
    });
    atomic_write(
        &out.join("run_manifest.json"),
        serde_json::to_string_pretty(&manifest)
            .context("manifest serialization")?
            .as_bytes(),
    )
    .context("write manifest")?;
    Ok(())
}

pub fn simulate(args: &SimulateArgs) -> Result<(), CliError> {
    let mut cfg = load_config(&args.config)?;
    if let Some(seed) = args.seed {
        cfg.noise.seed = seed;
    }
    let t0 = Instant::now();
    let scene = simulate_scenario(&cfg).map_err(|e| match e {
        SimError::Config { .. } => CliError::Config(e.to_string()),
        other => CliError::Other(other.into()),
    })?;
    let render_s = t0.elapsed().as_secs_f64();

    let t1 = Instant::now();
    fs::create_dir_all(&args.out).context("create output directory")?;
    write_scene(&args.out, &scene).context("write recordings")?;
    write_truth_csv(&args.out.join("truth.csv"), &scene.truth.records)
        .context("write truth log")?;
    let io_s = t1.elapsed().as_secs_f64();

    println!(
        "simulated {} CPIs x {} pulses at {} S/s: {} transmitters x {} tiles",
        cfg.num_cpis,
        cfg.num_pulses,
        cfg.sample_rate_hz,
        cfg.transmitters.len(),
        cfg.receiver.tiles.len()
    );
    for target in &cfg.targets {
        for tx in &cfg.transmitters {
            let visible: Vec<&skywatch_core::sim::TruthRecord> = scene
                .truth
                .for_pair(&target.id, &tx.id)
                .filter(|r| r.visible)
                .collect();
            match (visible.first(), visible.last()) {
                (Some(first), Some(last)) => println!(
                    "  {} via {}: visible {}/{} CPIs ({:.1}-{:.1} s)",
                    target.id,
                    tx.id,
                    visible.len(),
                    cfg.num_cpis,
                    first.time_s,
                    last.time_s
                ),
                _ => println!("  {} via {}: never visible", target.id, tx.id),
            }
        }
    }

    write_manifest(
        &args.out,
        "simulate",
        json!({
            "config": args.config.display().to_string(),
            "seed": cfg.noise.seed,
        }),
        &[("render", render_s), ("io", io_s)],
    )
}

fn parse_hypotheses(
    args: &DetectArgs,
    cfg: &ScenarioConfig,
    geometry: &SceneGeometry,
) -> Result<Vec<(String, StateVector)>, CliError> {
    match args.hypotheses.as_str() {
        "truth" => Ok(cfg
            .targets
            .iter()
            .map(|t| (format!("truth:{}", t.id), t.state()))
            .collect()),
        "grid" => {
            let altitudes = linspace(args.alt_min_km * 1e3, args.alt_max_km * 1e3, args.alt_steps);
            let headings: Vec<f64> = (0..args.headings)
                .map(|i| i as f64 * std::f64::consts::TAU / args.headings as f64)
                .collect();
            let states = iod_candidates(
                args.beam_az_deg.to_radians(),
                args.beam_el_deg.to_radians(),
                &geometry.rx_site,
                geometry.alignment_rad,
                cfg.cpi_s * 0.5,
                &altitudes,
                &headings,
            );
            Ok(states
                .into_iter()
                .enumerate()
                .map(|(i, s)| (format!("grid:{i:05}"), s))
                .collect())
        }
        other => {
            let path = other.strip_prefix("file:").ok_or_else(|| {
                CliError::Config(format!(
                    "hypotheses must be \"truth\", \"grid\", or \"file:PATH\", got {other:?}"
                ))
            })?;
            #[derive(serde::Deserialize)]
            struct HypothesisSpec {
                id: String,
                r_m: [f64; 3],
                v_mps: [f64; 3],
                #[serde(default)]
                epoch_s: f64,
            }
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
            let specs: Vec<HypothesisSpec> = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("hypothesis file {path}: {e}")))?;
            Ok(specs
                .into_iter()
                .map(|h| {
                    (
                        h.id,
                        StateVector::new(
                            Vec3::new(h.r_m[0], h.r_m[1], h.r_m[2]),
                            Vec3::new(h.v_mps[0], h.v_mps[1], h.v_mps[2]),
                            h.epoch_s,
                        ),
                    )
                })
                .collect())
        }
    }
}

pub fn detect(args: &DetectArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    let geometry = cfg
        .geometry()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let hypotheses = parse_hypotheses(args, &cfg, &geometry)?;
    let recorded = read_scene(&args.recordings, &cfg).context("read recordings")?;

    let params = DetectParams {
        doppler_window_bins: args.doppler_window,
        threshold_db: args.threshold_db,
        range_sampling: if args.fixed_bin {
            RangeSampling::FixedBin
        } else {
            RangeSampling::PerPulse
        },
        ..DetectParams::default()
    };

    let s_cpi = cfg.samples_per_cpi();
    let tau = cfg.tau_s();
    let max_delay_s = args.max_delay_ms * 1e-3;
    let mut rows: Vec<DetectionRow> = Vec::new();
    let mut skips = 0usize;
    let t0 = Instant::now();
    let mut compress_s = 0.0;
    for cpi in 0..cfg.num_cpis {
        let tc = Instant::now();
        let cubes: Vec<(String, skywatch_core::radar::PulseCube)> = recorded
            .iter()
            .map(|tx| {
                let surv = tx.surveillance.slice(cpi * s_cpi, s_cpi)?;
                // The unsliced reference provides pre-roll for the delays.
                Ok((
                    tx.tx_id.clone(),
                    pulse_compress(&surv, &tx.reference, tau, max_delay_s)?,
                ))
            })
            .collect::<Result<_, skywatch_core::radar::RadarError>>()
            .context("pulse compression")?;
        compress_s += tc.elapsed().as_secs_f64();
        let cube_refs: Vec<TransmitterCube> = cubes
            .iter()
            .map(|(id, cube)| TransmitterCube {
                tx_id: id.clone(),
                cube,
            })
            .collect();

        // Hypotheses are independent; evaluate them in parallel and keep
        // input order for reproducible output files.
        let outcomes = skywatch_core::exec::map_indexed(hypotheses.len(), |i| {
            let (id, state) = &hypotheses[i];
            detect_orbit(&cube_refs, state, id, &geometry, &params)
        });
        for outcome in outcomes {
            for (_tx, o) in outcome.context("hypothesis evaluation")? {
                match o {
                    TxOutcome::Detected(d) => rows.push(DetectionRow::from_detection(&d)),
                    TxOutcome::NoDetection => {}
                    TxOutcome::Skipped(_) => skips += 1,
                }
            }
        }
    }
    let detect_s = t0.elapsed().as_secs_f64() - compress_s;

    fs::create_dir_all(&args.out).context("create output directory")?;
    write_detections_csv(&args.out.join("detections.csv"), &rows)
        .context("write detections")?;
    let n_evals = hypotheses.len() * cfg.num_cpis * cfg.transmitters.len();
    println!(
        "{} detections from {} hypothesis evaluations ({} skipped); {:.1} ms per evaluation",
        rows.len(),
        n_evals,
        skips,
        1e3 * detect_s / n_evals.max(1) as f64
    );
    write_manifest(
        &args.out,
        "detect",
        json!({
            "config": args.config.display().to_string(),
            "recordings": args.recordings.display().to_string(),
            "hypotheses": args.hypotheses,
            "threshold_db": args.threshold_db,
        }),
        &[("compress", compress_s), ("detect", detect_s)],
    )
}

fn parse_x0(
    spec: &str,
    cfg: &ScenarioConfig,
    args: &OdArgs,
) -> Result<StateVector, CliError> {
    let mut x0 = if let Some(target_id) = spec.strip_prefix("truth:") {
        cfg.targets
            .iter()
            .find(|t| t.id == target_id)
            .map(|t| t.state())
            .ok_or_else(|| CliError::Config(format!("no target {target_id:?} in config")))?
    } else if let Some(path) = spec.strip_prefix("file:") {
        #[derive(serde::Deserialize)]
        struct StateSpec {
            r_m: [f64; 3],
            v_mps: [f64; 3],
            #[serde(default)]
            epoch_s: f64,
        }
        let text = fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
        let s: StateSpec = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("state file {path}: {e}")))?;
        StateVector::new(
            Vec3::new(s.r_m[0], s.r_m[1], s.r_m[2]),
            Vec3::new(s.v_mps[0], s.v_mps[1], s.v_mps[2]),
            s.epoch_s,
        )
    } else {
        return Err(CliError::Config(format!(
            "x0 must be \"truth:<target_id>\" or \"file:PATH\", got {spec:?}"
        )));
    };

    if args.perturb_pos_m != 0.0 || args.perturb_vel_mps != 0.0 {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha12Rng::seed_from_u64(args.seed);
        let mut dir = || {
            let v = Vec3::new(
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
                rng.random_range(-1.0..1.0),
            );
            v.normalize()
        };
        x0.r += args.perturb_pos_m * dir();
        x0.v += args.perturb_vel_mps * dir();
    }
    Ok(x0)
}

/// Per-transmitter resolution-derived sigma for a detection row.
fn sigma_for(row: &DetectionRow, cfg: &ScenarioConfig, geometry: &SceneGeometry) -> MeasurementSigma {
    let aperture = geometry.tiles.aperture_m();
    let lambda = geometry
        .transmitter(&row.tx_id)
        .map(|t| skywatch_core::constants::SPEED_OF_LIGHT / t.carrier_hz)
        .unwrap_or(3.0);
    let beamwidth = if aperture > lambda {
        lambda / aperture
    } else {
        std::f64::consts::FRAC_PI_2
    };
    MeasurementSigma::from_resolutions(cfg.sample_rate_hz, cfg.cpi_s, beamwidth, row.snr_db)
}

pub fn od(args: &OdArgs) -> Result<(), CliError> {
    let cfg = load_config(&args.config)?;
    let geometry = cfg
        .geometry()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut rows = read_detections_csv(&args.detections).map_err(|e| CliError::Config(e.to_string()))?;
    if let Some(h) = &args.hypothesis {
        rows.retain(|r| &r.hypothesis_id == h);
    }
    if rows.is_empty() {
        return Err(CliError::Config("no detections to fit".into()));
    }

    // One measurement per (transmitter, epoch): keep the strongest.
    rows.sort_by(|a, b| {
        (a.tx_id.as_str(), a.time_s, std::cmp::Reverse(ordered(a.snr_db)))
            .partial_cmp(&(b.tx_id.as_str(), b.time_s, std::cmp::Reverse(ordered(b.snr_db))))
            .unwrap()
    });
    rows.dedup_by(|a, b| a.tx_id == b.tx_id && a.time_s == b.time_s);

    let mut tracks: Vec<Track> = Vec::new();
    for tx in &cfg.transmitters {
        let ms: Vec<Measurement> = rows
            .iter()
            .filter(|r| r.tx_id == tx.id)
            .map(|r| r.to_measurement(sigma_for(r, &cfg, &geometry)))
            .collect();
        if !ms.is_empty() {
            tracks.push(Track::new(ms).map_err(|e| CliError::Config(e.to_string()))?);
        }
    }
    let n_measurements: usize = tracks.iter().map(|t| t.len()).sum();

    let x0 = parse_x0(&args.x0, &cfg, args)?;
    let opts = FitOptions {
        snr_weighting: args.snr_weighting,
        ..FitOptions::default()
    };

    let t0 = Instant::now();
    fs::create_dir_all(&args.out).context("create output directory")?;
    let est = match batch_least_squares(&tracks, &x0, &geometry, &opts) {
        Ok(est) => est,
        Err(OdError::NonConvergence { last }) => {
            write_od_report(
                &args.out.join("report.json"),
                &OdReport::from_estimate(&last, n_measurements),
            )
            .context("write last-iterate report")?;
            return Err(CliError::NonConvergence(format!(
                "fit diverged after {} iterations (residual rms {:.3e}); last iterate written",
                last.iterations, last.residual_rms
            )));
        }
        Err(e) => return Err(CliError::Other(e.into())),
    };
    let fit_s = t0.elapsed().as_secs_f64();

    write_od_report(
        &args.out.join("report.json"),
        &OdReport::from_estimate(&est, n_measurements),
    )
    .context("write report")?;

    // Residuals at the converged state.
    let all: Vec<&Measurement> = tracks.iter().flat_map(|t| t.measurements()).collect();
    let epochs: Vec<MeasurementEpoch> = all
        .iter()
        .map(|m| MeasurementEpoch {
            time_s: m.time_s,
            tx_id: m.tx_id.clone(),
        })
        .collect();
    let preds = predict_measurements(&est.state, &epochs, &geometry)
        .map_err(|e| CliError::Other(e.into()))?;
    let mut resid = String::from(
        "time_s,tx_id,res_delay_s,res_doppler_hz,res_azimuth_rad,res_elevation_rad\n",
    );
    for (m, p) in all.iter().zip(&preds) {
        let da = {
            let mut d = (m.azimuth_rad - p.azimuth_rad) % std::f64::consts::TAU;
            if d > std::f64::consts::PI {
                d -= std::f64::consts::TAU;
            }
            if d < -std::f64::consts::PI {
                d += std::f64::consts::TAU;
            }
            d
        };
        resid.push_str(&format!(
            "{},{},{:e},{:e},{:e},{:e}\n",
            m.time_s,
            m.tx_id,
            m.t_d_s - p.t_d_s,
            m.f_d_hz - p.f_d_hz,
            da,
            m.elevation_rad - p.elevation_rad,
        ));
    }
    atomic_write(&args.out.join("residuals.csv"), resid.as_bytes()).context("write residuals")?;

    // Covariance growth curve: refit on time-ordered measurement prefixes.
    let mut order: Vec<usize> = (0..all.len()).collect();
    order.sort_by(|&a, &b| all[a].time_s.partial_cmp(&all[b].time_s).unwrap());
    let mut cov = String::from(
        "time_s,measurements_used,sigma_x_m,sigma_y_m,sigma_z_m,sigma_vx_mps,sigma_vy_mps,sigma_vz_mps,pos_sigma_m,vel_sigma_mps\n",
    );
    for k in 2..=order.len() {
        let subset: Vec<Measurement> = order[..k].iter().map(|&i| all[i].clone()).collect();
        let mut by_tx: std::collections::BTreeMap<String, Vec<Measurement>> = Default::default();
        for m in subset {
            by_tx.entry(m.tx_id.clone()).or_default().push(m);
        }
        let sub_tracks: Vec<Track> = by_tx
            .into_values()
            .map(|ms| Track::new(ms).expect("prefix preserves order"))
            .collect();
        match batch_least_squares(&sub_tracks, &est.state, &geometry, &opts) {
            Ok(e) => {
                let c = &e.covariance;
                cov.push_str(&format!(
                    "{},{},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}\n",
                    all[order[k - 1]].time_s,
                    k,
                    c[(0, 0)].sqrt(),
                    c[(1, 1)].sqrt(),
                    c[(2, 2)].sqrt(),
                    c[(3, 3)].sqrt(),
                    c[(4, 4)].sqrt(),
                    c[(5, 5)].sqrt(),
                    e.position_sigma_m(),
                    e.velocity_sigma_mps(),
                ));
            }
            Err(_) => continue, // prefix not yet observable
        }
    }
    atomic_write(&args.out.join("covariance_vs_time.csv"), cov.as_bytes())
        .context("write covariance curve")?;

    println!(
        "fit converged in {} iterations: residual rms {:.3}, pos sigma {:.1} m, vel sigma {:.3} m/s",
        est.iterations,
        est.residual_rms,
        est.position_sigma_m(),
        est.velocity_sigma_mps()
    );
    write_manifest(
        &args.out,
        "od",
        json!({
            "config": args.config.display().to_string(),
            "detections": args.detections.display().to_string(),
            "x0": args.x0,
            "seed": args.seed,
        }),
        &[("fit", fit_s)],
    )
}

fn ordered(v: f64) -> ordered_float_shim::OrderedF64 {
    ordered_float_shim::OrderedF64(v)
}

/// Minimal totally-ordered f64 wrapper for sorting detection rows.
mod ordered_float_shim {
    #[derive(PartialEq, PartialOrd)]
    pub struct OrderedF64(pub f64);
    impl Eq for OrderedF64 {}
    #[allow(clippy::derive_ord_xor_partial_ord)]
    impl Ord for OrderedF64 {
        fn cmp(&self, other: &Self) -> std::cmp::Ordering {
            self.partial_cmp(other).unwrap_or(std::cmp::Ordering::Equal)
        }
    }
}

fn parse_sweep(spec: &str, what: &str) -> Result<Vec<f64>, CliError> {
    let parts: Vec<&str> = spec.split(':').collect();
    if parts.len() != 3 {
        return Err(CliError::Config(format!(
            "{what} sweep must be min:max:steps, got {spec:?}"
        )));
    }
    let min: f64 = parts[0]
        .parse()
        .map_err(|_| CliError::Config(format!("{what} min {:?}", parts[0])))?;
    let max: f64 = parts[1]
        .parse()
        .map_err(|_| CliError::Config(format!("{what} max {:?}", parts[1])))?;
    let steps: usize = parts[2]
        .parse()
        .map_err(|_| CliError::Config(format!("{what} steps {:?}", parts[2])))?;
    if steps == 0 {
        return Err(CliError::Config(format!("{what} steps must be positive")));
    }
    Ok(linspace(min, max, steps))
}

pub fn linkbudget(args: &LinkbudgetArgs) -> Result<(), CliError> {
    let pattern = match args.pattern.as_str() {
        "default" => ElevationPattern::default_broadcast(),
        "isotropic" => ElevationPattern::isotropic(),
        other => {
            let path = other.strip_prefix("file:").ok_or_else(|| {
                CliError::Config(format!(
                    "pattern must be \"default\", \"isotropic\", or \"file:PATH\", got {other:?}"
                ))
            })?;
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("cannot read {path}: {e}")))?;
            let table: Vec<(f64, f64)> = serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("pattern file {path}: {e}")))?;
            ElevationPattern::new(table).map_err(CliError::Config)?
        }
    };
    let tx = TransmitterModel {
        id: "sweep".into(),
        site: skywatch_core::frames::GeodeticSite::from_degrees("sweep", 0.0, 0.0, 0.0)
            .expect("valid site"),
        eirp_w: args.eirp_w,
        pattern,
        carrier_hz: 100.0e6,
        bandwidth_hz: 5.0e4,
    };
    let baselines = parse_sweep(&args.baseline_km, "baseline")?;
    let altitudes = parse_sweep(&args.altitude_km, "altitude")?;
    let allowance = args.allowance_deg.to_radians();

    let mut csv = String::from("baseline_km,altitude_km,elevation_deg,incident_w_m2,shadowed\n");
    for b in &baselines {
        for a in &altitudes {
            let s = incident_power_spherical(&tx, b * 1e3, a * 1e3, allowance);
            csv.push_str(&format!(
                "{},{},{:.4},{:e},{}\n",
                b,
                a,
                s.elevation_rad.to_degrees(),
                s.power_w_m2,
                s.shadowed
            ));
        }
    }
    if let Some(dir) = args.out.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir).context("create output directory")?;
        }
    }
    atomic_write(&args.out, csv.as_bytes()).context("write link budget")?;
    println!(
        "{} x {} grid written to {}",
        baselines.len(),
        altitudes.len(),
        args.out.display()
    );
    Ok(())
}
