//! Benchmarks of the data-parallel stages.
//!
//! With the default `parallel` feature each stage runs both on the ambient
//! rayon pool and pinned to a single thread, so one `cargo bench` run shows
//! the scaling. Building with `--no-default-features` benches the true
//! sequential fallback under the `sequential` ids (same workloads, so the
//! two builds are directly comparable).

use criterion::{criterion_group, criterion_main, Criterion};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::SeedableRng;
use rand_distr::{Distribution, Normal};
use std::hint::black_box;

use skywatch_core::dynamics::StateVector;
use skywatch_core::frames::{site_kinematics_eci, GeodeticSite};
use skywatch_core::od::{
    batch_least_squares, predict_measurements, FitOptions, Measurement, MeasurementEpoch,
    MeasurementSigma, Track,
};
use skywatch_core::phasing::{Tile, TileArray};
use skywatch_core::radar::{
    doppler_spectrum, pulse_compress, Channel, IQRecording, SceneGeometry, TxGeometry,
};
use skywatch_core::sim::{simulate_scenario, NoiseSpec, ReceiverSpec, ScenarioConfig, SiteSpec,
    TargetSpec, TransmitterSpec};
use skywatch_core::Vec3;

/// Runs `f` once per mode: on the ambient pool and on one thread when the
/// parallel feature is enabled, else purely sequentially.
fn for_each_mode(mut bench: impl FnMut(&str, &dyn Fn(&mut (dyn FnMut() + Send)))) {
    #[cfg(feature = "parallel")]
    {
        bench("parallel", &|f| f());
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        #[allow(clippy::redundant_closure)]
        bench("single_thread", &|f| pool.install(move || f()));
    }
    #[cfg(not(feature = "parallel"))]
    bench("sequential", &|f| f());
}

fn noise(rng: &mut StdRng, n: usize) -> Vec<Complex64> {
    let normal = Normal::new(0.0, std::f64::consts::FRAC_1_SQRT_2).unwrap();
    (0..n)
        .map(|_| Complex64::new(normal.sample(rng), normal.sample(rng)))
        .collect()
}

fn bench_pulse_compress(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(1);
    let b = 1.0e5;
    let n = 20_000usize;
    let surv = IQRecording::new(
        b,
        0.0,
        1.0e8,
        (0..8)
            .map(|i| Channel {
                id: format!("t{i}"),
                samples: noise(&mut rng, n),
            })
            .collect(),
    )
    .unwrap();
    let reference = IQRecording::new(
        b,
        0.0,
        1.0e8,
        vec![Channel {
            id: "ref".into(),
            samples: noise(&mut rng, n),
        }],
    )
    .unwrap();
    let mut group = c.benchmark_group("pulse_compress_8tiles_2k_pulses");
    for_each_mode(|mode, run| {
        group.bench_function(mode, |bch| {
            bch.iter(|| {
                run(&mut || {
                    black_box(pulse_compress(&surv, &reference, 1e-4, 2.56e-3).unwrap());
                })
            })
        });
    });
    group.finish();
}

fn bench_doppler_spectrum(c: &mut Criterion) {
    let mut rng = StdRng::seed_from_u64(2);
    let chi = noise(&mut rng, 40_001);
    let mut group = c.benchmark_group("doppler_spectrum_40001x201");
    for_each_mode(|mode, run| {
        group.bench_function(mode, |bch| {
            bch.iter(|| {
                run(&mut || {
                    black_box(doppler_spectrum(&chi, 201, 7.5e-5).unwrap());
                })
            })
        });
    });
    group.finish();
}

fn bench_render_scene(c: &mut Criterion) {
    let cfg = ScenarioConfig {
        schema_version: 1,
        epoch_alignment_rad: 0.0,
        receiver: ReceiverSpec {
            site: SiteSpec {
                id: "rx".into(),
                lat_deg: -26.7033,
                lon_deg: 116.6711,
                height_m: 377.0,
            },
            tiles: (0..8)
                .map(|i| skywatch_core::phasing::TileLayoutEntry {
                    id: format!("tile{i:02}"),
                    east_m: 25.0 * (i % 4) as f64,
                    north_m: 25.0 * (i / 4) as f64,
                    up_m: 0.0,
                })
                .collect(),
            tile_effective_area_m2: 25.0,
        },
        transmitters: vec![TransmitterSpec {
            id: "tx0".into(),
            site: SiteSpec {
                id: "tx0".into(),
                lat_deg: -35.0266,
                lon_deg: 117.8837,
                height_m: 100.0,
            },
            eirp_w: 1.0e5,
            carrier_hz: 1.0e8,
            bandwidth_hz: 5.0e4,
            pattern_deg_db: None,
        }],
        targets: vec![{
            let rx = site_kinematics_eci(
                &GeodeticSite::from_degrees("rx", -26.7033, 116.6711, 377.0).unwrap(),
                0.0,
            );
            let up = rx.r.normalize();
            let east = Vec3::new(0.0, 0.0, 1.0).cross(&up).normalize();
            let pos = rx.r + 8.0e5 * (0.9 * up + 0.44 * east).normalize();
            let speed = (skywatch_core::constants::MU_EARTH / pos.norm()).sqrt();
            let north = pos.normalize().cross(&east);
            TargetSpec {
                id: "sat".into(),
                r_m: [pos.x, pos.y, pos.z],
                v_mps: [speed * north.x, speed * north.y, speed * north.z],
                epoch_s: 0.0,
                rcs_m2: 10.0,
                snr_per_pulse_db: Some(-5.0),
            }
        }],
        cpi_s: 0.2002,
        num_pulses: 1001,
        sample_rate_hz: 5.0e4,
        num_cpis: 1,
        noise: NoiseSpec {
            seed: 3,
            power: 1.0,
            reference_snr_db: None,
        },
    };
    let mut group = c.benchmark_group("render_scene_8tiles_1cpi");
    group.sample_size(20);
    for_each_mode(|mode, run| {
        group.bench_function(mode, |bch| {
            bch.iter(|| {
                run(&mut || {
                    black_box(simulate_scenario(&cfg).unwrap());
                })
            })
        });
    });
    group.finish();
}

fn bench_batch_fit(c: &mut Criterion) {
    let scene = SceneGeometry {
        rx_site: GeodeticSite::from_degrees("rx", -26.7033, 116.6711, 377.0).unwrap(),
        tiles: TileArray::new(vec![Tile {
            id: "t0".into(),
            u: Vec3::zeros(),
        }])
        .unwrap(),
        alignment_rad: 0.0,
        transmitters: vec![TxGeometry {
            id: "tx0".into(),
            site: GeodeticSite::from_degrees("tx0", -35.0266, 117.8837, 100.0).unwrap(),
            carrier_hz: 1.0e8,
        }],
    };
    let rx = site_kinematics_eci(&scene.rx_site, 0.0);
    let up = rx.r.normalize();
    let east = Vec3::new(0.0, 0.0, 1.0).cross(&up).normalize();
    let pos = rx.r + 9.0e5 * (0.8 * up + 0.6 * east).normalize();
    let speed = (skywatch_core::constants::MU_EARTH / pos.norm()).sqrt();
    let north = pos.normalize().cross(&east);
    let truth = StateVector::new(pos, speed * north, 0.0);
    let epochs: Vec<MeasurementEpoch> = (0..20)
        .map(|i| MeasurementEpoch {
            time_s: 1.5 + 3.0 * i as f64,
            tx_id: "tx0".into(),
        })
        .collect();
    let sigma = MeasurementSigma::from_resolutions(1.0e5, 3.0, 0.03, 20.0);
    let preds = predict_measurements(&truth, &epochs, &scene).unwrap();
    let track = Track::new(
        preds
            .iter()
            .map(|p| Measurement {
                time_s: p.time_s,
                tx_id: p.tx_id.clone(),
                t_d_s: p.t_d_s,
                f_d_hz: p.f_d_hz,
                azimuth_rad: p.azimuth_rad,
                elevation_rad: p.elevation_rad,
                snr_db: None,
                sigma,
            })
            .collect(),
    )
    .unwrap();
    let x0 = StateVector::new(
        truth.r + Vec3::new(2.0e3, -1.0e3, 2.0e3),
        truth.v + Vec3::new(10.0, -10.0, 5.0),
        0.0,
    );
    c.bench_function("batch_fit_20_epochs", |bch| {
        bch.iter(|| {
            black_box(
                batch_least_squares(std::slice::from_ref(&track), &x0, &scene, &FitOptions::default())
                    .unwrap(),
            );
        })
    });
}

criterion_group!(
    benches,
    bench_pulse_compress,
    bench_doppler_spectrum,
    bench_render_scene,
    bench_batch_fit
);
criterion_main!(benches);
