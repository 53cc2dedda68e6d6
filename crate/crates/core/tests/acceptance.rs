//! Acceptance gate: one line per criterion, non-zero exit if any fails.

mod common;

use std::f64::consts::TAU;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::{Duration, Instant};

use common::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use syncbuck_core::bode::{log_spaced, mag_db};
use syncbuck_core::model::modified_z;
use syncbuck_core::numerics::{expm2, fourier_coeff, partial_fractions, Mat2};
use syncbuck_core::plant::g_id;
use syncbuck_core::sfra::{measure_from, sweep, InjectionSpec, Measurement};
use syncbuck_core::sim::{find_steady_state, Probes, Simulator};
use syncbuck_core::{Complex64, ConverterConfig, InjectionPoint, LoopModel, Modulation, SamplingPosition};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn jw(f: f64) -> Complex64 {
    Complex64::new(0.0, TAU * f)
}

fn phase_err_deg(a: Complex64, b: Complex64) -> f64 {
    (a / b).arg().to_degrees().abs()
}

fn closed_form_vs_series() -> Outcome {
    let model = LoopModel::for_config(&ConverterConfig::table3()).unwrap();
    let f_s = 1.0 / model.config().t_s;
    let (mut worst_db, mut worst_deg) = (0.0f64, 0.0f64);
    for f in log_spaced(10.0, 2.0 * f_s, 20) {
        let a = model.t_i(jw(f)).unwrap();
        let b = model.t_i_series(jw(f), 2000).unwrap();
        worst_db = worst_db.max((mag_db(a) - mag_db(b)).abs());
        worst_deg = worst_deg.max(phase_err_deg(a, b));
    }
    outcome(
        worst_db < 0.1 && worst_deg < 1.0,
        format!("max |Δ| = {worst_db:.4} dB, {worst_deg:.3}° (limit 0.1 dB, 1°)"),
    )
}

fn modified_z_correctness() -> Outcome {
    let mut rng = StdRng::seed_from_u64(2);
    let (mut worst_series, mut worst_impulse) = (0.0f64, 0.0f64);
    for _ in 0..20 {
        let cfg = random_config(&mut rng);
        let pf = partial_fractions(&g_id(&cfg)).unwrap();
        let t_p = rng.gen_range(0.05..0.95) * cfg.t_s;
        let (z, theta) = random_unit_z(&mut rng);
        let closed = modified_z(&pf, t_p, cfg.t_s, z).unwrap();
        worst_series = worst_series.max(rel_err(closed, sideband_sum(&pf, t_p, cfg.t_s, jw(theta / (TAU * cfg.t_s)), 2000)));
        worst_impulse = worst_impulse.max(rel_err(closed, impulse_sampling(&pf, t_p, cfg.t_s, z)));
    }
    outcome(
        worst_series < 1e-3 && worst_impulse < 1e-9,
        format!("20 configs: vs sideband sum {worst_series:.2e} (limit 1e-3), vs sampled impulse response {worst_impulse:.2e} (limit 1e-9)"),
    )
}

/// Model vs simulated SFRA over `[100 Hz, 0.49 f_S]`, digital and analog.
fn model_vs_simulation(cfg: &ConverterConfig) -> Outcome {
    let model = LoopModel::for_config(cfg).unwrap();
    let freqs = log_spaced(100.0, 0.49 * cfg.f_s(), 16);
    let mut lines = Vec::new();
    let mut pass = true;
    for which in [Measurement::Digital, Measurement::Analog] {
        let base = InjectionSpec::new(which.injection_point(), 0.0);
        let result = sweep(cfg, &freqs, which, &base).unwrap();
        let failed = result.entries.iter().filter(|e| e.outcome.is_err()).count();
        let (mut worst_db, mut worst_deg) = (0.0f64, 0.0f64);
        for p in &result.curve.points {
            let want = match which {
                Measurement::Digital => model.t_pul(model.z_of(jw(p.f_hz))).unwrap(),
                _ => model.t_i(jw(p.f_hz)).unwrap(),
            };
            worst_db = worst_db.max((mag_db(p.value) - mag_db(want)).abs());
            worst_deg = worst_deg.max(phase_err_deg(p.value, want));
        }
        pass &= failed == 0 && result.curve.len() >= 15 && worst_db < 1.0 && worst_deg < 5.0;
        lines.push(format!(
            "{which}: {} pts, {failed} failed, max |Δ| {worst_db:.4} dB {worst_deg:.3}°",
            result.curve.len()
        ));
    }
    outcome(pass, format!("{} (limit 1 dB, 5°)", lines.join("; ")))
}

fn asymmetric() -> Outcome {
    model_vs_simulation(&ConverterConfig::table3().with_modulation(Modulation::Tem, SamplingPosition::OffCenter))
}

fn symmetric() -> Outcome {
    model_vs_simulation(&ConverterConfig::table3().with_modulation(Modulation::Sym, SamplingPosition::OffCenter))
}

fn sync_term_necessity() -> Outcome {
    let cfg = ConverterConfig::table3();
    let full = LoopModel::for_config(&cfg).unwrap();
    let baseline = full.clone().with_sync(false);
    let ss = find_steady_state(&cfg).unwrap();
    let m = measure_from(&cfg, &ss.state, &InjectionSpec::new(InjectionPoint::AnalogSensedPath, 100.0)).unwrap();
    let measured = mag_db(m.gain);
    let gap_base = (mag_db(baseline.t_i(jw(m.f_p)).unwrap()) - measured).abs();
    let gap_full = (mag_db(full.t_i(jw(m.f_p)).unwrap()) - measured).abs();
    outcome(
        gap_base > 20.0 && gap_full < 1.0,
        format!("at {:.1} Hz: measured {measured:.2} dB, baseline off by {gap_base:.2} dB (need > 20), full model off by {gap_full:.4} dB (need < 1)", m.f_p),
    )
}

fn dc_dichotomy() -> Outcome {
    let model = LoopModel::for_config(&ConverterConfig::table3()).unwrap();
    let tp = |f: f64| mag_db(model.t_pul(model.z_of(jw(f))).unwrap());
    let rise = tp(1.0) - tp(1e3);
    let ti: Vec<f64> = log_spaced(0.1, 1.0, 11).into_iter().map(|f| mag_db(model.t_i(jw(f)).unwrap())).collect();
    let spread = ti.iter().cloned().fold(f64::MIN, f64::max) - ti.iter().cloned().fold(f64::MAX, f64::min);
    outcome(
        rise > 40.0 && spread < 0.5,
        format!("|T_pul| 1 Hz over 1 kHz: {rise:.2} dB (need > 40); |T_i| spread 0.1–1 Hz: {spread:.4} dB (need < 0.5)"),
    )
}

fn steady_state_sync_property() -> Outcome {
    let cfg = ConverterConfig::table3();
    let ss = find_steady_state(&cfg).unwrap();
    let err = ss.sample_vs_average_error(cfg.h_i).abs();
    let duty_err = (ss.op.duty - 0.27596).abs() / 0.27596;
    outcome(
        err < 1e-3 && duty_err < 5e-3,
        format!(
            "sample vs cycle average {:.4}% (limit 0.1%); duty {:.4}% is {:.3}% from 27.596% (limit 0.5%)",
            100.0 * err,
            100.0 * ss.op.duty,
            100.0 * duty_err
        ),
    )
}

fn timing_invariant() -> Outcome {
    let mut cfg = ConverterConfig::table3().with_modulation(Modulation::Tem, SamplingPosition::OnCenter);
    // Reference gains leave this placement unstable; these do not.
    cfg.k_p = 0.1;
    cfg.k_i = 5000.0;
    let start = find_steady_state(&cfg).unwrap().state;
    let delta = 0.02;
    let sample_time = |perturb: bool| {
        let mut sim = Simulator::new(&cfg, start).unwrap();
        sim.run(5, &Probes::none());
        if perturb {
            sim.perturb_shadow(delta);
        }
        sim.run(1, &Probes::events()).samples[0].t
    };
    let shift = sample_time(true) - sample_time(false);
    let want = 0.5 * delta * cfg.t_s / cfg.cntr_max;
    let err = (shift - want).abs();
    outcome(err < 1e-9, format!("shift {shift:.6e} s vs {want:.6e} s, error {err:.1e} s (limit 1e-9 s)"))
}

fn property_suites() -> Outcome {
    let mut rng = StdRng::seed_from_u64(9);
    let n = 200;
    let mut worst = [0.0f64; 5];

    for _ in 0..n {
        let (tf, _) = build_tf(&random_pole_set(&mut rng));
        let pf = partial_fractions(&tf).unwrap();
        for _ in 0..100 {
            let s = jw(log_uniform(&mut rng, 0.1, 1e6));
            worst[0] = worst[0].max(rel_err(pf.eval(s), tf.eval(s).unwrap()));
        }

        let a = Mat2([
            [rng.gen_range(-5e4..5e4), rng.gen_range(-5e4..5e4)],
            [rng.gen_range(-5e4..5e4), rng.gen_range(-5e4..5e4)],
        ]);
        let (t1, t2) = (rng.gen_range(0.0..5e-5), rng.gen_range(0.0..5e-5));
        let whole = expm2(&a, t1 + t2);
        let scale = whole.0.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
        worst[1] = worst[1].max(whole.max_abs_diff(&(expm2(&a, t1) * expm2(&a, t2))) / scale);

        let qd = rng.gen_range(3u64..300);
        let pd = rng.gen_range(1..=(qd - 1) / 2);
        let t = 1e-5;
        let f = pd as f64 / (qd as f64 * t);
        let c = Complex64::from_polar(rng.gen_range(0.1..5.0), rng.gen_range(0.0..TAU));
        let x: Vec<f64> = (0..qd as usize * 2)
            .map(|i| 0.7 + c.norm() * (TAU * f * i as f64 * t + c.arg()).cos())
            .collect();
        worst[2] = worst[2].max(rel_err(fourier_coeff(&x, t, f).unwrap(), c));
    }

    let carriers = [
        (Modulation::Tem, SamplingPosition::OffCenter),
        (Modulation::Lem, SamplingPosition::OnCenter),
        (Modulation::Sym, SamplingPosition::OffCenter),
    ];
    for (m, pos) in carriers {
        let model = LoopModel::for_config(&ConverterConfig::table3().with_modulation(m, pos)).unwrap();
        let f_s = model.config().f_s();
        for _ in 0..n / 4 {
            let f = rng.gen_range(5.0..0.49 * f_s);
            let z = model.z_of(jw(f));
            let tp = model.t_pul(z).unwrap();
            let ti = model.t_i(jw(f)).unwrap();
            worst[3] = worst[3]
                .max(rel_err(model.t_pul(z.conj()).unwrap(), tp.conj()))
                .max(rel_err(model.t_i(jw(f).conj()).unwrap(), ti.conj()));
            let k = rng.gen_range(1..4) as f64;
            let shifted = model.t_pul(model.z_of(jw(f + k * f_s))).unwrap();
            let mirrored = model.t_pul(model.z_of(jw(k * f_s - f))).unwrap();
            worst[4] = worst[4].max(rel_err(shifted, tp)).max(rel_err(mirrored, tp.conj()));
        }
    }
    let limits = [1e-9, 1e-10, 1e-9, 1e-10, 1e-9];
    let names = ["partial fractions", "expm2 semigroup", "coherent Fourier", "conjugate symmetry", "T_S periodicity"];
    let pass = worst.iter().zip(&limits).all(|(w, l)| w < l);
    let detail = names
        .iter()
        .zip(worst.iter().zip(&limits))
        .map(|(n, (w, l))| format!("{n} {w:.1e} (<{l:.0e})"))
        .collect::<Vec<_>>()
        .join(", ");
    outcome(pass, detail)
}

type Criterion = (u8, &'static str, Duration, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 9] = [
        (1, "closed-form analog loop gain vs sideband series", Duration::from_secs(10), closed_form_vs_series),
        (2, "modified z-transform correctness", Duration::from_secs(30), modified_z_correctness),
        (3, "model vs simulation, TEM off-center", Duration::from_secs(300), asymmetric),
        (4, "model vs simulation, SYM off-center", Duration::from_secs(300), symmetric),
        (5, "synchronization term necessity", Duration::from_secs(300), sync_term_necessity),
        (6, "digital integrator vs finite analog DC gain", Duration::from_secs(300), dc_dichotomy),
        (7, "steady-state sampled current equals average", Duration::from_secs(300), steady_state_sync_property),
        (8, "sampling instant tracks on-interval center", Duration::from_secs(300), timing_invariant),
        (9, "property suites", Duration::from_secs(300), property_suites),
    ];
    let mut failures = 0;
    for (n, name, limit, run) in criteria {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(run));
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) if elapsed <= limit => (o.pass, o.detail),
            Ok(o) => (false, format!("{} (runtime over {}s)", o.detail, limit.as_secs())),
            Err(_) => (false, "panicked".to_string()),
        };
        if !pass {
            failures += 1;
        }
        println!(
            "criterion {n} [{name}]: {} | {detail} [{:.2}s]",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 9 criteria passed", 9 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
