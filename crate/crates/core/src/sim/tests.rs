use super::*;
use crate::plant::operating_point;

fn table3() -> ConverterConfig {
    ConverterConfig::table3()
}

/// Reference gains destabilize sampling in the rising-slope interval of an
/// asymmetric carrier (closed-loop poles at |z| ≈ 1.07); these keep it stable.
fn stable(m: Modulation, p: SamplingPosition) -> ConverterConfig {
    let mut cfg = table3().with_modulation(m, p);
    if matches!(
        (m, p),
        (Modulation::Tem, SamplingPosition::OnCenter) | (Modulation::Lem, SamplingPosition::OffCenter)
    ) {
        cfg.k_p = 0.1;
        cfg.k_i = 5000.0;
    }
    cfg
}

#[test]
fn frozen_duty_ripple() {
    let mut cfg = table3();
    cfg.k_p = 0.0;
    cfg.k_i = 0.0;
    let d = operating_point(&cfg).unwrap().duty;
    let cmp = d * cfg.cntr_max;
    let x = open_loop_orbit(&cfg, cmp).unwrap();
    let (_, wf) = run_cycles(&cfg, SimState { x, ..SimState::at_rest(cmp) }, 3, &Probes::grid(2000)).unwrap();
    let max = wf.i_l.iter().cloned().fold(f64::MIN, f64::max);
    let min = wf.i_l.iter().cloned().fold(f64::MAX, f64::min);
    let v_out = wf.cycles[0].mean_v_o;
    let predicted = (cfg.v_in - v_out) * d * cfg.t_s / cfg.l_f;
    assert!(((max - min) - predicted).abs() / predicted < 0.01, "{} vs {predicted}", max - min);
    assert!(((max - min) - 4.0).abs() < 0.1);
}

#[test]
fn null_drive_stays_at_zero() {
    let mut cfg = table3();
    cfg.v_in = 0.0;
    cfg.i_ref = 0.0;
    let (end, wf) = run_cycles(&cfg, SimState::at_rest(0.4), 20, &Probes::grid(50)).unwrap();
    assert!(wf.i_l.iter().chain(&wf.v_o).all(|&v| v == 0.0));
    assert_eq!(end.x, [0.0, 0.0]);
}

#[test]
fn closed_loop_duty_and_sync_property() {
    let cfg = table3();
    let ss = find_steady_state(&cfg).unwrap();
    assert!((ss.op.duty - 0.27596).abs() / 0.27596 < 0.005, "duty {}", ss.op.duty);
    assert!(ss.sample_vs_average_error(cfg.h_i).abs() < 1e-3);
    assert!(ss.residual < STEADY_STATE_TOL);
}

#[test]
fn every_carrier_converges_with_sync_property() {
    for m in [Modulation::Tem, Modulation::Lem, Modulation::Sym] {
        for p in [SamplingPosition::OnCenter, SamplingPosition::OffCenter] {
            let cfg = stable(m, p);
            let ss = find_steady_state(&cfg).unwrap_or_else(|e| panic!("{m} {p}: {e}"));
            assert!(ss.sample_vs_average_error(cfg.h_i).abs() < 1e-3, "{m} {p}");
        }
    }
}

#[test]
fn analytic_slope_matches_simulated_slope() {
    for p in [SamplingPosition::OnCenter, SamplingPosition::OffCenter] {
        let cfg = stable(Modulation::Tem, p);
        let sim = find_steady_state(&cfg).unwrap().op.slope_at_sample;
        let model = operating_point(&cfg).unwrap().slope_at_sample;
        assert!((sim - model).abs() / model.abs() < 0.01, "{p}: {sim} vs {model}");
    }
}

#[test]
fn lossless_power_balance() {
    let mut cfg = table3();
    cfg.r_l = 0.0;
    cfg.r_c = 0.0;
    cfg.k_p = 0.0;
    cfg.k_i = 0.0;
    let cmp = 0.3 * cfg.cntr_max;
    let x = open_loop_orbit(&cfg, cmp).unwrap();
    let (_, wf) = run_cycles(&cfg, SimState { x, ..SimState::at_rest(cmp) }, 1, &Probes::grid(4000)).unwrap();
    let p_in = wf.cycles[0].input_energy / cfg.t_s;
    let p_out = wf.v_o.iter().map(|v| v * v / cfg.r_ld).sum::<f64>() / wf.len() as f64;
    assert!((p_in - p_out).abs() / p_in < 1e-4, "{p_in} vs {p_out}");
}

#[test]
fn grid_density_does_not_change_the_trajectory() {
    let cfg = table3();
    let init = find_steady_state(&cfg).unwrap().state;
    let inj = Injection {
        point: InjectionPoint::AnalogSensedPath,
        amplitude: 0.01,
        f_hz: 1e3,
    };
    let run = |grid: usize| {
        let mut sim = Simulator::new(&cfg, init).unwrap();
        sim.set_injection(Some(inj));
        let wf = sim.run(50, &Probes::grid(grid));
        (sim.state, wf.cycles.iter().map(|c| c.x_start).collect::<Vec<_>>())
    };
    let (a, xa) = run(200);
    let (b, xb) = run(400);
    for (p, q) in xa.iter().zip(&xb).chain([(&a.x, &b.x)]) {
        for i in 0..2 {
            assert!((p[i] - q[i]).abs() <= 1e-12 * p[i].abs().max(1e-3));
        }
    }
}

#[test]
fn sampling_instant_tracks_the_on_interval_center() {
    let cfg = stable(Modulation::Tem, SamplingPosition::OnCenter);
    let init = find_steady_state(&cfg).unwrap().state;
    let delta = 0.01;
    let sample_time = |perturb: bool| {
        let mut sim = Simulator::new(&cfg, init).unwrap();
        sim.run(3, &Probes::none());
        if perturb {
            sim.perturb_shadow(delta);
        }
        let wf = sim.run(1, &Probes::events());
        wf.samples[0].t
    };
    let shift = sample_time(true) - sample_time(false);
    let want = 0.5 * delta * cfg.t_s / cfg.cntr_max;
    assert!((shift - want).abs() < 1e-9, "{shift} vs {want}");
    assert!((shift - want).abs() < 1e-15);
}

#[test]
fn shadow_write_does_not_move_current_edges() {
    // On-center sampling writes the shadow register before the falling
    // (TEM) or after the rising (LEM) edge of the same cycle.
    for m in [Modulation::Tem, Modulation::Lem] {
        let cfg = stable(m, SamplingPosition::OnCenter);
        let mut init = find_steady_state(&cfg).unwrap().state;
        init.cycle_index = 1;
        let edges = |amplitude: f64| {
            let mut sim = Simulator::new(&cfg, init).unwrap();
            sim.set_injection(Some(Injection {
                point: InjectionPoint::DigitalSummingNode,
                amplitude,
                f_hz: cfg.f_s() / 4.0,
            }));
            let wf = sim.run(2, &Probes::events());
            assert!(wf.samples[0].cmp_out != init.cmp_active || amplitude == 0.0);
            wf.edges
        };
        let plain = edges(0.0);
        let disturbed = edges(0.3);
        assert_eq!(plain[..2], disturbed[..2], "{m}");
        assert_ne!(plain[2..], disturbed[2..], "{m}");
    }
}

#[test]
fn reference_gains_oscillate_with_on_center_trailing_edge() {
    let cfg = table3().with_modulation(Modulation::Tem, SamplingPosition::OnCenter);
    assert!(matches!(find_steady_state(&cfg), Err(Error::NoConvergence { .. })));
}

#[test]
fn excessive_gain_does_not_converge() {
    let mut cfg = table3();
    cfg.k_p = 3.0;
    match find_steady_state(&cfg) {
        Err(Error::NoConvergence { cycles, residual }) => {
            assert_eq!(cycles, STEADY_STATE_MAX_CYCLES);
            assert!(residual > STEADY_STATE_TOL);
        }
        other => panic!("expected NoConvergence, got {other:?}"),
    }
}

#[test]
fn zero_gains_hold_the_initial_compare_value() {
    let mut cfg = table3();
    cfg.k_p = 0.0;
    cfg.k_i = 0.0;
    let ss = find_steady_state(&cfg).unwrap();
    let d = operating_point(&cfg).unwrap().duty;
    assert!((ss.op.duty - d).abs() < 1e-12);
    assert_eq!(ss.state.cmp_active, d * cfg.cntr_max);
}

#[test]
fn schedule_orders_events() {
    let cfg = table3().with_modulation(Modulation::Tem, SamplingPosition::OffCenter);
    let s = CycleSchedule::plan(&cfg, 0.3, 0.3);
    let kinds: Vec<_> = s.events.iter().map(|e| e.kind).collect();
    assert_eq!(
        kinds,
        [EventKind::Load, EventKind::Edge { on: true }, EventKind::Edge { on: false }, EventKind::Sample]
    );
    let t_on = 0.25 * cfg.t_s;
    assert!((s.events[2].offset - t_on).abs() < 1e-18);
    assert!((s.events[3].offset - 0.5 * (t_on + cfg.t_s)).abs() < 1e-18);

    let sym = CycleSchedule::plan(&cfg.clone().with_modulation(Modulation::Sym, SamplingPosition::OnCenter), 0.6, 0.3);
    let kinds: Vec<_> = sym.events.iter().map(|e| e.kind).collect();
    assert_eq!(
        kinds,
        [EventKind::Sample, EventKind::Edge { on: false }, EventKind::Load, EventKind::Edge { on: true }]
    );
}

#[test]
fn tie_puts_sample_before_edge() {
    let cfg = table3().with_modulation(Modulation::Tem, SamplingPosition::OnCenter);
    let s = CycleSchedule::plan(&cfg, 0.0, 0.0);
    assert!(s.events.iter().all(|e| e.kind != EventKind::Edge { on: true }));
    let lem = table3().with_modulation(Modulation::Lem, SamplingPosition::OffCenter);
    let s = CycleSchedule::plan(&lem, lem.cntr_max, lem.cntr_max);
    assert_eq!(s.events[1].kind, EventKind::Sample);
}

#[test]
fn exact_cycle_mean_matches_dense_grid() {
    let cfg = table3();
    let init = find_steady_state(&cfg).unwrap().state;
    let (_, wf) = run_cycles(&cfg, init, 1, &Probes::grid(20000)).unwrap();
    let grid_mean = wf.i_l.iter().sum::<f64>() / wf.len() as f64;
    assert!((grid_mean - wf.cycles[0].mean_i_l).abs() < 1e-6);
}

#[test]
fn waveform_csv_shape() {
    let cfg = table3();
    let init = find_steady_state(&cfg).unwrap().state;
    let (_, wf) = run_cycles(&cfg, init, 2, &Probes::grid(10)).unwrap();
    let csv = wf.to_csv();
    let lines: Vec<_> = csv.lines().collect();
    assert_eq!(lines[0], WAVEFORM_CSV_HEADER);
    assert_eq!(lines.len(), 21);
    let flags: usize = lines[1..].iter().map(|l| l.split(',').nth(5).unwrap().parse::<usize>().unwrap()).sum();
    assert_eq!(flags, 2);
}

