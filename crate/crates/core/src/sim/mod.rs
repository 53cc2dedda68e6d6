//! Event-driven simulation of the closed current loop: exact piecewise-LTI
//! propagation of the power stage between switching and sampling events, a
//! counter-based DPWM with shadow/active compare registers, a synchronized
//! ADC and a PI controller with conditional integration.

mod waveform;

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::numerics::{expm2, Mat2};
use crate::plant::{state_space, ConverterConfig, Modulation, OperatingPoint, SamplingPosition, StateSpacePair};
use crate::{Error, Result};

pub use waveform::{CycleRecord, EdgeRecord, SampleRecord, SpectralSums, Waveform, WAVEFORM_CSV_HEADER};

/// Complete machine state at an instant.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimState {
    /// `[i_L, v_C]`.
    pub x: [f64; 2],
    pub t: f64,
    pub cycle_index: u64,
    pub integ: f64,
    pub cmp_active: f64,
    pub cmp_shadow: f64,
    pub last_sample: f64,
}

impl SimState {
    /// De-energized plant at `t = 0` with both compare registers and the
    /// integrator holding `cmp`.
    pub fn at_rest(cmp: f64) -> Self {
        Self {
            x: [0.0, 0.0],
            t: 0.0,
            cycle_index: 0,
            integ: cmp,
            cmp_active: cmp,
            cmp_shadow: cmp,
            last_sample: 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EventKind {
    Sample,
    Edge { on: bool },
    /// Shadow register copied into the active compare register.
    Load,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduledEvent {
    /// Offset from the cycle start, seconds.
    pub offset: f64,
    pub kind: EventKind,
}

/// Ordered events of one carrier period.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleSchedule {
    pub events: Vec<ScheduledEvent>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Counter {
    Up,
    Down,
}

/// A monotone stretch of the counter. The active compare value is constant
/// inside it, so it holds at most one edge.
#[derive(Debug, Clone, Copy)]
struct Segment {
    start: f64,
    end: f64,
    counter: Counter,
    load_at_start: bool,
}

const fn seg(start: f64, end: f64, counter: Counter, load_at_start: bool) -> Segment {
    Segment {
        start,
        end,
        counter,
        load_at_start,
    }
}

const TEM_SEGMENTS: [Segment; 1] = [seg(0.0, 1.0, Counter::Up, true)];
const LEM_SEGMENTS: [Segment; 1] = [seg(0.0, 1.0, Counter::Down, true)];
const SYM_ON_SEGMENTS: [Segment; 2] = [seg(0.0, 0.5, Counter::Up, false), seg(0.5, 1.0, Counter::Down, true)];
const SYM_OFF_SEGMENTS: [Segment; 2] = [seg(0.0, 0.5, Counter::Up, true), seg(0.5, 1.0, Counter::Down, false)];

fn segments(modulation: Modulation, sampling: SamplingPosition) -> &'static [Segment] {
    match (modulation, sampling) {
        (Modulation::Tem, _) => &TEM_SEGMENTS,
        (Modulation::Lem, _) => &LEM_SEGMENTS,
        (Modulation::Sym, SamplingPosition::OnCenter) => &SYM_ON_SEGMENTS,
        (Modulation::Sym, SamplingPosition::OffCenter) => &SYM_OFF_SEGMENTS,
    }
}

/// Switch state at the segment start and the edge offset inside the segment.
fn segment_switching(s: &Segment, frac: f64, dur: f64) -> (bool, Option<f64>) {
    let inside = frac > 0.0 && frac < 1.0;
    match s.counter {
        Counter::Up => (frac > 0.0, inside.then_some(frac * dur)),
        Counter::Down => (frac >= 1.0, inside.then_some((1.0 - frac) * dur)),
    }
}

/// Sampling offset inside segment `idx`, or `None` if the sample lies elsewhere.
fn segment_sample(
    modulation: Modulation,
    sampling: SamplingPosition,
    idx: usize,
    frac: f64,
    dur: f64,
) -> Option<f64> {
    let t_on = frac * dur;
    match (modulation, sampling) {
        (Modulation::Tem, SamplingPosition::OnCenter) => Some(0.5 * t_on),
        (Modulation::Tem, SamplingPosition::OffCenter) => Some(0.5 * (t_on + dur)),
        (Modulation::Lem, SamplingPosition::OnCenter) => Some(dur - 0.5 * t_on),
        (Modulation::Lem, SamplingPosition::OffCenter) => Some(0.5 * (dur - t_on)),
        // Counter at zero and at its maximum respectively.
        (Modulation::Sym, SamplingPosition::OnCenter) => (idx == 0).then_some(0.0),
        (Modulation::Sym, SamplingPosition::OffCenter) => (idx == 1).then_some(0.0),
    }
}

impl CycleSchedule {
    /// Events of one period given the active compare value in each counter
    /// segment (the second value only matters for the symmetric carrier).
    pub fn plan(cfg: &ConverterConfig, cmp_first: f64, cmp_second: f64) -> Self {
        let segs = segments(cfg.modulation, cfg.sampling);
        let mut events = Vec::with_capacity(4);
        let parts: Vec<_> = segs
            .iter()
            .enumerate()
            .map(|(idx, s)| {
                let cmp = if idx == 0 { cmp_first } else { cmp_second };
                let frac = (cmp / cfg.cntr_max).clamp(0.0, 1.0);
                let dur = (s.end - s.start) * cfg.t_s;
                let (q0, edge) = segment_switching(s, frac, dur);
                let q_end = q0 ^ edge.is_some();
                (s, frac, dur, q0, edge, q_end)
            })
            .collect();
        for (idx, &(s, frac, dur, q0, edge, _)) in parts.iter().enumerate() {
            let base = s.start * cfg.t_s;
            if s.load_at_start {
                events.push(ScheduledEvent {
                    offset: base,
                    kind: EventKind::Load,
                });
            }
            // The period repeats, so the first segment continues the last one.
            let q_before = parts[(idx + parts.len() - 1) % parts.len()].5;
            if q0 != q_before {
                events.push(ScheduledEvent {
                    offset: base,
                    kind: EventKind::Edge { on: q0 },
                });
            }
            let mut local = Vec::with_capacity(2);
            if let Some(o) = segment_sample(cfg.modulation, cfg.sampling, idx, frac, dur) {
                local.push(ScheduledEvent {
                    offset: base + o,
                    kind: EventKind::Sample,
                });
            }
            if let Some(o) = edge {
                local.push(ScheduledEvent {
                    offset: base + o,
                    kind: EventKind::Edge { on: !q0 },
                });
            }
            // Stable sort keeps the sample ahead of a coinciding edge.
            local.sort_by(|a, b| a.offset.total_cmp(&b.offset));
            events.extend(local);
        }
        Self { events }
    }
}

/// Where a test sinusoid enters the loop.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum InjectionPoint {
    /// Added to the converted sample before the error computation:
    /// `p[k] = A sin(2π f k T_S)`.
    DigitalSummingNode,
    /// Voltage source in series with the continuous sensed current ahead of
    /// the ADC: `v_p(t) = A sin(2π f t)`.
    AnalogSensedPath,
    /// Added to the current reference, evaluated at the sampling instant.
    Reference,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Injection {
    pub point: InjectionPoint,
    pub amplitude: f64,
    pub f_hz: f64,
}

impl Injection {
    fn at(&self, t: f64) -> f64 {
        self.amplitude * (TAU * (self.f_hz * t).fract()).sin()
    }
}

/// What a run records besides advancing the state.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Probes {
    /// Uniform resample points per carrier period; zero disables the grid.
    pub grid_per_cycle: usize,
    /// Keep sample, edge and cycle logs.
    pub events: bool,
    /// Accumulate exact Fourier integrals of the state at this frequency.
    pub spectral_hz: Option<f64>,
}

impl Probes {
    pub fn none() -> Self {
        Self::default()
    }

    pub fn events() -> Self {
        Self {
            events: true,
            ..Self::default()
        }
    }

    pub fn grid(grid_per_cycle: usize) -> Self {
        Self {
            grid_per_cycle,
            events: true,
            spectral_hz: None,
        }
    }
}

/// Complex 2×2 `(A − jωI)⁻¹ (e^{AΔ} e^{−jωΔ} − I)`, i.e. `∫₀^Δ e^{Aτ} e^{−jωτ} dτ`.
fn weighted_integral(a: &Mat2, e: &Mat2, omega: f64, dt: f64) -> [[Complex64; 2]; 2] {
    let j = Complex64::new(0.0, 1.0);
    let rot = Complex64::from_polar(1.0, -omega * dt);
    let m = [
        [Complex64::from(a.0[0][0]) - j * omega, Complex64::from(a.0[0][1])],
        [Complex64::from(a.0[1][0]), Complex64::from(a.0[1][1]) - j * omega],
    ];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let inv = [[m[1][1] / det, -m[0][1] / det], [-m[1][0] / det, m[0][0] / det]];
    let r = [
        [e.0[0][0] * rot - 1.0, e.0[0][1] * rot],
        [e.0[1][0] * rot, e.0[1][1] * rot - 1.0],
    ];
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for i in 0..2 {
        for k in 0..2 {
            out[i][k] = inv[i][0] * r[0][k] + inv[i][1] * r[1][k];
        }
    }
    out
}

/// `∫₀^Δ e^{−jωτ} dτ`.
fn scalar_integral(omega: f64, dt: f64) -> Complex64 {
    if omega == 0.0 {
        Complex64::from(dt)
    } else {
        (Complex64::from(1.0) - Complex64::from_polar(1.0, -omega * dt)) / Complex64::new(0.0, omega)
    }
}

/// `∫_{t0}^{t0+Δ} x(t) e^{−jωt} dt` for `x(t) = x_eq + e^{A(t−t0)} d`.
fn segment_integral(a: &Mat2, e: &Mat2, x_eq: [f64; 2], d: [f64; 2], t0: f64, dt: f64, omega: f64) -> [Complex64; 2] {
    let k = weighted_integral(a, e, omega, dt);
    let s = scalar_integral(omega, dt);
    let phase = if omega == 0.0 {
        Complex64::from(1.0)
    } else {
        Complex64::from_polar(1.0, -TAU * ((omega / TAU) * t0).fract())
    };
    [
        phase * (s * x_eq[0] + k[0][0] * d[0] + k[0][1] * d[1]),
        phase * (s * x_eq[1] + k[1][0] * d[0] + k[1][1] * d[1]),
    ]
}

#[derive(Debug, Default)]
struct CycleAccum {
    on_time: f64,
    integral: [f64; 2],
    on_integral_il: f64,
}

/// Cycle-accurate simulator of one converter configuration.
#[derive(Debug, Clone)]
pub struct Simulator {
    cfg: ConverterConfig,
    ss: StateSpacePair,
    x_on_eq: [f64; 2],
    injection: Option<Injection>,
    pub state: SimState,
}

impl Simulator {
    pub fn new(cfg: &ConverterConfig, initial: SimState) -> Result<Self> {
        let ss = state_space(cfg)?;
        let x_on_eq = ss.on_equilibrium();
        let mut state = initial;
        state.cmp_active = state.cmp_active.clamp(0.0, cfg.cntr_max);
        state.cmp_shadow = state.cmp_shadow.clamp(0.0, cfg.cntr_max);
        Ok(Self {
            cfg: cfg.clone(),
            ss,
            x_on_eq,
            injection: None,
            state,
        })
    }

    pub fn config(&self) -> &ConverterConfig {
        &self.cfg
    }

    pub fn set_injection(&mut self, injection: Option<Injection>) {
        self.injection = injection;
    }

    /// Adds `delta` to the pending compare value, as if the controller had
    /// written a perturbed output.
    pub fn perturb_shadow(&mut self, delta: f64) {
        self.state.cmp_shadow = (self.state.cmp_shadow + delta).clamp(0.0, self.cfg.cntr_max);
    }

    fn cycle_start(&self, index: u64) -> f64 {
        index as f64 * self.cfg.t_s
    }

    fn dynamics(&self, on: bool) -> (&Mat2, [f64; 2]) {
        if on {
            (&self.ss.a_on, self.x_on_eq)
        } else {
            (&self.ss.a_off, [0.0, 0.0])
        }
    }

    fn injected(&self, point: InjectionPoint, t: f64, k: u64) -> f64 {
        match self.injection {
            Some(inj) if inj.point == point => match point {
                InjectionPoint::DigitalSummingNode => inj.at(k as f64 * self.cfg.t_s),
                _ => inj.at(t),
            },
            _ => 0.0,
        }
    }

    /// Propagates with fixed switch state up to `t_end`, recording grid
    /// points in `[t, t_end)` and the exact integrals of the stretch.
    fn advance(&mut self, t_end: f64, on: bool, probes: &Probes, acc: &mut CycleAccum, wf: &mut Waveform) {
        let t0 = self.state.t;
        let dt = t_end - t0;
        if dt <= 0.0 {
            return;
        }
        let (a, x_eq) = self.dynamics(on);
        let a = *a;
        let d = [self.state.x[0] - x_eq[0], self.state.x[1] - x_eq[1]];
        let e = expm2(&a, dt);

        if probes.grid_per_cycle > 0 {
            self.record_grid(t0, t_end, on, &a, x_eq, d, wf);
        }
        if probes.events {
            let s = segment_integral(&a, &e, x_eq, d, t0, dt, 0.0);
            acc.integral[0] += s[0].re;
            acc.integral[1] += s[1].re;
            if on {
                acc.on_time += dt;
                acc.on_integral_il += s[0].re;
            }
        }
        if let (Some(f), Some(sp)) = (probes.spectral_hz, wf.spectrum.as_mut()) {
            let s = segment_integral(&a, &e, x_eq, d, t0, dt, TAU * f);
            sp.integral[0] += s[0];
            sp.integral[1] += s[1];
        }

        let ed = e.apply(d);
        self.state.x = [x_eq[0] + ed[0], x_eq[1] + ed[1]];
        self.state.t = t_end;
    }

    #[allow(clippy::too_many_arguments)]
    fn record_grid(&self, t0: f64, t1: f64, on: bool, a: &Mat2, x_eq: [f64; 2], d: [f64; 2], wf: &mut Waveform) {
        let dt = wf.dt;
        let mut m = (t0 / dt).ceil() as u64;
        while m > 0 && (m - 1) as f64 * dt >= t0 {
            m -= 1;
        }
        while (m as f64) * dt < t0 {
            m += 1;
        }
        let mut step: Option<Mat2> = None;
        let mut prop: Option<Mat2> = None;
        loop {
            let tm = m as f64 * dt;
            if tm >= t1 {
                break;
            }
            let p = match prop {
                None => expm2(a, tm - t0),
                Some(p) => *step.get_or_insert_with(|| expm2(a, dt)) * p,
            };
            prop = Some(p);
            let pd = p.apply(d);
            let x = [x_eq[0] + pd[0], x_eq[1] + pd[1]];
            wf.t.push(tm);
            wf.i_l.push(x[0]);
            wf.v_o.push(self.ss.output_voltage(x));
            wf.q.push(on as u8);
            wf.cmp_active.push(self.state.cmp_active);
            wf.adc_side
                .push(self.cfg.h_i * x[0] + self.injected(InjectionPoint::AnalogSensedPath, tm, 0));
            wf.sample_at_row.push(None);
            m += 1;
        }
    }

    fn take_sample(&mut self, on: bool, probes: &Probes, wf: &mut Waveform) {
        let cfg = &self.cfg;
        let t = self.state.t;
        let k = self.state.cycle_index;
        let sensed = cfg.h_i * self.state.x[0];
        let adc = sensed + self.injected(InjectionPoint::AnalogSensedPath, t, k);
        let input = adc + self.injected(InjectionPoint::DigitalSummingNode, t, k);
        let reference = cfg.i_ref + self.injected(InjectionPoint::Reference, t, k);
        let e = reference - input;
        let integ = self.state.integ + cfg.k_i * cfg.t_s * e;
        let out = cfg.k_p * e + integ;
        let clamped = !(0.0..=cfg.cntr_max).contains(&out);
        if !clamped {
            self.state.integ = integ;
        }
        self.state.cmp_shadow = out.clamp(0.0, cfg.cntr_max);
        self.state.last_sample = adc;

        if probes.events {
            let slope = cfg.h_i * self.ss.derivative(self.state.x, on)[0];
            wf.samples.push(SampleRecord {
                cycle: k,
                t,
                sensed,
                adc,
                controller_input: input,
                reference,
                slope,
                cmp_out: self.state.cmp_shadow,
                clamped,
            });
        }
    }

    fn step_cycle(&mut self, probes: &Probes, wf: &mut Waveform) {
        let cfg_mod = self.cfg.modulation;
        let cfg_samp = self.cfg.sampling;
        let t_s = self.cfg.t_s;
        let c_start = self.cycle_start(self.state.cycle_index);
        let c_end = self.cycle_start(self.state.cycle_index + 1);
        self.state.t = c_start;
        let x_start = self.state.x;
        let integ_start = self.state.integ;
        let mut acc = CycleAccum::default();
        let mut cmp_at_start = None;
        let mut prev_q: Option<bool> = wf.edges.last().map(|e| e.on);

        let segs = segments(cfg_mod, cfg_samp);
        for (idx, s) in segs.iter().enumerate() {
            if s.load_at_start {
                self.state.cmp_active = self.state.cmp_shadow;
            }
            cmp_at_start.get_or_insert(self.state.cmp_active);
            let seg_t0 = if idx == 0 { c_start } else { c_start + s.start * t_s };
            let seg_t1 = if s.end >= 1.0 { c_end } else { c_start + s.end * t_s };
            let dur = (s.end - s.start) * t_s;
            let frac = self.state.cmp_active / self.cfg.cntr_max;
            let (mut q, edge) = segment_switching(s, frac, dur);
            if probes.events && prev_q != Some(q) {
                wf.edges.push(EdgeRecord { t: seg_t0, on: q });
            }
            let sample = segment_sample(cfg_mod, cfg_samp, idx, frac, dur);

            let mut pending: [(f64, bool); 2] = [(f64::INFINITY, false); 2];
            if let Some(o) = sample {
                pending[0] = (o, true);
            }
            if let Some(o) = edge {
                pending[1] = (o, false);
            }
            if pending[1].0 < pending[0].0 {
                pending.swap(0, 1);
            }
            for (offset, is_sample) in pending {
                if !offset.is_finite() {
                    continue;
                }
                let t_ev = seg_t0 + offset;
                self.advance(t_ev.min(seg_t1), q, probes, &mut acc, wf);
                if is_sample {
                    self.take_sample(q, probes, wf);
                } else {
                    q = !q;
                    if probes.events {
                        wf.edges.push(EdgeRecord { t: self.state.t, on: q });
                    }
                }
            }
            self.advance(seg_t1, q, probes, &mut acc, wf);
            prev_q = Some(q);
        }

        if probes.events {
            let mean = [acc.integral[0] / t_s, acc.integral[1] / t_s];
            wf.cycles.push(CycleRecord {
                index: self.state.cycle_index,
                t_start: c_start,
                x_start,
                integ_start,
                cmp_active_start: cmp_at_start.unwrap_or(self.state.cmp_active),
                on_time: acc.on_time,
                mean_i_l: mean[0],
                mean_v_o: self.ss.output_voltage(mean),
                input_energy: self.ss.v_in * acc.on_integral_il,
            });
        }
        self.state.cycle_index += 1;
        self.state.t = c_end;
    }

    /// Simulates `n_cycles` whole carrier periods from the current state.
    pub fn run(&mut self, n_cycles: usize, probes: &Probes) -> Waveform {
        let mut wf = Waveform::default();
        if probes.grid_per_cycle > 0 {
            wf.dt = self.cfg.t_s / probes.grid_per_cycle as f64;
            let n = probes.grid_per_cycle * n_cycles;
            for v in [&mut wf.t, &mut wf.i_l, &mut wf.v_o, &mut wf.cmp_active, &mut wf.adc_side] {
                v.reserve(n);
            }
        }
        if let Some(f) = probes.spectral_hz {
            wf.spectrum = Some(SpectralSums {
                f_hz: f,
                t_start: self.cycle_start(self.state.cycle_index),
                duration: n_cycles as f64 * self.cfg.t_s,
                integral: [Complex64::new(0.0, 0.0); 2],
            });
        }
        for _ in 0..n_cycles {
            self.step_cycle(probes, &mut wf);
        }
        if let Some(&t0) = wf.t.first() {
            let rows = wf.t.len();
            for (k, s) in wf.samples.iter().enumerate() {
                let row = ((s.t - t0) / wf.dt).floor();
                if row >= 0.0 && (row as usize) < rows {
                    wf.sample_at_row[row as usize] = Some(k);
                }
            }
        }
        wf
    }
}

/// Runs `n_cycles` from `initial` and returns the final state with the record.
pub fn run_cycles(cfg: &ConverterConfig, initial: SimState, n_cycles: usize, probes: &Probes) -> Result<(SimState, Waveform)> {
    let mut sim = Simulator::new(cfg, initial)?;
    let wf = sim.run(n_cycles, probes);
    Ok((sim.state, wf))
}

/// Periodic closed-loop operating point found by simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyState {
    /// State at the start of a cycle on the periodic orbit.
    pub state: SimState,
    pub op: OperatingPoint,
    /// Converted sample of the steady cycle, sensed units.
    pub sample: f64,
    /// Sampling instant relative to its cycle start.
    pub sample_offset: f64,
    pub cycles: usize,
    pub residual: f64,
}

impl SteadyState {
    /// `(sample − H_i·mean i_L) / (H_i·mean i_L)`.
    pub fn sample_vs_average_error(&self, h_i: f64) -> f64 {
        let avg = h_i * self.op.i_l_avg;
        (self.sample - avg) / avg
    }
}

pub const STEADY_STATE_TOL: f64 = 1e-10;
pub const STEADY_STATE_MAX_CYCLES: usize = 100_000;

/// Start of the periodic orbit obtained by holding the compare value at
/// `cmp`: the one-cycle map is affine, `x ↦ M x + g`, and its fixed point is
/// `(I − M)⁻¹ g`.
pub fn open_loop_orbit(cfg: &ConverterConfig, cmp: f64) -> Result<[f64; 2]> {
    let mut frozen = cfg.clone();
    frozen.k_p = 0.0;
    frozen.k_i = 0.0;
    let mut sim = Simulator::new(&frozen, SimState::at_rest(cmp))?;
    let mut map = |x: [f64; 2]| {
        sim.state = SimState { x, ..SimState::at_rest(cmp) };
        sim.run(1, &Probes::none());
        sim.state.x
    };
    let g = map([0.0, 0.0]);
    let c0 = map([1.0, 0.0]);
    let c1 = map([0.0, 1.0]);
    let m = Mat2([[c0[0] - g[0], c1[0] - g[0]], [c0[1] - g[1], c1[1] - g[1]]]);
    let inv = (Mat2::IDENTITY - m)
        .inverse()
        .ok_or(Error::Singular((Mat2::IDENTITY - m).det().abs()))?;
    Ok(inv.apply(g))
}

/// Relative change between two cycle-start states.
fn residual(a: &SimState, b: &SimState) -> f64 {
    let rel = |x: f64, y: f64| (x - y).abs() / y.abs().max(x.abs()).max(1e-12);
    rel(a.x[0], b.x[0]).max(rel(a.x[1], b.x[1])).max(rel(a.integ, b.integ))
}

/// Runs the closed loop from `initial` until consecutive cycle starts agree.
pub fn find_steady_state_from(cfg: &ConverterConfig, initial: SimState) -> Result<SteadyState> {
    let mut sim = Simulator::new(cfg, initial)?;
    let mut last = sim.state;
    let mut res = f64::INFINITY;
    for n in 1..=STEADY_STATE_MAX_CYCLES {
        sim.run(1, &Probes::none());
        res = residual(&sim.state, &last);
        last = sim.state;
        if res < STEADY_STATE_TOL {
            let start = sim.state;
            let wf = sim.run(1, &Probes::events());
            let c = wf.cycles[0];
            let s = wf.samples[0];
            let op = OperatingPoint {
                duty: c.on_time / cfg.t_s,
                v_out_avg: c.mean_v_o,
                i_l_avg: c.mean_i_l,
                slope_at_sample: s.slope,
            };
            return Ok(SteadyState {
                state: start,
                op,
                sample: s.adc,
                sample_offset: s.t - c.t_start,
                cycles: n,
                residual: res,
            });
        }
    }
    Err(Error::NoConvergence {
        cycles: STEADY_STATE_MAX_CYCLES,
        residual: res,
    })
}

/// Steady state of the closed loop, starting from the open-loop orbit at the
/// duty the DC balance predicts.
pub fn find_steady_state(cfg: &ConverterConfig) -> Result<SteadyState> {
    let op = crate::plant::operating_point(cfg)?;
    let cmp = op.duty * cfg.cntr_max;
    let x = open_loop_orbit(cfg, cmp)?;
    find_steady_state_from(cfg, SimState { x, ..SimState::at_rest(cmp) })
}

#[cfg(test)]
mod tests;
