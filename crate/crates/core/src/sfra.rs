//! Loop-gain measurement on the simulator by sinusoidal injection.
//!
//! Each point injects one coherent sinusoid, lets the loop settle, then
//! extracts the probe-frequency component on both sides of the injection
//! point over an integer number of perturbation periods.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::bode::{BodeCurve, BodePoint, Quantity};
use crate::numerics::fourier_coeff;
use crate::plant::ConverterConfig;
use crate::sim::{find_steady_state, Injection, Probes, SimState, Simulator, SteadyState};
use crate::{Error, Result};

pub use crate::sim::InjectionPoint;

/// Which loop quantity a sweep measures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Measurement {
    /// Digital loop gain, injection at the summing node.
    Digital,
    /// Analog loop gain, series injection ahead of the ADC.
    Analog,
    /// Reference-to-sensed-current closed-loop response.
    ClosedLoop,
}

impl Measurement {
    pub fn injection_point(self) -> InjectionPoint {
        match self {
            Self::Digital => InjectionPoint::DigitalSummingNode,
            Self::Analog => InjectionPoint::AnalogSensedPath,
            Self::ClosedLoop => InjectionPoint::Reference,
        }
    }

    pub fn quantity(self) -> Quantity {
        match self {
            Self::Digital => Quantity::MeasuredDigital,
            Self::Analog => Quantity::MeasuredAnalog,
            Self::ClosedLoop => Quantity::MeasuredClosedLoop,
        }
    }
}

impl std::str::FromStr for Measurement {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "digital" => Ok(Self::Digital),
            "analog" => Ok(Self::Analog),
            "closedloop" | "closed_loop" | "closed-loop" => Ok(Self::ClosedLoop),
            _ => Err(Error::InvalidConfig(format!("unknown measurement `{s}`"))),
        }
    }
}

impl std::fmt::Display for Measurement {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Digital => "digital",
            Self::Analog => "analog",
            Self::ClosedLoop => "closedloop",
        })
    }
}

/// Injection settings shared by the points of a sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InjectionSpec {
    pub point: InjectionPoint,
    pub f_p: f64,
    /// Sensed units.
    pub amplitude: f64,
    /// `None` selects `max(2000, 20 f_S / f_p)`.
    pub settle_cycles: Option<usize>,
    pub measure_periods: usize,
    /// Largest denominator `q` of the coherent ratio `f_p / f_S = p / q`.
    pub max_denominator: u64,
    /// Largest relative snap error accepted before `q` grows further.
    pub snap_tolerance: f64,
}

impl InjectionSpec {
    pub fn new(point: InjectionPoint, f_p: f64) -> Self {
        Self {
            point,
            f_p,
            amplitude: 0.01,
            settle_cycles: None,
            measure_periods: 2,
            max_denominator: 100_000,
            snap_tolerance: 1e-3,
        }
    }

    pub fn settle_for(&self, f_s: f64, f_p: f64) -> usize {
        self.settle_cycles
            .unwrap_or_else(|| 2000usize.max((20.0 * f_s / f_p).ceil() as usize))
    }
}

/// A probe frequency `f_S·p/q` with `p/q` in lowest terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoherentFrequency {
    pub requested: f64,
    pub p: u64,
    pub q: u64,
    pub f_hz: f64,
}

fn gcd(a: u64, b: u64) -> u64 {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Snaps `f_req` to the coherent ratio with the smallest denominator whose
/// relative error is within `tol`, or to the closest ratio with `q ≤ max_q`.
///
/// `max_ratio` bounds `f/f_S`: 0.5 for sequences sampled once per cycle.
pub fn snap_frequency(f_req: f64, f_s: f64, max_q: u64, tol: f64, max_ratio: f64) -> Result<CoherentFrequency> {
    if !(f_req > 0.0) || !f_req.is_finite() {
        return Err(Error::InvalidFrequency(format!("{f_req} Hz")));
    }
    let r = f_req / f_s;
    if r >= max_ratio {
        return Err(Error::AboveNyquist { f_hz: f_req });
    }
    let mut best: Option<(f64, u64, u64)> = None;
    for q in 1..=max_q.max(1) {
        let p = ((r * q as f64).round() as u64).max(1);
        if p == 0 || p as f64 >= max_ratio * q as f64 {
            continue;
        }
        let err = (p as f64 / q as f64 - r).abs() / r;
        if best.is_none_or(|(e, _, _)| err < e) {
            best = Some((err, p, q));
        }
        if err <= tol {
            break;
        }
    }
    let (_, p, q) = best.ok_or_else(|| {
        Error::InvalidFrequency(format!("{f_req} Hz has no coherent ratio with q <= {max_q}"))
    })?;
    let g = gcd(p, q);
    let (p, q) = (p / g, q / g);
    Ok(CoherentFrequency {
        requested: f_req,
        p,
        q,
        f_hz: f_s * p as f64 / q as f64,
    })
}

/// One measured frequency point.
///
/// For loop gains `gain = −pre/post` (upstream over downstream of the
/// injection); for the closed-loop response `gain = post/pre` with `pre` the
/// reference component.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasuredPoint {
    pub f_requested: f64,
    pub f_p: f64,
    pub pre: Complex64,
    pub post: Complex64,
    pub gain: Complex64,
    pub window_cycles: usize,
    pub settle_cycles: usize,
}

/// Measures one point starting from a known periodic steady state.
pub fn measure_from(cfg: &ConverterConfig, steady: &SimState, spec: &InjectionSpec) -> Result<MeasuredPoint> {
    let f_s = cfg.f_s();
    let max_ratio = match spec.point {
        InjectionPoint::AnalogSensedPath => 2.0 + 1e-12,
        _ => 0.5,
    };
    let coh = snap_frequency(spec.f_p, f_s, spec.max_denominator, spec.snap_tolerance, max_ratio)?;
    if spec.measure_periods == 0 || !(spec.amplitude > 0.0) {
        return Err(Error::InvalidConfig("injection needs positive amplitude and periods".into()));
    }
    let window = (coh.q as usize) * spec.measure_periods;
    let settle = spec.settle_for(f_s, coh.f_hz);

    let mut sim = Simulator::new(cfg, *steady)?;
    sim.set_injection(Some(Injection {
        point: spec.point,
        amplitude: spec.amplitude,
        f_hz: coh.f_hz,
    }));
    sim.run(settle, &Probes::none());
    let probes = Probes {
        grid_per_cycle: 0,
        events: true,
        spectral_hz: Some(coh.f_hz),
    };
    let wf = sim.run(window, &probes);
    if wf.samples.iter().any(|s| s.clamped) {
        return Err(Error::ClampDuringMeasure);
    }

    // Coefficient of A·sin(ωt) over whole periods, absolute time origin.
    let injected = Complex64::new(0.0, -spec.amplitude);
    let (pre, post, gain) = match spec.point {
        InjectionPoint::DigitalSummingNode => {
            let a: Vec<f64> = wf.samples.iter().map(|s| s.adc).collect();
            let b: Vec<f64> = wf.samples.iter().map(|s| s.controller_input).collect();
            let pre = fourier_coeff(&a, cfg.t_s, coh.f_hz)?;
            let post = fourier_coeff(&b, cfg.t_s, coh.f_hz)?;
            (pre, post, -pre / post)
        }
        InjectionPoint::AnalogSensedPath => {
            let spectrum = wf.spectrum.expect("spectral probe requested");
            let u = spectrum.coeff(0) * cfg.h_i;
            let w = u + injected;
            (u, w, -u / w)
        }
        InjectionPoint::Reference => {
            let spectrum = wf.spectrum.expect("spectral probe requested");
            let u = spectrum.coeff(0) * cfg.h_i;
            (injected, u, u / injected)
        }
    };
    if !(gain.re.is_finite() && gain.im.is_finite()) {
        return Err(Error::Singular(post.norm()));
    }
    Ok(MeasuredPoint {
        f_requested: coh.requested,
        f_p: coh.f_hz,
        pre,
        post,
        gain,
        window_cycles: window,
        settle_cycles: settle,
    })
}

fn steady(cfg: &ConverterConfig) -> Result<SteadyState> {
    find_steady_state(cfg).map_err(|e| Error::NoSteadyState(e.to_string()))
}

fn measure_with(cfg: &ConverterConfig, f_p: f64, spec: &InjectionSpec, point: InjectionPoint) -> Result<MeasuredPoint> {
    let ss = steady(cfg)?;
    let spec = InjectionSpec { point, f_p, ..*spec };
    measure_from(cfg, &ss.state, &spec)
}

/// Digital loop gain `−A/B`, with `a[k]` the converted samples and
/// `b[k] = a[k] + p[k]` the controller input.
pub fn measure_digital_loop(cfg: &ConverterConfig, f_p: f64, spec: &InjectionSpec) -> Result<MeasuredPoint> {
    measure_with(cfg, f_p, spec, InjectionPoint::DigitalSummingNode)
}

/// Analog loop gain `−U/W` across a series source between the continuous
/// sensed current `u` and the ADC input `w = u + v_p`.
pub fn measure_analog_loop(cfg: &ConverterConfig, f_p: f64, spec: &InjectionSpec) -> Result<MeasuredPoint> {
    measure_with(cfg, f_p, spec, InjectionPoint::AnalogSensedPath)
}

/// Closed-loop response from a sinusoidal reference to the sensed current.
pub fn measure_closed_loop(cfg: &ConverterConfig, f_p: f64, spec: &InjectionSpec) -> Result<MeasuredPoint> {
    measure_with(cfg, f_p, spec, InjectionPoint::Reference)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub requested: f64,
    pub outcome: Result<MeasuredPoint>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Successful points, ordered by measured frequency.
    pub curve: BodeCurve,
    /// Every requested point in request order.
    pub entries: Vec<SweepEntry>,
}

impl SweepResult {
    pub fn success_fraction(&self) -> f64 {
        if self.entries.is_empty() {
            return 1.0;
        }
        self.entries.iter().filter(|e| e.outcome.is_ok()).count() as f64 / self.entries.len() as f64
    }
}

/// Measures every frequency independently and in parallel from one steady
/// state. Point failures are kept in `entries`; only a missing steady state
/// fails the whole sweep.
pub fn sweep(cfg: &ConverterConfig, freqs: &[f64], which: Measurement, base: &InjectionSpec) -> Result<SweepResult> {
    if freqs.is_empty() {
        return Ok(SweepResult {
            curve: BodeCurve::new(which.quantity()),
            entries: Vec::new(),
        });
    }
    let ss = steady(cfg)?;
    let entries: Vec<SweepEntry> = freqs
        .par_iter()
        .map(|&f| {
            let spec = InjectionSpec {
                point: which.injection_point(),
                f_p: f,
                ..*base
            };
            SweepEntry {
                requested: f,
                outcome: measure_from(cfg, &ss.state, &spec),
            }
        })
        .collect();
    let mut points: Vec<BodePoint> = entries
        .iter()
        .filter_map(|e| e.outcome.as_ref().ok())
        .map(|m| BodePoint {
            f_hz: m.f_p,
            value: m.gain,
        })
        .collect();
    points.sort_by(|a, b| a.f_hz.total_cmp(&b.f_hz));
    Ok(SweepResult {
        curve: BodeCurve::from_points(which.quantity(), points),
        entries,
    })
}
