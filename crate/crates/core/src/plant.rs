//! Buck power stage: duty-to-current transfer function, DC operating point and
//! the switched state-space description used by the simulator.

use crate::numerics::{expm2, Mat2, Polynomial, RationalTF};
use crate::{Error, Result};

/// Carrier shape of the DPWM.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Modulation {
    /// Trailing edge: up-counting sawtooth, rising edge fixed at the cycle start.
    Tem,
    /// Leading edge: down-counting sawtooth, falling edge fixed at the cycle end.
    Lem,
    /// Symmetric triangular carrier, both edges move.
    Sym,
}

/// Where inside the switching cycle the synchronized ADC samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SamplingPosition {
    OnCenter,
    OffCenter,
}

impl std::str::FromStr for Modulation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "TEM" => Ok(Self::Tem),
            "LEM" => Ok(Self::Lem),
            "SYM" => Ok(Self::Sym),
            _ => Err(Error::InvalidConfig(format!("unknown modulation `{s}`"))),
        }
    }
}

impl std::str::FromStr for SamplingPosition {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace(['_', '-'], "").as_str() {
            "oncenter" | "on" => Ok(Self::OnCenter),
            "offcenter" | "off" => Ok(Self::OffCenter),
            _ => Err(Error::InvalidConfig(format!("unknown sampling position `{s}`"))),
        }
    }
}

impl std::fmt::Display for Modulation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Tem => "TEM",
            Self::Lem => "LEM",
            Self::Sym => "SYM",
        })
    }
}

impl std::fmt::Display for SamplingPosition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::OnCenter => "OnCenter",
            Self::OffCenter => "OffCenter",
        })
    }
}

/// Circuit, controller and modulator parameters (SI units).
///
/// `h_i` is the sensor-plus-ADC gain; `i_ref` is expressed in the same sensed
/// units as the ADC samples. The compare register counts in units of
/// `cntr_max`, so the on-time is `cmp / cntr_max * t_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConverterConfig {
    pub v_in: f64,
    pub l_f: f64,
    pub r_l: f64,
    pub c_f: f64,
    pub r_c: f64,
    pub r_ld: f64,
    pub h_i: f64,
    pub t_s: f64,
    pub cntr_max: f64,
    pub k_p: f64,
    pub k_i: f64,
    pub i_ref: f64,
    pub modulation: Modulation,
    pub sampling: SamplingPosition,
    /// Measured `G_id·H_i`, replacing the circuit-derived plant in the model.
    pub plant_override: Option<RationalTF>,
}

impl ConverterConfig {
    /// Reference design: 12 V to 3.3 V, 100 kHz, TEM with off-interval
    /// centered sampling. The sensor gain is 0.1 and the reference is 10 A.
    pub fn table3() -> Self {
        Self {
            v_in: 12.0,
            l_f: 6e-6,
            r_l: 1e-3,
            c_f: 100e-6,
            r_c: 10e-3,
            r_ld: 0.33,
            h_i: 0.1,
            t_s: 10e-6,
            cntr_max: 1.2,
            k_p: 0.2,
            k_i: 31420.0,
            i_ref: 1.0,
            modulation: Modulation::Tem,
            sampling: SamplingPosition::OffCenter,
            plant_override: None,
        }
    }

    pub fn with_modulation(mut self, modulation: Modulation, sampling: SamplingPosition) -> Self {
        self.modulation = modulation;
        self.sampling = sampling;
        self
    }

    pub fn f_s(&self) -> f64 {
        1.0 / self.t_s
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.v_in >= 0.0) || !self.v_in.is_finite() {
            return Err(Error::InvalidConfig(format!("V_IN must be non-negative, got {}", self.v_in)));
        }
        let positive = [
            ("L_f", self.l_f),
            ("C_f", self.c_f),
            ("R_LD", self.r_ld),
            ("H_i", self.h_i),
            ("T_S", self.t_s),
            ("CNTR_MAX", self.cntr_max),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")));
            }
        }
        for (name, v) in [("R_L", self.r_l), ("R_C", self.r_c)] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be non-negative, got {v}")));
            }
        }
        for (name, v) in [("K_p", self.k_p), ("K_i", self.k_i), ("i_ref", self.i_ref)] {
            if !v.is_finite() {
                return Err(Error::InvalidConfig(format!("{name} must be finite")));
            }
        }
        if let Some(tf) = &self.plant_override {
            if !tf.is_strictly_proper() {
                return Err(Error::InvalidConfig(
                    "plant override must be strictly proper".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Steady-state quantities the small-signal model linearizes around.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OperatingPoint {
    pub duty: f64,
    pub v_out_avg: f64,
    pub i_l_avg: f64,
    /// Slope of the sensed current at the synchronized sampling instant, in
    /// sensed units per second (`H_i` already applied).
    pub slope_at_sample: f64,
}

/// Piecewise-LTI description with states `[i_L, v_C]` and input `V_IN·q(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateSpacePair {
    pub a_on: Mat2,
    pub a_off: Mat2,
    /// Input vectors per volt of `V_IN`.
    pub b_on: [f64; 2],
    pub b_off: [f64; 2],
    /// `v_o = c_out · x`.
    pub c_out: [f64; 2],
    pub v_in: f64,
}

impl StateSpacePair {
    pub fn output_voltage(&self, x: [f64; 2]) -> f64 {
        self.c_out[0] * x[0] + self.c_out[1] * x[1]
    }

    /// `dx/dt` for switch state `q`.
    pub fn derivative(&self, x: [f64; 2], on: bool) -> [f64; 2] {
        let (a, b) = if on {
            (self.a_on, self.b_on)
        } else {
            (self.a_off, self.b_off)
        };
        let ax = a.apply(x);
        [ax[0] + b[0] * self.v_in, ax[1] + b[1] * self.v_in]
    }

    /// Equilibrium of the on-state dynamics, `-A⁻¹ B V_IN`. The off-state
    /// equilibrium is the origin.
    pub fn on_equilibrium(&self) -> [f64; 2] {
        let inv = self.a_on.inverse().expect("buck state matrix is nonsingular");
        let r = inv.apply([self.b_on[0] * self.v_in, self.b_on[1] * self.v_in]);
        [-r[0], -r[1]]
    }
}

/// Duty-to-inductor-current transfer function
/// `V_IN / (sL + R_L + (1/(sC) + R_C) ∥ R_LD)`.
///
/// With a plant override the measured `G_id·H_i` is divided by `H_i`.
pub fn g_id(cfg: &ConverterConfig) -> RationalTF {
    if let Some(tf) = &cfg.plant_override {
        return tf.scale(1.0 / cfg.h_i);
    }
    let rc_ld = cfg.r_c + cfg.r_ld;
    let num = Polynomial::new(vec![cfg.v_in, cfg.v_in * cfg.c_f * rc_ld]);
    let den = Polynomial::new(vec![
        cfg.r_l + cfg.r_ld,
        cfg.l_f + cfg.r_l * cfg.c_f * rc_ld + cfg.r_ld * cfg.c_f * cfg.r_c,
        cfg.l_f * cfg.c_f * rc_ld,
    ]);
    RationalTF::continuous(num, den).expect("denominator has a positive constant term")
}

/// DC operating point from the current reference, with the sampling-instant
/// slope evaluated from the average output voltage.
pub fn operating_point(cfg: &ConverterConfig) -> Result<OperatingPoint> {
    cfg.validate()?;
    let i_l_avg = cfg.i_ref / cfg.h_i;
    let v_out_avg = i_l_avg * cfg.r_ld;
    let duty = i_l_avg * (cfg.r_l + cfg.r_ld) / cfg.v_in;
    if !(duty > 0.0 && duty < 1.0) {
        return Err(Error::DutyOutOfRange(duty));
    }
    let slope_at_sample = match cfg.sampling {
        SamplingPosition::OnCenter => cfg.h_i * (cfg.v_in - v_out_avg) / cfg.l_f,
        SamplingPosition::OffCenter => -cfg.h_i * v_out_avg / cfg.l_f,
    };
    Ok(OperatingPoint {
        duty,
        v_out_avg,
        i_l_avg,
        slope_at_sample,
    })
}

/// Operating point of the switched circuit: the constant-duty periodic
/// orbit whose synchronized sample equals `i_ref`, which is what an
/// integrating controller settles to.
///
/// Measured from the sampling instant the period is on/off/on (on-interval
/// sampling) or off/on/off, split symmetrically, for every carrier. The
/// slope is taken on that orbit, so it includes ripple and parasitic drops
/// that the averaged [`operating_point`] ignores.
pub fn steady_operating_point(cfg: &ConverterConfig) -> Result<OperatingPoint> {
    let ss = state_space(cfg)?;
    let averaged_duty = cfg.i_ref / cfg.h_i * (cfg.r_l + cfg.r_ld) / cfg.v_in;
    let on_center = cfg.sampling == SamplingPosition::OnCenter;
    let x_on = ss.on_equilibrium();
    let stretches = |d: f64| {
        let (t_on, t_off) = (d * cfg.t_s, (1.0 - d) * cfg.t_s);
        if on_center {
            [(0.5 * t_on, true), (t_off, false), (0.5 * t_on, true)]
        } else {
            [(0.5 * t_off, false), (t_on, true), (0.5 * t_off, false)]
        }
    };
    let eq = |on: bool| if on { x_on } else { [0.0, 0.0] };
    let step = |x: [f64; 2], dt: f64, on: bool| {
        let e = expm2(&ss.a_on, dt);
        let x_eq = eq(on);
        let r = e.apply([x[0] - x_eq[0], x[1] - x_eq[1]]);
        [x_eq[0] + r[0], x_eq[1] + r[1]]
    };
    // The one-period map is affine, x ↦ M x + g.
    let orbit_start = |d: f64| -> Result<[f64; 2]> {
        let run = |x0: [f64; 2]| stretches(d).iter().fold(x0, |x, &(dt, on)| step(x, dt, on));
        let g = run([0.0, 0.0]);
        let c0 = run([1.0, 0.0]);
        let c1 = run([0.0, 1.0]);
        let m = Mat2([[c0[0] - g[0], c1[0] - g[0]], [c0[1] - g[1], c1[1] - g[1]]]);
        let i_m = Mat2::IDENTITY - m;
        Ok(i_m.inverse().ok_or(Error::Singular(i_m.det().abs()))?.apply(g))
    };
    let excess = |d: f64| -> Result<f64> { Ok(cfg.h_i * orbit_start(d)?[0] - cfg.i_ref) };

    let (mut lo, mut hi) = (0.0, 1.0);
    if !(excess(lo)? < 0.0 && excess(hi)? > 0.0) {
        return Err(Error::DutyOutOfRange(averaged_duty));
    }
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if excess(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let duty = 0.5 * (lo + hi);
    if !(duty > 0.0 && duty < 1.0) {
        return Err(Error::DutyOutOfRange(duty));
    }

    let a_inv = ss.a_on.inverse().ok_or(Error::Singular(ss.a_on.det().abs()))?;
    let x_s = orbit_start(duty)?;
    let mut x = x_s;
    let mut integral = [0.0, 0.0];
    for (dt, on) in stretches(duty) {
        let x_eq = eq(on);
        let d = [x[0] - x_eq[0], x[1] - x_eq[1]];
        let growth = a_inv * (expm2(&ss.a_on, dt) - Mat2::IDENTITY);
        let gd = growth.apply(d);
        integral[0] += x_eq[0] * dt + gd[0];
        integral[1] += x_eq[1] * dt + gd[1];
        x = step(x, dt, on);
    }
    let mean = [integral[0] / cfg.t_s, integral[1] / cfg.t_s];
    Ok(OperatingPoint {
        duty,
        v_out_avg: ss.output_voltage(mean),
        i_l_avg: mean[0],
        slope_at_sample: cfg.h_i * ss.derivative(x_s, on_center)[0],
    })
}

/// Operating point the loop model is linearized around: the exact switched
/// orbit of the configured circuit. A measured plant override replaces only
/// the small-signal plant; the orbit still comes from the circuit values.
pub fn model_operating_point(cfg: &ConverterConfig) -> Result<OperatingPoint> {
    if cfg.plant_override.is_some() {
        let circuit = ConverterConfig { plant_override: None, ..cfg.clone() };
        steady_operating_point(&circuit)
    } else {
        steady_operating_point(cfg)
    }
}

/// Switched state-space matrices derived from KVL/KCL of the power stage.
pub fn state_space(cfg: &ConverterConfig) -> Result<StateSpacePair> {
    if cfg.plant_override.is_some() {
        return Err(Error::OverrideNotSimulable);
    }
    cfg.validate()?;
    let div = cfg.r_ld / (cfg.r_ld + cfg.r_c);
    let a = Mat2([
        [-(cfg.r_l + div * cfg.r_c) / cfg.l_f, -div / cfg.l_f],
        [div / cfg.c_f, -1.0 / (cfg.c_f * (cfg.r_ld + cfg.r_c))],
    ]);
    Ok(StateSpacePair {
        a_on: a,
        a_off: a,
        b_on: [1.0 / cfg.l_f, 0.0],
        b_off: [0.0, 0.0],
        c_out: [div * cfg.r_c, div],
        v_in: cfg.v_in,
    })
}
