//! Analytic small-signal loop gains.
//!
//! The duty-cycle perturbation is an impulse train delayed by the
//! sampling-to-edge time, so the plant seen by the digital compensator is the
//! modified z-transform of `G_id·H_i` plus the feedthrough caused by the
//! sampling instant tracking the PWM interval center. The analog loop gain
//! follows from the digital one without summing sidebands.

mod delay;
mod lifting;

use std::f64::consts::TAU;

use num_complex::Complex64;
use rayon::prelude::*;

pub use delay::{delay_decomposition, sym_delays, DelayDecomposition, SymDelays};
pub use lifting::{g_mz, modified_z};

use crate::bode::{BodeCurve, BodePoint, Quantity};
use crate::numerics::{partial_fractions, PartialFractionForm, RationalTF};
use crate::plant::{g_id, model_operating_point, ConverterConfig, Modulation, OperatingPoint};
use crate::{Error, Result};

/// Digital PI `K_p + K_i T_S / (1 - z^{-1})`.
pub fn g_c(cfg: &ConverterConfig, z: Complex64) -> Result<Complex64> {
    let den = 1.0 - z.inv();
    if den.norm() <= 1e-14 {
        return Err(Error::PoleHit { re: z.re, im: z.im });
    }
    Ok(cfg.k_p + cfg.k_i * cfg.t_s / den)
}

/// `1 / G_c(z)`, finite at `z = 1` where the integrator pole sits.
pub fn g_c_inv(cfg: &ConverterConfig, z: Complex64) -> Result<Complex64> {
    let d = 1.0 - z.inv();
    let den = cfg.k_p * d + cfg.k_i * cfg.t_s;
    if den.norm() <= 1e-300 {
        return Err(Error::Singular(den.norm()));
    }
    Ok(d / den)
}

/// Sensitivity of the sampling instant to the previous cycle's on-time.
///
/// With TEM the sampled interval's center moves later by half the on-time
/// increase (the falling edge moves); with LEM the rising edge moves earlier
/// and the center moves earlier by the same half. Either way the on-time that
/// displaces a sample was computed from the sample one cycle before.
fn sync_sensitivity(modulation: Modulation) -> Result<f64> {
    match modulation {
        Modulation::Tem => Ok(0.5),
        Modulation::Lem => Ok(-0.5),
        Modulation::Sym => Err(Error::SymNotApplicable),
    }
}

/// Synchronization feedthrough `σ z^{-1} (di_s/dt) / 2`.
pub fn h_sync(op: &OperatingPoint, cfg: &ConverterConfig, z: Complex64) -> Result<Complex64> {
    let sigma = sync_sensitivity(cfg.modulation)?;
    Ok(sigma * op.slope_at_sample / z)
}

/// How one on-time impulse reaches the power stage.
#[derive(Debug, Clone, Copy, PartialEq)]
enum Modulator {
    /// One edge per cycle.
    Single(DelayDecomposition),
    /// Two edges, each carrying half of the on-time change.
    Pair(DelayDecomposition, DelayDecomposition),
}

impl Modulator {
    /// Continuous delay factor `e^{-sT_D}`, averaged over the two edges of the
    /// symmetric carrier.
    fn delay_factor(&self, s: Complex64) -> Complex64 {
        match self {
            Modulator::Single(d) => (-s * d.total()).exp(),
            Modulator::Pair(a, b) => 0.5 * ((-s * a.total()).exp() + (-s * b.total()).exp()),
        }
    }
}

/// Loop model for one converter configuration and operating point.
#[derive(Debug, Clone)]
pub struct LoopModel {
    cfg: ConverterConfig,
    op: OperatingPoint,
    gid: RationalTF,
    pf: PartialFractionForm,
    modulator: Modulator,
    sync_enabled: bool,
}

impl LoopModel {
    /// Model linearized around [`model_operating_point`].
    pub fn for_config(cfg: &ConverterConfig) -> Result<Self> {
        Self::new(cfg, &model_operating_point(cfg)?)
    }

    pub fn new(cfg: &ConverterConfig, op: &OperatingPoint) -> Result<Self> {
        cfg.validate()?;
        let gid = g_id(cfg);
        let pf = partial_fractions(&gid)?;
        let modulator = match cfg.modulation {
            Modulation::Sym => {
                let (a, b) = sym_delays(cfg.sampling, op.duty, cfg.t_s).decompose(cfg.t_s);
                Modulator::Pair(a, b)
            }
            m => Modulator::Single(delay_decomposition(m, cfg.sampling, op.duty, cfg.t_s)?),
        };
        Ok(Self {
            cfg: cfg.clone(),
            op: *op,
            gid,
            pf,
            modulator,
            sync_enabled: true,
        })
    }

    /// The baseline variant drops the synchronization feedthrough and is
    /// otherwise identical.
    pub fn with_sync(mut self, enabled: bool) -> Self {
        self.sync_enabled = enabled;
        self
    }

    pub fn sync_enabled(&self) -> bool {
        self.sync_enabled
    }

    pub fn config(&self) -> &ConverterConfig {
        &self.cfg
    }

    pub fn operating_point(&self) -> &OperatingPoint {
        &self.op
    }

    pub fn partial_fractions(&self) -> &PartialFractionForm {
        &self.pf
    }

    pub fn g_id(&self) -> &RationalTF {
        &self.gid
    }

    /// Single-edge delay decomposition, `None` for the symmetric carrier.
    pub fn delay(&self) -> Option<DelayDecomposition> {
        match self.modulator {
            Modulator::Single(d) => Some(d),
            Modulator::Pair(..) => None,
        }
    }

    pub fn z_of(&self, s: Complex64) -> Complex64 {
        (s * self.cfg.t_s).exp()
    }

    pub fn h_sync(&self, z: Complex64) -> Result<Complex64> {
        h_sync(&self.op, &self.cfg, z)
    }

    /// Lifted plant part `(1/T_S) Σ_n [M(s) G_id(s) H_i]_{s+jnω_S}` in closed form.
    pub fn g_mz(&self, z: Complex64) -> Result<Complex64> {
        match &self.modulator {
            Modulator::Single(d) => g_mz(&self.pf, d, self.cfg.h_i, z),
            Modulator::Pair(a, b) => Ok(0.5
                * (g_mz(&self.pf, a, self.cfg.h_i, z)? + g_mz(&self.pf, b, self.cfg.h_i, z)?)),
        }
    }

    /// Plant seen by the digital compensator, compare counts to sampled current.
    pub fn g_plant(&self, z: Complex64) -> Result<Complex64> {
        let scale = self.cfg.t_s / self.cfg.cntr_max;
        let mut inner = self.g_mz(z)?;
        if self.sync_enabled && self.cfg.modulation != Modulation::Sym {
            inner += self.h_sync(z)?;
        }
        Ok(scale * inner)
    }

    pub fn g_c(&self, z: Complex64) -> Result<Complex64> {
        g_c(&self.cfg, z)
    }

    fn controller_is_zero(&self) -> bool {
        self.cfg.k_p == 0.0 && self.cfg.k_i == 0.0
    }

    /// Digital loop gain.
    pub fn t_pul(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.g_plant(z)? * self.g_c(z)?)
    }

    fn gid_hi(&self, s: Complex64) -> Result<Complex64> {
        Ok(self.gid.eval(s)? * self.cfg.h_i)
    }

    /// Direct (non-aliased) path `G_c(e^{sT_S}) M(s) G_id(s) H_i / CNTR_MAX`.
    pub fn t0(&self, s: Complex64) -> Result<Complex64> {
        let gc = self.g_c(self.z_of(s))?;
        Ok(gc / self.cfg.cntr_max * self.modulator.delay_factor(s) * self.gid_hi(s)?)
    }

    /// Analog loop gain from the digital one: `T_0 / (1 + T_pul - T_0)`.
    ///
    /// Evaluated with numerator and denominator divided by `G_c`, which keeps
    /// it finite where `G_c` has its pole (`s = jkω_S`).
    pub fn t_i(&self, s: Complex64) -> Result<Complex64> {
        if self.controller_is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let z = self.z_of(s);
        let direct = self.modulator.delay_factor(s) * self.gid_hi(s)? / self.cfg.cntr_max;
        let gc_inv = g_c_inv(&self.cfg, z)?;
        let plant = self.g_plant(z)?;
        let den = gc_inv + plant - direct;
        check_singular(den, gc_inv.norm() + plant.norm() + direct.norm())?;
        Ok(direct / den)
    }

    /// Closed-loop gain `T_i / (1 + T_i)`.
    pub fn t_c(&self, s: Complex64) -> Result<Complex64> {
        let ti = self.t_i(s)?;
        let den = 1.0 + ti;
        check_singular(den, 1.0 + ti.norm())?;
        Ok(ti / den)
    }

    /// Controller-and-modulator gain `-d̂/î_s` with the sideband sum truncated
    /// to `|n| ≤ n_max`.
    pub fn g_cm_series(&self, s: Complex64, n_max: usize) -> Result<Complex64> {
        if self.controller_is_zero() {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let t_s = self.cfg.t_s;
        let omega_s = TAU / t_s;
        let z = self.z_of(s);
        let scale = t_s / self.cfg.cntr_max;
        let hs = if self.sync_enabled && self.cfg.modulation != Modulation::Sym {
            self.h_sync(z)?
        } else {
            Complex64::new(0.0, 0.0)
        };
        // -G_c T/C / (1 + G_c T/C H_sync), divided through by G_c.
        let g_d = -scale / (g_c_inv(&self.cfg, z)? + scale * hs);

        let mut sidebands = Complex64::new(0.0, 0.0);
        for n in 1..=n_max as i64 {
            for sn in [s + Complex64::new(0.0, n as f64 * omega_s), s - Complex64::new(0.0, n as f64 * omega_s)] {
                sidebands += self.modulator.delay_factor(sn) * self.gid_hi(sn)?;
            }
        }
        let ratio = (g_d / t_s) / (1.0 - g_d / t_s * sidebands);
        Ok(-self.modulator.delay_factor(s) * ratio)
    }

    /// `G_CM(s)·G_id(s)·H_i` from the truncated sideband series.
    pub fn t_i_series(&self, s: Complex64, n_max: usize) -> Result<Complex64> {
        Ok(self.g_cm_series(s, n_max)? * self.gid_hi(s)?)
    }

    /// Evaluates all loop quantities on a frequency grid (Hz).
    pub fn loop_gains(&self, freqs: &[f64]) -> Result<LoopGainSet> {
        let rows: Vec<[Complex64; 5]> = freqs
            .par_iter()
            .map(|&f| {
                let s = Complex64::new(0.0, TAU * f);
                let z = self.z_of(s);
                Ok([
                    self.g_plant(z)?,
                    self.t_pul(z)?,
                    self.t0(s)?,
                    self.t_i(s)?,
                    self.t_c(s)?,
                ])
            })
            .collect::<Result<_>>()?;
        let quantities = [Quantity::GPlant, Quantity::TPul, Quantity::T0, Quantity::Ti, Quantity::Tc];
        let curves = quantities
            .into_iter()
            .enumerate()
            .map(|(i, q)| {
                BodeCurve::from_points(
                    q,
                    freqs
                        .iter()
                        .zip(&rows)
                        .map(|(&f_hz, r)| BodePoint { f_hz, value: r[i] })
                        .collect(),
                )
            })
            .collect();
        Ok(LoopGainSet {
            curves,
            config: self.cfg.clone(),
            sync_enabled: self.sync_enabled,
        })
    }
}

fn check_singular(den: Complex64, scale: f64) -> Result<()> {
    if den.norm() <= 1e-12 * scale {
        return Err(Error::Singular(den.norm()));
    }
    Ok(())
}

/// Named analytic curves sharing one frequency grid.
#[derive(Debug, Clone)]
pub struct LoopGainSet {
    pub curves: Vec<BodeCurve>,
    pub config: ConverterConfig,
    pub sync_enabled: bool,
}

impl LoopGainSet {
    pub fn get(&self, q: &Quantity) -> Option<&BodeCurve> {
        self.curves.iter().find(|c| &c.quantity == q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plant::{operating_point, SamplingPosition};

    fn reference() -> LoopModel {
        let cfg = ConverterConfig::table3();
        let op = operating_point(&cfg).unwrap();
        LoopModel::new(&cfg, &op).unwrap()
    }

    fn jw(f: f64) -> Complex64 {
        Complex64::new(0.0, TAU * f)
    }

    #[test]
    fn pure_proportional() {
        let mut cfg = ConverterConfig::table3();
        cfg.k_i = 0.0;
        for z in [Complex64::new(0.3, 2.0), Complex64::new(-1.0, 0.0)] {
            assert_eq!(g_c(&cfg, z).unwrap(), Complex64::new(cfg.k_p, 0.0));
        }
    }

    #[test]
    fn pi_at_nyquist() {
        let cfg = ConverterConfig::table3();
        let v = g_c(&cfg, Complex64::new(-1.0, 0.0)).unwrap();
        assert!((v.re - (cfg.k_p + cfg.k_i * cfg.t_s / 2.0)).abs() < 1e-15);
        assert!(matches!(g_c(&cfg, Complex64::new(1.0, 0.0)), Err(Error::PoleHit { .. })));
    }

    #[test]
    fn sync_term_at_dc_is_half_slope() {
        let cfg = ConverterConfig::table3().with_modulation(Modulation::Tem, SamplingPosition::OnCenter);
        let op = operating_point(&cfg).unwrap();
        let v = h_sync(&op, &cfg, Complex64::new(1.0, 0.0)).unwrap();
        assert_eq!(v, Complex64::new(op.slope_at_sample / 2.0, 0.0));
        let flat = OperatingPoint { slope_at_sample: 0.0, ..op };
        assert_eq!(h_sync(&flat, &cfg, Complex64::new(0.2, 0.7)).unwrap().norm(), 0.0);
        let sym = cfg.with_modulation(Modulation::Sym, SamplingPosition::OnCenter);
        assert_eq!(h_sync(&op, &sym, Complex64::new(1.0, 0.0)), Err(Error::SymNotApplicable));
    }

    #[test]
    fn baseline_drops_only_the_sync_term() {
        let m = reference();
        let base = m.clone().with_sync(false);
        let z = m.z_of(jw(1e3));
        let scale = m.config().t_s / m.config().cntr_max;
        let diff = m.g_plant(z).unwrap() - base.g_plant(z).unwrap();
        assert!((diff - scale * m.h_sync(z).unwrap()).norm() < 1e-12 * diff.norm());
        assert_eq!(base.g_plant(z).unwrap(), scale * m.g_mz(z).unwrap());
    }

    #[test]
    fn sym_plant_is_two_edge_average() {
        let cfg = ConverterConfig::table3().with_modulation(Modulation::Sym, SamplingPosition::OffCenter);
        let op = operating_point(&cfg).unwrap();
        let m = LoopModel::new(&cfg, &op).unwrap();
        let (a, b) = sym_delays(cfg.sampling, op.duty, cfg.t_s).decompose(cfg.t_s);
        assert_eq!((a.k, b.k), (0, 1));
        let z = m.z_of(jw(2e3));
        let want = cfg.t_s / (2.0 * cfg.cntr_max)
            * (g_mz(m.partial_fractions(), &a, cfg.h_i, z).unwrap()
                + g_mz(m.partial_fractions(), &b, cfg.h_i, z).unwrap());
        assert!((m.g_plant(z).unwrap() - want).norm() <= 1e-14 * want.norm());
    }

    #[test]
    fn digital_loop_gain_diverges_at_dc() {
        let m = reference();
        let near = m.t_pul(m.z_of(jw(1e-3))).unwrap().norm();
        let far = m.t_pul(m.z_of(jw(1.0))).unwrap().norm();
        assert!(near > 100.0 * far);
    }

    #[test]
    fn analog_loop_gain_settles_at_dc() {
        let m = reference();
        let a = mag(m.t_i(jw(0.1)).unwrap());
        let b = mag(m.t_i(jw(1.0)).unwrap());
        assert!((a - b).abs() < 0.5, "{a} vs {b}");
    }

    #[test]
    fn mid_band_analog_tracks_digital() {
        let m = reference();
        let s = jw(1e3);
        let ti = mag(m.t_i(s).unwrap());
        let tp = mag(m.t_pul(m.z_of(s)).unwrap());
        assert!((ti - tp).abs() < 1.0);
    }

    #[test]
    fn closed_loop_limits() {
        let m = reference();
        let tc = m.t_c(jw(10.0)).unwrap();
        assert!((tc - 1.0).norm() < 0.01);
        let mut cfg = ConverterConfig::table3();
        cfg.k_p = 0.0;
        cfg.k_i = 0.0;
        let op = operating_point(&cfg).unwrap();
        let open = LoopModel::new(&cfg, &op).unwrap();
        assert_eq!(open.t_c(jw(1e3)).unwrap().norm(), 0.0);
    }

    #[test]
    fn t0_is_real_on_the_real_axis() {
        let m = reference();
        let v = m.t0(Complex64::new(3e3, 0.0)).unwrap();
        assert!(v.im.abs() <= 1e-12 * v.norm());
    }

    #[test]
    fn sym_with_merged_edges_reduces_to_single_delay() {
        let cfg = ConverterConfig::table3().with_modulation(Modulation::Sym, SamplingPosition::OnCenter);
        let mut op = operating_point(&cfg).unwrap();
        op.duty = 1e-12;
        let m = LoopModel::new(&cfg, &op).unwrap();
        let s = jw(3e3);
        let single = m.g_c(m.z_of(s)).unwrap() / cfg.cntr_max
            * (-s * cfg.t_s).exp()
            * m.g_id().eval(s).unwrap()
            * cfg.h_i;
        assert!((m.t0(s).unwrap() - single).norm() < 1e-6 * single.norm());
    }

    #[test]
    fn discrete_side_is_periodic_in_frequency() {
        let m = reference();
        let t_s = m.config().t_s;
        let s = jw(1234.5);
        let shifted = s + Complex64::new(0.0, TAU / t_s);
        let a = m.t_pul(m.z_of(s)).unwrap();
        let b = m.t_pul(m.z_of(shifted)).unwrap();
        assert!((a - b).norm() < 1e-9 * a.norm());
    }

    fn mag(v: Complex64) -> f64 {
        crate::bode::mag_db(v)
    }
}
