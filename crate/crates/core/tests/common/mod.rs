#![allow(dead_code)]

use std::f64::consts::{PI, TAU};

use rand::rngs::StdRng;
use rand::Rng;
use syncbuck_core::numerics::{PartialFractionForm, Polynomial, RationalTF};
use syncbuck_core::{Complex64, ConverterConfig};

/// Log-uniform draw from `[lo, hi]`.
pub fn log_uniform(rng: &mut StdRng, lo: f64, hi: f64) -> f64 {
    (rng.gen_range(lo.ln()..hi.ln())).exp()
}

/// A plausible buck power stage with the reference controller.
pub fn random_config(rng: &mut StdRng) -> ConverterConfig {
    let mut cfg = ConverterConfig::table3();
    cfg.v_in = rng.gen_range(5.0..48.0);
    cfg.l_f = log_uniform(rng, 1e-6, 50e-6);
    cfg.c_f = log_uniform(rng, 10e-6, 1e-3);
    cfg.r_l = rng.gen_range(0.0..20e-3);
    cfg.r_c = rng.gen_range(0.0..50e-3);
    cfg.r_ld = log_uniform(rng, 0.1, 5.0);
    cfg.t_s = log_uniform(rng, 2e-6, 20e-6);
    cfg
}

/// Unit-circle point `e^{jθ}` away from the real axis.
pub fn random_unit_z(rng: &mut StdRng) -> (Complex64, f64) {
    let theta = rng.gen_range(0.01..PI - 0.01);
    (Complex64::from_polar(1.0, theta), theta)
}

/// `Σ_{m=1}^{∞} g(mT − T_p) z^{-m}` summed until the impulse response has
/// decayed below double precision.
pub fn impulse_sampling(pf: &PartialFractionForm, t_p: f64, t_s: f64, z: Complex64) -> Complex64 {
    let slowest = pf
        .terms
        .iter()
        .map(|t| t.decay().re)
        .fold(f64::INFINITY, f64::min)
        .max(1e-3 / t_s);
    let cycles = ((40.0 / (slowest * t_s)).ceil() as usize).clamp(10, 50_000_000);
    let zi = z.inv();
    let mut zp = Complex64::new(1.0, 0.0);
    let mut acc = Complex64::new(0.0, 0.0);
    for m in 1..=cycles {
        zp *= zi;
        acc += pf.impulse_response(m as f64 * t_s - t_p) * zp;
    }
    acc
}

/// `(1/T) Σ_{|n|≤N} G(s + jnω_S) e^{-(s + jnω_S) T_p}` with `z = e^{sT}`.
pub fn sideband_sum(pf: &PartialFractionForm, t_p: f64, t_s: f64, s: Complex64, n_max: i64) -> Complex64 {
    let omega_s = TAU / t_s;
    (-n_max..=n_max)
        .map(|n| {
            let sn = s + Complex64::new(0.0, n as f64 * omega_s);
            pf.eval(sn) * (-sn * t_p).exp()
        })
        .sum::<Complex64>()
        / t_s
}

pub fn rel_err(a: Complex64, b: Complex64) -> f64 {
    (a - b).norm() / b.norm()
}

/// Real-coefficient rational function with the given simple poles (a
/// conjugate pair is passed as one entry with positive imaginary part) and
/// residues, returned with its expected pole/residue list.
pub fn build_tf(parts: &[(Complex64, Complex64)]) -> (RationalTF, Vec<(Complex64, Complex64)>) {
    let mut pieces = Vec::new();
    let mut expected = Vec::new();
    for &(p, r) in parts {
        if p.im == 0.0 {
            pieces.push((Polynomial::new(vec![r.re]), Polynomial::new(vec![-p.re, 1.0])));
            expected.push((p, Complex64::new(r.re, 0.0)));
        } else {
            // r/(s−p) + r̄/(s−p̄)
            let num = Polynomial::new(vec![-2.0 * (r * p.conj()).re, 2.0 * r.re]);
            let den = Polynomial::new(vec![p.norm_sqr(), -2.0 * p.re, 1.0]);
            pieces.push((num, den));
            expected.push((p, r));
            expected.push((p.conj(), r.conj()));
        }
    }
    let mut num = Polynomial::new(vec![0.0]);
    let mut den = Polynomial::new(vec![1.0]);
    for (n, d) in &pieces {
        num = num.mul(d).add(&n.mul(&den));
        den = den.mul(d);
    }
    (RationalTF::continuous(num, den).unwrap(), expected)
}

/// Up to six stable simple poles, real or in conjugate pairs, with
/// magnitudes at least a factor of two apart so none come close to merging.
pub fn random_pole_set(rng: &mut StdRng) -> Vec<(Complex64, Complex64)> {
    let mut parts = Vec::new();
    let mut degree = 0;
    let mut mag = log_uniform(rng, 10.0, 100.0);
    let target = rng.gen_range(1..=6);
    while degree < target {
        let pair = degree + 2 <= target && rng.gen_bool(0.5);
        let pole = if pair {
            let zeta: f64 = rng.gen_range(0.05..0.95);
            Complex64::new(-zeta * mag, mag * (1.0 - zeta * zeta).sqrt())
        } else {
            Complex64::new(-mag, 0.0)
        };
        let r = Complex64::new(rng.gen_range(-1.0..1.0), if pair { rng.gen_range(-1.0..1.0) } else { 0.0 }) * mag;
        parts.push((pole, r));
        degree += if pair { 2 } else { 1 };
        mag *= log_uniform(rng, 2.0, 8.0);
    }
    parts
}
