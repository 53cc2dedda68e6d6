use num_complex::Complex64;

use super::DelayDecomposition;
use crate::numerics::PartialFractionForm;
use crate::{Error, Result};

/// Modified z-transform of `Σ n_r/(s + d_r)` with fractional delay `T_p`:
/// `Σ n_r e^{d_r T_p} / (z e^{d_r T_S} - 1)`.
///
/// This is the z-transform of the impulse response sampled at
/// `m·T_S - T_p`, `m ≥ 1`.
pub fn modified_z(pf: &PartialFractionForm, t_p: f64, t_s: f64, z: Complex64) -> Result<Complex64> {
    if !(t_p > 0.0 && t_p < t_s) {
        return Err(Error::InvalidConfig(format!(
            "fractional delay {t_p:e} outside (0, {t_s:e})"
        )));
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for term in &pf.terms {
        let d = term.decay();
        let ze = z * (d * t_s).exp();
        let den = ze - 1.0;
        if den.norm() <= 1e-12 * ze.norm().max(1.0) {
            return Err(Error::PoleHit { re: z.re, im: z.im });
        }
        acc += term.residue * (d * t_p).exp() / den;
    }
    Ok(acc)
}

/// Lifted plant `z^{-k} · Z_m{G, T_p} · H_i`.
pub fn g_mz(
    pf: &PartialFractionForm,
    decomp: &DelayDecomposition,
    h_i: f64,
    z: Complex64,
) -> Result<Complex64> {
    let zm = modified_z(pf, decomp.t_p, decomp.t_s, z)?;
    Ok(zm * z.powi(-(decomp.k as i32)) * h_i)
}
