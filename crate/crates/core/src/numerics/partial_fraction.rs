use num_complex::Complex64;

use super::{Domain, RationalTF};
use crate::{Error, Result};

/// Two poles closer than this (relative to the larger magnitude) are treated
/// as a repeated pole.
pub const POLE_MERGE_TOL: f64 = 1e-7;

/// One first-order term `residue / (s - pole)`.
///
/// In the `n / (s + d)` notation used for the modified z-transform,
/// `n = residue` and `d = -pole`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfTerm {
    pub residue: Complex64,
    pub pole: Complex64,
}

impl PfTerm {
    pub fn decay(&self) -> Complex64 {
        -self.pole
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartialFractionForm {
    pub terms: Vec<PfTerm>,
}

impl PartialFractionForm {
    pub fn pole_count(&self) -> usize {
        self.terms.len()
    }

    pub fn eval(&self, s: Complex64) -> Complex64 {
        self.terms.iter().map(|t| t.residue / (s - t.pole)).sum()
    }

    /// Sum of residues, i.e. the impulse response at `t = 0+`.
    pub fn initial_value(&self) -> f64 {
        self.terms.iter().map(|t| t.residue).sum::<Complex64>().re
    }

    /// Impulse response `Σ n_r e^{-d_r t}` for `t > 0`.
    pub fn impulse_response(&self, t: f64) -> f64 {
        self.terms
            .iter()
            .map(|term| term.residue * (term.pole * t).exp())
            .sum::<Complex64>()
            .re
    }
}

/// Expands a strictly proper continuous transfer function with simple poles
/// into `Σ n_r / (s + d_r)`.
pub fn partial_fractions(tf: &RationalTF) -> Result<PartialFractionForm> {
    if tf.domain != Domain::Continuous {
        return Err(Error::InvalidConfig(
            "partial fractions are taken of continuous transfer functions".into(),
        ));
    }
    if !tf.is_strictly_proper() {
        return Err(Error::NotStrictlyProper {
            num: tf.num.degree(),
            den: tf.den.degree(),
        });
    }
    let poles = tf.den.roots();
    for (i, a) in poles.iter().enumerate() {
        for b in &poles[i + 1..] {
            let scale = a.norm().max(b.norm());
            if (a - b).norm() <= POLE_MERGE_TOL * scale || scale == 0.0 {
                return Err(Error::RepeatedPole(format!("{a}"), format!("{b}")));
            }
        }
    }
    let deriv = tf.den.derivative();
    let mut terms: Vec<PfTerm> = poles
        .iter()
        .map(|&p| PfTerm {
            residue: tf.num.eval(p) / deriv.eval(p),
            pole: p,
        })
        .collect();

    // Make conjugate pairs exact so real-coefficient responses stay real.
    let n = terms.len();
    for i in 0..n {
        if terms[i].pole.im <= 0.0 {
            continue;
        }
        let target = terms[i].pole.conj();
        let partner = (0..n)
            .filter(|&j| j != i && terms[j].pole.im < 0.0)
            .min_by(|&a, &b| {
                (terms[a].pole - target)
                    .norm()
                    .total_cmp(&(terms[b].pole - target).norm())
            });
        if let Some(j) = partner {
            terms[j].pole = target;
            terms[j].residue = terms[i].residue.conj();
        }
    }
    for t in terms.iter_mut().filter(|t| t.pole.im == 0.0) {
        t.residue.im = 0.0;
    }
    Ok(PartialFractionForm { terms })
}
