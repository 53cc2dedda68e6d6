use num_complex::Complex64;

use super::Polynomial;
use crate::{Error, Result};

/// Relative threshold below which a denominator value counts as zero.
const POLE_HIT_TOL: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Domain {
    /// Laplace variable `s`.
    Continuous,
    /// Shift variable `z`.
    Discrete,
}

/// Ratio of two real polynomials.
#[derive(Debug, Clone, PartialEq)]
pub struct RationalTF {
    pub num: Polynomial,
    pub den: Polynomial,
    pub domain: Domain,
}

impl RationalTF {
    pub fn new(num: Polynomial, den: Polynomial, domain: Domain) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        Ok(Self { num, den, domain })
    }

    pub fn continuous(num: Polynomial, den: Polynomial) -> Result<Self> {
        Self::new(num, den, Domain::Continuous)
    }

    pub fn is_strictly_proper(&self) -> bool {
        self.num.is_zero() || self.num.degree() < self.den.degree()
    }

    pub fn eval(&self, point: Complex64) -> Result<Complex64> {
        eval_rational(self, point)
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            num: self.num.scale(k),
            den: self.den.clone(),
            domain: self.domain,
        }
    }

    pub fn poles(&self) -> Vec<Complex64> {
        self.den.roots()
    }
}

/// `num(point) / den(point)`, refusing to evaluate on a pole.
pub fn eval_rational(tf: &RationalTF, point: Complex64) -> Result<Complex64> {
    let d = tf.den.eval(point);
    if d.norm() <= POLE_HIT_TOL * tf.den.abs_scale(point) {
        return Err(Error::PoleHit {
            re: point.re,
            im: point.im,
        });
    }
    Ok(tf.num.eval(point) / d)
}
