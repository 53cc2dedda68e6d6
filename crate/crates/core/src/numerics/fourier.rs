use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::{Error, Result};

/// Complex amplitude (peak convention) of the `f_p` component of a uniformly
/// sampled real sequence, `(2/N) Σ x[n] e^{-j2π f_p n T}`.
///
/// The window must hold an integer number of periods of `f_p`; then every
/// other harmonic of the window's fundamental is rejected exactly.
pub fn fourier_coeff(samples: &[f64], sample_period: f64, f_p: f64) -> Result<Complex64> {
    if !(f_p > 0.0) || !(sample_period > 0.0) {
        return Err(Error::InvalidFrequency(format!(
            "f_p = {f_p}, sample period = {sample_period}"
        )));
    }
    if f_p * sample_period >= 0.5 {
        return Err(Error::AboveNyquist { f_hz: f_p });
    }
    let n = samples.len();
    let cycles_per_sample = f_p * sample_period;
    let periods = n as f64 * cycles_per_sample;
    if n == 0 || periods.round() < 1.0 || (periods - periods.round()).abs() > 1e-9 * periods.max(1.0) {
        return Err(Error::NonCoherentWindow { periods });
    }
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, &x) in samples.iter().enumerate() {
        // Reduce the phase to one turn before scaling so long windows keep
        // full precision.
        let turns = (i as f64 * cycles_per_sample).fract();
        let (s, c) = (TAU * turns).sin_cos();
        acc += Complex64::new(x * c, -x * s);
    }
    Ok(acc * (2.0 / n as f64))
}
