use crate::plant::{Modulation, SamplingPosition};
use crate::{Error, Result};

/// Relative nudge applied when a fractional delay lands exactly on a sampling
/// instant, where the modified z-transform is undefined.
const BOUNDARY_NUDGE: f64 = 1e-12;

/// `T_D = k·T_S + T_p` with `T_p` strictly inside `(0, T_S)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayDecomposition {
    pub k: u32,
    pub t_p: f64,
    pub t_s: f64,
}

impl DelayDecomposition {
    /// Splits an arbitrary positive delay into whole cycles plus a fraction.
    pub fn from_delay(t_d: f64, t_s: f64) -> Self {
        let k = (t_d / t_s).floor().max(0.0);
        let t_p = t_d - k * t_s;
        interior(k as u32, t_p, t_s)
    }

    pub fn total(&self) -> f64 {
        self.k as f64 * self.t_s + self.t_p
    }
}

fn interior(mut k: u32, t_p: f64, t_s: f64) -> DelayDecomposition {
    let eps = BOUNDARY_NUDGE * t_s;
    let t_p = if t_p <= 0.0 {
        log::warn!("fractional delay at a sampling instant; nudged into the interval");
        eps
    } else if t_p >= t_s {
        // T_p == T_S is the next sampling instant, i.e. one more whole cycle.
        log::warn!("fractional delay at a sampling instant; nudged into the interval");
        k += ((t_p / t_s).floor() as u32).saturating_sub(1);
        t_s - eps
    } else {
        t_p
    };
    DelayDecomposition { k, t_p, t_s }
}

/// Effective sampling-to-edge delay of the asymmetric carriers.
///
/// | carrier, sample position | k | T_p            |
/// |--------------------------|---|----------------|
/// | TEM, on-interval center  | 1 | D·T_S/2        |
/// | TEM, off-interval center | 0 | (1+D)·T_S/2    |
/// | LEM, on-interval center  | 0 | (1-D/2)·T_S    |
/// | LEM, off-interval center | 1 | (1-D)·T_S/2    |
pub fn delay_decomposition(
    modulation: Modulation,
    sampling: SamplingPosition,
    duty: f64,
    t_s: f64,
) -> Result<DelayDecomposition> {
    use Modulation::*;
    use SamplingPosition::*;
    if !(duty > 0.0 && duty < 1.0) {
        return Err(Error::DutyOutOfRange(duty));
    }
    let (k, frac) = match (modulation, sampling) {
        (Tem, OnCenter) => (1, 0.5 * duty),
        (Tem, OffCenter) => (0, 0.5 * (1.0 + duty)),
        (Lem, OnCenter) => (0, 1.0 - 0.5 * duty),
        (Lem, OffCenter) => (1, 0.5 * (1.0 - duty)),
        (Sym, _) => return Err(Error::SymNotApplicable),
    };
    Ok(interior(k, frac * t_s, t_s))
}

/// The two edge delays of the triangular carrier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymDelays {
    pub t_d1: f64,
    pub t_d2: f64,
}

impl SymDelays {
    pub fn decompose(&self, t_s: f64) -> (DelayDecomposition, DelayDecomposition) {
        (
            DelayDecomposition::from_delay(self.t_d1, t_s),
            DelayDecomposition::from_delay(self.t_d2, t_s),
        )
    }
}

/// Edge delays of the symmetric carrier: on-interval-centered sampling with
/// the shadow load at the carrier peak, or off-interval-centered sampling with
/// the load at the carrier valley.
pub fn sym_delays(sampling: SamplingPosition, duty: f64, t_s: f64) -> SymDelays {
    let t_d1 = match sampling {
        SamplingPosition::OnCenter => (1.0 - 0.5 * duty) * t_s,
        SamplingPosition::OffCenter => 0.5 * (1.0 + duty) * t_s,
    };
    let gap = match sampling {
        SamplingPosition::OnCenter => duty * t_s,
        SamplingPosition::OffCenter => (1.0 - duty) * t_s,
    };
    SymDelays {
        t_d1,
        t_d2: t_d1 + gap,
    }
}
