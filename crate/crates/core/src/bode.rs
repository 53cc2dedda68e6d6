//! Frequency-response curves and their CSV form
//! (`f_hz,mag_db,phase_deg,re,im,quantity_name`).

use std::fmt::Write as _;

use num_complex::Complex64;

use crate::{Error, Result};

pub const CSV_HEADER: &str = "f_hz,mag_db,phase_deg,re,im,quantity_name";

/// Which loop quantity a curve holds.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Quantity {
    GPlant,
    TPul,
    T0,
    Ti,
    Tc,
    MeasuredDigital,
    MeasuredAnalog,
    MeasuredClosedLoop,
    Other(String),
}

impl Quantity {
    pub fn name(&self) -> &str {
        match self {
            Self::GPlant => "G_Plant",
            Self::TPul => "T_pul",
            Self::T0 => "T_0",
            Self::Ti => "T_i",
            Self::Tc => "T_c",
            Self::MeasuredDigital => "measured_digital",
            Self::MeasuredAnalog => "measured_analog",
            Self::MeasuredClosedLoop => "measured_closedloop",
            Self::Other(s) => s,
        }
    }

    pub fn from_name(name: &str) -> Self {
        match name {
            "G_Plant" => Self::GPlant,
            "T_pul" => Self::TPul,
            "T_0" => Self::T0,
            "T_i" => Self::Ti,
            "T_c" => Self::Tc,
            "measured_digital" => Self::MeasuredDigital,
            "measured_analog" => Self::MeasuredAnalog,
            "measured_closedloop" => Self::MeasuredClosedLoop,
            other => Self::Other(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BodePoint {
    pub f_hz: f64,
    pub value: Complex64,
}

impl BodePoint {
    pub fn mag_db(&self) -> f64 {
        mag_db(self.value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BodeCurve {
    pub quantity: Quantity,
    pub points: Vec<BodePoint>,
}

pub fn mag_db(v: Complex64) -> f64 {
    20.0 * v.norm().log10()
}

/// Wraps an angle in degrees into (-180, 180].
pub fn wrap_deg(mut d: f64) -> f64 {
    d %= 360.0;
    if d > 180.0 {
        d -= 360.0;
    } else if d <= -180.0 {
        d += 360.0;
    }
    d
}

impl BodeCurve {
    pub fn new(quantity: Quantity) -> Self {
        Self {
            quantity,
            points: Vec::new(),
        }
    }

    pub fn from_points(quantity: Quantity, points: Vec<BodePoint>) -> Self {
        Self { quantity, points }
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn frequencies(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.f_hz).collect()
    }

    /// Phase in degrees, unwrapped along the curve with the first point in
    /// (-180, 180].
    pub fn unwrapped_phase_deg(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.points.len());
        let mut prev: Option<f64> = None;
        for p in &self.points {
            let raw = p.value.arg().to_degrees();
            let ph = match prev {
                None => wrap_deg(raw),
                Some(last) => last + wrap_deg(raw - last),
            };
            out.push(ph);
            prev = Some(ph);
        }
        out
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(64 * (self.points.len() + 1));
        s.push_str(CSV_HEADER);
        s.push('\n');
        for (p, ph) in self.points.iter().zip(self.unwrapped_phase_deg()) {
            writeln!(
                s,
                "{:.9e},{:.9e},{:.9e},{:.12e},{:.12e},{}",
                p.f_hz,
                p.mag_db(),
                ph,
                p.value.re,
                p.value.im,
                self.quantity.name()
            )
            .unwrap();
        }
        s
    }

    /// Parses the CSV written by [`BodeCurve::to_csv`]. The complex value is
    /// taken from the `re`/`im` columns; magnitude and phase are redundant.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim() == CSV_HEADER => {}
            _ => {
                return Err(Error::InvalidConfig(format!(
                    "line 1: expected header `{CSV_HEADER}`"
                )))
            }
        }
        let mut quantity = None;
        let mut points = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(Error::InvalidConfig(format!(
                    "line {}: expected 6 columns, found {}",
                    i + 1,
                    cols.len()
                )));
            }
            let num = |k: usize| {
                cols[k].trim().parse::<f64>().map_err(|e| {
                    Error::InvalidConfig(format!("line {}: column {}: {e}", i + 1, k + 1))
                })
            };
            points.push(BodePoint {
                f_hz: num(0)?,
                value: Complex64::new(num(3)?, num(4)?),
            });
            quantity.get_or_insert_with(|| Quantity::from_name(cols[5].trim()));
        }
        Ok(Self {
            quantity: quantity.unwrap_or(Quantity::Other(String::new())),
            points,
        })
    }
}

/// `n` log-spaced frequencies from `f_min` to `f_max` inclusive.
pub fn log_spaced(f_min: f64, f_max: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![f_min],
        _ => {
            let (a, b) = (f_min.log10(), f_max.log10());
            (0..n)
                .map(|i| 10f64.powf(a + (b - a) * i as f64 / (n - 1) as f64))
                .collect()
        }
    }
}

/// Log grid with a fixed density per decade, covering `[f_min, f_max]`.
pub fn log_grid(f_min: f64, f_max: f64, points_per_decade: usize) -> Vec<f64> {
    let decades = (f_max / f_min).log10();
    let n = (decades * points_per_decade as f64).ceil() as usize + 1;
    log_spaced(f_min, f_max, n.max(2))
}
