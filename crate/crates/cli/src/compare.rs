//! Point-by-point comparison of a measured curve against a model curve.

use std::fmt::Write as _;

use syncbuck_core::bode::{mag_db, wrap_deg};
use syncbuck_core::{BodeCurve, Complex64};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointDelta {
    pub f_hz: f64,
    pub model_db: f64,
    pub measured_db: f64,
    pub delta_db: f64,
    pub delta_deg: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub points: Vec<PointDelta>,
    /// Measured frequencies outside the model grid.
    pub uncovered: Vec<f64>,
    pub tol_db: f64,
    pub tol_deg: f64,
}

pub const CSV_HEADER: &str = "f_hz,model_mag_db,measured_mag_db,delta_db,delta_deg";

/// Model value at `f`: the grid point itself when `f` is on the grid,
/// otherwise log-magnitude and unwrapped phase interpolated linearly in
/// log-frequency between the neighbours.
fn model_at(model: &BodeCurve, phase: &[f64], f: f64) -> Option<Complex64> {
    let pts = &model.points;
    let k = pts.partition_point(|p| p.f_hz < f);
    if k < pts.len() && pts[k].f_hz == f {
        return Some(pts[k].value);
    }
    if k == 0 || k == pts.len() {
        return None;
    }
    let (a, b) = (&pts[k - 1], &pts[k]);
    let w = (f / a.f_hz).ln() / (b.f_hz / a.f_hz).ln();
    let ln_mag = (1.0 - w) * a.value.norm().ln() + w * b.value.norm().ln();
    let ph = (1.0 - w) * phase[k - 1] + w * phase[k];
    Some(Complex64::from_polar(ln_mag.exp(), ph.to_radians()))
}

pub fn compare(model: &BodeCurve, measured: &BodeCurve, tol_db: f64, tol_deg: f64) -> Comparison {
    let mut sorted = model.clone();
    sorted.points.sort_by(|a, b| a.f_hz.total_cmp(&b.f_hz));
    let phase = sorted.unwrapped_phase_deg();
    let mut points = Vec::new();
    let mut uncovered = Vec::new();
    for m in &measured.points {
        match model_at(&sorted, &phase, m.f_hz) {
            Some(want) => {
                let (model_db, measured_db) = (mag_db(want), mag_db(m.value));
                points.push(PointDelta {
                    f_hz: m.f_hz,
                    model_db,
                    measured_db,
                    delta_db: measured_db - model_db,
                    delta_deg: wrap_deg(m.value.arg().to_degrees() - want.arg().to_degrees()),
                });
            }
            None => uncovered.push(m.f_hz),
        }
    }
    Comparison {
        points,
        uncovered,
        tol_db,
        tol_deg,
    }
}

fn max_abs(v: impl Iterator<Item = f64>) -> f64 {
    v.map(f64::abs).fold(0.0, f64::max)
}

fn median_abs(v: impl Iterator<Item = f64>) -> f64 {
    let mut xs: Vec<f64> = v.map(f64::abs).collect();
    if xs.is_empty() {
        return 0.0;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

impl Comparison {
    pub fn max_db(&self) -> f64 {
        max_abs(self.points.iter().map(|p| p.delta_db))
    }

    pub fn max_deg(&self) -> f64 {
        max_abs(self.points.iter().map(|p| p.delta_deg))
    }

    pub fn median_db(&self) -> f64 {
        median_abs(self.points.iter().map(|p| p.delta_db))
    }

    pub fn median_deg(&self) -> f64 {
        median_abs(self.points.iter().map(|p| p.delta_deg))
    }

    /// An empty comparison passes only when the measured curve was empty too.
    pub fn passed(&self) -> bool {
        self.uncovered.is_empty() && self.max_db() <= self.tol_db && self.max_deg() <= self.tol_deg
    }

    pub fn to_csv(&self) -> String {
        let mut s = format!("{CSV_HEADER}\n");
        for p in &self.points {
            writeln!(
                s,
                "{:.9e},{:.9e},{:.9e},{:.9e},{:.9e}",
                p.f_hz, p.model_db, p.measured_db, p.delta_db, p.delta_deg
            )
            .unwrap();
        }
        s
    }

    pub fn report(&self) -> String {
        let mut s = String::new();
        writeln!(s, "points compared: {}", self.points.len()).unwrap();
        if !self.uncovered.is_empty() {
            writeln!(
                s,
                "outside the model grid: {} point(s), first at {:.6e} Hz",
                self.uncovered.len(),
                self.uncovered[0]
            )
            .unwrap();
        }
        writeln!(s, "magnitude |delta| dB: max {:.6} median {:.6} (tolerance {})", self.max_db(), self.median_db(), self.tol_db).unwrap();
        writeln!(s, "phase |delta| deg: max {:.6} median {:.6} (tolerance {})", self.max_deg(), self.median_deg(), self.tol_deg).unwrap();
        if let Some(w) = self.points.iter().max_by(|a, b| a.delta_db.abs().total_cmp(&b.delta_db.abs())) {
            writeln!(s, "largest magnitude gap at {:.6e} Hz: {:+.6} dB", w.f_hz, w.delta_db).unwrap();
        }
        writeln!(s, "{}", if self.passed() { "PASS" } else { "FAIL" }).unwrap();
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use syncbuck_core::{BodePoint, Quantity};

    fn curve(pts: &[(f64, Complex64)]) -> BodeCurve {
        BodeCurve::from_points(
            Quantity::Ti,
            pts.iter().map(|&(f_hz, value)| BodePoint { f_hz, value }).collect(),
        )
    }

    fn integrator(f: f64) -> Complex64 {
        Complex64::new(0.0, -1.0 / f)
    }

    #[test]
    fn identical_curves_compare_to_exactly_zero() {
        let c = curve(&[(10.0, Complex64::new(3.0, -4.0)), (20.0, Complex64::new(-1.0, 0.2))]);
        let r = compare(&c, &c, 0.0, 0.0);
        assert_eq!(r.max_db(), 0.0);
        assert_eq!(r.max_deg(), 0.0);
        assert!(r.passed());
    }

    #[test]
    fn interpolation_is_exact_for_a_power_law() {
        // 1/(jf): magnitude linear in log f, constant phase.
        let grid: Vec<_> = [10.0, 100.0, 1000.0].iter().map(|&f| (f, integrator(f))).collect();
        let meas = curve(&[(31.6, integrator(31.6)), (500.0, integrator(500.0))]);
        let r = compare(&curve(&grid), &meas, 1e-9, 1e-9);
        assert!(r.passed(), "{}", r.report());
    }

    #[test]
    fn phase_interpolates_across_the_cut() {
        let a = Complex64::from_polar(1.0, 175f64.to_radians());
        let b = Complex64::from_polar(1.0, (-175f64).to_radians());
        let mid = Complex64::from_polar(1.0, 180f64.to_radians());
        let r = compare(&curve(&[(100.0, a), (10000.0, b)]), &curve(&[(1000.0, mid)]), 1e-9, 1e-6);
        assert!(r.passed(), "{}", r.report());
    }

    #[test]
    fn gaps_fail_and_are_reported() {
        let model = curve(&[(10.0, Complex64::new(1.0, 0.0)), (20.0, Complex64::new(1.0, 0.0))]);
        let meas = curve(&[(10.0, Complex64::new(20.0, 0.0)), (15.0, Complex64::new(0.0, 1.0))]);
        let r = compare(&model, &meas, 1.0, 5.0);
        assert!(!r.passed());
        assert!((r.max_db() - 26.0206).abs() < 1e-3);
        assert!((r.max_deg() - 90.0).abs() < 1e-9);
        assert!(r.report().ends_with("FAIL\n"));
    }

    #[test]
    fn frequencies_outside_the_model_fail() {
        let model = curve(&[(10.0, Complex64::new(1.0, 0.0)), (20.0, Complex64::new(1.0, 0.0))]);
        let r = compare(&model, &curve(&[(40.0, Complex64::new(1.0, 0.0))]), 1.0, 5.0);
        assert_eq!(r.uncovered, vec![40.0]);
        assert!(!r.passed());
    }

    #[test]
    fn median_of_even_count() {
        assert_eq!(median_abs([1.0, -4.0, 2.0, 3.0].into_iter()), 2.5);
    }
}
