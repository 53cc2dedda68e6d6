use std::ops::{Add, Mul, Sub};

/// Dense 2×2 real matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[f64; 2]; 2]);

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2([[1.0, 0.0], [0.0, 1.0]]);
    pub const ZERO: Mat2 = Mat2([[0.0, 0.0], [0.0, 0.0]]);

    pub fn diag(a: f64, b: f64) -> Self {
        Mat2([[a, 0.0], [0.0, b]])
    }

    pub fn apply(&self, x: [f64; 2]) -> [f64; 2] {
        let m = &self.0;
        [
            m[0][0] * x[0] + m[0][1] * x[1],
            m[1][0] * x[0] + m[1][1] * x[1],
        ]
    }

    pub fn scale(&self, k: f64) -> Self {
        let m = &self.0;
        Mat2([[m[0][0] * k, m[0][1] * k], [m[1][0] * k, m[1][1] * k]])
    }

    pub fn trace(&self) -> f64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> f64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d == 0.0 {
            return None;
        }
        let m = &self.0;
        Some(Mat2([[m[1][1] / d, -m[0][1] / d], [-m[1][0] / d, m[0][0] / d]]))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let mut worst = 0.0f64;
        for i in 0..2 {
            for j in 0..2 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2([
            [a[0][0] + b[0][0], a[0][1] + b[0][1]],
            [a[1][0] + b[1][0], a[1][1] + b[1][1]],
        ])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        self + rhs.scale(-1.0)
    }
}

/// `exp(A t)` for a 2×2 real matrix.
///
/// Uses the closed form `e^{μt} [c(t) I + s(t) (A - μI)]` where `μ` is half
/// the trace and `±δ` are the eigenvalues of `A - μI`. For real `δ` the two
/// exponentials are formed separately so a stiff pair never multiplies an
/// overflowing `cosh` by an underflowing `e^{μt}`.
pub fn expm2(a: &Mat2, t: f64) -> Mat2 {
    let m = &a.0;
    let mu = 0.5 * (m[0][0] + m[1][1]);
    let half_diff = 0.5 * (m[0][0] - m[1][1]);
    let delta_sq = half_diff * half_diff + m[0][1] * m[1][0];
    let x = delta_sq * t * t;

    let (c, s) = if x.abs() < 1e-2 {
        // cosh(√x) and sinh(√x)/√x series, valid for either sign of x.
        let c = 1.0 + x / 2.0 * (1.0 + x / 12.0 * (1.0 + x / 30.0 * (1.0 + x / 56.0)));
        let s = t * (1.0 + x / 6.0 * (1.0 + x / 20.0 * (1.0 + x / 42.0 * (1.0 + x / 72.0))));
        let g = (mu * t).exp();
        (g * c, g * s)
    } else if delta_sq > 0.0 {
        let d = delta_sq.sqrt();
        let ep = ((mu + d) * t).exp();
        let em = ((mu - d) * t).exp();
        (0.5 * (ep + em), 0.5 * (ep - em) / d)
    } else {
        let w = (-delta_sq).sqrt();
        let g = (mu * t).exp();
        let (sn, cs) = (w * t).sin_cos();
        (g * cs, g * sn / w)
    };

    let shifted = Mat2([[half_diff, m[0][1]], [m[1][0], -half_diff]]);
    Mat2::IDENTITY.scale(c) + shifted.scale(s)
}
