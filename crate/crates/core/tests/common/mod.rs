//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector, Matrix2, Vector2};
use num_complex::Complex64;
use pdac_core::sampling::CartesianMask;
use pdac_core::{ComplexImage, KSpace};
use rand::Rng;

pub fn random_complex(n: usize, rng: &mut impl Rng) -> Vec<Complex64> {
    (0..n)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect()
}

pub fn random_image(h: usize, w: usize, rng: &mut impl Rng) -> ComplexImage {
    ComplexImage::new(h, w, random_complex(h * w, rng)).unwrap()
}

/// Random mask with at least one sampled column.
pub fn random_mask(width: usize, rng: &mut impl Rng) -> CartesianMask {
    loop {
        let cols: Vec<bool> = (0..width).map(|_| rng.random_bool(0.4)).collect();
        if let Ok(m) = CartesianMask::new(cols) {
            return m;
        }
    }
}

/// Dense data-consistency objective
/// `mu_prev ||z_prev - D z||^2 + mu_t ||z - ax||^2` with `D` the column
/// selector of `m_prev` written as a full matrix.
pub struct DenseConsistency {
    d: DMatrix<Complex64>,
    z_prev: DVector<Complex64>,
    ax: DVector<Complex64>,
    mu_prev: f64,
    mu_t: f64,
}

impl DenseConsistency {
    pub fn new(
        z_prev: &KSpace,
        m_prev: &CartesianMask,
        ax: &KSpace,
        mu_prev: f64,
        mu_t: f64,
    ) -> Self {
        let n = z_prev.data().len();
        let w = z_prev.width();
        let d = DMatrix::from_fn(n, n, |i, j| {
            if i == j && m_prev.is_sampled(i % w) {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        Self {
            d,
            z_prev: DVector::from_column_slice(z_prev.data()),
            ax: DVector::from_column_slice(ax.data()),
            mu_prev,
            mu_t,
        }
    }

    pub fn objective(&self, z: &[Complex64]) -> f64 {
        let z = DVector::from_column_slice(z);
        let r1 = &self.z_prev - &self.d * &z;
        let r2 = &z - &self.ax;
        self.mu_prev * r1.norm_squared() + self.mu_t * r2.norm_squared()
    }

    /// Solves `(mu_prev D^H D + mu_t I) z = mu_prev D^H z_prev + mu_t ax`.
    pub fn solve(&self) -> Vec<Complex64> {
        let n = self.ax.len();
        let dh = self.d.adjoint();
        let a = (&dh * &self.d) * Complex64::new(self.mu_prev, 0.0)
            + DMatrix::<Complex64>::identity(n, n) * Complex64::new(self.mu_t, 0.0);
        let b = (&dh * &self.z_prev) * Complex64::new(self.mu_prev, 0.0)
            + &self.ax * Complex64::new(self.mu_t, 0.0);
        a.lu()
            .solve(&b)
            .expect("normal matrix is positive definite")
            .as_slice()
            .to_vec()
    }
}

pub fn tv1d_objective(u: &[f64], f: &[f64], lambda: f64) -> f64 {
    let fit: f64 = u.iter().zip(f).map(|(a, b)| (a - b).powi(2)).sum();
    0.5 * fit + lambda * u.windows(2).map(|p| (p[1] - p[0]).abs()).sum::<f64>()
}

/// Exact minimizer of `0.5 ||u - f||^2 + lambda * sum |u_{i+1} - u_i|` by
/// enumerating the sign pattern of every difference. Each pattern fixes an
/// equality-constrained quadratic program solved through its KKT system;
/// patterns whose solution disagrees with the assumed signs or whose
/// multipliers leave `[-1, 1]` are rejected.
pub fn tv1d_qp(f: &[f64], lambda: f64) -> Vec<f64> {
    let n = f.len();
    let m = n - 1;
    let diff = |i: usize| {
        let mut row = DVector::<f64>::zeros(n);
        row[i] = -1.0;
        row[i + 1] = 1.0;
        row
    };
    let mut best: Option<(f64, Vec<f64>)> = None;
    for code in 0..3usize.pow(m as u32) {
        let mut signs = vec![0i32; m];
        let mut c = code;
        for s in signs.iter_mut() {
            *s = (c % 3) as i32 - 1;
            c /= 3;
        }
        let tied: Vec<usize> = (0..m).filter(|&i| signs[i] == 0).collect();
        let k = tied.len();
        let mut kkt = DMatrix::<f64>::zeros(n + k, n + k);
        let mut rhs = DVector::<f64>::zeros(n + k);
        for i in 0..n {
            kkt[(i, i)] = 1.0;
            rhs[i] = f[i];
        }
        for (i, &s) in signs.iter().enumerate() {
            if s != 0 {
                // gradient of lambda * s_i * (u_{i+1} - u_i)
                let g = diff(i) * (lambda * s as f64);
                rhs.rows_mut(0, n).axpy(-1.0, &g, 1.0);
            }
        }
        for (j, &i) in tied.iter().enumerate() {
            let row = diff(i);
            for c in 0..n {
                kkt[(n + j, c)] = row[c];
                kkt[(c, n + j)] = row[c];
            }
        }
        let Some(sol) = kkt.lu().solve(&rhs) else {
            continue;
        };
        let u: Vec<f64> = sol.rows(0, n).iter().copied().collect();
        let consistent = (0..m).all(|i| {
            let d = u[i + 1] - u[i];
            match signs[i] {
                1 => d >= -1e-12,
                -1 => d <= 1e-12,
                _ => true,
            }
        });
        let multipliers_ok = (0..k).all(|j| (sol[n + j] / lambda).abs() <= 1.0 + 1e-12);
        if !(consistent && multipliers_ok) {
            continue;
        }
        let obj = tv1d_objective(&u, f, lambda);
        if best.as_ref().is_none_or(|(b, _)| obj < *b) {
            best = Some((obj, u));
        }
    }
    best.expect("some sign pattern is optimal").1
}

/// Textbook modified Shepp-Logan table: (intensity, semi-axis a, semi-axis b,
/// centre x, centre y, rotation in degrees).
pub const ELLIPSES: [(f64, f64, f64, f64, f64, f64); 10] = [
    (1.0, 0.69, 0.92, 0.0, 0.0, 0.0),
    (-0.8, 0.6624, 0.874, 0.0, -0.0184, 0.0),
    (-0.2, 0.11, 0.31, 0.22, 0.0, -18.0),
    (-0.2, 0.16, 0.41, -0.22, 0.0, 18.0),
    (0.1, 0.21, 0.25, 0.0, 0.35, 0.0),
    (0.1, 0.046, 0.046, 0.0, 0.1, 0.0),
    (0.1, 0.046, 0.046, 0.0, -0.1, 0.0),
    (0.1, 0.046, 0.023, -0.08, -0.605, 0.0),
    (0.1, 0.023, 0.023, 0.0, -0.606, 0.0),
    (0.1, 0.023, 0.046, 0.06, -0.605, 0.0),
];

/// Quadratic-form value `d^T R diag(1/a^2, 1/b^2) R^T d` of every ellipse
/// at `(x, y)`; a point is inside when the value is at most 1.
pub fn ellipse_forms(x: f64, y: f64) -> Vec<f64> {
    ELLIPSES
        .iter()
        .map(|&(_, a, b, x0, y0, deg)| {
            let t = deg.to_radians();
            let rot = Matrix2::new(t.cos(), -t.sin(), t.sin(), t.cos());
            let scale = Matrix2::new(1.0 / (a * a), 0.0, 0.0, 1.0 / (b * b));
            let q = rot * scale * rot.transpose();
            let d = Vector2::new(x - x0, y - y0);
            (d.transpose() * q * d)[(0, 0)]
        })
        .collect()
}

/// Phantom value from membership tests, `None` within `tol` of any boundary.
pub fn phantom_reference(x: f64, y: f64, tol: f64) -> Option<f64> {
    let forms = ellipse_forms(x, y);
    if forms.iter().any(|q| (q - 1.0).abs() < tol) {
        return None;
    }
    let v: f64 = forms
        .iter()
        .zip(ELLIPSES.iter())
        .filter(|(q, _)| **q <= 1.0)
        .map(|(_, e)| e.0)
        .sum();
    Some(v.clamp(0.0, 1.0))
}
