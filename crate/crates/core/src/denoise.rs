//! Plug-in priors for the reconstruction step of each iteration.
//!
//! With an unweighted severity context every denoiser works in the image
//! domain: k-space input is brought back with `ifft2c` per coil, denoised,
//! and transformed forward again. When the context carries per-column data
//! weights, TV and DCT soft-thresholding instead solve
//! `min_u 0.5 ||F u - v||^2_W + lambda * R(u)` with `W` diagonal in k-space.
//! The severity context also scales the regularization weight so that
//! states with low confidence on their sampled columns are smoothed harder.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::numerics::{fft2c, ifft2c, ComplexImage, KSpace};
use crate::sampling::SeverityContext;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DenoiserParams {
    /// Regularization weight `lambda`.
    pub strength: f64,
    pub inner_iterations: usize,
    pub modulation_gain: f64,
}

impl DenoiserParams {
    pub fn new(strength: f64, inner_iterations: usize, modulation_gain: f64) -> Result<Self> {
        if !(strength > 0.0 && strength.is_finite()) {
            return Err(Error::config("lambda", "must be positive"));
        }
        if inner_iterations == 0 {
            return Err(Error::config("inner_iterations", "must be at least 1"));
        }
        if !(modulation_gain >= 0.0 && modulation_gain.is_finite()) {
            return Err(Error::config("modulation_gain", "must be nonnegative"));
        }
        Ok(Self {
            strength,
            inner_iterations,
            modulation_gain,
        })
    }

    /// `lambda * (1 + gain * (1 - mean confidence on the mask support))`.
    pub fn effective_strength(&self, ctx: &SeverityContext) -> f64 {
        self.strength * (1.0 + self.modulation_gain * (1.0 - ctx.mean_support_confidence()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DenoiserKind {
    Identity,
    Tv,
    DctSoft,
    /// Returns the ground-truth k-space; an upper bound for testing.
    Oracle,
}

impl DenoiserKind {
    pub fn as_str(&self) -> &'static str {
        match self {
            DenoiserKind::Identity => "identity",
            DenoiserKind::Tv => "tv",
            DenoiserKind::DctSoft => "dct-soft",
            DenoiserKind::Oracle => "oracle",
        }
    }

    /// Applies the denoiser to (possibly multi-coil) k-space.
    pub fn denoise(
        &self,
        z_in: &KSpace,
        ctx: &SeverityContext,
        params: &DenoiserParams,
        gt: Option<&KSpace>,
    ) -> Result<KSpace> {
        let lambda = params.effective_strength(ctx);
        match self {
            DenoiserKind::Identity => Ok(z_in.clone()),
            DenoiserKind::Oracle => {
                let gt = gt.ok_or_else(|| {
                    Error::MissingInput("oracle denoiser needs ground-truth k-space".into())
                })?;
                oracle_denoise(z_in, gt)
            }
            DenoiserKind::Tv if ctx.is_unweighted() => {
                per_coil(z_in, |img| tv_denoise(img, lambda, params.inner_iterations))
            }
            DenoiserKind::DctSoft if ctx.is_unweighted() => {
                per_coil(z_in, |img| soft_threshold_denoise(img, lambda))
            }
            DenoiserKind::Tv => per_coil_kspace(z_in, |v| {
                weighted_tv(v, ctx.column_weights(), lambda, params.inner_iterations)
            }),
            DenoiserKind::DctSoft => per_coil_kspace(z_in, |v| {
                weighted_soft_threshold(v, ctx.column_weights(), lambda, params.inner_iterations)
            }),
        }
    }
}

impl fmt::Display for DenoiserKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for DenoiserKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "identity" => Ok(DenoiserKind::Identity),
            "tv" => Ok(DenoiserKind::Tv),
            "dct-soft" => Ok(DenoiserKind::DctSoft),
            "oracle" => Ok(DenoiserKind::Oracle),
            other => Err(Error::config(
                "denoiser",
                format!("unknown denoiser `{other}`"),
            )),
        }
    }
}

fn per_coil(z: &KSpace, f: impl Fn(&ComplexImage) -> ComplexImage) -> Result<KSpace> {
    let mut parts = Vec::with_capacity(z.coils());
    for c in 0..z.coils() {
        let img = ifft2c(&z.coil_kspace(c))?;
        parts.push(fft2c(&f(&img))?);
    }
    KSpace::stack(parts)
}

fn per_coil_kspace(z: &KSpace, f: impl Fn(&KSpace) -> Result<KSpace>) -> Result<KSpace> {
    let parts = (0..z.coils())
        .map(|c| f(&z.coil_kspace(c)))
        .collect::<Result<Vec<_>>>()?;
    KSpace::stack(parts)
}

fn entry_weights(v: &KSpace, column_weights: &[f64]) -> Result<Vec<f64>> {
    if column_weights.len() != v.width() {
        return Err(Error::Shape(format!(
            "{} column weights for width {}",
            column_weights.len(),
            v.width()
        )));
    }
    let w = v.width();
    Ok((0..v.height() * w).map(|i| column_weights[i % w]).collect())
}

/// `0.5 * sum_k w_k |(F u)_k - v_k|^2 + lambda * TV(u)`, TV summed over the
/// real and imaginary channels.
pub fn weighted_tv_energy(
    u: &ComplexImage,
    v: &KSpace,
    column_weights: &[f64],
    lambda: f64,
) -> Result<f64> {
    let wk = entry_weights(v, column_weights)?;
    let fu = fft2c(u)?;
    let fit: f64 = fu
        .data()
        .iter()
        .zip(v.data())
        .zip(&wk)
        .map(|((a, b), w)| w * (a - b).norm_sqr())
        .sum();
    let grid = Grid {
        height: u.height(),
        width: u.width(),
    };
    let re: Vec<f64> = u.data().iter().map(|c| c.re).collect();
    let im: Vec<f64> = u.data().iter().map(|c| c.im).collect();
    Ok(0.5 * fit + lambda * (grid.tv(&re) + grid.tv(&im)))
}

/// TV reconstruction from single-coil k-space `v` with per-column data
/// weights, by the Chambolle-Pock primal-dual method. The data term's
/// proximal map is diagonal in k-space, so each iteration costs one FFT pair.
pub fn weighted_tv(
    v: &KSpace,
    column_weights: &[f64],
    lambda: f64,
    iters: usize,
) -> Result<KSpace> {
    let wk = entry_weights(v, column_weights)?;
    let (h, w) = (v.height(), v.width());
    let n = h * w;
    let grid = Grid {
        height: h,
        width: w,
    };
    // ||grad||^2 <= 8
    let tau = 0.99 / 8f64.sqrt();
    let sigma = tau;

    let mut u = ifft2c(v)?;
    let mut u_bar = u.data().to_vec();
    let mut dual = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let (mut gx, mut gy) = (vec![0.0; n], vec![0.0; n]);
    let (mut div_re, mut div_im) = (vec![0.0; n], vec![0.0; n]);
    let mut channel = vec![0.0; n];
    let mut out = v.clone();

    for _ in 0..iters {
        for (ch, (px, py)) in [(0, (0, 1)), (1, (2, 3))] {
            for (dst, c) in channel.iter_mut().zip(&u_bar) {
                *dst = if ch == 0 { c.re } else { c.im };
            }
            grid.grad(&channel, &mut gx, &mut gy);
            for i in 0..n {
                let qx = dual[px][i] + sigma * gx[i];
                let qy = dual[py][i] + sigma * gy[i];
                let scale = ((qx * qx + qy * qy).sqrt() / lambda).max(1.0);
                dual[px][i] = qx / scale;
                dual[py][i] = qy / scale;
            }
        }
        grid.div(&dual[0], &dual[1], &mut div_re);
        grid.div(&dual[2], &dual[3], &mut div_im);
        let shifted: Vec<Complex64> = u
            .data()
            .iter()
            .enumerate()
            .map(|(i, c)| c + Complex64::new(div_re[i], div_im[i]) * tau)
            .collect();
        let mut k = fft2c(&ComplexImage::new(h, w, shifted)?)?;
        for ((kv, &vv), &wi) in k.data_mut().iter_mut().zip(v.data()).zip(&wk) {
            *kv = (*kv + vv * (tau * wi)) / (1.0 + tau * wi);
        }
        let next = ifft2c(&k)?;
        for ((b, &nx), &old) in u_bar.iter_mut().zip(next.data()).zip(u.data()) {
            *b = nx * 2.0 - old;
        }
        u = next;
        out = k;
    }
    Ok(out)
}

/// DCT soft-threshold reconstruction from single-coil k-space `v` with
/// per-column data weights, by FISTA with unit step (weights are at most 1).
pub fn weighted_soft_threshold(
    v: &KSpace,
    column_weights: &[f64],
    lambda: f64,
    iters: usize,
) -> Result<KSpace> {
    let wk = entry_weights(v, column_weights)?;
    let mut x = ifft2c(v)?;
    let mut y = x.clone();
    let mut t = 1.0f64;
    for _ in 0..iters {
        let mut residual = fft2c(&y)?;
        for ((r, &vv), &wi) in residual.data_mut().iter_mut().zip(v.data()).zip(&wk) {
            *r = (*r - vv) * wi;
        }
        let grad = ifft2c(&residual)?;
        let step: Vec<Complex64> = y
            .data()
            .iter()
            .zip(grad.data())
            .map(|(a, g)| a - g)
            .collect();
        let next = soft_threshold_denoise(&ComplexImage::new(y.height(), y.width(), step)?, lambda);
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let momentum = (t - 1.0) / t_next;
        let extrapolated = next
            .data()
            .iter()
            .zip(x.data())
            .map(|(a, b)| a + (a - b) * momentum)
            .collect();
        y = ComplexImage::new(next.height(), next.width(), extrapolated)?;
        x = next;
        t = t_next;
    }
    fft2c(&x)
}

pub fn oracle_denoise(z_in: &KSpace, gt: &KSpace) -> Result<KSpace> {
    z_in.same_shape(gt)?;
    Ok(gt.clone())
}

struct Grid {
    height: usize,
    width: usize,
}

impl Grid {
    /// Forward differences with a zero last row/column.
    fn grad(&self, u: &[f64], gx: &mut [f64], gy: &mut [f64]) {
        let (h, w) = (self.height, self.width);
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                gx[i] = if c + 1 < w { u[i + 1] - u[i] } else { 0.0 };
                gy[i] = if r + 1 < h { u[i + w] - u[i] } else { 0.0 };
            }
        }
    }

    /// Negative adjoint of [`Grid::grad`].
    fn div(&self, px: &[f64], py: &[f64], out: &mut [f64]) {
        let (h, w) = (self.height, self.width);
        for r in 0..h {
            for c in 0..w {
                let i = r * w + c;
                let dx = if w == 1 {
                    0.0
                } else if c == 0 {
                    px[i]
                } else if c + 1 == w {
                    -px[i - 1]
                } else {
                    px[i] - px[i - 1]
                };
                let dy = if h == 1 {
                    0.0
                } else if r == 0 {
                    py[i]
                } else if r + 1 == h {
                    -py[i - w]
                } else {
                    py[i] - py[i - w]
                };
                out[i] = dx + dy;
            }
        }
    }

    fn tv(&self, u: &[f64]) -> f64 {
        let n = u.len();
        let (mut gx, mut gy) = (vec![0.0; n], vec![0.0; n]);
        self.grad(u, &mut gx, &mut gy);
        gx.iter().zip(&gy).map(|(a, b)| a.hypot(*b)).sum()
    }
}

/// `0.5 * ||u - f||^2 + lambda * TV(u)` with isotropic TV.
pub fn tv_energy(u: &[f64], f: &[f64], height: usize, width: usize, lambda: f64) -> f64 {
    let fit: f64 = u.iter().zip(f).map(|(a, b)| (a - b).powi(2)).sum();
    0.5 * fit + lambda * Grid { height, width }.tv(u)
}

/// Isotropic ROF denoising of one real channel by fast projected gradient
/// on the dual. Returns the best primal iterate and its energy after every
/// inner iteration (index 0 is the input itself).
pub fn tv_denoise_channel(
    f: &[f64],
    height: usize,
    width: usize,
    lambda: f64,
    iters: usize,
) -> (Vec<f64>, Vec<f64>) {
    let grid = Grid { height, width };
    let n = f.len();
    let step = 1.0 / (8.0 * lambda);

    let mut p = (vec![0.0; n], vec![0.0; n]);
    let mut r = p.clone();
    let mut t = 1.0f64;
    let (mut gx, mut gy, mut dv) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    let mut u = vec![0.0; n];

    let mut best = f.to_vec();
    let mut best_energy = tv_energy(f, f, height, width, lambda);
    let mut energies = Vec::with_capacity(iters + 1);
    energies.push(best_energy);

    for _ in 0..iters {
        grid.div(&r.0, &r.1, &mut dv);
        for i in 0..n {
            u[i] = f[i] + lambda * dv[i];
        }
        grid.grad(&u, &mut gx, &mut gy);
        let prev = p.clone();
        for i in 0..n {
            let qx = r.0[i] + step * gx[i];
            let qy = r.1[i] + step * gy[i];
            let scale = (qx * qx + qy * qy).sqrt().max(1.0);
            p.0[i] = qx / scale;
            p.1[i] = qy / scale;
        }
        let t_next = (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0;
        let momentum = (t - 1.0) / t_next;
        for i in 0..n {
            r.0[i] = p.0[i] + momentum * (p.0[i] - prev.0[i]);
            r.1[i] = p.1[i] + momentum * (p.1[i] - prev.1[i]);
        }
        t = t_next;

        grid.div(&p.0, &p.1, &mut dv);
        for i in 0..n {
            u[i] = f[i] + lambda * dv[i];
        }
        let energy = tv_energy(&u, f, height, width, lambda);
        // keep the best primal iterate so the reported energy never rises
        if energy <= best_energy {
            best_energy = energy;
            best.copy_from_slice(&u);
        }
        energies.push(best_energy);
    }
    (best, energies)
}

/// TV denoising of a complex image, real and imaginary parts independently.
pub fn tv_denoise(img: &ComplexImage, lambda: f64, iters: usize) -> ComplexImage {
    let (h, w) = (img.height(), img.width());
    let re: Vec<f64> = img.data().iter().map(|v| v.re).collect();
    let im: Vec<f64> = img.data().iter().map(|v| v.im).collect();
    let (re, _) = tv_denoise_channel(&re, h, w, lambda, iters);
    let im = if im.iter().all(|&v| v == 0.0) {
        im
    } else {
        tv_denoise_channel(&im, h, w, lambda, iters).0
    };
    let data = re
        .into_iter()
        .zip(im)
        .map(|(a, b)| Complex64::new(a, b))
        .collect();
    ComplexImage::new(h, w, data).expect("tv output is finite")
}

/// Orthonormal DCT-II basis, row `k` holds frequency `k`.
fn dct_matrix(n: usize) -> Vec<f64> {
    let mut m = vec![0.0; n * n];
    for k in 0..n {
        let s = if k == 0 {
            (1.0 / n as f64).sqrt()
        } else {
            (2.0 / n as f64).sqrt()
        };
        for i in 0..n {
            m[k * n + i] =
                s * (std::f64::consts::PI * (2 * i + 1) as f64 * k as f64 / (2 * n) as f64).cos();
        }
    }
    m
}

fn separable(
    data: &[Complex64],
    h: usize,
    w: usize,
    rows: &[f64],
    cols: &[f64],
    transpose: bool,
) -> Vec<Complex64> {
    let pick = |m: &[f64], n: usize, a: usize, b: usize| {
        if transpose {
            m[b * n + a]
        } else {
            m[a * n + b]
        }
    };
    // along each row (width axis)
    let mut tmp = vec![Complex64::new(0.0, 0.0); h * w];
    for r in 0..h {
        for k in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..w {
                acc += data[r * w + i] * pick(cols, w, k, i);
            }
            tmp[r * w + k] = acc;
        }
    }
    // along each column (height axis)
    let mut out = vec![Complex64::new(0.0, 0.0); h * w];
    for k in 0..h {
        for c in 0..w {
            let mut acc = Complex64::new(0.0, 0.0);
            for i in 0..h {
                acc += tmp[i * w + c] * pick(rows, h, k, i);
            }
            out[k * w + c] = acc;
        }
    }
    out
}

pub fn dct2(img: &ComplexImage) -> ComplexImage {
    let (h, w) = (img.height(), img.width());
    let data = separable(img.data(), h, w, &dct_matrix(h), &dct_matrix(w), false);
    ComplexImage::new(h, w, data).expect("finite")
}

pub fn idct2(coeffs: &ComplexImage) -> ComplexImage {
    let (h, w) = (coeffs.height(), coeffs.width());
    let data = separable(coeffs.data(), h, w, &dct_matrix(h), &dct_matrix(w), true);
    ComplexImage::new(h, w, data).expect("finite")
}

/// Shrinks the modulus of `c` by `lambda`, keeping its phase.
pub fn complex_soft_threshold(c: Complex64, lambda: f64) -> Complex64 {
    let m = c.norm();
    if m <= lambda {
        Complex64::new(0.0, 0.0)
    } else {
        c * ((m - lambda) / m)
    }
}

/// Soft-thresholding of orthonormal 2D DCT coefficients.
pub fn soft_threshold_denoise(img: &ComplexImage, lambda: f64) -> ComplexImage {
    let coeffs = dct2(img).map(|c| complex_soft_threshold(c, lambda));
    idct2(&coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::forward::shepp_logan;
    use crate::sampling::{severity_context, CartesianMask, ConfidenceVector};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_image(h: usize, w: usize, rng: &mut ChaCha8Rng) -> ComplexImage {
        let data = (0..h * w)
            .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
            .collect();
        ComplexImage::new(h, w, data).unwrap()
    }

    fn params(strength: f64, gain: f64) -> DenoiserParams {
        DenoiserParams::new(strength, 20, gain).unwrap()
    }

    #[test]
    fn identity_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let z = fft2c(&random_image(8, 8, &mut rng)).unwrap();
        let ctx = SeverityContext::neutral(8, 1);
        let out = DenoiserKind::Identity
            .denoise(&z, &ctx, &params(0.1, 1.0), None)
            .unwrap();
        assert_eq!(out, z);
    }

    #[test]
    fn modulation_rules() {
        let p = params(0.2, 3.0);
        let full =
            severity_context(&CartesianMask::full(4), &ConfidenceVector::ones(4), 1).unwrap();
        assert_eq!(p.effective_strength(&full), 0.2);

        let m = CartesianMask::from_indices(4, &[0, 1]).unwrap();
        let low = severity_context(
            &m,
            &ConfidenceVector::new(vec![0.5, 0.5, 0.0, 0.0]).unwrap(),
            1,
        )
        .unwrap();
        assert!((p.effective_strength(&low) - 0.2 * (1.0 + 3.0 * 0.5)).abs() < 1e-15);
        assert_eq!(params(0.2, 0.0).effective_strength(&low), 0.2);
    }

    #[test]
    fn oracle_returns_ground_truth() {
        let gt = fft2c(&shepp_logan(8, 8).unwrap()).unwrap();
        let ctx = SeverityContext::neutral(8, 1);
        let z = KSpace::zeros(1, 8, 8);
        let out = DenoiserKind::Oracle
            .denoise(&z, &ctx, &params(0.1, 0.0), Some(&gt))
            .unwrap();
        assert_eq!(out, gt);
        assert!(matches!(
            DenoiserKind::Oracle.denoise(&z, &ctx, &params(0.1, 0.0), None),
            Err(Error::MissingInput(_))
        ));
    }

    #[test]
    fn tv_leaves_constants_alone() {
        let img = ComplexImage::new(6, 5, vec![Complex64::new(0.4, -0.2); 30]).unwrap();
        assert_eq!(tv_denoise(&img, 0.5, 50), img);
    }

    #[test]
    fn tv_vanishing_weight() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let img = random_image(12, 12, &mut rng);
        assert!(tv_denoise(&img, 1e-8, 50).max_abs_diff(&img) <= 1e-6);
    }

    #[test]
    fn tv_energy_monotone() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for lambda in [0.01, 0.1, 1.0] {
            let f: Vec<f64> = (0..20 * 17).map(|_| rng.random_range(0.0..1.0)).collect();
            let (_, e) = tv_denoise_channel(&f, 20, 17, lambda, 60);
            assert!(e.windows(2).all(|w| w[1] <= w[0]));
            assert!(e.last().unwrap() < &e[0]);
        }
    }

    #[test]
    fn tv_denoises_noisy_phantom() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let clean = shepp_logan(64, 64).unwrap();
        let noise: Vec<f64> = (0..64 * 64).map(|_| rng.random_range(-0.1..0.1)).collect();
        let noisy = ComplexImage::new(
            64,
            64,
            clean
                .data()
                .iter()
                .zip(&noise)
                .map(|(v, n)| v + n)
                .collect(),
        )
        .unwrap();
        let out = tv_denoise(&noisy, 0.03, 100);
        let err = |a: &ComplexImage| {
            a.data()
                .iter()
                .zip(clean.data())
                .map(|(x, y)| (x - y).norm_sqr())
                .sum::<f64>()
        };
        assert!(err(&out) < 0.5 * err(&noisy));
    }

    #[test]
    fn dct_is_orthonormal() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let img = random_image(7, 10, &mut rng);
        let c = dct2(&img);
        assert!((c.norm() - img.norm()).abs() < 1e-10 * img.norm());
        assert!(idct2(&c).max_abs_diff(&img) < 1e-12);
    }

    #[test]
    fn soft_threshold_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let img = random_image(9, 9, &mut rng);
        assert!(soft_threshold_denoise(&img, 0.0).max_abs_diff(&img) <= 1e-10);
        let big = dct2(&img).max_abs();
        assert_eq!(soft_threshold_denoise(&img, big).max_abs(), 0.0);

        // single coefficient of unit modulus
        let mut coeffs = ComplexImage::zeros(8, 8);
        let c = Complex64::from_polar(1.0, 0.7);
        coeffs.data_mut()[2 * 8 + 3] = c;
        let out = dct2(&soft_threshold_denoise(&idct2(&coeffs), 0.3));
        let v = out.get(2, 3);
        assert!((v.norm() - 0.7).abs() < 1e-12);
        assert!((v.arg() - 0.7).abs() < 1e-12);
    }

    #[test]
    fn wrappers_are_nonexpansive() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let ctx = SeverityContext::neutral(12, 1);
        for _ in 0..20 {
            let a = fft2c(&random_image(10, 12, &mut rng)).unwrap();
            let b = fft2c(&random_image(10, 12, &mut rng)).unwrap();
            let d_in = crate::numerics::l2_norm(
                &a.data()
                    .iter()
                    .zip(b.data())
                    .map(|(x, y)| x - y)
                    .collect::<Vec<_>>(),
            );
            for kind in [DenoiserKind::Identity, DenoiserKind::DctSoft] {
                let da = kind.denoise(&a, &ctx, &params(0.3, 0.0), None).unwrap();
                let db = kind.denoise(&b, &ctx, &params(0.3, 0.0), None).unwrap();
                let d_out = crate::numerics::l2_norm(
                    &da.data()
                        .iter()
                        .zip(db.data())
                        .map(|(x, y)| x - y)
                        .collect::<Vec<_>>(),
                );
                assert!(d_out <= (1.0 + 1e-6) * d_in);
            }
        }
    }

    #[test]
    fn kspace_wrapper_commutes_with_fft() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let z = fft2c(&random_image(16, 16, &mut rng)).unwrap();
        let ctx = SeverityContext::neutral(16, 1);
        let p = params(0.05, 0.0);
        let img = ifft2c(&z).unwrap();

        let via_k = ifft2c(&DenoiserKind::Tv.denoise(&z, &ctx, &p, None).unwrap()).unwrap();
        assert!(via_k.max_abs_diff(&tv_denoise(&img, 0.05, 20)) <= 1e-10);
        let via_k = ifft2c(&DenoiserKind::DctSoft.denoise(&z, &ctx, &p, None).unwrap()).unwrap();
        assert!(via_k.max_abs_diff(&soft_threshold_denoise(&img, 0.05)) <= 1e-10);
    }

    fn noisy_phantom(n: usize, seed: u64) -> ComplexImage {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let clean = shepp_logan(n, n).unwrap();
        let data = clean
            .data()
            .iter()
            .map(|v| v + Complex64::new(rng.random_range(-0.1..0.1), rng.random_range(-0.1..0.1)))
            .collect();
        ComplexImage::new(n, n, data).unwrap()
    }

    #[test]
    fn weighted_tv_with_unit_weights_is_rof() {
        let img = noisy_phantom(16, 8);
        let v = fft2c(&img).unwrap();
        let out = ifft2c(&weighted_tv(&v, &[1.0; 16], 0.05, 3000).unwrap()).unwrap();
        assert!(out.max_abs_diff(&tv_denoise(&img, 0.05, 3000)) < 1e-4);
    }

    #[test]
    fn weighted_tv_lowers_its_objective() {
        let img = noisy_phantom(16, 9);
        let v = fft2c(&img).unwrap();
        let weights: Vec<f64> = (0..16)
            .map(|c| if c % 3 == 0 { 1.0 } else { 0.05 })
            .collect();
        let out = ifft2c(&weighted_tv(&v, &weights, 0.05, 500).unwrap()).unwrap();
        let energy = |u: &ComplexImage| weighted_tv_energy(u, &v, &weights, 0.05).unwrap();
        assert!(energy(&out) < energy(&img));
        assert!(energy(&out) < energy(&tv_denoise(&img, 0.05, 500)));
        assert!(weighted_tv(&v, &[1.0; 15], 0.05, 1).is_err());
    }

    #[test]
    fn weighted_soft_threshold_first_step_is_the_prox() {
        let img = noisy_phantom(12, 10);
        let v = fft2c(&img).unwrap();
        let one = ifft2c(&weighted_soft_threshold(&v, &[1.0; 12], 0.2, 1).unwrap()).unwrap();
        assert!(one.max_abs_diff(&soft_threshold_denoise(&img, 0.2)) < 1e-12);
    }

    #[test]
    fn weighted_context_switches_solver() {
        let img = noisy_phantom(16, 11);
        let z = fft2c(&img).unwrap();
        let m = CartesianMask::from_indices(16, &[0, 5, 8, 12]).unwrap();
        let weights: Vec<f64> = m
            .cols()
            .iter()
            .map(|&s| if s { 1.0 } else { 0.1 })
            .collect();
        let ctx = severity_context(&m, &ConfidenceVector::ones(16), 1)
            .unwrap()
            .with_column_weights(weights.clone())
            .unwrap();
        assert!(!ctx.is_unweighted());
        let p = params(0.05, 0.0);
        let out = DenoiserKind::Tv.denoise(&z, &ctx, &p, None).unwrap();
        assert_eq!(out, weighted_tv(&z, &weights, 0.05, 20).unwrap());
        let out = DenoiserKind::DctSoft.denoise(&z, &ctx, &p, None).unwrap();
        assert_eq!(
            out,
            weighted_soft_threshold(&z, &weights, 0.05, 20).unwrap()
        );
        assert_eq!(
            DenoiserKind::Identity.denoise(&z, &ctx, &p, None).unwrap(),
            z
        );
    }

    #[test]
    fn parses_identifiers() {
        for k in [
            DenoiserKind::Identity,
            DenoiserKind::Tv,
            DenoiserKind::DctSoft,
            DenoiserKind::Oracle,
        ] {
            assert_eq!(k.as_str().parse::<DenoiserKind>().unwrap(), k);
        }
        assert!("bm3d".parse::<DenoiserKind>().is_err());
        assert!(DenoiserParams::new(0.0, 1, 0.0).is_err());
        assert!(DenoiserParams::new(1.0, 0, 0.0).is_err());
    }
}
