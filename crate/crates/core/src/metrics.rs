//! Image quality metrics and diagnostic losses.
//!
//! PSNR, SSIM and the l1 reconstruction loss act on magnitude images; NMSE
//! uses the complex difference.

use crate::error::{Error, Result};
use crate::numerics::ComplexImage;
use crate::sampling::{CartesianMask, ConfidenceVector};

/// SSIM window side and stability constants.
pub const SSIM_WINDOW: usize = 7;
pub const SSIM_K1: f64 = 0.01;
pub const SSIM_K2: f64 = 0.03;

/// Weight of the probability loss in the total loss.
pub const DEFAULT_ALPHA: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricSet {
    /// dB; `f64::INFINITY` for an exact reconstruction.
    pub psnr: f64,
    pub ssim: f64,
    pub nmse: f64,
    pub l_rec: f64,
    pub l_prob: f64,
    pub l_total: f64,
}

impl MetricSet {
    pub fn evaluate(x: &ComplexImage, gt: &ComplexImage, l_prob: f64, alpha: f64) -> Result<Self> {
        let l_rec = rec_loss(x, gt)?;
        Ok(Self {
            psnr: psnr(x, gt)?,
            ssim: ssim(x, gt)?,
            nmse: nmse(x, gt)?,
            l_rec,
            l_prob,
            l_total: total_loss(l_rec, l_prob, alpha)?,
        })
    }
}

/// Formats a PSNR value, writing the infinite case as `exact`.
pub fn format_psnr(psnr: f64) -> String {
    if psnr.is_infinite() {
        "exact".to_string()
    } else {
        format!("{psnr:.6}")
    }
}

fn peak(gt: &ComplexImage) -> Result<f64> {
    let p = gt.max_abs();
    if p == 0.0 {
        return Err(Error::UndefinedMetric(
            "ground truth is identically zero".into(),
        ));
    }
    Ok(p)
}

/// `10 log10(peak^2 / MSE)` on magnitudes, peak taken from `gt`.
pub fn psnr(x: &ComplexImage, gt: &ComplexImage) -> Result<f64> {
    x.same_shape(gt)?;
    let peak = peak(gt)?;
    let mse = x
        .data()
        .iter()
        .zip(gt.data())
        .map(|(a, b)| (a.norm() - b.norm()).powi(2))
        .sum::<f64>()
        / gt.data().len() as f64;
    if mse == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(10.0 * (peak * peak / mse).log10())
}

/// `||x - gt||^2 / ||gt||^2` on complex values.
pub fn nmse(x: &ComplexImage, gt: &ComplexImage) -> Result<f64> {
    x.same_shape(gt)?;
    let energy: f64 = gt.data().iter().map(|v| v.norm_sqr()).sum();
    if energy == 0.0 {
        return Err(Error::UndefinedMetric(
            "ground truth is identically zero".into(),
        ));
    }
    let err: f64 = x
        .data()
        .iter()
        .zip(gt.data())
        .map(|(a, b)| (a - b).norm_sqr())
        .sum();
    Ok(err / energy)
}

/// Mean local SSIM on magnitude images, data range = peak of `gt`.
pub fn ssim(x: &ComplexImage, gt: &ComplexImage) -> Result<f64> {
    x.same_shape(gt)?;
    ssim_real(
        &x.magnitude(),
        &gt.magnitude(),
        gt.height(),
        gt.width(),
        gt.max_abs(),
    )
}

/// Mean SSIM of two real images over every full `7 x 7` window, with sample
/// (N-1) covariance normalization.
pub fn ssim_real(a: &[f64], b: &[f64], h: usize, w: usize, data_range: f64) -> Result<f64> {
    if a.len() != h * w || b.len() != h * w {
        return Err(Error::Shape(format!("SSIM inputs do not match {h}x{w}")));
    }
    if h < SSIM_WINDOW || w < SSIM_WINDOW {
        return Err(Error::Dimension(format!(
            "SSIM needs at least {SSIM_WINDOW}x{SSIM_WINDOW} pixels, got {h}x{w}"
        )));
    }
    let np = (SSIM_WINDOW * SSIM_WINDOW) as f64;
    let cov_norm = np / (np - 1.0);
    let c1 = (SSIM_K1 * data_range).powi(2);
    let c2 = (SSIM_K2 * data_range).powi(2);

    let mut total = 0.0;
    let mut count = 0usize;
    for r0 in 0..=h - SSIM_WINDOW {
        for c0 in 0..=w - SSIM_WINDOW {
            let (mut sa, mut sb, mut saa, mut sbb, mut sab) = (0.0, 0.0, 0.0, 0.0, 0.0);
            for r in r0..r0 + SSIM_WINDOW {
                for c in c0..c0 + SSIM_WINDOW {
                    let (p, q) = (a[r * w + c], b[r * w + c]);
                    sa += p;
                    sb += q;
                    saa += p * p;
                    sbb += q * q;
                    sab += p * q;
                }
            }
            let (ua, ub) = (sa / np, sb / np);
            let va = cov_norm * (saa / np - ua * ua);
            let vb = cov_norm * (sbb / np - ub * ub);
            let vab = cov_norm * (sab / np - ua * ub);
            let num = (2.0 * ua * ub + c1) * (2.0 * vab + c2);
            let den = (ua * ua + ub * ub + c1) * (va + vb + c2);
            total += num / den;
            count += 1;
        }
    }
    Ok(total / count as f64)
}

/// Mean absolute difference of magnitude images.
pub fn rec_loss(x: &ComplexImage, gt: &ComplexImage) -> Result<f64> {
    x.same_shape(gt)?;
    Ok(x.data()
        .iter()
        .zip(gt.data())
        .map(|(a, b)| (a.norm() - b.norm()).abs())
        .sum::<f64>()
        / gt.data().len() as f64)
}

/// One iteration's contribution to the probability loss.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbTerm {
    pub mask: CartesianMask,
    pub confidence: ConfidenceVector,
    /// Squashed normalized column error `ê_t`.
    pub squashed_error: Vec<f64>,
}

/// `sum_t || m_t ⊙ (p_t - (1 - ê_t)) ||_1`.
pub fn prob_loss(trace: &[ProbTerm]) -> Result<f64> {
    let mut total = 0.0;
    for (t, term) in trace.iter().enumerate() {
        let w = term.mask.width();
        if term.confidence.width() != w || term.squashed_error.len() != w {
            return Err(Error::Shape(format!(
                "probability trace entry {t} has mismatched widths"
            )));
        }
        total += term
            .mask
            .cols()
            .iter()
            .zip(term.confidence.probs())
            .zip(&term.squashed_error)
            .filter(|((&m, _), _)| m)
            .map(|((_, &p), &e)| (p - (1.0 - e)).abs())
            .sum::<f64>();
    }
    Ok(total)
}

pub fn total_loss(l_rec: f64, l_prob: f64, alpha: f64) -> Result<f64> {
    if !(alpha >= 0.0 && alpha.is_finite()) {
        return Err(Error::config("alpha", "must be nonnegative"));
    }
    Ok(l_rec + alpha * l_prob)
}
