//! The progressive divide-and-conquer iteration and the HQS baseline.
//!
//! One PDAC iteration `t` runs three steps on the intermediate k-space
//! measurement `z`:
//!
//! 1. data consistency: closed-form blend of `z_{t-1}` (on the previous
//!    support) with the encoded current image estimate,
//! 2. reconstruction: a plug-in denoiser conditioned on the mask state,
//! 3. degradation: a predictor ranks the unsampled columns, the mask grows
//!    to the next budget and everything off it is zeroed.
//!
//! The schedule ends at the full width, so the last degradation keeps the
//! denoiser output untouched and the image is its adjoint.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::denoise::{DenoiserKind, DenoiserParams};
use crate::error::{Error, Result};
use crate::forward::{adjoint, apply_mask, encode, CoilSensitivities};
use crate::metrics::{self, MetricSet, ProbTerm};
use crate::numerics::{ComplexImage, KSpace};
use crate::sampling::{
    heuristic_confidence, next_mask, oracle_confidence, random_confidence, severity_context,
    validate_schedule, BudgetSchedule, CartesianMask, ConfidenceVector, SeverityContext,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredictorKind {
    /// Confidence from the true normalized column error (needs ground truth).
    Oracle,
    /// Relative change between successive denoised estimates.
    Heuristic,
    /// Uniform random confidences.
    Random,
}

impl PredictorKind {
    pub const ALL: [PredictorKind; 3] = [
        PredictorKind::Oracle,
        PredictorKind::Heuristic,
        PredictorKind::Random,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            PredictorKind::Oracle => "oracle",
            PredictorKind::Heuristic => "heuristic",
            PredictorKind::Random => "random",
        }
    }
}

impl fmt::Display for PredictorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for PredictorKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "oracle" => Ok(PredictorKind::Oracle),
            "heuristic" => Ok(PredictorKind::Heuristic),
            "random" => Ok(PredictorKind::Random),
            other => Err(Error::config(
                "predictor",
                format!("unknown predictor `{other}`"),
            )),
        }
    }
}

/// How the image estimate used by data consistency evolves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ImageUpdate {
    /// `x` is recomputed as the adjoint of `z_t` after every iteration.
    Refresh,
    /// `x` stays at the zero-filled reconstruction of the measurement.
    Frozen,
}

impl ImageUpdate {
    pub fn as_str(&self) -> &'static str {
        match self {
            ImageUpdate::Refresh => "refresh",
            ImageUpdate::Frozen => "frozen",
        }
    }
}

impl FromStr for ImageUpdate {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "refresh" => Ok(ImageUpdate::Refresh),
            "frozen" => Ok(ImageUpdate::Frozen),
            other => Err(Error::config("x_update", format!("unknown mode `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PdacConfig {
    /// Budgets `b_0 .. b_T`; `T` is one less than its length.
    pub schedule: BudgetSchedule,
    /// Penalty weights `mu_0 .. mu_T`.
    pub mu: Vec<f64>,
    pub denoiser: DenoiserKind,
    /// Denoiser strengths for iterations `1 ..= T`.
    pub lambdas: Vec<f64>,
    pub inner_iterations: usize,
    pub modulation_gain: f64,
    pub predictor: PredictorKind,
    pub image_update: ImageUpdate,
    pub alpha: f64,
    pub seed: u64,
}

impl PdacConfig {
    /// Unit penalties and a constant denoiser strength for every iteration.
    pub fn new(schedule: BudgetSchedule, denoiser: DenoiserKind, lambda: f64) -> Self {
        let t = schedule.steps();
        Self {
            mu: vec![1.0; t + 1],
            lambdas: vec![lambda; t],
            schedule,
            denoiser,
            inner_iterations: 50,
            modulation_gain: 1.0,
            predictor: PredictorKind::Oracle,
            image_update: ImageUpdate::Refresh,
            alpha: metrics::DEFAULT_ALPHA,
            seed: 0,
        }
    }

    pub fn iterations(&self) -> usize {
        self.schedule.steps()
    }

    pub fn validate(&self) -> Result<()> {
        let t = self.iterations();
        if self.mu.len() != t + 1 {
            return Err(Error::config(
                "mu",
                format!("expected {} penalty weights, got {}", t + 1, self.mu.len()),
            ));
        }
        if let Some(bad) = self.mu.iter().find(|m| !(**m > 0.0 && m.is_finite())) {
            return Err(Error::config(
                "mu",
                format!("penalty weight {bad} is not positive"),
            ));
        }
        if self.lambdas.len() != t {
            return Err(Error::config(
                "lambda",
                format!(
                    "expected {t} denoiser strengths, got {}",
                    self.lambdas.len()
                ),
            ));
        }
        for &l in &self.lambdas {
            DenoiserParams::new(l, self.inner_iterations, self.modulation_gain)?;
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite()) {
            return Err(Error::config("alpha", "must be nonnegative"));
        }
        Ok(())
    }

    fn params(&self, t: usize) -> DenoiserParams {
        DenoiserParams {
            strength: self.lambdas[t - 1],
            inner_iterations: self.inner_iterations,
            modulation_gain: self.modulation_gain,
        }
    }
}

/// Loop state after one iteration; `z` is zero off the support of `mask`.
#[derive(Debug, Clone, PartialEq)]
pub struct IterateState {
    pub z: KSpace,
    pub x: ComplexImage,
    pub mask: CartesianMask,
    pub confidence: ConfidenceVector,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    pub budget: usize,
    pub mask: CartesianMask,
    /// Mean of `m_t ⊙ p_t` over the support of `m_t`.
    pub mean_masked_confidence: f64,
    pub psnr: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReconReport {
    pub final_image: ComplexImage,
    pub per_iteration: Vec<IterationRecord>,
    pub metrics: Option<MetricSet>,
    /// Probability loss over the run; only known with ground truth and a predictor.
    pub prob_loss: Option<f64>,
    /// Columns where the ground-truth column sum vanished.
    pub flagged_columns: Vec<usize>,
}

fn check_mu(mu: f64, key: &str) -> Result<()> {
    if !(mu > 0.0 && mu.is_finite()) {
        return Err(Error::config(
            key,
            format!("penalty weight {mu} is not positive"),
        ));
    }
    Ok(())
}

/// Closed-form minimizer of
/// `mu_prev ||z_prev - D_prev z||^2 + mu_t ||z - ax||^2`, entrywise:
/// `(mu_prev d z_prev + mu_t ax) / (mu_prev d + mu_t)` with `d` the column
/// indicator of `m_prev`.
pub fn data_consistency(
    z_prev: &KSpace,
    m_prev: &CartesianMask,
    ax: &KSpace,
    mu_prev: f64,
    mu_t: f64,
) -> Result<KSpace> {
    check_mu(mu_prev, "mu")?;
    check_mu(mu_t, "mu")?;
    z_prev.same_shape(ax)?;
    if m_prev.width() != z_prev.width() {
        return Err(Error::Shape(format!(
            "mask width {} vs k-space width {}",
            m_prev.width(),
            z_prev.width()
        )));
    }
    let w = z_prev.width();
    let data = z_prev
        .data()
        .iter()
        .zip(ax.data())
        .enumerate()
        .map(|(i, (&z, &a))| {
            if m_prev.is_sampled(i % w) {
                (z * mu_prev + a * mu_t) / (mu_prev + mu_t)
            } else {
                a
            }
        })
        .collect();
    KSpace::new(z_prev.coils(), z_prev.height(), w, data)
}

/// Diagonal of `U_t^T U_t` per column, scaled so the previous support has
/// weight 1: `mu_t / (mu_prev + mu_t)` elsewhere.
pub fn consistency_weights(m_prev: &CartesianMask, mu_prev: f64, mu_t: f64) -> Vec<f64> {
    let off = mu_t / (mu_prev + mu_t);
    m_prev
        .cols()
        .iter()
        .map(|&s| if s { 1.0 } else { off })
        .collect()
}

/// Orthogonal projection onto the columns of `m`.
pub fn degrade(z: &KSpace, m: &CartesianMask) -> Result<KSpace> {
    let mut out = z.clone();
    apply_mask(&mut out, m)?;
    Ok(out)
}

/// Minimizer of `||y - D z||^2 + mu ||z - encode(x_prev)||^2`, entrywise
/// `(d y + mu Fx) / (d + mu)`.
pub fn hqs_data_consistency(
    x_prev: &ComplexImage,
    y: &KSpace,
    m0: &CartesianMask,
    mu: f64,
    sens: Option<&CoilSensitivities>,
) -> Result<KSpace> {
    check_mu(mu, "mu")?;
    let fx = encode(x_prev, sens)?;
    fx.same_shape(y)?;
    if m0.width() != y.width() {
        return Err(Error::Shape("mask and measurement widths differ".into()));
    }
    let w = y.width();
    let data = y
        .data()
        .iter()
        .zip(fx.data())
        .enumerate()
        .map(|(i, (&yv, &fv))| {
            if m0.is_sampled(i % w) {
                (yv + fv * mu) / (1.0 + mu)
            } else {
                fv
            }
        })
        .collect();
    KSpace::new(y.coils(), y.height(), w, data)
}

/// Adjoint reconstruction of the raw measurement.
pub fn zero_filled(y: &KSpace, sens: Option<&CoilSensitivities>) -> Result<ComplexImage> {
    adjoint(y, resolve_sens(y, sens)?)
}

fn resolve_sens<'a>(
    y: &KSpace,
    sens: Option<&'a CoilSensitivities>,
) -> Result<Option<&'a CoilSensitivities>> {
    match sens {
        Some(s) => {
            if s.coils() != y.coils() || s.height() != y.height() || s.width() != y.width() {
                return Err(Error::Shape(format!(
                    "{}x{}x{} sensitivities vs {}x{}x{} measurement",
                    s.coils(),
                    s.height(),
                    s.width(),
                    y.coils(),
                    y.height(),
                    y.width()
                )));
            }
            s.validate()?;
            Ok(Some(s))
        }
        None if y.coils() > 1 => Err(Error::MissingInput(
            "multi-coil measurement needs coil sensitivities".into(),
        )),
        None => Ok(None),
    }
}

struct RunInputs<'a> {
    sens: Option<&'a CoilSensitivities>,
    gt: Option<&'a KSpace>,
    gt_image: Option<ComplexImage>,
}

fn prepare<'a>(
    y: &KSpace,
    m0: &CartesianMask,
    cfg: &PdacConfig,
    sens: Option<&'a CoilSensitivities>,
    gt: Option<&'a KSpace>,
) -> Result<RunInputs<'a>> {
    cfg.validate()?;
    if m0.width() != y.width() {
        return Err(Error::Shape(format!(
            "mask width {} vs measurement width {}",
            m0.width(),
            y.width()
        )));
    }
    validate_schedule(&cfg.schedule, y.width(), m0.budget())?;
    let w = y.width();
    if y.data()
        .iter()
        .enumerate()
        .any(|(i, v)| !m0.is_sampled(i % w) && *v != Complex64::new(0.0, 0.0))
    {
        return Err(Error::Validation(
            "measurement is not zero-filled outside the acquisition mask".into(),
        ));
    }
    let sens = resolve_sens(y, sens)?;
    if let Some(g) = gt {
        g.same_shape(y)?;
    }
    let needs_gt = cfg.predictor == PredictorKind::Oracle || cfg.denoiser == DenoiserKind::Oracle;
    if needs_gt && gt.is_none() {
        return Err(Error::MissingInput(
            "oracle predictor/denoiser needs ground-truth k-space".into(),
        ));
    }
    let gt_image = gt.map(|g| adjoint(g, sens)).transpose()?;
    Ok(RunInputs { sens, gt, gt_image })
}

fn intermediate_psnr(x: &ComplexImage, gt_image: Option<&ComplexImage>) -> Result<Option<f64>> {
    gt_image.map(|g| metrics::psnr(x, g)).transpose()
}

/// Runs the PDAC iteration on a zero-filled measurement `y` acquired with `m0`.
pub fn pdac_reconstruct(
    y: &KSpace,
    m0: &CartesianMask,
    cfg: &PdacConfig,
    sens: Option<&CoilSensitivities>,
    gt: Option<&KSpace>,
) -> Result<ReconReport> {
    pdac_observed(y, m0, cfg, sens, gt, |_| {})
}

/// `pdac_reconstruct` that also hands every intermediate state to `observe`.
pub fn pdac_observed(
    y: &KSpace,
    m0: &CartesianMask,
    cfg: &PdacConfig,
    sens: Option<&CoilSensitivities>,
    gt: Option<&KSpace>,
    mut observe: impl FnMut(&IterateState),
) -> Result<ReconReport> {
    let run = prepare(y, m0, cfg, sens, gt)?;
    let sens = run.sens;
    let budgets = cfg.schedule.budgets();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);

    // acquired columns are trusted before any prediction exists
    let mut state = IterateState {
        z: y.clone(),
        x: adjoint(y, sens)?,
        mask: m0.clone(),
        confidence: ConfidenceVector::ones(y.width()),
    };
    let mut previous_estimate: Option<KSpace> = None;

    let mut records = Vec::with_capacity(cfg.iterations());
    let mut prob_terms = Vec::new();
    let mut flagged = Vec::new();

    for t in 1..=cfg.iterations() {
        // m_t is only known after the prediction below, so the encoded
        // estimate is restricted to the latest known support m_{t-1}
        let ax = degrade(&encode(&state.x, sens)?, &state.mask)?;
        let z_dc = data_consistency(&state.z, &state.mask, &ax, cfg.mu[t - 1], cfg.mu[t])?;

        let ctx = severity_context(&state.mask, &state.confidence, t)?
            .with_column_weights(consistency_weights(&state.mask, cfg.mu[t - 1], cfg.mu[t]))?;
        let z_tilde = cfg.denoiser.denoise(&z_dc, &ctx, &cfg.params(t), run.gt)?;

        let oracle = run.gt.map(|g| oracle_confidence(&z_tilde, g)).transpose()?;
        let p = match cfg.predictor {
            PredictorKind::Oracle => oracle
                .as_ref()
                .expect("ground truth checked in prepare")
                .confidence
                .clone(),
            PredictorKind::Heuristic => {
                heuristic_confidence(previous_estimate.as_ref().unwrap_or(&z_dc), &z_tilde)?
            }
            PredictorKind::Random => random_confidence(y.width(), &mut rng),
        };

        let mask = next_mask(&state.mask, &p, budgets[t])?;
        let z = degrade(&z_tilde, &mask)?;
        let current = adjoint(&z, sens)?;

        let ctx_t = severity_context(&mask, &p, t)?;
        if let Some(o) = oracle {
            for &j in &o.flagged {
                if !flagged.contains(&j) {
                    flagged.push(j);
                }
            }
            prob_terms.push(ProbTerm {
                mask: mask.clone(),
                confidence: p.clone(),
                squashed_error: o.squashed_error,
            });
        }
        records.push(IterationRecord {
            iteration: t,
            budget: mask.budget(),
            mask: mask.clone(),
            mean_masked_confidence: ctx_t.mean_support_confidence(),
            psnr: intermediate_psnr(&current, run.gt_image.as_ref())?,
        });

        if cfg.image_update == ImageUpdate::Refresh {
            state.x = current;
        }
        state.z = z;
        state.mask = mask;
        state.confidence = p;
        observe(&state);
        previous_estimate = Some(z_tilde);
    }

    let final_image = adjoint(&state.z, sens)?;
    let prob_loss = if run.gt.is_some() {
        Some(metrics::prob_loss(&prob_terms)?)
    } else {
        None
    };
    let metrics = run
        .gt_image
        .as_ref()
        .map(|g| MetricSet::evaluate(&final_image, g, prob_loss.unwrap_or(0.0), cfg.alpha))
        .transpose()?;
    flagged.sort_unstable();
    Ok(ReconReport {
        final_image,
        per_iteration: records,
        metrics,
        prob_loss,
        flagged_columns: flagged,
    })
}

/// Conventional unfolding: every iteration restores consistency with the
/// original measurement on `m0` and denoises the whole image.
pub fn hqs_reconstruct(
    y: &KSpace,
    m0: &CartesianMask,
    cfg: &PdacConfig,
    sens: Option<&CoilSensitivities>,
    gt: Option<&KSpace>,
) -> Result<ReconReport> {
    let mut hqs_cfg = cfg.clone();
    // no predictor runs here; only the oracle denoiser needs ground truth
    hqs_cfg.predictor = PredictorKind::Random;
    let run = prepare(y, m0, &hqs_cfg, sens, gt)?;
    let sens = run.sens;
    let ones = ConfidenceVector::ones(y.width());

    let mut x = adjoint(y, sens)?;
    let mut records = Vec::with_capacity(cfg.iterations());
    for t in 1..=cfg.iterations() {
        let z = hqs_data_consistency(&x, y, m0, cfg.mu[t], sens)?;
        let ctx: SeverityContext = severity_context(m0, &ones, t)?;
        let z_tilde = cfg.denoiser.denoise(&z, &ctx, &cfg.params(t), run.gt)?;
        x = adjoint(&z_tilde, sens)?;
        records.push(IterationRecord {
            iteration: t,
            budget: m0.budget(),
            mask: m0.clone(),
            mean_masked_confidence: ctx.mean_support_confidence(),
            psnr: intermediate_psnr(&x, run.gt_image.as_ref())?,
        });
    }
    let metrics = run
        .gt_image
        .as_ref()
        .map(|g| MetricSet::evaluate(&x, g, 0.0, cfg.alpha))
        .transpose()?;
    Ok(ReconReport {
        final_image: x,
        per_iteration: records,
        metrics,
        prob_loss: None,
        flagged_columns: Vec::new(),
    })
}
