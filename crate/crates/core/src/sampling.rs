//! Cartesian column masks, budget schedules and the nested mask machinery.
//!
//! A Cartesian mask selects whole k-space columns. The acquisition mask
//! `m_0` is grown one schedule step at a time by [`next_mask`] until the
//! final mask covers every column; each step keeps the previous support.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::numerics::KSpace;

/// Guard added to column norms in [`heuristic_confidence`].
pub const HEURISTIC_EPS: f64 = 1e-12;

/// Decay ratio between successive increments of a coarse-to-fine schedule.
pub const COARSE_TO_FINE_RATIO: f64 = 0.6;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CartesianMask {
    cols: Vec<bool>,
}

impl CartesianMask {
    pub fn new(cols: Vec<bool>) -> Result<Self> {
        if cols.is_empty() {
            return Err(Error::Dimension("mask width must be positive".into()));
        }
        if !cols.iter().any(|&c| c) {
            return Err(Error::Validation(
                "mask must sample at least one column".into(),
            ));
        }
        Ok(Self { cols })
    }

    pub fn full(width: usize) -> Self {
        Self {
            cols: vec![true; width],
        }
    }

    pub fn from_indices(width: usize, indices: &[usize]) -> Result<Self> {
        let mut cols = vec![false; width];
        for &i in indices {
            if i >= width {
                return Err(Error::Validation(format!(
                    "column {i} outside mask of width {width}"
                )));
            }
            cols[i] = true;
        }
        Self::new(cols)
    }

    pub fn width(&self) -> usize {
        self.cols.len()
    }

    pub fn cols(&self) -> &[bool] {
        &self.cols
    }

    pub fn is_sampled(&self, col: usize) -> bool {
        self.cols[col]
    }

    /// Number of sampled columns.
    pub fn budget(&self) -> usize {
        self.cols.iter().filter(|&&c| c).count()
    }

    pub fn is_full(&self) -> bool {
        self.cols.iter().all(|&c| c)
    }

    pub fn indicator(&self) -> Vec<f64> {
        self.cols
            .iter()
            .map(|&c| if c { 1.0 } else { 0.0 })
            .collect()
    }

    /// True when every column sampled here is also sampled in `other`.
    pub fn is_subset_of(&self, other: &CartesianMask) -> bool {
        self.width() == other.width() && self.cols.iter().zip(&other.cols).all(|(&a, &b)| !a || b)
    }
}

impl fmt::Display for CartesianMask {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &c in &self.cols {
            f.write_str(if c { "1" } else { "0" })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BudgetSchedule {
    budgets: Vec<usize>,
}

impl BudgetSchedule {
    /// Wraps raw budgets without checking them; see [`validate_schedule`].
    pub fn new(budgets: Vec<usize>) -> Self {
        Self { budgets }
    }

    pub fn budgets(&self) -> &[usize] {
        &self.budgets
    }

    /// Number of iterations `T` (one fewer than the number of budgets).
    pub fn steps(&self) -> usize {
        self.budgets.len().saturating_sub(1)
    }

    pub fn increments(&self) -> Vec<usize> {
        self.budgets.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScheduleShape {
    CoarseToFine,
    Uniform,
    FineToCoarse,
}

impl ScheduleShape {
    pub const ALL: [ScheduleShape; 3] = [
        ScheduleShape::CoarseToFine,
        ScheduleShape::Uniform,
        ScheduleShape::FineToCoarse,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            ScheduleShape::CoarseToFine => "coarse-to-fine",
            ScheduleShape::Uniform => "uniform",
            ScheduleShape::FineToCoarse => "fine-to-coarse",
        }
    }
}

impl fmt::Display for ScheduleShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScheduleShape {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "coarse-to-fine" => Ok(ScheduleShape::CoarseToFine),
            "uniform" => Ok(ScheduleShape::Uniform),
            "fine-to-coarse" => Ok(ScheduleShape::FineToCoarse),
            other => Err(Error::config(
                "schedule",
                format!("unknown shape `{other}`"),
            )),
        }
    }
}

/// Nested masks `m_0 ⊆ m_1 ⊆ ... ⊆ m_T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskSequence {
    masks: Vec<CartesianMask>,
}

impl MaskSequence {
    pub fn new(masks: Vec<CartesianMask>) -> Self {
        Self { masks }
    }

    pub fn masks(&self) -> &[CartesianMask] {
        &self.masks
    }

    /// Checks nesting, per-step budgets and that the last mask is full.
    pub fn validate(&self, schedule: &BudgetSchedule) -> Result<()> {
        if self.masks.len() != schedule.budgets().len() {
            return Err(Error::Validation(format!(
                "{} masks for {} budgets",
                self.masks.len(),
                schedule.budgets().len()
            )));
        }
        for (t, (mask, &b)) in self.masks.iter().zip(schedule.budgets()).enumerate() {
            if mask.budget() != b {
                return Err(Error::schedule(
                    t,
                    format!("mask samples {} columns, budget is {b}", mask.budget()),
                ));
            }
            if t > 0 && !self.masks[t - 1].is_subset_of(mask) {
                return Err(Error::schedule(t, "mask does not contain its predecessor"));
            }
        }
        match self.masks.last() {
            Some(last) if last.is_full() => Ok(()),
            _ => Err(Error::Validation("final mask is not full".into())),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConfidenceVector {
    probs: Vec<f64>,
}

impl ConfidenceVector {
    pub fn new(probs: Vec<f64>) -> Result<Self> {
        if let Some(i) = probs
            .iter()
            .position(|p| !p.is_finite() || *p < 0.0 || *p > 1.0)
        {
            return Err(Error::Validation(format!(
                "confidence {} at column {i} outside [0, 1]",
                probs[i]
            )));
        }
        Ok(Self { probs })
    }

    pub fn ones(width: usize) -> Self {
        Self {
            probs: vec![1.0; width],
        }
    }

    pub fn width(&self) -> usize {
        self.probs.len()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }
}

/// Conditioning input handed to the denoiser at one iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SeverityContext {
    pub iteration: usize,
    pub masked_confidence: Vec<f64>,
    pub budget_fraction: f64,
    support: Vec<bool>,
    column_weights: Vec<f64>,
}

impl SeverityContext {
    /// Context of a fully trusted, fully sampled state; disables modulation.
    pub fn neutral(width: usize, iteration: usize) -> Self {
        Self {
            iteration,
            masked_confidence: vec![1.0; width],
            budget_fraction: 1.0,
            support: vec![true; width],
            column_weights: vec![1.0; width],
        }
    }

    /// Relative per-column data weights for the weighted denoising problem.
    /// Entries must lie in `[0, 1]` with at least one equal to 1.
    pub fn with_column_weights(mut self, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != self.support.len() {
            return Err(Error::Shape(format!(
                "{} column weights for width {}",
                weights.len(),
                self.support.len()
            )));
        }
        if weights.iter().any(|w| !(0.0..=1.0).contains(w)) || !weights.contains(&1.0) {
            return Err(Error::Validation(
                "column weights must lie in [0, 1] and reach 1".into(),
            ));
        }
        self.column_weights = weights;
        Ok(self)
    }

    pub fn column_weights(&self) -> &[f64] {
        &self.column_weights
    }

    /// True when every column carries the same weight.
    pub fn is_unweighted(&self) -> bool {
        self.column_weights.iter().all(|&w| w == 1.0)
    }

    /// Mean of the masked confidence over the mask support.
    pub fn mean_support_confidence(&self) -> f64 {
        let (sum, n) = self
            .masked_confidence
            .iter()
            .zip(&self.support)
            .filter(|(_, &s)| s)
            .fold((0.0, 0usize), |(s, n), (&v, _)| (s + v, n + 1));
        if n == 0 {
            1.0
        } else {
            sum / n as f64
        }
    }
}

/// Acquisition mask with a fully sampled center block and the rest of the
/// budget spread equispaced over the remaining columns.
pub fn make_acquisition_mask(
    width: usize,
    acceleration: usize,
    center_fraction: f64,
    seed: u64,
) -> Result<CartesianMask> {
    if acceleration == 0 {
        return Err(Error::config("acceleration", "must be at least 1"));
    }
    if width < acceleration {
        return Err(Error::config(
            "acceleration",
            format!("{acceleration} exceeds width {width}"),
        ));
    }
    if !(center_fraction > 0.0 && center_fraction < 1.0) {
        return Err(Error::config("center_fraction", "must lie in (0, 1)"));
    }

    let budget = (width as f64 / acceleration as f64).round() as usize;
    let n_center = (center_fraction * width as f64).round() as usize;
    if budget < n_center {
        return Err(Error::config(
            "center_fraction",
            format!("center block of {n_center} columns exceeds budget {budget}"),
        ));
    }

    let mut cols = vec![false; width];
    if n_center > 0 {
        // odd remainder goes to the right of the center column
        let start = width / 2 - (n_center - 1) / 2;
        for c in cols.iter_mut().skip(start).take(n_center) {
            *c = true;
        }
    }

    let remaining = budget - n_center;
    if remaining > 0 {
        let off_center: Vec<usize> = (0..width).filter(|&c| !cols[c]).collect();
        let spacing = off_center.len() as f64 / remaining as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let offset = rng.random::<f64>() * spacing;
        for k in 0..remaining {
            let idx = ((offset + k as f64 * spacing).floor() as usize).min(off_center.len() - 1);
            cols[off_center[idx]] = true;
        }
    }
    CartesianMask::new(cols)
}

/// Confirms `b_0 = m0_budget`, strict growth and `b_T = width`.
pub fn validate_schedule(
    schedule: &BudgetSchedule,
    width: usize,
    m0_budget: usize,
) -> Result<BudgetSchedule> {
    let b = schedule.budgets();
    if b.is_empty() {
        return Err(Error::schedule(0, "schedule is empty"));
    }
    if b[0] != m0_budget {
        return Err(Error::schedule(
            0,
            format!("starts at {} but the acquisition samples {m0_budget}", b[0]),
        ));
    }
    for t in 1..b.len() {
        if b[t] <= b[t - 1] {
            return Err(Error::schedule(
                t,
                format!("{} does not exceed {}", b[t], b[t - 1]),
            ));
        }
    }
    let last = b.len() - 1;
    if b[last] != width {
        return Err(Error::schedule(
            last,
            format!("ends at {} instead of the full width {width}", b[last]),
        ));
    }
    Ok(schedule.clone())
}

/// Generates budgets from `m0_budget` up to `width` in `steps` increments.
///
/// * uniform: `round(gap / steps)` per step, remainder on the last step
///   (falls back to the floor when rounding would overshoot).
/// * coarse-to-fine: one column per step, the rest split in proportion to
///   `COARSE_TO_FINE_RATIO^k` by largest remainder, sorted non-increasing.
/// * fine-to-coarse: coarse-to-fine increments reversed.
pub fn make_schedule(
    width: usize,
    m0_budget: usize,
    steps: usize,
    shape: ScheduleShape,
) -> Result<BudgetSchedule> {
    if steps == 0 {
        return Err(Error::schedule(0, "at least one step is required"));
    }
    if m0_budget == width {
        // fully sampled acquisition: nothing left to grow
        return Ok(BudgetSchedule::new(vec![width]));
    }
    if m0_budget == 0 || m0_budget > width {
        return Err(Error::schedule(
            0,
            format!("initial budget {m0_budget} must lie in [1, {width}]"),
        ));
    }
    let gap = width - m0_budget;
    if gap < steps {
        return Err(Error::schedule(
            gap + 1,
            format!("{steps} steps cannot strictly increase over a gap of {gap} columns"),
        ));
    }

    let increments = match shape {
        ScheduleShape::Uniform => uniform_increments(gap, steps),
        ScheduleShape::CoarseToFine => coarse_to_fine_increments(gap, steps),
        ScheduleShape::FineToCoarse => {
            let mut inc = coarse_to_fine_increments(gap, steps);
            inc.reverse();
            inc
        }
    };

    let mut budgets = Vec::with_capacity(steps + 1);
    budgets.push(m0_budget);
    for inc in increments {
        budgets.push(budgets.last().unwrap() + inc);
    }
    debug_assert_eq!(*budgets.last().unwrap(), width);
    Ok(BudgetSchedule::new(budgets))
}

fn uniform_increments(gap: usize, steps: usize) -> Vec<usize> {
    let rounded = (gap as f64 / steps as f64).round() as usize;
    let step = if rounded * (steps - 1) < gap {
        rounded
    } else {
        gap / steps
    };
    let mut inc = vec![step; steps];
    inc[steps - 1] = gap - step * (steps - 1);
    inc
}

fn coarse_to_fine_increments(gap: usize, steps: usize) -> Vec<usize> {
    let extra = gap - steps;
    let weights: Vec<f64> = (0..steps)
        .map(|k| COARSE_TO_FINE_RATIO.powi(k as i32))
        .collect();
    let total: f64 = weights.iter().sum();
    let shares: Vec<f64> = weights.iter().map(|w| w / total * extra as f64).collect();
    let mut inc: Vec<usize> = shares.iter().map(|s| s.floor() as usize).collect();
    let mut leftover = extra - inc.iter().sum::<usize>();

    let mut order: Vec<usize> = (0..steps).collect();
    order.sort_by(|&a, &b| {
        let ra = shares[a] - shares[a].floor();
        let rb = shares[b] - shares[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    for &k in &order {
        if leftover == 0 {
            break;
        }
        inc[k] += 1;
        leftover -= 1;
    }
    let mut inc: Vec<usize> = inc.into_iter().map(|v| v + 1).collect();
    inc.sort_unstable_by(|a, b| b.cmp(a));
    inc
}

/// Grows `prev` by the `b_next - |prev|` unsampled columns of highest
/// confidence. Ties go to the smaller column index.
pub fn next_mask(
    prev: &CartesianMask,
    confidence: &ConfidenceVector,
    b_next: usize,
) -> Result<CartesianMask> {
    let width = prev.width();
    if confidence.width() != width {
        return Err(Error::Shape(format!(
            "confidence width {} vs mask width {width}",
            confidence.width()
        )));
    }
    if b_next > width {
        return Err(Error::schedule(
            0,
            format!("budget {b_next} exceeds width {width}"),
        ));
    }
    let have = prev.budget();
    if b_next < have {
        return Err(Error::schedule(
            0,
            format!("budget {b_next} is below the current {have} columns"),
        ));
    }

    let p = confidence.probs();
    let mut candidates: Vec<usize> = (0..width).filter(|&j| !prev.is_sampled(j)).collect();
    candidates.sort_by(|&a, &b| p[b].total_cmp(&p[a]).then(a.cmp(&b)));

    let mut cols = prev.cols().to_vec();
    for &j in candidates.iter().take(b_next - have) {
        cols[j] = true;
    }
    CartesianMask::new(cols)
}

/// `2 * sigmoid(-|e|)`, i.e. `1 - (2 * sigmoid(|e|) - 1)`, without overflow.
pub fn squash_confidence(abs_error: f64) -> f64 {
    2.0 / (1.0 + abs_error.exp())
}

/// Result of [`oracle_confidence`].
#[derive(Debug, Clone, PartialEq)]
pub struct OracleConfidence {
    /// `p_j = 1 - ê_j`.
    pub confidence: ConfidenceVector,
    /// Squashed normalized column error `ê_j = 2 * sigmoid(|e_j|) - 1`.
    pub squashed_error: Vec<f64>,
    /// Columns whose ground-truth sum vanished; they get confidence 0.
    pub flagged: Vec<usize>,
}

fn column_sums(k: &KSpace) -> Vec<Complex64> {
    let (h, w) = (k.height(), k.width());
    let mut sums = vec![Complex64::new(0.0, 0.0); w];
    for c in 0..k.coils() {
        let coil = k.coil(c);
        for r in 0..h {
            for (j, s) in sums.iter_mut().enumerate() {
                *s += coil[r * w + j];
            }
        }
    }
    sums
}

/// Ground-truth confidence from the normalized error of complex column sums.
pub fn oracle_confidence(z_tilde: &KSpace, y_gt: &KSpace) -> Result<OracleConfidence> {
    z_tilde.same_shape(y_gt)?;
    let recon = column_sums(z_tilde);
    let truth = column_sums(y_gt);

    let mut probs = Vec::with_capacity(truth.len());
    let mut squashed = Vec::with_capacity(truth.len());
    let mut flagged = Vec::new();
    for (j, (r, g)) in recon.iter().zip(&truth).enumerate() {
        if g.norm() <= f64::MIN_POSITIVE {
            flagged.push(j);
            probs.push(0.0);
            squashed.push(1.0);
            continue;
        }
        let e = ((r - g) / g).norm();
        let p = squash_confidence(e);
        probs.push(p);
        squashed.push(1.0 - p);
    }
    Ok(OracleConfidence {
        confidence: ConfidenceVector::new(probs)?,
        squashed_error: squashed,
        flagged,
    })
}

/// Ground-truth-free confidence from the relative per-column change
/// between two successive k-space estimates.
pub fn heuristic_confidence(z_pre: &KSpace, z_post: &KSpace) -> Result<ConfidenceVector> {
    z_pre.same_shape(z_post)?;
    let (h, w) = (z_pre.height(), z_pre.width());
    let mut diff = vec![0.0; w];
    let mut base = vec![0.0; w];
    for c in 0..z_pre.coils() {
        let (a, b) = (z_pre.coil(c), z_post.coil(c));
        for r in 0..h {
            for j in 0..w {
                let i = r * w + j;
                diff[j] += (b[i] - a[i]).norm_sqr();
                base[j] += a[i].norm_sqr();
            }
        }
    }
    let probs = diff
        .iter()
        .zip(&base)
        .map(|(d, b)| squash_confidence(d.sqrt() / (b.sqrt() + HEURISTIC_EPS)))
        .collect();
    ConfidenceVector::new(probs)
}

/// Uniform random confidences, for ablations without a predictor.
pub fn random_confidence(width: usize, rng: &mut impl Rng) -> ConfidenceVector {
    ConfidenceVector {
        probs: (0..width).map(|_| rng.random::<f64>()).collect(),
    }
}

pub fn severity_context(
    mask: &CartesianMask,
    confidence: &ConfidenceVector,
    iteration: usize,
) -> Result<SeverityContext> {
    if mask.width() != confidence.width() {
        return Err(Error::Shape(format!(
            "mask width {} vs confidence width {}",
            mask.width(),
            confidence.width()
        )));
    }
    let masked_confidence = mask
        .cols()
        .iter()
        .zip(confidence.probs())
        .map(|(&m, &p)| if m { p } else { 0.0 })
        .collect();
    Ok(SeverityContext {
        iteration,
        masked_confidence,
        budget_fraction: mask.budget() as f64 / mask.width() as f64,
        support: mask.cols().to_vec(),
        column_weights: vec![1.0; mask.width()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::Rng;

    fn mask(bits: &[u8]) -> CartesianMask {
        CartesianMask::new(bits.iter().map(|&b| b == 1).collect()).unwrap()
    }

    fn sigmoid(x: f64) -> f64 {
        1.0 / (1.0 + (-x).exp())
    }

    #[test]
    fn acquisition_mask_multicoil_geometry() {
        let m = make_acquisition_mask(384, 8, 0.04, 0).unwrap();
        assert_eq!(m.budget(), 48);
        // 15 contiguous center columns, symmetric around column 192
        assert!((185..=199).all(|c| m.is_sampled(c)));
    }

    #[test]
    fn acquisition_mask_budgets() {
        assert_eq!(make_acquisition_mask(320, 8, 0.04, 3).unwrap().budget(), 40);
        assert_eq!(make_acquisition_mask(320, 4, 0.08, 3).unwrap().budget(), 80);
        for w in [17, 64, 320] {
            assert!(make_acquisition_mask(w, 1, 0.3, 9).unwrap().is_full());
        }
    }

    #[test]
    fn acquisition_mask_deterministic_and_seeded() {
        let a = make_acquisition_mask(256, 6, 0.04, 11).unwrap();
        let b = make_acquisition_mask(256, 6, 0.04, 11).unwrap();
        assert_eq!(a, b);
        let differs = (0..20).any(|s| make_acquisition_mask(256, 6, 0.04, s).unwrap() != a);
        assert!(differs);
    }

    #[test]
    fn acquisition_mask_rejects_oversized_center() {
        assert!(matches!(
            make_acquisition_mask(100, 8, 0.5, 0),
            Err(Error::Config { .. })
        ));
        assert!(make_acquisition_mask(4, 8, 0.1, 0).is_err());
        assert!(make_acquisition_mask(64, 4, 0.0, 0).is_err());
    }

    #[test]
    fn validates_published_schedules() {
        let multi = BudgetSchedule::new(vec![48, 192, 288, 320, 336, 352, 364, 376, 384]);
        assert!(validate_schedule(&multi, 384, 48).is_ok());
        let single4 = BudgetSchedule::new(vec![80, 160, 240, 264, 280, 292, 304, 312, 320]);
        assert!(validate_schedule(&single4, 320, 80).is_ok());
        let single8 = BudgetSchedule::new(vec![40, 160, 240, 264, 280, 292, 304, 312, 320]);
        assert!(validate_schedule(&single8, 320, 40).is_ok());
    }

    #[test]
    fn schedule_errors_name_the_index() {
        let bad = BudgetSchedule::new(vec![40, 40, 320]);
        match validate_schedule(&bad, 320, 40) {
            Err(Error::Schedule { index, .. }) => assert_eq!(index, 1),
            other => panic!("unexpected {other:?}"),
        }
        let short = BudgetSchedule::new(vec![40, 100, 300]);
        assert!(matches!(
            validate_schedule(&short, 320, 40),
            Err(Error::Schedule { index: 2, .. })
        ));
        assert!(matches!(
            validate_schedule(&short, 300, 48),
            Err(Error::Schedule { index: 0, .. })
        ));
    }

    #[test]
    fn uniform_schedule() {
        let s = make_schedule(320, 40, 8, ScheduleShape::Uniform).unwrap();
        assert_eq!(s.budgets(), &[40, 75, 110, 145, 180, 215, 250, 285, 320]);
        // rounding up would overshoot here, so the floor is used
        let s = make_schedule(20, 8, 8, ScheduleShape::Uniform).unwrap();
        assert!(validate_schedule(&s, 20, 8).is_ok());
    }

    #[test]
    fn coarse_to_fine_and_reverse() {
        let c2f = make_schedule(384, 48, 8, ScheduleShape::CoarseToFine).unwrap();
        assert!(validate_schedule(&c2f, 384, 48).is_ok());
        let inc = c2f.increments();
        assert!(inc.windows(2).all(|w| w[0] >= w[1]), "{inc:?}");
        // ratio 0.6 with largest-remainder rounding
        assert_eq!(c2f.budgets(), &[48, 183, 264, 313, 343, 361, 372, 379, 384]);

        let a = make_schedule(320, 40, 8, ScheduleShape::CoarseToFine).unwrap();
        let b = make_schedule(320, 40, 8, ScheduleShape::FineToCoarse).unwrap();
        let mut rev = a.increments();
        rev.reverse();
        assert_eq!(b.increments(), rev);
    }

    #[test]
    fn schedule_too_many_steps() {
        assert!(matches!(
            make_schedule(10, 8, 3, ScheduleShape::Uniform),
            Err(Error::Schedule { .. })
        ));
        assert!(make_schedule(10, 11, 1, ScheduleShape::Uniform).is_err());
        assert!(make_schedule(10, 0, 1, ScheduleShape::Uniform).is_err());
        assert_eq!(
            make_schedule(10, 10, 4, ScheduleShape::Uniform)
                .unwrap()
                .budgets(),
            &[10]
        );
    }

    #[test]
    fn next_mask_examples() {
        let p = ConfidenceVector::new(vec![0.9, 0.3, 0.7, 0.1]).unwrap();
        let prev = mask(&[1, 0, 0, 1]);
        assert_eq!(next_mask(&prev, &p, 3).unwrap(), mask(&[1, 0, 1, 1]));
        assert_eq!(next_mask(&prev, &p, 2).unwrap(), prev);
        assert!(next_mask(&prev, &p, 4).unwrap().is_full());
        assert!(next_mask(&prev, &p, 5).is_err());
    }

    #[test]
    fn next_mask_tie_break_prefers_low_index() {
        let p = ConfidenceVector::new(vec![0.5; 6]).unwrap();
        let prev = mask(&[0, 0, 0, 1, 0, 0]);
        assert_eq!(next_mask(&prev, &p, 3).unwrap(), mask(&[1, 1, 0, 1, 0, 0]));
    }

    #[test]
    fn oracle_confidence_examples() {
        let gt = KSpace::new(1, 1, 2, vec![Complex64::new(10.0, 0.0); 2]).unwrap();
        let same = oracle_confidence(&gt, &gt).unwrap();
        assert!(same.confidence.probs().iter().all(|&p| p == 1.0));

        let recon = KSpace::new(
            1,
            1,
            2,
            vec![Complex64::new(11.0, 0.0), Complex64::new(1e9, 0.0)],
        )
        .unwrap();
        let out = oracle_confidence(&recon, &gt).unwrap();
        // scalar evaluation of 1 - (2 sigmoid(0.1) - 1)
        let expected = 1.0 - (2.0 * sigmoid(0.1) - 1.0);
        assert!((expected - 0.950_041_625_042_12).abs() < 1e-13);
        assert!((out.confidence.probs()[0] - expected).abs() < 1e-12);
        assert!(out.confidence.probs()[1] < 1e-12);
    }

    #[test]
    fn oracle_confidence_flags_zero_columns() {
        let gt = KSpace::new(
            1,
            2,
            2,
            vec![
                Complex64::new(1.0, 0.0),
                Complex64::new(1.0, 1.0),
                Complex64::new(-1.0, 0.0),
                Complex64::new(0.0, 1.0),
            ],
        )
        .unwrap();
        let out = oracle_confidence(&gt, &gt).unwrap();
        assert_eq!(out.flagged, vec![0]);
        assert_eq!(out.confidence.probs(), &[0.0, 1.0]);
    }

    #[test]
    fn heuristic_confidence_examples() {
        let a = KSpace::new(1, 2, 2, vec![Complex64::new(3.0, 4.0); 4]).unwrap();
        assert!(heuristic_confidence(&a, &a)
            .unwrap()
            .probs()
            .iter()
            .all(|&p| p == 1.0));

        // column norm 10 with a change of norm 1 → r = 0.1
        let pre = KSpace::new(1, 1, 1, vec![Complex64::new(10.0, 0.0)]).unwrap();
        let post = KSpace::new(1, 1, 1, vec![Complex64::new(10.0, 1.0)]).unwrap();
        let p = heuristic_confidence(&pre, &post).unwrap().probs()[0];
        assert!((p - (2.0 - 2.0 * sigmoid(0.1))).abs() < 1e-10);

        // empty reference column stays finite
        let zero = KSpace::zeros(1, 1, 1);
        let p = heuristic_confidence(&zero, &post).unwrap().probs()[0];
        assert!((0.0..1.0).contains(&p));
    }

    #[test]
    fn severity_context_examples() {
        let full = CartesianMask::full(3);
        let ctx = severity_context(&full, &ConfidenceVector::ones(3), 2).unwrap();
        assert_eq!(ctx.masked_confidence, vec![1.0; 3]);
        assert_eq!(ctx.budget_fraction, 1.0);

        let m = mask(&[1, 0]);
        let ctx = severity_context(&m, &ConfidenceVector::new(vec![0.5, 0.9]).unwrap(), 1).unwrap();
        assert_eq!(ctx.masked_confidence, vec![0.5, 0.0]);
        assert_eq!(ctx.budget_fraction, 0.5);
        assert_eq!(ctx.mean_support_confidence(), 0.5);
    }

    proptest! {
        #[test]
        fn repeated_growth_respects_schedule(
            width in 8usize..96,
            m0_frac in 0.05f64..0.6,
            steps in 1usize..8,
            shape_idx in 0usize..3,
            seed in any::<u64>(),
        ) {
            let m0 = ((width as f64 * m0_frac) as usize).max(1);
            prop_assume!(width - m0 >= steps);
            let schedule = make_schedule(width, m0, steps, ScheduleShape::ALL[shape_idx]).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start: Vec<usize> = rand::seq::index::sample(&mut rng, width, m0).into_vec();
            let mut masks = vec![CartesianMask::from_indices(width, &start).unwrap()];
            for &b in &schedule.budgets()[1..] {
                let p = random_confidence(width, &mut rng);
                masks.push(next_mask(masks.last().unwrap(), &p, b).unwrap());
            }
            prop_assert!(MaskSequence::new(masks).validate(&schedule).is_ok());
        }

        #[test]
        fn next_mask_permutation_equivariant(
            seed in any::<u64>(),
            width in 2usize..40,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let have = rng.random_range(1..width);
            let b_next = rng.random_range(have..=width);
            let prev_idx = rand::seq::index::sample(&mut rng, width, have).into_vec();
            let prev = CartesianMask::from_indices(width, &prev_idx).unwrap();
            // distinct confidences so the tie-break never fires
            let mut probs: Vec<f64> = (0..width).map(|i| (i as f64 + 0.5) / width as f64).collect();
            use rand::seq::SliceRandom;
            probs.shuffle(&mut rng);
            let mut perm: Vec<usize> = (0..width).collect();
            perm.shuffle(&mut rng);

            let out = next_mask(&prev, &ConfidenceVector::new(probs.clone()).unwrap(), b_next).unwrap();
            let prev_p = CartesianMask::new(perm.iter().map(|&i| prev.is_sampled(i)).collect()).unwrap();
            let probs_p = ConfidenceVector::new(perm.iter().map(|&i| probs[i]).collect()).unwrap();
            let out_p = next_mask(&prev_p, &probs_p, b_next).unwrap();
            for (k, &i) in perm.iter().enumerate() {
                prop_assert_eq!(out_p.is_sampled(k), out.is_sampled(i));
            }
        }

        #[test]
        fn acquisition_center_block_symmetric(width in 16usize..400, accel in 1usize..8, seed in any::<u64>()) {
            let cf = 0.04;
            let n = (cf * width as f64).round() as usize;
            let budget = (width as f64 / accel as f64).round() as usize;
            prop_assume!(budget >= n && n > 0);
            let m = make_acquisition_mask(width, accel, cf, seed).unwrap();
            prop_assert_eq!(m.budget(), budget);
            let c = width / 2;
            let left = (n - 1) / 2;
            let right = n - 1 - left;
            prop_assert!(right - left <= 1);
            prop_assert!((c - left..=c + right).all(|j| m.is_sampled(j)));
        }
    }

    #[test]
    fn column_weight_validation() {
        let ctx = SeverityContext::neutral(3, 1);
        assert!(ctx.is_unweighted());
        assert!(ctx.clone().with_column_weights(vec![1.0, 0.5]).is_err());
        assert!(ctx
            .clone()
            .with_column_weights(vec![0.5, 0.5, 0.5])
            .is_err());
        assert!(ctx
            .clone()
            .with_column_weights(vec![1.0, 1.5, 0.0])
            .is_err());
        let w = ctx.with_column_weights(vec![1.0, 0.0, 0.25]).unwrap();
        assert_eq!(w.column_weights(), &[1.0, 0.0, 0.25]);
        assert!(!w.is_unweighted());
    }
}
