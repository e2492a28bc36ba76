use std::fs;
use std::path::{Path, PathBuf};

use super::config::{RunConfig, SolverKind};
use super::format::{encode_pgm, read_ksp, read_mask, write_bytes, write_ksp, write_mask};
use crate::error::{Error, Result};
use crate::forward::{
    encode, forward_multi, forward_single, shepp_logan, synth_sensitivities, CoilSensitivities,
    NoiseModel,
};
use crate::metrics::{format_psnr, MetricSet};
use crate::numerics::{ComplexImage, KSpace};
use crate::sampling::{make_acquisition_mask, CartesianMask, ScheduleShape};
use crate::solver::{hqs_reconstruct, pdac_reconstruct, zero_filled, PredictorKind, ReconReport};

pub const METRICS_HEADER: &str = "solver,psnr,ssim,nmse,l_rec,l_prob,l_total";
pub const TRACE_HEADER: &str = "iteration,budget,mean_masked_confidence,psnr,mask";
pub const ABLATION_HEADER: &str = "schedule,predictor,psnr,ssim,nmse";

/// One acquisition: phantom, optional coil maps, mask and measured k-space.
#[derive(Debug, Clone, PartialEq)]
pub struct SimulatedCase {
    pub ground_truth: Option<ComplexImage>,
    pub sensitivities: Option<CoilSensitivities>,
    pub mask: CartesianMask,
    pub kspace: KSpace,
}

impl SimulatedCase {
    /// Deterministic acquisition of the Shepp-Logan phantom described by `cfg`.
    pub fn simulate(cfg: &RunConfig) -> Result<Self> {
        cfg.validate()?;
        let gt = shepp_logan(cfg.height, cfg.width)?;
        let mask =
            make_acquisition_mask(cfg.width, cfg.acceleration, cfg.center_fraction, cfg.seed)?;
        let noise = NoiseModel::new(cfg.noise_sigma, cfg.seed)?;
        let (sens, kspace) = if cfg.coils == 1 {
            (None, forward_single(&gt, &mask, &noise)?)
        } else {
            let sens = synth_sensitivities(cfg.coils, cfg.height, cfg.width)?;
            let k = forward_multi(&gt, &sens, &mask, &noise)?;
            (Some(sens), k)
        };
        Ok(Self {
            ground_truth: Some(gt),
            sensitivities: sens,
            mask,
            kspace,
        })
    }

    /// Reads the files written by [`cmd_simulate`]. The ground truth is optional.
    pub fn load(dir: &Path) -> Result<Self> {
        let kspace = read_ksp(&dir.join("kspace.ksp"))?;
        let mask = read_mask(&dir.join("mask.txt"))?;
        let sens_path = dir.join("sensitivities.ksp");
        let sensitivities = if sens_path.exists() {
            Some(CoilSensitivities::from_stack(read_ksp(&sens_path)?))
        } else if kspace.coils() > 1 {
            return Err(Error::MissingInput(format!(
                "{} not found",
                sens_path.display()
            )));
        } else {
            None
        };
        let gt_path = dir.join("ground_truth.ksp");
        let ground_truth = if gt_path.exists() {
            let k = read_ksp(&gt_path)?;
            if k.coils() != 1 {
                return Err(Error::Format(
                    "ground truth must hold a single image".into(),
                ));
            }
            Some(ComplexImage::new(k.height(), k.width(), k.data().to_vec())?)
        } else {
            None
        };
        Ok(Self {
            ground_truth,
            sensitivities,
            mask,
            kspace,
        })
    }

    /// Fully sampled k-space of the ground truth, encoded like the measurement.
    pub fn gt_kspace(&self) -> Result<Option<KSpace>> {
        self.ground_truth
            .as_ref()
            .map(|g| encode(g, self.sensitivities.as_ref()))
            .transpose()
    }
}

fn image_as_kspace(img: &ComplexImage) -> Result<KSpace> {
    KSpace::new(1, img.height(), img.width(), img.data().to_vec())
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::Io {
        path: dir.display().to_string(),
        source: e,
    })
}

fn input_dir(cfg: &RunConfig) -> PathBuf {
    cfg.input.clone().unwrap_or_else(|| cfg.out.clone())
}

/// Writes `ground_truth.ksp`, `ground_truth.pgm`, `mask.txt`, `kspace.ksp`
/// and, for more than one coil, `sensitivities.ksp` into `cfg.out`.
pub fn cmd_simulate(cfg: &RunConfig) -> Result<SimulatedCase> {
    let case = SimulatedCase::simulate(cfg)?;
    ensure_dir(&cfg.out)?;
    let gt = case
        .ground_truth
        .as_ref()
        .expect("simulated cases carry ground truth");
    write_ksp(&cfg.out.join("ground_truth.ksp"), &image_as_kspace(gt)?)?;
    write_bytes(
        &cfg.out.join("ground_truth.pgm"),
        &encode_pgm(gt, gt.max_abs()),
    )?;
    if let Some(s) = &case.sensitivities {
        write_ksp(&cfg.out.join("sensitivities.ksp"), &s.to_stack())?;
    }
    write_mask(&cfg.out.join("mask.txt"), &case.mask)?;
    write_ksp(&cfg.out.join("kspace.ksp"), &case.kspace)?;
    Ok(case)
}

/// Runs `solver` on `case` with the iteration settings of `cfg`.
pub(crate) fn run_solver(
    solver: SolverKind,
    case: &SimulatedCase,
    cfg: &RunConfig,
) -> Result<ReconReport> {
    let sens = case.sensitivities.as_ref();
    let gt = case.gt_kspace()?;
    if solver == SolverKind::ZeroFilled {
        let img = zero_filled(&case.kspace, sens)?;
        let metrics = case
            .ground_truth
            .as_ref()
            .map(|g| MetricSet::evaluate(&img, g, 0.0, cfg.alpha))
            .transpose()?;
        return Ok(ReconReport {
            final_image: img,
            per_iteration: Vec::new(),
            metrics,
            prob_loss: None,
            flagged_columns: Vec::new(),
        });
    }
    let mut geometry = cfg.clone();
    geometry.height = case.kspace.height();
    geometry.width = case.kspace.width();
    let pdac = geometry.pdac_config(case.mask.budget())?;
    match solver {
        SolverKind::Pdac => pdac_reconstruct(&case.kspace, &case.mask, &pdac, sens, gt.as_ref()),
        SolverKind::Hqs => hqs_reconstruct(&case.kspace, &case.mask, &pdac, sens, gt.as_ref()),
        SolverKind::ZeroFilled => unreachable!(),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRow {
    pub solver: SolverKind,
    pub metrics: MetricSet,
}

impl MetricsRow {
    pub fn to_csv(&self) -> String {
        let m = &self.metrics;
        format!(
            "{},{},{},{},{},{},{}",
            self.solver,
            format_psnr(m.psnr),
            m.ssim,
            m.nmse,
            m.l_rec,
            m.l_prob,
            m.l_total
        )
    }
}

fn metrics_csv(rows: &[MetricsRow]) -> String {
    let mut out = format!("{METRICS_HEADER}\n");
    for r in rows {
        out.push_str(&r.to_csv());
        out.push('\n');
    }
    out
}

fn trace_csv(report: &ReconReport) -> String {
    let mut out = format!("{TRACE_HEADER}\n");
    for r in &report.per_iteration {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.iteration,
            r.budget,
            r.mean_masked_confidence,
            r.psnr.map(format_psnr).unwrap_or_default(),
            r.mask
        ));
    }
    out
}

/// Reconstructs the acquisition in `cfg.input` (or `cfg.out`) with
/// `cfg.solver`; writes `recon.ksp`, `recon.pgm`, `trace.csv` and
/// `metrics.csv` (header only without ground truth) into `cfg.out`.
pub fn cmd_reconstruct(cfg: &RunConfig) -> Result<ReconReport> {
    cfg.validate()?;
    let case = SimulatedCase::load(&input_dir(cfg))?;
    let report = run_solver(cfg.solver, &case, cfg)?;
    ensure_dir(&cfg.out)?;
    write_ksp(
        &cfg.out.join("recon.ksp"),
        &image_as_kspace(&report.final_image)?,
    )?;
    let peak = case
        .ground_truth
        .as_ref()
        .map(|g| g.max_abs())
        .unwrap_or_else(|| report.final_image.max_abs());
    write_bytes(
        &cfg.out.join("recon.pgm"),
        &encode_pgm(&report.final_image, peak),
    )?;
    write_bytes(&cfg.out.join("trace.csv"), trace_csv(&report).as_bytes())?;
    let rows: Vec<MetricsRow> = report
        .metrics
        .iter()
        .map(|m| MetricsRow {
            solver: cfg.solver,
            metrics: *m,
        })
        .collect();
    write_bytes(&cfg.out.join("metrics.csv"), metrics_csv(&rows).as_bytes())?;
    Ok(report)
}

/// Scores zero-filled, HQS and PDAC on the same acquisition and writes one
/// `metrics.csv` row per solver. Needs the ground truth.
pub fn cmd_evaluate(cfg: &RunConfig) -> Result<Vec<MetricsRow>> {
    cfg.validate()?;
    let case = SimulatedCase::load(&input_dir(cfg))?;
    if case.ground_truth.is_none() {
        return Err(Error::MissingInput(
            "evaluation needs ground_truth.ksp".into(),
        ));
    }
    let mut rows = Vec::with_capacity(SolverKind::ALL.len());
    for solver in SolverKind::ALL {
        let report = run_solver(solver, &case, cfg)?;
        rows.push(MetricsRow {
            solver,
            metrics: report.metrics.expect("ground truth present"),
        });
    }
    ensure_dir(&cfg.out)?;
    write_bytes(&cfg.out.join("metrics.csv"), metrics_csv(&rows).as_bytes())?;
    Ok(rows)
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationRow {
    pub schedule: ScheduleShape,
    pub predictor: PredictorKind,
    pub metrics: MetricSet,
}

/// PDAC over every schedule shape and predictor on one instance: the
/// acquisition in `cfg.input` when given, otherwise a fresh simulation.
/// Writes `ablation.csv` with one row per cell.
pub fn cmd_ablate(cfg: &RunConfig) -> Result<Vec<AblationRow>> {
    cfg.validate()?;
    if cfg.budgets.is_some() {
        return Err(Error::config(
            "budgets",
            "ablation generates its own schedules",
        ));
    }
    let case = match &cfg.input {
        Some(dir) => SimulatedCase::load(dir)?,
        None => SimulatedCase::simulate(cfg)?,
    };
    if case.ground_truth.is_none() {
        return Err(Error::MissingInput("ablation needs ground truth".into()));
    }
    let mut rows = Vec::with_capacity(9);
    for schedule in ScheduleShape::ALL {
        for predictor in PredictorKind::ALL {
            let mut cell = cfg.clone();
            cell.schedule = schedule;
            cell.predictor = predictor;
            let report = run_solver(SolverKind::Pdac, &case, &cell)?;
            rows.push(AblationRow {
                schedule,
                predictor,
                metrics: report.metrics.expect("ground truth present"),
            });
        }
    }
    let mut csv = format!("{ABLATION_HEADER}\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.schedule,
            r.predictor,
            format_psnr(r.metrics.psnr),
            r.metrics.ssim,
            r.metrics.nmse
        ));
    }
    ensure_dir(&cfg.out)?;
    write_bytes(&cfg.out.join("ablation.csv"), csv.as_bytes())?;
    Ok(rows)
}
