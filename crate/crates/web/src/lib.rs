//! WebAssembly bindings for the browser demo in `www/`.
//!
//! The page simulates an acquisition, previews budget schedules and runs
//! one of the solvers on the simulated data. Every binding is a thin
//! wrapper over a plain Rust function so the logic is testable natively.

use pdac_core::io::{RunConfig, SimulatedCase, SolverKind};
use pdac_core::metrics::MetricSet;
use pdac_core::sampling::{make_schedule, ScheduleShape};
use pdac_core::solver::{hqs_reconstruct, pdac_reconstruct, zero_filled, ReconReport};
use pdac_core::ComplexImage;
use wasm_bindgen::prelude::*;

/// Grayscale RGBA bytes of `|img| / peak`, row-major.
pub fn to_rgba(img: &ComplexImage, peak: f64) -> Vec<u8> {
    let scale = if peak > 0.0 { 1.0 / peak } else { 0.0 };
    let mut out = Vec::with_capacity(img.data().len() * 4);
    for v in img.data() {
        let g = ((v.norm() * scale).clamp(0.0, 1.0) * 255.0).round() as u8;
        out.extend_from_slice(&[g, g, g, 255]);
    }
    out
}

fn config(pairs: &[(&str, String)]) -> Result<RunConfig, String> {
    let mut cfg = RunConfig::default();
    for (k, v) in pairs {
        cfg.set(k, v).map_err(|e| e.to_string())?;
    }
    cfg.validate().map_err(|e| e.to_string())?;
    Ok(cfg)
}

/// A simulated single- or multi-coil phantom acquisition.
#[wasm_bindgen]
pub struct Acquisition {
    cfg: RunConfig,
    case: SimulatedCase,
    peak: f64,
}

impl Acquisition {
    pub fn simulate(
        size: usize,
        coils: usize,
        acceleration: usize,
        center_fraction: f64,
        noise_sigma: f64,
        seed: u64,
    ) -> Result<Self, String> {
        let cfg = config(&[
            ("height", size.to_string()),
            ("width", size.to_string()),
            ("coils", coils.to_string()),
            ("acceleration", acceleration.to_string()),
            ("center_fraction", center_fraction.to_string()),
            ("noise_sigma", noise_sigma.to_string()),
            ("seed", seed.to_string()),
        ])?;
        let case = SimulatedCase::simulate(&cfg).map_err(|e| e.to_string())?;
        let peak = case.ground_truth.as_ref().map_or(1.0, |g| g.max_abs());
        Ok(Self { cfg, case, peak })
    }

    pub fn run(
        &self,
        solver: &str,
        schedule: &str,
        predictor: &str,
        iterations: usize,
        lambda: f64,
        inner_iterations: usize,
    ) -> Result<Reconstruction, String> {
        let mut cfg = self.cfg.clone();
        for (k, v) in [
            ("solver", solver.to_string()),
            ("schedule", schedule.to_string()),
            ("predictor", predictor.to_string()),
            ("iterations", iterations.to_string()),
            ("lambda", lambda.to_string()),
            ("inner_iterations", inner_iterations.to_string()),
        ] {
            cfg.set(k, &v).map_err(|e| e.to_string())?;
        }
        cfg.validate().map_err(|e| e.to_string())?;
        let case = &self.case;
        let sens = case.sensitivities.as_ref();
        let gt = case.gt_kspace().map_err(|e| e.to_string())?;
        let report = match cfg.solver {
            SolverKind::ZeroFilled => {
                let img = zero_filled(&case.kspace, sens).map_err(|e| e.to_string())?;
                let metrics = case
                    .ground_truth
                    .as_ref()
                    .map(|g| MetricSet::evaluate(&img, g, 0.0, cfg.alpha))
                    .transpose()
                    .map_err(|e| e.to_string())?;
                ReconReport {
                    final_image: img,
                    per_iteration: Vec::new(),
                    metrics,
                    prob_loss: None,
                    flagged_columns: Vec::new(),
                }
            }
            solver => {
                let pdac = cfg
                    .pdac_config(case.mask.budget())
                    .map_err(|e| e.to_string())?;
                let run = if solver == SolverKind::Pdac {
                    pdac_reconstruct
                } else {
                    hqs_reconstruct
                };
                run(&case.kspace, &case.mask, &pdac, sens, gt.as_ref())
                    .map_err(|e| e.to_string())?
            }
        };
        Ok(Reconstruction {
            report,
            peak: self.peak,
        })
    }
}

#[wasm_bindgen]
impl Acquisition {
    #[wasm_bindgen(constructor)]
    pub fn new(
        size: usize,
        coils: usize,
        acceleration: usize,
        center_fraction: f64,
        noise_sigma: f64,
        seed: u64,
    ) -> Result<Acquisition, JsError> {
        Self::simulate(
            size,
            coils,
            acceleration,
            center_fraction,
            noise_sigma,
            seed,
        )
        .map_err(|e| JsError::new(&e))
    }

    #[wasm_bindgen(getter)]
    pub fn size(&self) -> usize {
        self.case.kspace.width()
    }

    /// Sampled columns as a `0`/`1` string.
    #[wasm_bindgen(getter)]
    pub fn mask(&self) -> String {
        self.case.mask.to_string()
    }

    #[wasm_bindgen(js_name = groundTruthRgba)]
    pub fn ground_truth_rgba(&self) -> Vec<u8> {
        self.case
            .ground_truth
            .as_ref()
            .map(|g| to_rgba(g, self.peak))
            .unwrap_or_default()
    }

    /// `solver` is `pdac`, `hqs` or `zero-filled`.
    pub fn reconstruct(
        &self,
        solver: &str,
        schedule: &str,
        predictor: &str,
        iterations: usize,
        lambda: f64,
        inner_iterations: usize,
    ) -> Result<Reconstruction, JsError> {
        self.run(
            solver,
            schedule,
            predictor,
            iterations,
            lambda,
            inner_iterations,
        )
        .map_err(|e| JsError::new(&e))
    }
}

#[wasm_bindgen]
pub struct Reconstruction {
    report: ReconReport,
    peak: f64,
}

#[wasm_bindgen]
impl Reconstruction {
    pub fn rgba(&self) -> Vec<u8> {
        to_rgba(&self.report.final_image, self.peak)
    }

    /// dB; infinite for an exact reconstruction.
    #[wasm_bindgen(getter)]
    pub fn psnr(&self) -> f64 {
        self.report.metrics.map_or(f64::NAN, |m| m.psnr)
    }

    #[wasm_bindgen(getter)]
    pub fn ssim(&self) -> f64 {
        self.report.metrics.map_or(f64::NAN, |m| m.ssim)
    }

    #[wasm_bindgen(getter)]
    pub fn nmse(&self) -> f64 {
        self.report.metrics.map_or(f64::NAN, |m| m.nmse)
    }

    /// PSNR after every iteration.
    #[wasm_bindgen(js_name = psnrTrace)]
    pub fn psnr_trace(&self) -> Vec<f64> {
        self.report
            .per_iteration
            .iter()
            .map(|r| r.psnr.unwrap_or(f64::NAN))
            .collect()
    }

    /// Mask of every iteration, one `0`/`1` string per line.
    #[wasm_bindgen(js_name = maskTrace)]
    pub fn mask_trace(&self) -> String {
        self.report
            .per_iteration
            .iter()
            .map(|r| format!("{}\n", r.mask))
            .collect()
    }
}

pub fn budgets(
    width: usize,
    m0_budget: usize,
    steps: usize,
    shape: &str,
) -> Result<Vec<u32>, String> {
    let shape: ScheduleShape = shape.parse().map_err(|e: pdac_core::Error| e.to_string())?;
    let s = make_schedule(width, m0_budget, steps, shape).map_err(|e| e.to_string())?;
    Ok(s.budgets().iter().map(|&b| b as u32).collect())
}

/// Budgets `b_0..b_T` of a schedule shape.
#[wasm_bindgen(js_name = scheduleBudgets)]
pub fn schedule_budgets(
    width: usize,
    m0_budget: usize,
    steps: usize,
    shape: &str,
) -> Result<Vec<u32>, JsError> {
    budgets(width, m0_budget, steps, shape).map_err(|e| JsError::new(&e))
}
