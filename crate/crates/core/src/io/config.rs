use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use crate::denoise::DenoiserKind;
use crate::error::{Error, Result};
use crate::sampling::{make_schedule, validate_schedule, BudgetSchedule, ScheduleShape};
use crate::solver::{ImageUpdate, PdacConfig, PredictorKind};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SolverKind {
    Pdac,
    Hqs,
    ZeroFilled,
}

impl SolverKind {
    pub const ALL: [SolverKind; 3] = [SolverKind::ZeroFilled, SolverKind::Hqs, SolverKind::Pdac];

    pub fn as_str(&self) -> &'static str {
        match self {
            SolverKind::Pdac => "pdac",
            SolverKind::Hqs => "hqs",
            SolverKind::ZeroFilled => "zero-filled",
        }
    }
}

impl fmt::Display for SolverKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SolverKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pdac" => Ok(SolverKind::Pdac),
            "hqs" => Ok(SolverKind::Hqs),
            "zero-filled" => Ok(SolverKind::ZeroFilled),
            other => Err(Error::config("solver", format!("unknown solver `{other}`"))),
        }
    }
}

/// Every accepted configuration key, in serialization order.
pub const CONFIG_KEYS: [&str; 22] = [
    "height",
    "width",
    "coils",
    "acceleration",
    "center_fraction",
    "noise_sigma",
    "seed",
    "schedule",
    "budgets",
    "iterations",
    "mu",
    "mu_decay",
    "lambda",
    "denoiser",
    "inner_iterations",
    "modulation_gain",
    "predictor",
    "x_update",
    "alpha",
    "solver",
    "input",
    "out",
];

/// Flat run configuration shared by the config file and the CLI flags.
///
/// `mu` is either one value, expanded to `mu_t = mu * mu_decay^t`, or the
/// full list `mu_0 .. mu_T`. `lambda` is either one value for every
/// iteration or the list `lambda_1 .. lambda_T`. Explicit `budgets` replace
/// the generated `schedule` and must have `iterations + 1` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub height: usize,
    pub width: usize,
    pub coils: usize,
    pub acceleration: usize,
    pub center_fraction: f64,
    pub noise_sigma: f64,
    pub seed: u64,
    pub schedule: ScheduleShape,
    pub budgets: Option<Vec<usize>>,
    pub iterations: usize,
    pub mu: Vec<f64>,
    pub mu_decay: f64,
    pub lambda: Vec<f64>,
    pub denoiser: DenoiserKind,
    pub inner_iterations: usize,
    pub modulation_gain: f64,
    pub predictor: PredictorKind,
    pub x_update: ImageUpdate,
    pub alpha: f64,
    pub solver: SolverKind,
    pub input: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            height: 128,
            width: 128,
            coils: 1,
            acceleration: 8,
            center_fraction: 0.04,
            noise_sigma: 0.0,
            seed: 0,
            schedule: ScheduleShape::CoarseToFine,
            budgets: None,
            iterations: 8,
            mu: vec![1.0],
            mu_decay: 1e-4,
            lambda: vec![0.005],
            denoiser: DenoiserKind::Tv,
            inner_iterations: 1000,
            modulation_gain: 0.0,
            predictor: PredictorKind::Oracle,
            x_update: ImageUpdate::Refresh,
            alpha: crate::metrics::DEFAULT_ALPHA,
            solver: SolverKind::Pdac,
            input: None,
            out: PathBuf::from("out"),
        }
    }
}

fn parse_num<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(key, format!("cannot parse `{value}`")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items = value
        .split(',')
        .map(|v| parse_num(key, v.trim()))
        .collect::<Result<Vec<T>>>()?;
    if items.is_empty() {
        return Err(Error::config(key, "empty list"));
    }
    Ok(items)
}

fn join<T: fmt::Display>(items: &[T]) -> String {
    items
        .iter()
        .map(T::to_string)
        .collect::<Vec<_>>()
        .join(", ")
}

fn rekey(key: &str, e: Error) -> Error {
    match e {
        Error::Config { msg, .. } => Error::config(key, msg),
        other => Error::config(key, other.to_string()),
    }
}

impl RunConfig {
    /// Sets one key from its textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        match key {
            "height" => self.height = parse_num(key, value)?,
            "width" => self.width = parse_num(key, value)?,
            "coils" => self.coils = parse_num(key, value)?,
            "acceleration" => self.acceleration = parse_num(key, value)?,
            "center_fraction" => self.center_fraction = parse_num(key, value)?,
            "noise_sigma" => self.noise_sigma = parse_num(key, value)?,
            "seed" => self.seed = parse_num(key, value)?,
            "schedule" => self.schedule = value.parse().map_err(|e| rekey(key, e))?,
            "budgets" => self.budgets = Some(parse_list(key, value)?),
            "iterations" => self.iterations = parse_num(key, value)?,
            "mu" => self.mu = parse_list(key, value)?,
            "mu_decay" => self.mu_decay = parse_num(key, value)?,
            "lambda" => self.lambda = parse_list(key, value)?,
            "denoiser" => self.denoiser = value.parse().map_err(|e| rekey(key, e))?,
            "inner_iterations" => self.inner_iterations = parse_num(key, value)?,
            "modulation_gain" => self.modulation_gain = parse_num(key, value)?,
            "predictor" => self.predictor = value.parse().map_err(|e| rekey(key, e))?,
            "x_update" => self.x_update = value.parse().map_err(|e| rekey(key, e))?,
            "alpha" => self.alpha = parse_num(key, value)?,
            "solver" => self.solver = value.parse().map_err(|e| rekey(key, e))?,
            "input" => self.input = Some(PathBuf::from(value)),
            "out" => self.out = PathBuf::from(value),
            other => return Err(Error::config(other, "unknown key")),
        }
        Ok(())
    }

    /// Applies `key = value` lines on top of `self`. Blank lines and text
    /// after `#` are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("line {}: expected `key = value`", n + 1)))?;
            self.set(key.trim(), value)?;
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// Canonical text form: every set key once, in [`CONFIG_KEYS`] order.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let mut line = |k: &str, v: String| out.push_str(&format!("{k} = {v}\n"));
        line("height", self.height.to_string());
        line("width", self.width.to_string());
        line("coils", self.coils.to_string());
        line("acceleration", self.acceleration.to_string());
        line("center_fraction", self.center_fraction.to_string());
        line("noise_sigma", self.noise_sigma.to_string());
        line("seed", self.seed.to_string());
        line("schedule", self.schedule.to_string());
        if let Some(b) = &self.budgets {
            line("budgets", join(b));
        }
        line("iterations", self.iterations.to_string());
        line("mu", join(&self.mu));
        line("mu_decay", self.mu_decay.to_string());
        line("lambda", join(&self.lambda));
        line("denoiser", self.denoiser.to_string());
        line("inner_iterations", self.inner_iterations.to_string());
        line("modulation_gain", self.modulation_gain.to_string());
        line("predictor", self.predictor.to_string());
        line("x_update", self.x_update.as_str().to_string());
        line("alpha", self.alpha.to_string());
        line("solver", self.solver.to_string());
        if let Some(p) = &self.input {
            line("input", p.display().to_string());
        }
        line("out", self.out.display().to_string());
        out
    }

    /// Field checks that do not depend on the acquisition.
    pub fn validate(&self) -> Result<()> {
        let positive = |key: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("{v} is not positive")))
            }
        };
        let nonnegative = |key: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::config(key, format!("{v} is negative")))
            }
        };
        if self.height < 8 {
            return Err(Error::config("height", "must be at least 8"));
        }
        if self.width < 8 {
            return Err(Error::config("width", "must be at least 8"));
        }
        if self.coils == 0 {
            return Err(Error::config("coils", "must be at least 1"));
        }
        if self.acceleration == 0 {
            return Err(Error::config("acceleration", "must be at least 1"));
        }
        if !(self.center_fraction > 0.0 && self.center_fraction <= 1.0) {
            return Err(Error::config("center_fraction", "must lie in (0, 1]"));
        }
        nonnegative("noise_sigma", self.noise_sigma)?;
        if self.iterations == 0 {
            return Err(Error::config("iterations", "must be at least 1"));
        }
        if let Some(b) = &self.budgets {
            if b.len() != self.iterations + 1 {
                return Err(Error::config(
                    "budgets",
                    format!("{} budgets for {} iterations", b.len(), self.iterations),
                ));
            }
        }
        if self.mu.len() != 1 && self.mu.len() != self.iterations + 1 {
            return Err(Error::config(
                "mu",
                format!(
                    "expected 1 or {} values, got {}",
                    self.iterations + 1,
                    self.mu.len()
                ),
            ));
        }
        for &m in &self.mu {
            positive("mu", m)?;
        }
        positive("mu_decay", self.mu_decay)?;
        if self.lambda.len() != 1 && self.lambda.len() != self.iterations {
            return Err(Error::config(
                "lambda",
                format!(
                    "expected 1 or {} values, got {}",
                    self.iterations,
                    self.lambda.len()
                ),
            ));
        }
        for &l in &self.lambda {
            positive("lambda", l)?;
        }
        if self.inner_iterations == 0 {
            return Err(Error::config("inner_iterations", "must be at least 1"));
        }
        nonnegative("modulation_gain", self.modulation_gain)?;
        nonnegative("alpha", self.alpha)?;
        Ok(())
    }

    /// Budget schedule for an acquisition that samples `m0_budget` columns.
    pub fn budget_schedule(&self, m0_budget: usize) -> Result<BudgetSchedule> {
        match &self.budgets {
            Some(b) => validate_schedule(&BudgetSchedule::new(b.clone()), self.width, m0_budget)
                .map_err(|e| rekey("budgets", e)),
            None => make_schedule(self.width, m0_budget, self.iterations, self.schedule)
                .map_err(|e| rekey("schedule", e)),
        }
    }

    /// Solver configuration for an acquisition that samples `m0_budget` columns.
    pub fn pdac_config(&self, m0_budget: usize) -> Result<PdacConfig> {
        self.validate()?;
        let schedule = self.budget_schedule(m0_budget)?;
        let t = schedule.steps();
        let mut cfg = PdacConfig::new(schedule, self.denoiser, self.lambda[0]);
        cfg.mu = if self.mu.len() == 1 {
            (0..=t)
                .map(|i| self.mu[0] * self.mu_decay.powi(i as i32))
                .collect()
        } else {
            self.mu.clone()
        };
        cfg.lambdas = if self.lambda.len() == 1 {
            vec![self.lambda[0]; t]
        } else {
            self.lambda.clone()
        };
        cfg.inner_iterations = self.inner_iterations;
        cfg.modulation_gain = self.modulation_gain;
        cfg.predictor = self.predictor;
        cfg.image_update = self.x_update;
        cfg.alpha = self.alpha;
        cfg.seed = self.seed;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trip() {
        let cfg = RunConfig::default();
        let text = cfg.to_text();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        assert_eq!(RunConfig::parse(&text).unwrap().to_text(), text);
        cfg.validate().unwrap();
    }

    #[test]
    fn comments_and_overrides() {
        let cfg = RunConfig::parse(
            "# header\n\nwidth = 64   # trailing\nmu = 1, 0.5, 0.25\niterations=2\nbudgets = 8, 40, 64\n",
        )
        .unwrap();
        assert_eq!(cfg.width, 64);
        assert_eq!(cfg.mu, vec![1.0, 0.5, 0.25]);
        assert_eq!(cfg.budgets, Some(vec![8, 40, 64]));
        let pdac = cfg.pdac_config(8).unwrap();
        assert_eq!(pdac.mu, vec![1.0, 0.5, 0.25]);
        assert_eq!(pdac.lambdas, vec![0.005; 2]);
    }

    #[test]
    fn errors_name_the_key() {
        let key_of = |text: &str| match RunConfig::parse(text).and_then(|c| c.validate().map(|_| c))
        {
            Err(Error::Config { key, .. }) => key,
            other => panic!("expected a config error, got {other:?}"),
        };
        assert_eq!(key_of("colour = red\n"), "colour");
        assert_eq!(key_of("width = wide\n"), "width");
        assert_eq!(key_of("denoiser = bm3d\n"), "denoiser");
        assert_eq!(key_of("predictor = psychic\n"), "predictor");
        assert_eq!(key_of("center_fraction = 0\n"), "center_fraction");
        assert_eq!(key_of("mu = 1, 2\n"), "mu");
        assert_eq!(key_of("lambda = -1\n"), "lambda");
        assert_eq!(key_of("iterations = 3\nbudgets = 1, 2\n"), "budgets");
        assert!(matches!(
            RunConfig::parse("just words\n"),
            Err(Error::Format(_))
        ));
    }

    #[test]
    fn schedule_errors_name_the_key() {
        let cfg = RunConfig::parse("width = 16\niterations = 2\nbudgets = 4, 3, 16\n").unwrap();
        assert!(matches!(cfg.pdac_config(4), Err(Error::Config { key, .. }) if key == "budgets"));
        let cfg = RunConfig::parse("width = 16\niterations = 20\n").unwrap();
        assert!(matches!(cfg.pdac_config(4), Err(Error::Config { key, .. }) if key == "schedule"));
    }

    #[test]
    fn geometric_mu() {
        let cfg = RunConfig::parse("width = 32\niterations = 3\nmu = 2\nmu_decay = 0.5\n").unwrap();
        assert_eq!(cfg.pdac_config(4).unwrap().mu, vec![2.0, 1.0, 0.5, 0.25]);
    }
}
