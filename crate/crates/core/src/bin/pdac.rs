use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use pdac_core::io::{
    cmd_ablate, cmd_evaluate, cmd_reconstruct, cmd_simulate, read_text, RunConfig, ABLATION_HEADER,
    METRICS_HEADER,
};
use pdac_core::metrics::format_psnr;
use pdac_core::Result;

/// Progressive divide-and-conquer MRI reconstruction.
#[derive(Parser)]
#[command(name = "pdac", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a phantom acquisition into --out
    Simulate(Settings),
    /// Reconstruct the acquisition in --input (default --out)
    Reconstruct(Settings),
    /// Score zero-filled, HQS and PDAC on the same acquisition
    Evaluate(Settings),
    /// Run PDAC over every schedule shape and predictor
    Ablate(Settings),
}

/// Every flag overrides the key of the same name in the config file.
#[derive(Args)]
struct Settings {
    /// key = value file applied before the flags
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, allow_hyphen_values = true)]
    height: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    width: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    coils: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    acceleration: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    center_fraction: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    noise_sigma: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    seed: Option<String>,
    /// coarse-to-fine | uniform | fine-to-coarse
    #[arg(long, allow_hyphen_values = true)]
    schedule: Option<String>,
    /// comma-separated b_0..b_T, replaces --schedule
    #[arg(long, allow_hyphen_values = true)]
    budgets: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    iterations: Option<String>,
    /// one value (decayed by --mu-decay) or mu_0..mu_T
    #[arg(long, allow_hyphen_values = true)]
    mu: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    mu_decay: Option<String>,
    /// one value or lambda_1..lambda_T
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// identity | tv | dct-soft | oracle
    #[arg(long, allow_hyphen_values = true)]
    denoiser: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    inner_iterations: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    modulation_gain: Option<String>,
    /// oracle | heuristic | random
    #[arg(long, allow_hyphen_values = true)]
    predictor: Option<String>,
    /// refresh | frozen
    #[arg(long, allow_hyphen_values = true)]
    x_update: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    alpha: Option<String>,
    /// pdac | hqs | zero-filled
    #[arg(long, allow_hyphen_values = true)]
    solver: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    input: Option<String>,
    #[arg(long, allow_hyphen_values = true)]
    out: Option<String>,
}

impl Settings {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        if let Some(path) = &self.config {
            cfg.apply_text(&read_text(path)?)?;
        }
        let flags = [
            ("height", &self.height),
            ("width", &self.width),
            ("coils", &self.coils),
            ("acceleration", &self.acceleration),
            ("center_fraction", &self.center_fraction),
            ("noise_sigma", &self.noise_sigma),
            ("seed", &self.seed),
            ("schedule", &self.schedule),
            ("budgets", &self.budgets),
            ("iterations", &self.iterations),
            ("mu", &self.mu),
            ("mu_decay", &self.mu_decay),
            ("lambda", &self.lambda),
            ("denoiser", &self.denoiser),
            ("inner_iterations", &self.inner_iterations),
            ("modulation_gain", &self.modulation_gain),
            ("predictor", &self.predictor),
            ("x_update", &self.x_update),
            ("alpha", &self.alpha),
            ("solver", &self.solver),
            ("input", &self.input),
            ("out", &self.out),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(s) => {
            let cfg = s.resolve()?;
            let case = cmd_simulate(&cfg)?;
            println!(
                "wrote {} ({} of {} columns sampled)",
                cfg.out.display(),
                case.mask.budget(),
                case.mask.width()
            );
        }
        Command::Reconstruct(s) => {
            let cfg = s.resolve()?;
            let report = cmd_reconstruct(&cfg)?;
            match report.metrics {
                Some(m) => println!(
                    "{} psnr {} ssim {:.4} nmse {:.6}",
                    cfg.solver,
                    format_psnr(m.psnr),
                    m.ssim,
                    m.nmse
                ),
                None => println!(
                    "{} done, {} iterations",
                    cfg.solver,
                    report.per_iteration.len()
                ),
            }
        }
        Command::Evaluate(s) => {
            let cfg = s.resolve()?;
            println!("{METRICS_HEADER}");
            for row in cmd_evaluate(&cfg)? {
                println!("{}", row.to_csv());
            }
        }
        Command::Ablate(s) => {
            let cfg = s.resolve()?;
            println!("{ABLATION_HEADER}");
            for r in cmd_ablate(&cfg)? {
                println!(
                    "{},{},{},{},{}",
                    r.schedule,
                    r.predictor,
                    format_psnr(r.metrics.psnr),
                    r.metrics.ssim,
                    r.metrics.nmse
                );
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let text = e.to_string();
            let line = text.lines().next().unwrap_or("invalid arguments");
            eprintln!("pdac: {}", line.trim_start_matches("error: "));
            return ExitCode::from(2);
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pdac: {e}");
            ExitCode::FAILURE
        }
    }
}
