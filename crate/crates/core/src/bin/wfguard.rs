use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use wfguard::experiment::{cmd_compare, cmd_gen_catalog, cmd_run, ExperimentConfig};
use wfguard::model::{SizeCategory, WeightVector};
use wfguard::Error;

/// Multi-tenant, multi-cloud workflow simulator with attack detection,
/// adaptation and trust management.
#[derive(Parser)]
#[command(name = "wfguard", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a batch and write run.log, metrics.json, metrics.csv and trust.json.
    Run(ExperimentArgs),
    /// Run two batches on the same workflow population and write compare.json.
    Compare {
        /// Arm A; also the base for arm B.
        #[command(flatten)]
        a: ExperimentArgs,
        #[command(flatten)]
        b: ArmB,
    },
    /// Write a randomly generated provider catalog.
    GenCatalog {
        /// Master seed.
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long, default_value_t = 5)]
        providers: usize,
        /// Services per provider.
        #[arg(long, default_value_t = 3)]
        services: usize,
        /// Output file.
        #[arg(long, default_value = "catalog.json")]
        out: PathBuf,
    },
}

/// Experiment flags. Flags override values from `--config`.
#[derive(Args)]
struct ExperimentArgs {
    /// JSON experiment config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Workflow size category [default: small].
    #[arg(long)]
    category: Option<SizeCategory>,
    /// Workflow instances per batch [default: 100].
    #[arg(long)]
    runs: Option<usize>,
    /// Per-execution attack probability [default: 0.3].
    #[arg(long)]
    attack_rate: Option<f64>,
    /// Time, price and security weights as t,p,s [default: 0.1,0.1,0.8].
    #[arg(long)]
    weights: Option<WeightVector>,
    /// Master seed [default: 42].
    #[arg(long)]
    seed: Option<u64>,
    /// Service monitor detection probability [default: 1.0].
    #[arg(long)]
    p_detect: Option<f64>,
    /// Provider catalog file [default: generated from the seed].
    #[arg(long)]
    catalog: Option<PathBuf>,
    /// Adaptation action override file [default: built-in table].
    #[arg(long)]
    actions: Option<PathBuf>,
    /// Tenant IDS rule file [default: one submission-rate rule per tenant].
    #[arg(long)]
    rules: Option<PathBuf>,
    /// Output directory [default: out].
    #[arg(long)]
    out: Option<PathBuf>,
    /// Number of tenants submitting workflows [default: 2].
    #[arg(long)]
    tenants: Option<usize>,
    /// Adaptations per task before residual risk is accepted [default: 3].
    #[arg(long)]
    max_readapt: Option<u32>,
    /// Run instances on one thread (output is identical either way).
    #[arg(long)]
    sequential: bool,
}

/// Arm B overrides; unset values are taken from arm A.
#[derive(Args)]
struct ArmB {
    /// JSON config for arm B, applied over arm A.
    #[arg(long)]
    b_config: Option<PathBuf>,
    #[arg(long)]
    b_category: Option<SizeCategory>,
    #[arg(long)]
    b_runs: Option<usize>,
    #[arg(long)]
    b_attack_rate: Option<f64>,
    #[arg(long)]
    b_weights: Option<WeightVector>,
    #[arg(long)]
    b_seed: Option<u64>,
    #[arg(long)]
    b_p_detect: Option<f64>,
    #[arg(long)]
    b_catalog: Option<PathBuf>,
    #[arg(long)]
    b_actions: Option<PathBuf>,
}

impl ExperimentArgs {
    fn resolve(&self) -> Result<ExperimentConfig, Error> {
        let mut c = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        if let Some(v) = self.category {
            c.category = v;
        }
        if let Some(v) = self.runs {
            c.runs = v;
        }
        if let Some(v) = self.attack_rate {
            c.attack_rate = v;
        }
        if let Some(v) = self.weights {
            c.weights = v;
        }
        if let Some(v) = self.seed {
            c.seed = v;
        }
        if let Some(v) = self.p_detect {
            c.p_detect = v;
        }
        if let Some(v) = &self.catalog {
            c.catalog = Some(v.clone());
        }
        if let Some(v) = &self.actions {
            c.actions = Some(v.clone());
        }
        if let Some(v) = &self.rules {
            c.rules = Some(v.clone());
        }
        if let Some(v) = &self.out {
            c.out = v.clone();
        }
        if let Some(v) = self.tenants {
            c.tenants = v;
        }
        if let Some(v) = self.max_readapt {
            c.max_readapt = v;
        }
        c.sequential |= self.sequential;
        c.validate()?;
        Ok(c)
    }
}

impl ArmB {
    fn resolve(&self, a: &ExperimentConfig) -> Result<ExperimentConfig, Error> {
        let mut b = match &self.b_config {
            Some(path) => {
                // the file only overrides the keys it names
                let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                    path: path.clone(),
                    source: e,
                })?;
                let patch: serde_json::Value = serde_json::from_str(&text)
                    .map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?;
                let mut base = serde_json::to_value(a).expect("config serializes");
                if let (Some(base), Some(patch)) = (base.as_object_mut(), patch.as_object()) {
                    base.extend(patch.clone());
                } else {
                    return Err(Error::InvalidConfig(format!(
                        "{}: expected a JSON object",
                        path.display()
                    )));
                }
                serde_json::from_value(base).map_err(|e| Error::InvalidConfig(format!("{}: {e}", path.display())))?
            }
            None => a.clone(),
        };
        if let Some(v) = self.b_category {
            b.category = v;
        }
        if let Some(v) = self.b_runs {
            b.runs = v;
        }
        if let Some(v) = self.b_attack_rate {
            b.attack_rate = v;
        }
        if let Some(v) = self.b_weights {
            b.weights = v;
        }
        if let Some(v) = self.b_seed {
            b.seed = v;
        }
        if let Some(v) = self.b_p_detect {
            b.p_detect = v;
        }
        if let Some(v) = &self.b_catalog {
            b.catalog = Some(v.clone());
        }
        if let Some(v) = &self.b_actions {
            b.actions = Some(v.clone());
        }
        b.validate()?;
        Ok(b)
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run(args) => {
            let config = args.resolve()?;
            let out = cmd_run(&config)?;
            let m = out.result.metrics();
            println!(
                "{} runs: time {:.4} price {:.4} mitigation {:.4} -> {}",
                m.batch_size,
                m.normalized.avg_time,
                m.normalized.avg_price,
                m.normalized.avg_mitigation,
                config.out.display()
            );
        }
        Command::Compare { a, b } => {
            let config_a = a.resolve()?;
            let config_b = b.resolve(&config_a)?;
            let (path, report) = cmd_compare(&config_a, &config_b, &config_a.out)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            let d = report.delta;
            println!(
                "delta (b - a): time {:+.4} price {:+.4} mitigation {:+.4} -> {}",
                d.avg_time,
                d.avg_price,
                d.avg_mitigation,
                path.display()
            );
        }
        Command::GenCatalog {
            seed,
            providers,
            services,
            out,
        } => {
            let catalog = cmd_gen_catalog(seed, providers, services, &out)?;
            println!("{} services -> {}", catalog.len(), out.display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e @ Error::InvalidConfig(_)) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
