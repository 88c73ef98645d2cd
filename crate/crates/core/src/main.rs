use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mlpinit::data::{synthesize_dataset, write_csv, SyntheticSpec};
use mlpinit::harness::{
    render_csv, render_json, render_suite_text, render_text, run_experiment_with_model, run_suite, save_model,
    DataSource, ExperimentConfig, DEFAULT_EPOCHS,
};
use mlpinit::initializers::{empirical_variance, initialize, relu_variance_profile, InitDist, InitFamily, InitScheme};
use mlpinit::network::{build_model, grad_check, Topology};
use mlpinit::numerics::{sample, Distribution, Matrix, Rng};
use mlpinit::{Error, Result};

#[derive(Parser)]
#[command(name = "mlpinit", version, about = "Xavier vs Kaiming initialized MLP experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train and evaluate one configuration.
    Run(RunArgs),
    /// Run all six depth × initializer configurations.
    Suite(SuiteArgs),
    /// Compare backprop gradients with central differences.
    GradCheck(GradCheckArgs),
    /// Empirical variance of initialized weights.
    InitStats(InitStatsArgs),
    /// Write a synthetic cohort as CSV.
    Synth(SynthArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Xavier,
    Kaiming,
}

impl From<FamilyArg> for InitFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Xavier => InitFamily::Xavier,
            FamilyArg::Kaiming => InitFamily::Kaiming,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistArg {
    Normal,
    Uniform,
}

impl From<DistArg> for InitDist {
    fn from(d: DistArg) -> Self {
        match d {
            DistArg::Normal => InitDist::Normal,
            DistArg::Uniform => InitDist::Uniform,
        }
    }
}

#[derive(Args)]
struct CommonArgs {
    #[arg(long, value_enum, default_value = "normal")]
    dist: DistArg,
    /// CSV dataset (participant,label,gsr_00..,pd_00..,st_00..).
    #[arg(long, conflicts_with = "synthetic", required_unless_present = "synthetic")]
    data: Option<PathBuf>,
    /// Use a synthetic cohort generated from --seed.
    #[arg(long)]
    synthetic: bool,
    /// Class separation of the synthetic cohort.
    #[arg(long, default_value_t = 2.0, requires = "synthetic")]
    separation: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EPOCHS)]
    epochs: usize,
    /// Skip the leave-one-out diagnostic.
    #[arg(long)]
    no_loo: bool,
    #[arg(long, default_value = "results")]
    out: PathBuf,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    topology: u8,
    #[arg(long = "init", value_enum)]
    family: FamilyArg,
    #[command(flatten)]
    common: CommonArgs,
    /// Save the final trained model to this path.
    #[arg(long)]
    save_model: Option<PathBuf>,
}

#[derive(Args)]
struct SuiteArgs {
    #[command(flatten)]
    common: CommonArgs,
}

#[derive(Args)]
struct GradCheckArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 8)]
    batch: usize,
    #[arg(long, default_value_t = 1e-5)]
    epsilon: f64,
    #[arg(long, default_value_t = 1e-4)]
    tolerance: f64,
    #[arg(long, value_enum, default_value = "normal")]
    dist: DistArg,
}

#[derive(Args)]
struct InitStatsArgs {
    #[arg(long, default_value_t = 100_000)]
    samples: usize,
    #[arg(long, value_delimiter = ',', default_values_t = [20usize, 50, 85, 256])]
    fan_in: Vec<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also report per-layer variance through a 10-layer width-256 ReLU stack.
    #[arg(long)]
    propagation: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 16)]
    participants: usize,
    #[arg(long, default_value_t = 12)]
    records: usize,
    #[arg(long, default_value_t = 2.0)]
    separation: f64,
    #[arg(long)]
    out: PathBuf,
}

impl CommonArgs {
    fn data_source(&self) -> DataSource {
        match &self.data {
            Some(path) => DataSource::Csv(path.clone()),
            None => DataSource::Synthetic(SyntheticSpec {
                seed: self.seed,
                separation: self.separation,
                ..SyntheticSpec::default()
            }),
        }
    }

    fn config(&self, topology: Topology, family: InitFamily) -> ExperimentConfig {
        let mut config = ExperimentConfig::new(
            topology,
            InitScheme::new(family, self.dist.into()),
            self.data_source(),
            self.seed,
        );
        config.epochs = self.epochs;
        config.loo_enabled = !self.no_loo;
        config
    }
}

fn write_outputs(dir: &Path, json: &str, text: &str, csv: &str) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    for (name, body) in [("result.json", json), ("report.txt", text), ("result.csv", csv)] {
        let path = dir.join(name);
        fs::write(&path, body).map_err(|e| io_err(&path, e))?;
    }
    Ok(())
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

fn run(args: RunArgs) -> Result<()> {
    let topology = Topology::from_depth(args.topology as usize)?;
    let config = args.common.config(topology, args.family.into());
    let dataset = config.data.load()?;
    let (result, model) = run_experiment_with_model(&config, &dataset)?;
    let results = [result];
    let text = render_text(&results);
    write_outputs(&args.common.out, &render_json(&results[0])?, &text, &render_csv(&results))?;
    print!("{text}");
    eprintln!("finished in {:.1?}", results[0].wall_time);
    if let Some(path) = args.save_model {
        save_model(&model, &path)?;
        eprintln!("model written to {}", path.display());
    }
    Ok(())
}

fn suite(args: SuiteArgs) -> Result<i32> {
    let base = args.common.config(Topology::OneLayer, InitFamily::Xavier);
    let cells = run_suite(&base)?;
    let results: Vec<_> = cells.iter().filter_map(|c| c.result.clone()).collect();
    let text = render_suite_text(&cells);
    write_outputs(&args.common.out, &render_json(&cells)?, &text, &render_csv(&results))?;
    print!("{text}");
    Ok(cells.iter().filter_map(|c| c.error_code).max().unwrap_or(0))
}

fn grad_check_cmd(args: GradCheckArgs) -> Result<i32> {
    let mut rng = Rng::new(args.seed);
    let data = sample(
        &mut rng,
        Distribution::Normal { mean: 0.0, variance: 1.0 },
        args.batch * mlpinit::data::FEATURE_COUNT,
    )?;
    let batch = Matrix::new(args.batch, mlpinit::data::FEATURE_COUNT, data)?;
    let labels: Vec<usize> = (0..args.batch).map(|_| (rng.next_u64() % 4) as usize).collect();
    let mut failed = false;
    println!("{:<10}{:<10}{:>20}", "topology", "init", "max rel error");
    for topology in Topology::ALL {
        for family in InitFamily::ALL {
            let model = build_model(&mut rng, topology, InitScheme::new(family, args.dist.into()));
            let err = grad_check(&model, &batch, &labels, args.epsilon)?;
            let ok = err < args.tolerance;
            failed |= !ok;
            println!(
                "{:<10}{:<10}{:>20.3e}  {}",
                topology.to_string(),
                family.name(),
                err,
                if ok { "ok" } else { "FAIL" }
            );
        }
    }
    Ok(if failed { 1 } else { 0 })
}

fn init_stats(args: InitStatsArgs) -> Result<()> {
    println!(
        "{:<18}{:>6}{:>14}{:>14}{:>10}{:>12}{:>12}",
        "scheme", "d", "target var", "empirical", "rel err", "max |w|", "bound"
    );
    for scheme in InitScheme::ALL {
        for &d in &args.fan_in {
            let mut rng = Rng::new(args.seed);
            let mut pooled = Vec::with_capacity(args.samples);
            while pooled.len() < args.samples {
                pooled.extend(initialize(&mut rng, scheme, d, 1, d)?.into_vec());
            }
            pooled.truncate(args.samples);
            let target = scheme.target_variance(d)?;
            let var = empirical_variance(&pooled);
            let max_abs = pooled.iter().fold(0.0f64, |m, w| m.max(w.abs()));
            let bound = match scheme.dist {
                InitDist::Uniform => format!("{:.6}", scheme.uniform_bound(d)?),
                InitDist::Normal => "-".into(),
            };
            println!(
                "{:<18}{:>6}{:>14.6e}{:>14.6e}{:>9.2}%{:>12.6}{:>12}",
                scheme.to_string(),
                d,
                target,
                var,
                100.0 * (var / target - 1.0),
                max_abs,
                bound
            );
        }
    }
    if args.propagation {
        let x = Matrix::new(
            10_000,
            256,
            sample(&mut Rng::new(args.seed), Distribution::Normal { mean: 0.0, variance: 1.0 }, 10_000 * 256)?,
        )?;
        let input = empirical_variance(x.as_slice());
        println!("\nVar(layer) / Var(input), 10-layer width-256 ReLU stack");
        for family in InitFamily::ALL {
            let profile = relu_variance_profile(
                &mut Rng::new(args.seed.wrapping_add(1)),
                InitScheme::new(family, InitDist::Normal),
                10,
                &x,
            )?;
            let cells: Vec<String> = profile.iter().map(|v| format!("{:.4}", v / input)).collect();
            println!("{:<8} {}", family.name(), cells.join(" "));
        }
    }
    Ok(())
}

fn synth(args: SynthArgs) -> Result<()> {
    let ds = synthesize_dataset(&SyntheticSpec {
        seed: args.seed,
        participants: args.participants,
        records_per_participant: args.records,
        separation: args.separation,
    })?;
    write_csv(&ds, &args.out)?;
    eprintln!("wrote {} samples to {}", ds.len(), args.out.display());
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a).map(|_| 0),
        Command::Suite(a) => suite(a),
        Command::GradCheck(a) => grad_check_cmd(a),
        Command::InitStats(a) => init_stats(a).map(|_| 0),
        Command::Synth(a) => synth(a).map(|_| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
