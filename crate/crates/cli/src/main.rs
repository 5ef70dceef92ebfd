use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nnc_core::graph::{
    build_graph_configuration, load_edge_lists, sample_degree_sequence, write_edge_list, LabelIndex,
};
use nnc_core::harness::{emit_results, load_outcome_table};
use nnc_core::{
    fit_with_options, moment_stats, perturb, plug_in_bias, run_experiment, DegreeDistribution, ExperimentConfig,
    ExposureLevel, FitOptions, Graph, NoiseParams, OutcomeTable,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[derive(Parser)]
#[command(name = "nnc", version, about = "Causal effect estimation on noisy networks")]
struct Cli {
    /// Master seed; overrides the seed in an experiment config.
    #[arg(long, global = true, env = "NNC_SEED")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw a configuration-model graph and write it as an edge list.
    Generate(GenerateArgs),
    /// Apply edge-flip noise to an edge list.
    Perturb(PerturbArgs),
    /// Estimate edge-flip rates from three observed replicates.
    NoiseFit(NoiseFitArgs),
    /// Predicted bias of the uncorrected estimator for a degree sequence.
    BiasTheory(BiasTheoryArgs),
    /// Run a Monte Carlo experiment from a JSON config.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DegreeLaw {
    Ztp,
    Pareto,
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    n_vertices: usize,
    #[arg(long, value_enum, default_value = "ztp")]
    law: DegreeLaw,
    /// Mean of the zero-truncated Poisson law.
    #[arg(long, default_value_t = 10.0)]
    mean: f64,
    #[arg(long, default_value_t = 0.01)]
    rate: f64,
    #[arg(long, default_value_t = 1.5)]
    shape: f64,
    #[arg(long, default_value_t = 2.0)]
    lower: f64,
    /// Output path; stdout when omitted.
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PerturbArgs {
    input: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    /// Vertex count when labels are the integers `0..n`; isolated vertices
    /// are otherwise invisible in an edge list.
    #[arg(long)]
    n_vertices: Option<usize>,
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct NoiseFitArgs {
    #[arg(num_args = 3, required = true)]
    replicates: Vec<PathBuf>,
    #[arg(long)]
    n_vertices: Option<usize>,
    #[arg(long)]
    alpha0: Option<f64>,
    #[arg(long)]
    eps: Option<f64>,
    #[arg(long)]
    max_iter: Option<usize>,
}

#[derive(Args)]
struct BiasTheoryArgs {
    /// One true degree per line; a non-numeric first line is read as a header.
    #[arg(long)]
    degrees: PathBuf,
    #[arg(long)]
    alpha: f64,
    #[arg(long)]
    beta: f64,
    #[arg(long)]
    p: f64,
    /// Defaults to the number of degrees.
    #[arg(long)]
    n_vertices: Option<usize>,
    /// Constant outcomes for c11,c10,c01,c00.
    #[arg(long, value_delimiter = ',', conflicts_with = "outcomes")]
    values: Option<Vec<f64>>,
    /// Per-vertex outcome CSV with header y_c11,y_c10,y_c01,y_c00.
    #[arg(long)]
    outcomes: Option<PathBuf>,
}

#[derive(Args)]
struct ExperimentArgs {
    config: PathBuf,
    /// Results CSV; a JSON summary is written next to it.
    #[arg(long, short)]
    output: PathBuf,
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let seed = cli.seed;
    match cli.command {
        Command::Generate(args) => generate(args, seed.unwrap_or(0)),
        Command::Perturb(args) => perturb_cmd(args, seed.unwrap_or(0)),
        Command::NoiseFit(args) => noise_fit(args),
        Command::BiasTheory(args) => bias_theory(args),
        Command::Experiment(args) => experiment(args, seed),
    }
}

fn sink(output: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match output {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn open(path: &Path) -> Result<BufReader<File>> {
    Ok(BufReader::new(File::open(path).with_context(|| format!("cannot open {}", path.display()))?))
}

fn read_graphs(paths: &[PathBuf], n_vertices: Option<usize>) -> Result<(Vec<Graph>, LabelIndex)> {
    let readers = paths.iter().map(|p| open(p)).collect::<Result<Vec<_>>>()?;
    let labels = n_vertices.map(LabelIndex::with_numeric).unwrap_or_default();
    Ok(load_edge_lists(readers, labels)?)
}

fn generate(args: GenerateArgs, seed: u64) -> Result<()> {
    let dist = match args.law {
        DegreeLaw::Ztp => DegreeDistribution::ZeroTruncatedPoisson { mean: args.mean },
        DegreeLaw::Pareto => DegreeDistribution::ParetoExpCutoff {
            rate: args.rate,
            shape: args.shape,
            lower: args.lower,
        },
    };
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let degrees = sample_degree_sequence(&dist, args.n_vertices, &mut rng)?;
    let built = build_graph_configuration(&degrees, &mut rng)?;
    eprintln!(
        "generated {} vertices, {} edges ({} stubs erased)",
        built.graph.n_vertices(),
        built.graph.n_edges(),
        built.erased_stubs()
    );
    let mut out = sink(args.output.as_deref())?;
    write_edge_list(&built.graph, None, &mut out)?;
    out.flush()?;
    Ok(())
}

fn perturb_cmd(args: PerturbArgs, seed: u64) -> Result<()> {
    let noise = NoiseParams::new(args.alpha, args.beta)?;
    let (graphs, labels) = read_graphs(std::slice::from_ref(&args.input), args.n_vertices)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let observed = perturb(&graphs[0], &noise, &mut rng)?;
    let mut out = sink(args.output.as_deref())?;
    write_edge_list(&observed, Some(&labels), &mut out)?;
    out.flush()?;
    Ok(())
}

fn noise_fit(args: NoiseFitArgs) -> Result<()> {
    let (graphs, _) = read_graphs(&args.replicates, args.n_vertices)?;
    let stats = moment_stats(&graphs[0], &graphs[1], &graphs[2])?;
    let defaults = FitOptions::default();
    let options = FitOptions {
        alpha0: args.alpha0.or(defaults.alpha0),
        eps: args.eps.unwrap_or(defaults.eps),
        max_iter: args.max_iter.unwrap_or(defaults.max_iter),
    };
    let fit = fit_with_options(&stats, &options)?;
    let mut out = io::stdout().lock();
    writeln!(out, "alpha_hat,beta_hat,delta_hat,iterations,converged")?;
    writeln!(
        out,
        "{},{},{},{},{}",
        fit.alpha_hat, fit.beta_hat, fit.delta_hat, fit.iterations, fit.converged
    )?;
    Ok(())
}

fn read_degrees(path: &Path) -> Result<Vec<usize>> {
    let mut degrees = Vec::new();
    for (idx, line) in open(path)?.lines().enumerate() {
        let line = line?;
        let field = line.split(',').next().unwrap_or("").trim();
        if field.is_empty() {
            continue;
        }
        match field.parse::<usize>() {
            Ok(d) => degrees.push(d),
            Err(_) if idx == 0 => {}
            Err(_) => bail!("{}: line {} is not a degree: {field:?}", path.display(), idx + 1),
        }
    }
    if degrees.is_empty() {
        bail!("{}: no degrees", path.display());
    }
    Ok(degrees)
}

fn bias_theory(args: BiasTheoryArgs) -> Result<()> {
    let degrees = read_degrees(&args.degrees)?;
    let noise = NoiseParams::new(args.alpha, args.beta)?;
    let n_vertices = args.n_vertices.unwrap_or(degrees.len());
    if let Some(&d) = degrees.iter().find(|&&d| d >= n_vertices) {
        bail!("degree {d} needs more than {n_vertices} vertices");
    }
    let y = match (args.values, args.outcomes) {
        (_, Some(path)) => load_outcome_table(open(&path)?)?,
        (Some(v), None) => {
            let Ok(values) = <[f64; 4]>::try_from(v.as_slice()) else {
                bail!("--values needs four numbers, got {}", v.len());
            };
            OutcomeTable::constant(degrees.len(), values)?
        }
        (None, None) => bail!("give either --values or --outcomes"),
    };
    let prediction = plug_in_bias(&degrees, &y, &noise, args.p, n_vertices)?;
    let mut out = io::stdout().lock();
    writeln!(out, "level,predicted_bias,has_remainder")?;
    for k in 0..4 {
        let level = ExposureLevel::from_index(k);
        writeln!(out, "{level},{},{}", prediction.bias[k], prediction.has_remainder[k])?;
    }
    Ok(())
}

fn experiment(args: ExperimentArgs, seed: Option<u64>) -> Result<()> {
    let mut cfg = ExperimentConfig::from_path(&args.config)?;
    if let Some(seed) = seed {
        cfg.master_seed = seed;
    }
    let summary = run_experiment(&cfg)?;
    let sidecar = emit_results(&summary, &args.output)?;
    eprintln!(
        "{} trials ({} failed); wrote {} and {}",
        summary.n_trials,
        summary.n_failed,
        args.output.display(),
        sidecar.display()
    );
    Ok(())
}
