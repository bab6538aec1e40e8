use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde_json::json;
use wopt::experiments::{run_heatmap, run_rates, ExperimentConfig, ExperimentRow, KRule};
use wopt::formats::{
    parse_points_csv, read_json, read_points_csv, write_json, GeneratorJson, WalkJson, WeightsJson,
};
use wopt::output::emit_outputs;
use wopt_core::multivariate::build_gstar_md;
use wopt_core::oracle::w1_generator_vs_empirical;
use wopt_core::path::{
    exact_covering_walk, heuristic_covering_walk, k2_lower_bound, EXACT_SIZE_LIMIT,
};
use wopt_core::semidiscrete::{
    adapted_weights, smooth_plateaus, AscentConfig, PushforwardSampler, Sampler, UniformBox,
};
use wopt_core::univariate::{build_gstar_1d, k1_lower_bound};
use wopt_core::{SampleCloud, WalkSolution};

#[derive(Parser)]
#[command(
    name = "wopt",
    version,
    about = "Optimal Lipschitz generators for empirical measures"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct DataArgs {
    /// Points as CSV, one point per row.
    #[arg(long)]
    data: PathBuf,
    /// The CSV starts with a header line.
    #[arg(long)]
    header: bool,
}

impl DataArgs {
    fn load(&self) -> Result<SampleCloud> {
        read_points_csv(&self.data, self.header)
    }
}

#[derive(Subcommand)]
enum Command {
    /// One-dimensional optimal generator.
    Gstar1d {
        #[command(flatten)]
        data: DataArgs,
        /// Lipschitz constant, or `auto` for the lower bound.
        #[arg(long, default_value = "auto")]
        k: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Covering walk minimizing the sum of squared steps.
    Path {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, conflicts_with = "heuristic")]
        exact: bool,
        #[arg(long)]
        heuristic: bool,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Multivariate optimal generator along a covering walk.
    Gstarmd {
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value = "auto")]
        k: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Adapted weights of a semi-discrete transport problem.
    Sdot {
        /// Target atoms as CSV.
        #[arg(long)]
        atoms: PathBuf,
        #[arg(long)]
        header: bool,
        /// `uniform-box` or `pushforward:GEN.json`.
        #[arg(long)]
        target: String,
        /// `uniform` or a single-column CSV of atom masses.
        #[arg(long, default_value = "uniform")]
        alpha: String,
        /// Replace plateaus of a pushforward generator by tents of width 1/M.
        #[arg(long)]
        smooth: Option<usize>,
        #[arg(long, default_value_t = 4000)]
        iters: usize,
        #[arg(long, default_value_t = 256)]
        batch: usize,
        #[arg(long, default_value_t = 1_000_000)]
        eval_samples: usize,
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Exact W1 between a discretized generator and an empirical measure.
    W1 {
        #[arg(long)]
        gen: PathBuf,
        #[command(flatten)]
        data: DataArgs,
        #[arg(long, default_value_t = 100_000)]
        grid: usize,
    },
    /// Convergence-rate experiment.
    Rates {
        #[arg(long)]
        config: PathBuf,
    },
    /// (n, K) heat-map experiment in one dimension.
    Heatmap {
        #[arg(long)]
        config: PathBuf,
    },
}

fn parse_k(text: &str) -> Result<Option<f64>> {
    if text == "auto" {
        return Ok(None);
    }
    let k: f64 = text
        .parse()
        .with_context(|| format!("--k expects a number or `auto`, got {text:?}"))?;
    Ok(Some(k))
}

fn covering_walk(
    cloud: &SampleCloud,
    exact: bool,
    heuristic: bool,
    seed: u64,
) -> Result<WalkSolution> {
    let small = cloud.distinct().len() <= EXACT_SIZE_LIMIT;
    let walk = if exact || (small && !heuristic) {
        exact_covering_walk(cloud)?
    } else {
        heuristic_covering_walk(cloud, seed)?
    };
    Ok(walk)
}

fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("WOPT_THREADS") {
        let threads: usize = v
            .parse()
            .with_context(|| format!("WOPT_THREADS must be a positive integer, got {v:?}"))?;
        if threads == 0 {
            bail!("WOPT_THREADS must be positive");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()?;
    }
    Ok(())
}

fn label(config: &ExperimentConfig) -> impl Fn(&ExperimentRow) -> String + '_ {
    move |row| match &config.k_rule {
        KRule::MultipleOfLower { factor } => format!("K = {factor} x lower bound"),
        KRule::Absolute { .. } => format!("K = {}", row.k),
    }
}

fn experiment(path: &Path, heatmap: bool) -> Result<()> {
    configure_threads()?;
    let config: ExperimentConfig = read_json(path)?;
    let rows = if heatmap {
        run_heatmap(&config)?
    } else {
        run_rates(&config)?
    };
    let csv = config.csv_path.as_deref().map(Path::new);
    let svg = config.svg_path.as_deref().map(Path::new);
    if csv.is_none() {
        wopt::output::write_csv(std::io::stdout().lock(), &rows)?;
    }
    let label_of = label(&config);
    emit_outputs(&rows, csv, svg, &label_of)
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gstar1d { data, k, out } => {
            let cloud = data.load()?;
            if cloud.dim() != 1 {
                bail!("expected one column, found {}", cloud.dim());
            }
            let k_lower = k1_lower_bound(&cloud)?;
            let k = parse_k(&k)?.unwrap_or(k_lower);
            let opt = build_gstar_1d(&cloud, k)?;
            let json = GeneratorJson::from_generator(&opt.generator)
                .with("w1", opt.w1_value)
                .with("k_lower", opt.k_lower)
                .with("atom_masses", &opt.atom_masses);
            write_json(&out, &json)
        }
        Command::Path {
            data,
            exact,
            heuristic,
            seed,
            out,
        } => {
            let cloud = data.load()?;
            let walk = covering_walk(&cloud, exact, heuristic, seed)?;
            write_json(&out, &WalkJson::from(&walk))
        }
        Command::Gstarmd { data, k, seed, out } => {
            let cloud = data.load()?;
            let walk = covering_walk(&cloud, false, false, seed)?;
            let k_lower = k2_lower_bound(&cloud, &walk)?;
            let k = parse_k(&k)?.unwrap_or(k_lower);
            let opt = build_gstar_md(&cloud, &walk, k)?;
            let json = GeneratorJson::from_generator(&opt.generator)
                .with("w1", opt.w1_value)
                .with("k_lower", opt.k_lower)
                .with("walk", WalkJson::from(&walk));
            write_json(&out, &json)
        }
        Command::Sdot {
            atoms,
            header,
            target,
            alpha,
            smooth,
            iters,
            batch,
            eval_samples,
            tolerance,
            seed,
            out,
        } => {
            let atoms = read_points_csv(&atoms, header)?.distinct().into_owned();
            let n = atoms.len();
            let alpha = if alpha == "uniform" {
                vec![1.0 / n as f64; n]
            } else {
                let text = std::fs::read_to_string(&alpha)
                    .with_context(|| format!("cannot read {alpha}"))?;
                let masses = parse_points_csv(text.as_bytes(), false)?;
                if masses.dim() != 1 || masses.len() != n {
                    bail!("alpha file must hold one mass per distinct atom ({n})");
                }
                masses.coords().to_vec()
            };
            let sampler: Box<dyn Sampler> = if target == "uniform-box" {
                Box::new(UniformBox::unit(atoms.dim())?)
            } else if let Some(path) = target.strip_prefix("pushforward:") {
                let json: GeneratorJson = read_json(Path::new(path))?;
                let mut g = json.to_generator()?;
                if let Some(m) = smooth {
                    g = smooth_plateaus(&g, m)?;
                }
                Box::new(PushforwardSampler::new(g))
            } else {
                bail!("--target must be `uniform-box` or `pushforward:FILE`, got {target:?}");
            };
            let config = AscentConfig {
                iterations: iters,
                batch,
                eval_samples,
                tolerance,
                seed,
                ..AscentConfig::default()
            };
            let result = adapted_weights(&sampler, &atoms, &alpha, &config)?;
            write_json(
                &out,
                &WeightsJson::new(&result.voronoi, result.residual, result.cell_masses),
            )
        }
        Command::W1 { gen, data, grid } => {
            let g = read_json::<GeneratorJson>(&gen)?.to_generator()?;
            let cloud = data.load()?;
            let d = w1_generator_vs_empirical(&g, &cloud, grid)?;
            println!(
                "{}",
                json!({ "value": d.value, "bias_bound": d.bias_bound })
            );
            Ok(())
        }
        Command::Rates { config } => experiment(&config, false),
        Command::Heatmap { config } => experiment(&config, true),
    }
}

fn main() {
    if let Err(e) = run(Cli::parse()) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
