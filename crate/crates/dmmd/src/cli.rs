//! Command-line driver. Exit codes: 0 when the run succeeded (for `fit`, when
//! the coreset is satisfied), 2 when `fit` stopped on a budget or ran out of
//! candidates first, 1 on any error including malformed arguments.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use dmmd_core::analysis::{criticisms, grouped_weights, weight_ratio, weighted_attribute_moments};
use dmmd_core::kernels::build_additive_kernel;
use dmmd_core::selection::fit;
use dmmd_core::{Algorithm, FitConfig, GramCache};

use crate::bench::{run_curves, size_to_threshold};
use crate::cachefile::{read_cache, write_cache};
use crate::coreset::CoresetFile;
use crate::error::{Error, Result};
use crate::manifest::{load_collection, Loaded};
use crate::synth::{self, Preset};
use crate::tables;

pub const CORESET_FILE: &str = "coreset.json";
pub const SUMMARY_FILE: &str = "summary.txt";
pub const GRAM_FILE: &str = "gram.bin";

#[derive(Debug, Parser)]
#[command(name = "dmmd", version, about = "Dependent MMD coresets for collections of related datasets")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Select a dependent coreset and write coreset.json and summary.txt
    Fit(FitArgs),
    /// Criticisms, weight ratios, grouped weights and attribute moments of a fitted coreset
    Analyze(AnalyzeArgs),
    /// MMD² curves and coreset sizes per threshold for several algorithms
    Bench(BenchArgs),
    /// Write a synthetic fixture as a manifest directory
    Synth(SynthArgs),
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// Manifest describing datasets, candidate pool and attributes
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: PathBuf,
    /// Worker threads [default: available cores]
    #[arg(long, value_parser = clap::value_parser!(u16).range(1..))]
    pub threads: Option<u16>,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    /// Points per median-bandwidth subsample
    #[arg(long, default_value_t = 2000)]
    pub subsample_cap: usize,
    /// Seed of the bandwidth subsample
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

fn parse_algorithm(s: &str) -> std::result::Result<Algorithm, String> {
    s.parse::<Algorithm>().map_err(|_| {
        let names: Vec<&str> = Algorithm::ALL.iter().map(|a| a.name()).collect();
        format!("expected one of {}", names.join(", "))
    })
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// dmmd, dmmd-opt or protodash
    #[arg(long, default_value = "dmmd", value_parser = parse_algorithm)]
    pub algorithm: Algorithm,
    /// Squared MMD threshold every dataset must reach
    #[arg(long, default_value_t = 0.01)]
    pub eps2: f64,
    /// Exemplar budget [default: unlimited]
    #[arg(long)]
    pub max_m: Option<usize>,
    /// Selection time budget in seconds [default: unlimited]
    #[arg(long)]
    pub max_seconds: Option<f64>,
    /// Reuse a gram cache written by an earlier --save-gram run
    #[arg(long)]
    pub gram: Option<PathBuf>,
    /// Also write the gram cache to gram.bin in the output directory
    #[arg(long)]
    pub save_gram: bool,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub io: IoArgs,
    /// Coreset file [default: coreset.json in the output directory]
    #[arg(long)]
    pub coreset: Option<PathBuf>,
    /// Criticisms per dataset; 0 skips criticisms
    #[arg(long, default_value_t = 20)]
    pub criticisms_k: usize,
    /// Ratio w_b/w_a above which an exemplar is over-represented in b
    #[arg(long, default_value_t = 2.0)]
    pub ratio_upper: f64,
    /// Ratio w_b/w_a below which an exemplar is over-represented in a
    #[arg(long, default_value_t = 0.5)]
    pub ratio_lower: f64,
    /// Datasets a,b compared by the ratio table [default: the first two]
    #[arg(long, value_delimiter = ',', value_name = "A,B")]
    pub pair: Vec<String>,
    /// Numeric attribute summarized by weighted mean and sd
    #[arg(long)]
    pub attribute: Option<String>,
    /// Categorical attribute used to group exemplar weights
    #[arg(long)]
    pub labels: Option<String>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub kernel: KernelArgs,
    /// Algorithms to compare, comma separated
    #[arg(long, value_delimiter = ',', default_value = "dmmd,dmmd-opt,protodash", value_parser = parse_algorithm)]
    pub algorithm: Vec<Algorithm>,
    /// Thresholds for the size table, comma separated
    #[arg(long, value_delimiter = ',', default_value = "0.05,0.01,0.005")]
    pub eps2: Vec<f64>,
    /// Exemplar budget per run
    #[arg(long, default_value_t = 50)]
    pub max_m: usize,
    /// Selection time budget per run in seconds
    #[arg(long, default_value_t = 60.0)]
    pub max_seconds: f64,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Fixture to generate
    #[arg(long, value_enum)]
    pub preset: Preset,
    /// Output directory, created if missing
    #[arg(long)]
    pub out: PathBuf,
    /// Rows per generated sample
    #[arg(long, default_value_t = 250)]
    pub n: usize,
    /// Generator seed
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// How a successful command ended.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Done,
    Unsatisfied,
}

impl Outcome {
    pub fn code(self) -> u8 {
        match self {
            Outcome::Done => 0,
            Outcome::Unsatisfied => 2,
        }
    }
}

fn with_threads<T: Send>(threads: Option<u16>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n.into());
    }
    let pool = builder
        .build()
        .map_err(|e| Error::Usage(format!("cannot start worker threads: {e}")))?;
    pool.install(f)
}

fn create_out(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Load the manifest and build (or reload) the gram cache.
pub fn prepare(manifest: &Path, kernel: &KernelArgs, gram: Option<&Path>) -> Result<(Loaded, GramCache)> {
    let loaded = load_collection(manifest)?;
    let cache = match gram {
        Some(path) => {
            let cache = read_cache(path)?;
            if cache.labels() != loaded.collection.labels() || cache.candidate_rows() != loaded.candidates.as_slice() {
                return Err(Error::Mismatch(format!(
                    "gram cache {} was built for a different collection",
                    path.display()
                )));
            }
            cache
        }
        None => {
            let k = build_additive_kernel(&loaded.table, &loaded.collection, kernel.subsample_cap, kernel.seed)?;
            GramCache::build(&k, &loaded.table, &loaded.collection, &loaded.candidates, None)?
        }
    };
    Ok((loaded, cache))
}

pub fn cmd_fit(args: &FitArgs) -> Result<Outcome> {
    let mut config = FitConfig::new(args.algorithm, args.eps2);
    if let Some(m) = args.max_m {
        config = config.with_max_exemplars(m);
    }
    if let Some(s) = args.max_seconds {
        config = config.with_max_seconds(s);
    }
    config.validate()?;
    with_threads(args.io.threads, || {
        let (loaded, cache) = prepare(&args.io.manifest, &args.kernel, args.gram.as_deref())?;
        let start = Instant::now();
        let coreset = fit(&cache, &config, &start)?;
        let file = CoresetFile::new(&coreset, &cache, &loaded.table, args.kernel.subsample_cap, args.kernel.seed);
        create_out(&args.io.out)?;
        file.write(&args.io.out.join(CORESET_FILE))?;
        let summary = file.summary();
        write_text(&args.io.out.join(SUMMARY_FILE), &summary)?;
        if args.save_gram {
            write_cache(&args.io.out.join(GRAM_FILE), &cache)?;
        }
        print!("{summary}");
        Ok(if coreset.satisfied {
            Outcome::Done
        } else {
            Outcome::Unsatisfied
        })
    })
}

pub fn cmd_analyze(args: &AnalyzeArgs) -> Result<Outcome> {
    let coreset_path = args.coreset.clone().unwrap_or_else(|| args.io.out.join(CORESET_FILE));
    if !(args.pair.is_empty() || args.pair.len() == 2) {
        return Err(Error::Usage("--pair takes exactly two dataset names, as a,b".into()));
    }
    with_threads(args.io.threads, || {
        let loaded = load_collection(&args.io.manifest)?;
        let file = CoresetFile::read(&coreset_path)?;
        for d in &file.datasets {
            if loaded.collection.position(d).is_err() {
                return Err(Error::Mismatch(format!("dataset `{d}` is not in the manifest")));
            }
        }
        let support = file.shared_support(&loaded.table)?;
        let kernel = file.kernel_model()?;
        let (table, collection) = (&loaded.table, &loaded.collection);

        let crit = if args.criticisms_k > 0 {
            Some(
                file.datasets
                    .iter()
                    .map(|d| criticisms(&kernel, table, collection, &support, d, args.criticisms_k))
                    .collect::<dmmd_core::Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        let pair = match args.pair.as_slice() {
            [a, b] => Some((a, b)),
            _ => file.datasets.first().zip(file.datasets.get(1)),
        };
        let ratios = match pair {
            Some((a, b)) => Some(weight_ratio(&support, a, b, args.ratio_upper, args.ratio_lower)?),
            None => None,
        };
        let grouped = match &args.labels {
            Some(name) => Some(grouped_weights(table, collection, &support, name)?),
            None => None,
        };
        let moments = match &args.attribute {
            Some(name) => Some(weighted_attribute_moments(table, collection, &support, name)?),
            None => None,
        };

        let out = &args.io.out;
        create_out(out)?;
        if let Some(c) = &crit {
            tables::write_criticisms(&out.join(tables::CRITICISMS), table, c)?;
        }
        if let Some(r) = &ratios {
            tables::write_ratios(&out.join(tables::RATIOS), table, r)?;
        }
        if let Some(g) = &grouped {
            tables::write_grouped(&out.join(tables::GROUPED), g)?;
        }
        if let Some(m) = &moments {
            tables::write_moments(&out.join(tables::MOMENTS), &file.datasets, m)?;
        }
        Ok(Outcome::Done)
    })
}

pub fn cmd_bench(args: &BenchArgs) -> Result<Outcome> {
    if args.max_m == 0 {
        return Err(Error::Usage("--max-m must be at least 1".into()));
    }
    if let Some(e) = args.eps2.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::Usage(format!("--eps2 values must be positive, got {e}")));
    }
    if args.max_seconds.is_nan() || args.max_seconds < 0.0 {
        return Err(Error::Usage("--max-seconds must be nonnegative".into()));
    }
    with_threads(args.io.threads, || {
        let (_, cache) = prepare(&args.io.manifest, &args.kernel, None)?;
        let curves = run_curves(&cache, &args.algorithm, args.max_m, args.max_seconds)?;
        let sizes = size_to_threshold(&cache, &args.algorithm, &args.eps2, args.max_m, args.max_seconds)?;
        create_out(&args.io.out)?;
        tables::write_curves(&args.io.out.join(tables::CURVES), &curves.records)?;
        tables::write_sizes(&args.io.out.join(tables::SIZES), &sizes)?;
        if let Some((alg, msg)) = curves.failures.first() {
            return Err(Error::Core(dmmd_core::Error::InvalidConfig(format!("{alg} failed: {msg}"))));
        }
        Ok(Outcome::Done)
    })
}

pub fn cmd_synth(args: &SynthArgs) -> Result<Outcome> {
    let s = synth::build(args.preset, args.n, args.seed)?;
    create_out(&args.out)?;
    s.write(&args.out)?;
    Ok(Outcome::Done)
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    match &cli.command {
        Command::Fit(a) => cmd_fit(a),
        Command::Analyze(a) => cmd_analyze(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Synth(a) => cmd_synth(a),
    }
}

/// Parse `args`, run, and map the result to an exit code.
pub fn main_with<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.code()),
        Err(e) => {
            eprintln!("error[{}]: {e}", e.category());
            ExitCode::from(1)
        }
    }
}
