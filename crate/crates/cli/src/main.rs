//! `qsic`: reachable-state counts, memory curves, ε-transducers, traces and
//! audits for sequential measurements on contextuality sets.

mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use qsic_core::Error;

#[derive(Parser)]
#[command(
    name = "qsic",
    version,
    about = "Exact analysis of sequential measurements on contextuality sets"
)]
struct Cli {
    #[command(flatten)]
    global: Global,

    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
pub struct Global {
    /// Output directory for generated files.
    #[arg(long, global = true, env = "QSIC_OUT_DIR", default_value = ".")]
    pub out_dir: PathBuf,

    /// Worker threads (default: all available).
    #[arg(long, global = true)]
    pub workers: Option<usize>,

    /// Print probabilities as exact `a/b` strings.
    #[arg(long, global = true)]
    pub exact: bool,

    /// Leave the `# created:` line out of generated files.
    #[arg(long, global = true)]
    pub no_timestamp: bool,
}

#[derive(Args, Clone)]
pub struct SetArgs {
    /// `peres-mermin`, `yu-oh`, or a path to a set JSON file.
    #[arg(long, default_value = "yu-oh")]
    pub set: String,

    /// `canonical` for the set's own ensemble, or a distribution CSV.
    #[arg(long, default_value = "canonical")]
    pub init: String,

    /// Maximum number of states held at once (default: 50000000 for
    /// distributions, 1000000 for transducers).
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub cap: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Reachable-state counts per step.
    Counts {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 7)]
        steps: usize,
        /// Evolve probabilities in f64 instead of exact rationals.
        #[arg(long)]
        float: bool,
    },
    /// Entropy of the state distribution per step.
    Entropy {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 10)]
        steps: usize,
        #[arg(long)]
        float: bool,
        /// Also write the final distribution as a CSV.
        #[arg(long)]
        export_dist: bool,
    },
    /// Build and audit the ε-transducer.
    Transducer {
        #[command(flatten)]
        set: SetArgs,
        /// Stop after this many measurements (default: build to closure).
        #[arg(long)]
        depth: Option<usize>,
        /// Largest number of state pairs the distinguishability audit accepts.
        #[arg(long, default_value_t = 1_000_000_000)]
        pair_cap: u64,
        /// Also write a Graphviz file of the first `--dot-states` states.
        #[arg(long)]
        dot: bool,
        #[arg(long, default_value_t = 64)]
        dot_states: usize,
    },
    /// Generate a measurement trace.
    Sample {
        #[command(flatten)]
        set: SetArgs,
        #[arg(long, default_value_t = 100_000)]
        len: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = SampleSource::Quantum)]
        source: SampleSource,
        /// Machine depth for `--source classical` (default: closure).
        #[arg(long)]
        depth: Option<usize>,
        /// Output file (default: `trace_<set>_<source>_<seed>.csv` in the output directory).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare the statistics of two traces.
    Compare {
        a: PathBuf,
        b: PathBuf,
        #[arg(long, default_value_t = 3)]
        window: usize,
        #[arg(long, default_value_t = qsic_core::simulator::DEFAULT_N_MIN)]
        n_min: u64,
        #[arg(long, default_value_t = qsic_core::simulator::DEFAULT_THRESHOLD)]
        threshold: f64,
        /// Write the report JSON here as well as to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the invariant suite and print a pass/fail table.
    Verify {
        #[command(flatten)]
        set: SetArgs,
        /// Transducer depth (default: closure).
        #[arg(long)]
        depth: Option<usize>,
        /// Longest past for the past-sufficiency check.
        #[arg(long, default_value_t = 4)]
        past_length: usize,
        #[arg(long, default_value_t = 1_000_000_000)]
        pair_cap: u64,
        #[arg(long, default_value_t = 5_000_000)]
        node_cap: usize,
    },
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SampleSource {
    Quantum,
    Classical,
    /// Memoryless fair coin, a negative control.
    Coin,
}

/// 1 audit failure, 2 input error, 3 resource limit.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::ResourceLimit { .. } => 3,
        Error::ZeroVector
        | Error::DimensionMismatch { .. }
        | Error::InvalidOutcome { .. }
        | Error::ZeroProbabilityBranch { .. }
        | Error::Parse { .. }
        | Error::Validation(_)
        | Error::UnknownMeasurement(_)
        | Error::Io(_) => 2,
        _ => 1,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.global.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
        {
            eprintln!("qsic: cannot start {n} workers: {e}");
            return ExitCode::from(2);
        }
    }
    let g = &cli.global;
    let result = match cli.command {
        Command::Counts { set, steps, float } => commands::counts(g, &set, steps, float),
        Command::Entropy {
            set,
            steps,
            float,
            export_dist,
        } => commands::entropy(g, &set, steps, float, export_dist),
        Command::Transducer {
            set,
            depth,
            pair_cap,
            dot,
            dot_states,
        } => commands::transducer(g, &set, depth, pair_cap, dot.then_some(dot_states)),
        Command::Sample {
            set,
            len,
            seed,
            source,
            depth,
            out,
        } => commands::sample(g, &set, len, seed, source, depth, out),
        Command::Compare {
            a,
            b,
            window,
            n_min,
            threshold,
            out,
        } => commands::compare(&a, &b, window, n_min, threshold, out),
        Command::Verify {
            set,
            depth,
            past_length,
            pair_cap,
            node_cap,
        } => commands::verify(g, &set, depth, past_length, pair_cap, node_cap),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("qsic: {e}");
            if let Error::InsufficientData { .. } = e {
                eprintln!("qsic: use longer traces, a shorter --window or a smaller --n-min");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
