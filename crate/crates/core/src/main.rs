use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use subred::cli::{cmd_exponents, cmd_reduce, cmd_sweep, cmd_verify, ReduceInput, Suite, SweepFamily, SweepSpec};
use subred::detect::Ensemble;
use subred::dump::{read_dump, write_matrix, Dump};
use subred::pairs::ComputablePair;
use subred::{Error, Result};

#[derive(Parser)]
#[command(name = "subred", version, about = "Average-case reductions to submatrix detection")]
struct Cli {
    /// Master seed for every random stream.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Monte Carlo trials per hypothesis.
    #[arg(long, global = true, default_value_t = 200)]
    trials: usize,
    /// Slack factor standing in for `<<`; defaults to log^3 n.
    #[arg(long, global = true)]
    slack: Option<f64>,
    /// Output path; stdout when absent (required for `reduce`).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an exact verification suite: kernel, clone, diagonal, exponents, it-bound.
    Verify { suite: String },
    /// Phase-diagram sweep over (alpha, beta), written as CSV.
    Sweep(SweepArgs),
    /// Map a graph to a submatrix instance.
    Reduce(ReduceArgs),
    /// Tabulate Chernoff exponents of a pair.
    Exponents {
        /// Pair spec, e.g. "family=gaussian mu=0.5" or "family=bernoulli p=0.6 q=0.3".
        pair: String,
        #[arg(long, default_value_t = 21)]
        points: usize,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Bc,
    Sp,
    Gp,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_enum, default_value = "bc")]
    family: FamilyArg,
    /// Comma-separated alpha grid; each cell uses skl = n^-alpha.
    #[arg(long, value_delimiter = ',', required = true)]
    alphas: Vec<f64>,
    /// Comma-separated beta grid; each cell uses k = ceil(n^beta).
    #[arg(long, value_delimiter = ',', required = true)]
    betas: Vec<f64>,
    #[arg(long, default_value_t = 400)]
    n: usize,
    /// D_sp density ratio.
    #[arg(long, default_value_t = 2.0)]
    c_sp: f64,
    /// D_gp gap exponent.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// D_gp gap constant.
    #[arg(long, default_value_t = 1.0)]
    c_gp: f64,
    /// Use independent row and column planted sets.
    #[arg(long)]
    asd: bool,
}

#[derive(Args)]
struct ReduceArgs {
    /// Key-value config file.
    config: PathBuf,
    /// Input graph dump.
    #[arg(long, conflicts_with = "sample")]
    input: Option<PathBuf>,
    /// Sample the input instead: `null` or `planted`.
    #[arg(long)]
    sample: Option<String>,
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(path)?))
}

fn run(cli: Cli) -> Result<bool> {
    match cli.command {
        Command::Verify { suite } => {
            let report = cmd_verify(suite.parse::<Suite>()?)?;
            print!("{}", report.render());
            Ok(report.passed())
        }
        Command::Sweep(a) => {
            let family = match a.family {
                FamilyArg::Bc => SweepFamily::Bc,
                FamilyArg::Sp => SweepFamily::Sp { c: a.c_sp },
                FamilyArg::Gp => SweepFamily::Gp { gamma: a.gamma, c: a.c_gp },
            };
            let spec = SweepSpec {
                family,
                alphas: a.alphas,
                betas: a.betas,
                n: a.n,
                trials: cli.trials,
                seed: cli.seed,
                slack: cli.slack,
                ensemble: if a.asd { Ensemble::Asd } else { Ensemble::Ssd },
            };
            match &cli.out {
                Some(p) => cmd_sweep(&spec, create(p)?)?,
                None => cmd_sweep(&spec, std::io::stdout().lock())?,
            }
            Ok(true)
        }
        Command::Reduce(a) => {
            let out = cli.out.ok_or_else(|| Error::InvalidParameter("reduce needs --out".into()))?;
            let config = std::fs::read_to_string(&a.config)?;
            let input = match (a.input, a.sample.as_deref()) {
                (Some(path), None) => match read_dump(&mut BufReader::new(File::open(path)?))? {
                    Dump::Graph(g) => ReduceInput::Graph(g),
                    Dump::Matrix(_) => return Err(Error::Parse("reduce input must be a graph dump".into())),
                },
                (None, Some("null")) => ReduceInput::Sample { planted: false },
                (None, Some("planted")) => ReduceInput::Sample { planted: true },
                (None, Some(other)) => {
                    return Err(Error::InvalidParameter(format!("--sample must be null or planted, got `{other}`")))
                }
                _ => return Err(Error::InvalidParameter("reduce needs --input or --sample".into())),
            };
            let (result, _, report) = cmd_reduce(&config, input, cli.seed)?;
            let mut w = create(&out)?;
            write_matrix(&mut w, &result.matrix)?;
            w.flush()?;
            let mut side = out.into_os_string();
            side.push(".report.txt");
            std::fs::write(&side, report)?;
            Ok(true)
        }
        Command::Exponents { pair, points } => {
            let table = cmd_exponents(&pair.parse::<ComputablePair>()?, points)?;
            match &cli.out {
                Some(p) => std::fs::write(p, table)?,
                None => print!("{table}"),
            }
            Ok(true)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
