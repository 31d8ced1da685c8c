use clap::{Args, Parser, Subcommand};
use geolabel::instance::{Family, GenParams};
use geolabel_cli::{cmd_bench, cmd_gen, cmd_label, cmd_verify, ExperimentConfig, Scheme, SchemeParams};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "geolabel", about = "Adjacency labels for geometric graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GenOpts {
    /// Coordinate box side; 0 selects the family default.
    #[arg(long, default_value_t = 0)]
    range: i64,
    /// Rational grid denominator.
    #[arg(long, default_value_t = 1 << 10)]
    denom: i64,
    /// Semilinear preset: interval, permutation, boxicity, circle.
    #[arg(long, default_value = "interval")]
    preset: String,
    /// Boxicity / preset dimension.
    #[arg(long, default_value_t = 3)]
    dim: usize,
}

impl GenOpts {
    fn params(&self) -> GenParams {
        GenParams {
            range: self.range,
            denom: self.denom,
            preset: self.preset.clone(),
            dim: self.dim,
            ..GenParams::default()
        }
    }
}

#[derive(Args)]
struct TreeOpts {
    /// Cutting parameter D.
    #[arg(long, default_value_t = 4)]
    d: usize,
    /// kd-partition cell count r (a power of 4).
    #[arg(long, default_value_t = 16)]
    r: usize,
}

impl TreeOpts {
    fn params(&self) -> SchemeParams {
        SchemeParams {
            d: self.d,
            r: self.r,
            ..SchemeParams::default()
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate an instance and write it as JSON.
    Gen {
        #[arg(long)]
        family: String,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        seed: u64,
        #[command(flatten)]
        gen: GenOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Build labels for an instance and write the bit dump.
    Label {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        scheme: String,
        #[command(flatten)]
        tree: TreeOpts,
        #[arg(long)]
        out: PathBuf,
    },
    /// Compare decoded adjacency against the oracle; exit 0 iff no mismatch.
    Verify {
        #[arg(long)]
        instance: PathBuf,
        #[arg(long)]
        labels: PathBuf,
    },
    /// Generate, label, and verify over an n/seed grid; emit CSV + summary.
    Bench {
        #[arg(long)]
        family: String,
        #[arg(long)]
        scheme: String,
        /// Comma-separated ascending n values.
        #[arg(long, value_delimiter = ',')]
        ns: Vec<usize>,
        /// Comma-separated seeds.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Also measure the star baseline on the same instances.
        #[arg(long, default_value_t = false)]
        baseline: bool,
        #[command(flatten)]
        gen: GenOpts,
        #[command(flatten)]
        tree: TreeOpts,
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        summary: PathBuf,
    },
}

fn run() -> geolabel::Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Gen {
            family,
            n,
            seed,
            gen,
            out,
        } => {
            cmd_gen(Family::from_tag(&family)?, n, seed, &gen.params(), &out)?;
            Ok(true)
        }
        Command::Label {
            instance,
            scheme,
            tree,
            out,
        } => {
            let built = cmd_label(&instance, Scheme::from_tag(&scheme)?, &tree.params(), &out)?;
            eprintln!(
                "labeled {} vertices, max {} bits, total {} bits",
                built.labels.labels.len(),
                built.labels.stats.max_bits,
                built.labels.stats.total_bits
            );
            Ok(true)
        }
        Command::Verify { instance, labels } => Ok(cmd_verify(&instance, &labels)?.ok()),
        Command::Bench {
            family,
            scheme,
            ns,
            seeds,
            baseline,
            gen,
            tree,
            csv,
            summary,
        } => {
            let config = ExperimentConfig {
                family: Family::from_tag(&family)?,
                ns,
                seeds,
                scheme: Scheme::from_tag(&scheme)?,
                params: tree.params(),
                gen: gen.params(),
                baseline,
            };
            let s = cmd_bench(&[config], &csv, &summary)?;
            eprintln!("{}", serde_json::to_string(&s)?);
            Ok(s.families.iter().all(|f| f.status == "ok"))
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
