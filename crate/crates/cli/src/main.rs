//! `modelspace`: batch front end. One JSON config in, JSON or CSV out.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Output, EXIT_ERROR};
use config::Overrides;

#[derive(Parser)]
#[command(name = "modelspace", version, about = "Embedding criteria for model subspaces K_Θ", disable_help_subcommand = true)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the selected criteria, the sums and the spectral oracle; exit 2 on a failure, 3 when everything is inconclusive.
    Analyze(Args),
    /// CSV of quadtree cells straddling |Θ| = ε.
    Levelset(Args),
    /// CSV of the Whitney arcs of Ω(Θ, ε).
    Decompose(Args),
    /// Gram matrix of the embedding with its singular values and Schatten norms.
    Gram(Args),
}

#[derive(clap::Args)]
struct Args {
    #[arg(long, value_name = "PATH")]
    config: PathBuf,
    #[arg(long)]
    epsilon: Option<f64>,
    /// Comma-separated Schatten exponents.
    #[arg(long, value_delimiter = ',', value_name = "LIST")]
    r: Vec<f64>,
    #[arg(long)]
    p: Option<f64>,
    /// Derivative order of the Bernstein ratio.
    #[arg(long)]
    n: Option<u32>,
    #[arg(long)]
    depth: Option<u32>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    /// Scale of the level-set neighbourhood in the thm54 family sum.
    #[arg(long = "A", value_name = "A")]
    a: Option<f64>,
    /// Output directory; stdout when absent.
    #[arg(long, value_name = "DIR")]
    out: Option<PathBuf>,
}

impl Args {
    fn overrides(&self) -> Overrides {
        Overrides {
            epsilon: self.epsilon,
            r: self.r.clone(),
            p: self.p,
            n: self.n,
            depth: self.depth,
            tol: self.tol,
            seed: self.seed,
            a: self.a,
        }
    }
}

fn run(cli: Cli) -> Result<i32, String> {
    let (args, cmd): (&Args, fn(&config::Job) -> Result<Output, String>) = match &cli.command {
        Command::Analyze(a) => (a, commands::analyze),
        Command::Levelset(a) => (a, commands::levelset),
        Command::Decompose(a) => (a, commands::decompose),
        Command::Gram(a) => (a, commands::gram),
    };
    let job = config::load(&args.config, &args.overrides())?;
    let out = cmd(&job)?;
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir).map_err(|e| format!("cannot create {}: {e}", dir.display()))?;
            let path = dir.join(out.file_name);
            std::fs::write(&path, &out.body).map_err(|e| format!("cannot write {}: {e}", path.display()))?;
            for line in &out.summary {
                println!("{line}");
            }
            println!("wrote {}", path.display());
        }
        None => print!("{}", out.body),
    }
    Ok(out.exit_code)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_ERROR } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
