use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;
use torsion_forge::assembly::AssemblyMethod;
use torsion_forge::blocks::Method;
use torsion_forge_cli::commands::{self, BlockKind, Outcome, Suite};
use torsion_forge_cli::{canonical, text, CliError};

#[derive(Parser)]
#[command(name = "torsion-forge", version, about = "Twisted Reidemeister torsion of D-block decompositions")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Tolerance for every cross-check.
    #[arg(long, global = true, env = "TORSION_FORGE_TOL", default_value_t = 1e-9)]
    tol: f64,
    /// Seed for all randomness.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Samples per check in `verify`.
    #[arg(long, global = true, default_value_t = 100)]
    samples: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Gram matrix, determinant, cofactors and angle/length conversion of a shape.
    Gram { file: PathBuf },
    /// Torsion of a single pair of pants or D-block.
    Block {
        #[arg(long, value_enum, default_value_t = KindArg::Dblock)]
        kind: KindArg,
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
        file: PathBuf,
    },
    /// Torsion of a glued manifold, optionally with respect to other curves.
    Assemble {
        #[arg(long, value_enum, default_value_t = MethodArg::Both)]
        method: MethodArg,
        /// Curves `p m + q l` per torus, as "p,q;p,q;...".
        #[arg(long)]
        curves: Option<String>,
        /// Solve the filling equations for the curves first.
        #[arg(long)]
        fill: bool,
        file: PathBuf,
    },
    /// Seeded verification sweeps.
    Verify {
        #[arg(long, value_enum, default_value_t = SuiteArg::All)]
        suite: SuiteArg,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Pants,
    Dblock,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Closed,
    Direct,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Identities,
    Torsion,
    All,
}

fn run(cli: &Cli) -> Result<(&'static str, Option<String>, Outcome), CliError> {
    if !(cli.tol > 0.0 && cli.tol.is_finite()) {
        return Err(CliError::Input(format!("tolerance {} is not a positive number", cli.tol)));
    }
    let path = |p: &PathBuf| Some(p.display().to_string());
    Ok(match &cli.command {
        Command::Gram { file } => ("gram", path(file), commands::gram(file)?),
        Command::Block { kind, method, file } => {
            let kind = match kind {
                KindArg::Pants => BlockKind::Pants,
                KindArg::Dblock => BlockKind::Dblock,
            };
            let method = match method {
                MethodArg::Closed => Method::Closed,
                MethodArg::Direct => Method::Direct,
                MethodArg::Both => Method::Both,
            };
            ("block", path(file), commands::block(file, kind, method, cli.tol)?)
        }
        Command::Assemble {
            method,
            curves,
            fill,
            file,
        } => {
            let method = match method {
                MethodArg::Closed => AssemblyMethod::Closed,
                MethodArg::Direct => AssemblyMethod::Mv,
                MethodArg::Both => AssemblyMethod::Both,
            };
            let out = commands::assemble(file, method, curves.as_deref(), *fill, cli.tol)?;
            ("assemble", path(file), out)
        }
        Command::Verify { suite } => {
            let suite = match suite {
                SuiteArg::Identities => Suite::Identities,
                SuiteArg::Torsion => Suite::Torsion,
                SuiteArg::All => Suite::All,
            };
            ("verify", None, commands::verify(suite, cli.samples, cli.seed, cli.tol))
        }
    })
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok((command, input, out)) => {
            let ok = out.failures.is_empty();
            let report = json!({
                "command": command,
                "input": input,
                "seed": cli.seed,
                "tolerance": cli.tol,
                "status": if ok { "ok" } else { "verification failed" },
                "failures": out.failures,
                "result": out.result,
            });
            match cli.format {
                Format::Json => print!("{}", canonical::to_string(&report)),
                Format::Text => print!("{}", text::to_string(&report)),
            }
            if ok {
                ExitCode::SUCCESS
            } else {
                for f in &out.failures {
                    eprintln!("verification failure: {f}");
                }
                ExitCode::from(3)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            if let Format::Json = cli.format {
                let report = json!({
                    "seed": cli.seed,
                    "status": "error",
                    "exit_code": e.exit_code(),
                    "error": e.to_string(),
                });
                print!("{}", canonical::to_string(&report));
            }
            ExitCode::from(e.exit_code())
        }
    }
}
