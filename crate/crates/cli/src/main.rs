//! `nemesis`: solve, generate, reduce, verify, simulate, play and serve.
//!
//! Exit codes: 0 fugitive wins (or success), 1 adversary wins, 2 unknown or
//! aborted, 3 usage or input error.

mod play;
mod solve;
mod transform;

use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use nemesis_core::exact::Outcome;
use nemesis_core::graph::load_instance;
use nemesis_core::{instances, Instance, Role};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Parser)]
#[command(name = "nemesis", version, about = "Solver and tools for the Nemesis escape game")]
#[command(after_help = "Exit codes: 0 fugitive wins / success, 1 adversary wins, 2 unknown / aborted, 3 error.")]
struct Cli {
    #[command(flatten)]
    common: Common,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Debug)]
pub struct Common {
    /// Emit JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Node budget for exact searches.
    #[arg(long, global = true)]
    pub budget: Option<u64>,
    /// Seed for randomized scripts.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Round cap for matches and best-response searches.
    #[arg(long, global = true)]
    pub cap: Option<u64>,
    /// Include certificates (escape trees, winning sets) in verdicts.
    #[arg(long, global = true)]
    pub certificate: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Decide the winner of an instance.
    Solve {
        /// Instance file, or one of the names i1..i5.
        instance: String,
        #[arg(long, value_enum, default_value_t = Method::Auto)]
        method: Method,
    },
    /// Write a generated instance.
    Generate {
        #[command(subcommand)]
        kind: transform::Generate,
        #[arg(short, long, global = true)]
        output: Option<PathBuf>,
    },
    /// Apply a reduction to an instance.
    Reduce {
        #[arg(value_enum)]
        reduction: transform::Reduction,
        instance: String,
        /// Copies per vertex for the simple-graph translation.
        #[arg(long)]
        copies: Option<u32>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compare the fast solver with the exact solver.
    Verify {
        instance: String,
        /// Run even when the instance exceeds the oracle size limit.
        #[arg(long)]
        force: bool,
    },
    /// Play two scripts against each other.
    Simulate {
        instance: String,
        #[arg(long)]
        fugitive: String,
        #[arg(long)]
        adversary: String,
    },
    /// Play against the engine in the terminal.
    Play {
        instance: String,
        #[arg(long = "as", value_enum, default_value_t = Side::Fugitive)]
        side: Side,
    },
    /// Run the HTTP game service.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        /// Append finished games to this JSON-lines file.
        #[arg(long)]
        transcripts: Option<PathBuf>,
        /// Allowed CORS origin; any origin when omitted.
        #[arg(long)]
        cors_origin: Option<String>,
    },
    /// Exploratory runs that are not part of the test suite.
    Experiment {
        #[command(subcommand)]
        kind: solve::Experiment,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Auto,
    Exact,
    Tree,
    Deg3,
    Blizzard,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Side {
    Fugitive,
    Adversary,
}

impl From<Side> for Role {
    fn from(s: Side) -> Role {
        match s {
            Side::Fugitive => Role::Fugitive,
            Side::Adversary => Role::Adversary,
        }
    }
}

/// Exit status carried out of a command.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Code {
    Done,
    Fugitive,
    Adversary,
    Unknown,
}

impl From<Outcome> for Code {
    fn from(o: Outcome) -> Code {
        match o {
            Outcome::Fugitive => Code::Fugitive,
            Outcome::Adversary => Code::Adversary,
            Outcome::Unknown => Code::Unknown,
        }
    }
}

/// Reads an instance file, or a built-in instance by name.
pub fn load(arg: &str) -> Result<Instance> {
    let path = std::path::Path::new(arg);
    if path.exists() {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {arg}"))?;
        let (inst, notes) = load_instance(&text).with_context(|| format!("parsing {arg}"))?;
        for n in notes {
            eprintln!("note: {n}");
        }
        return Ok(inst);
    }
    instances::named(arg).ok_or_else(|| anyhow!("no such file or built-in instance: {arg}"))
}

pub fn print_json(value: &serde_json::Value) {
    println!("{}", serde_json::to_string_pretty(value).expect("json value serializes"));
}

fn run(cli: Cli) -> Result<Code> {
    let c = &cli.common;
    match cli.command {
        Command::Solve { instance, method } => solve::run(c, &load(&instance)?, method),
        Command::Generate { kind, output } => transform::generate(c, kind, output.as_deref()),
        Command::Reduce { reduction, instance, copies, output } => {
            transform::reduce(c, reduction, &load(&instance)?, copies, output.as_deref())
        }
        Command::Verify { instance, force } => solve::verify(c, &load(&instance)?, force),
        Command::Simulate { instance, fugitive, adversary } => play::simulate(c, &load(&instance)?, &fugitive, &adversary),
        Command::Play { instance, side } => {
            let stdin = std::io::stdin();
            let inst = load(&instance)?;
            if c.json {
                play::play(c, &inst, side.into(), stdin.lock(), std::io::stderr())
            } else {
                play::play(c, &inst, side.into(), stdin.lock(), std::io::stdout())
            }
        }
        Command::Serve { port, host, transcripts, cors_origin } => {
            let addr = format!("{host}:{port}").parse().with_context(|| format!("bad address {host}:{port}"))?;
            let cfg = nemesis_service::Config {
                default_budget: c.budget.unwrap_or(nemesis_service::DEFAULT_BUDGET),
                transcripts,
                cors_origin,
            };
            tracing_subscriber::fmt().with_writer(std::io::stderr).init();
            let rt = tokio::runtime::Runtime::new()?;
            rt.block_on(nemesis_service::serve(addr, cfg))?;
            Ok(Code::Done)
        }
        Command::Experiment { kind } => solve::experiment(c, kind),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    match run(cli) {
        Ok(Code::Done | Code::Fugitive) => ExitCode::from(0),
        Ok(Code::Adversary) => ExitCode::from(1),
        Ok(Code::Unknown) => ExitCode::from(2),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(3)
        }
    }
}
