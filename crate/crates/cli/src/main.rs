//! `wfusion` command-line front end.
//!
//! Exit codes: 0 success, 1 verification failure or runtime error, 2 usage
//! error (including a target the policy cannot reach), 3 resource bound.

mod report;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use num_complex::Complex64;

use wfusion::fusion::{self, FusionError, DENSE_BOUND};
use wfusion::planner::{self, PlanConfig, PlanError, Policy};
use wfusion::pswap::{self, GateAccounting, PswapError};
use wfusion::{Amplitude, Circuit, CircuitError, Scalar};

use report::{Format, Show};

#[derive(Parser, Debug)]
#[command(name = "wfusion", version, about = "W-state fusion with partial-swap gates")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Pretty)]
    output: Format,

    /// Write the report to this file instead of stdout. Relative paths are
    /// resolved against $WFUSION_OUTPUT_DIR when it is set.
    #[arg(long, global = true, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Backend {
    Exact,
    Float,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Accounting {
    Ideal,
    Physical,
}

impl From<Accounting> for GateAccounting {
    fn from(a: Accounting) -> Self {
        match a {
            Accounting::Ideal => GateAccounting::Ideal,
            Accounting::Physical => GateAccounting::Physical,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum PolicyArg {
    GreedyLargest,
    GreedyDiscardSingles,
    OneShot,
}

impl From<PolicyArg> for Policy {
    fn from(p: PolicyArg) -> Self {
        match p {
            PolicyArg::GreedyLargest => Policy::GreedyLargest,
            PolicyArg::GreedyDiscardSingles => Policy::GreedyDiscardSingles,
            PolicyArg::OneShot => Policy::OneShot,
        }
    }
}

#[derive(clap::Args, Debug)]
struct GateArgs {
    /// Circuit description (JSON). Defaults to the built-in reference circuit.
    #[arg(long, value_name = "PATH")]
    circuit: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Backend::Exact)]
    backend: Backend,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the optical circuit against the abstract partial-swap map.
    GateVerify(GateArgs),
    /// Coincidence probabilities of every basis input.
    #[command(name = "gate-table3")]
    GateTable3(GateArgs),
    /// Outcome distribution of fusing two or three W states.
    Fuse {
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
        sizes: Vec<u64>,
        /// Simulate the full photonic state instead of using closed forms.
        #[arg(long)]
        dense: bool,
        /// Photon limit for dense simulation.
        #[arg(long, default_value_t = DENSE_BOUND)]
        bound: usize,
        #[arg(long, value_enum, default_value_t = Accounting::Ideal)]
        accounting: Accounting,
    },
    /// Fuse a chain of W states with one gate per neighbouring pair.
    Chain {
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
        sizes: Vec<u64>,
        /// Closed-form distribution only, no state simulation.
        #[arg(long)]
        analytic: bool,
        #[arg(long, default_value_t = DENSE_BOUND)]
        bound: usize,
        #[arg(long, value_enum, default_value_t = Accounting::Ideal)]
        accounting: Accounting,
    },
    /// Expected cost of growing a target W state from primitives.
    Plan {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        target: u64,
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        primitive: u64,
        #[arg(long, value_enum, default_value_t = PolicyArg::GreedyLargest)]
        policy: PolicyArg,
        #[arg(long, value_enum, default_value_t = Accounting::Ideal)]
        accounting: Accounting,
        /// Monte Carlo trials to run alongside the exact solution.
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        trials: Option<u64>,
        #[arg(long, default_value_t = 1, requires = "trials")]
        seed: u64,
    },
    /// Tabulated success, recycle and fail probabilities of each protocol.
    Compare {
        #[arg(long, value_delimiter = ',', required = true, value_parser = clap::value_parser!(u64).range(1..))]
        sizes: Vec<u64>,
    },
}

/// Failure with its exit code.
#[derive(Debug)]
enum Failure {
    Verification(String),
    Runtime(String),
    Usage(String),
    Bound(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Verification(_) | Failure::Runtime(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Bound(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Verification(m) | Failure::Runtime(m) | Failure::Usage(m) | Failure::Bound(m) => m,
        }
    }
}

impl From<FusionError> for Failure {
    fn from(e: FusionError) -> Self {
        match e {
            FusionError::ResourceBound { .. } => {
                Failure::Bound(format!("{e}; rerun without --dense (fuse) or with --analytic (chain)"))
            }
            FusionError::ZeroSize | FusionError::Arity { .. } => Failure::Usage(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<PlanError> for Failure {
    fn from(e: PlanError) -> Self {
        match e {
            PlanError::StateLimit { .. } | PlanError::StepLimit { .. } => Failure::Bound(e.to_string()),
            _ => Failure::Usage(e.to_string()),
        }
    }
}

impl From<PswapError> for Failure {
    fn from(e: PswapError) -> Self {
        match e {
            PswapError::Circuit(CircuitError::InexactAngle { .. }) => Failure::Usage(e.to_string()),
            PswapError::Circuit(_) | PswapError::NotTwoQubit(_) | PswapError::TooFewInputs => {
                Failure::Usage(format!("circuit unusable as a two-qubit gate: {e}"))
            }
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

fn load_circuit(path: &Option<PathBuf>) -> Result<Circuit, Failure> {
    match path {
        None => Ok(pswap::build_pswap_circuit()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", p.display())))?;
            Circuit::from_json(&text).map_err(|e| Failure::Usage(format!("invalid circuit {}: {e}", p.display())))
        }
    }
}

fn sizes(v: &[u64]) -> Vec<usize> {
    v.iter().map(|&n| n as usize).collect()
}

fn run(cli: &Cli) -> Result<(String, Option<Failure>), Failure> {
    let format = cli.output;
    match &cli.command {
        Command::GateVerify(g) | Command::GateTable3(g) => {
            let circuit = load_circuit(&g.circuit)?;
            let table_only = matches!(cli.command, Command::GateTable3(_));
            match g.backend {
                Backend::Exact => gate::<Amplitude>(&circuit, "exact", table_only, format),
                Backend::Float => gate::<Complex64>(&circuit, "float", table_only, format),
            }
        }
        Command::Fuse {
            sizes: s,
            dense,
            bound,
            accounting,
        } => {
            let s = sizes(s);
            if !(2..=3).contains(&s.len()) {
                return Err(Failure::Usage(format!(
                    "fuse takes 2 or 3 sizes, got {}; use `chain` for longer chains",
                    s.len()
                )));
            }
            let r = if *dense {
                report::FuseReport::dense(&fusion::fuse_dense(&s, (*accounting).into(), *bound)?)
            } else {
                let d = if s.len() == 2 {
                    fusion::fuse2_analytic(s[0], s[1])?
                } else {
                    fusion::fuse3_analytic(s[0], s[1], s[2])?
                };
                report::FuseReport::analytic(&d)
            };
            Ok((r.render(format), None))
        }
        Command::Chain {
            sizes: s,
            analytic,
            bound,
            accounting,
        } => {
            let s = sizes(s);
            if s.len() < 2 {
                return Err(Failure::Usage("chain takes at least 2 sizes".to_string()));
            }
            let r = if *analytic {
                report::FuseReport::analytic(&fusion::fuse_chain_analytic(&s)?)
            } else {
                report::FuseReport::dense(&fusion::fuse_dense(&s, (*accounting).into(), *bound)?)
            };
            Ok((r.render(format), None))
        }
        Command::Plan {
            target,
            primitive,
            policy,
            accounting,
            trials,
            seed,
        } => {
            let cfg = PlanConfig::new(*target as usize, *primitive as usize)
                .with_policy((*policy).into())
                .with_accounting((*accounting).into());
            let r = planner::plan(&cfg, trials.map(|t| (t, *seed)))?;
            Ok((report::render_plan(&r, format), None))
        }
        Command::Compare { sizes: s } => {
            let rows = planner::compare_protocols(&sizes(s))?;
            Ok((report::render_compare(&rows, format), None))
        }
    }
}

fn gate<S: Scalar + Show>(
    circuit: &Circuit,
    backend: &str,
    table_only: bool,
    format: Format,
) -> Result<(String, Option<Failure>), Failure> {
    let v = pswap::verify_gate::<S>(circuit)?;
    let r = report::GateReport::new(&v, backend, &circuit.name);
    let text = if table_only { r.render_table(format) } else { r.render(format) };
    let failure = v
        .mismatches
        .first()
        .map(|m| Failure::Verification(format!("verification failed: {m}")));
    Ok((text, failure))
}

fn emit(text: &str, out: &Option<PathBuf>) -> Result<(), Failure> {
    let Some(path) = out else {
        print!("{text}");
        if !text.ends_with('\n') {
            println!();
        }
        return Ok(());
    };
    let path = match std::env::var_os("WFUSION_OUTPUT_DIR") {
        Some(dir) if path.is_relative() => PathBuf::from(dir).join(path),
        _ => path.clone(),
    };
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        fs::create_dir_all(parent)
            .map_err(|e| Failure::Runtime(format!("cannot create {}: {e}", parent.display())))?;
    }
    fs::write(&path, text).map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display())))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = run(&cli).and_then(|(text, failure)| {
        emit(&text, &cli.out)?;
        failure.map_or(Ok(()), Err)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
