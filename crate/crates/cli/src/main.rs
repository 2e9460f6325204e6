//! `qes`: build, verify and tabulate QES models from the command line.
//!
//! Exit codes: 0 pass, 1 verification failure, 2 usage or validation error.

mod commands;
mod config;
mod error;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::{FamilyName, ModelConfig, Sweep};
use crate::error::CliError;

#[derive(Parser, Debug)]
#[command(name = "qes", version, about = "Build and verify supersymmetric QES potentials", long_about = None)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Build a model, print ε, x₀ and the two known levels, optionally emit a table.
    Build(CommonArgs),
    /// Run the finite-difference verifier and print a JSON report.
    Verify(CommonArgs),
    /// Tabulate the lowest levels of V₋ next to the analytic ones.
    Spectrum {
        #[command(flatten)]
        common: CommonArgs,
        /// Highest level index to compute (at most 8).
        #[arg(long, default_value_t = 4)]
        n_max: usize,
    },
    /// Compare Method A and Method B on a φ-based model.
    Crosscheck(CommonArgs),
}

#[derive(Args, Debug, Clone, Default)]
struct CommonArgs {
    #[arg(long, value_enum)]
    family: Option<FamilyName>,
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    epsilon: Option<f64>,
    /// Amplitude of the sinh-wplus family.
    #[arg(long = "A", value_name = "A", allow_negative_numbers = true)]
    amplitude: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x0: Option<f64>,
    /// Expression in x for the custom family: W₊, or φ when --epsilon is given.
    #[arg(long)]
    expr: Option<String>,
    /// Length scale of the custom expression (default 1).
    #[arg(long, allow_negative_numbers = true)]
    scale: Option<f64>,
    #[arg(long, value_name = "N")]
    grid_n: Option<usize>,
    #[arg(long, value_name = "L", allow_negative_numbers = true)]
    grid_l: Option<f64>,
    /// Energy tolerance.
    #[arg(long, value_name = "T", allow_negative_numbers = true)]
    tol_e: Option<f64>,
    /// Write the (x, V₋, V₊, W, W₁, ψ₀, ψ₁) table here (build only).
    #[arg(long, value_name = "PATH")]
    emit: Option<PathBuf>,
    /// Write the report here instead of stdout.
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// JSON config file; flags override its values.
    #[arg(long, value_name = "PATH")]
    config: Option<PathBuf>,
    #[arg(long, value_name = "KEY=START:STOP:STEPS")]
    sweep: Option<Sweep>,
}

impl CommonArgs {
    /// Config file (if any) overlaid with flags, then validated.
    fn effective_config(&self) -> Result<ModelConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => ModelConfig::from_file(path)?,
            None => ModelConfig::default(),
        };
        if let Some(f) = self.family {
            cfg.family = Some(f);
        }
        let flags = [
            ("a", self.a),
            ("b", self.b),
            ("epsilon", self.epsilon),
            ("A", self.amplitude),
            ("alpha", self.alpha),
            ("x0", self.x0),
            ("scale", self.scale),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.params.insert(key.to_string(), v);
            }
        }
        if let Some(e) = &self.expr {
            cfg.expr = Some(e.clone());
        }
        if self.grid_n.is_some() || self.grid_l.is_some() {
            let mut g = cfg.grid.unwrap_or_default();
            g.points = self.grid_n.or(g.points);
            g.half_width = self.grid_l.or(g.half_width);
            cfg.grid = Some(g);
        }
        if let Some(t) = self.tol_e {
            let mut tol = cfg.tolerances.unwrap_or_default();
            tol.energy = t;
            cfg.tolerances = Some(tol);
        }
        if let Some(path) = &self.emit {
            let mut out = cfg.output.take().unwrap_or_default();
            out.path = Some(path.clone());
            cfg.output = Some(out);
        }
        if let Some(s) = &self.sweep {
            // the swept key must be legal for the family; check with the start value
            let mut probe = cfg.clone();
            probe.params.insert(s.key.clone(), s.start);
            probe.validated()?;
        }
        cfg.validated()
    }
}

fn no_emit(args: &CommonArgs) -> Result<(), CliError> {
    match args.emit {
        Some(_) => Err(CliError::Usage("--emit is only valid with build".into())),
        None => Ok(()),
    }
}

fn run(cli: Cli) -> Result<bool, CliError> {
    match cli.command {
        Command::Build(args) => {
            let cfg = args.effective_config()?;
            match &args.sweep {
                Some(s) => {
                    if cfg.output.as_ref().and_then(|o| o.path.as_ref()).is_some() {
                        return Err(CliError::Usage("table output cannot be combined with --sweep".into()));
                    }
                    commands::build_sweep(&cfg, s)
                }
                None => commands::build(&cfg),
            }
        }
        Command::Verify(args) => {
            no_emit(&args)?;
            let cfg = args.effective_config()?;
            match &args.sweep {
                Some(s) => commands::verify_sweep(&cfg, s, args.out.as_deref()),
                None => commands::verify(&cfg, args.out.as_deref()),
            }
        }
        Command::Spectrum { common, n_max } => {
            no_emit(&common)?;
            if common.sweep.is_some() {
                return Err(CliError::Usage("--sweep is not supported by spectrum".into()));
            }
            let cfg = common.effective_config()?;
            commands::spectrum(&cfg, n_max, common.out.as_deref())
        }
        Command::Crosscheck(args) => {
            no_emit(&args)?;
            let cfg = args.effective_config()?;
            match &args.sweep {
                Some(s) => commands::crosscheck_sweep(&cfg, s, args.out.as_deref()),
                None => commands::crosscheck(&cfg, args.out.as_deref()),
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

