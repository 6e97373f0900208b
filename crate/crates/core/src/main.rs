use std::io;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use fracbous::app::{self, FieldChoice, Outcome};
use fracbous::config::RunConfig;

/// Fractionally dissipated Boussinesq flow on the torus, with a priori bound
/// monitors and verification suites.
#[derive(Parser)]
#[command(name = "fracbous", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate from initial data, writing diagnostics and checkpoints.
    Run {
        /// Config file of `key = value` lines.
        config: Option<PathBuf>,
        /// Override a config key, e.g. `--set t_end=0.5`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Continue from a checkpoint; `max_steps` counts additional steps.
    Resume {
        checkpoint: PathBuf,
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Compare the singular-integral velocity with its multiplier form.
    KernelVerify {
        #[arg(long, default_value_t = 0.5)]
        beta: f64,
        #[arg(long, default_value_t = 256)]
        n: usize,
    },
    /// Check the pointwise inequalities and trajectory margins.
    InequalitySuite {
        config: Option<PathBuf>,
        #[arg(long = "set", value_name = "KEY=VALUE")]
        sets: Vec<String>,
    },
    /// Per-band Besov table of a checkpointed field.
    Besov {
        checkpoint: PathBuf,
        #[arg(long)]
        s: f64,
        #[arg(long)]
        p: f64,
        /// Summability index; `inf` for the supremum.
        #[arg(long, default_value_t = f64::INFINITY)]
        r: f64,
        #[arg(long, default_value = "theta")]
        field: FieldChoice,
    },
}

fn dispatch(cmd: Cmd) -> fracbous::Result<Outcome> {
    let mut out = io::stdout().lock();
    match cmd {
        Cmd::Run { config, sets } => {
            let cfg = RunConfig::from_entries(&app::load_entries(config.as_deref(), &sets)?)?;
            app::cmd_run(&cfg, &mut out)
        }
        Cmd::Resume {
            checkpoint,
            config,
            sets,
        } => {
            let entries = app::load_entries(config.as_deref(), &sets)?;
            app::cmd_resume(&checkpoint, &entries, &mut out)
        }
        Cmd::KernelVerify { beta, n } => app::cmd_kernel_verify(beta, n, &mut out),
        Cmd::InequalitySuite { config, sets } => {
            let cfg = RunConfig::from_entries(&app::load_entries(config.as_deref(), &sets)?)?;
            app::cmd_inequality_suite(&cfg, &mut out)
        }
        Cmd::Besov {
            checkpoint,
            s,
            p,
            r,
            field,
        } => app::cmd_besov(&checkpoint, field, s, p, r, &mut out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = dispatch(cli.cmd);
    match &result {
        Err(e) => eprintln!("error: {e}"),
        Ok(Outcome::SuiteFailed { failures }) => eprintln!("{failures} check(s) failed"),
        Ok(_) => {}
    }
    ExitCode::from(app::exit_code(&result) as u8)
}
