use std::process::ExitCode;

use clap::{Parser, Subcommand};

use muxlock_cli::{
    cmd_analyze, cmd_attack, cmd_export, cmd_lock, cmd_verify, emit, AnalyzeArgs, AttackArgs, CliResult, ExportArgs,
    Failure, LockArgs, VerifyArgs,
};

/// MUX-based logic locking of gate-level netlists.
#[derive(Parser)]
#[command(name = "muxlock", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Timing, toggle-rate and site statistics of a design.
    Analyze(AnalyzeArgs),
    /// Lock a design; writes <prefix>.bench, <prefix>.key and <prefix>.report.json.
    Lock(LockArgs),
    /// Check a locked design against the original under a key.
    Verify(VerifyArgs),
    /// Oracle-less attack on a locked design, scored against the key.
    Attack(AttackArgs),
    /// Rewrite a netlist using BENCH primitives only.
    Export(ExportArgs),
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Analyze(a) => emit(&cmd_analyze(&a)?, a.output.as_deref()),
        Command::Lock(a) => cmd_lock(&a).map(|_| ()),
        Command::Verify(a) => {
            let r = cmd_verify(&a)?;
            emit(&r, a.output.as_deref())?;
            match r.verification.and_then(|v| v.verdict.mismatch) {
                Some(m) => Err(Failure::NotEquivalent(format!("output {} in cycle {}", m.output, m.cycle))),
                None => Ok(()),
            }
        }
        Command::Attack(a) => emit(&cmd_attack(&a)?, a.output.as_deref()),
        Command::Export(a) => emit(&cmd_export(&a)?, None),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
