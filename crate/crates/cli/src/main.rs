use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use gch_cli::{check_run, output_root, run_experiment, CliError, Command};

#[derive(Parser)]
#[command(name = "gch", version, about = "Conservative solutions of the generalized Camassa-Holm equation")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Integrate and write every enabled artifact
    Simulate(RunArgs),
    /// Integrate and trace the configured characteristics
    Trace(RunArgs),
    /// Integrate and compare with the Eulerian reference solver
    Oracle(RunArgs),
    /// Re-verify invariants from the stored snapshots of a run
    Check {
        run_dir: PathBuf,
        /// Largest relative energy drift accepted
        #[arg(long, default_value_t = 1e-4)]
        max_drift: f64,
    },
}

#[derive(clap::Args)]
struct RunArgs {
    config: PathBuf,
    /// Output root (overrides GCH_OUTPUT_ROOT)
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(cli: Cli) -> Result<(), CliError> {
    let (args, command) = match cli.command {
        Cmd::Simulate(a) => (a, Command::Simulate),
        Cmd::Trace(a) => (a, Command::Trace),
        Cmd::Oracle(a) => (a, Command::Oracle),
        Cmd::Check { run_dir, max_drift } => {
            let report = check_run(&run_dir, max_drift)?;
            for s in &report.snapshots {
                println!(
                    "t={:<10.4} E={:.12e} drift={:.3e} res_u={:.3e} res_y={:.3e} min_q={:.4e}",
                    s.t, s.energy, s.drift, s.residual_u_xi, s.residual_y_xi, s.min_q
                );
            }
            if report.passed() {
                println!("ok: {} snapshots, max drift {:.3e}", report.snapshots.len(), report.max_drift);
                return Ok(());
            }
            return Err(CliError::Check(report.failures.join("; ")));
        }
    };
    let root = args.out.unwrap_or_else(output_root);
    let out = run_experiment(&args.config, command, &root)?;
    let s = &out.manifest.summary;
    println!("{}", out.dir.display());
    println!(
        "E0={:.12e} max drift={:.3e} min q={:.4e} min cos^2(v/2)={:.3e} outputs={}",
        out.manifest.e0,
        s.max_energy_drift_rel,
        s.min_q,
        s.min_cos2,
        out.manifest.outputs.len()
    );
    for w in &out.manifest.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
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
