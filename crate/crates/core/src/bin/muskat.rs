use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use muskat_bubble::io::config::load_config;
use muskat_bubble::io::{resume_command, run_command, verify_command, Fault, Level, OUTPUT_ROOT_ENV};

#[derive(Parser)]
#[command(name = "muskat", version, about = "Gravity-capillarity Muskat bubble solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the configured initial data and write the outputs.
    Run { config: PathBuf },
    /// Run the invariant suites and print a pass/fail table.
    Verify {
        #[arg(long, default_value = "quick", value_parser = ["quick", "full"])]
        level: String,
        /// Inject a known defect to check that the suite catches it.
        #[arg(long, hide = true)]
        inject_fault: Option<String>,
    },
    /// Continue from the last record of a spectrum file.
    Resume { snapshot: PathBuf, config: PathBuf },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run { config } => load_config(&config).and_then(|cfg| run_command(&cfg)).map(|s| {
            println!(
                "{} steps to t = {}; outputs in {}",
                s.steps,
                s.final_state.t,
                s.dir.display()
            );
        }),
        Command::Resume { snapshot, config } => load_config(&config)
            .and_then(|cfg| resume_command(&snapshot, &cfg))
            .map(|s| {
                println!(
                    "{} steps to t = {}; outputs in {}",
                    s.steps,
                    s.final_state.t,
                    s.dir.display()
                );
            }),
        Command::Verify { level, inject_fault } => {
            let level: Level = level.parse().expect("validated by clap");
            let fault = match inject_fault.map(|f| f.parse::<Fault>()).transpose() {
                Ok(f) => f,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(2);
                }
            };
            let results = verify_command(level, fault);
            for r in &results {
                let mark = if r.passed { "PASS" } else { "FAIL" };
                println!("{mark}  {:<26} {:>7.2}s  {}", r.name, r.seconds, r.detail);
            }
            if results.iter().all(|r| r.passed) {
                Ok(())
            } else {
                return ExitCode::FAILURE;
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            if let Some(root) = std::env::var_os(OUTPUT_ROOT_ENV) {
                eprintln!("(outputs relative to {})", PathBuf::from(root).display());
            }
            ExitCode::FAILURE
        }
    }
}
