use std::fs;
use std::process::ExitCode;

use clap::Parser;
use netfeed_cli::{parse_config, Cli};
use netfeed_core::experiment::run_experiment_with_progress;
use netfeed_core::verify::{run_verification, SUITE_SIZE};
use netfeed_core::{Error, Result};

fn run(cli: &Cli) -> Result<bool> {
    let spec = parse_config(cli)?;
    if cli.verify {
        let report = run_verification(spec.seed, SUITE_SIZE)?;
        println!("{report}");
        fs::create_dir_all(&spec.out).map_err(|source| Error::Io {
            path: spec.out.clone(),
            source,
        })?;
        let path = spec.out.join("verify.csv");
        fs::write(&path, report.to_csv()).map_err(|source| Error::Io { path, source })?;
        return Ok(report.passed());
    }
    println!("q,p_net,p_feed,coop_mean,base_mean");
    run_experiment_with_progress(&spec, |cell| {
        let show = |s: Option<netfeed_core::experiment::Stats>| s.map_or("-".to_string(), |s| format!("{:.3}", s.mean));
        println!(
            "{},{},{},{},{}",
            cell.q,
            cell.p_net,
            cell.p_feed,
            show(cell.coop),
            show(cell.base)
        );
    })?;
    println!("wrote {}", spec.out.join("summary.csv").display());
    Ok(true)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
