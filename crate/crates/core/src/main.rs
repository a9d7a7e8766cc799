use std::process::ExitCode;

use clap::Parser;
use contextuality_optics::cli::{error_json, run, RunConfig};
use contextuality_optics::Error;

fn main() -> ExitCode {
    let config = RunConfig::parse();
    let outcome = run(&config).and_then(|outcome| {
        match &config.output.out {
            Some(path) => std::fs::write(path, &outcome.report).map_err(|source| Error::Io {
                path: path.display().to_string(),
                source,
            })?,
            None => print!("{}", outcome.report),
        }
        Ok(outcome)
    });
    match outcome {
        Ok(o) if o.passed => ExitCode::SUCCESS,
        Ok(_) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{}", error_json(&e));
            ExitCode::from(2)
        }
    }
}
