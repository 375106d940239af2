//! `qre`: divergences, bound reports, sweeps and conjecture searches.
//!
//! Exit codes: 0 success, 1 a check failed (bound violation, route
//! disagreement, round-trip error, sanity floor), 2 parse error, 3 invalid
//! input, 4 I/O error, 5 numerical failure.

mod args;
mod error;
mod run;

use clap::Parser;

use args::{Cli, RunConfig};

fn main() {
    let cli = Cli::parse();
    let code = match RunConfig::resolve(cli).and_then(|config| {
        let mut pool = rayon::ThreadPoolBuilder::new();
        if let Some(j) = config.jobs {
            pool = pool.num_threads(j);
        }
        let pool = pool
            .build()
            .map_err(|e| error::CliError::Validation(e.to_string()))?;
        pool.install(|| run::run(&config))
    }) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("qre: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
