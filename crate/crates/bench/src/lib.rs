//! Experiment harness for the `tubal` crate: slice-sampled products,
//! t-CX/t-CUR decompositions and robust recovery, with CSV or JSON metrics.

pub mod cli;
pub mod commands;
pub mod error;
pub mod io;
pub mod metrics;

pub use cli::{Cli, Command, Common};
pub use error::{BenchError, Result};
pub use metrics::{Format, Table, Value};

/// Runs one parsed command, inside a dedicated thread pool when `--threads` is set.
pub fn execute(cli: &Cli) -> Result<Table> {
    let run = || match &cli.command {
        Command::BenchMultiply(a) => commands::bench_multiply(&cli.common, a),
        Command::Decompose(a) => commands::decompose(&cli.common, a),
        Command::Rpca(a) => commands::rpca(&cli.common, a),
        Command::Complete(a) => commands::complete(&cli.common, a),
        Command::Gen(a) => commands::gen(&cli.common, a),
        Command::ConvertPgm(a) => commands::convert_pgm(&cli.common, a),
    };
    match cli.common.threads {
        None => run(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n as usize)
            .build()
            .map_err(|e| BenchError::Usage(format!("cannot start {n} threads: {e}")))?
            .install(run),
    }
}

/// Writes the rendered table to `--out`, or stdout.
pub fn emit(cli: &Cli, table: &Table) -> Result<()> {
    let text = table.render(cli.common.format);
    match &cli.common.out {
        Some(path) => std::fs::write(path, text).map_err(|e| BenchError::io(path, e)),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(text.as_bytes()).map_err(|e| BenchError::io("<stdout>", e))
        }
    }
}
