use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use lhv_cli::app::{destination, execute, write_output, Cli, OUTPUT_DIR_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let env_dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from);
    let result = execute(&cli).and_then(
        |out| match destination(cli.output.as_deref(), env_dir.as_deref(), &out) {
            Some(path) => write_output(&path, &out.text),
            None => {
                // a closed stdout pipe is not worth a failure exit
                let _ = std::io::stdout().lock().write_all(out.text.as_bytes());
                Ok(())
            }
        },
    );
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
