use std::process::ExitCode;

use clap::Parser;
use suprl::cli::{run, Cli};
use suprl::Error;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let mut stdout = std::io::stdout().lock();
    let mut stderr = std::io::stderr();
    match run(&cli, &mut stdout, &mut stderr) {
        Ok(code) => ExitCode::from(code as u8),
        // downstream closed the pipe (e.g. `| head`)
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
