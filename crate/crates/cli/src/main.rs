use std::io::{self, Write};
use std::process::ExitCode;

fn main() -> ExitCode {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    let report = heun_cli::run(std::env::args_os(), &mut out);
    let _ = out.flush();
    if report.code != heun_cli::EXIT_OK {
        eprintln!("{}", report.summary.trim_end());
    }
    ExitCode::from(report.code as u8)
}
