use std::process::ExitCode;

fn main() -> ExitCode {
    let code = maxmin_core::cli::run_cli(std::env::args().skip(1));
    ExitCode::from(code as u8)
}
