use std::process::ExitCode;

fn main() -> ExitCode {
    ExitCode::from(flowmp::cli::run(std::env::args_os()) as u8)
}
