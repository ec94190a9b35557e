use std::process::ExitCode;

fn main() -> ExitCode {
    overdet_cli::run(std::env::args_os())
}
