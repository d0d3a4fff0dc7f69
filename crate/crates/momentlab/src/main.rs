use std::process::ExitCode;

fn main() -> ExitCode {
    momentlab::cli::run(std::env::args_os())
}
