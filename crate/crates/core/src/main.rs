use std::process::ExitCode;

fn main() -> ExitCode {
    dataqa::cli::main_with_args(std::env::args_os())
}
