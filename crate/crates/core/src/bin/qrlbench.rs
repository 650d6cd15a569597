use std::process::ExitCode;

fn main() -> ExitCode {
    qrlbench::cli::run()
}
