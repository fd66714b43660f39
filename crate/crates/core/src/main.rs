use std::process::ExitCode;

fn main() -> ExitCode {
    nnm::cli::run()
}
