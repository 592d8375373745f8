use std::process::ExitCode;

fn main() -> ExitCode {
    reprorate::cli::main_entry()
}
