use std::process::ExitCode;

fn main() -> ExitCode {
    let code = tiltpump_cli::main_with_args(std::env::args().skip(1));
    ExitCode::from(code as u8)
}
