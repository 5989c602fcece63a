use std::io;
use std::process::ExitCode;

fn main() -> ExitCode {
    let quiet = std::env::args().any(|a| a == "--quiet");
    env_logger::Builder::new()
        .parse_filters(if quiet { "off" } else { "warn" })
        .init();
    let code = pbn_cli::run(std::env::args_os(), &mut io::stdout(), &mut io::stderr());
    ExitCode::from(code as u8)
}
