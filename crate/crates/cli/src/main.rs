use std::process::ExitCode;

fn main() -> ExitCode {
    let cfg = match cantor_spectra_cli::parse_args(std::env::args_os()) {
        Ok(cfg) => cfg,
        Err(e) => e.exit(),
    };
    ExitCode::from(cantor_spectra_cli::run(&cfg) as u8)
}
