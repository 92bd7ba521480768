use std::process::ExitCode;

use clap::Parser;
use iga_dispersion_cli::config::Options;
use iga_dispersion_cli::{run, Created};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let opts = Options::parse();
    let mut created = Created::new();
    match run(opts, &mut created) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            created.discard();
            eprintln!("iga-disp: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
