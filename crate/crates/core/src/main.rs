use clap::Parser;

use vpfp::cli_io::{cli_run, error_line, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let mut stdout = std::io::stdout();
    if let Err(e) = cli_run(cli, &mut stdout) {
        eprintln!("{}", error_line(&e));
        std::process::exit(match e {
            vpfp::Error::Config(_) | vpfp::Error::InvalidParameter(_) => 2,
            _ => 1,
        });
    }
}
