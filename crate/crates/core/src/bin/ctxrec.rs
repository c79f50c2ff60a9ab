use std::io::Write;
use std::path::PathBuf;

use clap::Parser;

/// Runs context-aware recommendation experiments described by configuration files.
#[derive(Parser)]
#[command(name = "ctxrec", version)]
struct Cli {
    /// Configuration files, run in order.
    #[arg(short = 'c', long = "config", num_args = 1.., value_name = "CONF")]
    config: Vec<PathBuf>,

    #[arg(value_name = "CONF", hide = true)]
    rest: Vec<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let configs: Vec<PathBuf> = cli.config.into_iter().chain(cli.rest).collect();
    if configs.is_empty() {
        eprintln!("usage: ctxrec -c <conf> [<conf>...]");
        std::process::exit(2);
    }
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let code = ctxrec::runner::run(&configs, &mut out);
    let _ = out.flush();
    std::process::exit(code);
}
