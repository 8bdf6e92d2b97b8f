use clap::Parser;

use sqf_cli::{resolve_config, run, Cli};

fn main() {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("SQF_LOG", "info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            log::warn!("could not set {n} workers: {e}");
        }
    }
    let result = resolve_config(&cli).and_then(|cfg| run(&cli.command, &cfg));
    if let Err(e) = result {
        log::error!("{e}");
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
