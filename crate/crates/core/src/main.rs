use clap::Parser;

use bernconv::cli::{dispatch, RunConfig};

fn main() {
    let cfg = match RunConfig::try_parse() {
        Ok(cfg) => cfg,
        Err(e) => {
            // Usage errors are parameter errors (1), not clap's default 2.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let code = match dispatch(&cfg, std::io::stdout().lock()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("bernconv: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}
