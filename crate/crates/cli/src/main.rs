use clap::Parser;
use dualrisk_cli::{execute, RunConfig};

fn main() {
    let config = match RunConfig::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            std::process::exit(e.exit_code());
        }
    };
    std::process::exit(execute(&config));
}
