use clap::Parser;

use radar_tracking::cli::{self, Cli};

fn main() {
    let args = Cli::parse();
    if let Err(e) = cli::run(args) {
        eprintln!("error: {}", e.message);
        std::process::exit(e.code);
    }
}
