use clap::Parser;
use sardkit::cli::{dispatch, Cli};

fn main() {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    if let Err(e) = dispatch(&cli.command, &mut out) {
        eprintln!("sardkit: {e}");
        std::process::exit(e.exit_code());
    }
}
