use clap::Parser;

fn main() {
    std::process::exit(choquard::cli::run(choquard::cli::Cli::parse()));
}
