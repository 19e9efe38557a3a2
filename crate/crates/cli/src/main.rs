use clap::Parser;

fn main() {
    let cli = hardy_cli::Cli::parse();
    std::process::exit(hardy_cli::run(cli));
}
