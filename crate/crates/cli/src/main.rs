use clap::Parser;

fn main() {
    let cli = cca_cli::args::Cli::parse();
    std::process::exit(cca_cli::args::execute(&cli));
}
