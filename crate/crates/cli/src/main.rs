use clap::Parser;

fn main() {
    let cli = opdiv_cli::Cli::parse();
    std::process::exit(opdiv_cli::run(cli));
}
