use clap::Parser;

fn main() {
    let cli = dirflow_cli::Cli::parse();
    if let Err(e) = dirflow_cli::run(&cli) {
        eprintln!("dirflow: {e}");
        std::process::exit(e.exit_code());
    }
}
