use clap::Parser;

fn main() {
    let cli = cdinn_cli::Cli::parse();
    if let Err(e) = cdinn_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
