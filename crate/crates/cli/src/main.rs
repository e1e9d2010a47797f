use clap::Parser;

fn main() {
    let cli = critnode_cli::Cli::parse();
    if let Err(e) = critnode_cli::run(cli) {
        eprintln!("error: {e}");
        std::process::exit(e.exit_code());
    }
}
