use clap::Parser;

use trapctl_cli::args::Cli;

fn main() {
    let cli = Cli::parse();
    match trapctl_cli::run(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("{err}");
            std::process::exit(err.exit_code());
        }
    }
}
