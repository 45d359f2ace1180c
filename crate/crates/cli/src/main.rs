use clap::Parser;

fn main() {
    let cli = surrogate_cli::Cli::try_parse().unwrap_or_else(|e| {
        let code = if e.use_stderr() { surrogate_cli::error::EXIT_USER } else { surrogate_cli::error::EXIT_OK };
        let _ = e.print();
        std::process::exit(code);
    });
    std::process::exit(surrogate_cli::run(cli));
}
