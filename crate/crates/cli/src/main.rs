use clap::Parser;

fn main() -> std::process::ExitCode {
    oblique_cli::main_with(oblique_cli::Cli::parse())
}
