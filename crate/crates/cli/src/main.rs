use clap::Parser;
use induct_cli::{generate, judge_cmd, print_curriculum, service, Cli, Command};

fn main() {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(args) => generate::run(args),
        Command::Judge(args) => judge_cmd::run(args),
        Command::Serve(args) => service::run(args),
        Command::Curriculum { json } => print_curriculum(*json),
    };
    if let Err(e) = result {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}
