use std::process::ExitCode;

use clap::Parser;
use fracperiodic_cli::{run, Cli};

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("FRACPERIODIC_LOG", "warn")).init();
    let cli = Cli::parse();
    let command = cli.command.name();
    match run(&cli.command) {
        Ok(outcome) => {
            for f in &outcome.files {
                println!("wrote {}", f.display());
            }
            if outcome.all_passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("{command}: some checks failed");
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("{command}: {e}");
            let dir = &cli.command.common().out;
            let json = serde_json::to_string_pretty(&e.to_json(command)).expect("error json") + "\n";
            if let Err(io) =
                std::fs::create_dir_all(dir).and_then(|_| std::fs::write(dir.join("error.json"), json))
            {
                eprintln!("cannot write error.json: {io}");
            }
            ExitCode::FAILURE
        }
    }
}
