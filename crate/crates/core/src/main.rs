use std::process::ExitCode;

use nlz_core::io::{parse_config, run, Invocation};

fn main() -> ExitCode {
    let (config, print_config) = match parse_config(std::env::args_os()) {
        Ok(Invocation::Run { config, print_config }) => (config, print_config),
        Ok(Invocation::Info(text)) => {
            print!("{text}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("nlz: {e}");
            return ExitCode::from(e.exit_code() as u8);
        }
    };
    if print_config {
        println!("{}", config.to_json());
        return ExitCode::SUCCESS;
    }
    match run(&config) {
        Ok(summary) => {
            print!("{summary}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("nlz: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
