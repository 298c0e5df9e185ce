use std::process::ExitCode;

use onebit_csit::cli::{execute, parse_args, CliError};

fn main() -> ExitCode {
    let spec = match parse_args(std::env::args_os()) {
        Ok(spec) => spec,
        Err(CliError::Usage {
            message,
            is_info: true,
        }) => {
            print!("{message}");
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(2);
        }
    };
    match execute(&spec) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("some sweep points or algorithms produced no valid result");
            ExitCode::FAILURE
        }
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(2)
        }
    }
}
