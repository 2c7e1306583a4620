use std::process::ExitCode;

use abperc::{harness, Error};

fn main() -> ExitCode {
    match harness::run_cli(std::env::args_os()) {
        Ok(out) => {
            println!("{}", out.data.display());
            for p in &out.extra {
                println!("{}", p.display());
            }
            println!("{}", out.summary.display());
            ExitCode::SUCCESS
        }
        Err(Error::Help(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(Error::Usage(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(2)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
