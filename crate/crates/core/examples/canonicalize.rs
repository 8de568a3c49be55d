//! Reformat a `.psw` file into canonical form on stdout.
//!
//!     cargo run -p psworld-core --example canonicalize -- model.psw

use psworld_core::dsl::{parse_model, serialize_model};
use std::process::ExitCode;

fn main() -> ExitCode {
    let Some(path) = std::env::args().nth(1) else {
        eprintln!("usage: canonicalize <file.psw>");
        return ExitCode::from(2);
    };
    let source = match std::fs::read_to_string(&path) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{path}: {e}");
            return ExitCode::from(2);
        }
    };
    match parse_model(&source, &path) {
        Ok((model, warnings)) => {
            for w in warnings {
                eprintln!("{w}");
            }
            print!("{}", serialize_model(&model));
            ExitCode::SUCCESS
        }
        Err(diagnostics) => {
            for d in diagnostics {
                eprintln!("{d}");
            }
            ExitCode::FAILURE
        }
    }
}
