mod args;
mod commands;
mod figures;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::Cli;
use commands::{Ctx, UsageError};

const EXIT_USAGE: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(EXIT_USAGE),
            };
        }
    };

    let mut config = serde_json::to_value(&cli.command).expect("config serializes");
    if let (Some(obj), Ok(serde_json::Value::Object(g))) =
        (config.as_object_mut(), serde_json::to_value(&cli.global))
    {
        obj.extend(g);
    }
    let ctx = Ctx {
        global: cli.global.clone(),
        config,
    };

    let result = commands::run(&ctx, &cli.command)
        .and_then(|ds| output::emit(&ds, cli.global.format, cli.global.out_dir.as_deref()));
    match result {
        Ok(_) => ExitCode::SUCCESS,
        Err(e)
            if e.downcast_ref::<std::io::Error>()
                .is_some_and(|io| io.kind() == std::io::ErrorKind::BrokenPipe) =>
        {
            ExitCode::SUCCESS
        }
        Err(e) if e.downcast_ref::<UsageError>().is_some() => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(e) if e.downcast_ref::<phantom_core::Error>().is_some() => {
            eprintln!("numerical failure: {e:#}");
            ExitCode::from(EXIT_NUMERICAL)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
