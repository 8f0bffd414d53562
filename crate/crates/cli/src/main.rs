mod args;
mod commands;
mod config;

use std::process::ExitCode;

use bonemap4d::ErrorClass;
use clap::error::ErrorKind;
use clap::Parser;
use serde::Serialize;

use args::{Cli, Command, InspectCommand};
use config::FileConfig;

const THREADS_ENV: &str = "BONEMAP4D_THREADS";

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Core(bonemap4d::Error),
}

impl From<bonemap4d::Error> for CliError {
    fn from(e: bonemap4d::Error) -> Self {
        CliError::Core(e)
    }
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Core(e) => match e.class() {
                ErrorClass::Io => 2,
                ErrorClass::Validation => 3,
                ErrorClass::Numeric => 4,
            },
        }
    }

    fn kind(&self) -> &'static str {
        match self {
            CliError::Usage(_) => "usage",
            CliError::Core(e) => e.kind(),
        }
    }

    fn message(&self) -> String {
        match self {
            CliError::Usage(m) => m.clone(),
            CliError::Core(e) => e.to_string(),
        }
    }
}

#[derive(Serialize)]
struct ErrorLine<'a> {
    error: &'a str,
    code: u8,
    message: String,
}

fn report(err: &CliError) -> ExitCode {
    let line = ErrorLine {
        error: err.kind(),
        code: err.code(),
        message: err.message().replace('\n', " "),
    };
    eprintln!(
        "{}",
        serde_json::to_string(&line).expect("error line serializes")
    );
    ExitCode::from(err.code())
}

fn configure_threads() -> Result<(), CliError> {
    let raw = match std::env::var(THREADS_ENV) {
        Ok(v) => v,
        Err(std::env::VarError::NotPresent) => return Ok(()),
        Err(e) => return Err(CliError::Usage(format!("{THREADS_ENV}: {e}"))),
    };
    let n: usize = raw
        .trim()
        .parse()
        .map_err(|_| CliError::Usage(format!("{THREADS_ENV}={raw:?} is not a thread count")))?;
    if n > 0 {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Usage(format!("{THREADS_ENV}: {e}")))?;
    }
    Ok(())
}

fn print_config<T: Serialize>(section: &str, value: &T) {
    let wrapped = serde_json::json!({ section: value });
    println!(
        "{}",
        serde_json::to_string_pretty(&wrapped).expect("config serializes")
    );
}

fn run(cli: Cli) -> Result<(), CliError> {
    configure_threads()?;
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    match &cli.command {
        Command::Render(a) => {
            let mut c = file.render;
            a.apply(&mut c);
            if cli.print_config {
                print_config("render", &c);
                return Ok(());
            }
            commands::render(&c)
        }
        Command::Align(a) => {
            let mut c = file.align;
            a.apply(&mut c);
            if cli.print_config {
                print_config("align", &c);
                return Ok(());
            }
            commands::align(&c)
        }
        Command::Inspect(which) => {
            let (a, ellipsoids) = match which {
                InspectCommand::Ellipsoids(a) => (a, true),
                InspectCommand::Embeddings(a) => (a, false),
            };
            let mut c = file.inspect;
            a.apply(&mut c);
            if cli.print_config {
                print_config("inspect", &c);
                return Ok(());
            }
            if ellipsoids {
                commands::inspect_ellipsoids(&c)
            } else {
                commands::inspect_embeddings(&c)
            }
        }
        Command::SampleDemo(a) => {
            let mut c = file.sample_demo;
            a.apply(&mut c);
            if cli.print_config {
                print_config("sample_demo", &c);
                return Ok(());
            }
            commands::sample_demo(&c)
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) if e.kind() == ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand => {
            return report(&CliError::Usage("missing subcommand; see --help".into()));
        }
        Err(e) => {
            let text = e.render().to_string();
            let first = text.lines().next().unwrap_or("invalid arguments");
            return report(&CliError::Usage(
                first.trim_start_matches("error: ").to_string(),
            ));
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => report(&e),
    }
}
