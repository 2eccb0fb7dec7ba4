mod config;
mod run;

use std::process::ExitCode;

use config::{parse_config, ClapOrConfig, SEED_ENV};
use run::{render, run, RunError, EXIT_CONFIG, EXIT_REFUSED};

fn emit(text: &str, path: Option<&std::path::Path>) -> Result<(), String> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| format!("cannot write {}: {e}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cfg = match parse_config(std::env::args_os(), std::env::var(SEED_ENV).ok()) {
        Ok(c) => c,
        Err(ClapOrConfig::Clap(e)) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
        Err(ClapOrConfig::Config(e)) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let code = match run(&cfg) {
        Ok(art) => match emit(&render(&cfg, &art), cfg.output_path.as_deref()) {
            Ok(()) => art.exit,
            Err(e) => {
                eprintln!("{e}");
                EXIT_CONFIG
            }
        },
        Err(RunError::Config(e)) => {
            eprintln!("{e}");
            EXIT_CONFIG
        }
        Err(RunError::Refused(json, why)) => {
            eprintln!("refused: {why}");
            let json = json.with("error", why).with("params", run::params_json(&cfg));
            let _ = emit(&format!("{}\n", json.render()), cfg.output_path.as_deref());
            EXIT_REFUSED
        }
        Err(RunError::Failed(why)) => {
            eprintln!("error: {why}");
            EXIT_REFUSED
        }
    };
    ExitCode::from(code as u8)
}
