use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use fibdirac_core::app::{
    catalog_get, catalog_list, exit_code, load_model, run_check, run_couple, run_holonomy,
    verdict_name, Document, Format, RunConfig, EXIT_MISMATCH, EXIT_OK,
};
use fibdirac_core::error::{Error, Result};
use serde::Serialize;

#[derive(Parser)]
#[command(name = "fibdirac", version, about = "Integrability checks for Dirac structures on fibrations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the four integrability conditions of a model file or catalog entry.
    Check {
        model: String,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Build the coupling triple of a gauge file and check it.
    Couple {
        gauge: String,
        /// Write the coupling triple as a model file.
        #[arg(long)]
        out: Option<PathBuf>,
        #[command(flatten)]
        run: RunArgs,
    },
    /// Transport fiber points around a base loop.
    Holonomy {
        model: String,
        #[arg(long = "loop", value_enum, default_value_t = LoopKind::Circle)]
        loop_kind: LoopKind,
        /// Loop center, comma separated.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        center: Vec<f64>,
        #[arg(long)]
        radius: f64,
        #[arg(long, default_value_t = fibdirac_core::fibration::DEFAULT_STEP)]
        step: f64,
        #[arg(long, default_value_t = 8)]
        fiber_points: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = OutFormat::Text)]
        format: OutFormat,
    },
    /// The built-in catalog.
    Examples {
        #[command(subcommand)]
        action: ExamplesCommand,
    },
}

#[derive(Subcommand)]
enum ExamplesCommand {
    List,
    /// Check entries against their expectations.
    Run {
        #[arg(default_value = "all")]
        id: String,
        #[command(flatten)]
        run: RunArgs,
    },
}

#[derive(Args)]
struct RunArgs {
    #[arg(long, default_value_t = 200)]
    samples: usize,
    #[arg(long, default_value_t = 1e-6)]
    tol: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value_t = OutFormat::Text)]
    format: OutFormat,
}

#[derive(Clone, Copy, ValueEnum)]
enum OutFormat {
    Json,
    Text,
}

#[derive(Clone, Copy, ValueEnum)]
enum LoopKind {
    Circle,
}

impl RunArgs {
    fn config(&self) -> RunConfig {
        RunConfig {
            samples: self.samples,
            seed: self.seed,
            tolerance: self.tol,
            format: match self.format {
                OutFormat::Json => Format::Json,
                OutFormat::Text => Format::Text,
            },
            ..RunConfig::default()
        }
    }
}

fn emit<T: Serialize>(format: Format, value: &T, text: impl FnOnce() -> String) -> Result<()> {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(value).map_err(Error::from)?),
        Format::Text => println!("{}", text()),
    }
    Ok(())
}

fn gauge_document(spec: &str) -> Result<(Document, String)> {
    if let Ok(e) = catalog_get(spec) {
        return Ok((e.document()?, e.id.to_string()));
    }
    let path = Path::new(spec);
    let text = std::fs::read_to_string(path)?;
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(spec).to_string();
    Ok((Document::parse(&text)?, stem))
}

fn run(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Check { model, run } => {
            let cfg = run.config();
            let report = run_check(&load_model(&model)?, &cfg)?;
            emit(cfg.format, &report, || report.to_text())?;
            Ok(report.exit_code())
        }
        Command::Couple { gauge, out, run } => {
            let cfg = run.config();
            let (doc, id) = gauge_document(&gauge)?;
            let Document::Gauge(g) = doc else {
                return Err(Error::Schema(format!("`{gauge}` is not a gauge file")));
            };
            let (file, report) = run_couple(&g, &id, &cfg)?;
            if let Some(path) = out {
                let json = serde_json::to_string_pretty(&file).map_err(Error::from)?;
                std::fs::write(path, json + "\n")?;
            }
            emit(cfg.format, &report, || report.to_text())?;
            Ok(report.check.exit_code())
        }
        Command::Holonomy {
            model,
            loop_kind: LoopKind::Circle,
            center,
            radius,
            step,
            fiber_points,
            seed,
            format,
        } => {
            let format = match format {
                OutFormat::Json => Format::Json,
                OutFormat::Text => Format::Text,
            };
            let cfg = RunConfig {
                seed,
                step,
                format,
                ..RunConfig::default()
            };
            let report = run_holonomy(&load_model(&model)?, &center, radius, fiber_points, &cfg)?;
            emit(format, &report, || report.to_text())?;
            Ok(EXIT_OK)
        }
        Command::Examples {
            action: ExamplesCommand::List,
        } => {
            for e in catalog_list() {
                println!("{:<28} {}", e.id, e.description());
            }
            Ok(EXIT_OK)
        }
        Command::Examples {
            action: ExamplesCommand::Run { id, run },
        } => {
            let cfg = run.config();
            let ids: Vec<&str> = if id == "all" {
                catalog_list().iter().map(|e| e.id).collect()
            } else {
                vec![catalog_get(&id)?.id]
            };
            let mut reports = Vec::new();
            for id in ids {
                reports.push(run_check(&catalog_get(id)?.load()?, &cfg)?);
            }
            emit(cfg.format, &reports, || {
                reports
                    .iter()
                    .map(|r| {
                        let want = r.expected.as_ref().map_or("-", |e| verdict_name(e.verdict));
                        let mark = if r.ok { "ok" } else { "MISMATCH" };
                        format!("{:<28} {:<17} expected {:<17} {mark}", r.model_id, verdict_name(r.verdict), want)
                    })
                    .collect::<Vec<_>>()
                    .join("\n")
            })?;
            Ok(if reports.iter().all(|r| r.ok) {
                EXIT_OK
            } else {
                EXIT_MISMATCH
            })
        }
    }
}

fn main() -> ExitCode {
    let code = match run(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    };
    ExitCode::from(code as u8)
}
