//! Command-line front end for `topofc`.

use std::ffi::OsString;
use std::fmt;

use clap::Parser;

use topofc::ErrorKind;

mod commands;
mod config;
mod output;

use config::{Cli, Command, FileConfig, RunConfig};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_NUMERIC: i32 = 4;

/// Bad flags or configuration detected by the front end itself.
#[derive(Debug)]
pub struct UsageError(pub String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn exit_code(err: &anyhow::Error) -> i32 {
    for cause in err.chain() {
        if cause.is::<UsageError>() {
            return EXIT_USAGE;
        }
        if let Some(e) = cause.downcast_ref::<topofc::Error>() {
            return match e.kind() {
                ErrorKind::Usage => EXIT_USAGE,
                ErrorKind::Data => EXIT_DATA,
                ErrorKind::Numeric => EXIT_NUMERIC,
            };
        }
    }
    EXIT_DATA
}

/// The error chain joined by `: `, skipping causes a wrapper already prints.
fn describe(err: &anyhow::Error) -> String {
    let mut msg = String::new();
    for cause in err.chain() {
        let text = cause.to_string();
        if !msg.contains(&text) {
            if !msg.is_empty() {
                msg.push_str(": ");
            }
            msg.push_str(&text);
        }
    }
    msg
}

fn file_config(path: Option<&std::path::Path>) -> anyhow::Result<FileConfig> {
    path.map_or_else(|| Ok(FileConfig::default()), FileConfig::load)
}

fn dispatch(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Extract {
            common,
            emit_fc,
            fc_graph,
        } => {
            let file = file_config(common.config.as_deref())?;
            let cfg = RunConfig::resolve("extract", &common, &file)?;
            let emit_fc = emit_fc.or(file.emit_fc);
            commands::extract_cmd(cfg, emit_fc, fc_graph.or(file.fc_graph).unwrap_or(0))
        }
        Command::Embed { common } => {
            let file = file_config(common.config.as_deref())?;
            commands::embed_cmd(RunConfig::resolve("embed", &common, &file)?)
        }
        Command::Betti {
            common,
            graph,
            grid,
        } => {
            let file = file_config(common.config.as_deref())?;
            let cfg = RunConfig::resolve("betti", &common, &file)?;
            let grid = grid.or(file.grid).unwrap_or_else(|| "weights".into());
            commands::betti_cmd(cfg, graph.or(file.graph).unwrap_or(0), &grid)
        }
        Command::Distance { common, p, diagram } => {
            let file = file_config(common.config.as_deref())?;
            let cfg = RunConfig::resolve("distance", &common, &file)?;
            let diagram = diagram.or(file.diagram).unwrap_or_else(|| "births".into());
            commands::distance_cmd(cfg, p.or(file.p).unwrap_or(1.0), &diagram)
        }
        Command::Barycenter {
            common,
            class,
            diagram,
            resolution,
        } => {
            let file = file_config(common.config.as_deref())?;
            let cfg = RunConfig::resolve("barycenter", &common, &file)?;
            let class = class
                .or(file.class)
                .ok_or_else(|| UsageError("--class is required".into()))?;
            let diagram = diagram.or(file.diagram).unwrap_or_else(|| "births".into());
            commands::barycenter_cmd(cfg, class, &diagram, resolution.or(file.resolution))
        }
        Command::Train { common, learner } => {
            let file = file_config(common.config.as_deref())?;
            let cfg = RunConfig::resolve("train", &common, &file)?.with_learner(&learner, &file)?;
            commands::train_cmd(cfg)
        }
        Command::Crossval { common, learner } => {
            let file = file_config(common.config.as_deref())?;
            let cfg =
                RunConfig::resolve("crossval", &common, &file)?.with_learner(&learner, &file)?;
            commands::crossval_cmd(cfg)
        }
        Command::Validate { common } => {
            let file = file_config(common.config.as_deref())?;
            commands::validate_cmd(RunConfig::resolve("validate", &common, &file)?)
        }
    }
}

/// Parses `argv` (program name first), runs the subcommand and returns the
/// process exit code. Errors are reported on standard error.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match dispatch(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {}", describe(&e));
            exit_code(&e)
        }
    }
}
