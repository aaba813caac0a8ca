pub mod dynamics;
pub mod kernel;
pub mod noise;
pub mod quadform;
pub mod verify;

use std::path::{Path, PathBuf};

use serde::Serialize;

use crate::config::{resolve, CliResult, Params};
use crate::output::{sibling, Outputs};

/// Flags shared by every subcommand.
#[derive(clap::Args, Debug, Clone)]
pub struct Common {
    /// JSON run configuration; flags given on the command line take precedence
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Primary output file; related files are written next to it
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Outcome of a subcommand body.
pub enum Verdict {
    Done,
    /// acceptance-style commands report pass or fail through the exit code
    Checked(bool),
}

/// Resolve the configuration, run `body`, then write its outputs and the config echo.
pub fn execute<P: Params>(
    command: &str,
    common: &Common,
    flags: &impl Serialize,
    body: impl FnOnce(&P, &Path, &mut Outputs) -> CliResult<Verdict>,
) -> CliResult<u8> {
    let run = resolve::<P>(command, common.config.as_deref(), common.out.clone(), flags)?;
    log::info!("{command}: writing {}", run.out.display());
    let mut outputs = Outputs::default();
    let verdict = body(&run.params, &run.out, &mut outputs)?;
    outputs.add(sibling(&run.out, "config.json"), run.echo()?);
    outputs.write_all()?;
    Ok(match verdict {
        Verdict::Checked(false) => 1,
        _ => 0,
    })
}
