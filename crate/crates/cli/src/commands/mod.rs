mod families;
mod minimum;

use std::collections::BTreeMap;

use serde::Serialize;

pub use families::{bsv_scan, gaussian, mixture_bound, BsvArgs, GaussianArgs, MixtureArgs};
pub use minimum::{extrapolate, min_uncertainty, sweep, CellArgs, ExtrapolateArgs, SweepArgs};

use crate::config::{resolve_settings, ConfigFile, GlobalFlags, Resolver, Settings};
use crate::error::{CliError, CliResult};
use crate::output::Run;

pub struct Context {
    pub file: ConfigFile,
    pub flags: GlobalFlags,
}

impl Context {
    /// Resolves the global settings; command parameters are added to the
    /// returned resolver by the caller.
    pub fn settings(&self) -> CliResult<(Settings, Resolver<'_>)> {
        let mut resolver = Resolver::new(&self.file);
        let flags = GlobalFlags {
            seed: self.flags.seed,
            threads: self.flags.threads,
            solver: self.flags.solver.clone(),
            output_dir: self.flags.output_dir.clone(),
            cache_dir: self.flags.cache_dir.clone(),
            no_cache: self.flags.no_cache,
        };
        let settings = resolve_settings(flags, &mut resolver)?;
        Ok((settings, resolver))
    }
}

pub fn init_threads(threads: usize) -> CliResult<()> {
    if threads > 0 {
        // a second call in the same process keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global();
    }
    Ok(())
}

#[derive(Serialize)]
struct Diagnostic<'a> {
    command: &'a str,
    error: String,
    exit_code: u8,
    parameters: &'a BTreeMap<String, String>,
}

/// Writes the manifest either way, plus a diagnostic file on failure.
pub fn finalize(mut run: Run, outcome: CliResult<()>) -> CliResult<()> {
    match outcome {
        Ok(()) => {
            run.finish("ok")?;
            Ok(())
        }
        Err(e) => {
            let name = format!("{}.error.json", run.command);
            let diagnostic = Diagnostic {
                command: run.command,
                error: e.to_string(),
                exit_code: e.exit_code(),
                parameters: &run.parameters.clone(),
            };
            run.write_json(&name, &diagnostic)?;
            let status = match e {
                CliError::Verification(_) => "verification-failed",
                CliError::Usage(_) => "usage-error",
                _ => "failed",
            };
            run.finish(status)?;
            Err(e)
        }
    }
}

pub fn require(condition: bool, message: impl FnOnce() -> String) -> CliResult<()> {
    if condition {
        Ok(())
    } else {
        Err(CliError::Usage(message()))
    }
}
