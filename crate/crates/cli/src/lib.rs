//! Command-line driver for the `s2s2` geometry engine: residual suites,
//! parameter sweeps and parallel-hypersurface experiments.

pub mod args;
pub mod error;
pub mod family;
pub mod flowcmd;
pub mod output;
pub mod sweep;
pub mod verify;

use args::{Cli, Command, Format};
use error::CliResult;

/// Runs one command and returns whether every check passed.
pub fn run(cli: Cli) -> CliResult<bool> {
    match cli.command {
        Command::Verify(a) => {
            let (spec, id) = family::build(a.family.family, a.family.t, a.family.r)?;
            if a.n == 0 {
                return Err(error::CliError::Usage("--n must be at least 1".into()));
            }
            if !(a.tol_scale > 0.0 && a.tol_scale.is_finite()) {
                return Err(error::CliError::Usage("--tol-scale must be positive".into()));
            }
            let opts = verify::VerifyOptions { n: a.n, seed: a.seed, tol_scale: a.tol_scale, timing: a.output.timing };
            let report = verify::cmd_verify(&spec, id, opts);
            let text = verify::render(&report, a.output.format.unwrap_or(Format::Text))?;
            output::emit(&text, a.output.out.as_deref())?;
            Ok(report.pass)
        }
        Command::Sweep(a) => {
            let (lo, hi) = sweep::default_range(a.family)?;
            let params = sweep::grid(a.from.unwrap_or(lo), a.to.unwrap_or(hi), a.steps)?;
            let table = sweep::cmd_sweep(a.family, &params)?;
            let text = sweep::render(&table, a.output.format.unwrap_or(Format::Csv))?;
            output::emit(&text, a.output.out.as_deref())?;
            Ok(true)
        }
        Command::Flow(a) => {
            let (spec, id) = family::build(a.family.family, a.family.t, a.family.r)?;
            let ss = flowcmd::offsets(a.s_max, a.s_steps)?;
            let table = flowcmd::cmd_flow(&spec, id, &ss, a.n, a.seed)?;
            let text = flowcmd::render(&table, a.output.format.unwrap_or(Format::Csv))?;
            output::emit(&text, a.output.out.as_deref())?;
            Ok(true)
        }
    }
}
