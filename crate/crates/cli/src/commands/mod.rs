pub mod count;
pub mod entropy;
pub mod measure;
pub mod validate;

use hypgeo::tree::{Rational, Word};

use crate::args::Command;
use crate::config::{BackendKind, RunConfig};
use crate::report::Output;
use crate::CliError;

/// The modular surface has a cusp, so results on it stand in for a closed
/// surface.
pub const MODULAR_PROXY: &str = "proxy: modular surface is non-compact (finite area, one cusp)";

pub fn dispatch(cmd: &Command, cfg: &RunConfig) -> Result<String, CliError> {
    let mut out = Output::new(&cfg.out_dir, cfg.hash())?;
    let modular = match cmd {
        Command::Validate(_) => cfg.validate.suite.as_deref().map_or(cfg.backend_kind().ok() == Some(BackendKind::Modular), |s| s != "tree"),
        _ => cfg.backend_kind().ok() == Some(BackendKind::Modular),
    };
    if modular {
        out.model = Some(MODULAR_PROXY);
    }
    let summary = match cmd {
        Command::Count(_) => count::run(cfg, &mut out)?,
        Command::Measure(_) => measure::run(cfg, &mut out)?,
        Command::Entropy(_) => entropy::run(cfg, &mut out)?,
        Command::Validate(_) => validate::run(cfg, &mut out)?,
    };
    let files: Vec<String> = out.written.iter().map(|p| p.display().to_string()).collect();
    let note = out.model.map_or(String::new(), |m| format!("\nmodel: {m}"));
    Ok(format!("{summary}{note}\nwrote {}", files.join(", ")))
}

pub(crate) fn word(s: &str, rank: usize) -> Result<Word, CliError> {
    Word::parse(s, rank).map_err(|e| CliError::Usage(format!("word {s:?}: {e}")))
}

pub(crate) fn rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub(crate) fn tree_rank(cfg: &RunConfig) -> Result<usize, CliError> {
    if cfg.rank == 0 {
        return Err(CliError::Usage("rank must be at least 1".into()));
    }
    Ok(cfg.rank)
}
