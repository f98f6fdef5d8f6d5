//! Run configuration: a TOML file whose every key can be overridden by a flag.
//!
//! ```toml
//! backend = "tree"        # tree | modular | flat
//! rank = 2                # free-group rank on the tree backend
//! seed = 7
//! out_dir = "out"
//! workers = 0             # 0 lets rayon decide
//!
//! [count]
//! r_max = 12.0            # orbit census radius; flat defaults to 200
//! t_max = 10.0            # closed-geodesic census length
//!
//! [measure]
//! cells = "depth=4"       # depth=N (tree), arcs=N (modular) or a plain cell count
//! checks = ["conformal"]  # conformal, mass, shadow, pair-invariance, validators; empty = all
//! gamma = "a"             # tree pushforward element
//! equidist = false
//! t = 10.0                # equidistribution length cut-off
//! s = 1.5                 # exponent of the finite-s measure; must exceed h
//! radius = 12.0           # orbit ball radius for the modular measure
//!
//! [entropy]
//! n = "1..10"
//! deltas = [0.5]
//! probe = "z-set"         # z-set | fiber; omit for spanning counts
//! rho = 0.4
//! horizon = 20.0
//! budget = 2000
//! xi = "0"
//! eta = "inf"
//!
//! [validate]
//! suite = "tree"          # tree | plane | all
//! delta_samples = 200000
//! pairs = 20000
//! corrupt_delta = false   # negative control: claims δ = 0 on the plane
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub backend: String,
    pub rank: usize,
    pub seed: u64,
    pub out_dir: PathBuf,
    pub workers: usize,
    pub count: CountConfig,
    pub measure: MeasureConfig,
    pub entropy: EntropyConfig,
    pub validate: ValidateConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            backend: "tree".into(),
            rank: 2,
            seed: 7,
            out_dir: PathBuf::from("out"),
            workers: 0,
            count: CountConfig::default(),
            measure: MeasureConfig::default(),
            entropy: EntropyConfig::default(),
            validate: ValidateConfig::default(),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CountConfig {
    pub r_max: Option<f64>,
    pub t_max: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MeasureConfig {
    pub cells: Option<String>,
    pub checks: Vec<String>,
    pub gamma: String,
    pub equidist: bool,
    pub t: f64,
    pub s: Option<f64>,
    pub radius: f64,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        MeasureConfig { cells: None, checks: Vec::new(), gamma: "a".into(), equidist: false, t: 10.0, s: None, radius: 12.0 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    pub n: Option<String>,
    pub deltas: Vec<f64>,
    pub probe: Option<String>,
    pub rho: f64,
    pub horizon: f64,
    pub budget: usize,
    pub xi: Option<String>,
    pub eta: Option<String>,
}

impl Default for EntropyConfig {
    fn default() -> Self {
        EntropyConfig {
            n: None,
            deltas: Vec::new(),
            probe: None,
            rho: 0.4,
            horizon: 20.0,
            budget: 2000,
            xi: None,
            eta: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValidateConfig {
    pub suite: Option<String>,
    pub delta_samples: usize,
    pub pairs: usize,
    pub corrupt_delta: bool,
}

impl Default for ValidateConfig {
    fn default() -> Self {
        ValidateConfig { suite: None, delta_samples: 200_000, pairs: 20_000, corrupt_delta: false }
    }
}

/// Which model a run uses, resolved from the `backend` string.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BackendKind {
    Tree,
    Modular,
    Flat,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
        toml::from_str(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))
    }

    pub fn backend_kind(&self) -> Result<BackendKind, CliError> {
        match self.backend.as_str() {
            "tree" => Ok(BackendKind::Tree),
            "modular" | "plane" => Ok(BackendKind::Modular),
            "flat" => Ok(BackendKind::Flat),
            other => Err(CliError::Usage(format!("unknown backend {other:?} (expected tree, modular or flat)"))),
        }
    }

    /// SHA-256 of the configuration with the fields that cannot change
    /// numeric output (worker count, output directory) blanked.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = 0;
        c.out_dir = PathBuf::new();
        let text = toml::to_string(&c).expect("config serialises");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Parses `"a..b"` (inclusive) or a comma list into a sorted grid.
pub fn parse_n_grid(s: &str) -> Result<Vec<usize>, CliError> {
    let bad = || CliError::Usage(format!("bad n grid {s:?}: use a..b or a,b,c"));
    let mut out: Vec<usize> = if let Some((a, b)) = s.split_once("..") {
        let (a, b): (usize, usize) = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
        if a > b {
            return Err(bad());
        }
        (a..=b).collect()
    } else {
        s.split(',').map(|x| x.trim().parse().map_err(|_| bad())).collect::<Result<_, _>>()?
    };
    out.sort_unstable();
    out.dedup();
    Ok(out)
}

/// `depth=N`, `arcs=N` or a bare count.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellSpec {
    Depth(usize),
    Arcs(usize),
    Count(usize),
}

pub fn parse_cells(s: &str) -> Result<CellSpec, CliError> {
    let bad = || CliError::Usage(format!("bad cell spec {s:?}: use depth=N, arcs=N or N"));
    let num = |v: &str| v.trim().parse::<usize>().map_err(|_| bad());
    match s.split_once('=') {
        Some(("depth", v)) => Ok(CellSpec::Depth(num(v)?)),
        Some(("arcs", v)) => Ok(CellSpec::Arcs(num(v)?)),
        Some(_) => Err(bad()),
        None => Ok(CellSpec::Count(num(s)?)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_hash() {
        let c = RunConfig::default();
        let text = toml::to_string(&c).unwrap();
        let back: RunConfig = toml::from_str(&text).unwrap();
        assert_eq!(back, c);
        let mut d = c.clone();
        d.workers = 8;
        d.out_dir = "elsewhere".into();
        assert_eq!(c.hash(), d.hash());
        d.seed += 1;
        assert_ne!(c.hash(), d.hash());
    }

    #[test]
    fn partial_file_uses_defaults() {
        let c: RunConfig = toml::from_str("backend = \"flat\"\n[entropy]\nrho = 0.3\n").unwrap();
        assert_eq!(c.backend_kind().unwrap(), BackendKind::Flat);
        assert_eq!(c.entropy.rho, 0.3);
        assert_eq!(c.rank, 2);
        assert!(toml::from_str::<RunConfig>("bogus = 1").is_err());
    }

    #[test]
    fn grids_and_cells() {
        assert_eq!(parse_n_grid("1..4").unwrap(), vec![1, 2, 3, 4]);
        assert_eq!(parse_n_grid("10, 5,5").unwrap(), vec![5, 10]);
        assert!(parse_n_grid("4..1").is_err());
        assert_eq!(parse_cells("depth=4").unwrap(), CellSpec::Depth(4));
        assert_eq!(parse_cells("16").unwrap(), CellSpec::Count(16));
        assert!(parse_cells("width=3").is_err());
    }
}
