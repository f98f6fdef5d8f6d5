use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::config::RunConfig;
use crate::CliError;

#[derive(Debug, Parser)]
#[command(name = "hypgeo", version, about = "Experiments on hyperbolic model spaces: orbit counting, conformal densities, entropy")]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct GlobalArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// tree, modular (alias plane) or flat.
    #[arg(long, global = true)]
    pub backend: Option<String>,
    /// Free-group rank for the tree backend.
    #[arg(long, global = true)]
    pub rank: Option<usize>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 0 uses every core. Does not change the output.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Orbit census, volume-entropy fit, closed-geodesic census and Margulis ratios.
    Count(CountArgs),
    /// Conformal densities: masses, conformality, shadows, pair invariance, equidistribution.
    Measure(MeasureArgs),
    /// Spanning-set entropy estimates and expansivity probes.
    Entropy(EntropyArgs),
    /// Runs the inequality suite and exits 2 on any violation.
    Validate(ValidateArgs),
}

#[derive(Debug, Args)]
pub struct CountArgs {
    /// Largest orbit-census radius.
    #[arg(long = "Rmax")]
    pub r_max: Option<f64>,
    /// Closed-geodesic census length.
    #[arg(long = "T")]
    pub t_max: Option<f64>,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// depth=N (tree cylinders), arcs=N (boundary arcs) or N (equidistribution cells).
    #[arg(long)]
    pub cells: Option<String>,
    /// Comma list of conformal, mass, shadow, pair-invariance, validators.
    #[arg(long, value_delimiter = ',')]
    pub check: Vec<String>,
    /// Tree element pushing the pair measure forward.
    #[arg(long)]
    pub gamma: Option<String>,
    /// Run the closed-geodesic equidistribution table.
    #[arg(long)]
    pub equidist: bool,
    /// Length cut-off for equidistribution.
    #[arg(long = "T")]
    pub t: Option<f64>,
    /// Exponent for the finite-s measure in the mass check; must exceed the critical exponent.
    #[arg(long)]
    pub s: Option<f64>,
    /// Orbit-ball radius behind the modular boundary measure.
    #[arg(long)]
    pub radius: Option<f64>,
}

#[derive(Debug, Args)]
pub struct EntropyArgs {
    /// Time grid, a..b or a,b,c.
    #[arg(long)]
    pub n: Option<String>,
    /// Scales, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub delta: Vec<f64>,
    /// z-set or fiber.
    #[arg(long)]
    pub probe: Option<String>,
    #[arg(long)]
    pub rho: Option<f64>,
    #[arg(long)]
    pub horizon: Option<f64>,
    /// Sample budget for probes.
    #[arg(long)]
    pub budget: Option<usize>,
    /// Backward end for the fiber probe.
    #[arg(long)]
    pub xi: Option<String>,
    /// Forward end for the fiber probe.
    #[arg(long)]
    pub eta: Option<String>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    /// tree, plane or all; defaults to the backend's own suite.
    #[arg(long)]
    pub suite: Option<String>,
    /// Triangles sampled for the thinness estimate.
    #[arg(long)]
    pub delta_samples: Option<usize>,
    /// Monte-Carlo geodesic pairs for fellow-traveling.
    #[arg(long)]
    pub pairs: Option<usize>,
    /// Negative control: claim the plane is 0-hyperbolic.
    #[arg(long)]
    pub corrupt_delta: bool,
}

impl Cli {
    /// Config file (or defaults) with every given flag applied on top.
    pub fn resolve_config(&self) -> Result<RunConfig, CliError> {
        let mut c = match &self.global.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::default(),
        };
        let g = &self.global;
        if let Some(b) = &g.backend {
            c.backend = b.clone();
        }
        if c.backend == "plane" {
            c.backend = "modular".into();
        }
        if let Some(r) = g.rank {
            c.rank = r;
        }
        if let Some(s) = g.seed {
            c.seed = s;
        }
        if let Some(o) = &g.out {
            c.out_dir = o.clone();
        }
        if let Some(w) = g.workers {
            c.workers = w;
        }
        match &self.command {
            Command::Count(a) => {
                c.count.r_max = a.r_max.or(c.count.r_max);
                c.count.t_max = a.t_max.or(c.count.t_max);
            }
            Command::Measure(a) => {
                let m = &mut c.measure;
                if a.cells.is_some() {
                    m.cells = a.cells.clone();
                }
                if !a.check.is_empty() {
                    m.checks = a.check.iter().map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
                }
                if let Some(g) = &a.gamma {
                    m.gamma = g.clone();
                }
                m.equidist |= a.equidist;
                m.t = a.t.unwrap_or(m.t);
                m.s = a.s.or(m.s);
                m.radius = a.radius.unwrap_or(m.radius);
            }
            Command::Entropy(a) => {
                let e = &mut c.entropy;
                if a.n.is_some() {
                    e.n = a.n.clone();
                }
                if !a.delta.is_empty() {
                    e.deltas = a.delta.clone();
                }
                if a.probe.is_some() {
                    e.probe = a.probe.clone();
                }
                e.rho = a.rho.unwrap_or(e.rho);
                e.horizon = a.horizon.unwrap_or(e.horizon);
                e.budget = a.budget.unwrap_or(e.budget);
                if a.xi.is_some() {
                    e.xi = a.xi.clone();
                }
                if a.eta.is_some() {
                    e.eta = a.eta.clone();
                }
            }
            Command::Validate(a) => {
                let v = &mut c.validate;
                if a.suite.is_some() {
                    v.suite = a.suite.clone();
                }
                v.delta_samples = a.delta_samples.unwrap_or(v.delta_samples);
                v.pairs = a.pairs.unwrap_or(v.pairs);
                v.corrupt_delta |= a.corrupt_delta;
            }
        }
        Ok(c)
    }
}
