use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::ValueEnum;
use raising_core::SolverConfig;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    RaisingSteps,
    Direct,
    CoarseOnly,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::RaisingSteps => "raising-steps",
            Method::Direct => "direct",
            Method::CoarseOnly => "coarse-only",
        }
    }
}

/// Everything a run needs. Loaded from `--config`, then overridden by flags.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub mesh: Option<PathBuf>,
    pub generate: Option<String>,
    /// Replace the mesh by its double before doing anything else.
    pub double: bool,
    pub degree: usize,
    pub methods: Vec<Method>,
    /// Right-hand side as a cochain CSV; a seeded random cochain otherwise.
    pub rhs: Option<PathBuf>,
    /// Seed of the random right-hand side (defaults to `solver.rng_seed`).
    pub rhs_seed: Option<u64>,
    pub out_dir: Option<PathBuf>,
    /// Torus sizes for `bench`.
    pub sizes: Vec<usize>,
    pub solver: SolverConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            mesh: None,
            generate: None,
            double: false,
            degree: 1,
            methods: vec![Method::RaisingSteps],
            rhs: None,
            rhs_seed: None,
            out_dir: None,
            sizes: vec![8, 16],
            solver: SolverConfig::default(),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing config {}", path.display()))
    }

    pub fn rhs_seed(&self) -> u64 {
        self.rhs_seed.unwrap_or(self.solver.rng_seed)
    }

    pub fn validate(&self) -> Result<()> {
        if self.mesh.is_some() && self.generate.is_some() {
            bail!("give either a mesh file or a generator, not both");
        }
        if self.methods.is_empty() {
            bail!("at least one method is required");
        }
        if self.sizes.iter().any(|&s| s < 3) {
            bail!("torus sizes must be at least 3");
        }
        self.solver.validate()?;
        Ok(())
    }
}
