mod commands;
mod config;
mod mesh;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand, ValueEnum};
use raising_core::Execution;

use config::{Method, RunConfig};

/// Hodge-Laplace solves on simplicial surfaces by partition-of-unity raising steps.
#[derive(Parser, Debug)]
#[command(name = "raising", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Dimensions of the harmonic spaces, with spectral gap diagnostics.
    Betti {
        #[command(flatten)]
        common: Common,
        /// Also write every harmonic basis vector as a CSV.
        #[arg(long)]
        dump_basis: bool,
    },
    /// Split a cochain into harmonic, exact and coexact parts.
    Decompose {
        #[command(flatten)]
        common: Common,
    },
    /// Solve Δu = ω (on the double when the mesh has boundary).
    Solve {
        #[command(flatten)]
        common: Common,
    },
    /// Time solve paths over a family of tori.
    Bench {
        #[command(flatten)]
        common: Common,
        /// Torus sizes, e.g. 8,16,32 for torus(8,8), torus(16,16), torus(32,32).
        #[arg(long, value_delimiter = ',')]
        sizes: Option<Vec<usize>>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExecutionArg {
    Sequential,
    Parallel,
}

#[derive(Args, Debug)]
struct Common {
    /// JSON run configuration; flags below override its fields.
    #[arg(long)]
    config: Option<PathBuf>,
    /// OFF or OBJ mesh file.
    #[arg(long, conflicts_with = "generate")]
    mesh: Option<PathBuf>,
    /// Generated mesh: torus:M,N, disk:RINGS,SECTORS, annulus:RINGS,SECTORS or icosahedron.
    #[arg(long)]
    generate: Option<String>,
    /// Work on the double of the mesh.
    #[arg(long)]
    double: bool,
    #[arg(long)]
    degree: Option<usize>,
    /// Patch radius in edge hops.
    #[arg(long)]
    radius: Option<u32>,
    /// Patch overlap in edge hops.
    #[arg(long)]
    overlap: Option<u32>,
    /// Repeat to run several methods on the same input.
    #[arg(long, value_enum)]
    method: Vec<Method>,
    /// Seed for the cover and, unless --rhs-seed is given, the random right-hand side.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    rhs_seed: Option<u64>,
    /// Right-hand side cochain CSV (simplex_index,value).
    #[arg(long)]
    rhs: Option<PathBuf>,
    #[arg(long, value_enum)]
    execution: Option<ExecutionArg>,
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Common {
    fn resolve(&self) -> Result<RunConfig> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::load(path)?,
            None => RunConfig::default(),
        };
        if let Some(m) = &self.mesh {
            cfg.mesh = Some(m.clone());
            cfg.generate = None;
        }
        if let Some(g) = &self.generate {
            cfg.generate = Some(g.clone());
            cfg.mesh = None;
        }
        cfg.double |= self.double;
        if let Some(p) = self.degree {
            cfg.degree = p;
        }
        if let Some(r) = self.radius {
            cfg.solver.radius_hops = r;
        }
        if let Some(o) = self.overlap {
            cfg.solver.overlap_hops = o;
        }
        if !self.method.is_empty() {
            cfg.methods = self.method.clone();
        }
        if let Some(s) = self.seed {
            cfg.solver.rng_seed = s;
        }
        if self.rhs_seed.is_some() {
            cfg.rhs_seed = self.rhs_seed;
        }
        if let Some(r) = &self.rhs {
            cfg.rhs = Some(r.clone());
        }
        if let Some(e) = self.execution {
            cfg.solver.execution = match e {
                ExecutionArg::Sequential => Execution::Sequential,
                ExecutionArg::Parallel => Execution::Parallel,
            };
        }
        if let Some(d) = &self.out_dir {
            cfg.out_dir = Some(d.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn run(cli: Cli) -> Result<()> {
    let (cfg, out) = match &cli.command {
        Command::Betti { common, dump_basis } => {
            let cfg = common.resolve()?;
            let out = commands::betti(&cfg, *dump_basis)?;
            (cfg, out)
        }
        Command::Decompose { common } => {
            let cfg = common.resolve()?;
            let out = commands::decompose(&cfg)?;
            (cfg, out)
        }
        Command::Solve { common } => {
            let cfg = common.resolve()?;
            let out = commands::solve(&cfg)?;
            (cfg, out)
        }
        Command::Bench { common, sizes } => {
            let mut cfg = common.resolve()?;
            if let Some(s) = sizes {
                cfg.sizes = s.clone();
                cfg.validate()?;
            }
            let out = commands::bench(&cfg)?;
            (cfg, out)
        }
    };
    if let Some(dir) = &cfg.out_dir {
        for path in out.files.write(dir)? {
            eprintln!("wrote {}", path.display());
        }
    }
    std::io::stdout().write_all(out.stdout.as_bytes())?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
