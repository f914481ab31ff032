use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::BufReader;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use raising_core::csv::{cochain_to_csv, format_value, read_cochain};
use raising_core::harmonic::{SpectrumSummary, DEFAULT_NULL_TOL};
use raising_core::solver::{
    coarse_solve, hodge_decompose, solve_on_domain, DecompositionDefects, DirectSolver,
    COMPATIBILITY_TOL,
};
use raising_core::{
    build_cover, generate_torus, harmonic_basis, Cochain, Error, HarmonicBasis, Operators,
    RaisingStepsReport, SimplicialComplex, Solver,
};
use serde::Serialize;

use crate::config::{Method, RunConfig};
use crate::mesh::{self, MeshInfo};
use crate::output::{to_json, Outputs};

/// What a command prints on stdout, plus the files it wants written.
pub struct CommandOutput {
    pub stdout: String,
    pub files: Outputs,
}

#[derive(Clone, Debug, Serialize)]
pub struct RhsInfo {
    pub source: String,
    pub norm: f64,
    /// `‖H(ω)‖/‖ω‖` of the right-hand side as read or generated.
    pub harmonic_leak: f64,
    pub projected: bool,
}

fn elapsed_ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// The right-hand side from CSV (used as given) or from the seed. A random
/// cochain has an O(1) harmonic part, so with `project` it is moved onto H^⊥.
fn rhs(
    cfg: &RunConfig,
    k: &SimplicialComplex,
    ops: &Operators,
    basis: Option<&HarmonicBasis>,
) -> Result<(Cochain, RhsInfo)> {
    let p = cfg.degree;
    ops.check_degree(p)?;
    let (omega, source, projected) = match &cfg.rhs {
        Some(path) => {
            let file = File::open(path).with_context(|| format!("opening {}", path.display()))?;
            let c = read_cochain(BufReader::new(file), k, p)
                .with_context(|| format!("reading {}", path.display()))?;
            (c, path.display().to_string(), false)
        }
        None => {
            let seed = cfg.rhs_seed();
            let raw = ops.random(p, seed);
            match basis {
                Some(b) => (
                    b.remove_harmonic(ops, &raw)?,
                    format!("random seed {seed}"),
                    true,
                ),
                None => (raw, format!("random seed {seed}"), false),
            }
        }
    };
    let harmonic_leak = match basis {
        Some(b) => b.relative_leak(ops, &omega)?,
        None => 0.0,
    };
    let info = RhsInfo {
        source,
        norm: ops.norm(&omega),
        harmonic_leak,
        projected,
    };
    Ok((omega, info))
}

#[derive(Serialize)]
struct BettiReport {
    mesh: MeshInfo,
    betti: Vec<usize>,
    spectra: Vec<SpectrumSummary>,
}

pub fn betti(cfg: &RunConfig, dump_basis: bool) -> Result<CommandOutput> {
    let (k, info) = mesh::load(cfg)?;
    let ops = Operators::assemble(&k)?;
    let mut files = Outputs::default();
    let mut betti = Vec::new();
    let mut spectra = Vec::new();
    for p in 0..=k.dim() {
        let basis = harmonic_basis(&ops, p, DEFAULT_NULL_TOL)
            .with_context(|| format!("harmonic forms of degree {p}"))?;
        if dump_basis {
            for (j, e) in basis.vectors().iter().enumerate() {
                files.add(format!("harmonic-p{p}-{j}.csv"), cochain_to_csv(e));
            }
        }
        betti.push(basis.dim());
        spectra.push(basis.spectrum().clone());
    }
    let report = BettiReport {
        mesh: info,
        betti,
        spectra,
    };
    files.add_json("betti.json", &report)?;
    Ok(CommandOutput {
        stdout: to_json(&report)?,
        files,
    })
}

#[derive(Serialize)]
struct ComponentNorms {
    harmonic: f64,
    exact: f64,
    coexact: f64,
}

#[derive(Serialize)]
struct DecomposeReport {
    mesh: MeshInfo,
    degree: usize,
    rhs: RhsInfo,
    harmonic_dim: usize,
    norms: ComponentNorms,
    defects: DecompositionDefects,
    cover: raising_core::cover::CoverSummary,
    raising_steps: RaisingStepsReport,
}

fn require_closed(k: &SimplicialComplex, what: &str) -> Result<()> {
    if k.has_boundary() {
        bail!("{what} needs a closed mesh; this one has boundary (add --double to work on its double)");
    }
    Ok(())
}

pub fn decompose(cfg: &RunConfig) -> Result<CommandOutput> {
    let (k, info) = mesh::load(cfg)?;
    require_closed(&k, "decompose")?;
    let ops = Operators::assemble(&k)?;
    ops.check_degree(cfg.degree)?;
    let basis = harmonic_basis(&ops, cfg.degree, DEFAULT_NULL_TOL)?;
    let (omega, rhs_info) = rhs(cfg, &k, &ops, None)?;
    let rhs_info = RhsInfo {
        harmonic_leak: basis.relative_leak(&ops, &omega)?,
        ..rhs_info
    };
    let s = &cfg.solver;
    let cover = build_cover(&k, s.radius_hops, s.overlap_hops, s.rng_seed)?;
    let solver = Solver::new(&ops, &cover, &basis, s)?;
    let dec = hodge_decompose(&solver, &omega)?;

    let report = DecomposeReport {
        mesh: info,
        degree: cfg.degree,
        rhs: rhs_info,
        harmonic_dim: basis.dim(),
        norms: ComponentNorms {
            harmonic: ops.norm(&dec.harmonic),
            exact: ops.norm(&dec.exact),
            coexact: ops.norm(&dec.coexact),
        },
        defects: dec.defects,
        cover: cover.summary(&ops),
        raising_steps: dec.report,
    };
    let mut files = Outputs::default();
    files.add("harmonic.csv", cochain_to_csv(&dec.harmonic));
    files.add("exact.csv", cochain_to_csv(&dec.exact));
    files.add("coexact.csv", cochain_to_csv(&dec.coexact));
    files.add("potential.csv", cochain_to_csv(&dec.potential));
    files.add_json("decompose.json", &report)?;
    Ok(CommandOutput {
        stdout: to_json(&report)?,
        files,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct MethodReport {
    pub method: Method,
    /// `‖Δv − Pω‖/‖ω‖` with `P` the projection onto H^⊥.
    pub final_residual: f64,
    /// Raising steps taken, CG iterations for `coarse-only`, zero for `direct`.
    pub iterations: usize,
    pub wall_ms: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub raising_steps: Option<RaisingStepsReport>,
}

fn check_compatible(ops: &Operators, basis: &HarmonicBasis, omega: &Cochain) -> Result<()> {
    let leak = basis.relative_leak(ops, omega)?;
    if leak > COMPATIBILITY_TOL {
        return Err(Error::CompatibilityViolation {
            relative_leak: leak,
        }
        .into());
    }
    Ok(())
}

fn run_method(
    method: Method,
    k: &SimplicialComplex,
    ops: &Operators,
    basis: &HarmonicBasis,
    omega: &Cochain,
    cfg: &RunConfig,
) -> Result<(Cochain, MethodReport)> {
    check_compatible(ops, basis, omega)?;
    let s = &cfg.solver;
    let t = Instant::now();
    let (v, iterations, raising) = match method {
        Method::RaisingSteps => {
            let cover = build_cover(k, s.radius_hops, s.overlap_hops, s.rng_seed)?;
            let sol = Solver::new(ops, &cover, basis, s)?.solve_with_threshold(omega)?;
            let steps = sol.report.steps.len().saturating_sub(1);
            (sol.v, steps, Some(sol.report))
        }
        Method::CoarseOnly => {
            let target = basis.remove_harmonic(ops, omega)?;
            let c = coarse_solve(ops, basis, &target, s)?;
            (c.w, c.iterations, None)
        }
        Method::Direct => (DirectSolver::new(ops, basis)?.solve(omega)?, 0, None),
    };
    let wall_ms = elapsed_ms(t);
    let target = basis.remove_harmonic(ops, omega)?;
    let res = ops.norm(&(&ops.apply_laplacian(&v)? - &target));
    let n = ops.norm(omega);
    let report = MethodReport {
        method,
        final_residual: if n == 0.0 { res } else { res / n },
        iterations,
        wall_ms,
        raising_steps: raising,
    };
    Ok((v, report))
}

#[derive(Serialize)]
struct SolveReport {
    mesh: MeshInfo,
    degree: usize,
    rhs: RhsInfo,
    harmonic_dim: usize,
    methods: Vec<MethodReport>,
    /// `‖v_m − v_direct‖/‖v_direct‖` for every other method `m`, when `direct` ran.
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    discrepancy_vs_direct: BTreeMap<&'static str, f64>,
}

#[derive(Serialize)]
struct DomainSolveReport {
    mesh: MeshInfo,
    degree: usize,
    rhs: RhsInfo,
    route: &'static str,
    double_counts: Vec<usize>,
    metrics: raising_core::solver::DomainMetrics,
    raising_steps: RaisingStepsReport,
}

fn sorted_methods(cfg: &RunConfig) -> Vec<Method> {
    let mut m = cfg.methods.clone();
    m.sort();
    m.dedup();
    m
}

pub fn solve(cfg: &RunConfig) -> Result<CommandOutput> {
    let (k, info) = mesh::load(cfg)?;
    if k.has_boundary() {
        return solve_domain(cfg, &k, info);
    }
    let ops = Operators::assemble(&k)?;
    ops.check_degree(cfg.degree)?;
    let basis = harmonic_basis(&ops, cfg.degree, DEFAULT_NULL_TOL)?;
    let (omega, rhs_info) = rhs(cfg, &k, &ops, Some(&basis))?;

    let mut files = Outputs::default();
    let mut reports = Vec::new();
    let mut solutions = Vec::new();
    for method in sorted_methods(cfg) {
        let (v, report) = run_method(method, &k, &ops, &basis, &omega, cfg)
            .with_context(|| format!("method {}", method.name()))?;
        files.add(
            format!("solution-{}.csv", method.name()),
            cochain_to_csv(&v),
        );
        solutions.push((method, v));
        reports.push(report);
    }
    let mut discrepancy = BTreeMap::new();
    if let Some((_, vd)) = solutions.iter().find(|(m, _)| *m == Method::Direct) {
        let nd = ops.norm(vd);
        for (m, v) in solutions.iter().filter(|(m, _)| *m != Method::Direct) {
            let diff = ops.norm(&(v - vd));
            discrepancy.insert(m.name(), if nd == 0.0 { diff } else { diff / nd });
        }
    }
    let report = SolveReport {
        mesh: info,
        degree: cfg.degree,
        rhs: rhs_info,
        harmonic_dim: basis.dim(),
        methods: reports,
        discrepancy_vs_direct: discrepancy,
    };
    files.add_json("solve.json", &report)?;
    Ok(CommandOutput {
        stdout: to_json(&report)?,
        files,
    })
}

fn solve_domain(cfg: &RunConfig, k: &SimplicialComplex, info: MeshInfo) -> Result<CommandOutput> {
    if sorted_methods(cfg) != [Method::RaisingSteps] {
        bail!("meshes with boundary are solved through their double with raising-steps only");
    }
    let ops = Operators::assemble(k)?;
    let (omega, rhs_info) = rhs(cfg, k, &ops, None)?;
    let sol = solve_on_domain(k, &omega, &cfg.solver)?;
    let report = DomainSolveReport {
        mesh: info,
        degree: cfg.degree,
        rhs: rhs_info,
        route: "double",
        double_counts: sol.double.counts(),
        metrics: sol.metrics,
        raising_steps: sol.report,
    };
    let mut files = Outputs::default();
    files.add("solution-raising-steps.csv", cochain_to_csv(&sol.u));
    files.add_json("solve.json", &report)?;
    Ok(CommandOutput {
        stdout: to_json(&report)?,
        files,
    })
}

pub const BENCH_HEADER: &str = "mesh,n_p,method,wall_ms,iterations,final_residual";

pub fn bench(cfg: &RunConfig) -> Result<CommandOutput> {
    let mut table = String::from(BENCH_HEADER);
    table.push('\n');
    let p = cfg.degree;
    for &m in &cfg.sizes {
        let k = generate_torus(m, m)?;
        let ops = Operators::assemble(&k)?;
        ops.check_degree(p)?;
        let basis = harmonic_basis(&ops, p, DEFAULT_NULL_TOL)?;
        let (omega, _) = rhs(
            &RunConfig {
                rhs: None,
                ..cfg.clone()
            },
            &k,
            &ops,
            Some(&basis),
        )?;
        for method in sorted_methods(cfg) {
            let (_, r) = run_method(method, &k, &ops, &basis, &omega, cfg)
                .with_context(|| format!("torus:{m},{m} method {}", method.name()))?;
            let _ = writeln!(
                table,
                "torus:{m}x{m},{},{},{:.3},{},{}",
                ops.n(p),
                method.name(),
                r.wall_ms,
                r.iterations,
                format_value(r.final_residual)
            );
        }
    }
    let mut files = Outputs::default();
    files.add("bench.csv", table.clone());
    Ok(CommandOutput {
        stdout: table,
        files,
    })
}
