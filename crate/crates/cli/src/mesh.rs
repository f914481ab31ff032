use anyhow::{bail, Context, Result};
use raising_core::{
    generate_annulus, generate_disk, generate_torus, icosahedron, load_mesh_file,
    riemannian_double, SimplicialComplex,
};
use serde::Serialize;

use crate::config::RunConfig;

#[derive(Clone, Debug, Serialize)]
pub struct MeshInfo {
    pub source: String,
    pub doubled: bool,
    pub counts: Vec<usize>,
    pub euler_characteristic: i64,
    pub has_boundary: bool,
}

impl MeshInfo {
    pub fn new(source: String, doubled: bool, k: &SimplicialComplex) -> Self {
        Self {
            source,
            doubled,
            counts: k.counts(),
            euler_characteristic: k.euler_characteristic(),
            has_boundary: k.has_boundary(),
        }
    }
}

fn two_numbers(kind: &str, args: &str) -> Result<(usize, usize)> {
    let parts: Vec<&str> = args.split(',').collect();
    if parts.len() != 2 {
        bail!("generator {kind} expects two comma-separated integers, got {args:?}");
    }
    let num = |s: &str| {
        s.trim()
            .parse::<usize>()
            .with_context(|| format!("generator {kind}: {s:?} is not a non-negative integer"))
    };
    Ok((num(parts[0])?, num(parts[1])?))
}

/// `torus:M,N`, `disk:RINGS,SECTORS`, `annulus:RINGS,SECTORS` or `icosahedron`.
pub fn generate(spec: &str) -> Result<SimplicialComplex> {
    let (kind, args) = spec.split_once(':').unwrap_or((spec, ""));
    let k = match kind {
        "torus" => {
            let (m, n) = two_numbers(kind, args)?;
            generate_torus(m, n)?
        }
        "disk" => {
            let (r, s) = two_numbers(kind, args)?;
            generate_disk(r, s)?
        }
        "annulus" => {
            let (r, s) = two_numbers(kind, args)?;
            generate_annulus(r, s)?
        }
        "icosahedron" if args.is_empty() => icosahedron(),
        _ => bail!(
            "unknown generator {spec:?} (expected torus:M,N, disk:R,S, annulus:R,S or icosahedron)"
        ),
    };
    Ok(k)
}

pub fn load(cfg: &RunConfig) -> Result<(SimplicialComplex, MeshInfo)> {
    let (k, source) = match (&cfg.mesh, &cfg.generate) {
        (Some(path), None) => (
            load_mesh_file(path).with_context(|| format!("loading mesh {}", path.display()))?,
            path.display().to_string(),
        ),
        (None, Some(spec)) => (generate(spec)?, spec.clone()),
        (None, None) => bail!("no mesh given: use --mesh FILE or --generate SPEC"),
        (Some(_), Some(_)) => bail!("give either --mesh or --generate, not both"),
    };
    let k = if cfg.double {
        riemannian_double(&k).context("building the double")?.0
    } else {
        k
    };
    let info = MeshInfo::new(source, cfg.double, &k);
    Ok((k, info))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generator_specs() {
        assert_eq!(generate("torus:4,5").unwrap().counts(), vec![20, 60, 40]);
        assert_eq!(generate("icosahedron").unwrap().counts(), vec![12, 30, 20]);
        assert!(generate("disk:2,8").unwrap().has_boundary());
        assert!(generate("annulus:2,8").unwrap().has_boundary());
    }

    #[test]
    fn bad_generator_specs() {
        for spec in [
            "torus:4",
            "torus:a,b",
            "sphere:3,3",
            "icosahedron:1,2",
            "torus:2,9",
        ] {
            assert!(generate(spec).is_err(), "{spec}");
        }
    }
}
