//! ASCII OFF and OBJ triangle-mesh ingestion.

use std::io::Read;
use std::path::Path;

use super::SimplicialComplex;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

impl MeshFormat {
    pub fn from_path(path: &Path) -> Option<Self> {
        match path.extension()?.to_str()?.to_ascii_lowercase().as_str() {
            "off" => Some(Self::Off),
            "obj" => Some(Self::Obj),
            _ => None,
        }
    }
}

pub fn load_mesh(mut source: impl Read, format: MeshFormat) -> Result<SimplicialComplex> {
    let mut text = String::new();
    source.read_to_string(&mut text).map_err(|e| Error::Parse {
        line: 0,
        message: format!("unreadable stream: {e}"),
    })?;
    let (coords, faces) = match format {
        MeshFormat::Off => parse_off(&text)?,
        MeshFormat::Obj => parse_obj(&text)?,
    };
    SimplicialComplex::from_top_simplices(coords, faces).map_err(|e| match e {
        Error::InvalidParameter(message) => Error::Parse { line: 0, message },
        other => other,
    })
}

pub fn load_mesh_file(path: &Path) -> Result<SimplicialComplex> {
    let format = MeshFormat::from_path(path).ok_or_else(|| {
        Error::InvalidParameter(format!("unknown mesh extension: {}", path.display()))
    })?;
    load_mesh(std::fs::File::open(path)?, format)
}

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Whitespace tokens tagged with their 1-based line, comments stripped.
fn tokens(text: &str) -> Vec<(usize, &str)> {
    text.lines()
        .enumerate()
        .flat_map(|(i, line)| {
            let body = line.split('#').next().unwrap_or("");
            body.split_whitespace().map(move |t| (i + 1, t))
        })
        .collect()
}

fn parse_off(text: &str) -> Result<(Vec<[f64; 3]>, Vec<Vec<usize>>)> {
    let toks = tokens(text);
    let mut it = toks.into_iter().peekable();
    match it.next() {
        Some((_, "OFF")) => {}
        Some((line, t)) => {
            return Err(parse_err(line, format!("expected OFF header, found {t:?}")))
        }
        None => return Err(parse_err(0, "empty stream")),
    }
    let mut next_num = |what: &str| -> Result<(usize, &str)> {
        it.next()
            .ok_or_else(|| parse_err(0, format!("unexpected end of stream reading {what}")))
    };
    let count = |(line, t): (usize, &str), what: &str| -> Result<usize> {
        t.parse::<usize>()
            .map_err(|_| parse_err(line, format!("bad {what} {t:?}")))
    };
    let nv = count(next_num("vertex count")?, "vertex count")?;
    let nf = count(next_num("face count")?, "face count")?;
    let _ne = count(next_num("edge count")?, "edge count")?;

    let mut coords = Vec::with_capacity(nv);
    for _ in 0..nv {
        let mut c = [0.0; 3];
        for x in &mut c {
            let (line, t) = next_num("vertex coordinate")?;
            *x = t
                .parse::<f64>()
                .map_err(|_| parse_err(line, format!("bad coordinate {t:?}")))?;
        }
        coords.push(c);
    }

    // Faces are line-oriented so trailing colour values can be skipped.
    let mut faces = Vec::with_capacity(nf);
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());
    // header + counts + vertices occupy a prefix of non-empty lines
    let mut consumed_tokens = 0usize;
    let header_tokens = 1 + 3 + 3 * nv;
    for (_, l) in lines.by_ref() {
        consumed_tokens += l.split_whitespace().count();
        if consumed_tokens >= header_tokens {
            break;
        }
    }
    if consumed_tokens != header_tokens {
        return Err(parse_err(
            0,
            "header and vertex block must end on a line boundary",
        ));
    }
    for _ in 0..nf {
        let (line, l) = lines
            .next()
            .ok_or_else(|| parse_err(0, "unexpected end of stream reading faces"))?;
        let mut parts = l.split_whitespace();
        let k: usize = parts
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| parse_err(line, "bad face vertex count"))?;
        if k != 3 {
            return Err(parse_err(
                line,
                format!("face with {k} vertices; only triangles are supported"),
            ));
        }
        let mut face = Vec::with_capacity(3);
        for _ in 0..3 {
            let t = parts
                .next()
                .ok_or_else(|| parse_err(line, "face is missing vertex indices"))?;
            let v: usize = t
                .parse()
                .map_err(|_| parse_err(line, format!("bad vertex index {t:?}")))?;
            if v >= nv {
                return Err(parse_err(line, format!("vertex index {v} out of range")));
            }
            face.push(v);
        }
        faces.push(face);
    }
    if faces.is_empty() {
        return Err(parse_err(0, "mesh has no faces"));
    }
    Ok((coords, faces))
}

fn parse_obj(text: &str) -> Result<(Vec<[f64; 3]>, Vec<Vec<usize>>)> {
    let mut coords = Vec::new();
    let mut faces = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let body = raw.split('#').next().unwrap_or("");
        let mut parts = body.split_whitespace();
        match parts.next() {
            Some("v") => {
                let vals: Vec<f64> = parts
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| parse_err(line, format!("bad coordinate {t:?}")))
                    })
                    .collect::<Result<_>>()?;
                if vals.len() < 3 {
                    return Err(parse_err(line, "vertex needs three coordinates"));
                }
                coords.push([vals[0], vals[1], vals[2]]);
            }
            Some("f") => {
                let refs: Vec<&str> = parts.collect();
                if refs.len() != 3 {
                    return Err(parse_err(
                        line,
                        format!(
                            "face with {} vertices; only triangles are supported",
                            refs.len()
                        ),
                    ));
                }
                let mut face = Vec::with_capacity(3);
                for r in refs {
                    let head = r.split('/').next().unwrap_or("");
                    let idx: i64 = head
                        .parse()
                        .map_err(|_| parse_err(line, format!("bad vertex reference {r:?}")))?;
                    let n = coords.len() as i64;
                    let resolved = match idx {
                        0 => return Err(parse_err(line, "vertex reference 0 is invalid")),
                        i if i > 0 => i - 1,
                        i => n + i,
                    };
                    if resolved < 0 || resolved >= n {
                        return Err(parse_err(
                            line,
                            format!("vertex reference {idx} out of range"),
                        ));
                    }
                    face.push(resolved as usize);
                }
                faces.push(face);
            }
            _ => {}
        }
    }
    if faces.is_empty() {
        return Err(parse_err(0, "mesh has no faces"));
    }
    Ok((coords, faces))
}

#[cfg(test)]
mod tests {
    use super::*;

    const TRIANGLE_OFF: &str = "OFF\n# single triangle\n3 1 0\n0 0 0\n1 0 0\n0 1 0\n3 0 1 2\n";

    #[test]
    fn off_single_triangle() {
        let k = load_mesh(TRIANGLE_OFF.as_bytes(), MeshFormat::Off).unwrap();
        assert_eq!(k.counts(), vec![3, 3, 1]);
    }

    #[test]
    fn off_rejects_quads() {
        let text = "OFF\n4 1 0\n0 0 0\n1 0 0\n1 1 0\n0 1 0\n4 0 1 2 3\n";
        let err = load_mesh(text.as_bytes(), MeshFormat::Off).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 7, .. }), "{err}");
    }

    #[test]
    fn off_rejects_garbage() {
        assert!(matches!(
            load_mesh("PLY\n".as_bytes(), MeshFormat::Off),
            Err(Error::Parse { .. })
        ));
        let truncated = "OFF\n3 1 0\n0 0 0\n1 0 0\n";
        assert!(matches!(
            load_mesh(truncated.as_bytes(), MeshFormat::Off),
            Err(Error::Parse { .. })
        ));
    }

    #[test]
    fn obj_with_slashes_and_negative_indices() {
        let text = "o tri\nv 0 0 0\nv 1 0 0\nv 0 1 0\nv 1 1 0\nvt 0 0\nf 1/1 2/1 3/1\nf -3 -1 -2\n";
        let k = load_mesh(text.as_bytes(), MeshFormat::Obj).unwrap();
        assert_eq!(k.counts(), vec![4, 5, 2]);
        assert!(k.is_orientable());
    }

    #[test]
    fn obj_rejects_polygons() {
        let text = "v 0 0 0\nv 1 0 0\nv 1 1 0\nv 0 1 0\nf 1 2 3 4\n";
        let err = load_mesh(text.as_bytes(), MeshFormat::Obj).unwrap_err();
        assert!(matches!(err, Error::Parse { line: 5, .. }));
    }

    #[test]
    fn non_manifold_survives_parse() {
        let text = "OFF\n5 3 0\n0 0 0\n1 0 0\n0 1 0\n0 -1 0\n0 0 1\n3 0 1 2\n3 0 1 3\n3 0 1 4\n";
        let err = load_mesh(text.as_bytes(), MeshFormat::Off).unwrap_err();
        assert!(matches!(err, Error::NonManifold { .. }));
    }
}
