//! Cochain CSV: header `simplex_index,value`, one row per simplex, values at
//! 17 significant digits so they round-trip exactly.

use std::fmt::Write as _;
use std::io::{BufRead, BufReader, Read, Write};

use crate::complex::SimplicialComplex;
use crate::dec::Cochain;
use crate::error::{Error, Result};

pub const HEADER: &str = "simplex_index,value";

pub fn format_value(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn cochain_to_csv(c: &Cochain) -> String {
    let mut out = String::with_capacity(32 * (c.len() + 1));
    out.push_str(HEADER);
    out.push('\n');
    for (i, v) in c.values().iter().enumerate() {
        let _ = writeln!(out, "{i},{}", format_value(*v));
    }
    out
}

pub fn write_cochain(mut w: impl Write, c: &Cochain) -> Result<()> {
    w.write_all(cochain_to_csv(c).as_bytes())?;
    Ok(())
}

/// Rows may come in any order but every simplex index must appear exactly once.
pub fn read_cochain(r: impl Read, complex: &SimplicialComplex, degree: usize) -> Result<Cochain> {
    if degree > complex.dim() {
        return Err(Error::DegreeOutOfRange {
            degree,
            min: 0,
            max: complex.dim(),
        });
    }
    let n = complex.n(degree);
    let mut values = vec![None; n];
    let mut lines = BufReader::new(r).lines().enumerate();
    match lines.next() {
        Some((_, Ok(h))) if h.trim() == HEADER => {}
        Some((_, Ok(h))) => {
            return Err(Error::Parse {
                line: 1,
                message: format!("expected header {HEADER:?}, found {h:?}"),
            })
        }
        Some((_, Err(e))) => return Err(e.into()),
        None => {
            return Err(Error::Parse {
                line: 0,
                message: "empty cochain file".into(),
            })
        }
    }
    for (i, line) in lines {
        let line = line?;
        let lineno = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let bad = |message: String| Error::Parse {
            line: lineno,
            message,
        };
        let (idx, val) = trimmed
            .split_once(',')
            .ok_or_else(|| bad(format!("expected `index,value`, found {trimmed:?}")))?;
        let idx: usize = idx
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad simplex index {idx:?}")))?;
        let val: f64 = val
            .trim()
            .parse()
            .map_err(|_| bad(format!("bad value {val:?}")))?;
        let slot = values
            .get_mut(idx)
            .ok_or_else(|| bad(format!("simplex index {idx} out of range (n = {n})")))?;
        if slot.replace(val).is_some() {
            return Err(bad(format!("duplicate simplex index {idx}")));
        }
    }
    let values: Vec<f64> = values
        .into_iter()
        .enumerate()
        .map(|(i, v)| {
            v.ok_or_else(|| Error::Parse {
                line: 0,
                message: format!("missing value for simplex {i}"),
            })
        })
        .collect::<Result<_>>()?;
    Cochain::from_values(complex, degree, values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::generate_torus;
    use crate::dec::Operators;

    #[test]
    fn round_trip_is_bit_exact() {
        let k = generate_torus(4, 5).unwrap();
        let ops = Operators::assemble(&k).unwrap();
        let mut c = ops.random(1, 9);
        c.values_mut()[0] = 1e-300;
        c.values_mut()[1] = -0.1;
        let text = cochain_to_csv(&c);
        let back = read_cochain(text.as_bytes(), &k, 1).unwrap();
        assert_eq!(
            back.values()
                .iter()
                .map(|x| x.to_bits())
                .collect::<Vec<_>>(),
            c.values().iter().map(|x| x.to_bits()).collect::<Vec<_>>()
        );
    }

    #[test]
    fn malformed_input() {
        let k = generate_torus(3, 3).unwrap();
        assert!(read_cochain("index,value\n".as_bytes(), &k, 0).is_err());
        assert!(read_cochain("simplex_index,value\n0,1\n".as_bytes(), &k, 0).is_err());
        let dup = format!("{HEADER}\n0,1\n0,2\n");
        assert!(matches!(
            read_cochain(dup.as_bytes(), &k, 0),
            Err(Error::Parse { line: 3, .. })
        ));
        let nan = format!("{HEADER}\n0,NaN\n");
        assert!(read_cochain(nan.as_bytes(), &k, 0).is_err());
    }
}
