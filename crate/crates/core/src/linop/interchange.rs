//! Plain-text matrix interchange.
//!
//! A matrix block is a `matrix <dim>` header followed by `dim` lines, each
//! holding the `dim` entries of one row as `re im` pairs. Values use
//! 17 significant digits so a written matrix parses back bit-exactly.
//! A labeled collection is a `collection <count>` header followed by
//! `label <name>` lines, each introducing one matrix block.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt::Write;

use faer::Mat;

use super::HermitianOperator;
use crate::c64;
use crate::error::{Error, Result};

pub fn write_matrix(out: &mut String, m: &HermitianOperator) {
    let d = m.dim();
    let _ = writeln!(out, "matrix {d}");
    for r in 0..d {
        let mut line = String::new();
        for c in 0..d {
            let z = m.entry(r, c);
            if c > 0 {
                line.push(' ');
            }
            let _ = write!(line, "{:.16e} {:.16e}", z.re, z.im);
        }
        out.push_str(&line);
        out.push('\n');
    }
}

pub fn write_collection(out: &mut String, items: &[(&str, &HermitianOperator)]) -> Result<()> {
    let _ = writeln!(out, "collection {}", items.len());
    for (label, m) in items {
        if label.is_empty() || label.contains(char::is_whitespace) {
            return Err(Error::usage(format!("label {label:?} must be a nonempty token")));
        }
        let _ = writeln!(out, "label {label}");
        write_matrix(out, m);
    }
    Ok(())
}

struct Lines<'a> {
    inner: core::iter::Filter<core::str::Lines<'a>, fn(&&str) -> bool>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        fn keep(l: &&str) -> bool {
            !l.trim().is_empty() && !l.trim_start().starts_with('#')
        }
        Lines {
            inner: text.lines().filter(keep as fn(&&str) -> bool),
        }
    }

    fn next(&mut self) -> Result<&'a str> {
        self.inner.next().ok_or_else(|| Error::usage("interchange text ends early"))
    }

    fn header(&mut self, keyword: &str) -> Result<&'a str> {
        let line = self.next()?;
        line.trim()
            .strip_prefix(keyword)
            .and_then(|rest| rest.strip_prefix(' '))
            .map(str::trim)
            .ok_or_else(|| Error::usage(format!("expected `{keyword} …`, found {line:?}")))
    }

    fn matrix(&mut self) -> Result<HermitianOperator> {
        let dim_text = self.header("matrix")?;
        let d: usize = dim_text
            .parse()
            .map_err(|_| Error::usage(format!("bad matrix dimension {dim_text:?}")))?;
        let mut m = Mat::<c64>::zeros(d, d);
        for r in 0..d {
            let values: Vec<f64> = self
                .next()?
                .split_whitespace()
                .map(|t| t.parse::<f64>().map_err(|_| Error::usage(format!("bad number {t:?}"))))
                .collect::<Result<_>>()?;
            if values.len() != 2 * d {
                return Err(Error::usage(format!("row {r} has {} numbers, expected {}", values.len(), 2 * d)));
            }
            for c in 0..d {
                m[(r, c)] = c64::new(values[2 * c], values[2 * c + 1]);
            }
        }
        HermitianOperator::new(m)
    }

    fn finish(&mut self) -> Result<()> {
        match self.inner.next() {
            None => Ok(()),
            Some(l) => Err(Error::usage(format!("trailing interchange text {l:?}"))),
        }
    }
}

pub fn read_matrix(text: &str) -> Result<HermitianOperator> {
    let mut lines = Lines::new(text);
    let m = lines.matrix()?;
    lines.finish()?;
    Ok(m)
}

pub fn read_collection(text: &str) -> Result<Vec<(String, HermitianOperator)>> {
    let mut lines = Lines::new(text);
    let count_text = lines.header("collection")?;
    let count: usize = count_text
        .parse()
        .map_err(|_| Error::usage(format!("bad collection size {count_text:?}")))?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let label = lines.header("label")?.to_string();
        out.push((label, lines.matrix()?));
    }
    lines.finish()?;
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    #[test]
    fn round_trip_is_exact() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(5);
        let a = crate::linop::random::hermitian(&mut rng, 5);
        let mut text = String::new();
        write_matrix(&mut text, &a);
        assert_eq!(read_matrix(&text).unwrap().max_deviation(&a), 0.0);
        let mut text = String::new();
        write_collection(&mut text, &[("x", &a), ("y", &a)]).unwrap();
        let back = read_collection(&text).unwrap();
        assert_eq!(back.len(), 2);
        assert_eq!(back[1].0, "y");
        assert_eq!(back[1].1.max_deviation(&a), 0.0);
    }

    #[test]
    fn malformed_text() {
        assert!(read_matrix("matrix 2\n1 0 0 0\n").is_err());
        assert!(read_matrix("matrix 1\n1 0 0\n").is_err());
        assert!(read_matrix("matrix 1\n1 0\nextra\n").is_err());
    }
}
