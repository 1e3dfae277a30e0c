//! Text interchange formats.
//!
//! Vectors: `VEC n`, then `n` lines `re im`.
//! Matrices: `MAT m n nnz`, then `nnz` lines `i j re im`, 0-based.
//! Floats are written in shortest round-trip form.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::sampled_matrix::SampledMatrix;

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

struct Lines<'a> {
    inner: std::iter::Enumerate<std::str::Lines<'a>>,
}

impl<'a> Lines<'a> {
    fn new(text: &'a str) -> Self {
        Lines { inner: text.lines().enumerate() }
    }

    /// Next non-blank line as (1-based number, fields).
    fn next_fields(&mut self) -> Option<(usize, Vec<&'a str>)> {
        for (i, l) in self.inner.by_ref() {
            let f: Vec<&str> = l.split_whitespace().collect();
            if !f.is_empty() {
                return Some((i + 1, f));
            }
        }
        None
    }
}

fn field<T: std::str::FromStr>(line: usize, s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| parse_err(line, format!("bad {what} {s:?}")))
}

fn complex(line: usize, re: &str, im: &str) -> Result<Complex64> {
    let z = Complex64::new(field(line, re, "real part")?, field(line, im, "imaginary part")?);
    if !(z.re.is_finite() && z.im.is_finite()) {
        return Err(parse_err(line, "non-finite value"));
    }
    Ok(z)
}

pub fn parse_vector(text: &str) -> Result<Vec<Complex64>> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next_fields().ok_or_else(|| parse_err(1, "empty file"))?;
    if head.len() != 2 || head[0] != "VEC" {
        return Err(parse_err(ln, "expected header `VEC n`"));
    }
    let n: usize = field(ln, head[1], "length")?;
    let mut out = Vec::with_capacity(n);
    for _ in 0..n {
        let (ln, f) = lines
            .next_fields()
            .ok_or_else(|| parse_err(ln, format!("expected {n} entries, found {}", out.len())))?;
        if f.len() != 2 {
            return Err(parse_err(ln, "expected `re im`"));
        }
        out.push(complex(ln, f[0], f[1])?);
    }
    if let Some((ln, _)) = lines.next_fields() {
        return Err(parse_err(ln, "trailing data"));
    }
    Ok(out)
}

pub fn format_vector(v: &[Complex64]) -> String {
    let mut s = format!("VEC {}\n", v.len());
    for z in v {
        s.push_str(&format!("{} {}\n", z.re, z.im));
    }
    s
}

/// Parsed matrix: dimensions and `(i, j, value)` triples.
pub type Triples = ((usize, usize), Vec<(usize, usize, Complex64)>);

pub fn parse_matrix(text: &str) -> Result<Triples> {
    let mut lines = Lines::new(text);
    let (ln, head) = lines.next_fields().ok_or_else(|| parse_err(1, "empty file"))?;
    if head.len() != 4 || head[0] != "MAT" {
        return Err(parse_err(ln, "expected header `MAT m n nnz`"));
    }
    let m: usize = field(ln, head[1], "row count")?;
    let n: usize = field(ln, head[2], "column count")?;
    let nnz: usize = field(ln, head[3], "entry count")?;
    let mut out = Vec::with_capacity(nnz);
    for _ in 0..nnz {
        let (ln, f) = lines
            .next_fields()
            .ok_or_else(|| parse_err(ln, format!("expected {nnz} entries, found {}", out.len())))?;
        if f.len() != 4 {
            return Err(parse_err(ln, "expected `i j re im`"));
        }
        let i: usize = field(ln, f[0], "row index")?;
        let j: usize = field(ln, f[1], "column index")?;
        out.push((i, j, complex(ln, f[2], f[3])?));
    }
    if let Some((ln, _)) = lines.next_fields() {
        return Err(parse_err(ln, "trailing data"));
    }
    Ok(((m, n), out))
}

/// Writes every nonzero entry of `a`.
pub fn format_matrix(a: &SampledMatrix) -> String {
    let (m, n) = a.dims();
    let mut body = String::new();
    let mut nnz = 0;
    for i in 0..m {
        for (j, z) in a.row_values(i).iter().enumerate() {
            if z.norm_sqr() != 0.0 {
                nnz += 1;
                body.push_str(&format!("{i} {j} {} {}\n", z.re, z.im));
            }
        }
    }
    format!("MAT {m} {n} {nnz}\n{body}")
}

pub fn read_vector(path: &Path) -> Result<Vec<Complex64>> {
    parse_vector(&fs::read_to_string(path)?)
}

pub fn read_matrix(path: &Path, with_transpose: bool) -> Result<SampledMatrix> {
    let (dims, entries) = parse_matrix(&fs::read_to_string(path)?)?;
    SampledMatrix::build(&entries, dims, with_transpose)
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut f = fs::File::create(path)?;
    f.write_all(text.as_bytes())?;
    Ok(())
}
