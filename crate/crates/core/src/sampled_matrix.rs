//! Row-norm tree over per-row sum trees: length-squared sampling access to a matrix.

use std::sync::OnceLock;

use num_complex::Complex64;
use rand::Rng;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::ledger::{LedgerSnapshot, QueryLedger};
use crate::sampled_vector::SampledVector;

/// One orientation of the two-level structure: a tree per row plus a tree
/// whose leaf `i` holds `‖row i‖`.
#[derive(Debug, Clone)]
struct Orientation {
    lines: Vec<SampledVector>,
    norms: SampledVector,
}

impl Orientation {
    fn from_lines(lines: Vec<SampledVector>) -> Result<Self> {
        let norms: Vec<Complex64> = lines
            .iter()
            .map(|l| Complex64::new(l.norm(), 0.0))
            .collect();
        Ok(Orientation {
            norms: SampledVector::build(&norms)?,
            lines,
        })
    }

    fn write(&mut self, line: usize, pos: usize, value: Complex64) -> Result<()> {
        self.lines[line].write(pos, value)?;
        let norm = self.lines[line].norm();
        self.norms.write(line, Complex64::new(norm, 0.0))
    }
}

/// An `m × n` complex matrix supporting the row-sampling access model:
/// draw a row with probability `‖A(i,·)‖² / ‖A‖_F²`, draw a column within a
/// row with probability `|A(i,j)|² / ‖A(i,·)‖²`, and read entries and norms.
///
/// Every access through the public query methods is recorded in the
/// matrix's [`QueryLedger`]. When built with `with_transpose`, the same
/// access is also available for columns.
#[derive(Debug)]
pub struct SampledMatrix {
    rows: usize,
    cols: usize,
    by_row: Orientation,
    by_col: Option<Orientation>,
    ledger: QueryLedger,
    digest: OnceLock<String>,
}

impl SampledMatrix {
    /// Build from a list of `(i, j, value)` triples; missing entries are zero.
    pub fn build(
        entries: &[(usize, usize, Complex64)],
        dims: (usize, usize),
        with_transpose: bool,
    ) -> Result<Self> {
        let (m, n) = dims;
        if m == 0 || n == 0 {
            return Err(Error::EmptyVector);
        }
        let mut dense = vec![Complex64::new(0.0, 0.0); m * n];
        let mut seen = vec![false; m * n];
        for &(i, j, v) in entries {
            if i >= m {
                return Err(Error::index(i, m));
            }
            if j >= n {
                return Err(Error::index(j, n));
            }
            if std::mem::replace(&mut seen[i * n + j], true) {
                return Err(Error::DuplicateEntry { row: i, col: j });
            }
            dense[i * n + j] = v;
        }
        Self::from_row_major(&dense, dims, with_transpose)
    }

    pub fn from_row_major(
        data: &[Complex64],
        dims: (usize, usize),
        with_transpose: bool,
    ) -> Result<Self> {
        let (m, n) = dims;
        if data.len() != m * n {
            return Err(Error::DimensionMismatch {
                expected: m * n,
                got: data.len(),
            });
        }
        if m == 0 || n == 0 {
            return Err(Error::EmptyVector);
        }
        let rows = data
            .chunks(n)
            .map(SampledVector::build)
            .collect::<Result<Vec<_>>>()?;
        let by_col = if with_transpose {
            let cols = (0..n)
                .map(|j| {
                    let col: Vec<Complex64> = (0..m).map(|i| data[i * n + j]).collect();
                    SampledVector::build(&col)
                })
                .collect::<Result<Vec<_>>>()?;
            Some(Orientation::from_lines(cols)?)
        } else {
            None
        };
        Ok(SampledMatrix {
            rows: m,
            cols: n,
            by_row: Orientation::from_lines(rows)?,
            by_col,
            ledger: QueryLedger::new(),
            digest: OnceLock::new(),
        })
    }

    pub fn from_dense(a: &nalgebra::DMatrix<Complex64>, with_transpose: bool) -> Result<Self> {
        let (m, n) = a.shape();
        let data: Vec<Complex64> = (0..m)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .map(|(i, j)| a[(i, j)])
            .collect();
        Self::from_row_major(&data, (m, n), with_transpose)
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn has_transpose(&self) -> bool {
        self.by_col.is_some()
    }

    pub fn ledger(&self) -> &QueryLedger {
        &self.ledger
    }

    pub fn ledger_snapshot(&self) -> LedgerSnapshot {
        self.ledger.snapshot()
    }

    fn check(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.rows {
            return Err(Error::index(i, self.rows));
        }
        if j >= self.cols {
            return Err(Error::index(j, self.cols));
        }
        Ok(())
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> Result<Complex64> {
        self.check(i, j)?;
        self.ledger.record_entry();
        Ok(self.by_row.lines[i].values()[j])
    }

    pub fn row_norm(&self, i: usize) -> Result<f64> {
        if i >= self.rows {
            return Err(Error::index(i, self.rows));
        }
        self.ledger.record_norm();
        Ok(self.by_row.lines[i].norm())
    }

    pub fn frobenius_sq(&self) -> f64 {
        self.ledger.record_norm();
        self.by_row.norms.norm_sq()
    }

    /// Row `i` with probability `‖A(i,·)‖² / ‖A‖_F²`.
    #[inline]
    pub fn sample_row<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let i = self.by_row.norms.sample(rng)?;
        self.ledger.record_sample();
        Ok(i)
    }

    /// Column `j` with probability `|A(i,j)|² / ‖A(i,·)‖²`.
    #[inline]
    pub fn sample_in_row<R: Rng + ?Sized>(&self, i: usize, rng: &mut R) -> Result<usize> {
        if i >= self.rows {
            return Err(Error::index(i, self.rows));
        }
        let j = self.by_row.lines[i].sample(rng)?;
        self.ledger.record_sample();
        Ok(j)
    }

    fn transpose(&self) -> Result<&Orientation> {
        self.by_col.as_ref().ok_or(Error::TransposeUnavailable)
    }

    pub fn col_norm(&self, j: usize) -> Result<f64> {
        let t = self.transpose()?;
        if j >= self.cols {
            return Err(Error::index(j, self.cols));
        }
        self.ledger.record_norm();
        Ok(t.lines[j].norm())
    }

    /// Column `j` with probability `‖A(·,j)‖² / ‖A‖_F²`.
    pub fn sample_col<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<usize> {
        let j = self.transpose()?.norms.sample(rng)?;
        self.ledger.record_sample();
        Ok(j)
    }

    /// Row `i` with probability `|A(i,j)|² / ‖A(·,j)‖²`.
    pub fn sample_in_col<R: Rng + ?Sized>(&self, j: usize, rng: &mut R) -> Result<usize> {
        let t = self.transpose()?;
        if j >= self.cols {
            return Err(Error::index(j, self.cols));
        }
        let i = t.lines[j].sample(rng)?;
        self.ledger.record_sample();
        Ok(i)
    }

    /// Overwrite one entry, keeping every tree (and the transpose) consistent.
    pub fn write(&mut self, i: usize, j: usize, value: Complex64) -> Result<()> {
        self.check(i, j)?;
        self.by_row.write(i, j, value)?;
        if let Some(t) = self.by_col.as_mut() {
            t.write(j, i, value)?;
        }
        self.digest = OnceLock::new();
        Ok(())
    }

    /// Unmetered view of a row, for oracle and reporting code.
    pub fn row_values(&self, i: usize) -> &[Complex64] {
        self.by_row.lines[i].values()
    }

    /// Unmetered `‖A(i,·)‖²` as stored in the row-norm tree.
    pub fn row_norm_sq_unmetered(&self, i: usize) -> f64 {
        self.by_row.norms.weight(i)
    }

    pub fn to_dense(&self) -> nalgebra::DMatrix<Complex64> {
        nalgebra::DMatrix::from_fn(self.rows, self.cols, |i, j| self.by_row.lines[i].values()[j])
    }

    /// SHA-256 over the dimensions and the bit patterns of every entry.
    pub fn digest(&self) -> &str {
        self.digest.get_or_init(|| {
            let mut h = Sha256::new();
            h.update((self.rows as u64).to_le_bytes());
            h.update((self.cols as u64).to_le_bytes());
            for row in &self.by_row.lines {
                for v in row.values() {
                    h.update(v.re.to_bits().to_le_bytes());
                    h.update(v.im.to_bits().to_le_bytes());
                }
            }
            hex(&h.finalize())
        })
    }

    /// Largest relative mismatch between the row-norm tree and the rows.
    pub fn consistency_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        let mut fro = 0.0;
        for (i, row) in self.by_row.lines.iter().enumerate() {
            let direct: f64 = row.values().iter().map(|v| v.norm_sqr()).sum();
            fro += direct;
            let stored = self.by_row.norms.weight(i);
            worst = worst.max((stored - direct).abs() / direct.max(f64::MIN_POSITIVE));
        }
        let root = self.by_row.norms.norm_sq();
        worst.max((root - fro).abs() / fro.max(f64::MIN_POSITIVE))
    }
}

pub(crate) fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamSplitter;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn diag34() -> SampledMatrix {
        SampledMatrix::build(&[(0, 0, c(3.0, 0.0)), (1, 1, c(4.0, 0.0))], (2, 2), true).unwrap()
    }

    #[test]
    fn identity_and_diag_probabilities() {
        let id = SampledMatrix::build(&[(0, 0, c(1.0, 0.0)), (1, 1, c(1.0, 0.0))], (2, 2), false)
            .unwrap();
        assert_eq!(id.frobenius_sq(), 2.0);
        assert_eq!(id.row_norm(0).unwrap(), 1.0);
        assert_eq!(id.entry(0, 0).unwrap(), c(1.0, 0.0));
        assert_eq!(id.entry(0, 1).unwrap(), c(0.0, 0.0));

        let a = diag34();
        assert_eq!(a.frobenius_sq(), 25.0);
        assert_eq!(a.row_norm(0).unwrap(), 3.0);
        assert_eq!(a.entry(1, 1).unwrap(), c(4.0, 0.0));
        assert_eq!(a.row_norm_sq_unmetered(0) / 25.0, 9.0 / 25.0);
    }

    #[test]
    fn empty_entry_list_is_zero_matrix() {
        let z = SampledMatrix::build(&[], (2, 2), false).unwrap();
        assert_eq!(z.frobenius_sq(), 0.0);
        let mut rng = StreamSplitter::new(0).stream("t");
        assert!(matches!(z.sample_row(&mut rng), Err(Error::ZeroNormSample)));
        assert!(matches!(z.sample_in_row(0, &mut rng), Err(Error::ZeroNormSample)));
    }

    #[test]
    fn build_errors() {
        let dup = SampledMatrix::build(&[(0, 0, c(1.0, 0.0)), (0, 0, c(2.0, 0.0))], (2, 2), false);
        assert!(matches!(dup, Err(Error::DuplicateEntry { row: 0, col: 0 })));
        let oob = SampledMatrix::build(&[(2, 0, c(1.0, 0.0))], (2, 2), false);
        assert!(matches!(oob, Err(Error::IndexError { .. })));
        let a = diag34();
        assert!(matches!(a.entry(0, 2), Err(Error::IndexError { .. })));
        assert!(matches!(a.row_norm(5), Err(Error::IndexError { .. })));
    }

    #[test]
    fn sampling_examples() {
        let mut rng = StreamSplitter::new(5).stream("t");
        let single = SampledMatrix::build(&[(1, 0, c(2.0, 0.0)), (1, 2, c(0.0, 1.0))], (3, 3), false)
            .unwrap();
        for _ in 0..200 {
            assert_eq!(single.sample_row(&mut rng).unwrap(), 1);
        }

        let row = SampledMatrix::build(&[(0, 1, c(0.0, 2.0))], (1, 2), false).unwrap();
        for _ in 0..200 {
            assert_eq!(row.sample_in_row(0, &mut rng).unwrap(), 1);
        }

        let a = diag34();
        let n = 100_000;
        let ones = (0..n).filter(|_| a.sample_row(&mut rng).unwrap() == 1).count();
        let sd = (0.36f64 * 0.64 / n as f64).sqrt();
        assert!((ones as f64 / n as f64 - 0.64).abs() < 5.0 * sd);

        let flat = SampledMatrix::build(
            &[(0, 0, c(1.0, 0.0)), (0, 1, c(-1.0, 0.0)), (0, 2, c(0.0, 1.0))],
            (1, 3),
            false,
        )
        .unwrap();
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[flat.sample_in_row(0, &mut rng).unwrap()] += 1;
        }
        for &k in &counts {
            assert!((k as f64 - 10_000.0).abs() < 500.0, "{counts:?}");
        }
    }

    #[test]
    fn ledger_counts_one_per_call() {
        let a = diag34();
        let mut rng = StreamSplitter::new(6).stream("t");
        let before = a.ledger_snapshot();
        a.entry(0, 0).unwrap();
        assert_eq!(a.ledger_snapshot().since(&before).total(), 1);
        a.row_norm(1).unwrap();
        a.frobenius_sq();
        a.sample_row(&mut rng).unwrap();
        a.sample_in_row(1, &mut rng).unwrap();
        a.col_norm(0).unwrap();
        a.sample_col(&mut rng).unwrap();
        a.sample_in_col(0, &mut rng).unwrap();
        let d = a.ledger_snapshot().since(&before);
        assert_eq!(d.entry_queries, 1);
        assert_eq!(d.norm_queries, 3);
        assert_eq!(d.samples, 4);
    }

    #[test]
    fn transpose_access_matches_columns() {
        let a = SampledMatrix::build(
            &[(0, 0, c(3.0, 0.0)), (1, 0, c(4.0, 0.0)), (1, 1, c(0.0, 2.0))],
            (2, 2),
            true,
        )
        .unwrap();
        assert_eq!(a.col_norm(0).unwrap(), 5.0);
        assert_eq!(a.col_norm(1).unwrap(), 2.0);
        let mut rng = StreamSplitter::new(9).stream("t");
        for _ in 0..100 {
            assert_eq!(a.sample_in_col(1, &mut rng).unwrap(), 1);
        }
        let no_t = SampledMatrix::build(&[(0, 0, c(1.0, 0.0))], (1, 1), false).unwrap();
        assert!(matches!(no_t.col_norm(0), Err(Error::TransposeUnavailable)));
    }

    #[test]
    fn writes_keep_trees_consistent() {
        let mut a = diag34();
        let d0 = a.digest().to_string();
        a.write(0, 1, c(0.0, 4.0)).unwrap();
        assert_eq!(a.frobenius_sq(), 41.0);
        assert_eq!(a.row_norm(0).unwrap(), 5.0);
        assert_eq!(a.col_norm(1).unwrap(), 32f64.sqrt());
        assert!(a.consistency_defect() < 1e-12);
        assert_ne!(a.digest(), d0);
    }
}
