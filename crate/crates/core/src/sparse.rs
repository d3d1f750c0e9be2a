//! Compressed sparse row storage.

use std::io::Write;

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Builds a square matrix from per-row `(column, value)` lists. Columns
    /// within a row must be strictly increasing.
    pub fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Result<Self> {
        let n = rows.len();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for (r, row) in rows.into_iter().enumerate() {
            let mut last = None;
            for (c, v) in row {
                if c >= n || last.is_some_and(|l| c <= l) {
                    return Err(Error::Precondition(format!(
                        "row {r}: column {c} out of order or out of range"
                    )));
                }
                last = Some(c);
                col_idx.push(c);
                values.push(v);
            }
            row_ptr.push(col_idx.len());
        }
        Ok(Self {
            n,
            row_ptr,
            col_idx,
            values,
        })
    }

    pub fn identity(n: usize) -> Self {
        Self {
            n,
            row_ptr: (0..=n).collect(),
            col_idx: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    /// `(column, value)` pairs of row `r`.
    pub fn row(&self, r: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        self.col_idx[span.clone()]
            .iter()
            .copied()
            .zip(self.values[span].iter().copied())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let span = self.row_ptr[r]..self.row_ptr[r + 1];
        match self.col_idx[span.clone()].binary_search(&c) {
            Ok(p) => self.values[span.start + p],
            Err(_) => 0.0,
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|r| self.get(r, r)).collect()
    }

    /// `out = self · x`, rows split into `partitions` contiguous blocks that
    /// run on scoped threads. Each row is an independent sum in fixed column
    /// order, so the result does not depend on the partition count.
    pub fn mul_vec_into(&self, x: &[f64], out: &mut [f64], partitions: usize) {
        assert_eq!(x.len(), self.n);
        assert_eq!(out.len(), self.n);
        let partitions = partitions.clamp(1, self.n.max(1));
        if partitions == 1 {
            self.rows_into(0, x, out);
            return;
        }
        let chunk = self.n.div_ceil(partitions);
        std::thread::scope(|s| {
            for (p, block) in out.chunks_mut(chunk).enumerate() {
                s.spawn(move || self.rows_into(p * chunk, x, block));
            }
        });
    }

    fn rows_into(&self, first: usize, x: &[f64], out: &mut [f64]) {
        for (o, r) in out.iter_mut().zip(first..) {
            let mut acc = 0.0;
            for p in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[p] * x[self.col_idx[p]];
            }
            *o = acc;
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.n];
        self.mul_vec_into(x, &mut out, 1);
        out
    }

    /// Largest `|a_ij − a_ji|` over stored entries.
    pub fn asymmetry(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                worst = worst.max((v - self.get(c, r)).abs());
            }
        }
        worst
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let mut m = vec![vec![0.0; self.n]; self.n];
        for (r, row) in m.iter_mut().enumerate() {
            for (c, v) in self.row(r) {
                row[c] = v;
            }
        }
        m
    }

    /// Writes the matrix in Matrix Market coordinate format: one-based
    /// `row col value` triples, values with 17 significant digits.
    pub fn write_coordinate<W: Write>(&self, w: &mut W) -> Result<()> {
        writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
        writeln!(w, "{} {} {}", self.n, self.n, self.nnz())?;
        for r in 0..self.n {
            for (c, v) in self.row(r) {
                writeln!(w, "{} {} {:.16e}", r + 1, c + 1, v)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CsrMatrix {
        CsrMatrix::from_rows(vec![
            vec![(0, 2.0), (1, -1.0)],
            vec![(0, -1.0), (1, 2.0), (2, -1.0)],
            vec![(1, -1.0), (2, 2.0)],
        ])
        .unwrap()
    }

    #[test]
    fn multiply_and_lookup() {
        let a = sample();
        assert_eq!(a.mul_vec(&[1.0, 2.0, 3.0]), vec![0.0, 0.0, 4.0]);
        assert_eq!(a.get(2, 0), 0.0);
        assert_eq!(a.diagonal(), vec![2.0, 2.0, 2.0]);
        assert_eq!(a.asymmetry(), 0.0);
    }

    #[test]
    fn partitioned_product_is_bitwise_identical() {
        let n = 1000;
        let rows = (0..n)
            .map(|r| {
                let mut row = Vec::new();
                if r > 0 {
                    row.push((r - 1, -0.3 * r as f64));
                }
                row.push((r, 1.0 / (r + 1) as f64));
                if r + 7 < n {
                    row.push((r + 7, 0.1));
                }
                row
            })
            .collect();
        let a = CsrMatrix::from_rows(rows).unwrap();
        let x: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut one = vec![0.0; n];
        a.mul_vec_into(&x, &mut one, 1);
        for p in [2, 3, 7] {
            let mut many = vec![0.0; n];
            a.mul_vec_into(&x, &mut many, p);
            assert_eq!(one, many);
        }
    }

    #[test]
    fn rejects_unsorted_rows() {
        assert!(CsrMatrix::from_rows(vec![vec![(1, 1.0), (0, 1.0)], vec![]]).is_err());
    }

    #[test]
    fn coordinate_export() {
        let mut buf = Vec::new();
        sample().write_coordinate(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "3 3 7");
        assert_eq!(lines[2], "1 1 2.0000000000000000e0");
        assert_eq!(lines.len(), 9);
    }
}
