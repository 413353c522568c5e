//! Block-sparse symmetric matrices with one dense block per pair of coupled
//! elements. Both triangles are stored, so products need no transposes.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SymSparseMatrix {
    offsets: Vec<usize>,
    /// Per block row, `(block column, row-major dense block)` sorted by column.
    rows: Vec<Vec<(usize, Vec<f64>)>>,
}

impl SymSparseMatrix {
    /// Dimension `N`.
    pub fn n(&self) -> usize {
        *self.offsets.last().unwrap_or(&0)
    }

    pub fn nblocks(&self) -> usize {
        self.rows.len()
    }

    pub fn block_size(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    pub fn block_offset(&self, i: usize) -> usize {
        self.offsets[i]
    }

    pub fn block_sizes(&self) -> Vec<usize> {
        self.offsets.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn block_row(&self, i: usize) -> &[(usize, Vec<f64>)] {
        &self.rows[i]
    }

    pub fn block(&self, i: usize, j: usize) -> Option<&[f64]> {
        self.rows[i]
            .binary_search_by_key(&j, |(c, _)| *c)
            .ok()
            .map(|k| self.rows[i][k].1.as_slice())
    }

    /// Number of stored blocks.
    pub fn nnz_blocks(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    /// `y = A x`.
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n());
        y.iter_mut().for_each(|v| *v = 0.0);
        for (i, row) in self.rows.iter().enumerate() {
            let ri = self.offsets[i];
            let mi = self.block_size(i);
            let yi = &mut y[ri..ri + mi];
            for (j, blk) in row {
                let cj = self.offsets[*j];
                let mj = self.offsets[*j + 1] - cj;
                let xj = &x[cj..cj + mj];
                for r in 0..mi {
                    let brow = &blk[r * mj..(r + 1) * mj];
                    let mut s = 0.0;
                    for c in 0..mj {
                        s += brow[c] * xj[c];
                    }
                    yi[r] += s;
                }
            }
        }
    }

    pub fn mul(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n()];
        self.matvec(x, &mut y);
        y
    }

    /// `xᵀ A y`.
    pub fn form(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    /// `xᵀ A x`.
    pub fn quad_form(&self, x: &[f64]) -> f64 {
        self.form(x, x)
    }

    /// Scalar entry `A_ij`.
    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let bi = self.offsets.partition_point(|&o| o <= i) - 1;
        let bj = self.offsets.partition_point(|&o| o <= j) - 1;
        match self.block(bi, bj) {
            Some(b) => b[(i - self.offsets[bi]) * self.block_size(bj) + (j - self.offsets[bj])],
            None => 0.0,
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.rows
            .iter()
            .flat_map(|r| r.iter().flat_map(|(_, b)| b.iter()))
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `max |A_ij - A_ji| / max |A_ij|`.
    pub fn symmetry_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for (i, row) in self.rows.iter().enumerate() {
            let mi = self.block_size(i);
            for (j, blk) in row {
                let mj = self.block_size(*j);
                let Some(t) = self.block(*j, i) else {
                    worst = worst.max(blk.iter().fold(0.0, |m, v| m.max(v.abs())));
                    continue;
                };
                for r in 0..mi {
                    for c in 0..mj {
                        worst = worst.max((blk[r * mj + c] - t[c * mi + r]).abs());
                    }
                }
            }
        }
        let scale = self.max_abs();
        if scale == 0.0 {
            0.0
        } else {
            worst / scale
        }
    }

    /// `self + scale * other` on the union of the block patterns.
    pub fn add_scaled(&self, other: &SymSparseMatrix, scale: f64) -> Result<SymSparseMatrix> {
        if self.offsets != other.offsets {
            return Err(Error::DimensionMismatch { expected: self.n(), found: other.n() });
        }
        let mut rows = Vec::with_capacity(self.rows.len());
        for (ra, rb) in self.rows.iter().zip(&other.rows) {
            let mut merged: Vec<(usize, Vec<f64>)> = Vec::with_capacity(ra.len().max(rb.len()));
            let (mut ia, mut ib) = (0, 0);
            while ia < ra.len() || ib < rb.len() {
                let ca = ra.get(ia).map(|x| x.0).unwrap_or(usize::MAX);
                let cb = rb.get(ib).map(|x| x.0).unwrap_or(usize::MAX);
                if ca < cb {
                    merged.push(ra[ia].clone());
                    ia += 1;
                } else if cb < ca {
                    merged.push((cb, rb[ib].1.iter().map(|v| scale * v).collect()));
                    ib += 1;
                } else {
                    let blk = ra[ia].1.iter().zip(&rb[ib].1).map(|(a, b)| a + scale * b).collect();
                    merged.push((ca, blk));
                    ia += 1;
                    ib += 1;
                }
            }
            rows.push(merged);
        }
        Ok(SymSparseMatrix { offsets: self.offsets.clone(), rows })
    }

    /// Scalar lower-triangle entries `(i, j, A_ij)`, `i >= j`, row-major order,
    /// explicit zeros skipped.
    pub fn lower_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (bi, row) in self.rows.iter().enumerate() {
            let mi = self.block_size(bi);
            for r in 0..mi {
                let i = self.offsets[bi] + r;
                for (bj, blk) in row {
                    if *bj > bi {
                        break;
                    }
                    let mj = self.block_size(*bj);
                    for c in 0..mj {
                        let j = self.offsets[*bj] + c;
                        let v = blk[r * mj + c];
                        if j <= i && v != 0.0 {
                            out.push((i, j, v));
                        }
                    }
                }
            }
        }
        out
    }

    /// Dense copy, row-major. Meant for tests and small problems.
    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n();
        let mut out = vec![0.0; n * n];
        for (bi, row) in self.rows.iter().enumerate() {
            let mi = self.block_size(bi);
            for (bj, blk) in row {
                let mj = self.block_size(*bj);
                for r in 0..mi {
                    for c in 0..mj {
                        out[(self.offsets[bi] + r) * n + self.offsets[*bj] + c] = blk[r * mj + c];
                    }
                }
            }
        }
        out
    }

    /// Dense symmetric matrix with one block per scalar entry; for tests.
    pub fn from_dense(n: usize, a: &[f64]) -> Self {
        let mut b = BlockBuilder::new(&[n]);
        b.block_mut(0, 0).copy_from_slice(a);
        b.finish()
    }

    /// Diagonal matrix as one block per entry.
    pub fn from_diagonal(diag: &[f64]) -> Self {
        let sizes = vec![1; diag.len()];
        let mut b = BlockBuilder::new(&sizes);
        for (i, &v) in diag.iter().enumerate() {
            b.block_mut(i, i)[0] = v;
        }
        b.finish()
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        for (i, row) in self.rows.iter().enumerate() {
            for (j, blk) in row {
                if blk.iter().any(|v| !v.is_finite()) {
                    return Err(Error::NonFinite(i, *j));
                }
            }
        }
        Ok(())
    }
}

/// Accumulates dense blocks in a fixed key order.
#[derive(Debug, Clone)]
pub struct BlockBuilder {
    offsets: Vec<usize>,
    blocks: BTreeMap<(usize, usize), Vec<f64>>,
}

impl BlockBuilder {
    pub fn new(block_sizes: &[usize]) -> Self {
        let mut offsets = Vec::with_capacity(block_sizes.len() + 1);
        let mut n = 0;
        for &s in block_sizes {
            offsets.push(n);
            n += s;
        }
        offsets.push(n);
        BlockBuilder { offsets, blocks: BTreeMap::new() }
    }

    fn size(&self, i: usize) -> usize {
        self.offsets[i + 1] - self.offsets[i]
    }

    /// Zero-initialized on first access.
    pub fn block_mut(&mut self, i: usize, j: usize) -> &mut [f64] {
        let len = self.size(i) * self.size(j);
        self.blocks.entry((i, j)).or_insert_with(|| vec![0.0; len])
    }

    pub fn finish(self) -> SymSparseMatrix {
        let nb = self.offsets.len() - 1;
        let mut rows: Vec<Vec<(usize, Vec<f64>)>> = vec![Vec::new(); nb];
        for ((i, j), blk) in self.blocks {
            rows[i].push((j, blk));
        }
        SymSparseMatrix { offsets: self.offsets, rows }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SymSparseMatrix {
        let mut b = BlockBuilder::new(&[2, 1]);
        b.block_mut(0, 0).copy_from_slice(&[4.0, 1.0, 1.0, 3.0]);
        b.block_mut(0, 1).copy_from_slice(&[0.5, -1.0]);
        b.block_mut(1, 0).copy_from_slice(&[0.5, -1.0]);
        b.block_mut(1, 1)[0] = 2.0;
        b.finish()
    }

    #[test]
    fn products_and_entries() {
        let a = sample();
        assert_eq!(a.n(), 3);
        assert_eq!(a.mul(&[1.0, 0.0, 0.0]), vec![4.0, 1.0, 0.5]);
        assert_eq!(a.entry(2, 1), -1.0);
        assert_eq!(a.symmetry_defect(), 0.0);
        assert_eq!(a.quad_form(&[0.0; 3]), 0.0);
        let lower = a.lower_triplets();
        assert_eq!(lower, vec![(0, 0, 4.0), (1, 0, 1.0), (1, 1, 3.0), (2, 0, 0.5), (2, 1, -1.0), (2, 2, 2.0)]);
    }

    #[test]
    fn add_scaled_merges_patterns() {
        let a = sample();
        let mut b = BlockBuilder::new(&[2, 1]);
        b.block_mut(1, 1)[0] = 1.0;
        let s = a.add_scaled(&b.finish(), 3.0).unwrap();
        assert_eq!(s.entry(2, 2), 5.0);
        assert_eq!(s.entry(0, 0), 4.0);
    }
}
