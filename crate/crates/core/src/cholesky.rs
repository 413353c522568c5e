//! Supernodal Cholesky factorization of block-sparse SPD matrices, with one
//! supernode per element block and a minimum-degree elimination order on the
//! element graph.

use alloc::collections::BTreeSet;
use alloc::vec;
use alloc::vec::Vec;

use crate::dense;
use crate::sparse::SymSparseMatrix;
use crate::{Error, Result};

/// Elimination order of the block graph of `a`, by minimum external degree
/// (sum of neighbouring block sizes). Ties go to the smaller block index.
pub fn minimum_degree_order(a: &SymSparseMatrix) -> Vec<usize> {
    let nb = a.nblocks();
    let sizes = a.block_sizes();
    let mut adj: Vec<BTreeSet<usize>> = (0..nb)
        .map(|i| a.block_row(i).iter().map(|(j, _)| *j).filter(|&j| j != i).collect())
        .collect();
    let mut weight: Vec<usize> = (0..nb).map(|i| adj[i].iter().map(|&j| sizes[j]).sum()).collect();
    let mut done = vec![false; nb];
    let mut order = Vec::with_capacity(nb);
    for _ in 0..nb {
        let mut best = usize::MAX;
        let mut best_w = usize::MAX;
        for i in 0..nb {
            if !done[i] && weight[i] < best_w {
                best = i;
                best_w = weight[i];
            }
        }
        done[best] = true;
        order.push(best);
        let nbrs: Vec<usize> = adj[best].iter().copied().collect();
        for &u in &nbrs {
            adj[u].remove(&best);
            for &v in &nbrs {
                if u != v {
                    adj[u].insert(v);
                }
            }
            weight[u] = adj[u].iter().map(|&j| sizes[j]).sum();
        }
        adj[best].clear();
    }
    order
}

#[derive(Debug, Clone)]
struct Column {
    block: usize,
    diag: Vec<f64>,
    /// `(row position, L block of size m_row × m_col)`, sorted by position.
    below: Vec<(usize, Vec<f64>)>,
}

/// `L Lᵀ` factor of a [`SymSparseMatrix`].
#[derive(Debug, Clone)]
pub struct BlockCholesky {
    n: usize,
    offsets: Vec<usize>,
    sizes: Vec<usize>,
    cols: Vec<Column>,
}

impl BlockCholesky {
    pub fn factor(a: &SymSparseMatrix) -> Result<Self> {
        let order = minimum_degree_order(a);
        Self::factor_with_order(a, &order)
    }

    pub fn factor_with_order(a: &SymSparseMatrix, order: &[usize]) -> Result<Self> {
        let nb = a.nblocks();
        let sizes = a.block_sizes();
        let mut offsets = Vec::with_capacity(nb + 1);
        for b in 0..nb {
            offsets.push(a.block_offset(b));
        }
        offsets.push(a.n());
        let mut pos = vec![0; nb];
        for (p, &b) in order.iter().enumerate() {
            pos[b] = p;
        }

        // Symbolic factorization on positions.
        let mut structs: Vec<BTreeSet<usize>> = (0..nb)
            .map(|p| {
                let b = order[p];
                a.block_row(b).iter().map(|(j, _)| pos[*j]).filter(|&q| q > p).collect()
            })
            .collect();
        for p in 0..nb {
            let s: Vec<usize> = structs[p].iter().copied().collect();
            if let Some((&first, rest)) = s.split_first() {
                // Fill propagates to the parent in the elimination tree.
                let parent = &mut structs[first];
                parent.extend(rest.iter().copied());
            }
        }

        let mut cols: Vec<Column> = (0..nb)
            .map(|p| {
                let b = order[p];
                let mb = sizes[b];
                Column {
                    block: b,
                    diag: vec![0.0; mb * mb],
                    below: structs[p].iter().map(|&q| (q, vec![0.0; sizes[order[q]] * mb])).collect(),
                }
            })
            .collect();
        for bi in 0..nb {
            for (bj, blk) in a.block_row(bi) {
                let (pi, pj) = (pos[bi], pos[*bj]);
                if pi == pj {
                    cols[pj].diag.copy_from_slice(blk);
                } else if pi > pj {
                    let k = cols[pj].below.binary_search_by_key(&pi, |(q, _)| *q).expect("symbolic pattern");
                    cols[pj].below[k].1.copy_from_slice(blk);
                }
            }
        }

        for p in 0..nb {
            let (done, rest) = cols.split_at_mut(p + 1);
            let col = &mut done[p];
            let mk = sizes[col.block];
            dense::cholesky_in_place(&mut col.diag, mk)
                .map_err(|(_, pivot)| Error::NotPositiveDefinite { block: col.block, pivot })?;
            for (q, blk) in col.below.iter_mut() {
                let mi = sizes[order[*q]];
                dense::right_solve_lower_t(&col.diag, mk, blk, mi);
            }
            let below = &col.below;
            for (jj, (qj, lj)) in below.iter().enumerate() {
                let target = &mut rest[*qj - p - 1];
                let mj = sizes[target.block];
                dense::sub_abt(&mut target.diag, lj, lj, mj, mj, mk);
                for (qi, li) in &below[jj + 1..] {
                    let mi = sizes[order[*qi]];
                    let k = target
                        .below
                        .binary_search_by_key(qi, |(q, _)| *q)
                        .expect("fill pattern");
                    dense::sub_abt(&mut target.below[k].1, li, lj, mi, mj, mk);
                }
            }
        }
        Ok(BlockCholesky { n: a.n(), offsets, sizes, cols })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Stored factor entries, a measure of fill.
    pub fn factor_len(&self) -> usize {
        self.cols.iter().map(|c| c.diag.len() + c.below.iter().map(|(_, b)| b.len()).sum::<usize>()).sum()
    }

    /// Solves `A x = b` in place.
    pub fn solve_in_place(&self, x: &mut [f64]) {
        let nb = self.cols.len();
        let mut tmp = Vec::new();
        for col in &self.cols {
            let (o, m) = (self.offsets[col.block], self.sizes[col.block]);
            dense::forward_lower(&col.diag, m, &mut x[o..o + m]);
            tmp.clear();
            tmp.extend_from_slice(&x[o..o + m]);
            for (q, blk) in &col.below {
                let bi = self.cols[*q].block;
                let (oi, mi) = (self.offsets[bi], self.sizes[bi]);
                let xi = &mut x[oi..oi + mi];
                for r in 0..mi {
                    let row = &blk[r * m..(r + 1) * m];
                    let mut s = 0.0;
                    for c in 0..m {
                        s += row[c] * tmp[c];
                    }
                    xi[r] -= s;
                }
            }
        }
        for p in (0..nb).rev() {
            let col = &self.cols[p];
            let (o, m) = (self.offsets[col.block], self.sizes[col.block]);
            for (q, blk) in &col.below {
                let bi = self.cols[*q].block;
                let (oi, mi) = (self.offsets[bi], self.sizes[bi]);
                for r in 0..mi {
                    let yr = x[oi + r];
                    if yr == 0.0 {
                        continue;
                    }
                    let row = &blk[r * m..(r + 1) * m];
                    for c in 0..m {
                        x[o + c] -= row[c] * yr;
                    }
                }
            }
            dense::backward_lower_t(&col.diag, m, &mut x[o..o + m]);
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}
