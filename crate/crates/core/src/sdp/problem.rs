use std::collections::HashMap;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::index::svec_len;

/// Names and dimensions of the PSD blocks of a block-diagonal variable.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BlockLayout {
    names: Vec<String>,
    dims: Vec<usize>,
}

impl BlockLayout {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, name: impl Into<String>, dim: usize) -> usize {
        self.names.push(name.into());
        self.dims.push(dim);
        self.dims.len() - 1
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn dim(&self, block: usize) -> usize {
        self.dims[block]
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn name(&self, block: usize) -> &str {
        &self.names[block]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Start of each block in the concatenated upper-triangle vector.
    pub fn svec_offsets(&self) -> Vec<usize> {
        let mut offsets = Vec::with_capacity(self.len() + 1);
        let mut acc = 0;
        offsets.push(0);
        for &d in &self.dims {
            acc += svec_len(d);
            offsets.push(acc);
        }
        offsets
    }

    pub fn svec_total(&self) -> usize {
        self.dims.iter().map(|&d| svec_len(d)).sum()
    }

    pub fn zeros(&self) -> Vec<DMatrix<f64>> {
        self.dims.iter().map(|&d| DMatrix::zeros(d, d)).collect()
    }
}

/// One coefficient of a constraint row on the symmetric entry `(i, j)`, `i <= j`,
/// of a block. The entry is counted once: the row reads `Σ coef · X[i,j] = rhs`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstraintEntry {
    pub block: usize,
    pub i: usize,
    pub j: usize,
    pub coef: f64,
}

/// Provenance of a constraint row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RowTag {
    Plain,
    /// Trace normalization of the 2-RDM.
    Trace,
    /// Spin projection expectation value.
    Spin,
    /// Defines entry `entry` (upper-triangle index) of `block` as an affine image of the 2-RDM.
    Definition {
        block: usize,
        entry: usize,
    },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintRow {
    pub entries: Vec<ConstraintEntry>,
    pub rhs: f64,
    pub tag: RowTag,
}

impl ConstraintRow {
    pub fn new(entries: Vec<ConstraintEntry>, rhs: f64, tag: RowTag) -> Self {
        Self { entries, rhs, tag }
    }

    /// Row value at a block tuple.
    pub fn evaluate(&self, blocks: &[DMatrix<f64>]) -> f64 {
        self.entries.iter().map(|e| e.coef * blocks[e.block][(e.i, e.j)]).sum()
    }
}

/// Sparse linear equality constraints `A(X) = b` over a block layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ConstraintSystem {
    pub layout: BlockLayout,
    pub rows: Vec<ConstraintRow>,
    /// Rows dropped by [`ConstraintSystem::eliminate_redundant`].
    pub removed: usize,
}

impl ConstraintSystem {
    pub fn new(layout: BlockLayout) -> Self {
        Self { layout, rows: Vec::new(), removed: 0 }
    }

    pub fn push(&mut self, row: ConstraintRow) {
        self.rows.push(row);
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(|r| r.entries.len()).sum()
    }

    pub fn validate(&self) -> Result<()> {
        for (n, row) in self.rows.iter().enumerate() {
            if !row.rhs.is_finite() {
                return Err(Error::MalformedProblem(format!("row {n}: non-finite right-hand side")));
            }
            for e in &row.entries {
                if e.block >= self.layout.len() {
                    return Err(Error::MalformedProblem(format!("row {n}: undeclared block {}", e.block)));
                }
                let d = self.layout.dim(e.block);
                if e.i > e.j || e.j >= d {
                    return Err(Error::MalformedProblem(format!(
                        "row {n}: entry ({}, {}) outside upper triangle of {}x{} block {}",
                        e.i,
                        e.j,
                        d,
                        d,
                        self.layout.name(e.block)
                    )));
                }
                if !e.coef.is_finite() {
                    return Err(Error::MalformedProblem(format!("row {n}: non-finite coefficient")));
                }
            }
        }
        Ok(())
    }

    /// Largest `|A(X) - b|` over all rows.
    pub fn max_violation(&self, blocks: &[DMatrix<f64>]) -> f64 {
        self.rows.iter().map(|r| (r.evaluate(blocks) - r.rhs).abs()).fold(0.0, f64::max)
    }

    /// Drops exactly duplicated rows and rows that are numerically linearly
    /// dependent on the others, keeping the original order of the survivors.
    /// Returns the number of rows removed.
    pub fn eliminate_redundant(&mut self, tol: f64) -> usize {
        let offsets = self.layout.svec_offsets();
        let column = |e: &ConstraintEntry| offsets[e.block] + crate::index::sym_index(e.i, e.j);

        // canonical sparse rows in svec columns, duplicate columns merged
        let canon: Vec<Vec<(usize, f64)>> = self
            .rows
            .iter()
            .map(|row| {
                let mut v: Vec<(usize, f64)> = row
                    .entries
                    .iter()
                    .map(|e| {
                        let s = if e.i == e.j { 1.0 } else { std::f64::consts::FRAC_1_SQRT_2 };
                        (column(e), e.coef * s)
                    })
                    .collect();
                v.sort_by_key(|&(c, _)| c);
                let mut merged: Vec<(usize, f64)> = Vec::with_capacity(v.len());
                for (c, x) in v {
                    match merged.last_mut() {
                        Some(last) if last.0 == c => last.1 += x,
                        _ => merged.push((c, x)),
                    }
                }
                merged.retain(|&(_, x)| x != 0.0);
                merged
            })
            .collect();

        let mut keep = vec![true; self.rows.len()];
        let mut seen: HashMap<Vec<(usize, u64)>, usize> = HashMap::new();
        for (n, row) in canon.iter().enumerate() {
            if row.is_empty() {
                keep[n] = false;
                continue;
            }
            let key: Vec<(usize, u64)> = row.iter().map(|&(c, x)| (c, x.to_bits())).collect();
            if seen.insert(key, n).is_some() {
                keep[n] = false;
            }
        }

        // peel rows owning a column no other active row touches
        let mut count: HashMap<usize, usize> = HashMap::new();
        for (n, row) in canon.iter().enumerate() {
            if keep[n] {
                for &(c, _) in row {
                    *count.entry(c).or_insert(0) += 1;
                }
            }
        }
        let mut active: Vec<bool> = keep.clone();
        loop {
            let mut changed = false;
            for (n, row) in canon.iter().enumerate() {
                if active[n] && row.iter().any(|(c, _)| count[c] == 1) {
                    active[n] = false;
                    for (c, _) in row {
                        *count.get_mut(c).unwrap() -= 1;
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }

        // rank-revealing Gram-Schmidt with pivoting on the remaining rows
        let rest: Vec<usize> = (0..canon.len()).filter(|&n| active[n]).collect();
        if !rest.is_empty() {
            let mut cols: Vec<usize> = rest.iter().flat_map(|&n| canon[n].iter().map(|&(c, _)| c)).collect();
            cols.sort_unstable();
            cols.dedup();
            let pos: HashMap<usize, usize> = cols.iter().enumerate().map(|(k, &c)| (c, k)).collect();
            let mut dense: Vec<Vec<f64>> = rest
                .iter()
                .map(|&n| {
                    let mut v = vec![0.0; cols.len()];
                    for &(c, x) in &canon[n] {
                        v[pos[&c]] = x;
                    }
                    v
                })
                .collect();
            let norm = |v: &[f64]| v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let scale = dense.iter().map(|v| norm(v)).fold(0.0, f64::max);
            let mut remaining: Vec<usize> = (0..rest.len()).collect();
            while !remaining.is_empty() {
                let (k_pos, &k) = remaining
                    .iter()
                    .enumerate()
                    .max_by(|a, b| norm(&dense[*a.1]).total_cmp(&norm(&dense[*b.1])).then(b.1.cmp(a.1)))
                    .unwrap();
                let nk = norm(&dense[k]);
                if nk <= tol * scale {
                    break;
                }
                remaining.swap_remove(k_pos);
                let q: Vec<f64> = dense[k].iter().map(|x| x / nk).collect();
                for &o in &remaining {
                    let d: f64 = dense[o].iter().zip(&q).map(|(a, b)| a * b).sum();
                    for (a, b) in dense[o].iter_mut().zip(&q) {
                        *a -= d * b;
                    }
                }
            }
            for k in remaining {
                keep[rest[k]] = false;
            }
        }

        let before = self.rows.len();
        let mut it = keep.iter();
        self.rows.retain(|_| *it.next().unwrap());
        let removed = before - self.rows.len();
        self.removed += removed;
        removed
    }
}

/// `min Σ_b Tr(C_b X_b)  s.t.  A(X) = b,  X_b ⪰ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SdpProblem {
    pub objective: Vec<DMatrix<f64>>,
    pub constraints: ConstraintSystem,
}

impl SdpProblem {
    pub fn new(objective: Vec<DMatrix<f64>>, constraints: ConstraintSystem) -> Result<Self> {
        let layout = &constraints.layout;
        if objective.len() != layout.len() {
            return Err(Error::MalformedProblem(format!(
                "{} objective blocks for {} declared blocks",
                objective.len(),
                layout.len()
            )));
        }
        for (b, c) in objective.iter().enumerate() {
            let d = layout.dim(b);
            if c.nrows() != d || c.ncols() != d {
                return Err(Error::MalformedProblem(format!(
                    "objective block {} is {}x{}, expected {d}x{d}",
                    layout.name(b),
                    c.nrows(),
                    c.ncols()
                )));
            }
            let asym = (c - c.transpose()).amax();
            if asym > 1e-10 * c.amax().max(1.0) {
                return Err(Error::MalformedProblem(format!(
                    "objective block {} is not symmetric ({asym:.2e})",
                    layout.name(b)
                )));
            }
        }
        constraints.validate()?;
        Ok(Self { objective, constraints })
    }

    pub fn layout(&self) -> &BlockLayout {
        &self.constraints.layout
    }

    pub fn rhs(&self) -> Vec<f64> {
        self.constraints.rows.iter().map(|r| r.rhs).collect()
    }

    pub fn objective_value(&self, x: &[DMatrix<f64>]) -> f64 {
        self.objective.iter().zip(x).map(|(c, x)| c.dot(x)).sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn layout() -> BlockLayout {
        let mut l = BlockLayout::new();
        l.push("A", 3);
        l.push("B", 2);
        l
    }

    fn entry(block: usize, i: usize, j: usize, coef: f64) -> ConstraintEntry {
        ConstraintEntry { block, i, j, coef }
    }

    #[test]
    fn offsets() {
        assert_eq!(layout().svec_offsets(), vec![0, 6, 9]);
        assert_eq!(layout().svec_total(), 9);
    }

    #[test]
    fn removes_duplicates_and_dependent_rows() {
        let mut cs = ConstraintSystem::new(layout());
        cs.push(ConstraintRow::new(vec![entry(0, 0, 0, 1.0), entry(0, 1, 1, 1.0)], 1.0, RowTag::Plain));
        cs.push(ConstraintRow::new(vec![entry(0, 0, 0, 1.0), entry(0, 1, 1, 1.0)], 1.0, RowTag::Plain));
        cs.push(ConstraintRow::new(vec![entry(0, 1, 1, 1.0), entry(0, 2, 2, 1.0)], 1.0, RowTag::Plain));
        cs.push(ConstraintRow::new(vec![entry(0, 0, 0, 1.0), entry(0, 2, 2, -1.0)], 0.0, RowTag::Plain));
        cs.push(ConstraintRow::new(vec![entry(1, 0, 1, 2.0)], 0.5, RowTag::Plain));
        // row 3 = row 0 - row 2, row 1 duplicates row 0
        let removed = cs.eliminate_redundant(1e-10);
        assert_eq!(removed, 2);
        assert_eq!(cs.len(), 3);
        assert_eq!(cs.rows[2].entries[0].block, 1);
    }

    #[test]
    fn rejects_lower_triangle_entry() {
        let mut cs = ConstraintSystem::new(layout());
        cs.push(ConstraintRow::new(vec![entry(0, 2, 1, 1.0)], 0.0, RowTag::Plain));
        assert!(matches!(cs.validate(), Err(Error::MalformedProblem(_))));
    }

    #[test]
    fn rejects_asymmetric_objective() {
        let l = layout();
        let mut c = l.zeros();
        c[0][(0, 1)] = 1.0;
        assert!(SdpProblem::new(c, ConstraintSystem::new(l)).is_err());
    }
}
