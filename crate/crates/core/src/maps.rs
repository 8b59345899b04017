//! Affine maps from the 2-RDM to the other metric matrices at fixed N, and
//! the constraint systems binding them together.
//!
//! Every map entry is obtained by normal ordering the defining operator
//! string: two-body monomials are 2-RDM elements, one-body monomials are
//! 1-RDM elements and scalars are constants. The 1-RDM is itself the
//! contraction `D1[i,k] = 1/(N-1) Σ_j D2[(i,j),(k,j)]`, so every map is a
//! function of the 2-RDM alone.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fermion::{normal_order_into, LadderOp, NormalTerm};
use crate::index::{sym_index, PairIndexer, TripleIndexer};
use crate::sdp::{BlockLayout, ConstraintEntry, ConstraintRow, ConstraintSystem, RowTag};

/// The matrices that can appear as PSD blocks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BlockKind {
    D2,
    Q2,
    G2,
    T2,
    D1,
    Q1,
}

impl BlockKind {
    pub fn name(&self) -> &'static str {
        match self {
            BlockKind::D2 => "D2",
            BlockKind::Q2 => "Q2",
            BlockKind::G2 => "G2",
            BlockKind::T2 => "T2",
            BlockKind::D1 => "D1",
            BlockKind::Q1 => "Q1",
        }
    }

    /// Matrix dimension for `rank` spin orbitals.
    pub fn dim(&self, rank: usize) -> usize {
        let pairs = rank * rank.saturating_sub(1) / 2;
        match self {
            BlockKind::D2 | BlockKind::Q2 => pairs,
            BlockKind::G2 => rank * rank,
            BlockKind::T2 => rank * pairs,
            BlockKind::D1 | BlockKind::Q1 => rank,
        }
    }
}

/// One upper-triangle entry `(i, j)` of a map output:
/// `constant + Σ c·D2[p,q] + Σ c·D1[p,q]`, with 2-RDM and 1-RDM
/// entries referenced once on their upper triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct MapEntry {
    pub i: usize,
    pub j: usize,
    pub constant: f64,
    pub d2: Vec<(usize, usize, f64)>,
    pub d1: Vec<(usize, usize, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub target: BlockKind,
    pub dim: usize,
    pub rank: usize,
    pub n_particles: usize,
    /// Row-major over the upper triangle.
    pub entries: Vec<MapEntry>,
}

fn check_sizes(rank: usize, n_particles: usize) -> Result<()> {
    if n_particles < 2 {
        return Err(Error::TooFewParticles(n_particles));
    }
    if rank < 2 || n_particles > rank {
        return Err(Error::InvalidSector(format!("{n_particles} particles in {rank} spin orbitals")));
    }
    Ok(())
}

fn upper(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

/// Collects a normal-ordered expansion into a map entry.
fn entry_from_terms(i: usize, j: usize, terms: BTreeMap<NormalTerm, f64>, pairs: &PairIndexer) -> Result<MapEntry> {
    let mut constant = 0.0;
    let mut d2: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    let mut d1: BTreeMap<(usize, usize), f64> = BTreeMap::new();
    for (term, c) in terms {
        if c == 0.0 {
            continue;
        }
        match (term.creators.as_slice(), term.annihilators.as_slice()) {
            ([], []) => constant += c,
            (&[p], &[q]) => *d1.entry(upper(p, q)).or_insert(0.0) += c,
            (&[p, q], &[s, r]) => *d2.entry(upper(pairs.pack(p, q), pairs.pack(r, s))).or_insert(0.0) += c,
            _ => return Err(Error::StringTooLong(term.rank())),
        }
    }
    let collect = |m: BTreeMap<(usize, usize), f64>| {
        m.into_iter().filter(|(_, c)| *c != 0.0).map(|((a, b), c)| (a, b, c)).collect()
    };
    Ok(MapEntry { i, j, constant, d2: collect(d2), d1: collect(d1) })
}

fn build_map<F>(target: BlockKind, rank: usize, n_particles: usize, strings: F) -> Result<AffineMap>
where
    F: Fn(usize, usize) -> Vec<Vec<LadderOp>> + Sync,
{
    check_sizes(rank, n_particles)?;
    let dim = target.dim(rank);
    let pairs = PairIndexer::new(rank);
    let entries = (0..dim)
        .into_par_iter()
        .flat_map_iter(|i| (i..dim).map(move |j| (i, j)))
        .map(|(i, j)| {
            let mut terms = BTreeMap::new();
            for s in strings(i, j) {
                normal_order_into(&s, 1.0, &mut terms);
            }
            entry_from_terms(i, j, terms, &pairs)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(AffineMap { target, dim, rank, n_particles, entries })
}

use LadderOp as L;

/// `D1[i,k] = 1/(N-1) Σ_j D2[(i,j),(k,j)]`, with `Tr D1 = N`.
pub fn map_d_to_1rdm(rank: usize, n_particles: usize) -> Result<AffineMap> {
    check_sizes(rank, n_particles)?;
    let pairs = PairIndexer::new(rank);
    let w = 1.0 / (n_particles as f64 - 1.0);
    let mut entries = Vec::with_capacity(rank * (rank + 1) / 2);
    for i in 0..rank {
        for k in i..rank {
            let mut d2 = Vec::new();
            for j in 0..rank {
                if let (Some((p, s1)), Some((q, s2))) = (pairs.signed(i, j), pairs.signed(k, j)) {
                    let (a, b) = upper(p, q);
                    d2.push((a, b, s1 * s2 * w));
                }
            }
            d2.sort_by_key(|&(a, b, _)| (a, b));
            entries.push(MapEntry { i, j: k, constant: 0.0, d2, d1: Vec::new() });
        }
    }
    Ok(AffineMap { target: BlockKind::D1, dim: rank, rank, n_particles, entries })
}

/// `Q1[i,k] = <a_i a†_k> = δ_ik - D1[k,i]`.
pub fn map_d_to_1hole(rank: usize, n_particles: usize) -> Result<AffineMap> {
    build_map(BlockKind::Q1, rank, n_particles, |i, k| vec![vec![L::annihilate(i), L::create(k)]])
}

/// `Q2[(i,j),(k,l)] = <a_i a_j a†_l a†_k>`.
pub fn map_d_to_q(rank: usize, n_particles: usize) -> Result<AffineMap> {
    let pairs = PairIndexer::new(rank);
    build_map(BlockKind::Q2, rank, n_particles, move |a, b| {
        let ((i, j), (k, l)) = (pairs.unpack(a), pairs.unpack(b));
        vec![vec![L::annihilate(i), L::annihilate(j), L::create(l), L::create(k)]]
    })
}

/// `G2[(i,j),(k,l)] = <a†_i a_j a†_l a_k>` on ordered pairs `i * r + j`.
pub fn map_d_to_g(rank: usize, n_particles: usize) -> Result<AffineMap> {
    build_map(BlockKind::G2, rank, n_particles, move |a, b| {
        let ((i, j), (k, l)) = ((a / rank, a % rank), (b / rank, b % rank));
        vec![vec![L::create(i), L::annihilate(j), L::create(l), L::annihilate(k)]]
    })
}

/// `T2[α,β] = <C_α C†_β> + <C†_β C_α>` with `C_ijk = a†_i a†_j a_k` on
/// triples `(i<j, k)`. The three-body parts of the two terms cancel.
pub fn map_d_to_t2(rank: usize, n_particles: usize) -> Result<AffineMap> {
    let triples = TripleIndexer::new(rank);
    build_map(BlockKind::T2, rank, n_particles, move |a, b| {
        let ((i, j, k), (l, m, n)) = (triples.unpack(a), triples.unpack(b));
        let c_a = [L::create(i), L::create(j), L::annihilate(k)];
        let c_b_dag = [L::create(n), L::annihilate(m), L::annihilate(l)];
        vec![[c_a, c_b_dag].concat(), [c_b_dag, c_a].concat()]
    })
}

/// 1-RDM by contraction of a 2-RDM.
pub fn contract_d2(d2: &DMatrix<f64>, rank: usize, n_particles: usize) -> Result<DMatrix<f64>> {
    let map = map_d_to_1rdm(rank, n_particles)?;
    Ok(map.apply_with(d2, &DMatrix::zeros(rank, rank)))
}

impl AffineMap {
    /// Number of nonzero linear coefficients.
    pub fn nnz(&self) -> usize {
        self.entries.iter().map(|e| e.d2.len() + e.d1.len()).sum()
    }

    /// Map output for a 2-RDM, contracting it for the 1-RDM terms.
    pub fn apply(&self, d2: &DMatrix<f64>) -> Result<DMatrix<f64>> {
        let d1 = contract_d2(d2, self.rank, self.n_particles)?;
        Ok(self.apply_with(d2, &d1))
    }

    /// Map output with the 1-RDM supplied separately.
    pub fn apply_with(&self, d2: &DMatrix<f64>, d1: &DMatrix<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.dim, self.dim);
        for e in &self.entries {
            let v = e.constant
                + e.d2.iter().map(|&(p, q, c)| c * d2[(p, q)]).sum::<f64>()
                + e.d1.iter().map(|&(p, q, c)| c * d1[(p, q)]).sum::<f64>();
            out[(e.i, e.j)] = v;
            out[(e.j, e.i)] = v;
        }
        out
    }

    /// Adjoint of the linear part and the constant pairing, for symmetric `w`:
    /// returns `(P2, P1, c)` with `<w, M(D2, D1)> = <P2, D2> + <P1, D1> + c`.
    pub fn adjoint(&self, w: &DMatrix<f64>) -> (DMatrix<f64>, DMatrix<f64>, f64) {
        let np = BlockKind::D2.dim(self.rank);
        let mut g2 = DMatrix::zeros(np, np);
        let mut g1 = DMatrix::zeros(self.rank, self.rank);
        let mut c = 0.0;
        for e in &self.entries {
            let weight = if e.i == e.j { 1.0 } else { 2.0 } * w[(e.i, e.j)];
            if weight == 0.0 {
                continue;
            }
            c += weight * e.constant;
            for &(p, q, x) in &e.d2 {
                g2[(p, q)] += weight * x;
            }
            for &(p, q, x) in &e.d1 {
                g1[(p, q)] += weight * x;
            }
        }
        (functional_to_matrix(g2), functional_to_matrix(g1), c)
    }
}

/// Turns upper-triangle functional coefficients `g` (each entry counted once)
/// into the symmetric matrix `P` with `<P, X> = Σ_{p<=q} g[p,q] X[p,q]`.
pub fn functional_to_matrix(g: DMatrix<f64>) -> DMatrix<f64> {
    let n = g.nrows();
    DMatrix::from_fn(n, n, |a, b| match a.cmp(&b) {
        std::cmp::Ordering::Equal => g[(a, a)],
        std::cmp::Ordering::Less => 0.5 * g[(a, b)],
        std::cmp::Ordering::Greater => 0.5 * g[(b, a)],
    })
}

/// A positivity condition on one metric matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Positivity {
    D,
    Q,
    G,
    T2,
}

/// Sector information used for the optional spin-projection row.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SpinSector {
    pub n_up: usize,
    pub n_down: usize,
}

/// Block layout and rows of the variational problem.
#[derive(Debug, Clone)]
pub struct RdmConstraints {
    pub system: ConstraintSystem,
    /// Block index of each kind present.
    pub blocks: Vec<(BlockKind, usize)>,
    /// Maps of the derived blocks, in block order (D1 and Q1 included).
    pub maps: Vec<AffineMap>,
}

impl RdmConstraints {
    pub fn block(&self, kind: BlockKind) -> Option<usize> {
        self.blocks.iter().find(|(k, _)| *k == kind).map(|&(_, b)| b)
    }

    pub fn map(&self, kind: BlockKind) -> Option<&AffineMap> {
        self.maps.iter().find(|m| m.target == kind)
    }
}

/// Builds the blocks `D2, Q2, G2, [T2], D1, Q1` and the rows
/// * `Tr D2 = N(N-1)/2`,
/// * optionally `Σ_i (±1) D1[i,i] = N_up - N_down` (up orbitals `+1`),
/// * `X[e] - M(D2, D1)[e] = const` for every upper entry of each derived block.
///
/// The 2-RDM condition is required; T2 requires Q and G as well.
pub fn build_constraints(
    rank: usize,
    n_particles: usize,
    conditions: &[Positivity],
    spin: Option<SpinSector>,
) -> Result<RdmConstraints> {
    if conditions.is_empty() {
        return Err(Error::EmptyConditions);
    }
    let has = |p: Positivity| conditions.contains(&p);
    if !has(Positivity::D) {
        return Err(Error::InconsistentConditions("the 2-RDM positivity condition is required".into()));
    }
    if has(Positivity::T2) && !(has(Positivity::Q) && has(Positivity::G)) {
        return Err(Error::InconsistentConditions("T2 is imposed on top of full 2-positivity (D, Q, G)".into()));
    }
    check_sizes(rank, n_particles)?;
    if let Some(s) = spin {
        if s.n_up + s.n_down != n_particles || !rank.is_multiple_of(2) || s.n_up.max(s.n_down) > rank / 2 {
            return Err(Error::InvalidSector(format!(
                "spin sector ({}, {}) incompatible with {n_particles} particles in {rank} orbitals",
                s.n_up, s.n_down
            )));
        }
    }

    let mut kinds = vec![BlockKind::D2];
    for (p, k) in [(Positivity::Q, BlockKind::Q2), (Positivity::G, BlockKind::G2), (Positivity::T2, BlockKind::T2)] {
        if has(p) {
            kinds.push(k);
        }
    }
    kinds.push(BlockKind::D1);
    kinds.push(BlockKind::Q1);

    let mut layout = BlockLayout::new();
    let blocks: Vec<(BlockKind, usize)> = kinds.iter().map(|&k| (k, layout.push(k.name(), k.dim(rank)))).collect();
    let block_of = |k: BlockKind| blocks.iter().find(|(x, _)| *x == k).unwrap().1;
    let (b_d2, b_d1) = (block_of(BlockKind::D2), block_of(BlockKind::D1));

    let maps: Vec<AffineMap> = kinds[1..]
        .par_iter()
        .map(|&k| match k {
            BlockKind::Q2 => map_d_to_q(rank, n_particles),
            BlockKind::G2 => map_d_to_g(rank, n_particles),
            BlockKind::T2 => map_d_to_t2(rank, n_particles),
            BlockKind::D1 => map_d_to_1rdm(rank, n_particles),
            BlockKind::Q1 => map_d_to_1hole(rank, n_particles),
            BlockKind::D2 => unreachable!(),
        })
        .collect::<Result<_>>()?;

    let mut system = ConstraintSystem::new(layout);
    let n = n_particles as f64;
    let np = BlockKind::D2.dim(rank);
    system.push(ConstraintRow::new(
        (0..np).map(|p| ConstraintEntry { block: b_d2, i: p, j: p, coef: 1.0 }).collect(),
        n * (n - 1.0) / 2.0,
        RowTag::Trace,
    ));
    if let Some(s) = spin {
        system.push(ConstraintRow::new(
            (0..rank)
                .map(|i| ConstraintEntry { block: b_d1, i, j: i, coef: if i % 2 == 0 { 1.0 } else { -1.0 } })
                .collect(),
            s.n_up as f64 - s.n_down as f64,
            RowTag::Spin,
        ));
    }
    for map in &maps {
        let b = block_of(map.target);
        for e in &map.entries {
            let mut entries = vec![ConstraintEntry { block: b, i: e.i, j: e.j, coef: 1.0 }];
            entries.extend(e.d2.iter().map(|&(p, q, c)| ConstraintEntry { block: b_d2, i: p, j: q, coef: -c }));
            entries.extend(e.d1.iter().map(|&(p, q, c)| ConstraintEntry { block: b_d1, i: p, j: q, coef: -c }));
            system.push(ConstraintRow::new(
                entries,
                e.constant,
                RowTag::Definition { block: b, entry: sym_index(e.i, e.j) },
            ));
        }
    }
    system.eliminate_redundant(1e-10);
    Ok(RdmConstraints { system, blocks, maps })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn d2_of_determinant(rank: usize, occ: &[usize]) -> DMatrix<f64> {
        let pairs = PairIndexer::new(rank);
        let mut d2 = DMatrix::zeros(pairs.len(), pairs.len());
        for (a, &i) in occ.iter().enumerate() {
            for &j in &occ[a + 1..] {
                let p = pairs.pack(i, j);
                d2[(p, p)] = 1.0;
            }
        }
        d2
    }

    #[test]
    fn determinant_1rdm_is_idempotent() {
        let d2 = d2_of_determinant(4, &[0, 3]);
        let d1 = contract_d2(&d2, 4, 2).unwrap();
        assert_eq!(d1, DMatrix::from_diagonal(&nalgebra::dvector![1.0, 0.0, 0.0, 1.0]));
    }

    #[test]
    fn filled_shell_has_no_holes() {
        let d2 = d2_of_determinant(4, &[0, 1, 2, 3]);
        let q2 = map_d_to_q(4, 4).unwrap().apply(&d2).unwrap();
        assert!(q2.amax() < 1e-14);
    }

    #[test]
    fn q_constant_part_is_identity() {
        let map = map_d_to_q(6, 2).unwrap();
        for e in &map.entries {
            assert_eq!(e.constant, if e.i == e.j { 1.0 } else { 0.0 });
        }
    }

    #[test]
    fn g_on_determinant() {
        // G2[(i,j),(i,j)] = <n_i (1 - n_j)> for i != j, and n_i on (i,i)
        let rank = 6;
        let occ = [1, 2, 4];
        let d2 = d2_of_determinant(rank, &occ);
        let g2 = map_d_to_g(rank, 3).unwrap().apply(&d2).unwrap();
        let n = |i: usize| if occ.contains(&i) { 1.0 } else { 0.0 };
        for i in 0..rank {
            for j in 0..rank {
                let a = i * rank + j;
                let want = if i == j { n(i) } else { n(i) * (1.0 - n(j)) };
                assert!((g2[(a, a)] - want).abs() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn t2_has_no_three_body_terms() {
        assert!(map_d_to_t2(4, 2).is_ok());
    }

    #[test]
    fn rejects_bad_condition_sets() {
        assert!(matches!(build_constraints(4, 2, &[], None), Err(Error::EmptyConditions)));
        assert!(matches!(
            build_constraints(4, 2, &[Positivity::D, Positivity::T2], None),
            Err(Error::InconsistentConditions(_))
        ));
        assert!(matches!(build_constraints(4, 1, &[Positivity::D], None), Err(Error::TooFewParticles(1))));
    }

    #[test]
    fn adjoint_pairs_with_apply() {
        let rank = 4;
        let map = map_d_to_g(rank, 2).unwrap();
        let np = 6;
        let d2 = DMatrix::from_fn(np, np, |a, b| ((a * 7 + b * 7 + a * b) % 5) as f64 * 0.1);
        let d1 = DMatrix::from_fn(rank, rank, |a, b| ((a + b) % 3) as f64 * 0.2);
        let w = DMatrix::from_fn(16, 16, |a, b| ((a + b) % 4) as f64 - 1.5);
        let lhs = w.dot(&map.apply_with(&d2, &d1));
        let (p2, p1, c) = map.adjoint(&w);
        assert!((lhs - (p2.dot(&d2) + p1.dot(&d1) + c)).abs() < 1e-12);
    }
}
