//! Extended Hubbard chains and their reduction to a two-body energy matrix.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::{adjoint_string, normal_order_into, LadderOp, NormalTerm};
use crate::index::{spin_orbital, PairIndexer};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Boundary {
    Periodic,
    Open,
}

/// A one-dimensional chain together with the particle sector of interest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LatticeSpec {
    pub sites: usize,
    pub boundary: Boundary,
    pub n_up: usize,
    pub n_down: usize,
}

impl LatticeSpec {
    pub fn new(sites: usize, boundary: Boundary, n_up: usize, n_down: usize) -> Result<Self> {
        if sites == 0 {
            return Err(Error::InvalidLattice("at least one site is required".into()));
        }
        if n_up > sites || n_down > sites {
            return Err(Error::InvalidSector(format!("filling ({n_up}, {n_down}) exceeds {sites} sites per spin")));
        }
        Ok(Self { sites, boundary, n_up, n_down })
    }

    /// Half filling with `L/2` electrons of each spin; `L` must be even.
    pub fn half_filled(sites: usize, boundary: Boundary) -> Result<Self> {
        if !sites.is_multiple_of(2) {
            return Err(Error::OddSites(sites));
        }
        Self::new(sites, boundary, sites / 2, sites / 2)
    }

    /// Number of spin orbitals `r = 2L`.
    pub fn rank(&self) -> usize {
        2 * self.sites
    }

    pub fn n_particles(&self) -> usize {
        self.n_up + self.n_down
    }

    /// Nearest-neighbour bonds, each unordered pair exactly once.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let l = self.sites;
        let mut bonds: Vec<(usize, usize)> = (0..l.saturating_sub(1)).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Periodic && l > 2 {
            bonds.push((l - 1, 0));
        }
        bonds
    }
}

/// Hopping `t`, on-site repulsion `U` and nearest-neighbour repulsion `V`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HubbardParams {
    pub t: f64,
    pub u: f64,
    pub v: f64,
}

impl HubbardParams {
    pub fn new(t: f64, u: f64, v: f64) -> Self {
        Self { t, u, v }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OperatorTerm {
    pub coef: f64,
    pub ops: Vec<LadderOp>,
}

/// A real linear combination of ladder-operator strings over `rank` spin orbitals.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondQuantizedOperator {
    rank: usize,
    terms: Vec<OperatorTerm>,
}

impl SecondQuantizedOperator {
    pub fn new(rank: usize) -> Self {
        Self { rank, terms: Vec::new() }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn terms(&self) -> &[OperatorTerm] {
        &self.terms
    }

    pub fn push(&mut self, coef: f64, ops: Vec<LadderOp>) {
        debug_assert!(ops.iter().all(|op| op.orbital < self.rank));
        self.terms.push(OperatorTerm { coef, ops });
    }

    pub fn adjoint(&self) -> Self {
        Self {
            rank: self.rank,
            terms: self.terms.iter().map(|t| OperatorTerm { coef: t.coef, ops: adjoint_string(&t.ops) }).collect(),
        }
    }

    /// Normal-ordered expansion of the whole sum.
    pub fn normal_ordered(&self) -> BTreeMap<NormalTerm, f64> {
        let mut out = BTreeMap::new();
        for t in &self.terms {
            normal_order_into(&t.ops, t.coef, &mut out);
        }
        out.retain(|_, c| *c != 0.0);
        out
    }

    /// Hermiticity as a sum: the operator and its adjoint have the same
    /// normal-ordered expansion.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let mut diff = self.normal_ordered();
        for (k, c) in self.adjoint().normal_ordered() {
            *diff.entry(k).or_insert(0.0) -= c;
        }
        diff.values().all(|c| c.abs() <= tol)
    }
}

fn number(orbital: usize) -> [LadderOp; 2] {
    [LadderOp::create(orbital), LadderOp::annihilate(orbital)]
}

/// Extended Hubbard Hamiltonian on a chain:
/// `-t Σ_<ij>,σ (a†_iσ a_jσ + h.c.) + U Σ_i n_i↑ n_i↓ + V Σ_<ij>,σσ' n_iσ n_jσ'`.
///
/// Terms with a zero coefficient are omitted.
pub fn build_extended_hubbard(spec: &LatticeSpec, params: &HubbardParams) -> Result<SecondQuantizedOperator> {
    if spec.sites < 2 {
        return Err(Error::InvalidLattice(format!("need at least 2 sites, got {}", spec.sites)));
    }
    let mut op = SecondQuantizedOperator::new(spec.rank());
    let bonds = spec.bonds();

    if params.t != 0.0 {
        for &(i, j) in &bonds {
            for spin in 0..2 {
                let (p, q) = (spin_orbital(i, spin), spin_orbital(j, spin));
                op.push(-params.t, vec![LadderOp::create(p), LadderOp::annihilate(q)]);
                op.push(-params.t, vec![LadderOp::create(q), LadderOp::annihilate(p)]);
            }
        }
    }
    if params.u != 0.0 {
        for i in 0..spec.sites {
            let mut s = number(spin_orbital(i, 0)).to_vec();
            s.extend(number(spin_orbital(i, 1)));
            op.push(params.u, s);
        }
    }
    if params.v != 0.0 {
        for &(i, j) in &bonds {
            for s1 in 0..2 {
                for s2 in 0..2 {
                    let mut s = number(spin_orbital(i, s1)).to_vec();
                    s.extend(number(spin_orbital(j, s2)));
                    op.push(params.v, s);
                }
            }
        }
    }
    Ok(op)
}

/// Two-body energy matrix `K2` on the packed pair space with
/// `E = Tr(K2 · D2)` for every state with `n_particles` particles,
/// where `D2[(i,j),(k,l)] = <a†_i a†_j a_l a_k>` and `Tr D2 = N(N-1)/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedTwoBodyMatrix {
    pub k2: DMatrix<f64>,
    pub n_particles: usize,
    pub rank: usize,
}

impl ReducedTwoBodyMatrix {
    /// `Tr(K2 · D2)`.
    pub fn energy(&self, d2: &DMatrix<f64>) -> f64 {
        self.k2.dot(d2)
    }
}

/// Folds one-body and constant parts into the two-body matrix at fixed N.
pub fn reduce_to_two_body(op: &SecondQuantizedOperator, n_particles: usize) -> Result<ReducedTwoBodyMatrix> {
    if let Some(t) = op.terms().iter().find(|t| t.ops.len() % 2 == 1) {
        return Err(Error::OddString(t.ops.len()));
    }
    if n_particles < 2 {
        return Err(Error::TooFewParticles(n_particles));
    }
    let r = op.rank();
    let pairs = PairIndexer::new(r);
    let np = pairs.len();
    let n = n_particles as f64;
    let n_pairs = n * (n - 1.0) / 2.0;
    let mut k2 = DMatrix::<f64>::zeros(np, np);

    for (term, c) in op.normal_ordered() {
        match (term.creators.as_slice(), term.annihilators.as_slice()) {
            ([], []) => {
                for p in 0..np {
                    k2[(p, p)] += c / n_pairs;
                }
            }
            // a†_i a_k = 1/(N-1) Σ_j a†_i a†_j a_j a_k
            (&[i], &[k]) => {
                for j in 0..r {
                    let (Some((row, s1)), Some((col, s2))) = (pairs.signed(i, j), pairs.signed(k, j)) else {
                        continue;
                    };
                    k2[(row, col)] += c * s1 * s2 / (n - 1.0);
                }
            }
            (&[p, q], &[s, r_]) => {
                k2[(pairs.pack(p, q), pairs.pack(r_, s))] += c;
            }
            _ => return Err(Error::StringTooLong(term.rank())),
        }
    }
    let sym = (&k2 + k2.transpose()) * 0.5;
    Ok(ReducedTwoBodyMatrix { k2: sym, n_particles, rank: r })
}

/// Ground-state energy of the half-filled chain at `t = 0`:
/// `UL/2` in the charge-ordered regime `U < 2V`, `VL` in the spin-ordered
/// regime `U > 2V`, and their common value at the crossing.
pub fn analytic_t0_energy(sites: usize, u: f64, v: f64) -> Result<f64> {
    if !sites.is_multiple_of(2) {
        return Err(Error::OddSites(sites));
    }
    let l = sites as f64;
    Ok((u * l / 2.0).min(v * l))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn periodic(l: usize) -> LatticeSpec {
        LatticeSpec::half_filled(l, Boundary::Periodic).unwrap()
    }

    #[test]
    fn dimer_hopping_term_count() {
        let spec = LatticeSpec::new(2, Boundary::Open, 1, 1).unwrap();
        let op = build_extended_hubbard(&spec, &HubbardParams::new(1.0, 0.0, 0.0)).unwrap();
        assert_eq!(op.terms().len(), 4);
        assert!(op.terms().iter().all(|t| t.ops.len() == 2));
    }

    #[test]
    fn periodic_two_sites_single_bond() {
        let spec = LatticeSpec::new(2, Boundary::Periodic, 1, 1).unwrap();
        assert_eq!(spec.bonds(), vec![(0, 1)]);
        assert_eq!(periodic(4).bonds().len(), 4);
        assert_eq!(LatticeSpec::new(4, Boundary::Open, 2, 2).unwrap().bonds().len(), 3);
    }

    #[test]
    fn rejects_single_site() {
        let spec = LatticeSpec::new(1, Boundary::Open, 1, 0).unwrap();
        assert!(matches!(
            build_extended_hubbard(&spec, &HubbardParams::new(1.0, 1.0, 1.0)),
            Err(Error::InvalidLattice(_))
        ));
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        for boundary in [Boundary::Open, Boundary::Periodic] {
            let spec = LatticeSpec::half_filled(4, boundary).unwrap();
            let op = build_extended_hubbard(&spec, &HubbardParams::new(0.7, 1.3, -0.4)).unwrap();
            assert!(op.is_hermitian(0.0));
        }
    }

    #[test]
    fn onsite_term_is_diagonal_in_pair_basis() {
        let spec = periodic(4);
        let op = build_extended_hubbard(&spec, &HubbardParams::new(0.0, 1.0, 0.0)).unwrap();
        let pairs = PairIndexer::new(spec.rank());
        for n in 2..=6 {
            let red = reduce_to_two_body(&op, n).unwrap();
            for p in 0..pairs.len() {
                for q in 0..pairs.len() {
                    let (i, j) = pairs.unpack(p);
                    let expected = if p == q && j == i + 1 && i % 2 == 0 { 1.0 } else { 0.0 };
                    assert_eq!(red.k2[(p, q)], expected, "pair {p},{q}");
                }
            }
        }
    }

    #[test]
    fn reduction_errors() {
        let mut op = SecondQuantizedOperator::new(4);
        op.push(1.0, vec![LadderOp::create(0)]);
        assert!(matches!(reduce_to_two_body(&op, 2), Err(Error::OddString(1))));

        let spec = periodic(2);
        let h = build_extended_hubbard(&spec, &HubbardParams::new(1.0, 1.0, 0.0)).unwrap();
        assert!(matches!(reduce_to_two_body(&h, 1), Err(Error::TooFewParticles(1))));

        let mut three = SecondQuantizedOperator::new(6);
        three.push(
            1.0,
            vec![
                LadderOp::create(0),
                LadderOp::create(1),
                LadderOp::create(2),
                LadderOp::annihilate(3),
                LadderOp::annihilate(4),
                LadderOp::annihilate(5),
            ],
        );
        assert!(matches!(reduce_to_two_body(&three, 3), Err(Error::StringTooLong(6))));
    }

    #[test]
    fn reduced_matrix_is_symmetric() {
        let spec = periodic(4);
        let op = build_extended_hubbard(&spec, &HubbardParams::new(1.0, 2.0, 0.5)).unwrap();
        let red = reduce_to_two_body(&op, 4).unwrap();
        assert_eq!(red.k2, red.k2.transpose());
    }

    #[test]
    fn analytic_branches() {
        assert_eq!(analytic_t0_energy(6, 1.0, 1.0).unwrap(), 3.0);
        assert_eq!(analytic_t0_energy(6, 1.0, 0.25).unwrap(), 1.5);
        assert_eq!(analytic_t0_energy(6, 1.0, 0.5).unwrap(), 3.0);
        assert!(matches!(analytic_t0_energy(5, 1.0, 1.0), Err(Error::OddSites(5))));
    }
}
