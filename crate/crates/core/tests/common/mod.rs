#![allow(dead_code)]

use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use v2rdm::fock::{FockBasis, SectorMatrix, Wavefunction};
use v2rdm::lattice::{build_extended_hubbard, Boundary, HubbardParams, LatticeSpec, SecondQuantizedOperator};

pub struct RandomModel {
    pub spec: LatticeSpec,
    pub params: HubbardParams,
    pub op: SecondQuantizedOperator,
    pub basis: Arc<FockBasis>,
    /// All eigenpairs, ascending.
    pub energies: Vec<f64>,
    pub states: Vec<Wavefunction>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random chain with `2 <= L <= max_sites`, couplings in [-2, 2] and a random
/// sector with at least two particles, diagonalized densely.
pub fn random_model(rng: &mut ChaCha8Rng, max_sites: usize) -> RandomModel {
    let sites = rng.random_range(2..=max_sites);
    let boundary = if rng.random_bool(0.5) { Boundary::Periodic } else { Boundary::Open };
    let (n_up, n_down) = loop {
        let u = rng.random_range(0..=sites);
        let d = rng.random_range(0..=sites);
        if u + d >= 2 {
            break (u, d);
        }
    };
    let spec = LatticeSpec::new(sites, boundary, n_up, n_down).unwrap();
    let params =
        HubbardParams::new(rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0));
    let op = build_extended_hubbard(&spec, &params).unwrap();
    let basis = Arc::new(FockBasis::new(sites, n_up, n_down).unwrap());
    let (energies, states) = eigenpairs(&op, &basis);
    RandomModel { spec, params, op, basis, energies, states }
}

pub fn eigenpairs(op: &SecondQuantizedOperator, basis: &Arc<FockBasis>) -> (Vec<f64>, Vec<Wavefunction>) {
    let h = SectorMatrix::new(op, basis).unwrap().to_dense();
    let eig = SymmetricEigen::new(h);
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let energies = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let states = order
        .iter()
        .map(|&k| Wavefunction::new(basis.clone(), eig.eigenvectors.column(k).into_owned()).unwrap())
        .collect();
    (energies, states)
}

pub fn random_state(rng: &mut ChaCha8Rng, basis: &Arc<FockBasis>) -> Wavefunction {
    let v = nalgebra::DVector::from_fn(basis.dim(), |_, _| rng.random_range(-1.0..1.0));
    Wavefunction::new(basis.clone(), v).unwrap().normalized()
}

pub fn max_abs_diff(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    (a - b).amax()
}

pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return 0.0;
    }
    m.clone().symmetric_eigenvalues().min()
}
