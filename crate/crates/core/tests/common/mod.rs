#![allow(dead_code)]

use gcsieve::lindblad::LindbladModel;
use gcsieve::opsalg::{CMatrix, OperatorMatrix, C64};
use gcsieve::SeededRng;
use rand::Rng;

pub fn random_matrix(dim: usize, rng: &mut SeededRng) -> CMatrix {
    CMatrix::from_fn(dim, dim, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

pub fn random_operator(dim: usize, rng: &mut SeededRng) -> OperatorMatrix {
    OperatorMatrix::new(random_matrix(dim, rng)).unwrap()
}

pub fn random_hermitian(dim: usize, rng: &mut SeededRng) -> OperatorMatrix {
    let m = random_matrix(dim, rng);
    OperatorMatrix::new((&m + m.adjoint()) * C64::new(0.5, 0.0)).unwrap()
}

/// Random Hamiltonian plus one to three random jump operators.
pub fn random_model(dim: usize, rng: &mut SeededRng) -> LindbladModel {
    let n = rng.gen_range(1..=3);
    let ls = (0..n).map(|_| random_operator(dim, rng)).collect();
    LindbladModel::new(random_hermitian(dim, rng), ls).unwrap()
}

pub fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}
