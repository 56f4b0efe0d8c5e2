mod common;

use common::{random_hermitian, random_matrix, random_operator};
use gcsieve::liealg::{collective_spin_rep, spin_rep};
use gcsieve::opsalg::{common_kernel, hermitian_eigen, kron, mat_exp, mat_exp_matrix, CMatrix, OperatorMatrix, C64};
use gcsieve::seeded_rng;

/// Scaling and squaring around a long Taylor sum.
fn taylor_exp(a: &CMatrix) -> CMatrix {
    let n = a.nrows();
    let s = (a.norm().log2().ceil().max(0.0) as i32) + 4;
    let b = a * C64::new(0.5f64.powi(s), 0.0);
    let mut term = CMatrix::identity(n, n);
    let mut sum = term.clone();
    for k in 1..40 {
        term = &term * &b * C64::new(1.0 / k as f64, 0.0);
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

#[test]
fn expm_agrees_with_taylor() {
    let mut rng = seeded_rng(11);
    for dim in [1, 2, 3, 5, 8, 13] {
        for scale in [1e-3, 0.3, 2.0, 9.0] {
            let a = random_matrix(dim, &mut rng) * C64::new(scale, 0.0);
            let got = mat_exp_matrix(&a);
            let want = taylor_exp(&a);
            let rel = (&got - &want).norm() / want.norm();
            assert!(rel < 1e-12, "dim {dim} scale {scale}: {rel:e}");
        }
    }
}

#[test]
fn expm_of_hermitian_generator_is_unitary() {
    let mut rng = seeded_rng(12);
    let h = random_hermitian(6, &mut rng);
    let u = mat_exp(&h.scale(C64::new(0.0, -3.0))).unwrap();
    u.verify_unitary().unwrap();
    // Spectral oracle.
    let eig = hermitian_eigen(&h).unwrap();
    let spectral = eig.apply_fn(|l| C64::from_polar(1.0, -3.0 * l));
    assert!((u.matrix() - spectral).norm() < 1e-11);
}

#[test]
fn expm_of_nilpotent_truncates() {
    let mut n = CMatrix::zeros(3, 3);
    n[(0, 1)] = C64::new(2.0, 0.0);
    n[(1, 2)] = C64::new(3.0, 0.0);
    let e = mat_exp_matrix(&n);
    let want = CMatrix::identity(3, 3) + &n + &n * &n * C64::new(0.5, 0.0);
    assert!((e - want).norm() < 1e-14);
}

#[test]
fn kron_mixed_product_and_trace() {
    let mut rng = seeded_rng(13);
    let (a, b, c, d) = (
        random_operator(2, &mut rng),
        random_operator(3, &mut rng),
        random_operator(2, &mut rng),
        random_operator(3, &mut rng),
    );
    let lhs = &kron(&a, &b) * &kron(&c, &d);
    let rhs = kron(&(&a * &c), &(&b * &d));
    assert!((lhs.matrix() - rhs.matrix()).norm() < 1e-12);
    assert!((kron(&a, &b).trace() - a.trace() * b.trace()).norm() < 1e-12);
    assert_eq!(kron(&a, &b).dim(), 6);
}

#[test]
fn two_spin_total_angular_momentum() {
    // J² on two spin-1/2 sites: triplet 2 (×3), singlet 0 (×1).
    let rep = collective_spin_rep(2).unwrap();
    let j2 = ["jx", "jy", "jz"]
        .iter()
        .map(|l| {
            let j = rep.operator(l).unwrap();
            j * j
        })
        .fold(OperatorMatrix::zeros(4), |acc, x| &acc + &x);
    let eig = hermitian_eigen(&j2).unwrap();
    let want = [0.0, 2.0, 2.0, 2.0];
    for (x, y) in eig.eigenvalues.iter().zip(want) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn collective_kernel_is_singlet_space() {
    let rep = collective_spin_rep(4).unwrap();
    let ops: Vec<OperatorMatrix> = ["jx", "jy", "jz"].iter().map(|l| rep.operator(l).unwrap().clone()).collect();
    let k = common_kernel(&ops).unwrap();
    assert_eq!(k.dim(), 2);
    assert!(k.orthonormality_error() < 1e-12);
    for v in k.vectors() {
        for o in &ops {
            assert!(o.apply(v.amplitudes()).norm() < 1e-10);
        }
    }
    // Two sites: one singlet.
    let rep2 = collective_spin_rep(2).unwrap();
    let ops2: Vec<OperatorMatrix> = ["jx", "jy", "jz"].iter().map(|l| rep2.operator(l).unwrap().clone()).collect();
    assert_eq!(common_kernel(&ops2).unwrap().dim(), 1);
}

#[test]
fn spin_casimir_is_scalar() {
    for j in [0.5, 1.0, 1.5, 2.0] {
        let rep = spin_rep(j).unwrap();
        let c = rep.casimir();
        let d = rep.dim();
        let scalar = c.trace() / d as f64;
        let diff = c.matrix() - CMatrix::identity(d, d) * scalar;
        assert!(diff.norm() < 1e-12, "j = {j}");
    }
}
