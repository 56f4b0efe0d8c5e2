//! Concrete representations of the dynamical Lie algebras and the
//! eigenoperator (weak-coupling) check.
//!
//! Four families are shipped: the spin-`J` irrep of su(2), the oscillator
//! algebra on a truncated multimode Fock space, the single-mode squeezing
//! algebra spanned by linear and quadratic bosonic operators, and the
//! collective (total-spin) representation of su(2) on `N` spin-1/2s.
//!
//! Truncated bosonic algebras only close on a guarded subspace that stays away
//! from the Fock cutoff; closure residuals are measured there.

use nalgebra::{DMatrix, SymmetricEigen, SVD};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::opsalg::{kron_all, CMatrix, OperatorMatrix, PureState, C64, I, ONE};
use crate::policy::NumericPolicy;

/// An operator with a short human-readable label.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledOperator {
    pub label: String,
    pub op: OperatorMatrix,
}

impl LabeledOperator {
    pub fn new(label: impl Into<String>, op: OperatorMatrix) -> Self {
        Self { label: label.into(), op }
    }
}

/// Which family a representation belongs to, with its defining parameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum RepKind {
    /// Spin-`J` irrep; `two_j = 2J`.
    Spin { two_j: u32 },
    Boson { cutoff: usize, modes: usize },
    Squeeze { cutoff: usize },
    CollectiveSpin { sites: usize },
}

impl RepKind {
    /// True for the su(2) families, whose Hermitian basis can be calibrated
    /// against the Killing form.
    pub fn is_semisimple(&self) -> bool {
        matches!(self, RepKind::Spin { .. } | RepKind::CollectiveSpin { .. })
    }
}

/// A representation of a Lie algebra on a finite-dimensional Hilbert space.
#[derive(Debug, Clone)]
pub struct LieRepresentation {
    name: String,
    kind: RepKind,
    dim: usize,
    basis: Vec<LabeledOperator>,
    hermitian_basis: Vec<LabeledOperator>,
    gram: DMatrix<f64>,
    casimir: OperatorMatrix,
    highest_weight: Option<PureState>,
    raising: Vec<OperatorMatrix>,
    cutoff: Option<usize>,
    /// Basis vectors on which truncated bosonic relations hold exactly.
    guarded: Option<Vec<usize>>,
    orthonormalized: bool,
}

impl LieRepresentation {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> RepKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis(&self) -> &[LabeledOperator] {
        &self.basis
    }

    pub fn hermitian_basis(&self) -> &[LabeledOperator] {
        &self.hermitian_basis
    }

    pub fn hermitian_operators(&self) -> Vec<OperatorMatrix> {
        self.hermitian_basis.iter().map(|l| l.op.clone()).collect()
    }

    /// Trace-form Gram matrix `Re tr(X_j X_k) / dim` of the Hermitian basis.
    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    /// `Σ_j X_j²` over the Hermitian basis.
    pub fn casimir(&self) -> &OperatorMatrix {
        &self.casimir
    }

    pub fn highest_weight_vector(&self) -> Option<&PureState> {
        self.highest_weight.as_ref()
    }

    /// Operators that annihilate the highest-weight vector (`J_+`, or the
    /// annihilation operators for bosons).
    pub fn raising_operators(&self) -> &[OperatorMatrix] {
        &self.raising
    }

    pub fn cutoff(&self) -> Option<usize> {
        self.cutoff
    }

    pub fn is_orthonormalized(&self) -> bool {
        self.orthonormalized
    }

    /// Operator with the given label, searching the complex basis first.
    pub fn operator(&self, label: &str) -> Option<&OperatorMatrix> {
        self.basis
            .iter()
            .chain(self.hermitian_basis.iter())
            .find(|l| l.label == label)
            .map(|l| &l.op)
    }

    /// Projector onto the guarded subspace (identity for finite algebras).
    pub fn guard_projector(&self) -> OperatorMatrix {
        match &self.guarded {
            None => OperatorMatrix::identity(self.dim),
            Some(idx) => {
                let diag: Vec<f64> = (0..self.dim)
                    .map(|k| if idx.contains(&k) { 1.0 } else { 0.0 })
                    .collect();
                OperatorMatrix::from_real_diagonal(&diag)
            }
        }
    }

    fn guard_isometry(&self) -> CMatrix {
        match &self.guarded {
            None => CMatrix::identity(self.dim, self.dim),
            Some(idx) => CMatrix::from_fn(self.dim, idx.len(), |r, c| if r == idx[c] { ONE } else { C64::new(0.0, 0.0) }),
        }
    }

    /// Largest residual of `[b_i, b_j]` after least-squares projection onto
    /// the span of the complex basis, relative to `‖b_i‖‖b_j‖` and measured on
    /// the guarded subspace.
    pub fn closure_residual(&self) -> (f64, Option<(usize, usize)>) {
        let v = self.guard_isometry();
        let compressed: Vec<CMatrix> = self.basis.iter().map(|b| b.op.compress(&v).into_matrix()).collect();
        let rows = v.ncols() * v.ncols();
        let cols = compressed.len();
        let design = CMatrix::from_fn(rows, cols, |r, c| compressed[c][(r % v.ncols(), r / v.ncols())]);
        let svd = SVD::new(design.clone(), true, true);
        let mut worst = (0.0, None);
        for i in 0..self.basis.len() {
            for j in (i + 1)..self.basis.len() {
                let comm = self.basis[i].op.commutator(&self.basis[j].op).compress(&v).into_matrix();
                let target = CMatrix::from_fn(rows, 1, |r, _| comm[(r % v.ncols(), r / v.ncols())]);
                let norm = compressed[i].norm() * compressed[j].norm();
                if norm == 0.0 {
                    continue;
                }
                let coeffs = svd.solve(&target, 1e-12).expect("SVD carries both factors");
                let res = (&design * coeffs - &target).norm() / norm;
                if res > worst.0 {
                    worst = (res, Some((i, j)));
                }
            }
        }
        worst
    }

    fn verify_closure(&self) -> Result<()> {
        let (res, pair) = self.closure_residual();
        if res > NumericPolicy::STANDARD.closure_tol {
            let (i, j) = pair.unwrap_or((0, 0));
            return Err(Error::NotClosed(i, j, res));
        }
        Ok(())
    }

    /// Real structure constants `f_jkl` of the Hermitian basis,
    /// `[X_j, X_k] = i Σ_l f_jkl X_l`, by least squares.
    pub fn structure_constants(&self) -> Vec<DMatrix<f64>> {
        structure_constants(&self.hermitian_operators())
    }

    /// Replaces the Hermitian basis (for example by a rescaled one).
    pub fn with_hermitian_basis(mut self, basis: Vec<LabeledOperator>) -> Result<Self> {
        for b in &basis {
            b.op.check_dim(self.dim)?;
            b.op.verify_hermitian()?;
        }
        self.hermitian_basis = basis;
        self.refresh_derived();
        self.orthonormalized = false;
        Ok(self)
    }

    fn refresh_derived(&mut self) {
        self.gram = trace_gram(&self.hermitian_operators(), self.dim);
        self.casimir = self
            .hermitian_basis
            .iter()
            .fold(OperatorMatrix::zeros(self.dim), |acc, x| &acc + &(&x.op * &x.op));
    }

    fn assemble(
        name: String,
        kind: RepKind,
        dim: usize,
        basis: Vec<LabeledOperator>,
        hermitian_basis: Vec<LabeledOperator>,
        highest_weight: PureState,
        raising: Vec<OperatorMatrix>,
        cutoff: Option<usize>,
        guarded: Option<Vec<usize>>,
    ) -> Result<Self> {
        let mut rep = Self {
            name,
            kind,
            dim,
            basis,
            hermitian_basis,
            gram: DMatrix::zeros(0, 0),
            casimir: OperatorMatrix::zeros(dim),
            highest_weight: Some(highest_weight),
            raising,
            cutoff,
            guarded,
            orthonormalized: true,
        };
        rep.refresh_derived();
        rep.verify_closure()?;
        Ok(rep)
    }
}

fn trace_gram(ops: &[OperatorMatrix], dim: usize) -> DMatrix<f64> {
    DMatrix::from_fn(ops.len(), ops.len(), |j, k| (ops[j].matrix() * ops[k].matrix()).trace().re / dim as f64)
}

pub(crate) fn structure_constants(ops: &[OperatorMatrix]) -> Vec<DMatrix<f64>> {
    let n = ops.len();
    let d = ops.first().map(|o| o.dim()).unwrap_or(0);
    let design = CMatrix::from_fn(d * d, n, |r, c| ops[c].matrix()[(r % d, r / d)]);
    let svd = SVD::new(design, true, true);
    let mut f = vec![DMatrix::zeros(n, n); n];
    for j in 0..n {
        for k in 0..n {
            // [X_j, X_k] / i
            let comm = ops[j].commutator(&ops[k]).scale(-I);
            let target = CMatrix::from_fn(d * d, 1, |r, _| comm.matrix()[(r % d, r / d)]);
            let coeffs = svd.solve(&target, 1e-12).expect("SVD carries both factors");
            for l in 0..n {
                f[l][(j, k)] = coeffs[l].re;
            }
        }
    }
    // f[l][(j, k)] holds f_jkl; regroup as f_j as an (k, l) matrix.
    (0..n)
        .map(|j| DMatrix::from_fn(n, n, |k, l| f[l][(j, k)]))
        .collect()
}

fn spin_matrices(two_j: u32) -> (OperatorMatrix, OperatorMatrix, OperatorMatrix) {
    let j = two_j as f64 / 2.0;
    let dim = two_j as usize + 1;
    // Basis index k carries m = j − k.
    let m = |k: usize| j - k as f64;
    let jz = OperatorMatrix::from_real_diagonal(&(0..dim).map(m).collect::<Vec<_>>());
    let jp = OperatorMatrix::from_fn(dim, |r, c| {
        if c >= 1 && r == c - 1 {
            let mc = m(c);
            C64::new((j * (j + 1.0) - mc * (mc + 1.0)).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    });
    let jm = jp.adjoint();
    (jp, jm, jz)
}

fn su2_basis(jp: &OperatorMatrix, jm: &OperatorMatrix, jz: &OperatorMatrix) -> (Vec<LabeledOperator>, Vec<LabeledOperator>) {
    let jx = (jp + jm).scale_real(0.5);
    let jy = (jp - jm).scale(C64::new(0.0, -0.5));
    (
        vec![
            LabeledOperator::new("jp", jp.clone()),
            LabeledOperator::new("jm", jm.clone()),
            LabeledOperator::new("jz", jz.clone()),
        ],
        vec![
            LabeledOperator::new("jx", jx),
            LabeledOperator::new("jy", jy),
            LabeledOperator::new("jz", jz.clone()),
        ],
    )
}

/// Parses a spin quantum number, requiring `2J` to be a positive integer.
pub fn two_j_of(j: f64) -> Result<u32> {
    let twice = 2.0 * j;
    if !(twice.is_finite() && twice >= 1.0 && (twice - twice.round()).abs() < 1e-12) {
        return Err(Error::InvalidSpin(j));
    }
    Ok(twice.round() as u32)
}

/// Spin-`J` irrep of su(2), basis ordered `m = J, J−1, …, −J`.
pub fn spin_rep(j: f64) -> Result<LieRepresentation> {
    let two_j = two_j_of(j)?;
    let (jp, jm, jz) = spin_matrices(two_j);
    let dim = two_j as usize + 1;
    let (basis, herm) = su2_basis(&jp, &jm, &jz);
    LieRepresentation::assemble(
        format!("su2-spin{}", format_half_integer(two_j)),
        RepKind::Spin { two_j },
        dim,
        basis,
        herm,
        PureState::basis(dim, 0),
        vec![jp],
        None,
        None,
    )
}

pub(crate) fn format_half_integer(two_j: u32) -> String {
    if two_j % 2 == 0 {
        format!("{}", two_j / 2)
    } else {
        format!("{}/2", two_j)
    }
}

/// Single-mode annihilation operator on `{|0⟩, …, |cutoff⟩}`.
pub fn annihilation(cutoff: usize) -> OperatorMatrix {
    OperatorMatrix::from_fn(cutoff + 1, |r, c| {
        if c == r + 1 {
            C64::new((c as f64).sqrt(), 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    })
}

/// Embeds a single-site operator at `site` among `sites` identical factors.
pub fn embed_site(op: &OperatorMatrix, site: usize, sites: usize) -> OperatorMatrix {
    let id = OperatorMatrix::identity(op.dim());
    let factors: Vec<&OperatorMatrix> = (0..sites).map(|k| if k == site { op } else { &id }).collect();
    kron_all(factors)
}

/// Indices of multimode Fock states whose every occupation is `≤ limit`.
fn guarded_indices(cutoff: usize, modes: usize, limit: usize) -> Vec<usize> {
    let base = cutoff + 1;
    (0..base.pow(modes as u32))
        .filter(|&idx| {
            let mut rest = idx;
            (0..modes).all(|_| {
                let occ = rest % base;
                rest /= base;
                occ <= limit
            })
        })
        .collect()
}

/// Isometry onto multimode Fock states with every occupation `≤ limit`.
pub fn fock_isometry(cutoff: usize, modes: usize, limit: usize) -> CMatrix {
    let idx = guarded_indices(cutoff, modes, limit);
    let dim = (cutoff + 1).pow(modes as u32);
    CMatrix::from_fn(dim, idx.len(), |r, c| if r == idx[c] { ONE } else { C64::new(0.0, 0.0) })
}

/// Oscillator algebra `{1, a_i, a_i†}` on `modes` truncated modes.
///
/// The Fock space of each mode is `{|0⟩, …, |cutoff⟩}`; mode 1 is the
/// leftmost tensor factor. The Hermitian basis is `{1, x_i, p_i}` with
/// `x = (a + a†)/√2`, `p = i(a† − a)/√2`.
pub fn boson_rep(cutoff: usize, modes: usize) -> Result<LieRepresentation> {
    if cutoff < 4 {
        return Err(Error::CutoffTooSmall { cutoff, minimum: 4 });
    }
    if modes < 1 {
        return Err(Error::OutOfRange { what: "modes", value: modes, min: 1, max: usize::MAX });
    }
    let a1 = annihilation(cutoff);
    let dim = (cutoff + 1).pow(modes as u32);
    let id = OperatorMatrix::identity(dim);
    let mut basis = vec![LabeledOperator::new("id", id.clone())];
    let mut herm = vec![LabeledOperator::new("id", id)];
    let mut raising = Vec::new();
    let s = std::f64::consts::FRAC_1_SQRT_2;
    for mode in 0..modes {
        let a = embed_site(&a1, mode, modes);
        let ad = a.adjoint();
        let suffix = if modes == 1 { String::new() } else { format!("{}", mode + 1) };
        let x = (&a + &ad).scale_real(s);
        let p = (&ad - &a).scale(C64::new(0.0, s));
        basis.push(LabeledOperator::new(format!("a{suffix}"), a.clone()));
        basis.push(LabeledOperator::new(format!("adag{suffix}"), ad));
        herm.push(LabeledOperator::new(format!("x{suffix}"), x));
        herm.push(LabeledOperator::new(format!("p{suffix}"), p));
        raising.push(a);
    }
    let name = if modes == 1 { "h3-boson".to_string() } else { format!("h3-boson-{modes}modes") };
    LieRepresentation::assemble(
        name,
        RepKind::Boson { cutoff, modes },
        dim,
        basis,
        herm,
        PureState::basis(dim, 0),
        raising,
        Some(cutoff),
        Some(guarded_indices(cutoff, modes, cutoff - 1)),
    )
}

/// Single-mode squeezing algebra `{1, a, a†, a², a†², a†a + 1/2}`.
pub fn squeeze_rep(cutoff: usize) -> Result<LieRepresentation> {
    if cutoff < 6 {
        return Err(Error::CutoffTooSmall { cutoff, minimum: 6 });
    }
    let dim = cutoff + 1;
    let a = annihilation(cutoff);
    let ad = a.adjoint();
    let a2 = &a * &a;
    let ad2 = &ad * &ad;
    let id = OperatorMatrix::identity(dim);
    let n_half = &(&ad * &a) + &id.scale_real(0.5);
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let basis = vec![
        LabeledOperator::new("id", id.clone()),
        LabeledOperator::new("a", a.clone()),
        LabeledOperator::new("adag", ad.clone()),
        LabeledOperator::new("a2", a2.clone()),
        LabeledOperator::new("adag2", ad2.clone()),
        LabeledOperator::new("nhalf", n_half.clone()),
    ];
    let herm = vec![
        LabeledOperator::new("id", id),
        LabeledOperator::new("x", (&a + &ad).scale_real(s)),
        LabeledOperator::new("p", (&ad - &a).scale(C64::new(0.0, s))),
        LabeledOperator::new("k1", (&a2 + &ad2).scale_real(0.5)),
        LabeledOperator::new("k2", (&ad2 - &a2).scale(C64::new(0.0, 0.5))),
        LabeledOperator::new("nhalf", n_half),
    ];
    LieRepresentation::assemble(
        "h6-squeeze".to_string(),
        RepKind::Squeeze { cutoff },
        dim,
        basis,
        herm,
        PureState::basis(dim, 0),
        vec![a],
        Some(cutoff),
        Some((0..=cutoff - 2).collect()),
    )
}

/// Total-spin representation `J_a = Σ_i σ_a^{(i)}/2` on `N` spin-1/2s.
///
/// Site 1 is the leftmost factor; `|↑⟩` is basis index 0 on each site.
pub fn collective_spin_rep(sites: usize) -> Result<LieRepresentation> {
    if !(1..=8).contains(&sites) {
        return Err(Error::OutOfRange { what: "spins", value: sites, min: 1, max: 8 });
    }
    let (sp, sm, sz) = spin_matrices(1);
    let sum = |op: &OperatorMatrix| {
        (0..sites).fold(OperatorMatrix::zeros(1 << sites), |acc, k| &acc + &embed_site(op, k, sites))
    };
    let jp = sum(&sp);
    let jm = sum(&sm);
    let jz = sum(&sz);
    let (basis, herm) = su2_basis(&jp, &jm, &jz);
    let dim = 1 << sites;
    LieRepresentation::assemble(
        format!("su2-collective-{sites}"),
        RepKind::CollectiveSpin { sites },
        dim,
        basis,
        herm,
        PureState::basis(dim, 0),
        vec![jp],
        None,
        None,
    )
}

/// Eigenoperator fit `[H, L_ℓ] ≈ λ_ℓ L_ℓ` for each Lindblad operator.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WclCertificate {
    pub lambdas: Vec<f64>,
    /// `‖[H, L_ℓ] − λ_ℓ L_ℓ‖ / ‖L_ℓ‖`.
    pub residuals: Vec<f64>,
    pub passes: Vec<bool>,
}

impl WclCertificate {
    pub fn passed(&self) -> bool {
        self.passes.iter().all(|&p| p)
    }
}

/// Fits `λ_ℓ = tr(L_ℓ†[H, L_ℓ]) / tr(L_ℓ†L_ℓ)` and reports the residual of the
/// eigenoperator relation for every Lindblad operator.
pub fn wcl_check(hamiltonian: &OperatorMatrix, lindblads: &[OperatorMatrix]) -> Result<WclCertificate> {
    hamiltonian.verify_hermitian()?;
    let tol = NumericPolicy::STANDARD.wcl_tol;
    let mut cert = WclCertificate { lambdas: Vec::new(), residuals: Vec::new(), passes: Vec::new() };
    for (k, l) in lindblads.iter().enumerate() {
        l.check_dim(hamiltonian.dim())?;
        let norm = l.norm();
        if norm == 0.0 {
            return Err(Error::ZeroOperator(k));
        }
        let comm = hamiltonian.commutator(l);
        let lambda = (l.inner(&comm) / l.inner(l)).re;
        let residual = (&comm - &l.scale_real(lambda)).norm() / norm;
        cert.lambdas.push(lambda);
        cert.residuals.push(residual);
        cert.passes.push(residual <= tol);
    }
    Ok(cert)
}

/// Killing-form value assigned to each calibrated su(2) basis element; the
/// bare `J_a` satisfy `tr(ad_{J_a}²) = 2`.
const SU2_KILLING_NORM: f64 = 2.0;

/// Rescales the Hermitian basis so its trace-form Gram matrix is a multiple of
/// the identity.
///
/// For su(2) families the basis is Löwdin-orthogonalized and then calibrated
/// against the Killing form, which returns the bare `J_a` for any input
/// scaling. For bosonic families the semisimple part is fixed by name: the
/// central identity is dropped and the quadrature operators are kept.
pub fn orthonormalize_basis(rep: &LieRepresentation) -> Result<LieRepresentation> {
    let mut out = rep.clone();
    let ops = rep.hermitian_operators();
    match rep.kind {
        RepKind::Spin { .. } | RepKind::CollectiveSpin { .. } => {
            let gram = trace_gram(&ops, rep.dim);
            let eig = SymmetricEigen::new(gram.clone());
            let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
            let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
            if !(max > 0.0) || min <= 1e-12 * max {
                return Err(Error::DegenerateGram);
            }
            let inv_sqrt = &eig.eigenvectors
                * DMatrix::from_diagonal(&eig.eigenvalues.map(|x| 1.0 / x.sqrt()))
                * eig.eigenvectors.transpose();
            let lowdin: Vec<OperatorMatrix> = (0..ops.len())
                .map(|j| {
                    (0..ops.len()).fold(OperatorMatrix::zeros(rep.dim), |acc, k| {
                        &acc + &ops[k].scale_real(inv_sqrt[(j, k)])
                    })
                })
                .collect();
            let f = structure_constants(&lowdin);
            // Killing form of element j: tr(ad_j ad_j) with (ad_j)_{lk} = i f_jkl.
            let killing: Vec<f64> = f.iter().map(|fj| -(fj * fj).trace()).collect();
            let mean = killing.iter().sum::<f64>() / killing.len() as f64;
            if !(mean > 0.0) {
                return Err(Error::DegenerateGram);
            }
            let scale = (SU2_KILLING_NORM / mean).sqrt();
            out.hermitian_basis = lowdin
                .into_iter()
                .zip(&rep.hermitian_basis)
                .map(|(op, l)| LabeledOperator::new(l.label.clone(), op.scale_real(scale)))
                .collect();
        }
        RepKind::Boson { .. } | RepKind::Squeeze { .. } => {
            let gram = trace_gram(&ops, rep.dim);
            if (0..ops.len()).any(|j| gram[(j, j)] <= 0.0) {
                return Err(Error::DegenerateGram);
            }
            out.hermitian_basis.retain(|l| l.label != "id");
        }
    }
    out.refresh_derived();
    out.orthonormalized = true;
    Ok(out)
}

/// Representation specification as stored in configuration files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepSpec {
    pub name: String,
    #[serde(default)]
    pub parameters: RepParameters,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RepParameters {
    #[serde(default, rename = "J", alias = "j")]
    pub j: Option<f64>,
    #[serde(default, rename = "N", alias = "n")]
    pub n: Option<usize>,
    #[serde(default)]
    pub cutoff: Option<usize>,
    #[serde(default)]
    pub modes: Option<usize>,
}

impl RepSpec {
    /// Parses the compact form `spin:1`, `boson:30`, `boson:10x2`,
    /// `squeeze:30` or `collective:4`.
    pub fn parse_short(s: &str) -> Result<Self> {
        let (family, arg) = s
            .split_once(':')
            .ok_or_else(|| Error::Config(format!("representation '{s}' is not of the form family:parameter")))?;
        let bad = || Error::Config(format!("cannot parse parameter of representation '{s}'"));
        let mut p = RepParameters::default();
        match family {
            "spin" => {
                p.j = Some(match arg.split_once('/') {
                    Some((num, den)) => {
                        num.trim().parse::<f64>().map_err(|_| bad())? / den.trim().parse::<f64>().map_err(|_| bad())?
                    }
                    None => arg.parse().map_err(|_| bad())?,
                })
            }
            "boson" => {
                let (c, m) = arg.split_once('x').unwrap_or((arg, "1"));
                p.cutoff = Some(c.parse().map_err(|_| bad())?);
                p.modes = Some(m.parse().map_err(|_| bad())?);
            }
            "squeeze" => p.cutoff = Some(arg.parse().map_err(|_| bad())?),
            "collective" => p.n = Some(arg.parse().map_err(|_| bad())?),
            _ => return Err(Error::Config(format!("unknown representation family '{family}'"))),
        }
        Ok(Self { name: family.to_string(), parameters: p })
    }

    pub fn build(&self) -> Result<LieRepresentation> {
        let p = &self.parameters;
        let need = |v: Option<usize>, what: &str| {
            v.ok_or_else(|| Error::Config(format!("representation '{}' needs parameter '{what}'", self.name)))
        };
        let family = self.name.split('-').next().unwrap_or("");
        match (self.name.as_str(), family) {
            ("spin", _) | (_, "su2") if !self.name.contains("collective") => {
                spin_rep(p.j.ok_or_else(|| Error::Config("spin representation needs parameter 'J'".into()))?)
            }
            ("collective", _) | (_, "su2") => collective_spin_rep(need(p.n, "N")?),
            ("boson", _) | (_, "h3") => boson_rep(need(p.cutoff, "cutoff")?, p.modes.unwrap_or(1)),
            ("squeeze", _) | (_, "h6") => squeeze_rep(need(p.cutoff, "cutoff")?),
            _ => Err(Error::Config(format!("unknown representation '{}'", self.name))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_close(a: &OperatorMatrix, b: &OperatorMatrix, tol: f64) {
        let d = (a - b).norm();
        assert!(d <= tol, "difference {d:e}");
    }

    #[test]
    fn spin_half_is_pauli_over_two() {
        let rep = spin_rep(0.5).unwrap();
        let jx = rep.operator("jx").unwrap();
        let jy = rep.operator("jy").unwrap();
        let jz = rep.operator("jz").unwrap();
        assert_close(&jx.commutator(jy), &jz.scale(I), 1e-12);
        assert_close(jz, &OperatorMatrix::from_real_diagonal(&[0.5, -0.5]), 0.0);
        assert_close(jx, &OperatorMatrix::from_fn(2, |r, c| C64::new(if r != c { 0.5 } else { 0.0 }, 0.0)), 1e-15);
    }

    #[test]
    fn spin_one_jz() {
        let rep = spin_rep(1.0).unwrap();
        assert_close(rep.operator("jz").unwrap(), &OperatorMatrix::from_real_diagonal(&[1.0, 0.0, -1.0]), 0.0);
    }

    #[test]
    fn casimir_is_scalar() {
        for two_j in 1..=8u32 {
            let j = two_j as f64 / 2.0;
            let rep = spin_rep(j).unwrap();
            let expect = OperatorMatrix::identity(rep.dim()).scale_real(j * (j + 1.0));
            assert_close(rep.casimir(), &expect, 1e-12);
        }
    }

    #[test]
    fn invalid_spin_rejected() {
        assert!(matches!(spin_rep(0.3), Err(Error::InvalidSpin(_))));
        assert!(matches!(spin_rep(0.0), Err(Error::InvalidSpin(_))));
        assert!(matches!(spin_rep(-1.0), Err(Error::InvalidSpin(_))));
    }

    #[test]
    fn highest_weight_annihilated() {
        for rep in [spin_rep(1.5).unwrap(), boson_rep(8, 2).unwrap(), collective_spin_rep(3).unwrap()] {
            let hw = rep.highest_weight_vector().unwrap();
            for r in rep.raising_operators() {
                assert!(r.apply(hw.amplitudes()).norm() <= 1e-10);
            }
        }
    }

    #[test]
    fn boson_commutator_on_guarded_subspace() {
        let rep = boson_rep(10, 1).unwrap();
        let a = rep.operator("a").unwrap();
        let ad = rep.operator("adag").unwrap();
        let c = a.commutator(ad);
        for k in 0..10 {
            assert!((c.matrix()[(k, k)] - ONE).norm() < 1e-12);
        }
        // Truncation edge.
        assert!((c.matrix()[(10, 10)].re + 10.0).abs() < 1e-12);
        let n = ad * a;
        for k in 0..=10 {
            assert!((n.matrix()[(k, k)].re - k as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn two_mode_operators_commute() {
        let rep = boson_rep(5, 2).unwrap();
        let a1 = rep.operator("a1").unwrap();
        let ad2 = rep.operator("adag2").unwrap();
        assert_eq!(a1.commutator(ad2).norm(), 0.0);
    }

    #[test]
    fn boson_cutoff_guard() {
        assert!(matches!(boson_rep(3, 1), Err(Error::CutoffTooSmall { .. })));
        assert!(matches!(squeeze_rep(5), Err(Error::CutoffTooSmall { .. })));
    }

    #[test]
    fn squeeze_commutators() {
        let rep = squeeze_rep(12).unwrap();
        let a = rep.operator("a").unwrap();
        let a2 = rep.operator("a2").unwrap();
        let ad2 = rep.operator("adag2").unwrap();
        let n = &rep.operator("adag").unwrap().clone() * a;
        let p = rep.guard_projector();
        let lhs = &(&p * &a2.commutator(ad2)) * &p;
        let rhs = &(&p * &(&n.scale_real(4.0) + &OperatorMatrix::identity(13).scale_real(2.0))) * &p;
        assert_close(&lhs, &rhs, 1e-10);
        assert_close(&n.commutator(a), &-a, 1e-12);
    }

    #[test]
    fn collective_single_site_matches_spin_half() {
        let c = collective_spin_rep(1).unwrap();
        let s = spin_rep(0.5).unwrap();
        for (x, y) in c.hermitian_basis().iter().zip(s.hermitian_basis()) {
            assert_close(&x.op, &y.op, 0.0);
        }
        assert!(matches!(collective_spin_rep(9), Err(Error::OutOfRange { .. })));
        assert!(matches!(collective_spin_rep(0), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn wcl_examples() {
        let rep = boson_rep(12, 1).unwrap();
        let a = rep.operator("a").unwrap().clone();
        let ad = rep.operator("adag").unwrap().clone();
        let omega = 1.7;
        let h = (&ad * &a).scale_real(omega);
        let cert = wcl_check(&h, &[a.clone(), &a * &a, &a + &ad]).unwrap();
        assert!((cert.lambdas[0] + omega).abs() < 1e-12 && cert.passes[0]);
        assert!((cert.lambdas[1] + 2.0 * omega).abs() < 1e-12 && cert.passes[1]);
        assert!(!cert.passes[2] && cert.residuals[2] > 0.1);
        assert!(matches!(wcl_check(&h, &[OperatorMatrix::zeros(13)]), Err(Error::ZeroOperator(0))));
        assert!(wcl_check(&a, &[a.clone()]).is_err());
    }

    #[test]
    fn wcl_scale_invariance() {
        let rep = spin_rep(1.0).unwrap();
        let h = rep.operator("jz").unwrap().scale_real(0.8);
        let l = rep.operator("jm").unwrap().clone();
        let c = C64::new(-0.3, 2.2);
        let a = wcl_check(&h, &[l.clone()]).unwrap();
        let b = wcl_check(&h, &[l.scale(c)]).unwrap();
        assert!((a.lambdas[0] - b.lambdas[0]).abs() < 1e-12);
        assert!((a.residuals[0] - b.residuals[0]).abs() < 1e-12);
    }

    #[test]
    fn orthonormalize_keeps_bare_spin_operators() {
        for j in [0.5, 1.0, 2.0] {
            let rep = spin_rep(j).unwrap();
            let o = orthonormalize_basis(&rep).unwrap();
            for (x, y) in o.hermitian_basis().iter().zip(rep.hermitian_basis()) {
                assert_close(&x.op, &y.op, 1e-10);
            }
        }
    }

    #[test]
    fn spin_one_gram_diagonal() {
        let rep = spin_rep(1.0).unwrap();
        // tr(J_a J_b) = δ_ab J(J+1)(2J+1)/3, divided by the dimension.
        let expect = 2.0 * 3.0 / 3.0 / 3.0;
        for j in 0..3 {
            for k in 0..3 {
                let e = if j == k { expect } else { 0.0 };
                assert!((rep.gram()[(j, k)] - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn orthonormalize_rescaled_basis() {
        let rep = spin_rep(1.5).unwrap();
        let h = rep.hermitian_operators();
        // Skewed and rescaled: mixes J_x into J_y.
        let skew = vec![
            LabeledOperator::new("u", h[0].scale_real(2.5)),
            LabeledOperator::new("v", &h[1].scale_real(0.3) + &h[0].scale_real(0.7)),
            LabeledOperator::new("w", h[2].scale_real(-4.0)),
        ];
        let rep = rep.with_hermitian_basis(skew).unwrap();
        let o = orthonormalize_basis(&rep).unwrap();
        let g = o.gram();
        let eig = SymmetricEigen::new(g.clone());
        let max = eig.eigenvalues.max();
        let min = eig.eigenvalues.min();
        assert!((max / min - 1.0).abs() < 1e-10);
        let j = 1.5;
        assert_close(o.casimir(), &OperatorMatrix::identity(4).scale_real(j * (j + 1.0)), 1e-9);
    }

    #[test]
    fn orthonormalize_rejects_degenerate() {
        let rep = spin_rep(1.0).unwrap();
        let h = rep.hermitian_operators();
        let degenerate = vec![
            LabeledOperator::new("u", h[0].clone()),
            LabeledOperator::new("v", h[0].scale_real(2.0)),
            LabeledOperator::new("w", h[2].clone()),
        ];
        let rep = rep.with_hermitian_basis(degenerate).unwrap();
        assert!(matches!(orthonormalize_basis(&rep), Err(Error::DegenerateGram)));
    }

    #[test]
    fn closure_of_shipped_reps() {
        for rep in [
            spin_rep(2.0).unwrap(),
            boson_rep(10, 1).unwrap(),
            boson_rep(5, 2).unwrap(),
            squeeze_rep(10).unwrap(),
            collective_spin_rep(4).unwrap(),
        ] {
            let (res, _) = rep.closure_residual();
            assert!(res <= 1e-9, "{}: {res:e}", rep.name());
        }
    }

    #[test]
    fn spec_parsing() {
        let r = RepSpec::parse_short("spin:3/2").unwrap().build().unwrap();
        assert_eq!(r.dim(), 4);
        let r = RepSpec::parse_short("boson:6x2").unwrap().build().unwrap();
        assert_eq!(r.dim(), 49);
        let r: RepSpec = serde_json::from_str(r#"{"name":"collective","parameters":{"N":3}}"#).unwrap();
        assert_eq!(r.build().unwrap().dim(), 8);
        let r: RepSpec = serde_json::from_str(r#"{"name":"su2-spinJ","parameters":{"J":1}}"#).unwrap();
        assert_eq!(r.build().unwrap().dim(), 3);
        assert!(RepSpec::parse_short("qutrit:3").is_err());
        assert!(RepSpec::parse_short("spin").is_err());
    }
}
