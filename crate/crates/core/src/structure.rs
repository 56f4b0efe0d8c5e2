//! Reducible su(2) representations: irrep blocks, decoherence-free subspaces
//! and noiseless subsystems.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::liealg::{format_half_integer, spin_rep, LieRepresentation};
use crate::lindblad::{purity_rate, LindbladModel};
use crate::opsalg::{
    common_kernel, gram_schmidt, hermitian_eigen, kron, null_space, CMatrix, CVector, OperatorMatrix, PureState,
    Subspace, C64,
};
use crate::policy::NumericPolicy;
use crate::seeded_rng;
use crate::sieve::minimize_uncertainty_in;
use crate::uncertainty::invariant_uncertainty;

/// One isotypic block `ℂ^{n} ⊗ ℂ^{2j+1}`.
#[derive(Debug, Clone, Serialize)]
pub struct IrrepBlock {
    pub j: f64,
    pub j_label: String,
    pub irrep_dim: usize,
    pub multiplicity: usize,
    /// Column `copy·(2j+1) + k` is the state `|j, m = j − k⟩` of the given copy.
    #[serde(skip)]
    pub isometry: CMatrix,
}

impl IrrepBlock {
    /// Orthonormal basis of the whole block.
    pub fn subspace(&self) -> Subspace {
        Subspace::from_orthonormal_columns(self.isometry.clone())
    }

    /// Highest-weight vector of one copy.
    pub fn highest_weight(&self, copy: usize) -> PureState {
        PureState::from_normalized(self.isometry.column(copy * self.irrep_dim).into_owned())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct IrrepDecomposition {
    pub rep: String,
    pub dim: usize,
    /// Descending in `j`.
    pub blocks: Vec<IrrepBlock>,
    #[serde(skip)]
    generators: Vec<OperatorMatrix>,
}

impl IrrepDecomposition {
    pub fn block(&self, j: f64) -> Option<&IrrepBlock> {
        self.blocks.iter().find(|b| (b.j - j).abs() < 1e-9)
    }

    /// `‖Σ_blocks W W† − I‖`.
    pub fn reconstruction_error(&self) -> f64 {
        let mut sum = CMatrix::zeros(self.dim, self.dim);
        for b in &self.blocks {
            sum += &b.isometry * b.isometry.adjoint();
        }
        (sum - CMatrix::identity(self.dim, self.dim)).norm()
    }

    /// Largest `‖W†GW − I_n ⊗ g‖` over generators `J_x, J_y, J_z`.
    pub fn block_error(&self, block: &IrrepBlock) -> f64 {
        // The trivial irrep has zero generators.
        let irrep = (block.irrep_dim > 1).then(|| spin_rep(block.j).expect("block spin is a valid half-integer"));
        let id = OperatorMatrix::identity(block.multiplicity);
        ["jx", "jy", "jz"]
            .iter()
            .zip(&self.generators)
            .map(|(label, g)| {
                let target = match &irrep {
                    Some(r) => kron(&id, r.operator(label).expect("spin rep has Cartesian generators")),
                    None => OperatorMatrix::zeros(block.multiplicity),
                };
                (&g.compress(&block.isometry) - &target).norm()
            })
            .fold(0.0, f64::max)
    }

    /// `(J, dim, multiplicity)` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("j,irrep_dim,multiplicity\n");
        for b in &self.blocks {
            s.push_str(&format!("{},{},{}\n", b.j_label, b.irrep_dim, b.multiplicity));
        }
        s
    }
}

fn su2_generators(rep: &LieRepresentation) -> Result<[OperatorMatrix; 5]> {
    let get = |l: &str| rep.operator(l).cloned().ok_or_else(|| Error::NotCollective(rep.name().to_string()));
    Ok([get("jx")?, get("jy")?, get("jz")?, get("jp")?, get("jm")?])
}

/// Lexicographic order on amplitude vectors, largest first.
fn lex_cmp(a: &CVector, b: &CVector) -> std::cmp::Ordering {
    for (x, y) in a.iter().zip(b.iter()) {
        for (u, v) in [(x.re, y.re), (x.im, y.im)] {
            if (u - v).abs() > 1e-10 {
                return v.total_cmp(&u);
            }
        }
    }
    std::cmp::Ordering::Equal
}

/// Splits a representation of su(2) into isotypic blocks.
///
/// Highest-weight vectors of spin `j` span the `J_z = j` eigenspace intersected
/// with the Casimir eigenspace `j(j+1)`. Their basis is canonicalized by
/// Gram–Schmidt on the projected standard basis vectors and sorted; each is
/// then lowered with `J_−` to fill its copy.
pub fn decompose(rep: &LieRepresentation) -> Result<IrrepDecomposition> {
    let [jx, jy, jz, _jp, jm] = su2_generators(rep)?;
    let policy = NumericPolicy::STANDARD;
    let (residual, pair) = rep.closure_residual();
    if residual > policy.closure_tol {
        let (i, j) = pair.unwrap_or((0, 0));
        return Err(Error::NotClosed(i, j, residual));
    }
    let dim = rep.dim();
    let casimir = &(&(&jx * &jx) + &(&jy * &jy)) + &(&jz * &jz);
    let zeig = hermitian_eigen(&jz)?;
    let two_m_max = zeig.eigenvalues.iter().fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let two_j_max = (2.0 * two_m_max).round() as i64;
    let mut blocks = Vec::new();
    let mut two_j = two_j_max;
    while two_j >= 0 {
        let j = two_j as f64 / 2.0;
        let level = zeig.eigenspace(j, 1e-8);
        if level.ncols() > 0 {
            let restricted = casimir.compress(&level).hermitian_part();
            let ceig = hermitian_eigen(&restricted)?;
            let hw_local = ceig.eigenspace(j * (j + 1.0), 1e-6);
            if hw_local.ncols() > 0 {
                let hw = &level * hw_local;
                let proj = &hw * hw.adjoint();
                let canonical = gram_schmidt(&proj, 1e-8);
                let mut vecs: Vec<CVector> = canonical.column_iter().map(|c| c.into_owned()).collect();
                vecs.sort_by(lex_cmp);
                let irrep_dim = two_j as usize + 1;
                let mult = vecs.len();
                let mut iso = CMatrix::zeros(dim, mult * irrep_dim);
                for (copy, v) in vecs.into_iter().enumerate() {
                    let mut cur = v;
                    for k in 0..irrep_dim {
                        iso.set_column(copy * irrep_dim + k, &cur);
                        let m = j - k as f64;
                        let norm = (j * (j + 1.0) - m * (m - 1.0)).sqrt();
                        if k + 1 < irrep_dim {
                            cur = jm.apply(&cur) / C64::new(norm, 0.0);
                        }
                    }
                }
                blocks.push(IrrepBlock {
                    j,
                    j_label: format_half_integer(two_j as u32),
                    irrep_dim,
                    multiplicity: mult,
                    isometry: iso,
                });
            }
        }
        two_j -= 1;
    }
    let total: usize = blocks.iter().map(|b| b.irrep_dim * b.multiplicity).sum();
    if total != dim {
        return Err(Error::DimensionMismatch { expected: dim, found: total });
    }
    Ok(IrrepDecomposition { rep: rep.name().to_string(), dim, blocks, generators: vec![jx, jy, jz] })
}

/// Decoherence-free subspace: the common kernel of all Lindblad operators.
pub fn dfs_extract(model: &LindbladModel) -> Result<Subspace> {
    common_kernel(model.lindblads())
}

/// Minimum of an uncertainty functional over one block.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockMinimum {
    pub j: f64,
    /// Invariant uncertainty at a highest-weight vector of the block.
    pub bound: f64,
    pub min_uncertainty: f64,
    pub min_purity_rate: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Theorem4Report {
    pub dfs_dim: usize,
    /// Largest `(ΔI)²` over DFS basis vectors and random superpositions.
    pub max_dfs_uncertainty: f64,
    pub max_dfs_purity_rate: f64,
    /// Minimum of `(ΔI)²` over the orthogonal complement of the DFS.
    pub complement_min_uncertainty: f64,
    pub smallest_nonzero_bound: f64,
    pub blocks: Vec<BlockMinimum>,
}

impl Theorem4Report {
    pub fn passed(&self, zero_tol: f64, bound_tol: f64) -> bool {
        self.dfs_dim > 0
            && self.max_dfs_uncertainty <= zero_tol
            && self.max_dfs_purity_rate <= zero_tol
            && self.complement_min_uncertainty >= self.smallest_nonzero_bound - bound_tol
    }
}

/// Checks that the DFS is exactly the zero set of `(ΔI)²` and that every
/// state outside it pays at least the smallest nonzero block bound.
pub fn verify_theorem4(model: &LindbladModel, rep: &LieRepresentation, n_starts: usize, seed: u64) -> Result<Theorem4Report> {
    if model.dim() != rep.dim() {
        return Err(Error::DimensionMismatch { expected: rep.dim(), found: model.dim() });
    }
    let decomposition = decompose(rep)?;
    let dfs = dfs_extract(model)?;
    let mut rng = seeded_rng(seed);
    let mut probes = dfs.vectors();
    if dfs.dim() > 0 {
        for _ in 0..20 {
            let c = PureState::haar_random(dfs.dim(), &mut rng);
            probes.push(PureState::embed(dfs.basis(), &c));
        }
    }
    let mut max_u: f64 = 0.0;
    let mut max_r: f64 = 0.0;
    for p in &probes {
        max_u = max_u.max(invariant_uncertainty(p, rep)?);
        max_r = max_r.max(purity_rate(p, model));
    }
    let ops = rep.hermitian_operators();
    let complement = orthogonal_complement(dfs.basis(), rep.dim());
    let complement_min = if complement.ncols() == 0 {
        f64::INFINITY
    } else {
        minimize_uncertainty_in(&ops, &complement, n_starts, seed ^ 0x5eed).1
    };
    let mut blocks = Vec::new();
    for (k, b) in decomposition.blocks.iter().enumerate() {
        let bound = invariant_uncertainty(&b.highest_weight(0), rep)?;
        let min_u = minimize_uncertainty_in(&ops, &b.isometry, n_starts, seed.wrapping_add(k as u64 + 1)).1;
        let min_r = 2.0 * minimize_uncertainty_in(model.lindblads(), &b.isometry, n_starts, seed.wrapping_add(k as u64 + 101)).1;
        blocks.push(BlockMinimum { j: b.j, bound, min_uncertainty: min_u, min_purity_rate: min_r });
    }
    let smallest_nonzero_bound = blocks
        .iter()
        .map(|b| b.bound)
        .filter(|&x| x > 1e-9)
        .fold(f64::INFINITY, f64::min);
    Ok(Theorem4Report {
        dfs_dim: dfs.dim(),
        max_dfs_uncertainty: max_u,
        max_dfs_purity_rate: max_r,
        complement_min_uncertainty: complement_min,
        smallest_nonzero_bound,
        blocks,
    })
}

/// Orthonormal basis of the complement of the column span of `q`.
pub(crate) fn orthogonal_complement(q: &CMatrix, dim: usize) -> CMatrix {
    let mut all = CMatrix::zeros(dim, q.ncols() + dim);
    all.view_mut((0, 0), (dim, q.ncols())).copy_from(q);
    all.view_mut((0, q.ncols()), (dim, dim)).copy_from(&CMatrix::identity(dim, dim));
    let full = gram_schmidt(&all, 1e-8);
    full.columns(q.ncols(), full.ncols() - q.ncols()).into_owned()
}

/// Noiseless-subsystem structure of one block.
#[derive(Debug, Clone, Serialize)]
pub struct NsReport {
    pub j: f64,
    pub ns_dim: usize,
    pub noisy_dim: usize,
    /// `‖W†GW − I ⊗ g‖`, largest over generators.
    pub factorization_error: f64,
    /// Dimension of the commutant of the represented algebra on the block.
    pub commutant_dim: usize,
    #[serde(skip)]
    pub isometry: CMatrix,
}

impl NsReport {
    pub fn commutant_matches(&self) -> bool {
        self.commutant_dim == self.ns_dim * self.ns_dim
    }
}

/// Identifies `ℋ_j ≃ ℋ_NS ⊗ ℋ_N` for a block with multiplicity above one.
pub fn ns_identify(decomposition: &IrrepDecomposition, j: f64) -> Result<NsReport> {
    let block = decomposition.block(j).ok_or(Error::MissingBlock(j))?;
    if block.multiplicity < 2 {
        return Err(Error::NoMultiplicity(j));
    }
    let d = block.isometry.ncols();
    let mut stacked = CMatrix::zeros(d * d * decomposition.generators.len(), d * d);
    let id = CMatrix::identity(d, d);
    for (k, g) in decomposition.generators.iter().enumerate() {
        let gb = g.compress(&block.isometry).into_matrix();
        // vec([X, G]) = (Gᵀ ⊗ I − I ⊗ G) vec X.
        let map = gb.transpose().kronecker(&id) - id.kronecker(&gb);
        stacked.view_mut((k * d * d, 0), (d * d, d * d)).copy_from(&map);
    }
    let (rank, _) = null_space(&stacked, NumericPolicy::STANDARD.commutant_rank_tol);
    Ok(NsReport {
        j,
        ns_dim: block.multiplicity,
        noisy_dim: block.irrep_dim,
        factorization_error: decomposition.block_error(block),
        commutant_dim: d * d - rank,
        isometry: block.isometry.clone(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::collective_spin_rep;

    fn mults(n: usize) -> Vec<(String, usize)> {
        decompose(&collective_spin_rep(n).unwrap())
            .unwrap()
            .blocks
            .iter()
            .map(|b| (b.j_label.clone(), b.multiplicity))
            .collect()
    }

    #[test]
    fn coupling_tables() {
        assert_eq!(mults(2), vec![("1".into(), 1), ("0".into(), 1)]);
        assert_eq!(mults(3), vec![("3/2".into(), 1), ("1/2".into(), 2)]);
        assert_eq!(mults(4), vec![("2".into(), 1), ("1".into(), 3), ("0".into(), 2)]);
    }

    #[test]
    fn blocks_factorize() {
        let d = decompose(&collective_spin_rep(4).unwrap()).unwrap();
        assert!(d.reconstruction_error() <= 1e-9);
        for b in &d.blocks {
            assert!(d.block_error(b) <= 1e-8, "j={}", b.j);
            let gram = b.isometry.adjoint() * &b.isometry;
            assert!((gram - CMatrix::identity(b.isometry.ncols(), b.isometry.ncols())).norm() <= 1e-10);
        }
    }

    #[test]
    fn decomposition_is_deterministic() {
        let rep = collective_spin_rep(3).unwrap();
        let a = decompose(&rep).unwrap();
        let b = decompose(&rep).unwrap();
        for (x, y) in a.blocks.iter().zip(&b.blocks) {
            assert_eq!(x.isometry, y.isometry);
        }
    }

    #[test]
    fn ns_dimensions() {
        let d4 = decompose(&collective_spin_rep(4).unwrap()).unwrap();
        let ns = ns_identify(&d4, 1.0).unwrap();
        assert_eq!((ns.ns_dim, ns.noisy_dim, ns.commutant_dim), (3, 3, 9));
        let ns0 = ns_identify(&d4, 0.0).unwrap();
        assert_eq!((ns0.ns_dim, ns0.noisy_dim, ns0.commutant_dim), (2, 1, 4));
        assert!(matches!(ns_identify(&d4, 2.0), Err(Error::NoMultiplicity(_))));
        let d3 = decompose(&collective_spin_rep(3).unwrap()).unwrap();
        let ns = ns_identify(&d3, 0.5).unwrap();
        assert_eq!((ns.ns_dim, ns.noisy_dim, ns.commutant_dim), (2, 2, 4));
        assert!(matches!(ns_identify(&d3, 0.0), Err(Error::MissingBlock(_))));
    }

    #[test]
    fn non_su2_rejected() {
        let rep = crate::liealg::boson_rep(4, 1).unwrap();
        assert!(matches!(decompose(&rep), Err(Error::NotCollective(_))));
    }

    #[test]
    fn four_spin_dfs_minimum_uncertainty() {
        let rep = collective_spin_rep(4).unwrap();
        let model = LindbladModel::dissipative(rep.hermitian_operators()).unwrap();
        let r = verify_theorem4(&model, &rep, 12, 5).unwrap();
        assert_eq!(r.dfs_dim, 2);
        assert!(r.passed(1e-10, 1e-6), "{r:?}");
        let b1 = r.blocks.iter().find(|b| b.j == 1.0).unwrap();
        assert!((b1.min_uncertainty - 1.0).abs() <= 1e-6, "{b1:?}");
        assert!((b1.min_purity_rate - 2.0).abs() <= 1e-6);
    }
}
