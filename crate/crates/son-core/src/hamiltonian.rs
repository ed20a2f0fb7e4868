//! Nearest-neighbour interactions, open-chain Hamiltonians, kernels and low
//! spectra.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{
    lanczos_low_subspace, lanczos_lowest, orthonormal_columns, projector_distance, symmetric_eigen, to_complex,
    CMatrix, CsrMatrix, LanczosOptions, OperatorMatrix, RMatrix,
};
use crate::mps::{mps_vector_unchecked, MpsFamily};
use crate::repr::{spin_matrices, spin_projector};
use crate::report::{Datum, VerificationReport};

pub const DEFAULT_SPARSE_CAP: usize = 2_000_000;
/// Dimension above which kernels and low spectra switch to Lanczos.
pub const DEFAULT_DENSE_CROSSOVER: usize = 2048;
pub const DEFAULT_KERNEL_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum InteractionSpec {
    /// `a·SWAP + b·Q` on `ℂⁿ ⊗ ℂⁿ`.
    SwapQ { n: usize, a: f64, b: f64 },
    /// `𝟙 + SWAP − 2Q`.
    SoNAklt { n: usize },
    /// `𝟙 − Q`.
    SouthPole { n: usize },
    /// `⅓𝟙 + ½S·S + ⅙(S·S)²` on two spin-1 sites.
    AkltSu2,
    /// `P^(3/2)` on three spin-½ sites.
    MajumdarGhosh,
    /// `σ₁·σ₂ + σ₁·σ₃ + σ₂·σ₃` on three spin-½ sites.
    MajumdarGhoshRaw,
    /// `−J S·S` on two spin-s sites, `s = two_s / 2`.
    Heisenberg { two_s: u32, j: f64 },
    /// `cos θ S·S + sin θ (S·S)²` on two spin-1 sites.
    BilinearBiquadratic { theta: f64 },
}

impl InteractionSpec {
    pub fn local_dim(&self) -> usize {
        match *self {
            Self::SwapQ { n, .. } | Self::SoNAklt { n } | Self::SouthPole { n } => n,
            Self::AkltSu2 | Self::BilinearBiquadratic { .. } => 3,
            Self::MajumdarGhosh | Self::MajumdarGhoshRaw => 2,
            Self::Heisenberg { two_s, .. } => two_s as usize + 1,
        }
    }

    pub fn support(&self) -> usize {
        match self {
            Self::MajumdarGhosh | Self::MajumdarGhoshRaw => 3,
            _ => 2,
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = match *self {
            Self::SwapQ { n, a, b } => n < 2 || !a.is_finite() || !b.is_finite(),
            Self::SoNAklt { n } | Self::SouthPole { n } => n < 2,
            Self::Heisenberg { two_s, j } => two_s == 0 || !j.is_finite(),
            Self::BilinearBiquadratic { theta } => !theta.is_finite(),
            _ => false,
        };
        if bad {
            return Err(Error::InvalidArgument(format!("invalid interaction parameters {self:?}")));
        }
        Ok(())
    }
}

pub fn swap_matrix(n: usize) -> RMatrix {
    let mut m = RMatrix::zeros(n * n, n * n);
    for a in 0..n {
        for b in 0..n {
            m[(b * n + a, a * n + b)] = 1.0;
        }
    }
    m
}

/// Projector onto `ξ = n^{-1/2} Σ|ii⟩`.
pub fn q_matrix(n: usize) -> RMatrix {
    let mut m = RMatrix::zeros(n * n, n * n);
    for i in 0..n {
        for j in 0..n {
            m[(i * n + i, j * n + j)] = 1.0 / n as f64;
        }
    }
    m
}

fn real_of(m: &CMatrix) -> Result<RMatrix> {
    OperatorMatrix::new(m.clone()).real_part_checked(1e-12)
}

fn spin_dot(two_s: u32) -> Result<RMatrix> {
    let sp = spin_matrices(two_s);
    let mut out = CMatrix::zeros(sp.dim * sp.dim, sp.dim * sp.dim);
    for m in sp.components() {
        out += m.kronecker(m);
    }
    real_of(&out)
}

fn kron3(a: &CMatrix, b: &CMatrix, c: &CMatrix) -> CMatrix {
    a.kronecker(b).kronecker(c)
}

/// Real matrix of the interaction on its support.
pub fn interaction_matrix(spec: &InteractionSpec) -> Result<RMatrix> {
    spec.validate()?;
    Ok(match *spec {
        InteractionSpec::SwapQ { n, a, b } => swap_matrix(n) * a + q_matrix(n) * b,
        InteractionSpec::SoNAklt { n } => RMatrix::identity(n * n, n * n) + swap_matrix(n) - q_matrix(n) * 2.0,
        InteractionSpec::SouthPole { n } => RMatrix::identity(n * n, n * n) - q_matrix(n),
        InteractionSpec::AkltSu2 => {
            let ss = spin_dot(2)?;
            RMatrix::identity(9, 9) / 3.0 + &ss * 0.5 + &ss * &ss / 6.0
        }
        InteractionSpec::MajumdarGhosh => {
            // (S_tot² − 3/4)/3 is 1 on total spin 3/2 and 0 on spin 1/2
            let sp = spin_matrices(1);
            let id = CMatrix::identity(2, 2);
            let mut s2 = CMatrix::zeros(8, 8);
            for m in sp.components() {
                let tot = kron3(m, &id, &id) + kron3(&id, m, &id) + kron3(&id, &id, m);
                s2 += &tot * &tot;
            }
            (real_of(&s2)? - RMatrix::identity(8, 8) * 0.75) / 3.0
        }
        InteractionSpec::MajumdarGhoshRaw => {
            let sp = spin_matrices(1);
            let id = CMatrix::identity(2, 2);
            let mut out = CMatrix::zeros(8, 8);
            for m in sp.components() {
                let s = m * C64::new(2.0, 0.0);
                out += kron3(&s, &s, &id) + kron3(&s, &id, &s) + kron3(&id, &s, &s);
            }
            real_of(&out)?
        }
        InteractionSpec::Heisenberg { two_s, j } => spin_dot(two_s)? * -j,
        InteractionSpec::BilinearBiquadratic { theta } => {
            let ss = spin_dot(2)?;
            &ss * libm::cos(theta) + &ss * &ss * libm::sin(theta)
        }
    })
}

/// The interaction as an operator on its support.
pub fn build_interaction(spec: &InteractionSpec) -> Result<OperatorMatrix> {
    Ok(OperatorMatrix::new(to_complex(&interaction_matrix(spec)?)))
}

/// `P^(2)` on two spin-1 sites from the spectral decomposition of `S·S`.
pub fn aklt_projector_spectral() -> Result<RMatrix> {
    real_of(&spin_projector(2, 4)?.mat)
}

/// Open-chain `H_ℓ = Σ_x h_{x,…}`.
#[derive(Clone, Debug)]
pub struct ChainHamiltonian {
    pub interaction: InteractionSpec,
    pub l: usize,
    pub matrix: CsrMatrix,
}

impl ChainHamiltonian {
    pub fn dim(&self) -> usize {
        self.matrix.dim
    }

    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        self.matrix.matvec(x, y)
    }
}

fn chain_dim(d: usize, l: usize, cap: usize) -> Result<usize> {
    let mut size = 1usize;
    for _ in 0..l {
        size = size.saturating_mul(d);
    }
    if size > cap {
        return Err(Error::CapExceeded { what: "chain Hilbert space dimension d^l", size, cap });
    }
    Ok(size)
}

/// Embeds `h` at every position of a chain of `l` sites with local dimension
/// `d` and returns the sum in compressed rows.
pub fn embed_terms(h: &RMatrix, d: usize, support: usize, l: usize, cap: usize) -> Result<CsrMatrix> {
    let dim = chain_dim(d, l, cap)?;
    let local = d.pow(support as u32);
    if h.nrows() != local || h.ncols() != local {
        return Err(Error::InvalidArgument("interaction does not match its support".into()));
    }
    if l < support {
        return Err(Error::InvalidArgument(format!("chain of {l} sites is shorter than the interaction")));
    }
    let mut triplets = Vec::new();
    for x in 0..=l - support {
        let stride = d.pow((l - x - support) as u32);
        for col in 0..dim {
            let c = (col / stride) % local;
            let base = col - c * stride;
            for r in 0..local {
                let v = h[(r, c)];
                if v.abs() > 1e-15 {
                    triplets.push((base + r * stride, col, v));
                }
            }
        }
    }
    let mut m = CsrMatrix::from_triplets(dim, triplets)?;
    // cancellations inside a row leave rounding dust
    m.values.iter_mut().for_each(|v| {
        if v.abs() < 1e-14 {
            *v = 0.0
        }
    });
    CsrMatrix::from_triplets(dim, m_to_triplets(&m))
}

fn m_to_triplets(m: &CsrMatrix) -> Vec<(usize, usize, f64)> {
    let mut t = Vec::with_capacity(m.nnz());
    for r in 0..m.dim {
        for p in m.indptr[r]..m.indptr[r + 1] {
            t.push((r, m.indices[p], m.values[p]));
        }
    }
    t
}

pub fn chain_hamiltonian(spec: &InteractionSpec, l: usize, cap: usize) -> Result<ChainHamiltonian> {
    let h = interaction_matrix(spec)?;
    let matrix = embed_terms(&h, spec.local_dim(), spec.support(), l, cap)?;
    Ok(ChainHamiltonian { interaction: *spec, l, matrix })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolverPath {
    Dense,
    Lanczos,
}

#[derive(Clone, Debug)]
pub struct KernelBasis {
    /// Orthonormal columns.
    pub vectors: RMatrix,
    pub dim: usize,
    /// `‖Hv‖` per column.
    pub residuals: Vec<f64>,
    pub threshold: f64,
    /// Lowest eigenvalue above the threshold, when the solver saw one.
    pub next_value: Option<f64>,
    pub path: SolverPath,
}

#[derive(Clone, Copy, Debug)]
pub struct KernelOptions {
    pub tol: f64,
    pub dense_crossover: usize,
    pub lanczos: LanczosOptions,
    pub max_vectors: usize,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            tol: DEFAULT_KERNEL_TOL,
            dense_crossover: DEFAULT_DENSE_CROSSOVER,
            lanczos: LanczosOptions::default(),
            max_vectors: 512,
        }
    }
}

fn residuals(h: &ChainHamiltonian, v: &RMatrix) -> Vec<f64> {
    let mut y = vec![0.0; h.dim()];
    (0..v.ncols())
        .map(|c| {
            let x: Vec<f64> = v.column(c).iter().copied().collect();
            h.apply(&x, &mut y);
            libm::sqrt(y.iter().map(|t| t * t).sum::<f64>())
        })
        .collect()
}

fn apply_columns(h: &ChainHamiltonian, v: &RMatrix) -> RMatrix {
    let mut out = RMatrix::zeros(v.nrows(), v.ncols());
    let mut y = vec![0.0; h.dim()];
    for c in 0..v.ncols() {
        let x: Vec<f64> = v.column(c).iter().copied().collect();
        h.apply(&x, &mut y);
        out.column_mut(c).copy_from_slice(&y);
    }
    out
}

/// Rayleigh-Ritz on the block Krylov space `span[V, HV, …, H^depth V]`,
/// keeping the lowest `k` vectors. Vectors locked one at a time carry errors
/// that a block step removes.
fn refine_low_subspace(h: &ChainHamiltonian, v: RMatrix, depth: usize, sweeps: usize) -> Result<RMatrix> {
    let k = v.ncols();
    if k == 0 || (depth + 1) * k > v.nrows() {
        return Ok(v);
    }
    let mut v = v;
    for _ in 0..sweeps {
        let mut blocks: Vec<RMatrix> = vec![v.clone().qr().q()];
        for _ in 0..depth {
            let mut w = apply_columns(h, blocks.last().expect("non-empty"));
            for _ in 0..2 {
                for q in &blocks {
                    w -= q * (q.transpose() * &w);
                }
            }
            blocks.push(w.qr().q());
        }
        let mut q = RMatrix::zeros(v.nrows(), blocks.len() * k);
        for (i, blk) in blocks.iter().enumerate() {
            q.columns_mut(i * k, k).copy_from(blk);
        }
        let t = q.transpose() * apply_columns(h, &q);
        let e = symmetric_eigen(&((&t + t.transpose()) * 0.5))?;
        v = q * e.vectors.columns(0, k);
    }
    Ok(v)
}

/// Orthonormal basis of the eigenvectors with eigenvalue below
/// `tol·max(1, ‖H‖)`.
pub fn kernel_basis(h: &ChainHamiltonian, opts: &KernelOptions) -> Result<KernelBasis> {
    let threshold = opts.tol * h.matrix.norm_bound().max(1.0);
    let dim = h.dim();
    let (vectors, next_value, path) = if dim <= opts.dense_crossover {
        let e = symmetric_eigen(&h.matrix.to_dense())?;
        let k = e.values.iter().take_while(|&&v| v < threshold).count();
        let next = e.values.get(k).copied();
        (e.vectors.columns(0, k).into_owned(), next, SolverPath::Dense)
    } else {
        let (pairs, next) = lanczos_low_subspace(|x, y| h.apply(x, y), dim, threshold, opts.max_vectors, &opts.lanczos)?;
        let v = RMatrix::from_fn(dim, pairs.len(), |r, c| pairs[c].vector[r]);
        (refine_low_subspace(h, v, 6, 2)?, next.is_finite().then_some(next), SolverPath::Lanczos)
    };
    let res = residuals(h, &vectors);
    if let Some(bad) = res.iter().find(|&&r| r > threshold.max(opts.lanczos.residual_tol)) {
        return Err(Error::Verification(format!("kernel vector has residual {bad:.3e} above {threshold:.3e}")));
    }
    Ok(KernelBasis { dim: vectors.ncols(), vectors, residuals: res, threshold, next_value, path })
}

/// The `k` lowest eigenvalues, ascending.
pub fn low_spectrum(h: &ChainHamiltonian, k: usize, opts: &KernelOptions) -> Result<Vec<f64>> {
    let dim = h.dim();
    let k = k.min(dim);
    if dim <= opts.dense_crossover {
        let e = symmetric_eigen(&h.matrix.to_dense())?;
        return Ok(e.values.into_iter().take(k).collect());
    }
    let mut locked: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::with_capacity(k);
    for _ in 0..k {
        let p = lanczos_lowest(|x, y| h.apply(x, y), dim, &locked, &opts.lanczos)?;
        out.push(p.value);
        locked.push(p.vector);
    }
    out.sort_by(f64::total_cmp);
    Ok(out)
}

/// Columns spanning the MPS ground-state space of the SO(n) AKLT chain.
pub fn mps_span(n: usize, l: usize, cap: usize) -> Result<CMatrix> {
    let fam = MpsFamily::new(n, if n % 2 == 1 { crate::mps::BondDomain::PPlusCn } else { crate::mps::BondDomain::FullCn })?;
    let basis = fam.domain_basis()?;
    let size = chain_dim(n, l, cap)?;
    let mut cols = CMatrix::zeros(size, basis.len());
    for (c, b) in basis.iter().enumerate() {
        let v = mps_vector_unchecked(n, l, b, cap)?;
        for (r, z) in v.data.into_iter().enumerate() {
            cols[(r, c)] = z;
        }
    }
    Ok(orthonormal_columns(&cols, 1e-10))
}

/// Kernel of `H_ℓ = Σ (𝟙 + SWAP − 2Q)` against the span of the Clifford MPS.
pub fn parent_check(n: usize, l: usize, cap: usize, opts: &KernelOptions) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("parent", "ker H_l equals the MPS span")
        .shape(n, Some(l))
        .tol(1e-8)
        .input("kernel_tol", Datum::real(opts.tol));
    let h = chain_hamiltonian(&InteractionSpec::SoNAklt { n }, l, cap)?;
    let k = kernel_basis(&h, opts)?;
    let span = mps_span(n, l, cap)?;
    let dist = projector_distance(&to_complex(&k.vectors), &span)?;
    rep.value("kernel_dim", Datum::int(k.dim));
    rep.value("mps_dim", Datum::int(span.ncols()));
    rep.value("projector_distance", Datum::real(dist));
    rep.value("solver", Datum::text(if k.path == SolverPath::Dense { "dense" } else { "lanczos" }));
    if let Some(g) = k.next_value {
        rep.value("gap", Datum::real(g));
    }
    let ok = k.dim == span.ncols() && dist < 1e-8;
    rep.verdict(ok, format!("dim ker = {}, dim MPS = {}, distance {dist:.3e}", k.dim, span.ncols()));
    Ok(rep)
}

/// Dense check that `ker Σh_x = ∩ ker h_x`. Each term is first shifted by its
/// lowest eigenvalue so that it is positive semidefinite; the report passes
/// when the chain is frustration free.
pub fn frustration_free_check(spec: &InteractionSpec, l: usize, cap: usize, tol: f64) -> Result<VerificationReport> {
    let mut rep = VerificationReport::new("frustration-free", "ker of the sum equals the intersection of kernels")
        .tol(tol)
        .input("interaction", Datum::Text(format!("{spec:?}")));
    rep.l = Some(l);
    let h = interaction_matrix(spec)?;
    let shift = symmetric_eigen(&h)?.values[0];
    let local = h.nrows();
    let hs = &h - RMatrix::identity(local, local) * shift;
    let (d, s) = (spec.local_dim(), spec.support());
    let dim = chain_dim(d, l, cap)?;
    let total = embed_terms(&hs, d, s, l, cap)?.to_dense();
    let thr = tol * total.norm().max(1.0);
    let eig = symmetric_eigen(&total)?;
    let e0 = eig.values[0];
    let ker = eig.values.iter().take_while(|&&v| v < thr).count();

    // stack the embedded terms and take the null space
    let terms = l + 1 - s;
    let mut stacked = RMatrix::zeros(terms * dim, dim);
    for x in 0..terms {
        let mut one = RMatrix::zeros(local, local);
        one.copy_from(&hs);
        let m = embed_single(&one, d, s, l, x)?;
        stacked.view_mut((x * dim, 0), (dim, dim)).copy_from(&m);
    }
    let sv = stacked.singular_values();
    let inter = sv.iter().filter(|&&v| v < thr).count();

    let ff = inter > 0 && e0 < thr && ker == inter;
    rep.value("term_shift", Datum::real(shift));
    rep.value("ground_energy", Datum::real(e0));
    rep.value("kernel_dim", Datum::int(ker));
    rep.value("intersection_dim", Datum::int(inter));
    rep.value("lemma_holds", Datum::Bool(ker == inter));
    rep.value("frustration_free", Datum::Bool(ff));
    rep.verdict(ff, format!("E0 = {e0:.3e}, dim ker = {ker}, dim ∩ = {inter}"));
    Ok(rep)
}

/// `𝟙 ⊗ h ⊗ 𝟙` with `h` starting at site `x` (0-based), dense.
pub fn embed_single(h: &RMatrix, d: usize, support: usize, l: usize, x: usize) -> Result<RMatrix> {
    if x + support > l {
        return Err(Error::InvalidArgument("term does not fit on the chain".into()));
    }
    let left = RMatrix::identity(d.pow(x as u32), d.pow(x as u32));
    let r = d.pow((l - x - support) as u32);
    Ok(left.kronecker(h).kronecker(&RMatrix::identity(r, r)))
}

/// Orthonormal basis of `span(a) ∩ span(b)` for matrices with orthonormal
/// columns: the eigenvalue-2 eigenspace of `P_a + P_b`.
pub fn subspace_intersection(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    let p = a * a.adjoint() + b * b.adjoint();
    let e = crate::linalg::hermitian_eigen(&p)?;
    let keep: Vec<usize> = (0..e.values.len()).filter(|&i| e.values[i] > 2.0 - 1e-8).collect();
    Ok(CMatrix::from_fn(p.nrows(), keep.len(), |r, c| e.vectors[(r, keep[c])]))
}

pub fn describe(spec: &InteractionSpec) -> String {
    format!("{spec:?}")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{cluster, frobenius_real, hermitian_eigen};
    use crate::mps::{mps_vector, BondDomain, DEFAULT_VECTOR_CAP};
    use proptest::{prop_assert, proptest};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn opts() -> KernelOptions {
        KernelOptions::default()
    }

    fn random_orthogonal(n: usize, rng: &mut ChaCha8Rng) -> RMatrix {
        let a = RMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
        let mut q = a.qr().q();
        if q.determinant() < 0.0 {
            let col = -q.column(0);
            q.set_column(0, &col);
        }
        q
    }

    fn random_su2(two_s: u32, rng: &mut ChaCha8Rng) -> CMatrix {
        let sp = spin_matrices(two_s);
        let axis = [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)];
        let th: f64 = rng.random_range(-3.0..3.0);
        let gen = &sp.sx * C64::new(axis[0], 0.0) + &sp.sy * C64::new(axis[1], 0.0) + &sp.sz * C64::new(axis[2], 0.0);
        let e = hermitian_eigen(&gen).unwrap();
        let ph = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            e.values.len(),
            e.values.iter().map(|v| C64::from_polar(1.0, th * v)),
        ));
        &e.vectors * ph * e.vectors.adjoint()
    }

    #[test]
    fn aklt_polynomial_is_the_spin_two_projector() {
        let poly = interaction_matrix(&InteractionSpec::AkltSu2).unwrap();
        let p2 = aklt_projector_spectral().unwrap();
        assert!(frobenius_real(&(poly - p2)) < 1e-12);
    }

    #[test]
    fn son_aklt_spectrum_at_n4() {
        let h = interaction_matrix(&InteractionSpec::SoNAklt { n: 4 }).unwrap();
        let e = symmetric_eigen(&h).unwrap();
        let c = cluster(&e.values, 1e-9);
        assert_eq!(c.len(), 2);
        assert!(c[0].0.abs() < 1e-12 && c[0].1 == 7);
        assert!((c[1].0 - 2.0).abs() < 1e-12 && c[1].1 == 9);
    }

    #[test]
    fn swap_and_q_relations() {
        for n in 2..=6 {
            let s = swap_matrix(n);
            let q = q_matrix(n);
            assert!(frobenius_real(&(&s * &q - &q)) < 1e-14);
            assert!(frobenius_real(&(&q * &s - &q)) < 1e-14);
            assert!(frobenius_real(&(&q * &q - &q)) < 1e-14);
            let south = interaction_matrix(&InteractionSpec::SouthPole { n }).unwrap();
            let sq = interaction_matrix(&InteractionSpec::SwapQ { n, a: 0.0, b: -1.0 }).unwrap();
            assert!(frobenius_real(&(south - sq - RMatrix::identity(n * n, n * n))) < 1e-14);
        }
    }

    #[test]
    fn majumdar_ghosh_offset_and_heisenberg_swap() {
        let p = interaction_matrix(&InteractionSpec::MajumdarGhosh).unwrap();
        let raw = interaction_matrix(&InteractionSpec::MajumdarGhoshRaw).unwrap();
        assert!(frobenius_real(&(&p * &p - &p)) < 1e-12);
        assert!(frobenius_real(&(raw - (&p * 6.0 - RMatrix::identity(8, 8) * 3.0))) < 1e-12);
        let h = interaction_matrix(&InteractionSpec::Heisenberg { two_s: 1, j: 1.0 }).unwrap();
        let want = swap_matrix(2) * -0.5 + RMatrix::identity(4, 4) * 0.25;
        assert!(frobenius_real(&(h - want)) < 1e-14);
        // bilinear-biquadratic at tan θ = 1/3 is the AKLT point up to scale and shift
        let th = libm::atan(1.0 / 3.0);
        let bb = interaction_matrix(&InteractionSpec::BilinearBiquadratic { theta: th }).unwrap();
        let aklt = interaction_matrix(&InteractionSpec::AkltSu2).unwrap();
        let want = (aklt - RMatrix::identity(9, 9) / 3.0) * (2.0 * libm::cos(th));
        assert!(frobenius_real(&(bb - want)) < 1e-12);
    }

    #[test]
    fn interactions_are_symmetric() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for spec in [
            InteractionSpec::SoNAklt { n: 3 },
            InteractionSpec::SoNAklt { n: 5 },
            InteractionSpec::SouthPole { n: 4 },
            InteractionSpec::SwapQ { n: 4, a: 0.3, b: -1.2 },
        ] {
            let n = spec.local_dim();
            let h = interaction_matrix(&spec).unwrap();
            for _ in 0..50 {
                let w = random_orthogonal(n, &mut rng);
                let ww = w.kronecker(&w);
                assert!(frobenius_real(&(&h * &ww - &ww * &h)) < 1e-10);
            }
        }
        for (spec, two_s) in [
            (InteractionSpec::AkltSu2, 2),
            (InteractionSpec::Heisenberg { two_s: 3, j: -1.0 }, 3),
            (InteractionSpec::BilinearBiquadratic { theta: 0.4 }, 2),
            (InteractionSpec::MajumdarGhosh, 1),
            (InteractionSpec::MajumdarGhoshRaw, 1),
        ] {
            let h = to_complex(&interaction_matrix(&spec).unwrap());
            for _ in 0..50 {
                let u = random_su2(two_s, &mut rng);
                let mut uu = u.kronecker(&u);
                if spec.support() == 3 {
                    uu = uu.kronecker(&u);
                }
                assert!(crate::linalg::frobenius(&(&h * &uu - &uu * &h)) < 1e-10);
            }
        }
    }

    #[test]
    fn chain_assembly() {
        let spec = InteractionSpec::SoNAklt { n: 3 };
        let h2 = chain_hamiltonian(&spec, 2, DEFAULT_SPARSE_CAP).unwrap();
        assert!(frobenius_real(&(h2.matrix.to_dense() - interaction_matrix(&spec).unwrap())) < 1e-14);
        let h4 = chain_hamiltonian(&spec, 4, DEFAULT_SPARSE_CAP).unwrap();
        let h = interaction_matrix(&spec).unwrap();
        let mut want = RMatrix::zeros(81, 81);
        for x in 0..3 {
            want += embed_single(&h, 3, 2, 4, x).unwrap();
        }
        assert!(frobenius_real(&(h4.matrix.to_dense() - want)) < 1e-13);
        assert!(h4.matrix.symmetry_residual() < 1e-14);
        assert!(chain_hamiltonian(&spec, 20, DEFAULT_SPARSE_CAP).is_err());
    }

    #[test]
    fn mps_vectors_have_zero_energy() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let n = 4;
        let l = 5;
        let h = chain_hamiltonian(&InteractionSpec::SoNAklt { n }, l, DEFAULT_SPARSE_CAP).unwrap();
        let fam = MpsFamily::new(n, BondDomain::FullCn).unwrap();
        for _ in 0..4 {
            let mut b = crate::clifford::CliffordElement::zero(n);
            for bits in 0..16u32 {
                let g = crate::clifford::GammaIndex::from_bits(n, bits).unwrap();
                b = b + crate::clifford::CliffordElement::monomial(
                    g,
                    C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
                );
            }
            let v = mps_vector(&fam, l, &b, DEFAULT_VECTOR_CAP).unwrap();
            let re: Vec<f64> = v.data.iter().map(|z| z.re).collect();
            let im: Vec<f64> = v.data.iter().map(|z| z.im).collect();
            let mut y = vec![0.0; re.len()];
            let mut e = 0.0;
            h.apply(&re, &mut y);
            e += re.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
            h.apply(&im, &mut y);
            e += im.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>();
            assert!(e.abs() < 1e-9 * v.norm() * v.norm());
        }
    }

    #[test]
    fn kernels_of_classic_chains() {
        let h = chain_hamiltonian(&InteractionSpec::AkltSu2, 4, DEFAULT_SPARSE_CAP).unwrap();
        assert_eq!(kernel_basis(&h, &opts()).unwrap().dim, 4);
        for (l, want) in [(4usize, 5usize), (5, 4), (6, 5), (7, 4)] {
            let h = chain_hamiltonian(&InteractionSpec::MajumdarGhosh, l, DEFAULT_SPARSE_CAP).unwrap();
            let k = kernel_basis(&h, &opts()).unwrap();
            assert_eq!(k.dim, want, "l={l}");
            assert!(k.residuals.iter().all(|&r| r <= k.threshold));
        }
        let h = chain_hamiltonian(&InteractionSpec::SoNAklt { n: 4 }, 4, DEFAULT_SPARSE_CAP).unwrap();
        assert_eq!(kernel_basis(&h, &opts()).unwrap().dim, 8);
    }

    #[test]
    fn dense_and_lanczos_kernels_agree() {
        let h = chain_hamiltonian(&InteractionSpec::SoNAklt { n: 3 }, 6, DEFAULT_SPARSE_CAP).unwrap();
        let dense = kernel_basis(&h, &opts()).unwrap();
        let mut o = opts();
        o.dense_crossover = 10;
        let iter = kernel_basis(&h, &o).unwrap();
        assert_eq!(dense.path, SolverPath::Dense);
        assert_eq!(iter.path, SolverPath::Lanczos);
        assert_eq!(dense.dim, 4);
        assert_eq!(iter.dim, 4);
        let d = projector_distance(&to_complex(&dense.vectors), &to_complex(&iter.vectors)).unwrap();
        assert!(d < 1e-8, "{d}");
        let gap_dense = dense.next_value.unwrap();
        let gap_iter = iter.next_value.unwrap();
        assert!((gap_dense - gap_iter).abs() < 1e-8);
        let low = low_spectrum(&h, 6, &opts()).unwrap();
        let low_iter = low_spectrum(&h, 6, &o).unwrap();
        for (a, b) in low.iter().zip(&low_iter) {
            assert!((a - b).abs() < 1e-9);
        }
        assert!(low[3].abs() < 1e-10 && low[4] > 0.1);
    }

    #[test]
    fn parent_property_small() {
        for (n, l) in [(3usize, 3usize), (3, 4), (4, 4), (4, 5), (5, 5)] {
            let rep = parent_check(n, l, DEFAULT_SPARSE_CAP, &opts()).unwrap();
            assert!(rep.passed(), "n={n} l={l}: {}", rep.detail);
        }
    }

    #[test]
    fn frustration_freeness() {
        let rep = frustration_free_check(&InteractionSpec::SoNAklt { n: 4 }, 4, DEFAULT_SPARSE_CAP, 1e-10).unwrap();
        assert!(rep.passed(), "{}", rep.detail);
        let rep = frustration_free_check(&InteractionSpec::AkltSu2, 5, DEFAULT_SPARSE_CAP, 1e-10).unwrap();
        assert!(rep.passed(), "{}", rep.detail);
        let rep =
            frustration_free_check(&InteractionSpec::SwapQ { n: 3, a: 1.0, b: 0.3 }, 4, DEFAULT_SPARSE_CAP, 1e-10).unwrap();
        assert!(!rep.passed());
        assert!(rep.values["ground_energy"].as_real().unwrap() > 1e-3);
        assert_eq!(rep.values["lemma_holds"], Datum::Bool(true));
        assert_eq!(rep.values["frustration_free"], Datum::Bool(false));
    }

    #[test]
    fn short_range_intersection_property() {
        for n in [3usize, 4] {
            let h3 = chain_hamiltonian(&InteractionSpec::SoNAklt { n }, 3, DEFAULT_SPARSE_CAP).unwrap();
            let k3 = to_complex(&kernel_basis(&h3, &opts()).unwrap().vectors);
            let h2 = chain_hamiltonian(&InteractionSpec::SoNAklt { n }, 2, DEFAULT_SPARSE_CAP).unwrap();
            let k2 = to_complex(&kernel_basis(&h2, &opts()).unwrap().vectors);
            let id = CMatrix::identity(n, n);
            let left = k2.kronecker(&id);
            let right = id.kronecker(&k2);
            let inter = subspace_intersection(&left, &right).unwrap();
            assert_eq!(inter.ncols(), k3.ncols());
            assert!(projector_distance(&inter, &k3).unwrap() < 1e-8);
        }
    }

    #[test]
    fn south_pole_low_spectrum_is_recorded() {
        let h = chain_hamiltonian(&InteractionSpec::SouthPole { n: 3 }, 4, DEFAULT_SPARSE_CAP).unwrap();
        let low = low_spectrum(&h, 4, &opts()).unwrap();
        assert!(low.windows(2).all(|w| w[0] <= w[1] + 1e-12));
        assert!(low[0] > 0.0);
    }

    proptest! {
        #[test]
        fn ground_energy_below_rayleigh_quotient(seed in 0u64..500) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let h = chain_hamiltonian(&InteractionSpec::SwapQ { n: 3, a: 0.7, b: -1.1 }, 4, DEFAULT_SPARSE_CAP).unwrap();
            let e0 = low_spectrum(&h, 1, &opts()).unwrap()[0];
            let x: Vec<f64> = (0..h.dim()).map(|_| rng.random_range(-1.0..1.0)).collect();
            let mut y = vec![0.0; x.len()];
            h.apply(&x, &mut y);
            let rq = x.iter().zip(&y).map(|(a, b)| a * b).sum::<f64>() / x.iter().map(|a| a * a).sum::<f64>();
            prop_assert!(e0 <= rq + 1e-12);
        }
    }
}
