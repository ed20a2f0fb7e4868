//! Clifford matrix product states, finitely correlated states and their
//! transfer operators.
//!
//! Chain sites are 1-based generator labels `i ∈ {1..n}`. A word
//! `(i_1, …, i_ℓ)` is stored at flat index `Σ (i_k − 1)·n^{ℓ−k}`, so `i_1` is
//! the most significant digit.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::Schur;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::clifford::{
    all_indices, alpha, check_rank, gamma0_phase, mul_bits, projectors_pm, realization_dim, reversal_is_negative,
    CliffordElement, GammaIndex,
};
use crate::error::{Error, Result};
use crate::linalg::{cluster, hermitian_eigen, max_abs, CMatrix, OperatorMatrix};

pub const DEFAULT_VECTOR_CAP: usize = 20_000_000;
pub const DEFAULT_DENSE_CAP: usize = 4096;

/// Relative tolerance used to cluster eigenvalues.
pub const CLUSTER_TOL: f64 = 1e-8;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BondDomain {
    /// All of `C_n`, even n.
    FullCn,
    /// The `γ₀ = +𝟙` quotient of `C_n`, odd n.
    PPlusCn,
    Even,
    Odd,
    PPlusEven,
    PMinusEven,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    Omega,
    OmegaPlus,
    OmegaMinus,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TransferVariant {
    E,
    F1,
    F2,
    FShared,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MpsFamily {
    pub n: usize,
    pub bond_domain: BondDomain,
}

impl MpsFamily {
    pub fn new(n: usize, bond_domain: BondDomain) -> Result<Self> {
        check_rank(n)?;
        let odd = n % 2 == 1;
        if odd != (bond_domain == BondDomain::PPlusCn) {
            return Err(Error::InvalidArgument(format!("bond domain {bond_domain:?} is not available for n = {n}")));
        }
        Ok(Self { n, bond_domain })
    }

    /// The natural family for a chain of length `l`: the quotient for odd n,
    /// the grade parity of `l` for even n.
    pub fn for_length(n: usize, l: usize) -> Result<Self> {
        let d = if n % 2 == 1 {
            BondDomain::PPlusCn
        } else if l % 2 == 0 {
            BondDomain::Even
        } else {
            BondDomain::Odd
        };
        Self::new(n, d)
    }

    /// A basis of the bond domain.
    pub fn domain_basis(&self) -> Result<Vec<CliffordElement>> {
        let n = self.n;
        let idx = all_indices(n)?;
        let (pp, pm) = projectors_pm(n)?;
        let even_reps = || idx.iter().copied().filter(move |g| g.grade() % 2 == 0 && is_rep(*g));
        Ok(match self.bond_domain {
            BondDomain::FullCn => idx.iter().map(|&g| CliffordElement::basis(g)).collect(),
            BondDomain::PPlusCn => {
                idx.iter().filter(|g| 2 * g.grade() < n).map(|&g| CliffordElement::basis(g)).collect()
            }
            BondDomain::Even => idx.iter().filter(|g| g.grade() % 2 == 0).map(|&g| CliffordElement::basis(g)).collect(),
            BondDomain::Odd => idx.iter().filter(|g| g.grade() % 2 == 1).map(|&g| CliffordElement::basis(g)).collect(),
            BondDomain::PPlusEven => even_reps().map(|g| &CliffordElement::basis(g) * &pp).collect(),
            BondDomain::PMinusEven => even_reps().map(|g| &CliffordElement::basis(g) * &pm).collect(),
        })
    }

    pub fn domain_dim(&self) -> usize {
        let n = self.n;
        match self.bond_domain {
            BondDomain::FullCn => 1 << n,
            BondDomain::PPlusCn | BondDomain::Even | BondDomain::Odd => 1 << (n - 1),
            BondDomain::PPlusEven | BondDomain::PMinusEven => 1 << (n - 2),
        }
    }

    /// Rejects elements outside the bond domain.
    pub fn check_member(&self, b: &CliffordElement) -> Result<()> {
        if b.rank() != self.n {
            return Err(Error::RankMismatch { left: b.rank(), right: self.n });
        }
        let tol = 1e-12 * b.max_abs().max(1.0);
        let bad = match self.bond_domain {
            BondDomain::FullCn | BondDomain::PPlusCn => 0.0,
            BondDomain::Even => b.parity_part(true).max_abs(),
            BondDomain::Odd => b.parity_part(false).max_abs(),
            BondDomain::PPlusEven | BondDomain::PMinusEven => {
                let (pp, pm) = projectors_pm(self.n)?;
                let p = if self.bond_domain == BondDomain::PPlusEven { pp } else { pm };
                b.parity_part(true).max_abs().max((&p * b - b.clone()).max_abs())
            }
        };
        if bad > tol {
            return Err(Error::InvalidArgument(format!(
                "element lies outside the {:?} bond domain (residual {bad:.3e})",
                self.bond_domain
            )));
        }
        Ok(())
    }
}

fn is_rep(g: GammaIndex) -> bool {
    let (k, n) = (g.grade(), g.rank());
    2 * k < n || (2 * k == n && g.bits() & 1 == 1)
}

/// Complex vector in `(ℂⁿ)^⊗ℓ`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub n: usize,
    pub l: usize,
    pub data: Vec<C64>,
}

impl StateVector {
    pub fn norm(&self) -> f64 {
        libm::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum::<f64>())
    }

    pub fn normalized(&self) -> Result<Self> {
        let nrm = self.norm();
        if nrm == 0.0 {
            return Err(Error::InvalidArgument("cannot normalize the zero vector".into()));
        }
        Ok(Self { n: self.n, l: self.l, data: self.data.iter().map(|z| z / nrm).collect() })
    }

    /// `⟨self, other⟩`, antilinear in `self`.
    pub fn inner(&self, other: &Self) -> Result<C64> {
        if self.n != other.n || self.l != other.l {
            return Err(Error::InvalidArgument("state shapes differ".into()));
        }
        Ok(self.data.iter().zip(&other.data).map(|(a, b)| a.conj() * b).sum())
    }

    /// Flat index of a 1-based word.
    pub fn index_of(n: usize, word: &[usize]) -> usize {
        word.iter().fold(0, |acc, &i| acc * n + (i - 1))
    }
}

fn checked_pow(n: usize, l: usize, cap: usize, what: &'static str) -> Result<usize> {
    let mut size = 1usize;
    for _ in 0..l {
        size = size.saturating_mul(n);
    }
    if size > cap {
        return Err(Error::CapExceeded { what, size, cap });
    }
    Ok(size)
}

/// Trace of a single monomial in the irreducible realization.
fn mono_trace(n: usize, bits: u32) -> C64 {
    let d = realization_dim(n) as f64;
    if bits == 0 {
        C64::new(d, 0.0)
    } else if n % 2 == 1 && bits.count_ones() as usize == n {
        gamma0_phase(n).conj() * d
    } else {
        ZERO
    }
}

/// `t[K] = Tr(B γ_K)` for every `K`.
fn trace_table(b: &CliffordElement) -> Vec<C64> {
    let n = b.rank();
    let mut t = vec![ZERO; 1 << n];
    for (k, slot) in t.iter_mut().enumerate() {
        let k = k as u32;
        for (j, c) in b.raw_terms() {
            let (neg, m) = mul_bits(j, k);
            let tr = mono_trace(n, m);
            if tr != ZERO {
                *slot += if neg { -c * tr } else { c * tr };
            }
        }
    }
    t
}

/// Visits every word of length `l` in flat-index order with the sign and
/// support of `γ_{i_ℓ}…γ_{i_1}`.
fn for_each_word<F: FnMut(usize, bool, u32)>(n: usize, l: usize, mut f: F) {
    fn rec<F: FnMut(usize, bool, u32)>(n: usize, depth: usize, l: usize, idx: usize, neg: bool, k: u32, f: &mut F) {
        if depth == l {
            f(idx, neg, k);
            return;
        }
        for i in 0..n {
            let (s, k2) = mul_bits(1 << i, k);
            rec(n, depth + 1, l, idx * n + i, neg ^ s, k2, f);
        }
    }
    rec(n, 0, l, 0, false, 0, &mut f);
}

/// Visits every word with the sign and support of `γ_{i_1}…γ_{i_ℓ}`.
fn for_each_word_forward<F: FnMut(usize, bool, u32)>(n: usize, l: usize, mut f: F) {
    fn rec<F: FnMut(usize, bool, u32)>(n: usize, depth: usize, l: usize, idx: usize, neg: bool, k: u32, f: &mut F) {
        if depth == l {
            f(idx, neg, k);
            return;
        }
        for i in 0..n {
            let (s, k2) = mul_bits(k, 1 << i);
            rec(n, depth + 1, l, idx * n + i, neg ^ s, k2, f);
        }
    }
    rec(n, 0, l, 0, false, 0, &mut f);
}

/// `ψ(B) = Σ Tr(B γ_{i_ℓ}…γ_{i_1}) |i_1 … i_ℓ⟩`, unnormalized.
pub fn mps_vector(fam: &MpsFamily, l: usize, b: &CliffordElement, cap: usize) -> Result<StateVector> {
    fam.check_member(b)?;
    mps_vector_unchecked(fam.n, l, b, cap)
}

pub(crate) fn mps_vector_unchecked(n: usize, l: usize, b: &CliffordElement, cap: usize) -> Result<StateVector> {
    let size = checked_pow(n, l, cap, "mps vector length n^l")?;
    let t = trace_table(b);
    let mut data = vec![ZERO; size];
    for_each_word(n, l, |idx, neg, k| {
        let v = t[k as usize];
        data[idx] = if neg { -v } else { v };
    });
    Ok(StateVector { n, l, data })
}

/// Number of length-`l` words whose product is `±γ_K`, as a fraction of
/// `n^l`, indexed by `|K|`.
pub fn word_weights(n: usize, l: usize) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    let nf = n as f64;
    for _ in 0..l {
        let mut q = vec![0.0; n + 1];
        for (k, slot) in q.iter_mut().enumerate() {
            let mut v = 0.0;
            if k > 0 {
                v += k as f64 * p[k - 1];
            }
            if k < n {
                v += (n - k) as f64 * p[k + 1];
            }
            *slot = v / nf;
        }
        p = q;
    }
    p
}

/// `⟨ψ(B), ψ(C)⟩ / n^l` without building either vector.
pub fn mps_inner(l: usize, b: &CliffordElement, c: &CliffordElement) -> Result<C64> {
    if b.rank() != c.rank() {
        return Err(Error::RankMismatch { left: b.rank(), right: c.rank() });
    }
    let n = b.rank();
    let p = word_weights(n, l);
    let (tb, tc) = (trace_table(b), trace_table(c));
    Ok(tb.iter().zip(&tc).enumerate().map(|(k, (x, y))| x.conj() * y * p[(k as u32).count_ones() as usize]).sum())
}

/// Gram matrix `G_IJ = ⟨ψ(B_I), ψ(B_J)⟩ / n^l`.
pub fn mps_gram(l: usize, basis: &[CliffordElement]) -> Result<CMatrix> {
    let Some(first) = basis.first() else {
        return Ok(CMatrix::zeros(0, 0));
    };
    let n = first.rank();
    if let Some(b) = basis.iter().find(|b| b.rank() != n) {
        return Err(Error::RankMismatch { left: b.rank(), right: n });
    }
    let p = word_weights(n, l);
    let tables: Vec<Vec<C64>> = basis.iter().map(trace_table).collect();
    let m = basis.len();
    let mut g = CMatrix::zeros(m, m);
    for i in 0..m {
        for j in i..m {
            let v: C64 = (0..tables[i].len())
                .map(|k| tables[i][k].conj() * tables[j][k] * p[(k as u32).count_ones() as usize])
                .sum();
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
    }
    Ok(g)
}

/// Rank of `B ↦ ψ(B)` on the family's bond domain; computed from the Gram
/// matrix, so no cap applies.
pub fn injectivity_rank(fam: &MpsFamily, l: usize) -> Result<(usize, bool)> {
    let basis = fam.domain_basis()?;
    let g = mps_gram(l, &basis)?;
    let eig = hermitian_eigen(&g)?;
    let top = eig.values.iter().cloned().fold(0.0, f64::max);
    let rank = if top <= 0.0 { 0 } else { eig.values.iter().filter(|&&v| v > 1e-10 * top).count() };
    Ok((rank, rank == fam.domain_dim()))
}

// ---------------------------------------------------------------------------
// CP maps

fn check_square(a: &CMatrix, n: usize) -> Result<()> {
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::InvalidArgument(format!("observable must be {n}×{n}, got {}×{}", a.nrows(), a.ncols())));
    }
    Ok(())
}

/// `𝔼_A(B) = (1/n) Σ A_ij γ_i B γ_j`. Odd ranks are reduced to the `γ₀ = +𝟙`
/// quotient.
pub fn apply_e(a: &CMatrix, b: &CliffordElement) -> Result<CliffordElement> {
    let n = b.rank();
    check_square(a, n)?;
    let mut out = CliffordElement::zero(n);
    let inv_n = 1.0 / n as f64;
    for (k, c) in b.raw_terms() {
        for i in 0..n {
            let (s1, ik) = mul_bits(1 << i, k);
            for j in 0..n {
                let aij = a[(i, j)];
                if aij == ZERO {
                    continue;
                }
                let (s2, m) = mul_bits(ik, 1 << j);
                let v = aij * c * inv_n;
                out.add_term(m, if s1 ^ s2 { -v } else { v });
            }
        }
    }
    Ok(if n % 2 == 1 { out.sector_reduce() } else { out })
}

/// `σ(A) = RAR` with `R = diag(1, −1, …, −1)`.
pub fn sigma(a: &CMatrix) -> CMatrix {
    let mut out = a.clone();
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            if (i == 0) != (j == 0) {
                out[(i, j)] = -out[(i, j)];
            }
        }
    }
    out
}

/// `𝔽⁽¹⁾_A = α∘𝔼_{σ(A)}`.
pub fn apply_f1(a: &CMatrix, b: &CliffordElement) -> Result<CliffordElement> {
    Ok(alpha(&apply_e(&sigma(a), b)?))
}

/// `𝔽⁽²⁾_A = α∘𝔼_A`.
pub fn apply_f2(a: &CMatrix, b: &CliffordElement) -> Result<CliffordElement> {
    Ok(alpha(&apply_e(a, b)?))
}

/// Right boundary element and its trace. For `ω±` on an odd number of sites
/// the boundary is `P∓`, which is `ω±` on one more site with `𝟙` appended.
pub fn boundary_element(n: usize, l: usize, boundary: Boundary) -> Result<CliffordElement> {
    check_rank(n)?;
    match boundary {
        Boundary::Omega => Ok(CliffordElement::one(n)),
        _ if n % 2 == 1 => Err(Error::InvalidArgument(format!("ω± need an even rank, got n = {n}"))),
        _ => {
            let (pp, pm) = projectors_pm(n)?;
            let plus = (boundary == Boundary::OmegaPlus) == (l % 2 == 0);
            Ok(if plus { pp } else { pm })
        }
    }
}

/// `ω(A_1⊗…⊗A_ℓ) = Tr(𝔼_{A_1}∘…∘𝔼_{A_ℓ}(e)) / Tr e`.
pub fn fcs_expectation(n: usize, ops: &[CMatrix], boundary: Boundary) -> Result<C64> {
    if ops.is_empty() {
        return Err(Error::InvalidArgument("need at least one observable".into()));
    }
    let e = boundary_element(n, ops.len(), boundary)?;
    let tr_e = e.trace();
    let mut x = e;
    for a in ops.iter().rev() {
        x = apply_e(a, &x)?;
    }
    Ok(x.trace() / tr_e)
}

/// Connected correlator `ω(A ⊗ 𝟙^r ⊗ B) − ω(A)·ω(𝟙^{r+1} ⊗ B)`.
pub fn two_point_correlation(n: usize, a: &CMatrix, b: &CMatrix, r: usize, boundary: Boundary) -> Result<C64> {
    check_square(a, n)?;
    check_square(b, n)?;
    let id = CMatrix::identity(n, n);
    let mut ops = vec![a.clone()];
    ops.extend(core::iter::repeat_n(id.clone(), r));
    ops.push(b.clone());
    let joint = fcs_expectation(n, &ops, boundary)?;
    let left = fcs_expectation(n, &[a.clone()], boundary)?;
    ops[0] = id;
    let right = fcs_expectation(n, &ops, boundary)?;
    Ok(joint - left * right)
}

// ---------------------------------------------------------------------------
// Transfer operators

/// A CP map written in a monomial basis of the space it preserves.
#[derive(Clone, Debug)]
pub struct TransferMap {
    pub n: usize,
    pub variant: TransferVariant,
    pub basis: Vec<GammaIndex>,
    /// Column `c` holds the coordinates of the image of basis element `c`.
    pub matrix: CMatrix,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectralSummary {
    /// Clustered real eigenvalues, descending, with multiplicities.
    pub eigenvalues: Vec<(f64, usize)>,
    /// Largest modulus below 1 on the sector relevant to correlations.
    pub subleading: f64,
    pub correlation_length: f64,
    pub is_primitive: bool,
}

impl TransferMap {
    /// Basis elements as Clifford elements. For the F variants these are
    /// `γ_I P₊`, whose `γ_I` coefficient is ½.
    pub fn basis_elements(&self) -> Result<Vec<CliffordElement>> {
        let pp = projectors_pm(self.n)?.0;
        Ok(self
            .basis
            .iter()
            .map(|&g| match self.variant {
                TransferVariant::E => CliffordElement::basis(g),
                _ => &CliffordElement::basis(g) * &pp,
            })
            .collect())
    }

    pub fn eigenvalues(&self) -> Vec<C64> {
        if self.matrix.nrows() == 0 {
            return Vec::new();
        }
        let (_, t) = Schur::new(self.matrix.clone()).unpack();
        t.diagonal().iter().copied().collect()
    }
}

fn coordinates(variant: TransferVariant, basis: &[GammaIndex], x: &CliffordElement) -> Vec<C64> {
    let scale = if variant == TransferVariant::E { 1.0 } else { 2.0 };
    basis.iter().map(|&g| x.coeff(g) * scale).collect()
}

/// Matrix of a CP map for observable `A`. `E` acts on `C_n` (the `γ₀ = +𝟙`
/// quotient for odd n); the F variants act on `P₊C_n^[ev]`, even n only.
/// `FShared` is the common unital map `𝔽⁽¹⁾_𝟙 = 𝔽⁽²⁾_𝟙` and takes `A = 𝟙`.
pub fn transfer_map(n: usize, variant: TransferVariant, a: &CMatrix) -> Result<TransferMap> {
    check_rank(n)?;
    check_square(a, n)?;
    let idx = all_indices(n)?;
    let basis: Vec<GammaIndex> = match variant {
        TransferVariant::E if n % 2 == 0 => idx,
        TransferVariant::E => idx.into_iter().filter(|g| 2 * g.grade() < n).collect(),
        _ if n % 2 == 1 => {
            return Err(Error::InvalidArgument(format!("𝔽 maps need an even rank, got n = {n}")));
        }
        _ => idx.into_iter().filter(|g| g.grade() % 2 == 0 && is_rep(*g)).collect(),
    };
    if variant == TransferVariant::FShared && max_abs(&(a - CMatrix::identity(n, n))) > 1e-12 {
        return Err(Error::InvalidArgument("the shared 𝔽 map is defined for A = 𝟙 only".into()));
    }
    let proto = TransferMap { n, variant, basis, matrix: CMatrix::zeros(0, 0) };
    let elems = proto.basis_elements()?;
    let m = elems.len();
    let mut matrix = CMatrix::zeros(m, m);
    for (c, b) in elems.iter().enumerate() {
        let img = match variant {
            TransferVariant::E => apply_e(a, b)?,
            TransferVariant::F1 => apply_f1(a, b)?,
            TransferVariant::F2 | TransferVariant::FShared => apply_f2(a, b)?,
        };
        for (r, v) in coordinates(variant, &proto.basis, &img).into_iter().enumerate() {
            matrix[(r, c)] = v;
        }
    }
    Ok(TransferMap { matrix, ..proto })
}

/// Spectrum of the unital map `𝔼_𝟙` or `𝔽_𝟙`.
///
/// For `E` at even n only the even-grade block enters the correlation
/// length: observables feed `𝔼_𝟙` with even elements. Eigenvalues of modulus
/// 1 are excluded there, since `γ₀` carries the period-two oscillation of `ω±`.
pub fn transfer_spectrum(n: usize, variant: TransferVariant) -> Result<SpectralSummary> {
    let variant = if variant == TransferVariant::E { variant } else { TransferVariant::FShared };
    let tm = transfer_map(n, variant, &CMatrix::identity(n, n))?;
    let ev = tm.eigenvalues();
    if let Some(z) = ev.iter().find(|z| z.im.abs() > 1e-9) {
        return Err(Error::Verification(format!("unital transfer map has a complex eigenvalue {z}")));
    }
    let reals: Vec<f64> = ev.iter().map(|z| z.re).collect();
    let mut eigenvalues = cluster(&reals, CLUSTER_TOL);
    eigenvalues.reverse();

    let unit = |z: &C64| (z.norm() - 1.0).abs() < 1e-10;
    let units: Vec<&C64> = ev.iter().filter(|z| unit(z)).collect();
    let is_primitive = units.len() == 1 && (units[0] - C64::new(1.0, 0.0)).norm() < 1e-10;

    let sector: Vec<f64> = if variant == TransferVariant::E && n % 2 == 0 {
        tm.basis
            .iter()
            .enumerate()
            .filter(|(_, g)| g.grade() % 2 == 0)
            .map(|(i, _)| tm.matrix[(i, i)].norm())
            .collect()
    } else {
        ev.iter().map(|z| z.norm()).collect()
    };
    debug_assert!(variant != TransferVariant::E || n % 2 == 1 || is_diagonal(&tm.matrix));
    let subleading = sector.into_iter().filter(|&m| m < 1.0 - 1e-10).fold(0.0, f64::max);
    let correlation_length = if subleading == 0.0 { 0.0 } else { -1.0 / libm::log(subleading) };
    Ok(SpectralSummary { eigenvalues, subleading, correlation_length, is_primitive })
}

fn is_diagonal(m: &CMatrix) -> bool {
    (0..m.nrows()).all(|r| (0..m.ncols()).all(|c| r == c || m[(r, c)].norm() < 1e-12))
}

// ---------------------------------------------------------------------------
// Reduced density matrices

#[derive(Clone, Debug)]
pub struct DensityMatrix {
    pub matrix: OperatorMatrix,
    pub n: usize,
    pub l: usize,
    pub boundary: Boundary,
}

pub const DENSITY_TOL: f64 = 1e-10;

impl DensityMatrix {
    /// Checks Hermiticity, unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        let m = &self.matrix.mat;
        let herm = max_abs(&(m - m.adjoint()));
        if herm > DENSITY_TOL {
            return Err(Error::Verification(format!("density matrix is not Hermitian ({herm:.3e})")));
        }
        let tr = m.trace();
        if (tr - C64::new(1.0, 0.0)).norm() > DENSITY_TOL {
            return Err(Error::Verification(format!("density matrix has trace {tr}")));
        }
        let low = hermitian_eigen(m)?.values.first().copied().unwrap_or(0.0);
        if low < -DENSITY_TOL {
            return Err(Error::Verification(format!("density matrix has eigenvalue {low:.3e}")));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }
}

/// `ρ` entry by entry: `⟨j⃗|ρ|i⃗⟩ = ω(|i_1⟩⟨j_1| ⊗ … ⊗ |i_ℓ⟩⟨j_ℓ|)`.
pub fn reduced_density_matrix(n: usize, l: usize, boundary: Boundary, cap: usize) -> Result<DensityMatrix> {
    let size = checked_pow(n, l, cap, "dense density matrix dimension n^l")?;
    let e = boundary_element(n, l, boundary)?;
    let tr_e = e.trace();
    let full = 1usize << n;
    // table[K][K'] = Tr(γ_K e γ_{K'}*)
    let mut table = vec![ZERO; full * full];
    for k in 0..full as u32 {
        for (j, c) in e.raw_terms() {
            let (s1, kj) = mul_bits(k, j);
            for k2 in 0..full as u32 {
                let (s2, m) = mul_bits(kj, k2);
                let tr = mono_trace(n, m);
                if tr == ZERO {
                    continue;
                }
                let neg = s1 ^ s2 ^ reversal_is_negative(k2);
                let v = c * tr;
                table[k as usize * full + k2 as usize] += if neg { -v } else { v };
            }
        }
    }
    let mut words = vec![(false, 0u32); size];
    for_each_word_forward(n, l, |idx, neg, k| words[idx] = (neg, k));
    let scale = libm::pow(n as f64, -(l as f64)) / tr_e;
    let mut mat = CMatrix::zeros(size, size);
    for (i, &(si, ki)) in words.iter().enumerate() {
        for (j, &(sj, kj)) in words.iter().enumerate() {
            let v = table[ki as usize * full + kj as usize];
            if v != ZERO {
                mat[(j, i)] = if si ^ sj { -v * scale } else { v * scale };
            }
        }
    }
    let dm = DensityMatrix { matrix: OperatorMatrix::new(mat), n, l, boundary };
    dm.validate()?;
    Ok(dm)
}

/// `ρ = s·Σ_I |ψ(B_I)⟩⟨ψ(B_I)|` over an orthogonal basis `B_I` of
/// `C_n·e` (its `γ_I` parts are `I`-labelled).
#[derive(Clone, Debug)]
pub struct RdmFactor {
    pub n: usize,
    pub l: usize,
    pub boundary: Boundary,
    pub labels: Vec<GammaIndex>,
    pub elements: Vec<CliffordElement>,
    /// `n^{-ℓ} / (Tr e)²`.
    pub scale: f64,
}

pub fn rdm_factor(n: usize, l: usize, boundary: Boundary) -> Result<RdmFactor> {
    let e = boundary_element(n, l, boundary)?;
    let tr_e = e.trace().re;
    let idx = all_indices(n)?;
    let labels: Vec<GammaIndex> = match boundary {
        Boundary::Omega if n % 2 == 1 => idx.into_iter().filter(|g| 2 * g.grade() < n).collect(),
        Boundary::Omega => idx,
        _ => idx.into_iter().filter(|g| is_rep(*g)).collect(),
    };
    let elements = labels.iter().map(|&g| &CliffordElement::basis(g) * &e).collect();
    let scale = libm::pow(n as f64, -(l as f64)) / (tr_e * tr_e);
    Ok(RdmFactor { n, l, boundary, labels, elements, scale })
}

impl RdmFactor {
    /// Columns `√s·ψ(B_I)` as a dense matrix.
    pub fn columns(&self, cap: usize) -> Result<CMatrix> {
        let size = checked_pow(self.n, self.l, cap, "dense density matrix dimension n^l")?;
        let mut out = CMatrix::zeros(size, self.elements.len());
        let rt = libm::sqrt(self.scale);
        for (c, b) in self.elements.iter().enumerate() {
            let v = mps_vector_unchecked(self.n, self.l, b, cap)?;
            for (r, z) in v.data.into_iter().enumerate() {
                out[(r, c)] = z * rt;
            }
        }
        Ok(out)
    }

    pub fn to_dense(&self, cap: usize) -> Result<DensityMatrix> {
        let v = self.columns(cap)?;
        let dm = DensityMatrix { matrix: OperatorMatrix::new(&v * v.adjoint()), n: self.n, l: self.l, boundary: self.boundary };
        dm.validate()?;
        Ok(dm)
    }

    /// `s·G`, whose spectrum is the nonzero spectrum of `ρ`.
    pub fn gram(&self) -> Result<CMatrix> {
        Ok(mps_gram(self.l, &self.elements)? * C64::new(self.scale * libm::pow(self.n as f64, self.l as f64), 0.0))
    }
}

/// One grade block of the spectrum of `ρ`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GradeEigen {
    pub grade: usize,
    pub mu: f64,
    pub multiplicity: usize,
}

/// Nonzero spectrum of `ρ` labelled by the grade of the MPS eigenvectors.
///
/// The Gram matrix of the factor must be block diagonal in the grade; a
/// coupling between grades is reported as a verification failure.
pub fn rdm_eigen_by_grade(n: usize, l: usize, boundary: Boundary) -> Result<Vec<GradeEigen>> {
    let f = rdm_factor(n, l, boundary)?;
    let g = f.gram()?;
    let top = max_abs(&g).max(f64::MIN_POSITIVE);
    for r in 0..g.nrows() {
        for c in 0..g.ncols() {
            if f.labels[r].grade() != f.labels[c].grade() && g[(r, c)].norm() > 1e-12 * top {
                return Err(Error::Verification(format!(
                    "Gram matrix couples grades {} and {}",
                    f.labels[r].grade(),
                    f.labels[c].grade()
                )));
            }
        }
    }
    let mut out = Vec::new();
    for k in 0..=n {
        let rows: Vec<usize> = (0..f.labels.len()).filter(|&i| f.labels[i].grade() == k).collect();
        if rows.is_empty() {
            continue;
        }
        let block = CMatrix::from_fn(rows.len(), rows.len(), |r, c| g[(rows[r], rows[c])]);
        let eig = hermitian_eigen(&block)?;
        for (mu, mult) in cluster(&eig.values, CLUSTER_TOL * top) {
            if mu > 1e-12 * top {
                if mu > 1.0 + 1e-10 {
                    return Err(Error::Verification(format!("eigenvalue {mu} of ρ exceeds 1")));
                }
                out.push(GradeEigen { grade: k, mu, multiplicity: mult });
            } else if mu < -1e-12 * top {
                return Err(Error::Verification(format!("negative eigenvalue {mu} of ρ")));
            }
        }
    }
    Ok(out)
}

/// `Tr(ρ_a ρ_b)` through cross Gram matrices.
pub fn rdm_overlap(a: &RdmFactor, b: &RdmFactor) -> Result<f64> {
    if a.n != b.n || a.l != b.l {
        return Err(Error::InvalidArgument("factors have different shapes".into()));
    }
    let nl = libm::pow(a.n as f64, a.l as f64);
    let mut s = 0.0;
    for x in &a.elements {
        for y in &b.elements {
            s += (mps_inner(a.l, x, y)? * nl).norm_sqr();
        }
    }
    Ok(s * a.scale * b.scale)
}

/// Human-readable label, e.g. `γ(1,2)`.
pub fn label(g: GammaIndex) -> String {
    let parts: Vec<String> = g.indices().iter().map(|i| format!("{i}")).collect();
    format!("γ({})", parts.join(","))
}
