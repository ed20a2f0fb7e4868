//! Projective bond symmetries, the ℤ₂×ℤ₂ cocycle sign, and the CPT checks
//! on the reduced density matrices of `ω±`.

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{Schur, QR, SVD};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::clifford::{check_rank, projectors_pm, CliffordElement, GammaIndex};
use crate::error::{Error, Result};
use crate::linalg::{frobenius, hermitian_eigen, max_abs, orthonormal_columns, to_complex, CMatrix, RMatrix};
use crate::mps::{rdm_factor, Boundary};
use crate::realize::{matrix_rep, realize};
use crate::report::{Datum, VerificationReport};
use crate::repr::spin_matrices;

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Largest deviation of a commutator from a scalar.
pub const SCALAR_TOL: f64 = 1e-8;
pub const UNITARITY_TOL: f64 = 1e-6;
pub const RELATION_TOL: f64 = 1e-7;
/// Default cap on `n^ℓ × columns` for the factored density matrices.
pub const DEFAULT_FACTOR_CAP: usize = 8_000_000;

// ---------------------------------------------------------------------------
// Spin representation and cocycle

/// `Π(e^{θL_ij}) = cos(θ/2)𝟙 + sin(θ/2)γ_iγ_j`.
pub fn spin_rep_element(n: usize, theta: f64, i: usize, j: usize) -> Result<CliffordElement> {
    check_rank(n)?;
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::InvalidArgument(format!("need 1 ≤ i < j ≤ {n}, got ({i}, {j})")));
    }
    let half = theta / 2.0;
    let pair = CliffordElement::monomial(GammaIndex::from_slice(n, &[i, j])?, C64::new(libm::sin(half), 0.0));
    CliffordElement::scalar(n, C64::new(libm::cos(half), 0.0)).try_add(&pair)
}

/// `e^{θL_ij}` with `L_ij = |i⟩⟨j| − |j⟩⟨i|`.
pub fn plane_rotation(n: usize, theta: f64, i: usize, j: usize) -> Result<RMatrix> {
    if !(1 <= i && i < j && j <= n) {
        return Err(Error::InvalidArgument(format!("need 1 ≤ i < j ≤ {n}, got ({i}, {j})")));
    }
    let (s, c) = (libm::sin(theta), libm::cos(theta));
    let mut w = RMatrix::identity(n, n);
    let (a, b) = (i - 1, j - 1);
    w[(a, a)] = c;
    w[(b, b)] = c;
    w[(a, b)] = s;
    w[(b, a)] = -s;
    Ok(w)
}

/// The commuting π-rotations `e^{πL₁₂}` and `e^{πL₁₃}`.
#[derive(Clone, Debug)]
pub struct RotationPair {
    pub n: usize,
    pub g1: RMatrix,
    pub g2: RMatrix,
}

/// Coordinate planes of the two rotations.
pub const ROTATION_PLANES: [(usize, usize); 2] = [(1, 2), (1, 3)];

impl RotationPair {
    pub fn new(n: usize) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidArgument(format!("the rotation pair needs n ≥ 3, got {n}")));
        }
        let [(a, b), (c, d)] = ROTATION_PLANES;
        let g1 = plane_rotation(n, core::f64::consts::PI, a, b)?;
        let g2 = plane_rotation(n, core::f64::consts::PI, c, d)?;
        // sin π is not exactly zero
        let g1 = g1.map(|x| libm::round(x));
        let g2 = g2.map(|x| libm::round(x));
        Ok(Self { n, g1, g2 })
    }

    /// Largest residual of `g₁² = g₂² = 𝟙` and `g₁g₂ = g₂g₁`.
    pub fn residual(&self) -> f64 {
        let id = RMatrix::identity(self.n, self.n);
        let r = [&self.g1 * &self.g1 - &id, &self.g2 * &self.g2 - &id, &self.g1 * &self.g2 - &self.g2 * &self.g1];
        r.iter().map(|m| m.amax()).fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug)]
pub enum CocycleRep {
    Spin,
    Defining,
    /// Images of `g₁` and `g₂` under some projective representation.
    Custom(CMatrix, CMatrix),
}

/// `s` in `U₁U₂U₁⁻¹U₂⁻¹ = s𝟙`.
pub fn commutator_sign(u1: &CMatrix, u2: &CMatrix) -> Result<i8> {
    if !u1.is_square() || u1.shape() != u2.shape() {
        return Err(Error::InvalidArgument("the pair must be square matrices of one size".into()));
    }
    let inv = |u: &CMatrix| {
        u.clone()
            .try_inverse()
            .ok_or_else(|| Error::MalformedRepresentation("group element is not invertible".into()))
    };
    let c = u1 * u2 * inv(u1)? * inv(u2)?;
    let d = c.nrows();
    let s = c.trace() / d as f64;
    let off = max_abs(&(&c - CMatrix::identity(d, d) * s));
    if off > SCALAR_TOL {
        return Err(Error::MalformedRepresentation(format!("group commutator is not scalar (deviation {off:.3e})")));
    }
    if (s - ONE).norm() <= SCALAR_TOL {
        Ok(1)
    } else if (s + ONE).norm() <= SCALAR_TOL {
        Ok(-1)
    } else {
        Err(Error::MalformedRepresentation(format!("group commutator is {s}, not ±1")))
    }
}

pub fn cocycle_sign(n: usize, rep: &CocycleRep) -> Result<i8> {
    match rep {
        CocycleRep::Spin => {
            check_rank(n)?;
            let pair = RotationPair::new(n)?;
            if pair.residual() > 1e-12 {
                return Err(Error::InvalidArgument("rotations do not commute".into()));
            }
            let pi = core::f64::consts::PI;
            let [(a, b), (c, d)] = ROTATION_PLANES;
            let u1 = spin_rep_element(n, pi, a, b)?;
            let u2 = spin_rep_element(n, pi, c, d)?;
            let comm = u1.try_mul(&u2)?.try_mul(&u1.adjoint())?.try_mul(&u2.adjoint())?;
            let s = comm.coeff(GammaIndex::identity(n)?);
            let rest = comm.try_add(&CliffordElement::scalar(n, -s))?.max_abs();
            if rest > SCALAR_TOL {
                return Err(Error::MalformedRepresentation(format!("spin commutator is not scalar ({rest:.3e})")));
            }
            if (s - ONE).norm() <= SCALAR_TOL {
                Ok(1)
            } else if (s + ONE).norm() <= SCALAR_TOL {
                Ok(-1)
            } else {
                Err(Error::MalformedRepresentation(format!("spin commutator is {s}, not ±1")))
            }
        }
        CocycleRep::Defining => {
            let pair = RotationPair::new(n)?;
            commutator_sign(&to_complex(&pair.g1), &to_complex(&pair.g2))
        }
        CocycleRep::Custom(u1, u2) => commutator_sign(u1, u2),
    }
}

// ---------------------------------------------------------------------------
// MPS tensors and bond symmetries

/// Tensor `{t_a}` of a translation-invariant MPS. The physical index runs
/// over `sites` consecutive copies of `ℝⁿ`, first site most significant.
#[derive(Clone, Debug)]
pub struct MpsTensor {
    pub name: String,
    pub n: usize,
    pub sites: usize,
    pub mats: Vec<CMatrix>,
}

impl MpsTensor {
    pub fn bond_dim(&self) -> usize {
        self.mats.first().map_or(0, |m| m.nrows())
    }

    pub fn phys_dim(&self) -> usize {
        self.mats.len()
    }

    /// `‖Σ t_a†t_a − 𝟙‖`, zero for the normalization used by the extraction.
    pub fn isometry_residual(&self) -> f64 {
        let d = self.bond_dim();
        let mut s = CMatrix::zeros(d, d);
        for t in &self.mats {
            s += t.adjoint() * t;
        }
        max_abs(&(s - CMatrix::identity(d, d)))
    }

    /// `w^{⊗sites}` on the physical index.
    pub fn physical_action(&self, w: &RMatrix) -> Result<RMatrix> {
        if w.nrows() != self.n || w.ncols() != self.n {
            return Err(Error::InvalidArgument(format!("expected a {0}×{0} matrix", self.n)));
        }
        let mut out = RMatrix::identity(1, 1);
        for _ in 0..self.sites {
            out = out.kronecker(w);
        }
        Ok(out)
    }

    /// Odd n: `γ_i/√n`. Even n: the two-site block `γ_kγ_i/n` on the range
    /// of `P₊`, the ω₊ half of the bond space.
    pub fn so_n(n: usize) -> Result<Self> {
        check_rank(n)?;
        let r = matrix_rep(n)?;
        if n % 2 == 1 {
            let s = C64::new(1.0 / libm::sqrt(n as f64), 0.0);
            let mats = r.gammas.iter().map(|g| g * s).collect();
            return Ok(Self { name: format!("so({n}) Clifford"), n, sites: 1, mats });
        }
        let v = plus_range(n)?;
        let s = C64::new(1.0 / n as f64, 0.0);
        let mut mats = Vec::with_capacity(n * n);
        for k in 0..n {
            for i in 0..n {
                mats.push(v.adjoint() * &r.gammas[k] * &r.gammas[i] * &v * s);
            }
        }
        Ok(Self { name: format!("so({n}) Clifford, two-site block"), n, sites: 2, mats })
    }

    /// Spin-1 AKLT tensor `σ_i/√3` in the Cartesian basis.
    pub fn aklt_su2() -> Self {
        let r = matrix_rep(3).expect("rank 3 is supported");
        let s = C64::new(1.0 / libm::sqrt(3.0), 0.0);
        let mats = r.gammas.iter().map(|g| g * s).collect();
        Self { name: "spin-1 AKLT".to_string(), n: 3, sites: 1, mats }
    }

    /// Product state `|e_n⟩^{⊗ℓ}`, bond dimension 1.
    pub fn product_axis(n: usize) -> Result<Self> {
        check_rank(n)?;
        let mats = (0..n).map(|a| CMatrix::from_element(1, 1, if a + 1 == n { ONE } else { ZERO })).collect();
        Ok(Self { name: format!("product |e_{n}⟩"), n, sites: 1, mats })
    }

    /// Product of nearest-neighbour singlets `Σ_i |ii⟩/√n`, blocked in pairs.
    pub fn product_dimer(n: usize) -> Result<Self> {
        check_rank(n)?;
        let v = C64::new(1.0 / libm::sqrt(n as f64), 0.0);
        let mats = (0..n * n).map(|a| CMatrix::from_element(1, 1, if a / n == a % n { v } else { ZERO })).collect();
        Ok(Self { name: format!("so({n}) dimer product"), n, sites: 2, mats })
    }

    /// `V†MV` for the isometry `V` this tensor's bond space lives in.
    pub fn restrict(&self, m: &CMatrix) -> Result<CMatrix> {
        if self.sites == 2 && self.n % 2 == 0 && self.bond_dim() > 1 {
            let v = plus_range(self.n)?;
            Ok(v.adjoint() * m * v)
        } else {
            Ok(m.clone())
        }
    }
}

fn plus_range(n: usize) -> Result<CMatrix> {
    let r = matrix_rep(n)?;
    let pp = realize(&projectors_pm(n)?.0, &r)?.mat;
    Ok(orthonormal_columns(&pp, 1e-10))
}

/// How the global phase of `Π` was fixed.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseConvention {
    /// Largest-magnitude entry, made real positive.
    pub pivot: (usize, usize),
    /// Argument removed from the raw eigenvector.
    pub removed_phase: f64,
}

/// `λΠt_aΠ* = Σ_b W_ba t_b` for the physical action `W` of `w`.
#[derive(Clone, Debug)]
pub struct BondSymmetry {
    pub w: RMatrix,
    pub pi: CMatrix,
    pub eigenvalue: C64,
    pub phase_convention: PhaseConvention,
    pub unitarity_residual: f64,
    pub relation_residual: f64,
}

/// `ρ_w(X) = Σ_a t_a† X t'_a` with `t'_a = Σ_b W_ba t_b`, as a matrix on
/// column-major `vec X`.
pub fn mixed_transfer(t: &MpsTensor, w: &RMatrix) -> Result<CMatrix> {
    let big = t.physical_action(w)?;
    let d = t.bond_dim();
    let mut m = CMatrix::zeros(d * d, d * d);
    for (a, ta) in t.mats.iter().enumerate() {
        let tp = rotated(t, &big, a);
        m += tp.transpose().kronecker(&ta.adjoint());
    }
    Ok(m)
}

/// `QMQ†` for a fixed random unitary `Q`. The complex Schur iteration can
/// stall on the exactly degenerate, sparse transfer matrices.
fn scrambled(m: &CMatrix) -> CMatrix {
    let d = m.nrows();
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let g = CMatrix::from_fn(d, d, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
    let q = QR::new(g).q();
    &q * m * q.adjoint()
}

fn rotated(t: &MpsTensor, big: &RMatrix, a: usize) -> CMatrix {
    let d = t.bond_dim();
    let mut out = CMatrix::zeros(d, d);
    for (b, tb) in t.mats.iter().enumerate() {
        let c = big[(b, a)];
        if c != 0.0 {
            out += tb * C64::new(c, 0.0);
        }
    }
    out
}

pub fn extract_bond_symmetry(t: &MpsTensor, w: &RMatrix) -> Result<BondSymmetry> {
    let d = t.bond_dim();
    if d == 0 || t.mats.iter().any(|m| m.nrows() != d || m.ncols() != d) {
        return Err(Error::InvalidArgument("tensor matrices must be square of one size".into()));
    }
    let iso = t.isometry_residual();
    if iso > 1e-10 {
        return Err(Error::InvalidArgument(format!("tensor is not normalized (Σt†t − 𝟙 = {iso:.3e})")));
    }
    let wtw = w.transpose() * w;
    if (wtw - RMatrix::identity(t.n, t.n)).amax() > 1e-10 {
        return Err(Error::InvalidArgument("w is not orthogonal".into()));
    }
    let m = mixed_transfer(t, w)?;
    let (_, tri) = Schur::try_new(scrambled(&m), 1e-14, 100_000)
        .ok_or_else(|| Error::NotConverged("Schur form of the mixed transfer".into()))?
        .unpack();
    let ev: Vec<C64> = tri.diagonal().iter().copied().collect();
    let radius = ev.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if radius > 1.0 + 1e-8 {
        return Err(Error::Verification(format!("mixed transfer has spectral radius {radius}")));
    }
    let units: Vec<C64> = ev.iter().copied().filter(|z| (z.norm() - 1.0).abs() < 1e-8).collect();
    let lambda = match units.as_slice() {
        [z] => *z,
        [] => return Err(Error::Verification("w is not a symmetry of the state: no eigenvalue of modulus 1".into())),
        _ => {
            return Err(Error::Verification(format!(
                "{} eigenvalues of modulus 1; the transfer operator is not primitive",
                units.len()
            )))
        }
    };
    let dd = d * d;
    let shifted = &m - CMatrix::identity(dd, dd) * lambda;
    let svd = SVD::try_new(shifted, false, true, f64::EPSILON, 10_000)
        .ok_or_else(|| Error::NotConverged("SVD of the mixed transfer".into()))?;
    let v_t = svd.v_t.ok_or_else(|| Error::NotConverged("SVD of the mixed transfer".into()))?;
    let k = (0..dd)
        .min_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]))
        .unwrap_or(0);
    let x = CMatrix::from_fn(d, d, |r, c| v_t[(k, c * d + r)].conj());
    // fixed point is Π†
    let mut pi = x.adjoint();
    let norm = frobenius(&pi);
    pi *= C64::new(libm::sqrt(d as f64) / norm, 0.0);
    let unitarity_residual = max_abs(&(pi.adjoint() * &pi - CMatrix::identity(d, d)));
    if unitarity_residual > UNITARITY_TOL {
        return Err(Error::MalformedRepresentation(format!(
            "bond eigenvector is not a unitary ({unitarity_residual:.3e})"
        )));
    }
    let top = pi.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let flat = (0..d * d).find(|&i| pi[(i % d, i / d)].norm() >= top * (1.0 - 1e-9)).unwrap_or(0);
    let pivot = (flat % d, flat / d);
    let removed_phase = pi[pivot].arg();
    pi *= C64::from_polar(1.0, -removed_phase);

    let big = t.physical_action(w)?;
    let mut num = ZERO;
    let mut den = 0.0;
    let conj: Vec<CMatrix> = t.mats.iter().map(|ta| &pi * ta * pi.adjoint()).collect();
    for (a, ta) in conj.iter().enumerate() {
        let tp = rotated(t, &big, a);
        num += (ta.adjoint() * &tp).trace();
        den += frobenius(ta).powi(2);
    }
    let eigenvalue = num / den;
    let relation_residual = conj
        .iter()
        .enumerate()
        .map(|(a, ta)| max_abs(&(ta * eigenvalue - rotated(t, &big, a))))
        .fold(0.0, f64::max);
    if relation_residual > RELATION_TOL {
        return Err(Error::Verification(format!("λΠtΠ* ≠ Σ w t (residual {relation_residual:.3e})")));
    }
    Ok(BondSymmetry {
        w: w.clone(),
        pi,
        eigenvalue,
        phase_convention: PhaseConvention { pivot, removed_phase },
        unitarity_residual,
        relation_residual,
    })
}

#[derive(Clone, Debug)]
pub struct SptIndex {
    pub sign: i8,
    pub first: BondSymmetry,
    pub second: BondSymmetry,
}

/// Cocycle sign of the bond symmetries of `e^{πL₁₂}` and `e^{πL₁₃}`.
pub fn mps_spt_index(t: &MpsTensor) -> Result<SptIndex> {
    let pair = RotationPair::new(t.n)?;
    let first = extract_bond_symmetry(t, &pair.g1)?;
    let second = extract_bond_symmetry(t, &pair.g2)?;
    let sign = commutator_sign(&first.pi, &second.pi)?;
    Ok(SptIndex { sign, first, second })
}

// ---------------------------------------------------------------------------
// Site actions on factored density matrices

/// Random element of SO(n) as a product of plane rotations.
pub fn random_rotation<R: Rng>(n: usize, rng: &mut R) -> Result<RMatrix> {
    let mut w = RMatrix::identity(n, n);
    for _ in 0..3 {
        for i in 1..=n {
            for j in i + 1..=n {
                let theta = rng.random::<f64>() * core::f64::consts::TAU;
                w = plane_rotation(n, theta, i, j)? * w;
            }
        }
    }
    Ok(w)
}

/// Applies `u` on every site of the row index of `cols`.
pub fn apply_on_sites(cols: &CMatrix, u: &CMatrix, n: usize, l: usize) -> CMatrix {
    let mut out = cols.clone();
    let size = out.nrows();
    let mut buf = vec![ZERO; n];
    let mut stride = size;
    for _ in 0..l {
        stride /= n;
        let block = stride * n;
        for c in 0..out.ncols() {
            let mut col = out.column_mut(c);
            for base in (0..size).step_by(block) {
                for off in 0..stride {
                    for (a, slot) in buf.iter_mut().enumerate() {
                        *slot = col[base + off + a * stride];
                    }
                    for a in 0..n {
                        let mut s = ZERO;
                        for (b, x) in buf.iter().enumerate() {
                            s += u[(a, b)] * x;
                        }
                        col[base + off + a * stride] = s;
                    }
                }
            }
        }
    }
    out
}

/// Reverses the site order of every row index.
pub fn reflect_sites(cols: &CMatrix, n: usize, l: usize) -> CMatrix {
    let size = cols.nrows();
    let mut out = CMatrix::zeros(size, cols.ncols());
    for r in 0..size {
        let mut x = r;
        let mut rev = 0;
        for _ in 0..l {
            rev = rev * n + x % n;
            x /= n;
        }
        out.set_row(rev, &cols.row(r));
    }
    out
}

/// `‖AA† − BB†‖_F` through a QR of `[A B]`, free of cancellation.
pub fn factored_distance(a: &CMatrix, b: &CMatrix) -> Result<f64> {
    if a.nrows() != b.nrows() {
        return Err(Error::InvalidArgument("factors have different row counts".into()));
    }
    let (ra, rb) = (a.ncols(), b.ncols());
    let mut stacked = CMatrix::zeros(a.nrows(), ra + rb);
    stacked.columns_mut(0, ra).copy_from(a);
    stacked.columns_mut(ra, rb).copy_from(b);
    let r = QR::new(stacked).r();
    let (fa, fb) = (r.columns(0, ra), r.columns(ra, rb));
    Ok(frobenius(&(fa * fa.adjoint() - fb * fb.adjoint())))
}

/// `√ρ`-type factors `C` with `ρ = CC†` for `ω₊` and `ω₋` (both `ω` at odd n).
#[derive(Clone, Debug)]
pub struct PmFactors {
    pub n: usize,
    pub l: usize,
    pub plus: CMatrix,
    pub minus: CMatrix,
}

impl PmFactors {
    pub fn new(n: usize, l: usize, cap: usize) -> Result<Self> {
        let (bp, bm) = if n % 2 == 0 {
            (Boundary::OmegaPlus, Boundary::OmegaMinus)
        } else {
            (Boundary::Omega, Boundary::Omega)
        };
        let fp = rdm_factor(n, l, bp)?;
        let fm = rdm_factor(n, l, bm)?;
        let mut rows = 1usize;
        for _ in 0..l {
            rows = rows.saturating_mul(n);
        }
        let size = rows.saturating_mul(fp.elements.len().max(fm.elements.len()));
        if size > cap {
            return Err(Error::CapExceeded { what: "factored density matrix n^l × columns", size, cap });
        }
        Ok(Self { n, l, plus: fp.columns(usize::MAX)?, minus: fm.columns(usize::MAX)? })
    }

    /// Largest distance between `T(ρ±)` and the target chosen by `swap`.
    fn residual<F: Fn(&CMatrix) -> CMatrix>(&self, act: F, swap: bool) -> Result<f64> {
        let (tp, tm) = (act(&self.plus), act(&self.minus));
        let (gp, gm) = if swap { (&self.minus, &self.plus) } else { (&self.plus, &self.minus) };
        Ok(factored_distance(&tp, gp)?.max(factored_distance(&tm, gm)?))
    }
}

// ---------------------------------------------------------------------------
// CPT

/// How a transformation acts on the pair `{ρ⁺, ρ⁻}`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PairAction {
    Fixes,
    Swaps,
    /// `ρ⁺ = ρ⁻`, so fixing and swapping coincide.
    Both,
    Neither,
}

impl PairAction {
    fn classify(fix: f64, swap: f64, tol: f64) -> Self {
        match (fix < tol, swap < tol) {
            (true, true) => PairAction::Both,
            (true, false) => PairAction::Fixes,
            (false, true) => PairAction::Swaps,
            (false, false) => PairAction::Neither,
        }
    }

    /// Whether an observed action is compatible with the expected one.
    pub fn agrees_with(self, expected: PairAction) -> bool {
        self == expected || (self == PairAction::Both && expected != PairAction::Neither)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum TimeReversal {
    Invariant,
    NotInvariant,
}

/// Action of conjugation and reflection predicted by `n mod 4`.
pub fn expected_action(n: usize) -> PairAction {
    if n % 2 == 1 {
        PairAction::Both
    } else if n % 4 == 0 {
        PairAction::Fixes
    } else {
        PairAction::Swaps
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptResiduals {
    pub conjugation_fix: f64,
    pub conjugation_swap: f64,
    pub reflection_fix: f64,
    pub reflection_swap: f64,
    pub time_reversal: f64,
    pub theta_spin_flip: f64,
    pub theta_det: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptReport {
    pub n: usize,
    pub l: usize,
    pub conjugation: PairAction,
    pub reflection: PairAction,
    pub time_reversal: TimeReversal,
    pub expected: PairAction,
    pub tolerance: f64,
    pub residuals: CptResiduals,
}

impl CptReport {
    /// Conjugation and reflection break together.
    pub fn consistent(&self) -> bool {
        self.conjugation == self.reflection
    }

    pub fn to_report(&self) -> VerificationReport {
        let mut rep = VerificationReport::new("cpt", "conjugation and reflection follow n mod 4; time reversal is unbroken")
            .shape(self.n, Some(self.l))
            .tol(self.tolerance)
            .input("planes", Datum::text("e^{πL12}, e^{πL13}"));
        let r = &self.residuals;
        for (k, v) in [
            ("conjugation_fix", r.conjugation_fix),
            ("conjugation_swap", r.conjugation_swap),
            ("reflection_fix", r.reflection_fix),
            ("reflection_swap", r.reflection_swap),
            ("time_reversal", r.time_reversal),
            ("theta_spin_flip", r.theta_spin_flip),
            ("theta_det", r.theta_det),
        ] {
            rep.value(k, Datum::real(v));
        }
        let tag = |a: PairAction| Datum::text(&format!("{a:?}").to_uppercase());
        rep.value("conjugation", tag(self.conjugation));
        rep.value("reflection", tag(self.reflection));
        rep.value("expected", tag(self.expected));
        rep.value("time_reversal_verdict", Datum::text(&format!("{:?}", self.time_reversal).to_uppercase()));
        let conj_ok = self.conjugation.agrees_with(self.expected);
        // the n mod 4 rule for reflection is stated for even ℓ
        let refl_ok = self.l % 2 == 1 || self.reflection.agrees_with(self.expected);
        let tr_ok = self.time_reversal == TimeReversal::Invariant;
        let mut failed = Vec::new();
        if !conj_ok {
            failed.push(format!("conjugation {:?}", self.conjugation));
        }
        if !refl_ok {
            failed.push(format!("reflection {:?}", self.reflection));
        }
        if !tr_ok {
            failed.push(format!("time reversal residual {:.3e}", r.time_reversal));
        }
        let detail = if failed.is_empty() { String::from("all CPT checks agree") } else { failed.join("; ") };
        rep.verdict(failed.is_empty(), detail);
        rep
    }
}

/// `U` with `θ = U∘K`, `θ|μ⟩ = (−1)^{s−μ}|−μ⟩`, basis `|s⟩, …, |−s⟩`.
pub fn time_reversal_matrix(n: usize) -> RMatrix {
    let mut u = RMatrix::zeros(n, n);
    for a in 0..n {
        u[(n - 1 - a, a)] = if a % 2 == 0 { 1.0 } else { -1.0 };
    }
    u
}

/// `max_j ‖θ⁻¹S_jθ + S_j‖` for spin `s = (n−1)/2`.
pub fn theta_spin_flip_residual(n: usize) -> f64 {
    let u = to_complex(&time_reversal_matrix(n));
    let sys = spin_matrices(n as u32 - 1);
    sys.components()
        .iter()
        .map(|s| max_abs(&(u.transpose() * s.map(|z| z.conj()) * &u + *s)))
        .fold(0.0, f64::max)
}

pub fn theta_det(n: usize) -> f64 {
    time_reversal_matrix(n).determinant()
}

fn conj(m: &CMatrix) -> CMatrix {
    m.map(|z| z.conj())
}

pub fn conjugation_check(f: &PmFactors, tol: f64) -> Result<(PairAction, f64, f64)> {
    let fix = f.residual(conj, false)?;
    let swap = f.residual(conj, true)?;
    Ok((PairAction::classify(fix, swap, tol), fix, swap))
}

pub fn reflection_check(f: &PmFactors, tol: f64) -> Result<(PairAction, f64, f64)> {
    let act = |m: &CMatrix| reflect_sites(m, f.n, f.l);
    let fix = f.residual(act, false)?;
    let swap = f.residual(act, true)?;
    Ok((PairAction::classify(fix, swap, tol), fix, swap))
}

/// `θ^{⊗ℓ}ρ̄±θ^{*⊗ℓ}` against `ρ±`.
pub fn time_reversal_check(f: &PmFactors, tol: f64) -> Result<(TimeReversal, f64)> {
    if f.n % 2 == 1 {
        return Err(Error::InvalidArgument(format!("time reversal needs even n, got {}", f.n)));
    }
    let u = to_complex(&time_reversal_matrix(f.n));
    let res = f.residual(|m| apply_on_sites(&conj(m), &u, f.n, f.l), false)?;
    Ok((if res < tol { TimeReversal::Invariant } else { TimeReversal::NotInvariant }, res))
}

/// Conjugation, reflection and time reversal at one even `n`.
pub fn cpt_check(n: usize, l: usize, tol: f64, cap: usize) -> Result<CptReport> {
    check_rank(n)?;
    if n % 2 == 1 {
        return Err(Error::InvalidArgument(format!("the CPT checks need even n, got {n}")));
    }
    if l == 0 {
        return Err(Error::InvalidArgument("ℓ must be positive".into()));
    }
    let f = PmFactors::new(n, l, cap)?;
    let (conjugation, conjugation_fix, conjugation_swap) = conjugation_check(&f, tol)?;
    let (reflection, reflection_fix, reflection_swap) = reflection_check(&f, tol)?;
    let (time_reversal, tr) = time_reversal_check(&f, tol)?;
    Ok(CptReport {
        n,
        l,
        conjugation,
        reflection,
        time_reversal,
        expected: expected_action(n),
        tolerance: tol,
        residuals: CptResiduals {
            conjugation_fix,
            conjugation_swap,
            reflection_fix,
            reflection_swap,
            time_reversal: tr,
            theta_spin_flip: theta_spin_flip_residual(n),
            theta_det: theta_det(n),
        },
    })
}

// ---------------------------------------------------------------------------
// O(n) → SO(n) breaking

#[derive(Clone, Copy, Debug)]
pub struct OnSiteOptions {
    pub rotations: usize,
    pub seed: u64,
    pub tol: f64,
    pub spectrum_tol: f64,
    pub cap: usize,
}

impl Default for OnSiteOptions {
    fn default() -> Self {
        Self { rotations: 20, seed: 0, tol: 1e-9, spectrum_tol: 1e-10, cap: DEFAULT_FACTOR_CAP }
    }
}

/// Sorted spectrum of `ρ` from its factor.
fn factor_spectrum(c: &CMatrix) -> Result<Vec<f64>> {
    let g = c.adjoint() * c;
    Ok(hermitian_eigen(&g)?.values)
}

/// SO(n) invariance, the determinant −1 reflection exchanging `ρ±`, and
/// equal spectra of `ρ⁺` and `ρ⁻`. At odd n the single state is tested
/// against the full O(n).
pub fn on_site_breaking_check(n: usize, l: usize, opts: &OnSiteOptions) -> Result<VerificationReport> {
    check_rank(n)?;
    let f = PmFactors::new(n, l, opts.cap)?;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut refl = RMatrix::identity(n, n);
    refl[(0, 0)] = -1.0;
    let refl_c = to_complex(&refl);

    let mut rot = 0.0f64;
    for k in 0..opts.rotations {
        let mut w = random_rotation(n, &mut rng)?;
        if n % 2 == 1 && k % 2 == 1 {
            w = &refl * w;
        }
        let wc = to_complex(&w);
        rot = rot.max(f.residual(|m| apply_on_sites(m, &wc, n, l), false)?);
    }
    let swap = n % 2 == 0;
    let reflection = f.residual(|m| apply_on_sites(m, &refl_c, n, l), swap)?;
    let (sp, sm) = (factor_spectrum(&f.plus)?, factor_spectrum(&f.minus)?);
    let spectrum = if sp.len() == sm.len() {
        sp.iter().zip(&sm).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    } else {
        f64::INFINITY
    };

    let group = if n % 2 == 1 { "O(n)" } else { "SO(n)" };
    let mut rep = VerificationReport::new(
        "on_site_breaking",
        "ω± are SO(n) invariant, a reflection of determinant −1 exchanges them, and their spectra agree",
    )
    .shape(n, Some(l))
    .tol(opts.tol)
    .input("rotations", Datum::int(opts.rotations))
    .input("seed", Datum::Int(opts.seed as i64))
    .input("group", Datum::text(group));
    rep.value("rotation_residual", Datum::real(rot));
    rep.value("reflection_residual", Datum::real(reflection));
    rep.value("spectrum_residual", Datum::real(spectrum));
    let mut failed = Vec::new();
    if rot >= opts.tol {
        failed.push(format!("{group} invariance residual {rot:.3e}"));
    }
    if reflection >= opts.tol {
        failed.push(format!("reflection residual {reflection:.3e}"));
    }
    if spectrum >= opts.spectrum_tol {
        failed.push(format!("spectrum residual {spectrum:.3e}"));
    }
    let detail = if failed.is_empty() { String::from("all sub-checks pass") } else { failed.join("; ") };
    rep.verdict(failed.is_empty(), detail);
    Ok(rep)
}
