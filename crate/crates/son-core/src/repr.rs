//! su(2) spin matrices, so(n) generators and Casimir-based decompositions.
//!
//! Half-integer spins are passed doubled (`two_s = 2s`) so that equality on
//! spin labels stays exact.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::clifford::{check_rank, CliffordElement, GammaIndex};
use crate::error::{Error, Result};
use crate::linalg::{cluster_sorted, hermitian_eigen, max_abs, CMatrix, OperatorMatrix, RMatrix};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

#[derive(Clone, Debug)]
pub struct SpinSystem {
    pub two_s: u32,
    pub dim: usize,
    pub sx: CMatrix,
    pub sy: CMatrix,
    pub sz: CMatrix,
    pub splus: CMatrix,
    pub sminus: CMatrix,
}

impl SpinSystem {
    pub fn s(&self) -> f64 {
        self.two_s as f64 / 2.0
    }

    pub fn components(&self) -> [&CMatrix; 3] {
        [&self.sx, &self.sy, &self.sz]
    }
}

/// Spin-`s` matrices in the basis `|s⟩, |s−1⟩, …, |−s⟩`.
pub fn spin_matrices(two_s: u32) -> SpinSystem {
    let dim = two_s as usize + 1;
    let s = two_s as f64 / 2.0;
    let mut sz = CMatrix::zeros(dim, dim);
    let mut splus = CMatrix::zeros(dim, dim);
    for a in 0..dim {
        let m = s - a as f64;
        sz[(a, a)] = c(m);
        if a > 0 {
            // S₊|m⟩ = √(s(s+1) − m(m+1)) |m+1⟩
            splus[(a - 1, a)] = c(libm::sqrt(s * (s + 1.0) - m * (m + 1.0)));
        }
    }
    let sminus = splus.adjoint();
    let sx = (&splus + &sminus) * c(0.5);
    let sy = (&splus - &sminus) * C64::new(0.0, -0.5);
    SpinSystem { two_s, dim, sx, sy, sz, splus, sminus }
}

/// `S₁·S₂` on `V_s ⊗ V_s`.
pub fn casimir_su2_pair(two_s: u32) -> OperatorMatrix {
    let sp = spin_matrices(two_s);
    let mut out = CMatrix::zeros(sp.dim * sp.dim, sp.dim * sp.dim);
    for m in sp.components() {
        out += m.kronecker(m);
    }
    OperatorMatrix::new(out)
}

/// Eigenvalue of `S₁·S₂` on the total-spin-`μ` block, `½(μ(μ+1) − 2s(s+1))`.
pub fn pair_casimir_value(two_s: u32, two_mu: u32) -> f64 {
    let s = two_s as f64 / 2.0;
    let mu = two_mu as f64 / 2.0;
    0.5 * (mu * (mu + 1.0) - 2.0 * s * (s + 1.0))
}

/// Projector onto total spin `μ` inside `V_s ⊗ V_s`.
pub fn spin_projector(two_s: u32, two_mu: u32) -> Result<OperatorMatrix> {
    if two_mu % 2 != 0 || two_mu > 2 * two_s {
        return Err(Error::InvalidArgument(alloc::format!(
            "total spin {}/2 is not in the decomposition of spin {}/2 squared",
            two_mu,
            two_s
        )));
    }
    let ss = casimir_su2_pair(two_s);
    let e = hermitian_eigen(&ss.mat)?;
    let target = pair_casimir_value(two_s, two_mu);
    let cols: Vec<usize> = (0..e.values.len()).filter(|&i| (e.values[i] - target).abs() < 1e-8).collect();
    let rank = two_mu as usize + 1;
    if cols.len() != rank {
        return Err(Error::Verification(alloc::format!(
            "spin block has {} states, expected {rank}",
            cols.len()
        )));
    }
    let v = CMatrix::from_fn(e.vectors.nrows(), cols.len(), |r, k| e.vectors[(r, cols[k])]);
    let mut p = OperatorMatrix::new(&v * v.adjoint());
    p.hermitian = true;
    Ok(p)
}

/// Total spins in `V_μ ⊗ V_ν`, descending, doubled.
pub fn clebsch_gordan_dims(two_mu: u32, two_nu: u32) -> Vec<u32> {
    let lo = two_mu.abs_diff(two_nu);
    let hi = two_mu + two_nu;
    (0..=(hi - lo) / 2).map(|k| hi - 2 * k).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SoNGenerator {
    pub n: usize,
    pub i: usize,
    pub j: usize,
    pub matrix: RMatrix,
}

/// `L_ij = |i⟩⟨j| − |j⟩⟨i|`, 1-based, `i < j`.
pub fn so_n_generator(n: usize, i: usize, j: usize) -> Result<SoNGenerator> {
    check_pair(n, i, j)?;
    let mut m = RMatrix::zeros(n, n);
    m[(i - 1, j - 1)] = 1.0;
    m[(j - 1, i - 1)] = -1.0;
    Ok(SoNGenerator { n, i, j, matrix: m })
}

pub(crate) fn check_pair(n: usize, i: usize, j: usize) -> Result<()> {
    if i == 0 || i >= j || j > n {
        return Err(Error::InvalidArgument(alloc::format!("need 1 ≤ i < j ≤ {n}, got ({i}, {j})")));
    }
    Ok(())
}

pub fn generator_pairs(n: usize) -> Vec<(usize, usize)> {
    let mut v = Vec::new();
    for i in 1..=n {
        for j in i + 1..=n {
            v.push((i, j));
        }
    }
    v
}

/// `−Σ_{i<j} ρ(L_ij)²` for a representation given generator by generator.
pub fn so_n_casimir<F>(n: usize, rep_apply: F) -> Result<OperatorMatrix>
where
    F: Fn(usize, usize) -> Result<CMatrix>,
{
    check_rank(n)?;
    let mut acc: Option<CMatrix> = None;
    for (i, j) in generator_pairs(n) {
        let m = rep_apply(i, j)?;
        if !m.is_square() {
            return Err(Error::InvalidArgument("representation matrix is not square".into()));
        }
        let sq = &m * &m;
        match acc.as_mut() {
            None => acc = Some(-sq),
            Some(a) if a.nrows() == sq.nrows() => *a -= sq,
            Some(a) => {
                return Err(Error::InvalidArgument(alloc::format!(
                    "representation dimensions disagree: {} vs {}",
                    a.nrows(),
                    sq.nrows()
                )))
            }
        }
    }
    Ok(OperatorMatrix::new(acc.unwrap_or_else(|| CMatrix::zeros(0, 0))))
}

pub fn defining_rep(n: usize) -> impl Fn(usize, usize) -> Result<CMatrix> {
    move |i, j| Ok(so_n_generator(n, i, j)?.matrix.map(c))
}

/// Derivation action of `L_ij` on `Λ^k ℂⁿ` in the basis of increasing
/// `k`-subsets (ordered by bitmask).
pub fn exterior_power_rep(n: usize, k: usize) -> impl Fn(usize, usize) -> Result<CMatrix> {
    let basis: Vec<u32> = (0u32..(1 << n)).filter(|b| b.count_ones() as usize == k).collect();
    move |i, j| {
        check_pair(n, i, j)?;
        let dim = basis.len();
        let mut m = CMatrix::zeros(dim, dim);
        let pos = |b: u32| basis.binary_search(&b).expect("subset of the right size");
        // L_ij e_j = e_i and L_ij e_i = −e_j, extended as a derivation
        let (bi, bj) = (1u32 << (i - 1), 1u32 << (j - 1));
        for (col, &b) in basis.iter().enumerate() {
            let hops = |from: u32, to: u32, set: u32| {
                // sign of replacing generator `from` by `to` in the wedge
                let (lo, hi) = if from < to { (from, to) } else { (to, from) };
                let between = set & !(lo | (lo - 1)) & (hi - 1);
                if between.count_ones() % 2 == 0 { 1.0 } else { -1.0 }
            };
            if b & bj != 0 && b & bi == 0 {
                let nb = (b & !bj) | bi;
                m[(pos(nb), col)] += c(hops(bj, bi, b));
            }
            if b & bi != 0 && b & bj == 0 {
                let nb = (b & !bi) | bj;
                m[(pos(nb), col)] -= c(hops(bi, bj, b));
            }
        }
        Ok(m)
    }
}

/// `ρ₁ ⊗ 𝟙 + 𝟙 ⊗ ρ₂`.
pub fn tensor_rep<A, B>(a: A, b: B) -> impl Fn(usize, usize) -> Result<CMatrix>
where
    A: Fn(usize, usize) -> Result<CMatrix>,
    B: Fn(usize, usize) -> Result<CMatrix>,
{
    move |i, j| {
        let x = a(i, j)?;
        let y = b(i, j)?;
        let ix = CMatrix::identity(x.nrows(), x.nrows());
        let iy = CMatrix::identity(y.nrows(), y.nrows());
        Ok(x.kronecker(&iy) + ix.kronecker(&y))
    }
}

/// Matrix of `B ↦ [½γ_iγ_j, B]` on the `2ⁿ` monomial basis of the Clifford
/// algebra.
pub fn clifford_adjoint_rep(n: usize) -> impl Fn(usize, usize) -> Result<CMatrix> {
    move |i, j| {
        check_rank(n)?;
        let dim = 1usize << n;
        let mut m = CMatrix::zeros(dim, dim);
        for col in 0..dim {
            let b = CliffordElement::from_bits_unchecked(n, col as u32, c(1.0));
            let out = adjoint_action(n, (i, j), &b)?;
            for (bits, v) in out.raw_terms() {
                m[(bits as usize, col)] = v;
            }
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct IsotypicReport {
    /// `(Casimir eigenvalue, block dimension)` in ascending eigenvalue order.
    pub blocks: Vec<(f64, usize)>,
    pub total_dim: usize,
}

impl IsotypicReport {
    pub fn dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| b.1).collect()
    }
}

pub const ISOTYPIC_TOL: f64 = 1e-8;

pub fn isotypic_decomposition(cas: &OperatorMatrix) -> Result<IsotypicReport> {
    if !cas.hermitian {
        return Err(Error::InvalidArgument("Casimir operator must be Hermitian".into()));
    }
    let e = hermitian_eigen(&cas.mat)?;
    let scale = e.values.iter().fold(1.0f64, |m, v| m.max(v.abs()));
    let blocks = cluster_sorted(&e.values, ISOTYPIC_TOL * scale);
    Ok(IsotypicReport { total_dim: cas.dim(), blocks })
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Dimension bookkeeping for `Λ^kV ⊗ V ≅ Λ^{k−1}V ⊕ Λ^{k+1}V ⊕ M_k`.
pub fn pieri_dimension_check(n: usize, k: usize) -> Result<(usize, Vec<usize>)> {
    check_rank(n)?;
    if k > n {
        return Err(Error::InvalidArgument(alloc::format!("k = {k} exceeds n = {n}")));
    }
    let lhs = binomial(n, k) * n;
    if k == 0 || k == n {
        return Ok((lhs, alloc::vec![n]));
    }
    let low = binomial(n, k - 1);
    let high = binomial(n, k + 1);
    let mk = lhs
        .checked_sub(low + high)
        .ok_or_else(|| Error::Verification("negative remainder block".into()))?;
    Ok((lhs, alloc::vec![low, high, mk]))
}

/// Casimir eigenvalue of `Λ^jV` in the normalization `−Σ ρ(L_ij)²`.
pub fn exterior_casimir(n: usize, j: usize) -> f64 {
    (j * (n - j)) as f64
}

/// Casimir eigenvalue of the remainder block `M_k` (highest weight
/// `2L₁ + L₂ + … + L_k`).
pub fn remainder_casimir(n: usize, k: usize) -> f64 {
    (k * (n - k) + n + 1) as f64
}

/// Predicted `(Casimir, dim)` blocks of `Λ^kV ⊗ V`, with equal Casimir values
/// merged, ascending.
pub fn pieri_predicted_blocks(n: usize, k: usize) -> Result<Vec<(f64, usize)>> {
    let (_, parts) = pieri_dimension_check(n, k)?;
    let mut raw: Vec<(f64, usize)> = if parts.len() == 1 {
        alloc::vec![(exterior_casimir(n, 1), parts[0])]
    } else {
        alloc::vec![
            (exterior_casimir(n, k - 1), parts[0]),
            (exterior_casimir(n, k + 1), parts[1]),
            (remainder_casimir(n, k), parts[2]),
        ]
    };
    raw.retain(|b| b.1 > 0);
    raw.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, usize)> = Vec::new();
    for (v, d) in raw {
        match out.last_mut() {
            Some(last) if (last.0 - v).abs() < 1e-9 => last.1 += d,
            _ => out.push((v, d)),
        }
    }
    Ok(out)
}

/// Compares the Pieri prediction with the Casimir clustering of `Λ^kV ⊗ V`.
pub fn pieri_casimir_agrees(n: usize, k: usize) -> Result<bool> {
    let predicted = pieri_predicted_blocks(n, k)?;
    let rep = tensor_rep(exterior_power_rep(n, k), defining_rep(n));
    let cas = so_n_casimir(n, rep)?;
    let found = isotypic_decomposition(&cas)?;
    Ok(found.blocks.len() == predicted.len()
        && found
            .blocks
            .iter()
            .zip(&predicted)
            .all(|(a, b)| a.1 == b.1 && (a.0 - b.0).abs() < 1e-8 * b.0.max(1.0)))
}

/// `[½γ_iγ_j, B]`.
pub fn adjoint_action(n: usize, (i, j): (usize, usize), b: &CliffordElement) -> Result<CliffordElement> {
    check_pair(n, i, j)?;
    if b.rank() != n {
        return Err(Error::RankMismatch { left: n, right: b.rank() });
    }
    let x = CliffordElement::monomial(GammaIndex::from_slice(n, &[i, j])?, c(0.5));
    x.commutator(b)
}

/// `f_k = γ_{2k−1} + iγ_{2k}`.
pub fn f_vector(n: usize, k: usize) -> Result<CliffordElement> {
    ladder(n, k, 1.0)
}

/// `f̃_k = γ_{2k−1} − iγ_{2k}`.
pub fn f_tilde(n: usize, k: usize) -> Result<CliffordElement> {
    ladder(n, k, -1.0)
}

fn ladder(n: usize, k: usize, sign: f64) -> Result<CliffordElement> {
    if k == 0 || 2 * k > n {
        return Err(Error::InvalidArgument(alloc::format!("ladder index {k} outside 1..={}", n / 2)));
    }
    let a = CliffordElement::gamma(n, 2 * k - 1)?;
    let b = CliffordElement::gamma(n, 2 * k)?.scale(C64::new(0.0, sign));
    a.try_add(&b)
}

/// Cartan element `π(H_k) = −(i/2)γ_{2k−1}γ_{2k}`, normalized so that
/// `[π(H_j), f_k] = δ_jk f_k`.
pub fn cartan_element(n: usize, k: usize) -> Result<CliffordElement> {
    if k == 0 || 2 * k > n {
        return Err(Error::InvalidArgument(alloc::format!("Cartan index {k} outside 1..={}", n / 2)));
    }
    Ok(CliffordElement::monomial(GammaIndex::from_slice(n, &[2 * k - 1, 2 * k])?, C64::new(0.0, -0.5)))
}

/// Clifford representatives of the positive simple root vectors.
pub fn simple_root_vectors(n: usize) -> Result<Vec<CliffordElement>> {
    check_rank(n)?;
    let m = n / 2;
    let q = c(0.25);
    let mut out = Vec::new();
    for a in 1..m {
        out.push((&f_vector(n, a)? * &f_tilde(n, a + 1)?).scale(q));
    }
    if n % 2 == 0 {
        if m >= 2 {
            out.push((&f_vector(n, m - 1)? * &f_vector(n, m)?).scale(q));
        }
    } else if m >= 1 {
        out.push((&f_vector(n, m)? * &CliffordElement::gamma(n, n)?).scale(c(0.5)));
    }
    Ok(out)
}

pub fn highest_weight_check(n: usize, b: &CliffordElement) -> Result<bool> {
    if b.rank() != n {
        return Err(Error::RankMismatch { left: n, right: b.rank() });
    }
    for r in simple_root_vectors(n)? {
        if r.commutator(b)?.max_abs() > 1e-12 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Largest deviation of `[ρ(X), C]` from zero across generators.
pub fn casimir_commutator_residual<F>(n: usize, rep_apply: F, cas: &OperatorMatrix) -> Result<f64>
where
    F: Fn(usize, usize) -> Result<CMatrix>,
{
    let mut worst = 0.0f64;
    for (i, j) in generator_pairs(n) {
        let m = rep_apply(i, j)?;
        worst = worst.max(max_abs(&(&m * &cas.mat - &cas.mat * &m)));
    }
    Ok(worst)
}

/// Real antisymmetric generator as a complex matrix.
pub fn generator_complex(n: usize, i: usize, j: usize) -> Result<CMatrix> {
    Ok(so_n_generator(n, i, j)?.matrix.map(c))
}

pub fn identity_rep(dim: usize) -> impl Fn(usize, usize) -> Result<CMatrix> {
    move |_, _| Ok(DMatrix::zeros(dim, dim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clifford::{all_indices, gamma0, hodge_star};
    use crate::linalg::frobenius;

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        frobenius(&(a - b)) < tol
    }

    #[test]
    fn spin_half_is_halved_pauli() {
        let s = spin_matrices(1);
        let half = |v: [f64; 4]| CMatrix::from_row_slice(2, 2, &v.map(c));
        assert!(close(&s.sz, &half([0.5, 0.0, 0.0, -0.5]), 1e-15));
        assert!(close(&s.sx, &half([0.0, 0.5, 0.5, 0.0]), 1e-15));
        let sy = CMatrix::from_row_slice(
            2,
            2,
            &[c(0.0), C64::new(0.0, -0.5), C64::new(0.0, 0.5), c(0.0)],
        );
        assert!(close(&s.sy, &sy, 1e-15));
    }

    #[test]
    fn spin_one_matches_textbook_matrices() {
        let s = spin_matrices(2);
        let r = core::f64::consts::FRAC_1_SQRT_2;
        let sx = CMatrix::from_row_slice(3, 3, &[0.0, r, 0.0, r, 0.0, r, 0.0, r, 0.0].map(c));
        assert!(close(&s.sx, &sx, 1e-15));
        let sz = CMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, -1.0].map(c));
        assert!(close(&s.sz, &sz, 1e-15));
    }

    #[test]
    fn su2_relations() {
        for two_s in 0..=8 {
            let s = spin_matrices(two_s);
            let i = C64::new(0.0, 1.0);
            let comm = |a: &CMatrix, b: &CMatrix| a * b - b * a;
            assert!(close(&comm(&s.sx, &s.sy), &(&s.sz * i), 1e-12));
            assert!(close(&comm(&s.sy, &s.sz), &(&s.sx * i), 1e-12));
            assert!(close(&comm(&s.sz, &s.sx), &(&s.sy * i), 1e-12));
            let cas = &s.sx * &s.sx + &s.sy * &s.sy + &s.sz * &s.sz;
            let want = CMatrix::identity(s.dim, s.dim) * c(s.s() * (s.s() + 1.0));
            assert!(close(&cas, &want, 1e-12));
        }
        let s = spin_matrices(3);
        let cas = &s.sx * &s.sx + &s.sy * &s.sy + &s.sz * &s.sz;
        assert!(close(&cas, &(CMatrix::identity(4, 4) * c(3.75)), 1e-12));
    }

    #[test]
    fn pair_casimir_spectra() {
        let half = isotypic_decomposition(&casimir_su2_pair(1)).unwrap();
        assert_eq!(half.blocks.len(), 2);
        assert!((half.blocks[0].0 + 0.75).abs() < 1e-12 && half.blocks[0].1 == 1);
        assert!((half.blocks[1].0 - 0.25).abs() < 1e-12 && half.blocks[1].1 == 3);
        let one = isotypic_decomposition(&casimir_su2_pair(2)).unwrap();
        let want = [(-2.0, 1), (-1.0, 3), (1.0, 5)];
        for (got, want) in one.blocks.iter().zip(want) {
            assert!((got.0 - want.0).abs() < 1e-12);
            assert_eq!(got.1, want.1);
        }
        for two_s in 0..=6 {
            assert!(casimir_su2_pair(two_s).mat.trace().norm() < 1e-12);
        }
    }

    #[test]
    fn spin_projectors() {
        let p2 = spin_projector(2, 4).unwrap();
        assert!((p2.mat.trace().re - 5.0).abs() < 1e-10);
        let p0 = spin_projector(1, 0).unwrap();
        assert!((p0.mat.trace().re - 1.0).abs() < 1e-10);
        let ps: Vec<CMatrix> = (0..=2).map(|mu| spin_projector(2, 2 * mu).unwrap().mat).collect();
        for (a, pa) in ps.iter().enumerate() {
            for (b, pb) in ps.iter().enumerate() {
                let want = if a == b { pa.clone() } else { CMatrix::zeros(9, 9) };
                assert!(close(&(pa * pb), &want, 1e-10));
            }
        }
        assert!(spin_projector(2, 5).is_err());
        assert!(spin_projector(2, 6).is_err());
    }

    #[test]
    fn clebsch_gordan_examples() {
        assert_eq!(clebsch_gordan_dims(1, 1), alloc::vec![2, 0]);
        assert_eq!(clebsch_gordan_dims(4, 2), alloc::vec![6, 4, 2]);
        assert_eq!(clebsch_gordan_dims(5, 0), alloc::vec![5]);
    }

    #[test]
    fn clebsch_gordan_dimension_identity() {
        for a in 0..=8u32 {
            for b in 0..=8u32 {
                let total: u32 = clebsch_gordan_dims(a, b).iter().map(|l| l + 1).sum();
                assert_eq!((a + 1) * (b + 1), total);
            }
        }
    }

    #[test]
    fn defining_casimir_of_so3() {
        let cas = so_n_casimir(3, defining_rep(3)).unwrap();
        assert!(close(&cas.mat, &(CMatrix::identity(3, 3) * c(2.0)), 1e-14));
        let triv = so_n_casimir(4, identity_rep(1)).unwrap();
        assert_eq!(triv.mat[(0, 0)], c(0.0));
    }

    #[test]
    fn casimir_rejects_inconsistent_dims() {
        let bad = |i: usize, _j: usize| Ok(CMatrix::zeros(i, i));
        assert!(so_n_casimir(3, bad).is_err());
    }

    #[test]
    fn clifford_adjoint_casimir_trivial_block() {
        let n = 4;
        let cas = so_n_casimir(n, clifford_adjoint_rep(n)).unwrap();
        let e = hermitian_eigen(&cas.mat).unwrap();
        let zero: Vec<usize> = (0..16).filter(|&k| e.values[k].abs() < 1e-10).collect();
        assert_eq!(zero.len(), 2);
        // 𝟙 and γ₀ (bitmasks 0 and 15) span the kernel
        for &k in &zero {
            let v = e.vectors.column(k);
            let w = v[0].norm_sqr() + v[15].norm_sqr();
            assert!((w - 1.0).abs() < 1e-10);
        }
        assert!(casimir_commutator_residual(n, clifford_adjoint_rep(n), &cas).unwrap() < 1e-10);
    }

    #[test]
    fn isotypic_examples() {
        let so3 = so_n_casimir(3, tensor_rep(defining_rep(3), defining_rep(3))).unwrap();
        assert_eq!(isotypic_decomposition(&so3).unwrap().dims(), alloc::vec![1, 3, 5]);
        let so5 = so_n_casimir(5, tensor_rep(defining_rep(5), defining_rep(5))).unwrap();
        assert_eq!(isotypic_decomposition(&so5).unwrap().dims(), alloc::vec![1, 10, 14]);
        let id = OperatorMatrix::new(CMatrix::identity(7, 7));
        let r = isotypic_decomposition(&id).unwrap();
        assert_eq!(r.blocks, alloc::vec![(1.0, 7)]);
        let bad = OperatorMatrix::new(CMatrix::from_row_slice(2, 2, &[c(0.0), c(1.0), c(0.0), c(0.0)]));
        assert!(isotypic_decomposition(&bad).is_err());
    }

    #[test]
    fn exterior_rep_is_a_representation() {
        for n in 3..=6 {
            for k in 0..=n {
                let rep = exterior_power_rep(n, k);
                let cas = so_n_casimir(n, &rep).unwrap();
                let want = CMatrix::identity(binomial(n, k), binomial(n, k)) * c(exterior_casimir(n, k));
                assert!(close(&cas.mat, &want, 1e-10), "n={n} k={k}");
                // [L12, L23] = L13 under L_ij = |i⟩⟨j| − |j⟩⟨i|
                let a = rep(1, 2).unwrap();
                let b = rep(2, 3).unwrap();
                let l13 = rep(1, 3).unwrap();
                assert!(close(&(&a * &b - &b * &a), &l13, 1e-12));
            }
        }
    }

    #[test]
    fn exterior_rep_matches_defining_for_k1() {
        for n in 3..=6 {
            for (i, j) in generator_pairs(n) {
                let a = exterior_power_rep(n, 1)(i, j).unwrap();
                let b = defining_rep(n)(i, j).unwrap();
                assert!(close(&a, &b, 1e-15));
            }
        }
    }

    #[test]
    fn pieri_examples() {
        assert_eq!(pieri_dimension_check(4, 2).unwrap(), (24, alloc::vec![4, 4, 16]));
        assert_eq!(pieri_dimension_check(5, 1).unwrap(), (25, alloc::vec![1, 10, 14]));
        assert_eq!(pieri_dimension_check(6, 0).unwrap(), (6, alloc::vec![6]));
        assert!(pieri_dimension_check(4, 5).is_err());
    }

    #[test]
    fn pieri_matches_casimir_clustering() {
        for n in 3..=6 {
            for k in 0..=n {
                assert!(pieri_casimir_agrees(n, k).unwrap(), "n={n} k={k}");
            }
        }
    }

    #[test]
    fn adjoint_action_examples() {
        let n = 4;
        let g12 = CliffordElement::basis(GammaIndex::from_slice(n, &[1, 2]).unwrap());
        let g23 = CliffordElement::basis(GammaIndex::from_slice(n, &[2, 3]).unwrap());
        assert_eq!(adjoint_action(n, (1, 3), &g12).unwrap(), g23);
        assert!(adjoint_action(n, (1, 2), &CliffordElement::one(n)).unwrap().is_zero());
        for j in 1..=2 {
            let h = cartan_element(n, j).unwrap();
            for k in 1..=2 {
                let f = f_vector(n, k).unwrap();
                let want = if j == k { f.clone() } else { CliffordElement::zero(n) };
                assert_eq!(h.commutator(&f).unwrap(), want);
            }
        }
    }

    #[test]
    fn adjoint_action_preserves_grade_and_commutes_with_hodge() {
        for n in 2..=6 {
            for (i, j) in generator_pairs(n) {
                for idx in all_indices(n).unwrap() {
                    let b = CliffordElement::basis(idx);
                    let out = adjoint_action(n, (i, j), &b).unwrap();
                    assert!(out.terms().all(|(k, _)| k.grade() == idx.grade()));
                    assert_eq!(adjoint_action(n, (i, j), &hodge_star(&b)).unwrap(), hodge_star(&out));
                }
            }
        }
    }

    #[test]
    fn clifford_commutators_match_matrix_commutators() {
        // π(L) = ½γ_iγ_j is a Lie algebra homomorphism
        for n in 3..=8 {
            let pairs = generator_pairs(n);
            let pi = |i: usize, j: usize| {
                CliffordElement::monomial(GammaIndex::from_slice(n, &[i, j]).unwrap(), c(0.5))
            };
            for &(i, j) in &pairs {
                for &(r, s) in &pairs {
                    let lhs = pi(i, j).commutator(&pi(r, s)).unwrap();
                    let a = so_n_generator(n, i, j).unwrap().matrix;
                    let b = so_n_generator(n, r, s).unwrap().matrix;
                    let m = &a * &b - &b * &a;
                    let mut rhs = CliffordElement::zero(n);
                    for (p, q) in generator_pairs(n) {
                        let coef = m[(p - 1, q - 1)];
                        if coef != 0.0 {
                            rhs = rhs + pi(p, q).scale(c(coef));
                        }
                    }
                    assert_eq!(lhs, rhs, "n={n} ({i},{j}) ({r},{s})");
                }
            }
        }
    }

    #[test]
    fn highest_weight_examples() {
        let n = 4;
        let f1 = f_vector(n, 1).unwrap();
        let f2 = f_vector(n, 2).unwrap();
        let ft1 = f_tilde(n, 1).unwrap();
        let ft2 = f_tilde(n, 2).unwrap();
        assert!(highest_weight_check(n, &(&f1 * &f2)).unwrap());
        assert!(highest_weight_check(n, &(&f1 * &ft2)).unwrap());
        assert!(!highest_weight_check(n, &ft1).unwrap());
        assert!(highest_weight_check(n, &CliffordElement::one(n)).unwrap());
        assert!(highest_weight_check(n, &gamma0(n).unwrap()).unwrap());
    }

    #[test]
    fn root_vectors_carry_their_weights() {
        for n in 4..=8 {
            let m = n / 2;
            let roots = simple_root_vectors(n).unwrap();
            let mut weights: Vec<Vec<f64>> = Vec::new();
            for a in 1..m {
                let mut w = alloc::vec![0.0; m];
                w[a - 1] = 1.0;
                w[a] = -1.0;
                weights.push(w);
            }
            let mut w = alloc::vec![0.0; m];
            if n % 2 == 0 {
                w[m - 2] = 1.0;
                w[m - 1] = 1.0;
            } else {
                w[m - 1] = 1.0;
            }
            weights.push(w);
            for (r, w) in roots.iter().zip(&weights) {
                for j in 1..=m {
                    let h = cartan_element(n, j).unwrap();
                    let lhs = h.commutator(r).unwrap();
                    assert_eq!(lhs, r.scale(c(w[j - 1])), "n={n} j={j}");
                }
            }
        }
    }
}
