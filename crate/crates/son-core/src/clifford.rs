//! Exact arithmetic in the rank-n Clifford algebra.
//!
//! Basis monomials are ordered generator products `γ_I`, with `I` stored as a
//! bitmask (generator `i` occupies bit `i - 1`). Products of monomials are
//! exact: the sign is an inversion count, never a floating-point quantity.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;
use core::fmt;
use core::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

pub const MAX_RANK: usize = 16;

/// Coefficients smaller than this are dropped after every operation.
pub const PRUNE: f64 = 1e-14;

pub(crate) fn check_rank(n: usize) -> Result<()> {
    if (2..=MAX_RANK).contains(&n) {
        Ok(())
    } else {
        Err(Error::RankOutOfRange(n))
    }
}

/// Sign and support of `γ_a γ_b` for bitmasks `a`, `b`.
#[inline]
pub fn mul_bits(a: u32, b: u32) -> (bool, u32) {
    let mut swaps = 0u32;
    let mut rest = b;
    while rest != 0 {
        let j = rest.trailing_zeros();
        // generators of `a` strictly above j have to hop over γ_j
        swaps += (a >> (j + 1)).count_ones();
        rest &= rest - 1;
    }
    (swaps & 1 == 1, a ^ b)
}

/// `γ_I² = ±1`; true when the square is `-1`.
#[inline]
pub fn square_is_negative(bits: u32) -> bool {
    matches!(bits.count_ones() % 4, 2 | 3)
}

/// `t(γ_I) = ±γ_I`; true when reversal flips the sign.
#[inline]
pub fn reversal_is_negative(bits: u32) -> bool {
    let k = bits.count_ones();
    (k * k.saturating_sub(1) / 2) % 2 == 1
}

/// Phase `c` with `γ₀ = c·γ_1…γ_n`.
pub fn gamma0_phase(n: usize) -> C64 {
    if matches!(n % 4, 0 | 1) {
        C64::new(1.0, 0.0)
    } else {
        C64::new(0.0, 1.0)
    }
}

/// Dimension of the irreducible matrix realization, `2^⌊n/2⌋`.
pub fn realization_dim(n: usize) -> usize {
    1usize << (n / 2)
}

fn full_bits(n: usize) -> u32 {
    if n >= 32 {
        u32::MAX
    } else {
        (1u32 << n) - 1
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GammaIndex {
    bits: u32,
    n: u8,
}

impl GammaIndex {
    pub fn from_bits(n: usize, bits: u32) -> Result<Self> {
        check_rank(n)?;
        if bits & !full_bits(n) != 0 {
            return Err(Error::InvalidArgument(alloc::format!(
                "bitmask {bits:#b} uses generators beyond rank {n}"
            )));
        }
        Ok(Self { bits, n: n as u8 })
    }

    /// Builds `γ_I` from strictly increasing 1-based generator labels.
    pub fn from_slice(n: usize, idx: &[usize]) -> Result<Self> {
        check_rank(n)?;
        let mut bits = 0u32;
        let mut last = 0usize;
        for &i in idx {
            if i == 0 || i > n {
                return Err(Error::InvalidArgument(alloc::format!(
                    "generator {i} outside 1..={n}"
                )));
            }
            if i <= last {
                return Err(Error::InvalidArgument(
                    "generator labels must be strictly increasing".into(),
                ));
            }
            last = i;
            bits |= 1 << (i - 1);
        }
        Ok(Self { bits, n: n as u8 })
    }

    pub fn identity(n: usize) -> Result<Self> {
        Self::from_bits(n, 0)
    }

    pub fn full(n: usize) -> Result<Self> {
        Self::from_bits(n, full_bits(n))
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn rank(&self) -> usize {
        self.n as usize
    }

    pub fn grade(&self) -> usize {
        self.bits.count_ones() as usize
    }

    pub fn contains(&self, i: usize) -> bool {
        i >= 1 && i <= self.rank() && self.bits & (1 << (i - 1)) != 0
    }

    /// 1-based generator labels in increasing order.
    pub fn indices(&self) -> Vec<usize> {
        (1..=self.rank()).filter(|&i| self.contains(i)).collect()
    }

    pub fn complement(&self) -> Self {
        Self { bits: self.bits ^ full_bits(self.rank()), n: self.n }
    }
}

impl fmt::Debug for GammaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "γ{:?}", self.indices())
    }
}

/// `γ_I γ_J = sign·γ_K`.
pub fn gamma_mul(i: GammaIndex, j: GammaIndex) -> Result<(i8, GammaIndex)> {
    if i.n != j.n {
        return Err(Error::RankMismatch { left: i.rank(), right: j.rank() });
    }
    let (neg, k) = mul_bits(i.bits, j.bits);
    Ok((if neg { -1 } else { 1 }, GammaIndex { bits: k, n: i.n }))
}

/// `Tr(γ_I γ_J)` in a realization with `Tr 𝟙 = d`.
pub fn trace_pair(i: GammaIndex, j: GammaIndex, d: usize) -> Result<C64> {
    if i.n != j.n {
        return Err(Error::RankMismatch { left: i.rank(), right: j.rank() });
    }
    if i.bits != j.bits {
        return Ok(C64::new(0.0, 0.0));
    }
    let d = d as f64;
    Ok(C64::new(if square_is_negative(i.bits) { -d } else { d }, 0.0))
}

/// Sparse complex combination of basis monomials.
#[derive(Clone, PartialEq)]
pub struct CliffordElement {
    n: usize,
    terms: BTreeMap<u32, C64>,
}

impl CliffordElement {
    pub fn zero(n: usize) -> Self {
        Self { n, terms: BTreeMap::new() }
    }

    pub fn scalar(n: usize, c: C64) -> Self {
        let mut e = Self::zero(n);
        e.add_term(0, c);
        e
    }

    pub fn one(n: usize) -> Self {
        Self::scalar(n, C64::new(1.0, 0.0))
    }

    pub fn monomial(idx: GammaIndex, c: C64) -> Self {
        let mut e = Self::zero(idx.rank());
        e.add_term(idx.bits, c);
        e
    }

    pub fn basis(idx: GammaIndex) -> Self {
        Self::monomial(idx, C64::new(1.0, 0.0))
    }

    /// The single generator `γ_i` (1-based).
    pub fn gamma(n: usize, i: usize) -> Result<Self> {
        Ok(Self::basis(GammaIndex::from_slice(n, &[i])?))
    }

    pub(crate) fn from_bits_unchecked(n: usize, bits: u32, c: C64) -> Self {
        let mut e = Self::zero(n);
        e.add_term(bits, c);
        e
    }

    pub fn rank(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, idx: GammaIndex) -> C64 {
        self.coeff_bits(idx.bits)
    }

    pub fn coeff_bits(&self, bits: u32) -> C64 {
        self.terms.get(&bits).copied().unwrap_or_default()
    }

    /// Terms in increasing bitmask order.
    pub fn terms(&self) -> impl Iterator<Item = (GammaIndex, C64)> + '_ {
        let n = self.n as u8;
        self.terms.iter().map(move |(&b, &c)| (GammaIndex { bits: b, n }, c))
    }

    pub(crate) fn raw_terms(&self) -> impl Iterator<Item = (u32, C64)> + '_ {
        self.terms.iter().map(|(&b, &c)| (b, c))
    }

    pub(crate) fn add_term(&mut self, bits: u32, c: C64) {
        let slot = self.terms.entry(bits).or_default();
        *slot += c;
        if slot.norm() < PRUNE {
            self.terms.remove(&bits);
        }
    }

    fn prune(&mut self) {
        self.terms.retain(|_, c| c.norm() >= PRUNE);
    }

    pub fn scale(&self, c: C64) -> Self {
        let mut out = self.clone();
        out.terms.values_mut().for_each(|v| *v *= c);
        out.prune();
        out
    }

    pub fn try_mul(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::RankMismatch { left: self.n, right: rhs.n });
        }
        let mut acc: BTreeMap<u32, C64> = BTreeMap::new();
        for (&a, &ca) in &self.terms {
            for (&b, &cb) in &rhs.terms {
                let (neg, k) = mul_bits(a, b);
                let v = ca * cb;
                *acc.entry(k).or_default() += if neg { -v } else { v };
            }
        }
        let mut out = Self { n: self.n, terms: acc };
        out.prune();
        Ok(out)
    }

    pub fn try_add(&self, rhs: &Self) -> Result<Self> {
        if self.n != rhs.n {
            return Err(Error::RankMismatch { left: self.n, right: rhs.n });
        }
        let mut out = self.clone();
        for (&b, &c) in &rhs.terms {
            out.add_term(b, c);
        }
        Ok(out)
    }

    /// Hermitian adjoint; each `γ_i` is self-adjoint so `γ_I* = t(γ_I)`.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zero(self.n);
        for (&b, &c) in &self.terms {
            let c = c.conj();
            out.add_term(b, if reversal_is_negative(b) { -c } else { c });
        }
        out
    }

    /// Commutator `[self, rhs]`.
    pub fn commutator(&self, rhs: &Self) -> Result<Self> {
        let ab = self.try_mul(rhs)?;
        let ba = rhs.try_mul(self)?;
        Ok(ab - ba)
    }

    /// Largest coefficient modulus, a cheap norm for residual checks.
    pub fn max_abs(&self) -> f64 {
        self.terms.values().fold(0.0, |m, c| m.max(c.norm()))
    }

    /// `√(Σ|c_I|²)`; equals the normalized Hilbert-Schmidt norm `√(Tr B*B / D)`.
    pub fn coeff_norm(&self) -> f64 {
        libm::sqrt(self.terms.values().map(|c| c.norm_sqr()).sum::<f64>())
    }

    /// Trace in the irreducible realization, `D = 2^⌊n/2⌋`.
    ///
    /// For odd n the realization is the `γ₀ = +𝟙` sector, so the top monomial
    /// `γ_1…γ_n = c̄·γ₀` also carries trace.
    pub fn trace(&self) -> C64 {
        let d = realization_dim(self.n) as f64;
        let mut t = self.coeff_bits(0) * d;
        if self.n % 2 == 1 {
            t += self.coeff_bits(full_bits(self.n)) * gamma0_phase(self.n).conj() * d;
        }
        t
    }

    /// Reduces an odd-rank element into the `γ₀ = +𝟙` quotient, keeping only
    /// monomials of grade below n/2. Even ranks are returned unchanged.
    pub fn sector_reduce(&self) -> Self {
        if self.n % 2 == 0 {
            return self.clone();
        }
        let full = full_bits(self.n);
        let c = gamma0_phase(self.n).conj();
        let mut out = Self::zero(self.n);
        for (&b, &v) in &self.terms {
            if (b.count_ones() as usize) * 2 < self.n {
                out.add_term(b, v);
            } else {
                // γ_B = ±γ_full γ_{B^c} and γ_full = c̄ on the sector
                let (neg, k) = mul_bits(full, b ^ full);
                debug_assert_eq!(k, b);
                let s = if neg { -1.0 } else { 1.0 };
                out.add_term(b ^ full, v * c * s);
            }
        }
        out
    }

    /// Splits off the part living on monomials of the given parity.
    pub fn parity_part(&self, odd: bool) -> Self {
        let mut out = Self::zero(self.n);
        for (&b, &v) in &self.terms {
            if (b.count_ones() % 2 == 1) == odd {
                out.add_term(b, v);
            }
        }
        out
    }
}

impl fmt::Debug for CliffordElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut m = f.debug_map();
        for (idx, c) in self.terms() {
            m.entry(&idx, &c);
        }
        m.finish()
    }
}

impl Add for CliffordElement {
    type Output = CliffordElement;
    fn add(self, rhs: Self) -> Self {
        self.try_add(&rhs).expect("rank mismatch in Clifford addition")
    }
}

impl Sub for CliffordElement {
    type Output = CliffordElement;
    fn sub(self, rhs: Self) -> Self {
        self.try_add(&(-rhs)).expect("rank mismatch in Clifford subtraction")
    }
}

impl Neg for CliffordElement {
    type Output = CliffordElement;
    fn neg(self) -> Self {
        self.scale(C64::new(-1.0, 0.0))
    }
}

impl Mul for &CliffordElement {
    type Output = CliffordElement;
    fn mul(self, rhs: Self) -> CliffordElement {
        self.try_mul(rhs).expect("rank mismatch in Clifford product")
    }
}

impl Mul for CliffordElement {
    type Output = CliffordElement;
    fn mul(self, rhs: Self) -> CliffordElement {
        &self * &rhs
    }
}

/// `γ₀ = c·γ_1…γ_n`, normalized so that `γ₀² = 𝟙` and `γ₀* = γ₀`.
pub fn gamma0(n: usize) -> Result<CliffordElement> {
    Ok(CliffordElement::monomial(GammaIndex::full(n)?, gamma0_phase(n)))
}

/// `P± = ½(𝟙 ± γ₀)`.
pub fn projectors_pm(n: usize) -> Result<(CliffordElement, CliffordElement)> {
    let g0 = gamma0(n)?;
    let half = C64::new(0.5, 0.0);
    let one = CliffordElement::one(n);
    let plus = (one.clone() + g0.clone()).scale(half);
    let minus = (one - g0).scale(half);
    Ok((plus, minus))
}

/// Hodge star as left multiplication by `γ₀`.
pub fn hodge_star(b: &CliffordElement) -> CliffordElement {
    let g0 = gamma0(b.rank()).expect("element rank already validated");
    &g0 * b
}

/// `α(B) = γ_1 B γ_1`.
pub fn alpha(b: &CliffordElement) -> CliffordElement {
    let mut out = CliffordElement::zero(b.rank());
    for (bits, c) in b.raw_terms() {
        // γ_1 γ_I γ_1 = (-1)^{|I| - [1∈I]} γ_I
        let k = bits.count_ones() - (bits & 1);
        out.add_term(bits, if k % 2 == 1 { -c } else { c });
    }
    out
}

/// Linear anti-automorphism reversing generator strings.
pub fn transpose_antiauto(b: &CliffordElement) -> CliffordElement {
    let mut out = CliffordElement::zero(b.rank());
    for (bits, c) in b.raw_terms() {
        out.add_term(bits, if reversal_is_negative(bits) { -c } else { c });
    }
    out
}

/// All `2^n` basis monomials of rank n in increasing bitmask order.
pub fn all_indices(n: usize) -> Result<Vec<GammaIndex>> {
    check_rank(n)?;
    Ok((0..=full_bits(n)).map(|b| GammaIndex { bits: b, n: n as u8 }).collect())
}

/// Representatives `I` of the pairs `{I, I^c}`: grade below n/2, or grade n/2
/// with generator 1 present. Ordered by grade, then bitmask.
pub fn half_representatives(n: usize) -> Result<Vec<GammaIndex>> {
    let mut reps: Vec<GammaIndex> = all_indices(n)?
        .into_iter()
        .filter(|g| {
            let k = g.grade();
            2 * k < n || (2 * k == n && g.bits & 1 == 1)
        })
        .collect();
    reps.sort_by_key(|g| (g.grade(), g.bits));
    Ok(reps)
}
