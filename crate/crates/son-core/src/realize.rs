//! Faithful matrix realization of the Clifford algebra by Pauli strings.

use alloc::vec::Vec;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::clifford::{check_rank, gamma0_phase, realization_dim, CliffordElement, GammaIndex};
use crate::error::{Error, Result};
use crate::linalg::{CMatrix, OperatorMatrix};

#[derive(Clone, Debug)]
pub struct MatrixRealization {
    pub n: usize,
    pub dim: usize,
    pub gammas: Vec<CMatrix>,
    /// `Tr 𝟙` in this realization.
    pub d_trace: usize,
}

fn pauli(k: u8) -> CMatrix {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let v = match k {
        b'I' => [one, o, o, one],
        b'X' => [o, one, one, o],
        b'Y' => [o, -i, i, o],
        _ => [one, o, o, -one],
    };
    DMatrix::from_row_slice(2, 2, &v)
}

fn pauli_string(s: &[u8]) -> CMatrix {
    let mut m = DMatrix::from_element(1, 1, C64::new(1.0, 0.0));
    for &k in s {
        m = m.kronecker(&pauli(k));
    }
    m
}

/// Jordan-Wigner generators: qubit `k` carries `X` for `γ_{2k+1}` and `Y` for
/// `γ_{2k+2}`, with a `Z` string on every earlier qubit. For odd rank the last
/// generator is the scaled product of the others, signed so that `γ₀ = +𝟙`.
pub fn matrix_rep(n: usize) -> Result<MatrixRealization> {
    check_rank(n)?;
    let m = n / 2;
    let mut gammas = Vec::with_capacity(n);
    for k in 0..m {
        for p in [b'X', b'Y'] {
            let mut s = alloc::vec![b'I'; m];
            s[..k].fill(b'Z');
            s[k] = p;
            gammas.push(pauli_string(&s));
        }
    }
    let dim = realization_dim(n);
    if n % 2 == 1 {
        let mut prod = CMatrix::identity(dim, dim);
        for g in &gammas {
            prod *= g;
        }
        let phase = C64::new(0.0, 1.0).powu(m as u32);
        let mut last = prod * phase;
        let mut full = CMatrix::identity(dim, dim);
        for g in gammas.iter().chain(core::iter::once(&last)) {
            full *= g;
        }
        let g0 = full * gamma0_phase(n);
        if g0[(0, 0)].re < 0.0 {
            last = -last;
        }
        gammas.push(last);
    }
    Ok(MatrixRealization { n, dim, gammas, d_trace: dim })
}

impl MatrixRealization {
    /// Realized monomial `γ_I`.
    pub fn monomial(&self, idx: GammaIndex) -> Result<CMatrix> {
        if idx.rank() != self.n {
            return Err(Error::RankMismatch { left: idx.rank(), right: self.n });
        }
        let mut m = CMatrix::identity(self.dim, self.dim);
        for i in idx.indices() {
            m *= &self.gammas[i - 1];
        }
        Ok(m)
    }

    /// Largest entrywise deviation from `γ_iγ_j + γ_jγ_i = 2δ_ij𝟙`.
    pub fn anticommutation_residual(&self) -> f64 {
        let id = CMatrix::identity(self.dim, self.dim);
        let mut worst = 0.0f64;
        for (i, a) in self.gammas.iter().enumerate() {
            for (j, b) in self.gammas.iter().enumerate() {
                let mut s = a * b + b * a;
                if i == j {
                    s -= &id * C64::new(2.0, 0.0);
                }
                worst = worst.max(s.iter().fold(0.0, |m, z| m.max(z.norm())));
            }
        }
        worst
    }

    pub fn hermiticity_residual(&self) -> f64 {
        self.gammas
            .iter()
            .map(|g| (g - g.adjoint()).iter().fold(0.0f64, |m, z: &C64| m.max(z.norm())))
            .fold(0.0, f64::max)
    }
}

/// Image of `B` under the realization.
pub fn realize(b: &CliffordElement, r: &MatrixRealization) -> Result<OperatorMatrix> {
    if b.rank() != r.n {
        return Err(Error::RankMismatch { left: b.rank(), right: r.n });
    }
    let mut out = CMatrix::zeros(r.dim, r.dim);
    for (idx, c) in b.terms() {
        out += r.monomial(idx)? * c;
    }
    Ok(OperatorMatrix::new(out))
}
