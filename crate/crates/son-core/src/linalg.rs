//! Dense and sparse matrices plus the eigensolvers the checks rely on.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub type CMatrix = DMatrix<C64>;
pub type RMatrix = DMatrix<f64>;

pub fn frobenius(m: &CMatrix) -> f64 {
    libm::sqrt(m.iter().map(|z| z.norm_sqr()).sum::<f64>())
}

pub fn frobenius_real(m: &RMatrix) -> f64 {
    libm::sqrt(m.iter().map(|z| z * z).sum::<f64>())
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |a, z| a.max(z.norm()))
}

pub fn to_complex(m: &RMatrix) -> CMatrix {
    m.map(|x| C64::new(x, 0.0))
}

/// Dense complex square matrix tagged with structural flags.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    pub mat: CMatrix,
    pub hermitian: bool,
    pub unitary: bool,
}

pub const FLAG_TOL: f64 = 1e-10;

impl OperatorMatrix {
    /// Wraps `mat`, recording Hermiticity. Unitarity is only recorded by
    /// [`OperatorMatrix::unitary`].
    pub fn new(mat: CMatrix) -> Self {
        let hermitian = mat.is_square() && max_abs(&(&mat - mat.adjoint())) < FLAG_TOL;
        Self { mat, hermitian, unitary: false }
    }

    pub fn unitary(mat: CMatrix) -> Self {
        let mut op = Self::new(mat);
        let n = op.mat.nrows();
        op.unitary = op.mat.is_square()
            && max_abs(&(op.mat.adjoint() * &op.mat - CMatrix::identity(n, n))) < FLAG_TOL;
        op
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn real_part_checked(&self, tol: f64) -> Result<RMatrix> {
        if self.mat.iter().any(|z| z.im.abs() > tol) {
            return Err(Error::InvalidArgument("matrix has a non-negligible imaginary part".into()));
        }
        Ok(self.mat.map(|z| z.re))
    }
}

/// Eigen-decomposition with ascending eigenvalues; eigenvectors are columns.
#[derive(Clone, Debug)]
pub struct HermitianEigen<T: nalgebra::Scalar> {
    pub values: Vec<f64>,
    pub vectors: DMatrix<T>,
}

fn sort_eigen<T: nalgebra::Scalar + Copy>(values: &[f64], vectors: &DMatrix<T>) -> HermitianEigen<T> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let vals = order.iter().map(|&i| values[i]).collect();
    let vecs = DMatrix::from_fn(vectors.nrows(), order.len(), |r, c| vectors[(r, order[c])]);
    HermitianEigen { values: vals, vectors: vecs }
}

pub fn hermitian_eigen(m: &CMatrix) -> Result<HermitianEigen<C64>> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("eigen-decomposition needs a square matrix".into()));
    }
    if max_abs(&(m - m.adjoint())) > 1e-8 * max_abs(m).max(1.0) {
        return Err(Error::InvalidArgument("matrix is not Hermitian".into()));
    }
    let sym = (m + m.adjoint()) * C64::new(0.5, 0.0);
    let e = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
        .ok_or_else(|| Error::NotConverged("dense Hermitian eigen-decomposition".into()))?;
    Ok(sort_eigen(e.eigenvalues.as_slice(), &e.eigenvectors))
}

pub fn symmetric_eigen(m: &RMatrix) -> Result<HermitianEigen<f64>> {
    if !m.is_square() {
        return Err(Error::InvalidArgument("eigen-decomposition needs a square matrix".into()));
    }
    let sym = (m + m.transpose()) * 0.5;
    let e = SymmetricEigen::try_new(sym, f64::EPSILON, 0)
        .ok_or_else(|| Error::NotConverged("dense symmetric eigen-decomposition".into()))?;
    Ok(sort_eigen(e.eigenvalues.as_slice(), &e.eigenvectors))
}

/// Groups ascending values into runs whose neighbours differ by at most
/// `tol`. Returns `(mean, count)` per run.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut out: Vec<(f64, usize, f64)> = Vec::new();
    let mut prev = f64::NEG_INFINITY;
    for &v in values {
        match out.last_mut() {
            Some((_, k, sum)) if v - prev <= tol => {
                *k += 1;
                *sum += v;
            }
            _ => out.push((v, 1, v)),
        }
        prev = v;
    }
    out.into_iter().map(|(_, k, s)| (s / k as f64, k)).collect()
}

/// Clusters an arbitrary list of values, sorting first.
pub fn cluster(values: &[f64], tol: f64) -> Vec<(f64, usize)> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    cluster_sorted(&v, tol)
}

/// Orthonormal basis of the column span of `a`, by column-pivoted QR;
/// columns whose pivot falls below `rel_tol · |R₀₀|` are discarded.
/// (nalgebra's SVD returns inaccurate left vectors on rank-deficient input.)
pub fn orthonormal_columns(a: &CMatrix, rel_tol: f64) -> CMatrix {
    if a.ncols() == 0 || a.nrows() == 0 {
        return CMatrix::zeros(a.nrows(), 0);
    }
    let qr = a.clone().col_piv_qr();
    let r = qr.r();
    let top = r[(0, 0)].norm();
    if top == 0.0 {
        return CMatrix::zeros(a.nrows(), 0);
    }
    let rank = (0..r.nrows().min(r.ncols())).take_while(|&i| r[(i, i)].norm() > rel_tol * top).count();
    qr.q().columns(0, rank).into_owned()
}

/// Numerical rank via singular values.
pub fn numerical_rank(a: &CMatrix, rel_tol: f64) -> usize {
    if a.ncols() == 0 || a.nrows() == 0 {
        return 0;
    }
    let s = a.singular_values();
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&x| x > rel_tol * smax).count()
}

/// Frobenius distance between the orthogonal projectors onto the spans of
/// two matrices with orthonormal columns.
pub fn projector_distance(q: &CMatrix, k: &CMatrix) -> Result<f64> {
    if q.nrows() != k.nrows() {
        return Err(Error::InvalidArgument(format!(
            "projector dimension mismatch: {} vs {}",
            q.nrows(),
            k.nrows()
        )));
    }
    // ‖P_q − P_k‖² = ‖(1 − P_k)q‖² + ‖(1 − P_q)k‖²; forming the residuals
    // avoids the cancellation in k + r − 2‖q*k‖²
    let rq = q - k * (k.adjoint() * q);
    let rk = k - q * (q.adjoint() * k);
    let d2 = rq.iter().chain(rk.iter()).map(|z| z.norm_sqr()).sum::<f64>();
    Ok(libm::sqrt(d2))
}

/// Compressed-row real sparse matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CsrMatrix {
    pub dim: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Assembles from `(row, col, value)` triplets, summing duplicates and
    /// dropping exact zeros.
    pub fn from_triplets(dim: usize, mut t: Vec<(usize, usize, f64)>) -> Result<Self> {
        if t.iter().any(|&(r, c, _)| r >= dim || c >= dim) {
            return Err(Error::InvalidArgument("triplet index out of bounds".into()));
        }
        t.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut indptr = vec![0usize; dim + 1];
        let mut indices = Vec::with_capacity(t.len());
        let mut values: Vec<f64> = Vec::with_capacity(t.len());
        let mut last: Option<(usize, usize)> = None;
        for (r, c, v) in t {
            if last == Some((r, c)) {
                *values.last_mut().expect("entry present") += v;
            } else {
                indices.push(c);
                values.push(v);
                indptr[r + 1] += 1;
                last = Some((r, c));
            }
        }
        for r in 0..dim {
            indptr[r + 1] += indptr[r];
        }
        let mut m = Self { dim, indptr, indices, values };
        m.drop_zeros();
        Ok(m)
    }

    fn drop_zeros(&mut self) {
        let mut indptr = vec![0usize; self.dim + 1];
        let mut indices = Vec::with_capacity(self.indices.len());
        let mut values = Vec::with_capacity(self.values.len());
        for r in 0..self.dim {
            for p in self.indptr[r]..self.indptr[r + 1] {
                if self.values[p] != 0.0 {
                    indices.push(self.indices[p]);
                    values.push(self.values[p]);
                }
            }
            indptr[r + 1] = indices.len();
        }
        self.indptr = indptr;
        self.indices = indices;
        self.values = values;
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.dim) {
            let mut acc = 0.0;
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += self.values[p] * x[self.indices[p]];
            }
            *out = acc;
        }
    }

    pub fn matvec_complex(&self, x: &[C64], y: &mut [C64]) {
        for (r, out) in y.iter_mut().enumerate().take(self.dim) {
            let mut acc = C64::new(0.0, 0.0);
            for p in self.indptr[r]..self.indptr[r + 1] {
                acc += x[self.indices[p]] * self.values[p];
            }
            *out = acc;
        }
    }

    pub fn to_dense(&self) -> RMatrix {
        let mut m = RMatrix::zeros(self.dim, self.dim);
        for r in 0..self.dim {
            for p in self.indptr[r]..self.indptr[r + 1] {
                m[(r, self.indices[p])] += self.values[p];
            }
        }
        m
    }

    /// Maximum absolute row sum, an upper bound on the spectral norm of a
    /// symmetric matrix.
    pub fn norm_bound(&self) -> f64 {
        (0..self.dim)
            .map(|r| self.values[self.indptr[r]..self.indptr[r + 1]].iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn symmetry_residual(&self) -> f64 {
        let d = self.to_dense_if_small();
        match d {
            Some(m) => (&m - m.transpose()).iter().fold(0.0, |a, v| a.max(v.abs())),
            None => {
                let mut worst = 0.0f64;
                for r in 0..self.dim {
                    for p in self.indptr[r]..self.indptr[r + 1] {
                        let c = self.indices[p];
                        worst = worst.max((self.values[p] - self.get(c, r)).abs());
                    }
                }
                worst
            }
        }
    }

    fn to_dense_if_small(&self) -> Option<RMatrix> {
        (self.dim <= 512).then(|| self.to_dense())
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        let row = &self.indices[self.indptr[r]..self.indptr[r + 1]];
        match row.binary_search(&c) {
            Ok(p) => self.values[self.indptr[r] + p],
            Err(_) => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug)]
pub struct LanczosOptions {
    pub krylov_dim: usize,
    pub max_restarts: usize,
    /// Required residual `‖Hv − θv‖` for a certified pair.
    pub residual_tol: f64,
    pub seed: u64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { krylov_dim: 120, max_restarts: 60, residual_tol: 1e-10, seed: 0 }
    }
}

#[derive(Clone, Debug)]
pub struct Eigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub residual: f64,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    libm::sqrt(dot(a, a))
}

fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    y.iter_mut().zip(x).for_each(|(yi, xi)| *yi += alpha * xi);
}

fn project_out(v: &mut [f64], basis: &[Vec<f64>]) {
    // two passes of classical Gram-Schmidt
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            axpy(-c, q, v);
        }
    }
}

/// Lowest eigenpair of a real symmetric operator restricted to the
/// orthogonal complement of `locked`, by explicitly restarted Lanczos with
/// full reorthogonalization. The returned pair always satisfies the
/// residual bound; otherwise the call fails.
pub fn lanczos_lowest<F>(apply: F, dim: usize, locked: &[Vec<f64>], opts: &LanczosOptions) -> Result<Eigenpair>
where
    F: Fn(&[f64], &mut [f64]),
{
    if locked.len() >= dim {
        return Err(Error::InvalidArgument("no complement left to search".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ (locked.len() as u64).wrapping_mul(0x9E37_79B9));
    let mut start: Vec<f64> = (0..dim).map(|_| rng.random::<f64>() - 0.5).collect();
    let m = opts.krylov_dim.min(dim - locked.len()).max(1);
    let mut w = vec![0.0; dim];
    let mut last_residual = f64::INFINITY;

    for _ in 0..=opts.max_restarts {
        project_out(&mut start, locked);
        let s = norm(&start);
        if s == 0.0 {
            return Err(Error::NotConverged("Lanczos start vector vanished".into()));
        }
        start.iter_mut().for_each(|x| *x /= s);

        let mut basis: Vec<Vec<f64>> = vec![start.clone()];
        let mut alpha = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        for j in 0..m {
            apply(&basis[j], &mut w);
            let a = dot(&basis[j], &w);
            alpha.push(a);
            for _ in 0..2 {
                project_out(&mut w, locked);
                project_out(&mut w, &basis);
            }
            let b = norm(&w);
            if j + 1 == m || b < 1e-13 {
                break;
            }
            beta.push(b);
            basis.push(w.iter().map(|x| x / b).collect());
        }

        let k = alpha.len();
        let mut t = RMatrix::zeros(k, k);
        for i in 0..k {
            t[(i, i)] = alpha[i];
            if i + 1 < k {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let e = symmetric_eigen(&t)?;
        let y = e.vectors.column(0);
        let mut v = vec![0.0; dim];
        for (i, q) in basis.iter().enumerate().take(k) {
            axpy(y[i], q, &mut v);
        }
        project_out(&mut v, locked);
        let nv = norm(&v);
        v.iter_mut().for_each(|x| *x /= nv);

        // certify with a true residual, not the tridiagonal estimate
        apply(&v, &mut w);
        let rq = dot(&v, &w);
        axpy(-rq, &v, &mut w);
        project_out(&mut w, locked);
        let residual = norm(&w);
        if residual <= opts.residual_tol {
            return Ok(Eigenpair { value: rq, vector: v, residual });
        }
        last_residual = residual;
        start = v;
    }
    Err(Error::NotConverged(format!(
        "Lanczos residual {last_residual:.3e} above {:.3e} after {} restarts",
        opts.residual_tol, opts.max_restarts
    )))
}

/// All eigenvectors with eigenvalue below `threshold`, found one at a time
/// with locking. Stops at the first certified eigenvalue above `threshold`.
pub fn lanczos_low_subspace<F>(
    apply: F,
    dim: usize,
    threshold: f64,
    max_vectors: usize,
    opts: &LanczosOptions,
) -> Result<(Vec<Eigenpair>, f64)>
where
    F: Fn(&[f64], &mut [f64]),
{
    let mut found: Vec<Eigenpair> = Vec::new();
    let mut locked: Vec<Vec<f64>> = Vec::new();
    loop {
        if found.len() >= max_vectors {
            return Err(Error::CapExceeded { what: "low subspace", size: found.len(), cap: max_vectors });
        }
        if locked.len() == dim {
            return Ok((found, f64::INFINITY));
        }
        let p = lanczos_lowest(&apply, dim, &locked, opts)?;
        if p.value >= threshold {
            return Ok((found, p.value));
        }
        locked.push(p.vector.clone());
        found.push(p);
    }
}

/// Column vector helper.
pub fn column(v: &[C64]) -> DVector<C64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::{prop_assert, proptest};

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let a = CMatrix::from_fn(n, n, |_, _| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5));
        &a + a.adjoint()
    }

    #[test]
    fn orthonormal_columns_of_tall_rank_deficient_input() {
        // 400 x 40 of rank 7, with repeated and zero columns
        let base = CMatrix::from_fn(400, 7, |r, c| C64::new(((r * (c + 3)) % 11) as f64 - 5.0, ((r + 2 * c) % 5) as f64));
        let zero = C64::new(0.0, 0.0);
        let a = CMatrix::from_fn(400, 40, |r, c| if c % 6 == 5 { zero } else { base[(r, c % 7)] * (1.0 + c as f64) });
        let q = orthonormal_columns(&a, 1e-10);
        assert_eq!(q.ncols(), 7);
        let back = &q * (q.adjoint() * &a);
        assert!(frobenius(&(&a - back)) < 1e-12 * frobenius(&a));
        assert!(frobenius(&(q.adjoint() * &q - CMatrix::identity(7, 7))) < 1e-12);
    }

    #[test]
    fn complex_hermitian_eigen_is_accurate() {
        for (n, seed) in [(5usize, 1u64), (40, 2), (128, 3)] {
            let a = random_hermitian(n, seed);
            let e = hermitian_eigen(&a).unwrap();
            let d = CMatrix::from_diagonal(&DVector::from_iterator(n, e.values.iter().map(|&x| C64::new(x, 0.0))));
            let recon = &e.vectors * d * e.vectors.adjoint();
            assert!(frobenius(&(recon - &a)) < 1e-10 * frobenius(&a));
            let gram = e.vectors.adjoint() * &e.vectors;
            assert!(frobenius(&(gram - CMatrix::identity(n, n))) < 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut a = random_hermitian(4, 9);
        a[(0, 1)] += C64::new(1.0, 0.0);
        assert!(hermitian_eigen(&a).is_err());
    }

    #[test]
    fn clustering_groups_runs() {
        let c = cluster(&[1.0, -0.5, 1.0 + 1e-12, 0.0, 0.0], 1e-9);
        assert_eq!(c.len(), 3);
        assert_eq!(c[0].1, 1);
        assert_eq!(c[1], (0.0, 2));
        assert_eq!(c[2].1, 2);
    }

    #[test]
    fn csr_assembly_sums_duplicates() {
        let m = CsrMatrix::from_triplets(3, vec![(0, 0, 1.0), (2, 1, 2.0), (0, 0, 1.5), (1, 2, 0.0)]).unwrap();
        assert_eq!(m.nnz(), 2);
        assert_eq!(m.get(0, 0), 2.5);
        assert_eq!(m.get(2, 1), 2.0);
        let mut y = [0.0; 3];
        m.matvec(&[1.0, 1.0, 1.0], &mut y);
        assert_eq!(y, [2.5, 0.0, 2.0]);
        assert!(CsrMatrix::from_triplets(2, vec![(2, 0, 1.0)]).is_err());
    }

    #[test]
    fn lanczos_finds_degenerate_low_subspace() {
        // diagonal operator with a threefold zero eigenvalue, dressed by a rotation
        let n = 300;
        let mut diag: Vec<f64> = (0..n).map(|i| 0.5 + i as f64 * 0.01).collect();
        diag[17] = 0.0;
        diag[150] = 0.0;
        diag[299] = 0.0;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let g = RMatrix::from_fn(n, n, |_, _| rng.random::<f64>() - 0.5);
        let q = g.qr().q();
        let h = &q * RMatrix::from_diagonal(&DVector::from_vec(diag)) * q.transpose();
        let apply = |x: &[f64], y: &mut [f64]| {
            let v = &h * DVector::from_column_slice(x);
            y.copy_from_slice(v.as_slice());
        };
        let opts = LanczosOptions { krylov_dim: 80, max_restarts: 200, residual_tol: 1e-10, seed: 3 };
        let (pairs, next) = lanczos_low_subspace(apply, n, 1e-8, 10, &opts).unwrap();
        assert_eq!(pairs.len(), 3);
        assert!((next - 0.5).abs() < 1e-8);
        let k = CMatrix::from_fn(n, 3, |r, c| C64::new(pairs[c].vector[r], 0.0));
        let exact = CMatrix::from_fn(n, 3, |r, c| C64::new(q[(r, [17, 150, 299][c])], 0.0));
        assert!(projector_distance(&k, &exact).unwrap() < 1e-8);
    }

    #[test]
    fn projector_distance_of_same_span_is_zero() {
        let a = random_hermitian(6, 4);
        let q = orthonormal_columns(&a.columns(0, 3).into_owned(), 1e-12);
        let mix = &q * random_hermitian(3, 5);
        let k = orthonormal_columns(&mix, 1e-12);
        assert_eq!(k.ncols(), 3);
        assert!(projector_distance(&q, &k).unwrap() < 1e-12);
        let other = orthonormal_columns(&a.columns(3, 1).into_owned(), 1e-12);
        assert!(projector_distance(&q, &other).unwrap() > 1.0);
    }

    proptest! {
        #[test]
        fn symmetric_eigen_reconstructs(seed in 0u64..1000, n in 1usize..12) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let a = RMatrix::from_fn(n, n, |_, _| rng.random::<f64>());
            let a = &a + a.transpose();
            let e = symmetric_eigen(&a).unwrap();
            let recon = &e.vectors * RMatrix::from_diagonal(&DVector::from_vec(e.values.clone())) * e.vectors.transpose();
            prop_assert!(frobenius_real(&(recon - &a)) < 1e-10 * (1.0 + frobenius_real(&a)));
        }
    }
}
