//! Dense complex linear algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, Schur};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use std::f64::consts::PI;

pub type C64 = Complex64;
pub type Mat = DMatrix<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const IM: C64 = C64::new(0.0, 1.0);

pub fn eye(n: usize) -> Mat {
    Mat::identity(n, n)
}

pub fn zeros(r: usize, c: usize) -> Mat {
    Mat::zeros(r, c)
}

/// Frobenius norm.
pub fn fro(m: &Mat) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Frobenius distance between two matrices of equal shape.
pub fn dist(a: &Mat, b: &Mat) -> f64 {
    debug_assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

/// Frobenius distance between `a` and the closest unimodular multiple of `b`.
pub fn dist_up_to_phase(a: &Mat, b: &Mat) -> f64 {
    let ip: C64 = b.iter().zip(a.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if ip.norm() > 0.0 { ip / ip.norm() } else { ONE };
    dist(a, &(b * phase))
}

/// max(‖U*U − 1‖, ‖UU* − 1‖) in Frobenius norm; infinite for non-square input.
pub fn unitarity_residual(u: &Mat) -> f64 {
    if !u.is_square() {
        return f64::INFINITY;
    }
    let n = u.nrows();
    let id = eye(n);
    let a = dist(&(u.adjoint() * u), &id);
    let b = dist(&(u * u.adjoint()), &id);
    a.max(b)
}

pub fn kron(a: &Mat, b: &Mat) -> Mat {
    a.kronecker(b)
}

/// Kronecker product of a list, left factor most significant.
pub fn kron_all(ms: &[Mat]) -> Mat {
    let mut out = eye(1);
    for m in ms {
        out = kron(&out, m);
    }
    out
}

pub fn diag(entries: &[C64]) -> Mat {
    let n = entries.len();
    let mut m = zeros(n, n);
    for (i, z) in entries.iter().enumerate() {
        m[(i, i)] = *z;
    }
    m
}

pub fn matrix_unit(n: usize, i: usize, j: usize) -> Mat {
    let mut m = zeros(n, n);
    m[(i, j)] = ONE;
    m
}

pub fn random_gaussian<R: Rng + ?Sized>(r: usize, c: usize, rng: &mut R) -> Mat {
    Mat::from_fn(r, c, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        C64::new(re, im) / std::f64::consts::SQRT_2
    })
}

/// Haar-distributed unitary from the QR decomposition of a Gaussian matrix.
pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    let z = random_gaussian(n, n, rng);
    let qr = z.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..n {
        let d = r[(j, j)];
        let ph = if d.norm() > 0.0 { d / d.norm() } else { ONE };
        for i in 0..n {
            q[(i, j)] *= ph;
        }
    }
    q
}

pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Mat {
    let z = random_gaussian(n, n, rng);
    (&z + z.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn hermitian_eigen(h: &Mat) -> (Vec<f64>, Mat) {
    let n = h.nrows();
    if n == 0 {
        return (vec![], zeros(0, 0));
    }
    let f = faer::Mat::<C64>::from_fn(n, n, |i, j| (h[(i, j)] + h[(j, i)].conj()) * 0.5);
    let eig = f
        .self_adjoint_eigen(faer::Side::Lower)
        .expect("eigendecomposition converges");
    let (fu, fs) = (eig.U(), eig.S());
    let vals = (0..n).map(|i| fs[i].re).collect();
    let vecs = Mat::from_fn(n, n, |i, j| fu[(i, j)]);
    (vals, vecs)
}

/// Eigen-decomposition of a normal matrix through the complex Schur form.
///
/// Returns eigenvalues and a unitary whose columns are the eigenvectors.
pub fn normal_eigen(u: &Mat) -> (Vec<C64>, Mat) {
    let n = u.nrows();
    if n == 0 {
        return (vec![], zeros(0, 0));
    }
    let (q, t) = Schur::new(u.clone()).unpack();
    let vals = (0..n).map(|k| t[(k, k)]).collect();
    (vals, q)
}

/// Principal phase in (−π, π]; values at −π are moved to π.
pub fn principal_phase(z: C64) -> f64 {
    let th = z.arg();
    if th <= -PI + 1e-12 {
        th + 2.0 * PI
    } else {
        th
    }
}

/// Hermitian H with U = exp(iH) and spectrum in (−π, π].
pub fn principal_log(u: &Mat) -> Mat {
    let (vals, q) = normal_eigen(u);
    let phases: Vec<C64> = vals
        .iter()
        .map(|&z| C64::new(principal_phase(z), 0.0))
        .collect();
    let h = &q * diag(&phases) * q.adjoint();
    (&h + h.adjoint()) * C64::new(0.5, 0.0)
}

/// exp(i t H) for Hermitian H.
pub fn expi(h: &Mat, t: f64) -> Mat {
    let (vals, v) = hermitian_eigen(h);
    let ph: Vec<C64> = vals.iter().map(|&l| C64::from_polar(1.0, t * l)).collect();
    &v * diag(&ph) * v.adjoint()
}

/// Thin singular value decomposition m = U diag(s) V*, singular values descending.
///
/// Backed by faer; nalgebra's complex SVD loses accuracy on rank-deficient input.
pub fn svd(m: &Mat) -> (Mat, Vec<f64>, Mat) {
    let (r, c) = m.shape();
    let k = r.min(c);
    if k == 0 {
        return (zeros(r, 0), vec![], zeros(c, 0));
    }
    let f = faer::Mat::<C64>::from_fn(r, c, |i, j| m[(i, j)]);
    let d = f.thin_svd().expect("svd converges");
    let (fu, fs, fv) = (d.U(), d.S(), d.V());
    let s: Vec<f64> = (0..k).map(|i| fs[i].re).collect();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&a, &b| s[b].partial_cmp(&s[a]).unwrap());
    let u = Mat::from_fn(r, k, |i, j| fu[(i, order[j])]);
    let v = Mat::from_fn(c, k, |i, j| fv[(i, order[j])]);
    (u, order.iter().map(|&i| s[i]).collect(), v)
}

pub fn singular_values(m: &Mat) -> Vec<f64> {
    svd(m).1
}

/// Spectral norm.
pub fn op_norm(m: &Mat) -> f64 {
    singular_values(m).first().copied().unwrap_or(0.0)
}

/// Unitary factor of the polar decomposition of a square matrix.
pub fn polar_unitary(m: &Mat) -> Mat {
    let (u, _, v) = svd(m);
    u * v.adjoint()
}

/// Orthonormal basis (columns) of the column space, dropping singular values below
/// `rel_tol` times the largest.
pub fn range_basis(m: &Mat, rel_tol: f64) -> Mat {
    let (r, c) = m.shape();
    if r == 0 || c == 0 {
        return zeros(r, 0);
    }
    let (u, s, _) = svd(m);
    let smax = s.first().copied().unwrap_or(0.0);
    let keep = s
        .iter()
        .filter(|&&x| smax > 0.0 && x > rel_tol * smax)
        .count();
    u.columns(0, keep).into_owned()
}

/// Numerical rank with a threshold relative to the largest singular value.
pub fn rank(m: &Mat, rel_tol: f64) -> usize {
    range_basis(m, rel_tol).ncols()
}

/// Sub-matrix by explicit row and column index lists.
pub fn select(m: &Mat, rows: &[usize], cols: &[usize]) -> Mat {
    Mat::from_fn(rows.len(), cols.len(), |i, j| m[(rows[i], cols[j])])
}

/// Multiply a matrix so that the first entry of the first column with modulus above
/// 1e-8 becomes real and positive.
pub fn fix_phase(m: &Mat) -> Mat {
    for i in 0..m.nrows() {
        let z = m[(i, 0)];
        if z.norm() > 1e-8 {
            return m * (z.conj() / z.norm());
        }
    }
    m.clone()
}

/// Index bookkeeping for operators acting on a subset of tensor factors.
///
/// Factor 0 is the most significant digit of the global index.
#[derive(Clone, Debug)]
pub struct FactorSplit {
    pub sub_dim: usize,
    pub rest_dim: usize,
    /// `table[r * sub_dim + a]` is the global index with sub-index `a` and rest-index `r`.
    table: Vec<usize>,
    /// Inverse of `table`: global index to `(rest, sub)`.
    split: Vec<(usize, usize)>,
}

impl FactorSplit {
    pub fn new(dims: &[usize], positions: &[usize]) -> Self {
        let total: usize = dims.iter().product();
        let sub_dim: usize = positions.iter().map(|&p| dims[p]).product();
        let rest_dim = total / sub_dim.max(1);
        let rest: Vec<usize> = (0..dims.len()).filter(|p| !positions.contains(p)).collect();
        let mut table = vec![0usize; total];
        let mut split = vec![(0usize, 0usize); total];
        let mut digits = vec![0usize; dims.len()];
        for g in 0..total {
            let mut rem = g;
            for k in (0..dims.len()).rev() {
                digits[k] = rem % dims[k];
                rem /= dims[k];
            }
            let a = positions
                .iter()
                .fold(0, |acc, &p| acc * dims[p] + digits[p]);
            let r = rest.iter().fold(0, |acc, &p| acc * dims[p] + digits[p]);
            table[r * sub_dim + a] = g;
            split[g] = (r, a);
        }
        FactorSplit {
            sub_dim,
            rest_dim,
            table,
            split,
        }
    }

    #[inline]
    pub fn parts(&self, global: usize) -> (usize, usize) {
        self.split[global]
    }

    #[inline]
    pub fn global(&self, rest: usize, sub: usize) -> usize {
        self.table[rest * self.sub_dim + sub]
    }
}

/// Matrix product, through faer for large operands.
pub fn matmul(a: &Mat, b: &Mat) -> Mat {
    if a.nrows() * a.ncols() * b.ncols() < 1 << 18 {
        return a * b;
    }
    let fa = faer::Mat::<C64>::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)]);
    let fb = faer::Mat::<C64>::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)]);
    let fc = &fa * &fb;
    Mat::from_fn(a.nrows(), b.ncols(), |i, j| fc[(i, j)])
}

/// The operator `op` acting on the factors `positions` (in that order), identity elsewhere.
pub fn embed(op: &Mat, dims: &[usize], positions: &[usize]) -> Mat {
    let fs = FactorSplit::new(dims, positions);
    assert_eq!(op.nrows(), fs.sub_dim, "embed: operator dimension mismatch");
    let total = fs.sub_dim * fs.rest_dim;
    let mut out = zeros(total, total);
    for r in 0..fs.rest_dim {
        for a in 0..fs.sub_dim {
            let ga = fs.global(r, a);
            for b in 0..fs.sub_dim {
                let z = op[(a, b)];
                if z != ZERO {
                    out[(ga, fs.global(r, b))] = z;
                }
            }
        }
    }
    out
}

/// Normalized partial trace keeping the factors `positions` (in that order).
pub fn reduce(op: &Mat, dims: &[usize], positions: &[usize]) -> Mat {
    let fs = FactorSplit::new(dims, positions);
    let mut out = zeros(fs.sub_dim, fs.sub_dim);
    for r in 0..fs.rest_dim {
        for a in 0..fs.sub_dim {
            let ga = fs.global(r, a);
            for b in 0..fs.sub_dim {
                out[(a, b)] += op[(ga, fs.global(r, b))];
            }
        }
    }
    out / C64::new(fs.rest_dim as f64, 0.0)
}

/// Reduction onto `positions` together with the Frobenius distance between `op` and
/// the re-embedded reduction.
pub fn reduce_with_residual(op: &Mat, dims: &[usize], positions: &[usize]) -> (Mat, f64) {
    let red = reduce(op, dims, positions);
    let fs = FactorSplit::new(dims, positions);
    let n = op.nrows();
    let mut acc = 0.0;
    for j in 0..n {
        let (rj, bj) = fs.parts(j);
        for i in 0..n {
            let (ri, ai) = fs.parts(i);
            let z = if ri == rj {
                op[(i, j)] - red[(ai, bj)]
            } else {
                op[(i, j)]
            };
            acc += z.norm_sqr();
        }
    }
    (red, acc.sqrt())
}

/// Reorders tensor factors: factor `perm[k]` of the input becomes factor `k` of the output.
pub fn permute_factors(op: &Mat, dims: &[usize], perm: &[usize]) -> Mat {
    let fs = FactorSplit::new(dims, perm);
    let n = fs.sub_dim;
    Mat::from_fn(n, n, |a, b| op[(fs.global(0, a), fs.global(0, b))])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn large_matmul_matches_naive() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = random_unitary(80, &mut rng);
        let b = random_unitary(80, &mut rng);
        assert!(dist(&matmul(&a, &b), &(&a * &b)) < 1e-12);
    }

    #[test]
    fn svd_of_rank_one_complex_block() {
        let m = Mat::from_column_slice(
            2,
            2,
            &[
                C64::new(0.25111183970205464, 0.21698892001719627),
                C64::new(-0.0196969332892567, 0.12762824409779497),
                C64::new(-0.07355267447872468, -0.03894975356699381),
                C64::new(-0.0023459771426036016, -0.032300973772639005),
            ],
        );
        let (u, s, v) = svd(&m);
        let rebuilt =
            &u * diag(&s.iter().map(|&x| C64::new(x, 0.0)).collect::<Vec<_>>()) * v.adjoint();
        assert!(dist(&rebuilt, &m) < 1e-14);
        assert!(s[1] < 1e-12);
    }

    #[test]
    fn haar_unitary_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 1..7 {
            assert!(unitarity_residual(&random_unitary(n, &mut rng)) < 1e-12);
        }
    }

    #[test]
    fn principal_log_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for n in 1..7 {
            let u = random_unitary(n, &mut rng);
            let h = principal_log(&u);
            assert!(dist(&h, &h.adjoint()) < 1e-12);
            assert!(dist(&expi(&h, 1.0), &u) < 1e-10);
            assert!(op_norm(&h) <= PI + 1e-12);
        }
    }

    #[test]
    fn log_of_minus_identity_is_pi() {
        let u = eye(3) * C64::new(-1.0, 0.0);
        let h = principal_log(&u);
        assert!(dist(&h, &(eye(3) * C64::new(PI, 0.0))) < 1e-9);
    }

    #[test]
    fn normal_eigen_of_degenerate_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let q = random_unitary(4, &mut rng);
        let d = diag(&[ONE, ONE, IM, -ONE]);
        let u = &q * d * q.adjoint();
        let (vals, v) = normal_eigen(&u);
        assert!(unitarity_residual(&v) < 1e-10);
        let lam = diag(&vals);
        assert!(dist(&(&u * &v), &(&v * lam)) < 1e-10);
    }

    #[test]
    fn embed_and_reduce_are_consistent() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let dims = [2, 3, 2];
        let a = random_gaussian(2, 2, &mut rng);
        let b = random_gaussian(3, 3, &mut rng);
        let c = random_gaussian(2, 2, &mut rng);
        let full = kron_all(&[a.clone(), b.clone(), c.clone()]);
        // a and c act on factors 0 and 2: embedding a ⊗ c at [0, 2] with b = 1
        let ac = kron(&a, &c);
        let e = embed(&ac, &dims, &[0, 2]);
        let expect = kron_all(&[a.clone(), eye(3), c.clone()]);
        assert!(dist(&e, &expect) < 1e-12);
        // reduce of the full product onto factor 1 gives b times normalized traces
        let red = reduce(&full, &dims, &[1]);
        let scale = a.trace() * c.trace() / C64::new(4.0, 0.0);
        assert!(dist(&red, &(&b * scale)) < 1e-12);
        let (r2, res) = reduce_with_residual(&e, &dims, &[2, 0]);
        assert!(res < 1e-12);
        assert!(dist(&r2, &kron(&c, &a)) < 1e-12);
    }

    #[test]
    fn permute_swaps_factors() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = random_gaussian(2, 2, &mut rng);
        let b = random_gaussian(3, 3, &mut rng);
        let p = permute_factors(&kron(&a, &b), &[2, 3], &[1, 0]);
        assert!(dist(&p, &kron(&b, &a)) < 1e-12);
    }
}
