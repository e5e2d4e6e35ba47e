//! Finite-dimensional *-subalgebras of matrix algebras in the trace geometry.
//!
//! Algebras are stored by a basis that is orthonormal for ⟨x|y⟩ = τ(x*y), with
//! τ = Tr/D the normalized trace of the ambient M_D.

use crate::error::{Error, Result};
use crate::linalg::{self, fro, hermitian_eigen, range_basis, zeros, Mat, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Tensor factor dimensions of an ambient space, factor 0 most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorSplit {
    pub dims: Vec<usize>,
}

impl TensorSplit {
    pub fn new(dims: Vec<usize>) -> Self {
        TensorSplit { dims }
    }

    pub fn total(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn sub_dim(&self, positions: &[usize]) -> usize {
        positions.iter().map(|&p| self.dims[p]).product()
    }

    pub fn complement(&self, positions: &[usize]) -> Vec<usize> {
        (0..self.dims.len())
            .filter(|p| !positions.contains(p))
            .collect()
    }
}

/// Normalized trace τ(x) = Tr x / D.
pub fn normalized_trace(x: &Mat) -> C64 {
    x.trace() / C64::new(x.nrows() as f64, 0.0)
}

/// Hilbert–Schmidt inner product τ(x* y).
pub fn hs_inner(x: &Mat, y: &Mat) -> C64 {
    let s: C64 = x.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum();
    s / C64::new(x.nrows() as f64, 0.0)
}

/// Growing orthonormal family of vectorized matrices, columns are vec(x)/√D.
#[derive(Clone, Debug)]
struct VecBasis {
    ambient: usize,
    cols: Vec<Vec<C64>>,
    rank_tol: f64,
    /// Lower bound for the reference norm of the rank test.
    floor: f64,
}

impl VecBasis {
    fn new(ambient: usize, rank_tol: f64) -> Self {
        VecBasis {
            ambient,
            cols: Vec::new(),
            rank_tol,
            floor: 0.0,
        }
    }

    fn len(&self) -> usize {
        self.cols.len()
    }

    fn vectorize(&self, x: &Mat) -> Vec<C64> {
        let s = 1.0 / (self.ambient as f64).sqrt();
        x.iter().map(|z| z * s).collect()
    }

    fn project_out(&self, v: &mut [C64]) {
        for b in &self.cols {
            let ip: C64 = b.iter().zip(v.iter()).map(|(x, y)| x.conj() * y).sum();
            if ip.norm_sqr() > 0.0 {
                for (vi, bi) in v.iter_mut().zip(b.iter()) {
                    *vi -= ip * bi;
                }
            }
        }
    }

    /// Adds the component of `x` orthogonal to the family; returns the new unit element.
    fn try_push(&mut self, x: &Mat) -> Option<Mat> {
        let mut v = self.vectorize(x);
        let n0 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n0 == 0.0 {
            return None;
        }
        self.project_out(&mut v);
        self.project_out(&mut v);
        let n1 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if n1 <= self.rank_tol * n0.max(self.floor) {
            return None;
        }
        for z in v.iter_mut() {
            *z /= n1;
        }
        let m = self.devectorize(&v);
        self.cols.push(v);
        Some(m)
    }

    fn devectorize(&self, v: &[C64]) -> Mat {
        let d = self.ambient;
        let s = (d as f64).sqrt();
        Mat::from_iterator(d, d, v.iter().map(|z| z * s))
    }

    fn elements(&self) -> Vec<Mat> {
        self.cols.iter().map(|v| self.devectorize(v)).collect()
    }
}

/// A *-subalgebra of M_D given by a τ-orthonormal basis.
#[derive(Clone, Debug)]
pub struct MatrixAlgebra {
    ambient: usize,
    basis: Vec<Mat>,
}

impl MatrixAlgebra {
    /// The trivial algebra ℂ·1.
    pub fn scalars(ambient: usize) -> Self {
        MatrixAlgebra {
            ambient,
            basis: vec![linalg::eye(ambient)],
        }
    }

    /// All of M_D.
    pub fn full(ambient: usize) -> Self {
        Self::factor(&TensorSplit::new(vec![ambient]), &[0])
    }

    /// The algebra of operators acting on the factors `positions`, identity elsewhere.
    pub fn factor(split: &TensorSplit, positions: &[usize]) -> Self {
        let d = split.sub_dim(positions);
        let scale = C64::new((d as f64).sqrt(), 0.0);
        let mut basis = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let e = linalg::matrix_unit(d, i, j);
                basis.push(linalg::embed(&e, &split.dims, positions) * scale);
            }
        }
        MatrixAlgebra {
            ambient: split.total(),
            basis,
        }
    }

    /// Orthonormalizes a spanning set that is already known to be a *-algebra.
    pub fn from_spanning(elements: &[Mat], ambient: usize) -> Self {
        let mut vb = VecBasis::new(ambient, 1e-9);
        for x in elements {
            vb.try_push(x);
        }
        MatrixAlgebra {
            ambient,
            basis: vb.elements(),
        }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn ambient(&self) -> usize {
        self.ambient
    }

    pub fn basis(&self) -> &[Mat] {
        &self.basis
    }

    /// Frobenius distance (in the τ-norm) from `x` to the algebra.
    pub fn distance(&self, x: &Mat) -> f64 {
        let mut r = x.clone();
        for b in &self.basis {
            r -= b * hs_inner(b, x);
        }
        fro(&r) / (self.ambient as f64).sqrt()
    }

    /// Largest distance from a product of two basis elements to the algebra.
    pub fn closure_residual(&self) -> f64 {
        let mut worst = 0.0f64;
        for a in &self.basis {
            for b in &self.basis {
                worst = worst.max(self.distance(&(a * b)));
            }
            worst = worst.max(self.distance(&a.adjoint()));
        }
        worst
    }

    /// Gram matrix of the stored basis.
    pub fn gram(&self) -> Mat {
        let k = self.dim();
        Mat::from_fn(k, k, |i, j| hs_inner(&self.basis[i], &self.basis[j]))
    }

    /// Whether two algebras coincide as subspaces.
    pub fn same_as(&self, other: &MatrixAlgebra, tol: f64) -> bool {
        self.ambient == other.ambient
            && self.dim() == other.dim()
            && other.basis.iter().all(|b| self.distance(b) <= tol)
    }
}

/// *-algebra generated by `generators` and the identity inside M_ambient.
///
/// Span closure under left multiplication by the generators and their adjoints,
/// stopping once the dimension stabilizes or reaches ambient².
pub fn generate_algebra(generators: &[Mat], ambient: usize) -> Result<MatrixAlgebra> {
    generate_algebra_with(generators, ambient, 1e-9)
}

pub fn generate_algebra_with(
    generators: &[Mat],
    ambient: usize,
    rank_tol: f64,
) -> Result<MatrixAlgebra> {
    for g in generators {
        if g.nrows() != ambient || g.ncols() != ambient {
            return Err(Error::Dimension(format!(
                "generator of shape {:?} in M_{ambient}",
                g.shape()
            )));
        }
    }
    let cap = ambient * ambient;
    let mut mult = VecBasis::new(ambient, rank_tol);
    for g in generators {
        mult.try_push(g);
        mult.try_push(&g.adjoint());
    }
    let multipliers = mult.elements();

    // products of unit elements whose leading parts cancel are rounding noise
    let mut basis = VecBasis::new(ambient, rank_tol);
    basis.floor = 1.0;
    basis.try_push(&linalg::eye(ambient));
    let mut frontier = Vec::new();
    for g in &multipliers {
        if let Some(e) = basis.try_push(g) {
            frontier.push(e);
        }
    }
    while !frontier.is_empty() && basis.len() < cap {
        let mut next = Vec::new();
        for f in &frontier {
            for g in &multipliers {
                if basis.len() >= cap {
                    break;
                }
                if let Some(e) = basis.try_push(&(g * f)) {
                    next.push(e);
                }
            }
        }
        frontier = next;
    }
    Ok(MatrixAlgebra {
        ambient,
        basis: basis.elements(),
    })
}

/// Orthonormal basis of the span of the coefficient matrices of `x` in
/// M(keep) ⊗ M(rest) (the operator Schmidt components on the kept side).
pub fn coefficient_span(x: &Mat, split: &TensorSplit, keep: &[usize]) -> Vec<Mat> {
    let rest = split.complement(keep);
    let mut order = keep.to_vec();
    order.extend_from_slice(&rest);
    let xp = linalg::permute_factors(x, &split.dims, &order);
    let k = split.sub_dim(keep);
    let r = split.sub_dim(&rest);
    // realigned[(a, b), (c, d)] = x[(a c), (b d)]
    let realigned = Mat::from_fn(k * k, r * r, |ab, cd| {
        let (a, b) = (ab / k, ab % k);
        let (c, d) = (cd / r, cd % r);
        xp[(a * r + c, b * r + d)]
    });
    if fro(&realigned) == 0.0 {
        return Vec::new();
    }
    let cols = range_basis(&realigned, 1e-10);
    (0..cols.ncols())
        .map(|j| Mat::from_fn(k, k, |a, b| cols[(a * k + b, j)]))
        .collect()
}

/// Support algebra of the algebra generated by `elements` on the factors `keep`.
pub fn support_algebra(
    elements: &[Mat],
    split: &TensorSplit,
    keep: &[usize],
) -> Result<MatrixAlgebra> {
    let total = split.total();
    let mut gens = Vec::new();
    for x in elements {
        if x.nrows() != total {
            return Err(Error::Dimension(format!(
                "element of size {} in ambient {total}",
                x.nrows()
            )));
        }
        gens.extend(coefficient_span(x, split, keep));
    }
    generate_algebra(&gens, split.sub_dim(keep))
}

/// A complete system of matrix units {e_ij} of size r.
#[derive(Clone, Debug)]
pub struct MatrixUnits {
    pub size: usize,
    /// Column `e_{i0}` for each i; e_00 is a minimal projection.
    pub columns: Vec<Mat>,
}

impl MatrixUnits {
    pub fn unit(&self, i: usize, j: usize) -> Mat {
        &self.columns[i] * self.columns[j].adjoint()
    }
}

fn seeded_coefficients(n: usize, salt: u64) -> Vec<C64> {
    let mut rng =
        ChaCha8Rng::seed_from_u64(0x5eed_0000 ^ salt ^ (n as u64).wrapping_mul(0x9e37_79b9));
    (0..n)
        .map(|_| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
        .collect()
}

/// Matrix units of a full matrix algebra, built from the spectral projections of a
/// generic self-adjoint element.
pub fn matrix_units(a: &MatrixAlgebra) -> Result<MatrixUnits> {
    let d = a.ambient();
    let dim = a.dim();
    let r = (dim as f64).sqrt().round() as usize;
    if r * r != dim {
        return Err(Error::NotFactor(format!("dimension {dim} is not a square")));
    }
    if !d.is_multiple_of(r) {
        return Err(Error::NotFactor(format!(
            "M_{r} cannot sit unitally in M_{d}"
        )));
    }
    if r == 1 {
        return Ok(MatrixUnits {
            size: 1,
            columns: vec![linalg::eye(d)],
        });
    }
    let m = d / r;
    let cs = seeded_coefficients(dim, 1);
    let mut h = zeros(d, d);
    for (b, c) in a.basis().iter().zip(cs.iter()) {
        h += b * *c;
    }
    h = (&h + h.adjoint()) * C64::new(0.5, 0.0);
    let (vals, vecs) = hermitian_eigen(&h);
    let spread = vals.last().unwrap() - vals[0];
    let gap_tol = 1e-7 * spread.max(1.0);
    let mut clusters: Vec<Vec<usize>> = vec![vec![0]];
    for k in 1..d {
        if vals[k] - vals[k - 1] > gap_tol {
            clusters.push(vec![k]);
        } else {
            clusters.last_mut().unwrap().push(k);
        }
    }
    if clusters.len() != r || clusters.iter().any(|c| c.len() != m) {
        return Err(Error::NotFactor(format!(
            "generic element has {} eigenvalue clusters (expected {r} of multiplicity {m})",
            clusters.len()
        )));
    }
    let projections: Vec<Mat> = clusters
        .iter()
        .map(|c| {
            let v = linalg::select(&vecs, &(0..d).collect::<Vec<_>>(), c);
            &v * v.adjoint()
        })
        .collect();
    let cy = seeded_coefficients(dim, 2);
    let mut y = zeros(d, d);
    for (b, c) in a.basis().iter().zip(cy.iter()) {
        y += b * *c;
    }
    let p0 = &projections[0];
    let mut columns = vec![p0.clone()];
    for p in projections.iter().skip(1) {
        let x = p * &y * p0;
        let xx = x.adjoint() * &x;
        let c = xx.trace().re / m as f64;
        if c <= 1e-12 {
            return Err(Error::NotFactor(
                "projection is not connected to the first one".into(),
            ));
        }
        let e = x / C64::new(c.sqrt(), 0.0);
        let res = linalg::dist(&(e.adjoint() * &e), p0).max(linalg::dist(&(&e * e.adjoint()), p));
        if res > 1e-7 {
            return Err(Error::NotFactor(format!("matrix unit residual {res:.2e}")));
        }
        columns.push(e);
    }
    Ok(MatrixUnits { size: r, columns })
}

/// The size r with a ≅ M_r, or `None` if `a` is not a full matrix algebra.
pub fn full_matrix_check(a: &MatrixAlgebra) -> Option<usize> {
    matrix_units(a).ok().map(|u| u.size)
}

/// η(A, B) = √tr(P_A P_B), with P the τ-orthogonal projections onto the algebras.
pub fn overlap_eta(a: &MatrixAlgebra, b: &MatrixAlgebra) -> Result<f64> {
    if a.ambient() != b.ambient() {
        return Err(Error::Dimension(format!(
            "ambients {} and {}",
            a.ambient(),
            b.ambient()
        )));
    }
    let mut s = 0.0;
    for x in a.basis() {
        for y in b.basis() {
            s += hs_inner(x, y).norm_sqr();
        }
    }
    Ok(s.sqrt())
}

/// The algebra u* A u.
pub fn conjugate_algebra(u: &Mat, a: &MatrixAlgebra) -> MatrixAlgebra {
    let ua = u.adjoint();
    MatrixAlgebra {
        ambient: a.ambient(),
        basis: a.basis().iter().map(|x| &ua * x * u).collect(),
    }
}

/// A unitary V with V* A V = B, for full matrix algebras of equal size.
///
/// The phase is fixed by making the first nonzero entry of V's first column real
/// and positive.
pub fn intertwining_unitary(a: &MatrixAlgebra, b: &MatrixAlgebra) -> Result<Mat> {
    if a.ambient() != b.ambient() {
        return Err(Error::Dimension(format!(
            "ambients {} and {}",
            a.ambient(),
            b.ambient()
        )));
    }
    let ua = matrix_units(a)?;
    let ub = matrix_units(b)?;
    if ua.size != ub.size {
        return Err(Error::Dimension(format!("M_{} vs M_{}", ua.size, ub.size)));
    }
    let d = a.ambient();
    let va = product_basis(&ua, d);
    let vb = product_basis(&ub, d);
    let v = linalg::fix_phase(&(va * vb.adjoint()));
    let res = linalg::unitarity_residual(&v);
    if res > 1e-8 {
        return Err(Error::NotUnitary {
            residual: res,
            tol: 1e-8,
        });
    }
    Ok(v)
}

/// Orthonormal basis |i,k⟩ = e_{i0} φ_k, with φ_k spanning the range of e_00.
fn product_basis(u: &MatrixUnits, d: usize) -> Mat {
    let phi = range_basis(&u.columns[0], 1e-6);
    let m = phi.ncols();
    let mut out = zeros(d, d);
    for i in 0..u.size {
        let block = &u.columns[i] * &phi;
        for k in 0..m {
            out.set_column(i * m + k, &block.column(k));
        }
    }
    out
}

/// A unitary V with V* e_{i0} V = images[i] for the standard matrix units of M_D,
/// where `images[i]` is the image of e_{i0} under an automorphism.
pub fn implementing_unitary(images: &[Mat]) -> Result<Mat> {
    let d = images.len();
    if d == 0 {
        return Err(Error::Dimension("no images".into()));
    }
    let (vals, vecs) = hermitian_eigen(&images[0]);
    if (vals[d - 1] - 1.0).abs() > 1e-7 {
        return Err(Error::Check(format!(
            "image of e_00 has top eigenvalue {}",
            vals[d - 1]
        )));
    }
    let w = vecs.column(d - 1).into_owned();
    let mut vadj = zeros(d, d);
    for (i, g) in images.iter().enumerate() {
        vadj.set_column(i, &(g * &w));
    }
    let v = linalg::fix_phase(&vadj.adjoint());
    let res = linalg::unitarity_residual(&v);
    if res > 1e-8 {
        return Err(Error::NotUnitary {
            residual: res,
            tol: 1e-8,
        });
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{dist, eye, kron, random_unitary, ONE};
    use proptest::prelude::*;

    fn pauli() -> (Mat, Mat, Mat) {
        let x = Mat::from_row_slice(2, 2, &[C64::new(0., 0.), ONE, ONE, C64::new(0., 0.)]);
        let y = Mat::from_row_slice(
            2,
            2,
            &[
                C64::new(0., 0.),
                C64::new(0., -1.),
                C64::new(0., 1.),
                C64::new(0., 0.),
            ],
        );
        let z = Mat::from_row_slice(2, 2, &[ONE, C64::new(0., 0.), C64::new(0., 0.), -ONE]);
        (x, y, z)
    }

    #[test]
    fn pauli_generates_m2() {
        let (x, _, z) = pauli();
        let a = generate_algebra(&[x, z], 2).unwrap();
        assert_eq!(a.dim(), 4);
        assert_eq!(full_matrix_check(&a), Some(2));
    }

    #[test]
    fn single_diagonal_generates_abelian() {
        let d = linalg::diag(&[ONE, C64::new(2.0, 0.0), C64::new(3.0, 0.0)]);
        let a = generate_algebra(&[d], 3).unwrap();
        assert_eq!(a.dim(), 3);
        assert_eq!(full_matrix_check(&a), None);
    }

    #[test]
    fn empty_generators_give_scalars() {
        let a = generate_algebra(&[], 4).unwrap();
        assert_eq!(a.dim(), 1);
        assert_eq!(full_matrix_check(&a), Some(1));
    }

    #[test]
    fn support_of_product_operator() {
        let (x, _, z) = pauli();
        let split = TensorSplit::new(vec![2, 2]);
        let a = support_algebra(&[kron(&x, &z)], &split, &[0]).unwrap();
        // generated by X: span{1, X}
        assert_eq!(a.dim(), 2);
        assert!(a.distance(&x) < 1e-12);
    }

    #[test]
    fn support_of_swap_is_full() {
        let mut swap = zeros(4, 4);
        for i in 0..2 {
            for j in 0..2 {
                swap[(i * 2 + j, j * 2 + i)] = ONE;
            }
        }
        let split = TensorSplit::new(vec![2, 2]);
        let a = support_algebra(&[swap], &split, &[0]).unwrap();
        assert_eq!(full_matrix_check(&a), Some(2));
    }

    #[test]
    fn support_of_identity_is_scalars() {
        let split = TensorSplit::new(vec![2, 3]);
        let a = support_algebra(&[eye(6)], &split, &[1]).unwrap();
        assert_eq!(a.dim(), 1);
    }

    #[test]
    fn direct_sum_is_not_a_factor() {
        // M_2 ⊕ ℂ inside M_3
        let mut gens = Vec::new();
        for (i, j) in [(0, 1), (1, 0), (0, 0)] {
            gens.push(linalg::matrix_unit(3, i, j));
        }
        let a = generate_algebra(&gens, 3).unwrap();
        assert_eq!(a.dim(), 5);
        assert_eq!(full_matrix_check(&a), None);
    }

    #[test]
    fn m2_tensor_one_is_m2() {
        let split = TensorSplit::new(vec![2, 3]);
        let a = MatrixAlgebra::factor(&split, &[0]);
        assert_eq!(full_matrix_check(&a), Some(2));
        assert!(dist(&a.gram(), &eye(4)) < 1e-12);
    }

    #[test]
    fn eta_commuting_factors_is_one() {
        let split = TensorSplit::new(vec![2, 3]);
        let a = MatrixAlgebra::factor(&split, &[0]);
        let b = MatrixAlgebra::factor(&split, &[1]);
        assert!((overlap_eta(&a, &b).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eta_of_overlapping_chains() {
        // η(B1B2, B2B3) = dim of the shared factor
        let split = TensorSplit::new(vec![2, 3, 2]);
        let a = MatrixAlgebra::factor(&split, &[0, 1]);
        let b = MatrixAlgebra::factor(&split, &[1, 2]);
        assert!((overlap_eta(&a, &b).unwrap() - 3.0).abs() < 1e-10);
    }

    #[test]
    fn eta_self_is_sqrt_dim() {
        let a = MatrixAlgebra::full(3);
        assert!((overlap_eta(&a, &a).unwrap() - 3.0).abs() < 1e-12);
    }

    #[test]
    fn intertwiner_of_identical_algebras_commutes() {
        let split = TensorSplit::new(vec![2, 2]);
        let a = MatrixAlgebra::factor(&split, &[0]);
        let v = intertwining_unitary(&a, &a).unwrap();
        assert!(conjugate_algebra(&v, &a).same_as(&a, 1e-9));
    }

    #[test]
    fn intertwiner_maps_factor_to_its_image() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let split = TensorSplit::new(vec![2, 2]);
        let a = MatrixAlgebra::factor(&split, &[0]);
        let w = random_unitary(4, &mut rng);
        let b = conjugate_algebra(&w, &a);
        let v = intertwining_unitary(&a, &b).unwrap();
        assert!(conjugate_algebra(&v, &a).same_as(&b, 1e-9));
    }

    #[test]
    fn intertwiner_between_random_conjugates() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let split = TensorSplit::new(vec![2, 3]);
        let base = MatrixAlgebra::factor(&split, &[1]);
        let a = conjugate_algebra(&random_unitary(6, &mut rng), &base);
        let b = conjugate_algebra(&random_unitary(6, &mut rng), &base);
        let v = intertwining_unitary(&a, &b).unwrap();
        assert!(conjugate_algebra(&v, &a).same_as(&b, 1e-8));
    }

    #[test]
    fn implementing_unitary_recovers_conjugation() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let u = random_unitary(3, &mut rng);
        let images: Vec<Mat> = (0..3)
            .map(|i| u.adjoint() * linalg::matrix_unit(3, i, 0) * &u)
            .collect();
        let v = implementing_unitary(&images).unwrap();
        assert!(linalg::dist_up_to_phase(&v, &u) < 1e-9);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn generated_algebra_is_closed(seed in 0u64..10_000, n in 2usize..5) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            // a block-diagonal generator set: M_k ⊕ M_{n-k} up to conjugation
            let k = 1 + (seed as usize % (n - 1));
            let mut g = zeros(n, n);
            for i in 0..k { for j in 0..k { g[(i, j)] = linalg::random_gaussian(1, 1, &mut rng)[(0, 0)]; } }
            for i in k..n { for j in k..n { g[(i, j)] = linalg::random_gaussian(1, 1, &mut rng)[(0, 0)]; } }
            let w = random_unitary(n, &mut rng);
            let g = w.adjoint() * g * &w;
            let a = generate_algebra(&[g], n).unwrap();
            prop_assert!(a.closure_residual() < 1e-9);
            prop_assert!(dist(&a.gram(), &eye(a.dim())) < 1e-10);
            prop_assert!(a.dim() <= k * k + (n - k) * (n - k));
        }

        #[test]
        fn eta_bounds(seed in 0u64..10_000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let split = TensorSplit::new(vec![2, 2]);
            let a = MatrixAlgebra::factor(&split, &[0]);
            let b = conjugate_algebra(&random_unitary(4, &mut rng), &a);
            let eta = overlap_eta(&a, &b).unwrap();
            prop_assert!(eta >= 1.0 - 1e-10);
            prop_assert!(eta <= 2.0 + 1e-10);
            let sym = overlap_eta(&b, &a).unwrap();
            prop_assert!((eta - sym).abs() < 1e-12);
        }
    }
}
