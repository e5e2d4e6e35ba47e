//! Translation-invariant walks: matrix Laurent polynomials unitary on the circle.

mod dispersion;
mod factorize;
mod index;

pub use dispersion::{dispersion, simulate_mean_position, DispersionData};
pub use factorize::{factorize, ti_path, ShiftFactor, ShiftFactorization};
pub use index::{
    determinant_polynomial, index_coefficient, index_coefficient_with, index_determinant,
    index_winding_quadrature, LaurentScalar,
};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, C64};
use crate::walk::{BandedUnitary, SumCellStructure};
use rand::Rng;

/// Matrix Laurent polynomial Σ_x C_x z^x with x from `low`.
#[derive(Clone, Debug)]
pub(crate) struct MatPoly {
    pub d: usize,
    pub low: i64,
    pub coeffs: Vec<Mat>,
}

impl MatPoly {
    pub fn constant(m: Mat) -> Self {
        MatPoly {
            d: m.nrows(),
            low: 0,
            coeffs: vec![m],
        }
    }

    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, x: i64) -> Mat {
        if x < self.low || x > self.high() {
            return linalg::zeros(self.d, self.d);
        }
        self.coeffs[(x - self.low) as usize].clone()
    }

    pub fn mul(&self, other: &MatPoly) -> MatPoly {
        let n = self.coeffs.len() + other.coeffs.len() - 1;
        let mut out = vec![linalg::zeros(self.d, self.d); n];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        MatPoly {
            d: self.d,
            low: self.low + other.low,
            coeffs: out,
        }
        .trimmed(0.0)
    }

    /// Drops leading and trailing coefficients with Frobenius norm ≤ tol.
    pub fn trimmed(mut self, tol: f64) -> MatPoly {
        while self.coeffs.len() > 1 && linalg::fro(self.coeffs.last().unwrap()) <= tol {
            self.coeffs.pop();
        }
        while self.coeffs.len() > 1 && linalg::fro(&self.coeffs[0]) <= tol {
            self.coeffs.remove(0);
            self.low += 1;
        }
        self
    }

    pub fn eval(&self, p: f64) -> Mat {
        let mut out = linalg::zeros(self.d, self.d);
        for (k, c) in self.coeffs.iter().enumerate() {
            out += c * C64::from_polar(1.0, p * (self.low + k as i64) as f64);
        }
        out
    }
}

/// Elementary partial shift Ŵ_m = diag(z^m, 1, …, 1) of size d.
pub(crate) fn partial_shift_poly(d: usize, m: i64) -> MatPoly {
    if m == 0 {
        return MatPoly::constant(linalg::eye(d));
    }
    let mut hi = linalg::zeros(d, d);
    hi[(0, 0)] = linalg::ONE;
    let mut rest = linalg::eye(d);
    rest[(0, 0)] = linalg::ZERO;
    let len = m.unsigned_abs() as usize + 1;
    let mut coeffs = vec![linalg::zeros(d, d); len];
    if m > 0 {
        coeffs[0] = rest;
        coeffs[len - 1] = hi;
        MatPoly { d, low: 0, coeffs }
    } else {
        coeffs[0] = hi;
        coeffs[len - 1] = rest;
        MatPoly { d, low: m, coeffs }
    }
}

/// Translation-invariant walk with coefficients U_x = U_{x0}, x ∈ [−L, L], and symbol
/// Û(p) = Σ_x U_x e^{ipx}.
#[derive(Clone, Debug)]
pub struct LaurentUnitary {
    d: usize,
    width: usize,
    /// Coefficients for x = −L, …, L.
    coeffs: Vec<Mat>,
}

impl LaurentUnitary {
    /// Validates shapes and paraunitarity Σ_x U_x U_{x+k}* = δ_{k0} 1 (tolerance 1e-10).
    pub fn new(d: usize, width: usize, entries: Vec<(i64, Mat)>) -> Result<Self> {
        Self::new_with_tol(d, width, entries, 1e-10)
    }

    pub fn new_with_tol(
        d: usize,
        width: usize,
        entries: Vec<(i64, Mat)>,
        tol: f64,
    ) -> Result<Self> {
        if d == 0 {
            return Err(Error::Structure("zero-dimensional cell".into()));
        }
        let l = width as i64;
        let mut coeffs = vec![linalg::zeros(d, d); 2 * width + 1];
        for (x, m) in entries {
            if x < -l || x > l {
                return Err(Error::Structure(format!(
                    "coefficient at {x} outside width {width}"
                )));
            }
            if m.shape() != (d, d) {
                return Err(Error::Dimension(format!(
                    "coefficient {x} has shape {:?}",
                    m.shape()
                )));
            }
            coeffs[(x + l) as usize] += m;
        }
        let u = LaurentUnitary { d, width, coeffs };
        let res = u.paraunitarity_residual();
        if res > tol {
            return Err(Error::NotParaunitary(res));
        }
        Ok(u)
    }

    pub(crate) fn from_poly(p: &MatPoly, width: usize, tol: f64) -> Result<Self> {
        let entries = (p.low..=p.high()).map(|x| (x, p.coeff(x))).collect();
        Self::new_with_tol(p.d, width, entries, tol)
    }

    pub(crate) fn to_poly(&self) -> MatPoly {
        MatPoly {
            d: self.d,
            low: -(self.width as i64),
            coeffs: self.coeffs.clone(),
        }
        .trimmed(0.0)
    }

    /// The shift S_d: U_1 = 1.
    pub fn shift(d: usize) -> Self {
        let mut u = LaurentUnitary {
            d,
            width: 1,
            coeffs: vec![linalg::zeros(d, d); 3],
        };
        u.coeffs[2] = linalg::eye(d);
        u
    }

    /// Ŵ_m = diag(e^{imp}, 1, …, 1).
    pub fn partial_shift(d: usize, m: i64) -> Self {
        let p = partial_shift_poly(d, m);
        Self::from_poly(&p, m.unsigned_abs() as usize, 1e-12).expect("partial shift is paraunitary")
    }

    /// A constant coin.
    pub fn constant(v: Mat) -> Result<Self> {
        let d = v.nrows();
        Self::new(d, 0, vec![(0, v)])
    }

    /// V_0 Π_k Ŵ_{m_k} V_k.
    pub fn from_factors(v0: &Mat, factors: &[(i64, Mat)]) -> Result<Self> {
        let d = v0.nrows();
        let mut p = MatPoly::constant(v0.clone());
        for (m, v) in factors {
            p = p
                .mul(&partial_shift_poly(d, *m))
                .mul(&MatPoly::constant(v.clone()));
        }
        let p = p.trimmed(1e-13);
        let width = p.low.unsigned_abs().max(p.high().unsigned_abs()) as usize;
        Self::from_poly(&p, width, 1e-9)
    }

    /// Random walk built from Haar constants and Ŵ_m factors with positive powers
    /// summing to at most `max_width` and negative powers likewise.
    pub fn random_factored<R: Rng + ?Sized>(
        d: usize,
        max_width: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let mut budget_pos = rng.gen_range(0..=max_width as i64);
        let mut budget_neg = rng.gen_range(0..=max_width as i64);
        let mut factors = Vec::new();
        while budget_pos > 0 || budget_neg > 0 {
            let m = if budget_pos > 0 && (budget_neg == 0 || rng.gen_bool(0.5)) {
                let m = rng.gen_range(1..=budget_pos.min(2));
                budget_pos -= m;
                m
            } else {
                let m = rng.gen_range(1..=budget_neg.min(2));
                budget_neg -= m;
                -m
            };
            factors.push((m, linalg::random_unitary(d, rng)));
        }
        Self::from_factors(&linalg::random_unitary(d, rng), &factors)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// U_x; zero outside [−L, L].
    pub fn coeff(&self, x: i64) -> Mat {
        let l = self.width as i64;
        if x < -l || x > l {
            return linalg::zeros(self.d, self.d);
        }
        self.coeffs[(x + l) as usize].clone()
    }

    /// (x, U_x) for x = −L..=L.
    pub fn coefficients(&self) -> Vec<(i64, Mat)> {
        let l = self.width as i64;
        (-l..=l).map(|x| (x, self.coeff(x))).collect()
    }

    /// Smallest width holding all coefficients above `tol`.
    pub fn degree(&self, tol: f64) -> usize {
        self.coefficients()
            .iter()
            .filter(|(_, m)| linalg::fro(m) > tol)
            .map(|(x, _)| x.unsigned_abs() as usize)
            .max()
            .unwrap_or(0)
    }

    pub fn symbol(&self, p: f64) -> Mat {
        let mut out = linalg::zeros(self.d, self.d);
        for (x, m) in self.coefficients() {
            out += m * C64::from_polar(1.0, p * x as f64);
        }
        out
    }

    /// dÛ/dp.
    pub fn symbol_derivative(&self, p: f64) -> Mat {
        let mut out = linalg::zeros(self.d, self.d);
        for (x, m) in self.coefficients() {
            out += m * (C64::new(0.0, x as f64) * C64::from_polar(1.0, p * x as f64));
        }
        out
    }

    /// Largest deviation from Σ_x U_x U_{x+k}* = δ_{k0} and Σ_x U_x* U_{x+k} = δ_{k0}.
    pub fn paraunitarity_residual(&self) -> f64 {
        let l = self.width as i64;
        let id = linalg::eye(self.d);
        let mut worst = 0.0f64;
        for k in -2 * l..=2 * l {
            let mut a = linalg::zeros(self.d, self.d);
            let mut b = linalg::zeros(self.d, self.d);
            for x in -l..=l {
                let y = self.coeff(x + k);
                let ux = self.coeff(x);
                a += &ux * y.adjoint();
                b += ux.adjoint() * &y;
            }
            if k == 0 {
                a -= &id;
                b -= &id;
            }
            worst = worst.max(linalg::fro(&a)).max(linalg::fro(&b));
        }
        worst
    }

    /// Product Û_self(p) Û_other(p).
    pub fn compose(&self, other: &LaurentUnitary) -> Result<Self> {
        if self.d != other.d {
            return Err(Error::Dimension(format!(
                "cells {} and {}",
                self.d, other.d
            )));
        }
        let p = self.to_poly().mul(&other.to_poly());
        Self::from_poly(&p, self.width + other.width, 1e-9)
    }

    /// The walk on a ring of M sites with blocks U_{xy} = U_{x−y}.
    pub fn to_ring(&self, sites: usize) -> Result<BandedUnitary> {
        if 2 * self.width >= sites {
            return Err(Error::BandOverflow {
                band: self.width,
                sites,
                detail: "ring too short for the symbol width".into(),
            });
        }
        let s = SumCellStructure::uniform(sites, self.d)?;
        let mut blocks = Vec::new();
        let l = self.width as i64;
        for y in 0..sites as i64 {
            for k in -l..=l {
                blocks.push((s.wrap(y + k), y as usize, self.coeff(k)));
            }
        }
        BandedUnitary::from_blocks(s, self.width, &blocks)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn partial_shift_symbol() {
        let w = LaurentUnitary::partial_shift(3, -2);
        let p = 0.7;
        let s = w.symbol(p);
        assert!((s[(0, 0)] - C64::from_polar(1.0, -2.0 * p)).norm() < 1e-14);
        assert!((s[(1, 1)] - linalg::ONE).norm() < 1e-14);
    }

    #[test]
    fn rejects_non_paraunitary() {
        let e = linalg::eye(2);
        assert!(matches!(
            LaurentUnitary::new(2, 1, vec![(0, e.clone()), (1, e)]),
            Err(Error::NotParaunitary(_))
        ));
    }

    #[test]
    fn random_factored_is_paraunitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let u = LaurentUnitary::random_factored(3, 4, &mut rng).unwrap();
            assert!(u.width() <= 4);
            assert!(u.paraunitarity_residual() < 1e-9);
            assert!(linalg::unitarity_residual(&u.symbol(1.3)) < 1e-9);
        }
    }

    #[test]
    fn ring_instance_is_unitary() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = LaurentUnitary::random_factored(2, 2, &mut rng).unwrap();
        let r = u.to_ring(9).unwrap();
        assert!(linalg::unitarity_residual(r.matrix()) < 1e-9);
    }
}
