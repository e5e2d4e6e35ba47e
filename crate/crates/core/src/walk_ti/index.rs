use super::LaurentUnitary;
use crate::error::{Error, Result};
use crate::linalg::C64;
use crate::tolerance::Tolerances;
use std::f64::consts::PI;

/// Scalar Laurent polynomial Σ_n c_n z^n, n from `low`.
#[derive(Clone, Debug, PartialEq)]
pub struct LaurentScalar {
    pub low: i64,
    pub coeffs: Vec<C64>,
}

impl LaurentScalar {
    pub fn high(&self) -> i64 {
        self.low + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, n: i64) -> C64 {
        if n < self.low || n > self.high() {
            return C64::new(0.0, 0.0);
        }
        self.coeffs[(n - self.low) as usize]
    }

    /// The single coefficient above `tol`, if there is exactly one.
    pub fn as_monomial(&self, tol: f64) -> Option<(i64, C64)> {
        let mut hit = None;
        for (k, c) in self.coeffs.iter().enumerate() {
            if c.norm() > tol {
                if hit.is_some() {
                    return None;
                }
                hit = Some((self.low + k as i64, *c));
            }
        }
        hit
    }
}

/// Σ_n n·Tr(U_n* U_n).
pub fn index_coefficient(u: &LaurentUnitary) -> Result<i64> {
    index_coefficient_with(u, &Tolerances::default())
}

pub fn index_coefficient_with(u: &LaurentUnitary, tol: &Tolerances) -> Result<i64> {
    let raw: f64 = u
        .coefficients()
        .iter()
        .map(|(n, m)| *n as f64 * m.iter().map(|z| z.norm_sqr()).sum::<f64>())
        .sum();
    let r = raw.round();
    if (raw - r).abs() > tol.integrality {
        return Err(Error::NonInteger {
            value: raw,
            distance: (raw - r).abs(),
        });
    }
    Ok(r as i64)
}

/// det Û(p) as a Laurent polynomial, by evaluation at 2dL + 1 roots of unity and an
/// inverse discrete Fourier transform.
pub fn determinant_polynomial(u: &LaurentUnitary) -> LaurentScalar {
    let span = (u.d() * u.width()) as i64;
    let k = (2 * span + 1) as usize;
    let values: Vec<C64> = (0..k)
        .map(|j| u.symbol(2.0 * PI * j as f64 / k as f64).determinant())
        .collect();
    let coeffs = (-span..=span)
        .map(|n| {
            let mut acc = C64::new(0.0, 0.0);
            for (j, v) in values.iter().enumerate() {
                acc += v * C64::from_polar(1.0, -2.0 * PI * (j as f64) * (n as f64) / k as f64);
            }
            acc / k as f64
        })
        .collect();
    LaurentScalar { low: -span, coeffs }
}

/// det Û(p) = C e^{inp}; returns (n, C).
pub fn index_determinant(u: &LaurentUnitary) -> Result<(i64, C64)> {
    let det = determinant_polynomial(u);
    let (n, c) = det.as_monomial(1e-8).ok_or_else(|| {
        let big: Vec<i64> = (det.low..=det.high())
            .filter(|&n| det.coeff(n).norm() > 1e-8)
            .collect();
        Error::NotMonomial(format!("determinant has nonzero coefficients at {big:?}"))
    })?;
    if (c.norm() - 1.0).abs() > 1e-8 {
        return Err(Error::NotMonomial(format!(
            "leading coefficient has modulus {}",
            c.norm()
        )));
    }
    Ok((n, c))
}

/// Trapezoid rule for (1/2πi)∫ Tr(Û(p)* Û'(p)) dp on `grid` equispaced points.
///
/// The integrand is a trigonometric polynomial of degree at most 2L, so the rule is
/// exact up to rounding once grid > 2L.
pub fn index_winding_quadrature(u: &LaurentUnitary, grid: usize) -> Result<f64> {
    if grid == 0 {
        return Err(Error::Structure("empty quadrature grid".into()));
    }
    let mut acc = C64::new(0.0, 0.0);
    for j in 0..grid {
        let p = 2.0 * PI * j as f64 / grid as f64;
        acc += (u.symbol(p).adjoint() * u.symbol_derivative(p)).trace();
    }
    Ok((acc / C64::new(0.0, grid as f64)).re)
}
