use super::{partial_shift_poly, LaurentUnitary, MatPoly};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, C64};
use std::f64::consts::PI;

/// One elementary step Ŵ_shift(p)·unitary.
#[derive(Clone, Debug)]
pub struct ShiftFactor {
    pub shift: i64,
    pub unitary: Mat,
}

/// Û(p) = V_0 Π_k Ŵ_{m_k}(p) V_k.
#[derive(Clone, Debug)]
pub struct ShiftFactorization {
    pub leading: Mat,
    pub factors: Vec<ShiftFactor>,
    /// Largest ‖Û(p) − product‖ over a 256-point grid.
    pub reconstruction_residual: f64,
}

impl ShiftFactorization {
    pub fn shift_sum(&self) -> i64 {
        self.factors.iter().map(|f| f.shift).sum()
    }

    /// Σ_k |m_k|, a bound for the width of every partial product.
    pub fn max_width(&self) -> usize {
        self.factors
            .iter()
            .map(|f| f.shift.unsigned_abs() as usize)
            .sum()
    }

    pub fn rebuild(&self) -> Result<LaurentUnitary> {
        let fs: Vec<(i64, Mat)> = self
            .factors
            .iter()
            .map(|f| (f.shift, f.unitary.clone()))
            .collect();
        LaurentUnitary::from_factors(&self.leading, &fs)
    }

    pub fn symbol(&self, p: f64) -> Mat {
        let d = self.leading.nrows();
        let mut out = self.leading.clone();
        for f in &self.factors {
            out = out * partial_shift_poly(d, f.shift).eval(p) * &f.unitary;
        }
        out
    }
}

/// Unitary whose first column is the unit vector `v`.
fn complete(v: &nalgebra::DVector<C64>) -> Mat {
    let d = v.len();
    let mut cols: Vec<nalgebra::DVector<C64>> = vec![v.clone()];
    for k in 0..d {
        if cols.len() == d {
            break;
        }
        let mut w = nalgebra::DVector::<C64>::zeros(d);
        w[k] = linalg::ONE;
        for _ in 0..2 {
            for c in &cols {
                let ov = c.dotc(&w);
                w -= c * ov;
            }
        }
        let n = w.norm();
        if n > 1e-6 {
            cols.push(w / C64::new(n, 0.0));
        }
    }
    Mat::from_columns(&cols)
}

const TRIM: f64 = 1e-10;

/// Splits off rank-one partial shifts until the symbol is constant.
pub fn factorize(u: &LaurentUnitary) -> Result<ShiftFactorization> {
    let d = u.d();
    let mut rest = u.to_poly().trimmed(TRIM);
    // each step lowers the rank of an extreme coefficient by one
    let max_steps = 2 * d * (u.width() + 1) + 4;
    let mut frames: Vec<(i64, Mat)> = Vec::new();
    while rest.low != 0 || rest.high() != 0 {
        if frames.len() > max_steps {
            return Err(Error::Factorization(format!(
                "degree reduction stalled after {} steps at degrees [{}, {}]",
                frames.len(),
                rest.low,
                rest.high()
            )));
        }
        let (top, s) = if rest.high() > 0 {
            (rest.coeff(rest.high()), 1)
        } else {
            (rest.coeff(rest.low), -1)
        };
        let v = linalg::svd(&top).0.column(0).into_owned();
        let q = complete(&v);
        // rest ← Q Ŵ_{−s} Q* rest
        let inv = MatPoly::constant(q.clone())
            .mul(&partial_shift_poly(d, -s))
            .mul(&MatPoly::constant(q.adjoint()));
        rest = inv.mul(&rest).trimmed(TRIM);
        frames.push((s, q));
    }
    let tail = rest.coeff(0);
    let res = linalg::unitarity_residual(&tail);
    if res > 1e-8 {
        return Err(Error::NotParaunitary(res));
    }
    // U = Q_1 Ŵ_{s_1} Q_1* Q_2 Ŵ_{s_2} Q_2* ⋯ Q_n Ŵ_{s_n} Q_n* C
    let (leading, mut factors) = if frames.is_empty() {
        (tail, Vec::new())
    } else {
        let n = frames.len();
        let leading = frames[0].1.clone();
        let factors = (0..n)
            .map(|i| {
                let next = if i + 1 < n {
                    frames[i + 1].1.clone()
                } else {
                    tail.clone()
                };
                ShiftFactor {
                    shift: frames[i].0,
                    unitary: frames[i].1.adjoint() * next,
                }
            })
            .collect();
        (leading, factors)
    };
    merge(&mut factors);
    let mut out = ShiftFactorization {
        leading,
        factors,
        reconstruction_residual: 0.0,
    };
    let mut worst = 0.0f64;
    for j in 0..256 {
        let p = 2.0 * PI * j as f64 / 256.0;
        worst = worst.max(linalg::dist(&u.symbol(p), &out.symbol(p)));
    }
    out.reconstruction_residual = worst;
    if worst > 1e-8 {
        return Err(Error::Factorization(format!(
            "reconstruction residual {worst:.3e}"
        )));
    }
    Ok(out)
}

/// Ŵ_a V Ŵ_b = Ŵ_{a+b} V when V does not mix the first basis state with the others.
fn merge(factors: &mut Vec<ShiftFactor>) {
    let mut i = 0;
    while i + 1 < factors.len() {
        if (factors[i].unitary[(0, 0)].norm() - 1.0).abs() < 1e-12 {
            let next = factors.remove(i + 1);
            factors[i].shift += next.shift;
            factors[i].unitary = &factors[i].unitary * next.unitary;
        } else {
            i += 1;
        }
    }
    let mut i = 1;
    while i < factors.len() {
        if factors[i].shift == 0 {
            let f = factors.remove(i);
            factors[i - 1].unitary = &factors[i - 1].unitary * f.unitary;
        } else {
            i += 1;
        }
    }
}

/// Contracts the constant factors of an index-zero walk along their principal logs:
/// t = 0 gives the identity and t = 1 gives `u`.
pub fn ti_path(u: &LaurentUnitary, t: f64) -> Result<LaurentUnitary> {
    let f = factorize(u)?;
    if f.shift_sum() != 0 {
        return Err(Error::WrongIndex {
            found: f.shift_sum().to_string(),
            expected: "0".into(),
        });
    }
    let bend = |v: &Mat| linalg::expi(&linalg::principal_log(v), t);
    let factors: Vec<(i64, Mat)> = f
        .factors
        .iter()
        .map(|x| (x.shift, bend(&x.unitary)))
        .collect();
    LaurentUnitary::from_factors(&bend(&f.leading), &factors)
}
