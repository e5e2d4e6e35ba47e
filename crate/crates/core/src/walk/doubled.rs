use super::{BandedUnitary, SumCellStructure};
use crate::error::Result;
use crate::linalg::{self, Mat};

/// Commuting local unitaries T_x = (U* ⊕ 1) S_x (U ⊕ 1) and swaps S_x on the doubled
/// cells H_x ⊕ H_x, with (Π S_x)(Π T_x) = U ⊕ U*.
#[derive(Clone, Debug)]
pub struct DoubledWalk {
    pub structure: SumCellStructure,
    pub swaps: Vec<Mat>,
    pub locals: Vec<Mat>,
    /// ‖(Π S_x)(Π T_x) − U ⊕ U*‖.
    pub product_residual: f64,
    /// Largest ‖[T_x, T_y]‖.
    pub commutator_residual: f64,
    /// Largest cyclic distance from x at which T_x differs from the identity.
    pub reach: usize,
}

pub fn doubled_implementation(u: &BandedUnitary) -> Result<DoubledWalk> {
    let s = u.structure();
    let m = s.sites();
    let id = BandedUnitary::identity(s.clone());
    let u_plus = u.direct_sum(&id)?;
    let target = u.direct_sum(&u.adjoint())?;
    let ds = u_plus.structure().clone();
    let n = ds.total();
    let swaps: Vec<Mat> = (0..m)
        .map(|x| {
            let mut sw = linalg::eye(n);
            let o = ds.offset(x);
            let d = s.dim(x);
            for i in 0..d {
                sw[(o + i, o + i)] = linalg::ZERO;
                sw[(o + d + i, o + d + i)] = linalg::ZERO;
                sw[(o + i, o + d + i)] = linalg::ONE;
                sw[(o + d + i, o + i)] = linalg::ONE;
            }
            sw
        })
        .collect();
    let up = u_plus.matrix();
    let locals: Vec<Mat> = swaps.iter().map(|sw| up.adjoint() * sw * up).collect();
    let mut prod_s = linalg::eye(n);
    let mut prod_t = linalg::eye(n);
    for x in 0..m {
        prod_s = &prod_s * &swaps[x];
        prod_t = &prod_t * &locals[x];
    }
    let product_residual = linalg::dist(&(prod_s * prod_t), target.matrix());
    let mut commutator_residual = 0.0f64;
    for x in 0..m {
        for y in x + 1..m {
            let c = &locals[x] * &locals[y] - &locals[y] * &locals[x];
            commutator_residual = commutator_residual.max(linalg::fro(&c));
        }
    }
    let mut reach = 0;
    let eye = linalg::eye(n);
    for (x, t) in locals.iter().enumerate() {
        let diff = t - &eye;
        let probe = BandedUnitary::from_parts_unchecked(ds.clone(), m / 2, diff);
        for z in 0..m {
            for w in 0..m {
                if linalg::fro(&probe.block(z, w)) > 1e-12 {
                    reach = reach.max(ds.distance(x, z)).max(ds.distance(x, w));
                }
            }
        }
    }
    Ok(DoubledWalk {
        structure: ds,
        swaps,
        locals,
        product_residual,
        commutator_residual,
        reach,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::random_layered_walk;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn doubled_product_and_commutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let u = random_layered_walk(6, 2, 0, &mut rng).unwrap();
        let dw = doubled_implementation(&u).unwrap();
        assert!(dw.product_residual < 1e-9);
        assert!(dw.commutator_residual < 1e-10);
        assert!(dw.reach <= 2 * u.band());
    }

    #[test]
    fn doubled_shift() {
        let u = BandedUnitary::shift(6, 2, 1).unwrap();
        let dw = doubled_implementation(&u).unwrap();
        assert!(dw.product_residual < 1e-12);
        assert_eq!(dw.reach, 1);
    }
}
