use super::BandedUnitary;
use crate::error::{Error, Result};
use crate::linalg;
use crate::tolerance::Tolerances;

/// Σ_{x ≥ c > y} (Tr U_xy* U_xy − Tr U_yx* U_yx) over the blocks straddling the cut
/// between sites c − 1 and c.
pub fn raw_index(u: &BandedUnitary, cut: usize) -> f64 {
    let s = u.structure();
    let l = u.band() as i64;
    let c = cut as i64;
    let mut acc = 0.0;
    for i in 0..l {
        for j in 0..l - i {
            let x = s.wrap(c + i);
            let y = s.wrap(c - 1 - j);
            let fwd: f64 = u.block(x, y).iter().map(|z| z.norm_sqr()).sum();
            let bwd: f64 = u.block(y, x).iter().map(|z| z.norm_sqr()).sum();
            acc += fwd - bwd;
        }
    }
    acc
}

/// Integer index at a cut; errors when the raw sum is farther than 1e-8 from an integer.
pub fn index(u: &BandedUnitary, cut: usize) -> Result<i64> {
    index_with(u, cut, &Tolerances::default())
}

pub fn index_with(u: &BandedUnitary, cut: usize, tol: &Tolerances) -> Result<i64> {
    if cut >= u.sites() {
        return Err(Error::Structure(format!(
            "cut {cut} outside ring of {}",
            u.sites()
        )));
    }
    let raw = raw_index(u, cut);
    let r = raw.round();
    let dist = (raw - r).abs();
    if dist > tol.integrality {
        return Err(Error::NonInteger {
            value: raw,
            distance: dist,
        });
    }
    Ok(r as i64)
}

/// Index evaluated at every cut; errors if two cuts disagree.
pub fn index_all_cuts(u: &BandedUnitary) -> Result<i64> {
    let first = index(u, 0)?;
    for c in 1..u.sites() {
        let v = index(u, c)?;
        if v != first {
            return Err(Error::CutDependent(format!(
                "cut 0 gives {first}, cut {c} gives {v}"
            )));
        }
    }
    Ok(first)
}

/// A run of consecutive sites `start, start + 1, …` (cyclic), `len` sites long.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SiteInterval {
    pub start: usize,
    pub len: usize,
}

impl SiteInterval {
    pub fn new(start: usize, len: usize) -> Self {
        SiteInterval { start, len }
    }
}

/// rank(P_{M∪R} U P_{L∪M}) − dim H_M for three adjacent regions.
///
/// Each region must be at least as wide as the band, and the three together must
/// leave at least a band of sites outside so that no block wraps around the ring.
pub fn index_rank_form(
    u: &BandedUnitary,
    left: SiteInterval,
    middle: SiteInterval,
    right: SiteInterval,
) -> Result<i64> {
    let s = u.structure();
    let m = s.sites();
    let l = u.band();
    if s.wrap((left.start + left.len) as i64) != middle.start
        || s.wrap((middle.start + middle.len) as i64) != right.start
    {
        return Err(Error::Region("regions are not adjacent".into()));
    }
    if left.len < l || middle.len < l || right.len < l {
        return Err(Error::Region(format!(
            "each region must span at least the band {l}"
        )));
    }
    if left.len + middle.len + right.len + l > m {
        return Err(Error::Region("regions plus band exceed the ring".into()));
    }
    let sites = |iv: SiteInterval| -> Vec<usize> {
        (0..iv.len).map(|k| s.wrap((iv.start + k) as i64)).collect()
    };
    let lm: Vec<usize> = sites(left).into_iter().chain(sites(middle)).collect();
    let mr: Vec<usize> = sites(middle).into_iter().chain(sites(right)).collect();
    let rows = s.indices(&mr);
    let cols = s.indices(&lm);
    let block = linalg::select(u.matrix(), &rows, &cols);
    let sv = linalg::singular_values(&block);
    let mut rank = 0i64;
    for &x in sv.iter() {
        if x > 0.5 {
            if (x - 1.0).abs() > 1e-6 {
                return Err(Error::Region(format!(
                    "singular value {x:.6} is neither 0 nor 1"
                )));
            }
            rank += 1;
        } else if x > 1e-6 {
            return Err(Error::Region(format!(
                "singular value {x:.6} is neither 0 nor 1"
            )));
        }
    }
    let dim_m: usize = sites(middle).iter().map(|&x| s.dim(x)).sum();
    Ok(rank - dim_m as i64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::random_layered_walk;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn shift_index_equals_dimension() {
        for d in 1..=4 {
            for m in [8, 12] {
                let s = BandedUnitary::shift(m, d, 1).unwrap();
                assert_eq!(index_all_cuts(&s).unwrap(), d as i64);
                assert_eq!(index_all_cuts(&s.adjoint()).unwrap(), -(d as i64));
            }
        }
    }

    #[test]
    fn identity_has_index_zero() {
        let s = crate::walk::SumCellStructure::new(vec![1, 2, 3, 1, 2]).unwrap();
        assert_eq!(index_all_cuts(&BandedUnitary::identity(s)).unwrap(), 0);
    }

    #[test]
    fn rank_form_of_unit_shift() {
        let s = BandedUnitary::shift(8, 1, 1).unwrap();
        let v = index_rank_form(
            &s,
            SiteInterval::new(0, 1),
            SiteInterval::new(1, 2),
            SiteInterval::new(3, 1),
        )
        .unwrap();
        assert_eq!(v, 1);
    }

    #[test]
    fn non_integer_is_reported() {
        // a generic 3×3 unitary on a ring of three unit cells has band 1 but no
        // integer index
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = crate::walk::SumCellStructure::uniform(3, 1).unwrap();
        let u = BandedUnitary::new(s, 1, linalg::random_unitary(3, &mut rng)).unwrap();
        assert!(matches!(index(&u, 0), Err(Error::NonInteger { .. })));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn random_walks_are_integral_and_cut_independent(seed in 0u64..100_000, k in -2i64..=2, d in 1usize..=3) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_layered_walk(12, d, k, &mut rng).unwrap();
            prop_assert_eq!(index_all_cuts(&u).unwrap(), k * d as i64);
        }

        #[test]
        fn rank_form_agrees(seed in 0u64..100_000, k in -1i64..=1) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let u = random_layered_walk(12, 1, k, &mut rng).unwrap();
            let l = u.band();
            let v = index_rank_form(&u, SiteInterval::new(0, l), SiteInterval::new(l, l), SiteInterval::new(2 * l, l)).unwrap();
            prop_assert_eq!(v, k);
        }
    }
}
