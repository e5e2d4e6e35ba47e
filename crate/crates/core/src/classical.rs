//! Reversible classical cellular automata on a translation-invariant chain.

use crate::error::{Error, Result};
use crate::linalg::{self, C64};
use crate::qca::{index_support, LocalizedOperator, QcaSystem, RationalIndex, TensorCellStructure};
use num_integer::Integer;
use serde::Serialize;
use std::collections::HashSet;

/// Largest number of configurations enumerated by validation and by the Welch count.
pub const ENUMERATION_CAP: u128 = 1 << 24;

/// A local rule f: 𝔸^{2ρ+1} → 𝔸 together with a claimed inverse rule of radius ρ′.
///
/// Tables are indexed by the neighbourhood (c(x−ρ), …, c(x+ρ)) read as a base-q
/// number, leftmost letter most significant.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicalRule {
    q: usize,
    radius: usize,
    table: Vec<usize>,
    inv_radius: usize,
    inv_table: Vec<usize>,
}

fn check_table(q: usize, radius: usize, table: &[usize], what: &str) -> Result<()> {
    let want = (q as u128).checked_pow(2 * radius as u32 + 1);
    if want != Some(table.len() as u128) {
        return Err(Error::Dimension(format!(
            "{what} table has {} entries, expected q^(2·{radius}+1) for q = {q}",
            table.len()
        )));
    }
    if let Some(&bad) = table.iter().find(|&&a| a >= q) {
        return Err(Error::Structure(format!(
            "{what} table contains letter {bad} outside an alphabet of {q}"
        )));
    }
    Ok(())
}

fn digits(mut c: u128, q: usize, len: usize) -> Vec<usize> {
    let mut out = vec![0usize; len];
    for k in (0..len).rev() {
        out[k] = (c % q as u128) as usize;
        c /= q as u128;
    }
    out
}

impl ClassicalRule {
    /// Validates tables and checks reversibility on periodic configurations of every
    /// size up to 3(ρ+ρ′)+3.
    pub fn new(
        q: usize,
        radius: usize,
        table: Vec<usize>,
        inv_radius: usize,
        inv_table: Vec<usize>,
    ) -> Result<Self> {
        let bound = 3 * (radius + inv_radius) + 3;
        Self::new_with_bound(q, radius, table, inv_radius, inv_table, bound)
    }

    pub fn new_with_bound(
        q: usize,
        radius: usize,
        table: Vec<usize>,
        inv_radius: usize,
        inv_table: Vec<usize>,
        bound: usize,
    ) -> Result<Self> {
        if q < 2 {
            return Err(Error::Structure(
                "alphabet needs at least two letters".into(),
            ));
        }
        check_table(q, radius, &table, "forward")?;
        check_table(q, inv_radius, &inv_table, "inverse")?;
        let rule = ClassicalRule {
            q,
            radius,
            table,
            inv_radius,
            inv_table,
        };
        rule.check_reversible(bound)?;
        Ok(rule)
    }

    fn check_reversible(&self, bound: usize) -> Result<()> {
        let mut needed: u128 = 0;
        for n in 1..=bound {
            needed = needed.saturating_add((self.q as u128).saturating_pow(n as u32));
        }
        if needed > ENUMERATION_CAP {
            return Err(Error::EnumerationCap {
                needed,
                cap: ENUMERATION_CAP,
            });
        }
        for n in 1..=bound {
            let total = (self.q as u128).pow(n as u32);
            for code in 0..total {
                let c = digits(code, self.q, n);
                let back = self.apply_inverse(&self.apply(&c));
                if back != c {
                    return Err(Error::NotReversible(format!(
                        "inverse rule fails on the periodic configuration {c:?}"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn identity(q: usize) -> Result<Self> {
        Self::new(q, 0, (0..q).collect(), 0, (0..q).collect())
    }

    /// (φc)(x) = c(x − k): letters move k sites to the right.
    pub fn shift(q: usize, k: i64) -> Result<Self> {
        let r = k.unsigned_abs() as usize;
        let n = q.pow(2 * r as u32 + 1);
        // neighbourhood slot of c(x − k) is r − k
        let pick = |slot: usize| {
            (0..n)
                .map(|code| digits(code as u128, q, 2 * r + 1)[slot])
                .collect::<Vec<_>>()
        };
        let fwd = pick((r as i64 - k) as usize);
        let inv = pick((r as i64 + k) as usize);
        Self::new(q, r, fwd, r, inv)
    }

    /// A bijection of single letters applied at every site.
    pub fn sitewise(perm: Vec<usize>) -> Result<Self> {
        let q = perm.len();
        let mut inv = vec![usize::MAX; q];
        for (a, &b) in perm.iter().enumerate() {
            if b >= q || inv[b] != usize::MAX {
                return Err(Error::NotReversible(format!(
                    "{perm:?} is not a permutation"
                )));
            }
            inv[b] = a;
        }
        Self::new(q, 0, perm, 0, inv)
    }

    /// Letters are pairs (a, b) ∈ [m]², coded a·m + b; a moves left and b moves right:
    /// (φc)(x) = (b_{x−1}, a_{x+1}).
    pub fn partitioned_swap(m: usize) -> Result<Self> {
        let q = m * m;
        let n = q * q * q;
        let fwd: Vec<usize> = (0..n)
            .map(|code| {
                let d = digits(code as u128, q, 3);
                (d[0] % m) * m + d[2] / m
            })
            .collect();
        // the rule is an involution
        Self::new(q, 1, fwd.clone(), 1, fwd)
    }

    pub fn q(&self) -> usize {
        self.q
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn inv_radius(&self) -> usize {
        self.inv_radius
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn inv_table(&self) -> &[usize] {
        &self.inv_table
    }

    pub fn inverse(&self) -> ClassicalRule {
        ClassicalRule {
            q: self.q,
            radius: self.inv_radius,
            table: self.inv_table.clone(),
            inv_radius: self.radius,
            inv_table: self.table.clone(),
        }
    }

    fn eval(table: &[usize], q: usize, radius: usize, c: &[usize], x: i64) -> usize {
        let n = c.len() as i64;
        let mut code = 0usize;
        for k in -(radius as i64)..=radius as i64 {
            code = code * q + c[(x + k).rem_euclid(n) as usize];
        }
        table[code]
    }

    /// One step on a periodic configuration.
    pub fn apply(&self, c: &[usize]) -> Vec<usize> {
        (0..c.len() as i64)
            .map(|x| Self::eval(&self.table, self.q, self.radius, c, x))
            .collect()
    }

    pub fn apply_inverse(&self, c: &[usize]) -> Vec<usize> {
        (0..c.len() as i64)
            .map(|x| Self::eval(&self.inv_table, self.q, self.inv_radius, c, x))
            .collect()
    }

    /// φ_other ∘ φ_self: `self` is applied first.
    pub fn then(&self, other: &ClassicalRule) -> Result<ClassicalRule> {
        if self.q != other.q {
            return Err(Error::Structure("composition needs equal alphabets".into()));
        }
        let q = self.q;
        let compose = |r1: usize, t1: &[usize], r2: usize, t2: &[usize]| -> Vec<usize> {
            let r = r1 + r2;
            let w = 2 * r + 1;
            (0..q.pow(w as u32))
                .map(|code| {
                    let c = digits(code as u128, q, w);
                    // first step on the inner 2·r2 + 1 sites, then the second step at the centre
                    let mid: Vec<usize> = (0..2 * r2 + 1)
                        .map(|j| {
                            let code = c[j..j + 2 * r1 + 1].iter().fold(0, |acc, &a| acc * q + a);
                            t1[code]
                        })
                        .collect();
                    t2[mid.iter().fold(0, |acc, &a| acc * q + a)]
                })
                .collect()
        };
        let fwd = compose(self.radius, &self.table, other.radius, &other.table);
        let inv = compose(
            other.inv_radius,
            &other.inv_table,
            self.inv_radius,
            &self.inv_table,
        );
        ClassicalRule::new(
            q,
            self.radius + other.radius,
            fwd,
            self.inv_radius + other.inv_radius,
            inv,
        )
    }

    /// φ × φ′ on the alphabet 𝔸 × 𝔸′, letter (a, a′) coded a·q′ + a′.
    pub fn product(&self, other: &ClassicalRule) -> Result<ClassicalRule> {
        let (q1, q2) = (self.q, other.q);
        let q = q1 * q2;
        let build = |ra: usize, ta: &[usize], rb: usize, tb: &[usize]| -> Vec<usize> {
            let r = ra.max(rb);
            let w = 2 * r + 1;
            (0..q.pow(w as u32))
                .map(|code| {
                    let c = digits(code as u128, q, w);
                    let ca = c[r - ra..=r + ra]
                        .iter()
                        .fold(0, |acc, &z| acc * q1 + z / q2);
                    let cb = c[r - rb..=r + rb]
                        .iter()
                        .fold(0, |acc, &z| acc * q2 + z % q2);
                    ta[ca] * q2 + tb[cb]
                })
                .collect()
        };
        let fwd = build(self.radius, &self.table, other.radius, &other.table);
        let inv = build(
            self.inv_radius,
            &self.inv_table,
            other.inv_radius,
            &other.inv_table,
        );
        ClassicalRule::new(
            q,
            self.radius.max(other.radius),
            fwd,
            self.inv_radius.max(other.inv_radius),
            inv,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WelchReport {
    pub window: usize,
    pub tuples: u128,
    /// q^{3r}
    pub normalizer: u128,
    pub index: RationalIndex,
}

/// i_W = |R_φ^r| / q^{3r}, counting the tuples (c(0..2r−1), (φc)(−r..r−1)).
pub fn welch_index(rule: &ClassicalRule, r: usize) -> Result<WelchReport> {
    let min = rule.radius.max(rule.inv_radius).max(1);
    if r < min {
        return Err(Error::Region(format!(
            "window r = {r} below max(ρ, ρ′, 1) = {min}"
        )));
    }
    let q = rule.q;
    let rho = rule.radius;
    // window [−r−ρ, 2r−1+ρ]
    let len = 3 * r + 2 * rho;
    let needed = (q as u128).checked_pow(len as u32).unwrap_or(u128::MAX);
    if needed > ENUMERATION_CAP {
        return Err(Error::EnumerationCap {
            needed,
            cap: ENUMERATION_CAP,
        });
    }
    let base = r + rho; // position of site 0 in the window
    let mut seen: HashSet<u128> = HashSet::new();
    let mut c = vec![0usize; len];
    for code in 0..needed {
        let mut rem = code;
        for k in (0..len).rev() {
            c[k] = (rem % q as u128) as usize;
            rem /= q as u128;
        }
        let mut key: u128 = 0;
        for x in 0..2 * r {
            key = key * q as u128 + c[base + x] as u128;
        }
        for x in 0..2 * r {
            // (φc)(x − r) reads window positions base − r + x ± ρ
            let centre = base + x - r;
            let n = c[centre - rho..=centre + rho]
                .iter()
                .fold(0usize, |acc, &a| acc * q + a);
            key = key * q as u128 + rule.table[n] as u128;
        }
        seen.insert(key);
    }
    let tuples = seen.len() as u128;
    let normalizer = (q as u128).pow(3 * r as u32);
    let g = tuples.gcd(&normalizer);
    Ok(WelchReport {
        window: r,
        tuples,
        normalizer,
        index: RationalIndex::new((tuples / g) as u64, (normalizer / g) as u64),
    })
}

/// Whether i_W agrees at r and r + 1.
pub fn welch_stability(rule: &ClassicalRule, r: usize) -> Result<bool> {
    Ok(welch_index(rule, r)?.index == welch_index(rule, r + 1)?.index)
}

/// U_Φ|c⟩ = |Φ(c)⟩ on a ring of n cells, declared with band ρ + ρ′.
pub fn quantize(rule: &ClassicalRule, n: usize) -> Result<QcaSystem> {
    let min = 2 * (rule.radius + rule.inv_radius) + 2;
    if n < min {
        return Err(Error::Region(format!(
            "ring of {n} cells below 2(ρ+ρ′)+2 = {min}"
        )));
    }
    let q = rule.q;
    let total = (q as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if total > crate::qca::MONOMIAL_MAX_TOTAL as u128 {
        return Err(Error::EnumerationCap {
            needed: total,
            cap: crate::qca::MONOMIAL_MAX_TOTAL as u128,
        });
    }
    let total = total as usize;
    let image = (0..total)
        .map(|code| {
            rule.apply(&digits(code as u128, q, n))
                .iter()
                .fold(0usize, |acc, &a| acc * q + a)
        })
        .collect();
    let structure = TensorCellStructure::uniform(n, q)?;
    QcaSystem::monomial(
        structure,
        rule.radius + rule.inv_radius,
        image,
        vec![linalg::ONE; total],
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct GaugeReport {
    pub index_rule: RationalIndex,
    pub index_gauged: RationalIndex,
    pub index_gauged_theta: RationalIndex,
    /// max over cell matrix units of ‖ΘγΘ(e) − γ⁻¹(e)‖ for the diagonal factor γ
    pub theta_residual: f64,
    pub holds: bool,
}

/// Composes the quantized rule with the sitewise diagonal unitaries `phases[x]` and
/// checks that the index and the Θ relation of the diagonal factor are unaffected.
pub fn gauge_invariance_check(
    rule: &ClassicalRule,
    n: usize,
    phases: &[Vec<C64>],
) -> Result<GaugeReport> {
    let q = rule.q;
    if phases.len() != n || phases.iter().any(|p| p.len() != q) {
        return Err(Error::Dimension(format!(
            "need {n} diagonals of length {q}"
        )));
    }
    if let Some(z) = phases
        .iter()
        .flatten()
        .find(|z| (z.norm() - 1.0).abs() > 1e-10)
    {
        return Err(Error::NotUnitary {
            residual: (z.norm() - 1.0).abs(),
            tol: 1e-10,
        });
    }
    let alpha = quantize(rule, n)?;
    let total = q.pow(n as u32);
    let diag: Vec<C64> = (0..total)
        .map(|code| {
            digits(code as u128, q, n)
                .iter()
                .enumerate()
                .map(|(x, &a)| phases[x][a])
                .product()
        })
        .collect();
    let structure = TensorCellStructure::uniform(n, q)?;
    let gamma = QcaSystem::monomial(structure.clone(), 0, (0..total).collect(), diag)?;
    let beta = alpha.compose(&gamma)?;

    let index_rule = index_support(&alpha)?.0;
    let index_gauged = index_support(&beta)?.0;
    let index_gauged_theta = index_support(&beta.theta_conjugate())?.0;

    let theta = gamma.theta_conjugate();
    let inv = gamma.inverse();
    let mut theta_residual = 0.0f64;
    for x in 0..n {
        for i in 0..q {
            for j in 0..q {
                let e = LocalizedOperator::single(&structure, x, linalg::matrix_unit(q, i, j))?;
                let a = theta.heisenberg(&e)?;
                let b = inv.heisenberg(&e)?;
                theta_residual = theta_residual.max(a.distance(&structure, &b)?);
            }
        }
    }
    let holds =
        index_gauged == index_rule && index_gauged_theta == index_rule && theta_residual <= 1e-10;
    Ok(GaugeReport {
        index_rule,
        index_gauged,
        index_gauged_theta,
        theta_residual,
        holds,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    /// Oracle: |R| counted from literal definitions on a long periodic ring.
    fn welch_bruteforce(rule: &ClassicalRule, r: usize) -> RationalIndex {
        let len = 3 * r + 2 * rule.radius();
        let q = rule.q();
        let mut set = HashSet::new();
        for code in 0..(q as u128).pow(len as u32) {
            // embed the window in a ring long enough that wrap-around is invisible
            let mut ring = digits(code, q, len);
            ring.extend(std::iter::repeat_n(0, 2 * rule.radius() + 1));
            let img = rule.apply(&ring);
            let at = |x: i64| (x + (r + rule.radius()) as i64) as usize;
            let mut key = Vec::new();
            for x in 0..2 * r as i64 {
                key.push(ring[at(x)]);
            }
            for x in -(r as i64)..r as i64 {
                key.push(img[at(x)]);
            }
            set.insert(key);
        }
        let norm = (q as u128).pow(3 * r as u32);
        let g = (set.len() as u128).gcd(&norm);
        RationalIndex::new((set.len() as u128 / g) as u64, (norm / g) as u64)
    }

    #[test]
    fn shift_and_identity() {
        assert_eq!(
            welch_index(&ClassicalRule::shift(2, 1).unwrap(), 2)
                .unwrap()
                .index,
            RationalIndex::new(2, 1)
        );
        assert_eq!(
            welch_index(&ClassicalRule::shift(3, 1).unwrap(), 2)
                .unwrap()
                .index,
            RationalIndex::new(3, 1)
        );
        assert_eq!(
            welch_index(&ClassicalRule::shift(2, -1).unwrap(), 2)
                .unwrap()
                .index,
            RationalIndex::new(1, 2)
        );
        assert_eq!(
            welch_index(&ClassicalRule::identity(3).unwrap(), 1)
                .unwrap()
                .index,
            RationalIndex::one()
        );
        let rep = welch_index(&ClassicalRule::shift(2, 1).unwrap(), 2).unwrap();
        assert_eq!((rep.tuples, rep.normalizer), (128, 64));
    }

    #[test]
    fn sitewise_and_partitioned_are_one() {
        let p = ClassicalRule::sitewise(vec![2, 0, 1]).unwrap();
        assert_eq!(welch_index(&p, 1).unwrap().index, RationalIndex::one());
        let sw = ClassicalRule::partitioned_swap(2).unwrap();
        assert_eq!(welch_index(&sw, 2).unwrap().index, RationalIndex::one());
        assert_eq!(welch_bruteforce(&sw, 1), RationalIndex::one());
    }

    #[test]
    fn stability() {
        assert!(welch_stability(&ClassicalRule::shift(2, 1).unwrap(), 2).unwrap());
        assert!(welch_stability(&ClassicalRule::shift(3, 1).unwrap(), 2).unwrap());
        assert!(welch_stability(&ClassicalRule::identity(2).unwrap(), 1).unwrap());
        assert!(welch_stability(&ClassicalRule::partitioned_swap(2).unwrap(), 1).unwrap());
    }

    #[test]
    fn bad_inverse_is_rejected() {
        let err = ClassicalRule::new(2, 0, vec![0, 1], 0, vec![1, 0]).unwrap_err();
        assert!(matches!(err, Error::NotReversible(_)));
        let err = ClassicalRule::new(2, 1, vec![0; 4], 0, vec![0, 1]).unwrap_err();
        assert!(matches!(err, Error::Dimension(_)));
        assert!(matches!(
            welch_index(&ClassicalRule::shift(2, 2).unwrap(), 1),
            Err(Error::Region(_))
        ));
    }

    #[test]
    fn product_multiplies() {
        let a = ClassicalRule::shift(2, 1).unwrap();
        let b = ClassicalRule::shift(2, -1).unwrap();
        let p = a.product(&ClassicalRule::identity(3).unwrap()).unwrap();
        assert_eq!(welch_index(&p, 1).unwrap().index, RationalIndex::new(2, 1));
        let p = a.product(&b).unwrap();
        assert_eq!(welch_index(&p, 1).unwrap().index, RationalIndex::one());
    }

    #[test]
    fn quantized_index_matches_welch() {
        let shift = ClassicalRule::shift(2, 1).unwrap();
        let sys = quantize(&shift, 6).unwrap();
        assert_eq!(index_support(&sys).unwrap().0, RationalIndex::new(2, 1));
        let id = ClassicalRule::identity(2).unwrap();
        assert_eq!(
            index_support(&quantize(&id, 6).unwrap()).unwrap().0,
            RationalIndex::one()
        );
        let sw = ClassicalRule::partitioned_swap(2).unwrap();
        let sys = quantize(&sw, 8).unwrap();
        assert_eq!(
            index_support(&sys).unwrap().0,
            welch_index(&sw, 2).unwrap().index
        );
    }

    #[test]
    fn quantized_shift_is_the_quantum_shift() {
        let sys = quantize(&ClassicalRule::shift(2, 1).unwrap(), 6).unwrap();
        let reference = QcaSystem::shift(6, 2, 1).unwrap();
        assert!(
            linalg::dist(
                &sys.full_unitary().unwrap(),
                &reference.full_unitary().unwrap()
            ) < 1e-14
        );
    }

    #[test]
    fn gauge_phases_do_not_change_the_index() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for rule in [
            ClassicalRule::shift(2, 1).unwrap(),
            ClassicalRule::identity(2).unwrap(),
        ] {
            let phases: Vec<Vec<C64>> = (0..6)
                .map(|_| {
                    (0..2)
                        .map(|_| C64::from_polar(1.0, rng.gen_range(-3.0..3.0)))
                        .collect()
                })
                .collect();
            let rep = gauge_invariance_check(&rule, 6, &phases).unwrap();
            assert!(rep.holds, "{rep:?}");
        }
        let trivial = vec![vec![linalg::ONE; 2]; 6];
        assert!(
            gauge_invariance_check(&ClassicalRule::shift(2, 1).unwrap(), 6, &trivial)
                .unwrap()
                .holds
        );
    }

    fn small_rule(seed: u64) -> ClassicalRule {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut perm: Vec<usize> = (0..4).collect();
        for i in (1..4).rev() {
            perm.swap(i, rng.gen_range(0..=i));
        }
        let k = rng.gen_range(-1i64..=1);
        let base = if rng.gen_bool(0.5) {
            ClassicalRule::partitioned_swap(2).unwrap()
        } else {
            ClassicalRule::shift(4, k).unwrap()
        };
        base.then(&ClassicalRule::sitewise(perm).unwrap()).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn welch_matches_bruteforce_and_permutation_invariant(seed in 0u64..10_000) {
            let rule = small_rule(seed);
            let r = rule.radius().max(rule.inv_radius()).max(1);
            let got = welch_index(&rule, r).unwrap().index;
            prop_assert_eq!(got, welch_bruteforce(&rule, r));
            let perm = ClassicalRule::sitewise(vec![1, 3, 0, 2]).unwrap();
            prop_assert_eq!(welch_index(&rule.then(&perm).unwrap(), r).unwrap().index, got);
            // numerator and denominator divide q
            prop_assert_eq!(4 % got.num, 0);
            prop_assert_eq!(4 % got.den, 0);
        }
    }
}
