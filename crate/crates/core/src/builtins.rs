//! Named example systems with their known indices.

use crate::classical::ClassicalRule;
use crate::error::{Error, Result};
use crate::io::System;
use crate::linalg::{self, Mat, C64};
use crate::qca::{QcaSystem, RationalIndex, TensorCellStructure};
use crate::walk::{BandedUnitary, PartitionedLayer, SumCellStructure, WalkCircuit, WalkLayer};
use crate::walk_ti::LaurentUnitary;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use std::fmt;

/// Integer index for walks, positive rational for automata.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum IndexValue {
    Integer(i64),
    Rational(RationalIndex),
}

impl fmt::Display for IndexValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            IndexValue::Integer(k) => write!(f, "{k}"),
            IndexValue::Rational(r) => write!(f, "{r}"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct Builtin {
    pub name: &'static str,
    pub summary: &'static str,
    pub system: System,
    pub expected: IndexValue,
}

pub const NAMES: &[&str] = &[
    "hopping-ring-U0",
    "hopping-ring-U1",
    "shift-walk-d1",
    "shift-walk-d2",
    "shift-walk-d3",
    "split-step-walk",
    "layered-walk-circuit",
    "W1-coin",
    "Wm2-coin",
    "constant-coin",
    "random-ti",
    "identity-qca",
    "shift-qca-d2",
    "shift-qca-d3",
    "cluster-qca",
    "factor-shift-qca",
    "two-layer-qca",
    "classical-shift-q2",
    "classical-shift-q3",
    "classical-identity-q3",
    "classical-partitioned",
];

fn hadamard() -> Mat {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Mat::from_row_slice(
        2,
        2,
        &[
            C64::new(h, 0.0),
            C64::new(h, 0.0),
            C64::new(h, 0.0),
            C64::new(-h, 0.0),
        ],
    )
}

fn pauli_x() -> Mat {
    Mat::from_row_slice(
        2,
        2,
        &[linalg::ZERO, linalg::ONE, linalg::ONE, linalg::ZERO],
    )
}

fn walk(u: Result<BandedUnitary>) -> Result<System> {
    u.map(System::Walk)
}

fn build(name: &str) -> Result<Builtin> {
    let int = IndexValue::Integer;
    let rat = |p, q| IndexValue::Rational(RationalIndex::new(p, q));
    let (summary, system, expected) = match name {
        "hopping-ring-U0" => (
            "particle resting on a ring of 8 sites",
            System::Walk(BandedUnitary::identity(SumCellStructure::uniform(8, 1)?)),
            int(0),
        ),
        "hopping-ring-U1" => (
            "particle hopping one site per step, 8 sites",
            walk(BandedUnitary::shift(8, 1, 1))?,
            int(1),
        ),
        "shift-walk-d1" => (
            "shift S on 12 sites, cell dimension 1",
            walk(BandedUnitary::shift(12, 1, 1))?,
            int(1),
        ),
        "shift-walk-d2" => (
            "shift S on 12 sites, cell dimension 2",
            walk(BandedUnitary::shift(12, 2, 1))?,
            int(2),
        ),
        "shift-walk-d3" => (
            "shift S on 8 sites, cell dimension 3",
            walk(BandedUnitary::shift(8, 3, 1))?,
            int(3),
        ),
        "split-step-walk" => {
            // T_down H T_up H with T_up moving component 0 right and T_down moving component 1 left
            let h = hadamard();
            let x = pauli_x();
            let u = LaurentUnitary::from_factors(&x, &[(-1, &x * &h), (1, h.clone())])?;
            (
                "split-step coined walk on 8 sites",
                System::Walk(u.to_ring(8)?),
                int(0),
            )
        }
        "layered-walk-circuit" => {
            let mut rng = ChaCha8Rng::seed_from_u64(11);
            let s = SumCellStructure::uniform(8, 2)?;
            let circuit = WalkCircuit {
                structure: s.clone(),
                layers: vec![
                    WalkLayer::Partition(PartitionedLayer::random_pairs(s.clone(), 0, &mut rng)?),
                    WalkLayer::Partition(PartitionedLayer::random_pairs(s, 1, &mut rng)?),
                    WalkLayer::Shift(1),
                ],
            };
            (
                "two random pair layers followed by S, 8 sites of dimension 2",
                System::WalkCircuit(circuit),
                int(2),
            )
        }
        "W1-coin" => (
            "partial shift Ŵ_1 on ℂ²",
            System::TiWalk(LaurentUnitary::partial_shift(2, 1)),
            int(1),
        ),
        "Wm2-coin" => (
            "partial shift Ŵ_{−2} on ℂ²",
            System::TiWalk(LaurentUnitary::partial_shift(2, -2)),
            int(-2),
        ),
        "constant-coin" => (
            "Hadamard coin without motion",
            System::TiWalk(LaurentUnitary::constant(hadamard())?),
            int(0),
        ),
        "random-ti" => {
            let mut rng = ChaCha8Rng::seed_from_u64(7);
            let mut v = || linalg::random_unitary(3, &mut rng);
            let v0 = v();
            let factors = vec![(1, v()), (2, v()), (-1, v())];
            (
                "Haar coins interleaved with Ŵ_1, Ŵ_2, Ŵ_{−1} on ℂ³",
                System::TiWalk(LaurentUnitary::from_factors(&v0, &factors)?),
                int(2),
            )
        }
        "identity-qca" => (
            "identity on 6 qubits",
            System::Qca(QcaSystem::identity(TensorCellStructure::uniform(6, 2)?)),
            rat(1, 1),
        ),
        "shift-qca-d2" => (
            "shift σ_2 on 6 qubits",
            System::Qca(QcaSystem::shift(6, 2, 1)?),
            rat(2, 1),
        ),
        "shift-qca-d3" => (
            "shift σ_3 on 6 qutrits",
            System::Qca(QcaSystem::shift(6, 3, 1)?),
            rat(3, 1),
        ),
        "cluster-qca" => (
            "controlled-Z on all neighbouring pairs of 6 qubits",
            System::Qca(QcaSystem::cluster(6)?),
            rat(1, 1),
        ),
        "factor-shift-qca" => (
            "σ_2 ⊗ σ_3⁻¹ on 6 cells of dimension 6",
            System::Qca(QcaSystem::factor_shift(6, vec![2, 3], vec![1, -1])?),
            rat(2, 3),
        ),
        "two-layer-qca" => {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            (
                "Haar-random brickwork of two layers on 6 qubits",
                System::Qca(QcaSystem::random_two_layer(
                    TensorCellStructure::uniform(6, 2)?,
                    &mut rng,
                )?),
                rat(1, 1),
            )
        }
        "classical-shift-q2" => (
            "binary shift rule",
            System::Classical(ClassicalRule::shift(2, 1)?),
            rat(2, 1),
        ),
        "classical-shift-q3" => (
            "ternary shift rule",
            System::Classical(ClassicalRule::shift(3, 1)?),
            rat(3, 1),
        ),
        "classical-identity-q3" => (
            "ternary identity rule",
            System::Classical(ClassicalRule::identity(3)?),
            rat(1, 1),
        ),
        "classical-partitioned" => (
            "pairs (a, b) with a moving left and b moving right",
            System::Classical(ClassicalRule::partitioned_swap(2)?),
            rat(1, 1),
        ),
        _ => return Err(Error::Parse(format!("unknown builtin `{name}`"))),
    };
    let name = NAMES.iter().copied().find(|n| *n == name).expect("listed");
    Ok(Builtin {
        name,
        summary,
        system,
        expected,
    })
}

pub fn builtin(name: &str) -> Result<Builtin> {
    build(name)
}

pub fn all() -> Result<Vec<Builtin>> {
    NAMES.iter().map(|n| build(n)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_name_builds() {
        let all = all().unwrap();
        assert!(all.len() >= 14);
        assert!(builtin("no-such-thing").is_err());
    }
}
