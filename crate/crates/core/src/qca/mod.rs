//! Quantum cellular automata on rings of matrix-algebra cells, in the Heisenberg picture.

mod construct;
mod heisenberg;
mod index;
mod operator;

pub use construct::{
    doubled_implementation_qca, two_layer_implementation_qca, DoubledQca, QcaTwoLayer,
};
pub use index::{
    eta_partial_transpose, half_neighborhood_index, index_overlap, index_overlap_with,
    index_support, index_three_cell, index_three_cell_grouped, no_propagation_certificate,
    Grouping, NoPropagation, OverlapReport, SupportAlgebraReport,
};
pub use operator::{CellInterval, LocalizedOperator, MAX_SUPPORT_DIM};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat, C64};
use num_integer::Integer;
use rand::Rng;
use std::fmt;

/// Ring of N cells, cell x carrying the algebra M_{d(x)}.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TensorCellStructure {
    dims: Vec<usize>,
}

impl TensorCellStructure {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Structure("empty ring".into()));
        }
        if dims.contains(&0) {
            return Err(Error::Structure("cell dimension 0".into()));
        }
        Ok(TensorCellStructure { dims })
    }

    pub fn uniform(cells: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; cells])
    }

    pub fn cells(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, x: usize) -> usize {
        self.dims[x]
    }

    pub fn wrap(&self, x: i64) -> usize {
        x.rem_euclid(self.dims.len() as i64) as usize
    }

    /// Product of all cell dimensions, `None` on overflow.
    pub fn total_dim(&self) -> Option<u128> {
        self.dims
            .iter()
            .try_fold(1u128, |acc, &d| acc.checked_mul(d as u128))
    }

    /// Signed cyclic offset from x to y in (−N/2, N/2].
    pub fn offset(&self, x: usize, y: usize) -> i64 {
        let n = self.cells() as i64;
        let mut o = (y as i64 - x as i64).rem_euclid(n);
        if 2 * o > n {
            o -= n;
        }
        o
    }
}

/// Positive rational p/q in lowest terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct RationalIndex {
    pub num: u64,
    pub den: u64,
}

impl RationalIndex {
    pub fn new(num: u64, den: u64) -> Self {
        assert!(num > 0 && den > 0, "index must be positive");
        let g = num.gcd(&den);
        RationalIndex {
            num: num / g,
            den: den / g,
        }
    }

    pub fn one() -> Self {
        RationalIndex { num: 1, den: 1 }
    }

    pub fn value(&self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn mul(&self, other: &RationalIndex) -> Self {
        RationalIndex::new(self.num * other.num, self.den * other.den)
    }

    pub fn inverse(&self) -> Self {
        RationalIndex {
            num: self.den,
            den: self.num,
        }
    }
}

impl fmt::Display for RationalIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.num, self.den)
    }
}

/// A unitary on consecutive cells (cyclically), factor order as listed.
#[derive(Clone, Debug)]
pub struct Gate {
    pub cells: Vec<usize>,
    pub unitary: Mat,
}

/// One layer of a circuit, in the order it acts on states.
#[derive(Clone, Debug)]
pub enum QcaLayer {
    /// Gates on disjoint runs of cells.
    Partition(Vec<Gate>),
    /// Moves cell contents by `by` sites; in the Heisenberg picture 𝒜_x ↦ 𝒜_{x−by}.
    Shift(i64),
    /// Every cell is a tensor product of factors with dimensions `factors`, and factor
    /// k is shifted by `shifts[k]`.
    FactorShift {
        factors: Vec<usize>,
        shifts: Vec<i64>,
    },
}

impl QcaLayer {
    fn inverse(&self) -> QcaLayer {
        match self {
            QcaLayer::Partition(gates) => QcaLayer::Partition(
                gates
                    .iter()
                    .map(|g| Gate {
                        cells: g.cells.clone(),
                        unitary: g.unitary.adjoint(),
                    })
                    .collect(),
            ),
            QcaLayer::Shift(k) => QcaLayer::Shift(-k),
            QcaLayer::FactorShift { factors, shifts } => QcaLayer::FactorShift {
                factors: factors.clone(),
                shifts: shifts.iter().map(|s| -s).collect(),
            },
        }
    }

    fn map_gates(&self, f: &dyn Fn(&Mat) -> Mat) -> QcaLayer {
        match self {
            QcaLayer::Partition(gates) => QcaLayer::Partition(
                gates
                    .iter()
                    .map(|g| Gate {
                        cells: g.cells.clone(),
                        unitary: f(&g.unitary),
                    })
                    .collect(),
            ),
            other => other.clone(),
        }
    }
}

/// A unitary on the whole ring, given densely.
#[derive(Clone, Debug)]
pub struct DenseUnitary {
    pub band: usize,
    pub matrix: Mat,
}

/// U|c⟩ = phases[c]·|image[c]⟩ on basis configurations, cell 0 most significant.
#[derive(Clone, Debug)]
pub struct MonomialUnitary {
    pub band: usize,
    pub image: Vec<usize>,
    pub phases: Vec<C64>,
}

#[derive(Clone, Debug)]
pub enum QcaRepr {
    Circuit(Vec<QcaLayer>),
    Dense(DenseUnitary),
    Monomial(MonomialUnitary),
}

/// Dense global unitaries are limited to this many cells of at most `DENSE_MAX_DIM`.
pub const DENSE_MAX_CELLS: usize = 8;
pub const DENSE_MAX_DIM: usize = 3;
/// Monomial unitaries are stored as tables of at most this many configurations.
pub const MONOMIAL_MAX_TOTAL: usize = 1 << 20;

/// Automorphism α(A) = U* A U of the ring algebra.
#[derive(Clone, Debug)]
pub struct QcaSystem {
    structure: TensorCellStructure,
    repr: QcaRepr,
}

fn check_gate(s: &TensorCellStructure, g: &Gate, tol: f64) -> Result<()> {
    if g.cells.is_empty() {
        return Err(Error::Structure("gate without cells".into()));
    }
    for w in g.cells.windows(2) {
        if w[1] != s.wrap(w[0] as i64 + 1) {
            return Err(Error::Structure(format!(
                "gate cells {:?} are not consecutive",
                g.cells
            )));
        }
    }
    if g.cells.len() > s.cells() || g.cells.iter().any(|&c| c >= s.cells()) {
        return Err(Error::Structure(format!(
            "gate cells {:?} outside the ring",
            g.cells
        )));
    }
    let d: usize = g.cells.iter().map(|&c| s.dim(c)).product();
    if g.unitary.shape() != (d, d) {
        return Err(Error::Dimension(format!(
            "gate on {:?} has shape {:?}, expected {d}",
            g.cells,
            g.unitary.shape()
        )));
    }
    let res = linalg::unitarity_residual(&g.unitary);
    if res > tol {
        return Err(Error::NotUnitary { residual: res, tol });
    }
    Ok(())
}

fn check_layer(s: &TensorCellStructure, layer: &QcaLayer, tol: f64) -> Result<()> {
    let n = s.cells();
    match layer {
        QcaLayer::Partition(gates) => {
            let mut used = vec![false; n];
            for g in gates {
                check_gate(s, g, tol)?;
                for &c in &g.cells {
                    if used[c] {
                        return Err(Error::Structure(format!(
                            "cell {c} used by two gates of one layer"
                        )));
                    }
                    used[c] = true;
                }
            }
        }
        QcaLayer::Shift(k) => {
            for x in 0..n {
                if s.dim(x) != s.dim(s.wrap(x as i64 - k)) {
                    return Err(Error::Structure(format!(
                        "shift by {k} does not preserve cell dimensions"
                    )));
                }
            }
        }
        QcaLayer::FactorShift { factors, shifts } => {
            if factors.len() != shifts.len() || factors.is_empty() {
                return Err(Error::Structure(
                    "factor shift needs one shift per factor".into(),
                ));
            }
            let d: usize = factors.iter().product();
            if s.dims().iter().any(|&x| x != d) {
                return Err(Error::Structure(format!(
                    "factor shift needs uniform cells of dimension {d}"
                )));
            }
        }
    }
    Ok(())
}

/// Whether U is causal with the given band: every single-cell generator is mapped into
/// [x − band, x + band].
fn check_causal(sys: &QcaSystem, band: usize) -> Result<()> {
    let s = &sys.structure;
    for x in 0..s.cells() {
        for g in operator::cell_generators(s, x) {
            let img = sys.heisenberg(&g)?;
            for c in img.cells(s) {
                if s.offset(x, c).unsigned_abs() as usize > band {
                    return Err(Error::Causality(format!(
                        "image of cell {x} reaches cell {c}, beyond band {band}"
                    )));
                }
            }
        }
    }
    Ok(())
}

impl QcaSystem {
    pub fn circuit(structure: TensorCellStructure, layers: Vec<QcaLayer>) -> Result<Self> {
        for l in &layers {
            check_layer(&structure, l, 1e-10)?;
        }
        Ok(QcaSystem {
            structure,
            repr: QcaRepr::Circuit(layers),
        })
    }

    /// A dense unitary with a declared band; unitarity and causality are checked.
    pub fn dense(structure: TensorCellStructure, band: usize, matrix: Mat) -> Result<Self> {
        if structure.cells() > DENSE_MAX_CELLS
            || structure.dims().iter().any(|&d| d > DENSE_MAX_DIM)
        {
            return Err(Error::Structure(format!(
                "dense unitaries need at most {DENSE_MAX_CELLS} cells of dimension ≤ {DENSE_MAX_DIM}"
            )));
        }
        let total = structure.total_dim().unwrap() as usize;
        if matrix.shape() != (total, total) {
            return Err(Error::Dimension(format!(
                "unitary has shape {:?}, expected {total}",
                matrix.shape()
            )));
        }
        let res = linalg::unitarity_residual(&matrix);
        if res > 1e-10 {
            return Err(Error::NotUnitary {
                residual: res,
                tol: 1e-10,
            });
        }
        let sys = QcaSystem {
            structure,
            repr: QcaRepr::Dense(DenseUnitary { band, matrix }),
        };
        check_causal(&sys, band)?;
        Ok(sys)
    }

    /// A permutation-with-phases unitary with a declared band.
    pub fn monomial(
        structure: TensorCellStructure,
        band: usize,
        image: Vec<usize>,
        phases: Vec<C64>,
    ) -> Result<Self> {
        let total = match structure.total_dim() {
            Some(t) if t <= MONOMIAL_MAX_TOTAL as u128 => t as usize,
            _ => {
                return Err(Error::EnumerationCap {
                    needed: structure.total_dim().unwrap_or(u128::MAX),
                    cap: MONOMIAL_MAX_TOTAL as u128,
                })
            }
        };
        if image.len() != total || phases.len() != total {
            return Err(Error::Dimension(format!(
                "monomial tables must have {total} entries"
            )));
        }
        let mut seen = vec![false; total];
        for &c in &image {
            if c >= total || seen[c] {
                return Err(Error::NotUnitary {
                    residual: 1.0,
                    tol: 0.0,
                });
            }
            seen[c] = true;
        }
        let worst = phases
            .iter()
            .map(|z| (z.norm() - 1.0).abs())
            .fold(0.0, f64::max);
        if worst > 1e-10 {
            return Err(Error::NotUnitary {
                residual: worst,
                tol: 1e-10,
            });
        }
        let sys = QcaSystem {
            structure,
            repr: QcaRepr::Monomial(MonomialUnitary {
                band,
                image,
                phases,
            }),
        };
        check_causal(&sys, band)?;
        Ok(sys)
    }

    pub fn identity(structure: TensorCellStructure) -> Self {
        QcaSystem {
            structure,
            repr: QcaRepr::Circuit(Vec::new()),
        }
    }

    /// σ_d^k: cell contents move by k sites.
    pub fn shift(cells: usize, d: usize, k: i64) -> Result<Self> {
        Self::circuit(
            TensorCellStructure::uniform(cells, d)?,
            vec![QcaLayer::Shift(k)],
        )
    }

    /// Cells ⊗_k ℂ^{factors[k]}, factor k shifted by shifts[k].
    pub fn factor_shift(cells: usize, factors: Vec<usize>, shifts: Vec<i64>) -> Result<Self> {
        let d = factors.iter().product();
        Self::circuit(
            TensorCellStructure::uniform(cells, d)?,
            vec![QcaLayer::FactorShift { factors, shifts }],
        )
    }

    /// Controlled-Z on all neighbouring qubit pairs: σ_x ↦ σ_z ⊗ σ_x ⊗ σ_z, σ_z ↦ σ_z.
    pub fn cluster(cells: usize) -> Result<Self> {
        if !cells.is_multiple_of(2) || cells < 4 {
            return Err(Error::Structure(
                "cluster automaton needs an even ring of at least 4 cells".into(),
            ));
        }
        let cz = linalg::diag(&[linalg::ONE, linalg::ONE, linalg::ONE, -linalg::ONE]);
        let layer = |parity: usize| {
            QcaLayer::Partition(
                (0..cells / 2)
                    .map(|k| Gate {
                        cells: vec![2 * k + parity, (2 * k + parity + 1) % cells],
                        unitary: cz.clone(),
                    })
                    .collect(),
            )
        };
        Self::circuit(
            TensorCellStructure::uniform(cells, 2)?,
            vec![layer(0), layer(1)],
        )
    }

    /// Haar-random gates on pairs {2k, 2k+1}, then on pairs {2k+1, 2k+2}.
    pub fn random_two_layer<R: Rng + ?Sized>(
        structure: TensorCellStructure,
        rng: &mut R,
    ) -> Result<Self> {
        let n = structure.cells();
        if !n.is_multiple_of(2) {
            return Err(Error::Structure(
                "two-layer circuits need an even ring".into(),
            ));
        }
        let layer = |parity: usize, rng: &mut R| {
            QcaLayer::Partition(
                (0..n / 2)
                    .map(|k| {
                        let cells = vec![(2 * k + parity) % n, (2 * k + parity + 1) % n];
                        let d = structure.dim(cells[0]) * structure.dim(cells[1]);
                        Gate {
                            cells,
                            unitary: linalg::random_unitary(d, rng),
                        }
                    })
                    .collect(),
            )
        };
        let a = layer(0, rng);
        let b = layer(1, rng);
        Self::circuit(structure.clone(), vec![a, b])
    }

    /// Haar-random single-cell unitaries.
    pub fn random_onsite<R: Rng + ?Sized>(
        structure: TensorCellStructure,
        rng: &mut R,
    ) -> Result<Self> {
        let gates = (0..structure.cells())
            .map(|x| Gate {
                cells: vec![x],
                unitary: linalg::random_unitary(structure.dim(x), rng),
            })
            .collect();
        Self::circuit(structure, vec![QcaLayer::Partition(gates)])
    }

    /// Diagonal two-cell phases exp(i h(c_x, c_{x+1})) on neighbouring pairs.
    pub fn random_local_phases<R: Rng + ?Sized>(
        structure: TensorCellStructure,
        rng: &mut R,
    ) -> Result<Self> {
        let n = structure.cells();
        if !n.is_multiple_of(2) {
            return Err(Error::Structure("local phases need an even ring".into()));
        }
        let layer = |parity: usize, rng: &mut R| {
            QcaLayer::Partition(
                (0..n / 2)
                    .map(|k| {
                        let cells = vec![(2 * k + parity) % n, (2 * k + parity + 1) % n];
                        let d = structure.dim(cells[0]) * structure.dim(cells[1]);
                        let ph: Vec<C64> = (0..d)
                            .map(|_| C64::from_polar(1.0, rng.gen_range(-3.0..3.0)))
                            .collect();
                        Gate {
                            cells,
                            unitary: linalg::diag(&ph),
                        }
                    })
                    .collect(),
            )
        };
        let a = layer(0, rng);
        let b = layer(1, rng);
        Self::circuit(structure.clone(), vec![a, b])
    }

    pub fn structure(&self) -> &TensorCellStructure {
        &self.structure
    }

    pub fn repr(&self) -> &QcaRepr {
        &self.repr
    }

    pub fn layers(&self) -> Option<&[QcaLayer]> {
        match &self.repr {
            QcaRepr::Circuit(l) => Some(l),
            _ => None,
        }
    }

    /// Declared band for global unitaries; for circuits an a-priori bound from the layers.
    pub fn declared_band(&self) -> usize {
        match &self.repr {
            QcaRepr::Dense(d) => d.band,
            QcaRepr::Monomial(m) => m.band,
            QcaRepr::Circuit(layers) => layers
                .iter()
                .map(|l| match l {
                    QcaLayer::Partition(gates) => {
                        gates.iter().map(|g| g.cells.len() - 1).max().unwrap_or(0)
                    }
                    QcaLayer::Shift(k) => k.unsigned_abs() as usize,
                    QcaLayer::FactorShift { shifts, .. } => shifts
                        .iter()
                        .map(|s| s.unsigned_abs() as usize)
                        .max()
                        .unwrap_or(0),
                })
                .sum(),
        }
    }

    /// Largest cyclic distance from a cell to the support of its image.
    pub fn reach(&self) -> Result<usize> {
        let s = &self.structure;
        let mut r = 0usize;
        for x in 0..s.cells() {
            for g in operator::cell_generators(s, x) {
                let img = self.heisenberg(&g)?;
                for c in img.cells(s) {
                    r = r.max(s.offset(x, c).unsigned_abs() as usize);
                }
            }
        }
        Ok(r)
    }

    /// The inverse automorphism α⁻¹.
    pub fn inverse(&self) -> QcaSystem {
        let repr = match &self.repr {
            QcaRepr::Circuit(layers) => {
                QcaRepr::Circuit(layers.iter().rev().map(|l| l.inverse()).collect())
            }
            QcaRepr::Dense(d) => QcaRepr::Dense(DenseUnitary {
                band: d.band,
                matrix: d.matrix.adjoint(),
            }),
            QcaRepr::Monomial(m) => {
                let mut image = vec![0; m.image.len()];
                let mut phases = vec![linalg::ONE; m.image.len()];
                for (c, &t) in m.image.iter().enumerate() {
                    image[t] = c;
                    phases[t] = m.phases[c].conj();
                }
                QcaRepr::Monomial(MonomialUnitary {
                    band: m.band,
                    image,
                    phases,
                })
            }
        };
        QcaSystem {
            structure: self.structure.clone(),
            repr,
        }
    }

    /// α_self ∘ α_other: the unitary of `self` acts on states first.
    pub fn compose(&self, other: &QcaSystem) -> Result<QcaSystem> {
        if self.structure != other.structure {
            return Err(Error::Structure(
                "composition needs equal cell structures".into(),
            ));
        }
        let s = self.structure.clone();
        match (&self.repr, &other.repr) {
            (QcaRepr::Circuit(a), QcaRepr::Circuit(b)) => Ok(QcaSystem {
                structure: s,
                repr: QcaRepr::Circuit(a.iter().chain(b.iter()).cloned().collect()),
            }),
            (QcaRepr::Monomial(a), QcaRepr::Monomial(b)) => {
                let image = a.image.iter().map(|&t| b.image[t]).collect();
                let phases = a
                    .phases
                    .iter()
                    .zip(a.image.iter())
                    .map(|(p, &t)| p * b.phases[t])
                    .collect();
                Ok(QcaSystem {
                    structure: s,
                    repr: QcaRepr::Monomial(MonomialUnitary {
                        band: a.band + b.band,
                        image,
                        phases,
                    }),
                })
            }
            _ => {
                let u = other.full_unitary()? * self.full_unitary()?;
                let band = self.declared_band() + other.declared_band();
                QcaSystem::dense(s, band.min(self.structure.cells() / 2), u)
            }
        }
    }

    /// α ⊗ α' on the chain with cells 𝒜_x ⊗ 𝒜'_x (factor order: self, then other).
    pub fn tensor(&self, other: &QcaSystem) -> Result<QcaSystem> {
        let (sa, sb) = (&self.structure, &other.structure);
        if sa.cells() != sb.cells() {
            return Err(Error::Structure(
                "tensor product needs rings of equal length".into(),
            ));
        }
        let n = sa.cells();
        let s = TensorCellStructure::new((0..n).map(|x| sa.dim(x) * sb.dim(x)).collect())?;
        let (la, lb) = match (&self.repr, &other.repr) {
            (QcaRepr::Circuit(a), QcaRepr::Circuit(b)) => (a, b),
            _ => {
                return Err(Error::Structure(
                    "tensor products are supported for circuits only".into(),
                ))
            }
        };
        let lift = |layer: &QcaLayer,
                    inner: &TensorCellStructure,
                    outer: &TensorCellStructure,
                    first: bool|
         -> Result<QcaLayer> {
            Ok(match layer {
                QcaLayer::Partition(gates) => QcaLayer::Partition(
                    gates
                        .iter()
                        .map(|g| {
                            // factor list (a_c, b_c) per cell, gate on the a or b factors
                            let mut dims = Vec::new();
                            let mut pos = Vec::new();
                            for (k, &c) in g.cells.iter().enumerate() {
                                let (da, db) = if first {
                                    (inner.dim(c), outer.dim(c))
                                } else {
                                    (outer.dim(c), inner.dim(c))
                                };
                                dims.push(da);
                                dims.push(db);
                                pos.push(2 * k + usize::from(!first));
                            }
                            Gate {
                                cells: g.cells.clone(),
                                unitary: linalg::embed(&g.unitary, &dims, &pos),
                            }
                        })
                        .collect(),
                ),
                QcaLayer::Shift(k) => {
                    let (fa, fb) = (inner.dim(0), outer.dim(0));
                    if first {
                        QcaLayer::FactorShift {
                            factors: vec![fa, fb],
                            shifts: vec![*k, 0],
                        }
                    } else {
                        QcaLayer::FactorShift {
                            factors: vec![fb, fa],
                            shifts: vec![0, *k],
                        }
                    }
                }
                QcaLayer::FactorShift { factors, shifts } => {
                    let other_d = outer.dim(0);
                    let mut f = factors.clone();
                    let mut sh = shifts.clone();
                    if first {
                        f.push(other_d);
                        sh.push(0);
                    } else {
                        f.insert(0, other_d);
                        sh.insert(0, 0);
                    }
                    QcaLayer::FactorShift {
                        factors: f,
                        shifts: sh,
                    }
                }
            })
        };
        let mut layers = Vec::new();
        for l in la {
            layers.push(lift(l, sa, sb, true)?);
        }
        for l in lb {
            layers.push(lift(l, sb, sa, false)?);
        }
        QcaSystem::circuit(s, layers)
    }

    /// Θ α Θ with Θ the cellwise transpose: gates and unitaries are conjugated entrywise.
    pub fn theta_conjugate(&self) -> QcaSystem {
        let repr = match &self.repr {
            QcaRepr::Circuit(layers) => QcaRepr::Circuit(
                layers
                    .iter()
                    .map(|l| l.map_gates(&|m: &Mat| m.map(|z| z.conj())))
                    .collect(),
            ),
            QcaRepr::Dense(d) => QcaRepr::Dense(DenseUnitary {
                band: d.band,
                matrix: d.matrix.map(|z| z.conj()),
            }),
            QcaRepr::Monomial(m) => QcaRepr::Monomial(MonomialUnitary {
                band: m.band,
                image: m.image.clone(),
                phases: m.phases.iter().map(|z| z.conj()).collect(),
            }),
        };
        QcaSystem {
            structure: self.structure.clone(),
            repr,
        }
    }

    /// Every gate G replaced by exp(t log G); shifts are kept. Defined for circuits only.
    pub fn gate_path(&self, t: f64) -> Result<QcaSystem> {
        match &self.repr {
            QcaRepr::Circuit(layers) => Ok(QcaSystem {
                structure: self.structure.clone(),
                repr: QcaRepr::Circuit(
                    layers
                        .iter()
                        .map(|l| l.map_gates(&|m: &Mat| linalg::expi(&linalg::principal_log(m), t)))
                        .collect(),
                ),
            }),
            _ => Err(Error::Structure(
                "gate paths are defined for circuits only".into(),
            )),
        }
    }

    /// The ring unitary as a dense matrix (small rings only).
    pub fn full_unitary(&self) -> Result<Mat> {
        let s = &self.structure;
        let total = match s.total_dim() {
            Some(t) if t <= MAX_SUPPORT_DIM as u128 => t as usize,
            _ => {
                return Err(Error::SupportOverflow(
                    "ring too large for a dense unitary".into(),
                ))
            }
        };
        match &self.repr {
            QcaRepr::Dense(d) => Ok(d.matrix.clone()),
            QcaRepr::Monomial(m) => {
                let mut u = linalg::zeros(total, total);
                for c in 0..total {
                    u[(m.image[c], c)] = m.phases[c];
                }
                Ok(u)
            }
            QcaRepr::Circuit(layers) => {
                let mut u = linalg::eye(total);
                for l in layers {
                    u = heisenberg::layer_matrix(s, l)? * u;
                }
                Ok(u)
            }
        }
    }

    /// α(A) = U* A U.
    pub fn heisenberg(&self, op: &LocalizedOperator) -> Result<LocalizedOperator> {
        heisenberg::apply(self, op)
    }
}
