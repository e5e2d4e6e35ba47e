use super::index::{support_data, Grouping};
use super::operator::{CellInterval, LocalizedOperator};
use super::{Gate, QcaLayer, QcaSystem, RationalIndex, TensorCellStructure};
use crate::error::{Error, Result};
use crate::linalg;
use crate::operator_algebra::{implementing_unitary, MatrixAlgebra, TensorSplit};

/// α = (second layer) ∘ (first layer) on states, each a partition into block pairs.
#[derive(Clone, Debug)]
pub struct QcaTwoLayer {
    pub grouping: Grouping,
    /// Gates on block pairs (2x−1, 2x).
    pub first: QcaLayer,
    /// Gates on block pairs (2x, 2x+1).
    pub second: QcaLayer,
    /// Largest distance between α and the circuit on single-cell matrix units.
    pub reconstruction_residual: f64,
}

impl QcaTwoLayer {
    pub fn system(&self, structure: TensorCellStructure) -> Result<QcaSystem> {
        QcaSystem::circuit(structure, vec![self.first.clone(), self.second.clone()])
    }
}

/// Largest τ-distance between the images of all single-cell matrix units.
pub(super) fn max_image_distance(a: &QcaSystem, b: &QcaSystem) -> Result<f64> {
    let s = a.structure();
    let mut worst = 0.0f64;
    for x in 0..s.cells() {
        let d = s.dim(x);
        for i in 0..d {
            for j in 0..d {
                let e = LocalizedOperator::single(s, x, linalg::matrix_unit(d, i, j))?;
                worst = worst.max(a.heisenberg(&e)?.distance(s, &b.heisenberg(&e)?)?);
            }
        }
    }
    Ok(worst)
}

/// Writes an index-one automorphism as two layers of gates on block pairs.
///
/// V_x moves ℛ_{2x−1} onto 𝒜_{2x−1} ⊗ 1; the remaining automorphism
/// X ↦ W* α(X) W with W = ⊗V_x preserves every pair (2x, 2x+1) and is implemented
/// there by Y_x. Then α(X) = U* X U with U = (⊗Y_x)(⊗V_x*).
pub fn two_layer_implementation_qca(sys: &QcaSystem) -> Result<QcaTwoLayer> {
    let s = sys.structure();
    let data = support_data(sys)?;
    let gr = data.grouping;
    let k = gr.count;
    let index = RationalIndex::new(data.ranks[0] as u64, data.dims[0] as u64);
    if index != RationalIndex::one() || (0..k).any(|y| data.ranks[y] != data.dims[y]) {
        return Err(Error::WrongIndex {
            found: index.to_string(),
            expected: "1/1".into(),
        });
    }
    // V_x on blocks (2x−1, 2x)
    let mut vs = Vec::with_capacity(k / 2);
    for j in 0..k / 2 {
        let odd = (2 * j + k - 1) % k;
        let target = MatrixAlgebra::factor(
            &TensorSplit::new(vec![data.dims[odd], data.dims[2 * j]]),
            &[0],
        );
        let v = crate::operator_algebra::intertwining_unitary(&data.algebras[odd], &target)?;
        vs.push(v);
    }
    let mut first = Vec::with_capacity(k / 2);
    for (j, v) in vs.iter().enumerate() {
        let cells = gr.interval(s, 2 * j as i64 - 1, 2)?.cells(s);
        first.push(Gate {
            cells,
            unitary: v.adjoint(),
        });
    }
    let mut second = Vec::with_capacity(k / 2);
    for j in 0..k / 2 {
        let e = 2 * j as i64;
        let pair = gr.interval(s, e, 2)?;
        let window = gr.interval(s, e - 1, 4)?;
        let wdims = window.dims(s);
        let g = gr.size;
        let left: Vec<usize> = (0..2 * g).collect();
        let right: Vec<usize> = (2 * g..4 * g).collect();
        let w = linalg::embed(&vs[j], &wdims, &left)
            * linalg::embed(&vs[(j + 1) % (k / 2)], &wdims, &right);
        let middle: Vec<usize> = (g..3 * g).collect();
        let dp = pair.hilbert_dim(s)?;
        let mut images = Vec::with_capacity(dp);
        for i in 0..dp {
            let e_i0 =
                LocalizedOperator::new(s, pair.start, pair.len, linalg::matrix_unit(dp, i, 0))?;
            let y = sys.heisenberg(&e_i0)?.embed_into(s, &window)?;
            let delta = w.adjoint() * y * &w;
            let (red, res) = linalg::reduce_with_residual(&delta, &wdims, &middle);
            if res > 1e-8 {
                return Err(Error::Check(format!(
                    "pair {j} is not preserved after the first layer (residual {res:.3e})"
                )));
            }
            images.push(red);
        }
        second.push(Gate {
            cells: pair.cells(s),
            unitary: implementing_unitary(&images)?,
        });
    }
    let mut out = QcaTwoLayer {
        grouping: gr,
        first: QcaLayer::Partition(first),
        second: QcaLayer::Partition(second),
        reconstruction_residual: 0.0,
    };
    let rebuilt = out.system(s.clone())?;
    out.reconstruction_residual = max_image_distance(sys, &rebuilt)?;
    if out.reconstruction_residual > 1e-9 {
        return Err(Error::Check(format!(
            "two-layer reconstruction residual {:.3e}",
            out.reconstruction_residual
        )));
    }
    Ok(out)
}

/// α ⊗ α⁻¹ realized by commuting unitaries on the doubled ring.
///
/// Copy one of cell x is doubled cell 2x, copy two is 2x+1.
#[derive(Clone, Debug)]
pub struct DoubledQca {
    pub structure: TensorCellStructure,
    /// T_x = (id ⊗ α)(S_x).
    pub t: Vec<LocalizedOperator>,
    /// Swaps S_x of cells 2x and 2x+1.
    pub swaps: Vec<LocalizedOperator>,
    pub commutation_residual: f64,
    /// max ‖β(A ⊗ 1) − 1 ⊗ α(A)‖ over single-cell units.
    pub forward_residual: f64,
    /// max ‖β(1 ⊗ B) − α⁻¹(B) ⊗ 1‖ over single-cell units.
    pub backward_residual: f64,
}

/// An operator of the original ring placed on copy `copy` of the doubled ring.
fn lift(
    s: &TensorCellStructure,
    ds: &TensorCellStructure,
    op: &LocalizedOperator,
    copy: usize,
) -> Result<LocalizedOperator> {
    let cells: Vec<usize> = op.cells(s).iter().map(|&c| 2 * c + copy).collect();
    let iv = CellInterval::cover(ds, &cells)?;
    let m = linalg::embed(op.matrix(), &iv.dims(ds), &iv.positions(ds, &cells)?);
    LocalizedOperator::new(ds, iv.start, iv.len, m)
}

pub fn doubled_implementation_qca(sys: &QcaSystem) -> Result<DoubledQca> {
    let s = sys.structure();
    let n = s.cells();
    let ds = TensorCellStructure::new(s.dims().iter().flat_map(|&d| [d, d]).collect())?;
    let inv = sys.inverse();
    let mut t = Vec::with_capacity(n);
    let mut swaps = Vec::with_capacity(n);
    for x in 0..n {
        let d = s.dim(x);
        let mut images = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                let e = LocalizedOperator::single(s, x, linalg::matrix_unit(d, j, i))?;
                images.push(((i, j), sys.heisenberg(&e)?));
            }
        }
        let mut cover_cells: Vec<usize> = vec![x];
        for (_, y) in &images {
            cover_cells.extend(y.cells(s));
        }
        let iv = CellInterval::cover(s, &cover_cells)?;
        let mut doubled_cells = vec![2 * x];
        doubled_cells.extend(iv.cells(s).iter().map(|&c| 2 * c + 1));
        let div = CellInterval::cover(&ds, &doubled_cells)?;
        let ddims = div.dims(&ds);
        let pos = div.positions(&ds, &doubled_cells)?;
        let dim = div.hilbert_dim(&ds)?;
        let mut tx = linalg::zeros(dim, dim);
        for ((i, j), y) in &images {
            let big = linalg::kron(&linalg::matrix_unit(d, *i, *j), &y.embed_into(s, &iv)?);
            tx += linalg::embed(&big, &ddims, &pos);
        }
        t.push(LocalizedOperator::new(&ds, div.start, div.len, tx)?);
        let mut sw = linalg::zeros(d * d, d * d);
        for i in 0..d {
            for j in 0..d {
                sw[(i * d + j, j * d + i)] = linalg::ONE;
            }
        }
        swaps.push(LocalizedOperator::new(&ds, 2 * x, 2, sw)?);
    }

    let mut commutation_residual = 0.0f64;
    for x in 0..n {
        let cx = t[x].cells(&ds);
        for y in x + 1..n {
            if t[y].cells(&ds).iter().all(|c| !cx.contains(c)) {
                continue;
            }
            let a = t[x].mul(&ds, &t[y])?;
            let b = t[y].mul(&ds, &t[x])?;
            commutation_residual = commutation_residual.max(a.distance(&ds, &b)?);
        }
    }
    if commutation_residual > 1e-10 {
        return Err(Error::Check(format!(
            "T_x fail to commute (residual {commutation_residual:.3e})"
        )));
    }

    let conj = |u: &LocalizedOperator, a: &LocalizedOperator| -> Result<LocalizedOperator> {
        u.adjoint().mul(&ds, a)?.mul(&ds, u)
    };
    let mut forward_residual = 0.0f64;
    let mut backward_residual = 0.0f64;
    for x in 0..n {
        let d = s.dim(x);
        let touching: Vec<&LocalizedOperator> = t
            .iter()
            .filter(|tx| tx.cells(&ds).contains(&(2 * x + 1)))
            .collect();
        for i in 0..d {
            for j in 0..d {
                let e = LocalizedOperator::single(s, x, linalg::matrix_unit(d, i, j))?;
                let a1 = lift(s, &ds, &e, 0)?;
                let got = conj(&t[x], &a1)?;
                let want = lift(s, &ds, &sys.heisenberg(&e)?, 1)?;
                forward_residual = forward_residual.max(got.distance(&ds, &want)?);

                let mut b = lift(s, &ds, &e, 1)?;
                for tx in &touching {
                    b = conj(tx, &b)?;
                }
                let want = lift(s, &ds, &inv.heisenberg(&e)?, 0)?;
                backward_residual = backward_residual.max(b.distance(&ds, &want)?);
            }
        }
    }
    if forward_residual > 1e-9 || backward_residual > 1e-9 {
        return Err(Error::Check(format!(
            "doubled relations fail (forward {forward_residual:.3e}, backward {backward_residual:.3e})"
        )));
    }
    Ok(DoubledQca {
        structure: ds,
        t,
        swaps,
        commutation_residual,
        forward_residual,
        backward_residual,
    })
}
