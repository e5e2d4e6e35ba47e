use super::operator::{CellInterval, LocalizedOperator};
use super::{DenseUnitary, MonomialUnitary, QcaLayer, QcaRepr, QcaSystem, TensorCellStructure};
use crate::error::{Error, Result};
use crate::linalg::{self, FactorSplit, Mat, C64};

pub(super) fn apply(sys: &QcaSystem, op: &LocalizedOperator) -> Result<LocalizedOperator> {
    let s = sys.structure();
    match sys.repr() {
        QcaRepr::Circuit(layers) => {
            // U = L_n ⋯ L_1, so U* A U conjugates by L_n first
            let mut cur = op.clone();
            for layer in layers.iter().rev() {
                cur = conjugate_layer(s, layer, &cur)?;
            }
            cur.strip(s)
        }
        QcaRepr::Dense(d) => dense(s, d, op),
        QcaRepr::Monomial(m) => monomial(s, m, op),
    }
}

fn conjugate_layer(
    s: &TensorCellStructure,
    layer: &QcaLayer,
    op: &LocalizedOperator,
) -> Result<LocalizedOperator> {
    match layer {
        QcaLayer::Partition(gates) => {
            let cells = op.cells(s);
            let touching: Vec<_> = gates
                .iter()
                .filter(|g| g.cells.iter().any(|c| cells.contains(c)))
                .collect();
            if touching.is_empty() {
                return Ok(op.clone());
            }
            let mut all = cells.clone();
            for g in &touching {
                all.extend(g.cells.iter().copied());
            }
            let iv = CellInterval::cover(s, &all)?;
            let dims = iv.dims(s);
            let mut m = op.embed_into(s, &iv)?;
            for g in touching {
                let pos = iv.positions(s, &g.cells)?;
                let u = linalg::embed(&g.unitary, &dims, &pos);
                m = linalg::matmul(&linalg::matmul(&u.adjoint(), &m), &u);
            }
            LocalizedOperator::on(s, iv.start as i64, iv.len, m)?.strip(s)
        }
        QcaLayer::Shift(k) => {
            let iv = op.interval();
            LocalizedOperator::on(s, iv.start as i64 - k, iv.len, op.matrix().clone())
        }
        QcaLayer::FactorShift { factors, shifts } => {
            let f = factors.len();
            let cells = op.cells(s);
            let targets: Vec<usize> = cells
                .iter()
                .flat_map(|&c| shifts.iter().map(move |&sh| (c, sh)))
                .map(|(c, sh)| s.wrap(c as i64 - sh))
                .collect();
            let iv = CellInterval::cover(s, &targets)?;
            iv.hilbert_dim(s)?;
            let cell_pos = iv.positions(s, &targets)?;
            let pos: Vec<usize> = cell_pos
                .iter()
                .enumerate()
                .map(|(j, &p)| p * f + j % f)
                .collect();
            let dims: Vec<usize> = (0..iv.len).flat_map(|_| factors.iter().copied()).collect();
            let m = linalg::embed(op.matrix(), &dims, &pos);
            LocalizedOperator::on(s, iv.start as i64, iv.len, m)?.strip(s)
        }
    }
}

/// The layer as a unitary on the whole ring.
pub(super) fn layer_matrix(s: &TensorCellStructure, layer: &QcaLayer) -> Result<Mat> {
    let full = CellInterval::full(s);
    let total = full.hilbert_dim(s)?;
    let dims = s.dims().to_vec();
    match layer {
        QcaLayer::Partition(gates) => {
            let mut u = linalg::eye(total);
            for g in gates {
                u = linalg::embed(&g.unitary, &dims, &g.cells) * u;
            }
            Ok(u)
        }
        QcaLayer::Shift(k) => {
            // factor at x moves to x + k
            let n = s.cells();
            let dest: Vec<usize> = (0..n).map(|x| s.wrap(x as i64 + k)).collect();
            Ok(slot_permutation(&dims, &dest))
        }
        QcaLayer::FactorShift { factors, shifts } => {
            let f = factors.len();
            let n = s.cells();
            let fdims: Vec<usize> = (0..n).flat_map(|_| factors.iter().copied()).collect();
            let dest: Vec<usize> = (0..n * f)
                .map(|j| s.wrap((j / f) as i64 + shifts[j % f]) * f + j % f)
                .collect();
            Ok(slot_permutation(&fdims, &dest))
        }
    }
}

/// Permutation unitary moving the content of tensor slot j to slot dest[j].
fn slot_permutation(dims: &[usize], dest: &[usize]) -> Mat {
    let total: usize = dims.iter().product();
    let k = dims.len();
    let mut u = linalg::zeros(total, total);
    let mut digits = vec![0usize; k];
    let mut out = vec![0usize; k];
    for g in 0..total {
        let mut rem = g;
        for j in (0..k).rev() {
            digits[j] = rem % dims[j];
            rem /= dims[j];
        }
        for j in 0..k {
            out[dest[j]] = digits[j];
        }
        let h = out.iter().zip(dims).fold(0, |acc, (&d, &n)| acc * n + d);
        u[(h, g)] = linalg::ONE;
    }
    u
}

/// Cells within `band` of the interval, the full ring if they cover it.
fn window(s: &TensorCellStructure, iv: CellInterval, band: usize) -> Result<CellInterval> {
    let len = iv.len + 2 * band;
    if len >= s.cells() {
        Ok(CellInterval::full(s))
    } else {
        CellInterval::new(s, iv.start as i64 - band as i64, len)
    }
}

fn dense(
    s: &TensorCellStructure,
    d: &DenseUnitary,
    op: &LocalizedOperator,
) -> Result<LocalizedOperator> {
    let full = CellInterval::full(s);
    let a = op.embed_into(s, &full)?;
    let b = linalg::matmul(&linalg::matmul(&d.matrix.adjoint(), &a), &d.matrix);
    let w = window(s, op.interval(), d.band)?;
    let (red, res) = linalg::reduce_with_residual(&b, s.dims(), &w.cells(s));
    if res > 1e-9 * linalg::fro(&b).max(1.0) {
        return Err(Error::Causality(format!(
            "image of an operator on {:?} is not supported within band {} (residual {res:.3e})",
            op.interval(),
            d.band
        )));
    }
    LocalizedOperator::on(s, w.start as i64, w.len, red)?.strip(s)
}

fn monomial(
    s: &TensorCellStructure,
    m: &MonomialUnitary,
    op: &LocalizedOperator,
) -> Result<LocalizedOperator> {
    let w = window(s, op.interval(), m.band)?;
    let wdim = w.hilbert_dim(s)?;
    let dims = s.dims();
    let win = FactorSplit::new(dims, &w.cells(s));
    let src = FactorSplit::new(dims, &op.cells(s));
    let a = op.matrix();
    // (U* A U)[c, c'] = conj(ph[c]) ph[c'] A[π(c), π(c')]
    let block = |r: usize, r2: usize| -> Mat {
        Mat::from_fn(wdim, wdim, |i, j| {
            let c = win.global(r, i);
            let c2 = win.global(r2, j);
            let (ra, x) = src.parts(m.image[c]);
            let (rb, y) = src.parts(m.image[c2]);
            if ra != rb {
                return C64::new(0.0, 0.0);
            }
            m.phases[c].conj() * m.phases[c2] * a[(x, y)]
        })
    };
    let b0 = block(0, 0);
    let rest = win.rest_dim;
    if rest > 1 {
        let tol = 1e-9 * linalg::fro(&b0).max(1.0);
        let last = rest - 1;
        let mid = rest / 2;
        for r in [last, mid] {
            if linalg::dist(&block(r, r), &b0) > tol || linalg::fro(&block(0, r)) > tol {
                return Err(Error::Causality(format!(
                    "image of an operator on {:?} is not supported within band {}",
                    op.interval(),
                    m.band
                )));
            }
        }
    }
    LocalizedOperator::on(s, w.start as i64, w.len, b0)?.strip(s)
}
