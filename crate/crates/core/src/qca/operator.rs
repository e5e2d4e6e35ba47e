use super::TensorCellStructure;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat};

/// Largest Hilbert-space dimension of an operator support.
pub const MAX_SUPPORT_DIM: usize = 4096;

/// Run of `len` consecutive cells starting at `start`, cyclically.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellInterval {
    pub start: usize,
    pub len: usize,
}

impl CellInterval {
    pub fn new(s: &TensorCellStructure, start: i64, len: usize) -> Result<Self> {
        let n = s.cells();
        if len == 0 || len > n {
            return Err(Error::Structure(format!(
                "interval of {len} cells on a ring of {n}"
            )));
        }
        let start = if len == n { 0 } else { s.wrap(start) };
        Ok(CellInterval { start, len })
    }

    pub fn full(s: &TensorCellStructure) -> Self {
        CellInterval {
            start: 0,
            len: s.cells(),
        }
    }

    pub fn cells(&self, s: &TensorCellStructure) -> Vec<usize> {
        (0..self.len)
            .map(|k| (self.start + k) % s.cells())
            .collect()
    }

    pub fn is_full(&self, s: &TensorCellStructure) -> bool {
        self.len == s.cells()
    }

    pub fn dims(&self, s: &TensorCellStructure) -> Vec<usize> {
        self.cells(s).iter().map(|&c| s.dim(c)).collect()
    }

    /// Hilbert-space dimension, `SupportOverflow` beyond `MAX_SUPPORT_DIM`.
    pub fn hilbert_dim(&self, s: &TensorCellStructure) -> Result<usize> {
        let mut acc = 1usize;
        for d in self.dims(s) {
            acc = acc.saturating_mul(d);
            if acc > MAX_SUPPORT_DIM {
                return Err(Error::SupportOverflow(format!(
                    "{} cells from {} exceed dimension {MAX_SUPPORT_DIM}",
                    self.len, self.start
                )));
            }
        }
        Ok(acc)
    }

    /// Position of each of `cells` inside this interval.
    pub fn positions(&self, s: &TensorCellStructure, cells: &[usize]) -> Result<Vec<usize>> {
        let n = s.cells();
        cells
            .iter()
            .map(|&c| {
                let k = (c + n - self.start) % n;
                if k < self.len {
                    Ok(k)
                } else {
                    Err(Error::Structure(format!(
                        "cell {c} outside interval {self:?}"
                    )))
                }
            })
            .collect()
    }

    /// Smallest interval containing all `cells`.
    pub fn cover(s: &TensorCellStructure, cells: &[usize]) -> Result<Self> {
        let n = s.cells();
        let mut sorted: Vec<usize> = cells.iter().map(|&c| c % n).collect();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.is_empty() {
            return Err(Error::Structure("cover of no cells".into()));
        }
        // drop the largest gap, the wrap gap wins ties
        let m = sorted.len();
        let mut best_gap = sorted[0] + n - sorted[m - 1];
        let mut best_start = sorted[0];
        for k in 1..m {
            let gap = sorted[k] - sorted[k - 1];
            if gap > best_gap {
                best_gap = gap;
                best_start = sorted[k];
            }
        }
        Self::new(s, best_start as i64, n + 1 - best_gap)
    }
}

/// An operator on a cell interval, factor order as in the interval.
#[derive(Clone, Debug)]
pub struct LocalizedOperator {
    interval: CellInterval,
    matrix: Mat,
}

impl LocalizedOperator {
    /// `matrix` acts on cells start, start+1, …, start+len−1 (in that factor order).
    pub fn new(s: &TensorCellStructure, start: usize, len: usize, matrix: Mat) -> Result<Self> {
        Self::on(s, start as i64, len, matrix)
    }

    pub(crate) fn on(s: &TensorCellStructure, start: i64, len: usize, matrix: Mat) -> Result<Self> {
        let interval = CellInterval::new(s, start, len)?;
        let d = interval.hilbert_dim(s)?;
        if matrix.shape() != (d, d) {
            return Err(Error::Dimension(format!(
                "operator of shape {:?} on {len} cells of dimension {d}",
                matrix.shape()
            )));
        }
        let first = s.wrap(start);
        if interval.start != first {
            // full ring given from another origin: rotate factors so cell 0 comes first
            let dims: Vec<usize> = (0..len).map(|k| s.dim((first + k) % len)).collect();
            let perm: Vec<usize> = (0..len).map(|k| (k + len - first) % len).collect();
            let matrix = linalg::permute_factors(&matrix, &dims, &perm);
            return Ok(LocalizedOperator { interval, matrix });
        }
        Ok(LocalizedOperator { interval, matrix })
    }

    pub fn single(s: &TensorCellStructure, x: usize, matrix: Mat) -> Result<Self> {
        Self::new(s, x, 1, matrix)
    }

    pub fn identity(s: &TensorCellStructure, x: usize) -> Self {
        LocalizedOperator {
            interval: CellInterval { start: x, len: 1 },
            matrix: linalg::eye(s.dim(x)),
        }
    }

    pub fn interval(&self) -> CellInterval {
        self.interval
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn into_matrix(self) -> Mat {
        self.matrix
    }

    pub fn cells(&self, s: &TensorCellStructure) -> Vec<usize> {
        self.interval.cells(s)
    }

    /// The operator as a matrix on `target`, which must contain its interval.
    pub fn embed_into(&self, s: &TensorCellStructure, target: &CellInterval) -> Result<Mat> {
        let pos = target.positions(s, &self.cells(s))?;
        target.hilbert_dim(s)?;
        Ok(linalg::embed(&self.matrix, &target.dims(s), &pos))
    }

    /// Smallest interval containing both supports.
    pub fn joint_cover(
        &self,
        s: &TensorCellStructure,
        other: &LocalizedOperator,
    ) -> Result<CellInterval> {
        let mut cells = self.cells(s);
        cells.extend(other.cells(s));
        CellInterval::cover(s, &cells)
    }

    pub fn mul(
        &self,
        s: &TensorCellStructure,
        other: &LocalizedOperator,
    ) -> Result<LocalizedOperator> {
        let iv = self.joint_cover(s, other)?;
        let m = linalg::matmul(&self.embed_into(s, &iv)?, &other.embed_into(s, &iv)?);
        Ok(LocalizedOperator {
            interval: iv,
            matrix: m,
        })
    }

    pub fn add(
        &self,
        s: &TensorCellStructure,
        other: &LocalizedOperator,
    ) -> Result<LocalizedOperator> {
        let iv = self.joint_cover(s, other)?;
        let m = self.embed_into(s, &iv)? + other.embed_into(s, &iv)?;
        Ok(LocalizedOperator {
            interval: iv,
            matrix: m,
        })
    }

    pub fn adjoint(&self) -> LocalizedOperator {
        LocalizedOperator {
            interval: self.interval,
            matrix: self.matrix.adjoint(),
        }
    }

    /// Drops cells on which the operator acts as the identity.
    pub fn strip(&self, s: &TensorCellStructure) -> Result<LocalizedOperator> {
        let cells = self.cells(s);
        let dims = self.interval.dims(s);
        let tol = 1e-10 * linalg::fro(&self.matrix).max(1.0);
        let all: Vec<usize> = (0..cells.len()).collect();
        let active: Vec<usize> = all
            .iter()
            .copied()
            .filter(|&k| {
                if dims[k] == 1 {
                    return false;
                }
                let others: Vec<usize> = all.iter().copied().filter(|&j| j != k).collect();
                linalg::reduce_with_residual(&self.matrix, &dims, &others).1 > tol
            })
            .collect();
        if active.len() == cells.len() {
            return Ok(self.clone());
        }
        if active.is_empty() {
            let x = self.interval.start;
            let scalar = self.matrix.trace() / linalg::C64::new(self.matrix.nrows() as f64, 0.0);
            return Ok(LocalizedOperator {
                interval: CellInterval { start: x, len: 1 },
                matrix: linalg::eye(s.dim(x)) * scalar,
            });
        }
        let target = if self.interval.is_full(s) {
            let active_cells: Vec<usize> = active.iter().map(|&k| cells[k]).collect();
            CellInterval::cover(s, &active_cells)?
        } else {
            let (a, b) = (active[0], *active.last().unwrap());
            CellInterval {
                start: cells[a],
                len: b - a + 1,
            }
        };
        let pos = self.interval.positions(s, &target.cells(s))?;
        let m = linalg::reduce(&self.matrix, &dims, &pos);
        Ok(LocalizedOperator {
            interval: target,
            matrix: m,
        })
    }

    /// τ-norm distance ‖A − B‖₂/√D on the joint cover.
    pub fn distance(&self, s: &TensorCellStructure, other: &LocalizedOperator) -> Result<f64> {
        let iv = self.joint_cover(s, other)?;
        let a = self.embed_into(s, &iv)?;
        let b = other.embed_into(s, &iv)?;
        Ok(linalg::dist(&a, &b) / (a.nrows() as f64).sqrt())
    }
}

/// The matrix units e_{i,i+1} of cell x, which generate its algebra.
pub(crate) fn cell_generators(s: &TensorCellStructure, x: usize) -> Vec<LocalizedOperator> {
    let d = s.dim(x);
    (0..d.saturating_sub(1))
        .map(|i| LocalizedOperator {
            interval: CellInterval { start: x, len: 1 },
            matrix: linalg::matrix_unit(d, i, i + 1),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn cover_prefers_short_arcs() {
        let s = TensorCellStructure::uniform(8, 2).unwrap();
        assert_eq!(
            CellInterval::cover(&s, &[7, 0, 1]).unwrap(),
            CellInterval { start: 7, len: 3 }
        );
        assert_eq!(
            CellInterval::cover(&s, &[2, 4]).unwrap(),
            CellInterval { start: 2, len: 3 }
        );
        assert_eq!(
            CellInterval::cover(&s, &[0, 4]).unwrap(),
            CellInterval { start: 0, len: 5 }
        );
        assert_eq!(
            CellInterval::cover(&s, &[0, 2, 4, 6]).unwrap(),
            CellInterval { start: 0, len: 7 }
        );
    }

    #[test]
    fn full_ring_is_rotated_to_origin() {
        let s = TensorCellStructure::new(vec![2, 3, 2]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = linalg::random_gaussian(2, 2, &mut rng);
        let b = linalg::random_gaussian(2, 2, &mut rng);
        let c = linalg::random_gaussian(3, 3, &mut rng);
        // cells 2, 0, 1
        let op = LocalizedOperator::new(
            &s,
            2,
            3,
            linalg::kron_all(&[b.clone(), a.clone(), c.clone()]),
        )
        .unwrap();
        assert_eq!(op.interval(), CellInterval { start: 0, len: 3 });
        assert!(linalg::dist(op.matrix(), &linalg::kron_all(&[a, c, b])) < 1e-14);
    }

    #[test]
    fn strip_removes_identity_edges() {
        let s = TensorCellStructure::uniform(6, 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = linalg::random_gaussian(2, 2, &mut rng);
        let m = linalg::kron_all(&[linalg::eye(2), x.clone(), linalg::eye(2)]);
        let op = LocalizedOperator::new(&s, 5, 3, m)
            .unwrap()
            .strip(&s)
            .unwrap();
        assert_eq!(op.interval(), CellInterval { start: 0, len: 1 });
        assert!(linalg::dist(op.matrix(), &x) < 1e-12);
    }

    #[test]
    fn product_lives_on_joint_cover() {
        let s = TensorCellStructure::uniform(6, 2).unwrap();
        let z = linalg::diag(&[linalg::ONE, -linalg::ONE]);
        let a = LocalizedOperator::single(&s, 5, z.clone()).unwrap();
        let b = LocalizedOperator::single(&s, 1, z.clone()).unwrap();
        let p = a.mul(&s, &b).unwrap();
        assert_eq!(p.interval(), CellInterval { start: 5, len: 3 });
        let want = linalg::kron_all(&[z.clone(), linalg::eye(2), z]);
        assert!(linalg::dist(p.matrix(), &want) < 1e-14);
    }

    #[test]
    fn oversized_support_overflows() {
        let s = TensorCellStructure::uniform(20, 2).unwrap();
        assert!(matches!(
            CellInterval::full(&s).hilbert_dim(&s),
            Err(Error::SupportOverflow(_))
        ));
    }
}
