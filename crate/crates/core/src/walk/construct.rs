use super::{index_all_cuts, BandedUnitary, PartitionedLayer, SumCellStructure};
use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigen, Mat};

/// Local unitary V on the 2L sites around a cut such that U·V has no block
/// crossing the cut.
#[derive(Clone, Debug)]
pub struct Decoupler {
    pub cut: usize,
    /// Ring sites c − L, …, c + L − 1.
    pub window: Vec<usize>,
    /// V restricted to the window.
    pub local: Mat,
    /// Largest crossing block norm of U·V.
    pub residual: f64,
}

impl Decoupler {
    /// V as a ring operator, identity outside the window.
    pub fn to_matrix(&self, s: &SumCellStructure) -> Mat {
        let mut m = linalg::eye(s.total());
        let idx = s.indices(&self.window);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                m[(i, j)] = self.local[(a, b)];
            }
        }
        m
    }

    pub fn to_banded(&self, s: &SumCellStructure) -> Result<BandedUnitary> {
        BandedUnitary::new(
            s.clone(),
            self.window.len().saturating_sub(1),
            self.to_matrix(s),
        )
    }
}

fn lifted_dims(s: &SumCellStructure, sites: &[i64]) -> Vec<usize> {
    sites.iter().map(|&x| s.dim(s.wrap(x))).collect()
}

/// Decoupling unitary at the cut between sites c − 1 and c; requires index 0.
pub fn decouple(u: &BandedUnitary, cut: usize) -> Result<Decoupler> {
    let idx = index_all_cuts(u)?;
    if idx != 0 {
        return Err(Error::WrongIndex {
            found: idx.to_string(),
            expected: "0".into(),
        });
    }
    decouple_unchecked(u, cut)
}

pub(crate) fn decouple_unchecked(u: &BandedUnitary, cut: usize) -> Result<Decoupler> {
    let s = u.structure();
    let l = u.band() as i64;
    let c = cut as i64;
    let window_z: Vec<i64> = (c - l..c + l).collect();
    let window: Vec<usize> = window_z.iter().map(|&x| s.wrap(x)).collect();
    if l == 0 {
        return Ok(Decoupler {
            cut,
            window,
            local: linalg::zeros(0, 0),
            residual: 0.0,
        });
    }
    // Q = U* P U restricted to the window; rows x ≥ c within reach
    let sites_z: Vec<i64> = (c - l..c + 2 * l).collect();
    let patch = u.lifted_patch(&sites_z);
    let dims = lifted_dims(s, &sites_z);
    let n_left: usize = dims[..l as usize].iter().sum();
    let n_win: usize = dims[..2 * l as usize].iter().sum();
    let n_all: usize = dims.iter().sum();
    let rows: Vec<usize> = (n_left..n_all).collect();
    let cols: Vec<usize> = (0..n_win).collect();
    let b = linalg::select(&patch, &rows, &cols);
    let q = b.adjoint() * &b;
    let (vals, vecs) = hermitian_eigen(&q);
    let n_right = n_win - n_left;
    let upper: Vec<usize> = (0..n_win).filter(|&k| vals[k] > 0.5).collect();
    let lower: Vec<usize> = (0..n_win).filter(|&k| vals[k] <= 0.5).collect();
    if upper.len() != n_right {
        return Err(Error::WrongIndex {
            found: (upper.len() as i64 - n_right as i64).to_string(),
            expected: "0".into(),
        });
    }
    let all: Vec<usize> = (0..n_win).collect();
    let qb = linalg::select(&vecs, &all, &upper);
    let qc = linalg::select(&vecs, &all, &lower);
    let eye = linalg::eye(n_win);
    let pb = linalg::select(&eye, &all, &(n_left..n_win).collect::<Vec<_>>());
    let pc = linalg::select(&eye, &all, &(0..n_left).collect::<Vec<_>>());
    // V maps ran P onto ran Q (and complements), closest to the identity
    let v = aligned_map(&qb, &pb) + aligned_map(&qc, &pc);
    let mut dec = Decoupler {
        cut,
        window,
        local: v,
        residual: 0.0,
    };
    dec.residual = crossing_residual(u, &dec);
    Ok(dec)
}

/// Unitary map between subspaces with orthonormal bases `to` and `from`: the polar
/// factor of the overlap, so shared directions are left fixed.
fn aligned_map(to: &Mat, from: &Mat) -> Mat {
    if to.ncols() == 0 {
        return linalg::zeros(to.nrows(), to.nrows());
    }
    let overlap = to.adjoint() * from;
    let w = linalg::polar_unitary(&overlap);
    to * w * from.adjoint()
}

/// Largest crossing block norm of U·V at the decoupler's cut, computed on the
/// ℤ-lift.
fn crossing_residual(u: &BandedUnitary, dec: &Decoupler) -> f64 {
    let s = u.structure();
    let l = u.band() as i64;
    let c = dec.cut as i64;
    let sites_z: Vec<i64> = (c - 3 * l..c + 3 * l).collect();
    let up = u.lifted_patch(&sites_z);
    let dims = lifted_dims(s, &sites_z);
    let n = up.nrows();
    let mut vp = linalg::eye(n);
    let w0: usize = dims[..2 * l as usize].iter().sum();
    let wn = dec.local.nrows();
    vp.view_mut((w0, w0), (wn, wn)).copy_from(&dec.local);
    let prod = up * vp;
    let split: usize = dims[..3 * l as usize].iter().sum();
    let mut acc = 0.0f64;
    for i in 0..n {
        for j in 0..n {
            if (i >= split) != (j >= split) {
                acc += prod[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

/// U = second · first with first on pairs {2k − 1, 2k} and second on {2k, 2k + 1}.
#[derive(Clone, Debug)]
pub struct TwoLayerWalk {
    pub first: PartitionedLayer,
    pub second: PartitionedLayer,
    pub reconstruction_residual: f64,
    pub block_residual: f64,
}

impl TwoLayerWalk {
    pub fn product(&self) -> Result<BandedUnitary> {
        self.second.to_banded()?.compose(&self.first.to_banded()?)
    }
}

fn nearest_neighbor_view(u: &BandedUnitary) -> Result<BandedUnitary> {
    let m = u.sites();
    if u.band() > 1 {
        return Err(Error::Structure(format!(
            "band {} > 1; regroup first",
            u.band()
        )));
    }
    if !m.is_multiple_of(2) || m < 6 {
        return Err(Error::Structure(format!(
            "need an even ring of at least 6 sites, got {m}"
        )));
    }
    Ok(BandedUnitary::from_parts_unchecked(
        u.structure().clone(),
        1,
        u.matrix().clone(),
    ))
}

/// Two-layer implementation of an index-0 nearest-neighbor walk.
pub fn two_layer_implementation(u: &BandedUnitary) -> Result<TwoLayerWalk> {
    let idx = index_all_cuts(u)?;
    if idx != 0 {
        return Err(Error::WrongIndex {
            found: idx.to_string(),
            expected: "0".into(),
        });
    }
    let u = nearest_neighbor_view(u)?;
    let s = u.structure().clone();
    let m = s.sites();
    let mut v_blocks = Vec::new();
    let mut vmat = linalg::eye(s.total());
    for k in 0..m / 2 {
        let dec = decouple_unchecked(&u, 2 * k)?;
        let sites = dec.window.clone();
        let idx = s.indices(&sites);
        for (a, &i) in idx.iter().enumerate() {
            for (b, &j) in idx.iter().enumerate() {
                vmat[(i, j)] = dec.local[(a, b)];
            }
        }
        v_blocks.push((sites, dec.local));
    }
    let w = u.matrix() * &vmat;
    let mut w_blocks = Vec::new();
    let mut inside = vec![vec![false; s.total()]; s.total()];
    for k in 0..m / 2 {
        let sites = vec![2 * k, 2 * k + 1];
        let idx = s.indices(&sites);
        for &i in &idx {
            for &j in &idx {
                inside[i][j] = true;
            }
        }
        w_blocks.push((sites, linalg::select(&w, &idx, &idx)));
    }
    let mut off = 0.0;
    for i in 0..s.total() {
        for j in 0..s.total() {
            if !inside[i][j] {
                off += w[(i, j)].norm_sqr();
            }
        }
    }
    let block_residual = off.sqrt();
    // unitary blocks are re-projected onto the unitary group before validation
    let w_blocks = w_blocks
        .into_iter()
        .map(|(st, b)| (st, linalg::polar_unitary(&b)))
        .collect();
    let first = PartitionedLayer::new(
        s.clone(),
        v_blocks
            .into_iter()
            .map(|(st, b)| (st, b.adjoint()))
            .collect(),
    )?;
    let second = PartitionedLayer::new(s.clone(), w_blocks)?;
    let mut out = TwoLayerWalk {
        first,
        second,
        reconstruction_residual: 0.0,
        block_residual,
    };
    let prod = out.product()?;
    out.reconstruction_residual = linalg::dist(prod.matrix(), u.matrix());
    Ok(out)
}

/// Path t ↦ second(t) · first(t) with layer(t) = exp(i t log layer), principal logs.
#[derive(Clone, Debug)]
pub struct HomotopyPath {
    structure: SumCellStructure,
    first: Vec<(Vec<usize>, Mat)>,
    second: Vec<(Vec<usize>, Mat)>,
}

impl HomotopyPath {
    fn layer_at(&self, gens: &[(Vec<usize>, Mat)], t: f64) -> Result<PartitionedLayer> {
        let blocks = gens
            .iter()
            .map(|(st, h)| (st.clone(), linalg::expi(h, t)))
            .collect();
        PartitionedLayer::new(self.structure.clone(), blocks)
    }

    /// The walk at parameter t ∈ [0, 1]; band ≤ 2.
    pub fn sample(&self, t: f64) -> Result<BandedUnitary> {
        let a = self.layer_at(&self.first, t)?.to_banded()?;
        let b = self.layer_at(&self.second, t)?.to_banded()?;
        b.compose(&a)
    }

    /// Largest spectral norm of the block generators (at most π).
    pub fn generator_norm(&self) -> f64 {
        self.first
            .iter()
            .chain(self.second.iter())
            .map(|(_, h)| linalg::op_norm(h))
            .fold(0.0, f64::max)
    }
}

/// Continuous path of band-2 walks from the identity to an index-0 nearest-neighbor walk.
pub fn connect_to_identity(u: &BandedUnitary) -> Result<HomotopyPath> {
    let tl = two_layer_implementation(u)?;
    let logs = |layer: &PartitionedLayer| -> Vec<(Vec<usize>, Mat)> {
        layer
            .blocks
            .iter()
            .map(|(st, b)| (st.clone(), linalg::principal_log(b)))
            .collect()
    };
    Ok(HomotopyPath {
        structure: u.structure().clone(),
        first: logs(&tl.first),
        second: logs(&tl.second),
    })
}

/// A walk equal to `u1` on one arc and to `u2` on the complementary arc.
#[derive(Clone, Debug)]
pub struct Crossover {
    pub walk: BandedUnitary,
    /// Sites where `u1` is reproduced (away from the splice windows).
    pub left_arc: Vec<usize>,
    /// Sites where `u2` is reproduced.
    pub right_arc: Vec<usize>,
    /// The two splice windows (around the cut and around the antipodal cut).
    pub windows: Vec<Vec<usize>>,
    /// Sites per cell of the grouping in which u2* u1 is nearest-neighbor.
    pub grouping: usize,
    pub block_residual: f64,
}

impl Crossover {
    /// Splice window width in cells of the nearest-neighbor grouping.
    pub fn window_cells(&self) -> usize {
        self.windows
            .iter()
            .map(|w| w.len())
            .max()
            .unwrap_or(0)
            .div_ceil(self.grouping.max(1))
    }
}

/// Splices `u1` (left of `cut`) to `u2` (right of `cut`).
///
/// On a ring the two arcs meet twice, so the splice is performed at `cut` and at
/// the antipodal cut `cut + M/2`.
pub fn crossover(u1: &BandedUnitary, u2: &BandedUnitary, cut: usize) -> Result<Crossover> {
    if u1.structure() != u2.structure() {
        return Err(Error::Structure(
            "crossover needs equal cell structures".into(),
        ));
    }
    let (i1, i2) = (index_all_cuts(u1)?, index_all_cuts(u2)?);
    if i1 != i2 {
        return Err(Error::IndexMismatch {
            left: i1.to_string(),
            right: i2.to_string(),
        });
    }
    let s = u1.structure().clone();
    let m = s.sites();
    if !m.is_multiple_of(2) {
        return Err(Error::Structure("crossover needs an even ring".into()));
    }
    let x = u2.adjoint().compose(u1)?.tighten(1e-12);
    let lx = x.band().max(1);
    let x = BandedUnitary::from_parts_unchecked(s.clone(), lx, x.matrix().clone());
    let far = s.wrap((cut + m / 2) as i64);
    if 4 * lx >= m {
        return Err(Error::Region(format!(
            "ring of {m} sites too short for splice windows of {} sites",
            2 * lx
        )));
    }
    let d1 = decouple_unchecked(&x, cut)?;
    let d2 = decouple_unchecked(&x, far)?;
    let mut vv = d1.to_matrix(&s);
    vv *= d2.to_matrix(&s);
    let y = x.matrix() * &vv;
    let left: Vec<usize> = (0..m / 2).map(|k| s.wrap((far + k) as i64)).collect();
    let in_left: Vec<bool> = (0..m).map(|z| left.contains(&z)).collect();
    let side: Vec<bool> = (0..m).flat_map(|z| vec![in_left[z]; s.dim(z)]).collect();
    let n = s.total();
    let mut off = 0.0;
    for i in 0..n {
        for j in 0..n {
            if side[i] != side[j] {
                off += y[(i, j)].norm_sqr();
            }
        }
    }
    let mut dm = linalg::eye(n);
    for j in 0..n {
        if side[j] {
            for i in 0..n {
                dm[(i, j)] = if side[i] { y[(i, j)] } else { linalg::ZERO };
            }
        }
    }
    let dm = linalg::polar_unitary(&dm);
    let uc = u2.matrix() * dm * vv.adjoint();
    let probe = BandedUnitary::from_parts_unchecked(s.clone(), m / 2, uc.clone());
    let band = probe.measured_band(1e-12);
    let walk = BandedUnitary::new(s.clone(), band, uc)?;
    let windows = vec![d1.window.clone(), d2.window.clone()];
    let covered = |z: &usize| windows.iter().any(|w| w.contains(z));
    let left_arc = left.iter().filter(|z| !covered(z)).cloned().collect();
    let right_arc = (0..m).filter(|z| !in_left[*z] && !covered(z)).collect();
    Ok(Crossover {
        walk,
        left_arc,
        right_arc,
        windows,
        grouping: lx,
        block_residual: off.sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::walk::{index, random_layered_walk};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn index_zero_walk(seed: u64, m: usize, d: usize) -> BandedUnitary {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        random_layered_walk(m, d, 0, &mut rng).unwrap()
    }

    #[test]
    fn decoupling_removes_crossing_blocks() {
        for seed in 0..5 {
            let u = index_zero_walk(seed, 12, 2);
            for cut in [0, 3, 7] {
                let dec = decouple(&u, cut).unwrap();
                assert!(dec.residual < 1e-9, "residual {}", dec.residual);
                assert_eq!(dec.window.len(), 2 * u.band());
                assert!(linalg::unitarity_residual(&dec.local) < 1e-10);
            }
        }
    }

    #[test]
    fn decouple_rejects_shift() {
        let s = BandedUnitary::shift(8, 1, 1).unwrap();
        match decouple(&s, 0) {
            Err(Error::WrongIndex { found, .. }) => assert_eq!(found, "1"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn decoupler_of_blockdiagonal_walk_is_identity() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let s = SumCellStructure::uniform(8, 2).unwrap();
        let u = PartitionedLayer::random_pairs(s, 0, &mut rng)
            .unwrap()
            .to_banded()
            .unwrap();
        let dec = decouple(&u, 0).unwrap();
        assert!(linalg::dist(&dec.local, &linalg::eye(dec.local.nrows())) < 1e-10);
    }

    #[test]
    fn two_layers_reconstruct() {
        for seed in 0..5 {
            let u = index_zero_walk(seed, 12, 1).regroup(2).unwrap();
            let tl = two_layer_implementation(&u).unwrap();
            assert!(tl.reconstruction_residual < 1e-9);
            assert!(tl.block_residual < 1e-9);
        }
    }

    #[test]
    fn homotopy_endpoints() {
        let u = index_zero_walk(9, 12, 1).regroup(2).unwrap();
        let path = connect_to_identity(&u).unwrap();
        let s0 = path.sample(0.0).unwrap();
        let s1 = path.sample(1.0).unwrap();
        assert!(linalg::dist(s0.matrix(), &linalg::eye(u.matrix().nrows())) < 1e-9);
        assert!(linalg::dist(s1.matrix(), u.matrix()) < 1e-9);
        assert!(path.generator_norm() <= std::f64::consts::PI + 1e-9);
        let mid = path.sample(0.5).unwrap();
        assert!(mid.band() <= 2);
        assert_eq!(index(&mid, 0).unwrap(), 0);
    }

    #[test]
    fn crossover_matches_both_sides() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let s = SumCellStructure::uniform(24, 1).unwrap();
        let mk = |rng: &mut ChaCha8Rng| {
            let a = PartitionedLayer::random_pairs(s.clone(), 0, rng)
                .unwrap()
                .to_banded()
                .unwrap();
            BandedUnitary::shift(24, 1, 1).unwrap().compose(&a).unwrap()
        };
        let u1 = mk(&mut rng).regroup(2).unwrap();
        let u2 = mk(&mut rng).regroup(2).unwrap();
        let c = crossover(&u1, &u2, 0).unwrap();
        assert!(c.block_residual < 1e-9);
        assert_eq!(index(&c.walk, 0).unwrap(), 1);
        for &y in &c.left_arc {
            for x in 0..12 {
                assert!(linalg::dist(&c.walk.block(x, y), &u1.block(x, y)) < 1e-9);
            }
        }
        for &y in &c.right_arc {
            for x in 0..12 {
                assert!(linalg::dist(&c.walk.block(x, y), &u2.block(x, y)) < 1e-9);
            }
        }
    }

    #[test]
    fn crossover_rejects_unequal_indices() {
        let a = BandedUnitary::shift(12, 1, 1).unwrap();
        let b = BandedUnitary::identity(a.structure().clone());
        assert!(matches!(
            crossover(&a, &b, 0),
            Err(Error::IndexMismatch { .. })
        ));
    }
}
