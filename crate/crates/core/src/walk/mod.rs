//! Quantum walks on a ring: banded unitaries on a direct sum of cell spaces.

mod construct;
mod doubled;
mod index;

pub use construct::{
    connect_to_identity, crossover, decouple, two_layer_implementation, Crossover, Decoupler,
    HomotopyPath, TwoLayerWalk,
};
pub use doubled::{doubled_implementation, DoubledWalk};
pub use index::{index, index_all_cuts, index_rank_form, index_with, raw_index, SiteInterval};

use crate::error::{Error, Result};
use crate::linalg::{self, Mat};
use crate::tolerance::Tolerances;
use rand::Rng;

/// Cell dimensions d(x) of the sites x = 0..M−1 of a ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SumCellStructure {
    dims: Vec<usize>,
    offsets: Vec<usize>,
}

impl SumCellStructure {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::Structure("ring without sites".into()));
        }
        if dims.contains(&0) {
            return Err(Error::Structure("zero-dimensional cell".into()));
        }
        let mut offsets = Vec::with_capacity(dims.len() + 1);
        let mut acc = 0;
        for &d in &dims {
            offsets.push(acc);
            acc += d;
        }
        offsets.push(acc);
        Ok(SumCellStructure { dims, offsets })
    }

    pub fn uniform(sites: usize, d: usize) -> Result<Self> {
        Self::new(vec![d; sites])
    }

    pub fn sites(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn dim(&self, x: usize) -> usize {
        self.dims[x]
    }

    pub fn offset(&self, x: usize) -> usize {
        self.offsets[x]
    }

    pub fn total(&self) -> usize {
        self.offsets[self.dims.len()]
    }

    /// Site index reduced into 0..M.
    pub fn wrap(&self, x: i64) -> usize {
        x.rem_euclid(self.sites() as i64) as usize
    }

    /// Cyclic distance between two sites.
    pub fn distance(&self, x: usize, y: usize) -> usize {
        let m = self.sites();
        let d = (x as i64 - y as i64).unsigned_abs() as usize % m;
        d.min(m - d)
    }

    /// Global basis indices of a site.
    pub fn range(&self, x: usize) -> std::ops::Range<usize> {
        self.offsets[x]..self.offsets[x + 1]
    }

    /// Global basis indices of a list of sites, in order.
    pub fn indices(&self, sites: &[usize]) -> Vec<usize> {
        sites.iter().flat_map(|&x| self.range(x)).collect()
    }
}

/// A unitary on ⊕_x H_x whose blocks U_xy vanish beyond cyclic distance `band`.
#[derive(Clone, Debug)]
pub struct BandedUnitary {
    structure: SumCellStructure,
    band: usize,
    matrix: Mat,
}

impl BandedUnitary {
    /// Validates unitarity (1e-10), the band invariant 2L < M and vanishing of
    /// blocks outside the band.
    pub fn new(structure: SumCellStructure, band: usize, matrix: Mat) -> Result<Self> {
        Self::new_with(structure, band, matrix, &Tolerances::default())
    }

    pub fn new_with(
        structure: SumCellStructure,
        band: usize,
        matrix: Mat,
        tol: &Tolerances,
    ) -> Result<Self> {
        let n = structure.total();
        if matrix.shape() != (n, n) {
            return Err(Error::Dimension(format!(
                "matrix {:?} for cell dimensions summing to {n}",
                matrix.shape()
            )));
        }
        let m = structure.sites();
        if 2 * band >= m {
            return Err(Error::BandOverflow {
                band,
                sites: m,
                detail: "need 2L < M".into(),
            });
        }
        let res = linalg::unitarity_residual(&matrix);
        if res > tol.unitarity {
            return Err(Error::NotUnitary {
                residual: res,
                tol: tol.unitarity,
            });
        }
        let u = BandedUnitary {
            structure,
            band,
            matrix,
        };
        let outside = u.out_of_band_norm(band);
        if outside > tol.reconstruction {
            return Err(Error::Structure(format!(
                "blocks beyond band {band} have norm {outside:.3e}"
            )));
        }
        Ok(u)
    }

    /// Builds a walk from explicit blocks (x, y, U_xy); missing blocks are zero.
    pub fn from_blocks(
        structure: SumCellStructure,
        band: usize,
        blocks: &[(usize, usize, Mat)],
    ) -> Result<Self> {
        let n = structure.total();
        let mut m = linalg::zeros(n, n);
        for (x, y, b) in blocks {
            if *x >= structure.sites() || *y >= structure.sites() {
                return Err(Error::Structure(format!(
                    "block ({x},{y}) outside the ring"
                )));
            }
            if b.shape() != (structure.dim(*x), structure.dim(*y)) {
                return Err(Error::Dimension(format!(
                    "block ({x},{y}) has shape {:?}",
                    b.shape()
                )));
            }
            m.view_mut((structure.offset(*x), structure.offset(*y)), b.shape())
                .copy_from(b);
        }
        Self::new(structure, band, m)
    }

    pub fn identity(structure: SumCellStructure) -> Self {
        let n = structure.total();
        BandedUnitary {
            structure,
            band: 0,
            matrix: linalg::eye(n),
        }
    }

    /// The shift S^k on M sites of dimension d: S|x, i⟩ = |x + 1, i⟩.
    pub fn shift(sites: usize, d: usize, k: i64) -> Result<Self> {
        let structure = SumCellStructure::uniform(sites, d)?;
        let n = structure.total();
        let mut m = linalg::zeros(n, n);
        for y in 0..sites {
            let x = structure.wrap(y as i64 + k);
            for i in 0..d {
                m[(structure.offset(x) + i, structure.offset(y) + i)] = linalg::ONE;
            }
        }
        let band = structure.distance(0, structure.wrap(k));
        Self::new(structure, band, m)
    }

    pub fn structure(&self) -> &SumCellStructure {
        &self.structure
    }

    pub fn sites(&self) -> usize {
        self.structure.sites()
    }

    pub fn band(&self) -> usize {
        self.band
    }

    pub fn matrix(&self) -> &Mat {
        &self.matrix
    }

    pub fn block(&self, x: usize, y: usize) -> Mat {
        let s = &self.structure;
        self.matrix
            .view((s.offset(x), s.offset(y)), (s.dim(x), s.dim(y)))
            .into_owned()
    }

    /// Block of the periodic extension to ℤ between sites x and y.
    pub fn lifted_block(&self, x: i64, y: i64) -> Mat {
        let s = &self.structure;
        let (xs, ys) = (s.wrap(x), s.wrap(y));
        if (x - y).unsigned_abs() as usize > self.band {
            return linalg::zeros(s.dim(xs), s.dim(ys));
        }
        self.block(xs, ys)
    }

    /// Dense matrix of the periodic extension restricted to the ℤ-sites `sites`.
    pub fn lifted_patch(&self, sites: &[i64]) -> Mat {
        let s = &self.structure;
        let dims: Vec<usize> = sites.iter().map(|&x| s.dim(s.wrap(x))).collect();
        let mut offs = vec![0usize];
        for d in &dims {
            offs.push(offs.last().unwrap() + d);
        }
        let n = *offs.last().unwrap();
        let mut m = linalg::zeros(n, n);
        for (a, &x) in sites.iter().enumerate() {
            for (b, &y) in sites.iter().enumerate() {
                if (x - y).unsigned_abs() as usize <= self.band {
                    let blk = self.block(s.wrap(x), s.wrap(y));
                    m.view_mut((offs[a], offs[b]), (dims[a], dims[b]))
                        .copy_from(&blk);
                }
            }
        }
        m
    }

    /// Frobenius norm of all blocks at cyclic distance greater than `band`.
    pub fn out_of_band_norm(&self, band: usize) -> f64 {
        let s = &self.structure;
        let mut acc = 0.0;
        for x in 0..s.sites() {
            for y in 0..s.sites() {
                if s.distance(x, y) > band {
                    acc += self.block(x, y).iter().map(|z| z.norm_sqr()).sum::<f64>();
                }
            }
        }
        acc.sqrt()
    }

    /// Smallest band for which all further blocks are below `tol`.
    pub fn measured_band(&self, tol: f64) -> usize {
        let s = &self.structure;
        let mut band = 0;
        for x in 0..s.sites() {
            for y in 0..s.sites() {
                if linalg::fro(&self.block(x, y)) > tol {
                    band = band.max(s.distance(x, y));
                }
            }
        }
        band
    }

    /// `self · other`: first `other`, then `self`.
    pub fn compose(&self, other: &BandedUnitary) -> Result<Self> {
        if self.structure != other.structure {
            return Err(Error::Structure(
                "composing walks on different structures".into(),
            ));
        }
        let band = self.band + other.band;
        if 2 * band >= self.sites() {
            return Err(Error::BandOverflow {
                band,
                sites: self.sites(),
                detail: "composition band L_u + L_v must satisfy 2L < M".into(),
            });
        }
        Ok(BandedUnitary {
            structure: self.structure.clone(),
            band,
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn adjoint(&self) -> Self {
        BandedUnitary {
            structure: self.structure.clone(),
            band: self.band,
            matrix: self.matrix.adjoint(),
        }
    }

    /// Cellwise direct sum: H_x = H_x(u) ⊕ H_x(v), site-major ordering.
    pub fn direct_sum(&self, other: &BandedUnitary) -> Result<Self> {
        let (s1, s2) = (&self.structure, &other.structure);
        if s1.sites() != s2.sites() {
            return Err(Error::Structure(
                "direct sum of rings of different length".into(),
            ));
        }
        let m = s1.sites();
        let dims: Vec<usize> = (0..m).map(|x| s1.dim(x) + s2.dim(x)).collect();
        let s = SumCellStructure::new(dims)?;
        let mut mat = linalg::zeros(s.total(), s.total());
        for x in 0..m {
            for y in 0..m {
                let (a, b) = (self.block(x, y), other.block(x, y));
                mat.view_mut((s.offset(x), s.offset(y)), a.shape())
                    .copy_from(&a);
                mat.view_mut(
                    (s.offset(x) + s1.dim(x), s.offset(y) + s1.dim(y)),
                    b.shape(),
                )
                .copy_from(&b);
            }
        }
        let band = self.band.max(other.band);
        Ok(BandedUnitary {
            structure: s,
            band,
            matrix: mat,
        })
    }

    /// Merges `g` consecutive sites into one; site X of the result is [gX, gX + g).
    pub fn regroup(&self, g: usize) -> Result<Self> {
        let m = self.sites();
        if g == 0 || !m.is_multiple_of(g) {
            return Err(Error::Structure(format!(
                "cannot group {m} sites in blocks of {g}"
            )));
        }
        let dims: Vec<usize> = (0..m / g)
            .map(|x| (0..g).map(|k| self.structure.dim(x * g + k)).sum())
            .collect();
        let s = SumCellStructure::new(dims)?;
        let band = self.band.div_ceil(g);
        if 2 * band >= s.sites() {
            return Err(Error::BandOverflow {
                band,
                sites: s.sites(),
                detail: "after grouping".into(),
            });
        }
        Ok(BandedUnitary {
            structure: s,
            band,
            matrix: self.matrix.clone(),
        })
    }

    /// Replaces the declared band by the measured one.
    pub fn tighten(&self, tol: f64) -> Self {
        let mut u = self.clone();
        u.band = self.measured_band(tol).min(self.band);
        u
    }

    pub(crate) fn from_parts_unchecked(
        structure: SumCellStructure,
        band: usize,
        matrix: Mat,
    ) -> Self {
        BandedUnitary {
            structure,
            band,
            matrix,
        }
    }
}

/// A unitary acting independently on disjoint blocks of consecutive sites.
#[derive(Clone, Debug)]
pub struct PartitionedLayer {
    pub structure: SumCellStructure,
    /// (sites in cyclic order, unitary on their direct sum)
    pub blocks: Vec<(Vec<usize>, Mat)>,
}

impl PartitionedLayer {
    pub fn new(structure: SumCellStructure, blocks: Vec<(Vec<usize>, Mat)>) -> Result<Self> {
        let mut seen = vec![false; structure.sites()];
        for (sites, u) in &blocks {
            let d: usize = sites.iter().map(|&x| structure.dim(x)).sum();
            if u.shape() != (d, d) {
                return Err(Error::Dimension(format!(
                    "block on {sites:?} has shape {:?}",
                    u.shape()
                )));
            }
            let res = linalg::unitarity_residual(u);
            if res > 1e-10 {
                return Err(Error::NotUnitary {
                    residual: res,
                    tol: 1e-10,
                });
            }
            for w in sites.windows(2) {
                if structure.wrap(w[0] as i64 + 1) != w[1] {
                    return Err(Error::Structure(format!(
                        "block sites {sites:?} not consecutive"
                    )));
                }
            }
            for &x in sites {
                if x >= structure.sites() || seen[x] {
                    return Err(Error::Structure(format!(
                        "site {x} repeated or out of range"
                    )));
                }
                seen[x] = true;
            }
        }
        Ok(PartitionedLayer { structure, blocks })
    }

    /// Blocks on the pairs {2k + parity, 2k + 1 + parity}; requires an even ring.
    pub fn pairs(structure: SumCellStructure, parity: usize, unitaries: Vec<Mat>) -> Result<Self> {
        let m = structure.sites();
        if !m.is_multiple_of(2) {
            return Err(Error::Structure(
                "pair layers need an even number of sites".into(),
            ));
        }
        let blocks = unitaries
            .into_iter()
            .enumerate()
            .map(|(k, u)| (vec![(2 * k + parity) % m, (2 * k + 1 + parity) % m], u))
            .collect();
        Self::new(structure, blocks)
    }

    pub fn random_pairs<R: Rng + ?Sized>(
        structure: SumCellStructure,
        parity: usize,
        rng: &mut R,
    ) -> Result<Self> {
        let m = structure.sites();
        let us = (0..m / 2)
            .map(|k| {
                let a = (2 * k + parity) % m;
                let b = (a + 1) % m;
                linalg::random_unitary(structure.dim(a) + structure.dim(b), rng)
            })
            .collect();
        Self::pairs(structure, parity, us)
    }

    pub fn random_onsite<R: Rng + ?Sized>(
        structure: SumCellStructure,
        rng: &mut R,
    ) -> Result<Self> {
        let blocks = (0..structure.sites())
            .map(|x| (vec![x], linalg::random_unitary(structure.dim(x), rng)))
            .collect();
        Self::new(structure, blocks)
    }

    pub fn to_banded(&self) -> Result<BandedUnitary> {
        let s = &self.structure;
        let mut m = linalg::eye(s.total());
        let mut band = 0;
        for (sites, u) in &self.blocks {
            let idx = s.indices(sites);
            for (a, &i) in idx.iter().enumerate() {
                for (b, &j) in idx.iter().enumerate() {
                    m[(i, j)] = u[(a, b)];
                }
            }
            band = band.max(sites.len().saturating_sub(1));
        }
        BandedUnitary::new(s.clone(), band, m)
    }
}

/// A layer of a walk circuit.
#[derive(Clone, Debug)]
pub enum WalkLayer {
    Shift(i64),
    Partition(PartitionedLayer),
}

/// Layers applied in order to states; the product is a banded unitary.
#[derive(Clone, Debug)]
pub struct WalkCircuit {
    pub structure: SumCellStructure,
    pub layers: Vec<WalkLayer>,
}

impl WalkCircuit {
    pub fn to_banded(&self) -> Result<BandedUnitary> {
        let s = &self.structure;
        let mut u = BandedUnitary::identity(s.clone());
        for layer in &self.layers {
            let l = match layer {
                WalkLayer::Shift(k) => {
                    let d = s.dim(0);
                    if s.dims().iter().any(|&e| e != d) {
                        return Err(Error::Structure("shift layer on non-uniform cells".into()));
                    }
                    BandedUnitary::shift(s.sites(), d, *k)?
                }
                WalkLayer::Partition(p) => p.to_banded()?,
            };
            u = l.compose(&u)?;
        }
        Ok(u)
    }
}

/// Random walk made of two pair layers followed by S^k.
pub fn random_layered_walk<R: Rng + ?Sized>(
    sites: usize,
    d: usize,
    k: i64,
    rng: &mut R,
) -> Result<BandedUnitary> {
    let s = SumCellStructure::uniform(sites, d)?;
    let a = PartitionedLayer::random_pairs(s.clone(), 0, rng)?.to_banded()?;
    let b = PartitionedLayer::random_pairs(s.clone(), 1, rng)?.to_banded()?;
    BandedUnitary::shift(sites, d, k)?.compose(&b.compose(&a)?)
}
