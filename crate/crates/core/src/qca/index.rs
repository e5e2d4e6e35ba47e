use super::operator::{cell_generators, CellInterval, LocalizedOperator};
use super::{QcaSystem, RationalIndex, TensorCellStructure};
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, C64};
use crate::operator_algebra::{
    coefficient_span, full_matrix_check, generate_algebra_with, MatrixAlgebra, TensorSplit,
};
use crate::tolerance::Tolerances;
use num_integer::Integer;
use serde::Serialize;

/// Consecutive blocks of `size` cells, block k starting at cell offset + k·size.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Grouping {
    pub offset: usize,
    pub size: usize,
    pub count: usize,
}

/// Heisenberg images of the generators of every cell.
struct CellImages {
    images: Vec<Vec<LocalizedOperator>>,
    /// Smallest and largest signed offset from a cell to its image support.
    spread: Vec<(i64, i64)>,
}

impl CellImages {
    fn new(sys: &QcaSystem) -> Result<Self> {
        let s = sys.structure();
        let mut images = Vec::with_capacity(s.cells());
        let mut spread = Vec::with_capacity(s.cells());
        for x in 0..s.cells() {
            let imgs: Vec<LocalizedOperator> = cell_generators(s, x)
                .iter()
                .map(|g| sys.heisenberg(g))
                .collect::<Result<_>>()?;
            let (mut lo, mut hi) = (0i64, 0i64);
            let mut first = true;
            for img in &imgs {
                for c in img.cells(s) {
                    let o = s.offset(x, c);
                    if first {
                        (lo, hi) = (o, o);
                        first = false;
                    } else {
                        lo = lo.min(o);
                        hi = hi.max(o);
                    }
                }
            }
            images.push(imgs);
            spread.push((lo, hi));
        }
        Ok(CellImages { images, spread })
    }
}

impl Grouping {
    /// Cells of block k (taken cyclically).
    pub fn cells(&self, k: i64) -> Vec<usize> {
        let n = self.size * self.count;
        let k = k.rem_euclid(self.count as i64) as usize;
        (0..self.size)
            .map(|i| (self.offset + k * self.size + i) % n)
            .collect()
    }

    /// The interval of `blocks` consecutive blocks starting with block k.
    pub fn interval(&self, s: &TensorCellStructure, k: i64, blocks: usize) -> Result<CellInterval> {
        CellInterval::new(s, self.cells(k)[0] as i64, blocks * self.size)
    }

    pub fn dim(&self, s: &TensorCellStructure, k: i64) -> usize {
        self.cells(k).iter().map(|&c| s.dim(c)).product()
    }

    pub fn dims(&self, s: &TensorCellStructure) -> Vec<usize> {
        (0..self.count as i64).map(|k| self.dim(s, k)).collect()
    }

    /// Block of every cell, and the unwrapped position of the cell within the ring.
    fn locate(&self, c: usize) -> (i64, i64) {
        let n = (self.size * self.count) as i64;
        let i = (c as i64 - self.offset as i64).rem_euclid(n);
        (i / self.size as i64, i)
    }

    /// Blocks reached by the images of cell c, measured along the chain.
    fn reached(&self, c: usize, spread: (i64, i64)) -> (i64, i64, i64) {
        let (k, i) = self.locate(c);
        let g = self.size as i64;
        (
            k,
            (i + spread.0).div_euclid(g),
            (i + spread.1).div_euclid(g),
        )
    }

    /// Smallest blocks in which α maps every block into itself and its two neighbours.
    pub fn nearest_neighbor(sys: &QcaSystem) -> Result<Grouping> {
        Self::nearest_neighbor_from(sys, &CellImages::new(sys)?)
    }

    fn nearest_neighbor_from(sys: &QcaSystem, ci: &CellImages) -> Result<Grouping> {
        let n = sys.structure().cells();
        for size in 1..=n / 3 {
            if !n.is_multiple_of(size) {
                continue;
            }
            for offset in 0..size {
                let gr = Grouping {
                    offset,
                    size,
                    count: n / size,
                };
                let ok = (0..n).all(|c| {
                    let (k, lo, hi) = gr.reached(c, ci.spread[c]);
                    lo >= k - 1 && hi <= k + 1
                });
                if ok {
                    return Ok(gr);
                }
            }
        }
        Err(Error::Structure(format!(
            "no nearest-neighbour grouping of {n} cells into at least 3 blocks"
        )))
    }

    /// Smallest blocks, an even number of them, such that each pair of blocks
    /// (2j, 2j+1) is mapped into blocks 2j−1 … 2j+2.
    pub fn pairing(sys: &QcaSystem) -> Result<Grouping> {
        Self::pairing_from(sys, &CellImages::new(sys)?)
    }

    fn pairing_from(sys: &QcaSystem, ci: &CellImages) -> Result<Grouping> {
        let n = sys.structure().cells();
        for size in 1..=n / 4 {
            if !n.is_multiple_of(size) || !(n / size).is_multiple_of(2) {
                continue;
            }
            for offset in 0..2 * size {
                let gr = Grouping {
                    offset: offset % n,
                    size,
                    count: n / size,
                };
                let ok = (0..n).all(|c| {
                    let (k, lo, hi) = gr.reached(c, ci.spread[c]);
                    let base = k - k.rem_euclid(2);
                    lo >= base - 1 && hi <= base + 2
                });
                if ok {
                    return Ok(gr);
                }
            }
        }
        Err(Error::Structure(format!(
            "no pairing of {n} cells into an even number (at least 4) of blocks with nearest-neighbour pairs"
        )))
    }
}

/// Spp of the algebra generated by `images` onto `keep`, together with its generators.
const SPP_CLOSURE_TOL: f64 = 1e-6;

fn spp(
    s: &TensorCellStructure,
    images: &[&LocalizedOperator],
    keep: &CellInterval,
) -> Result<(MatrixAlgebra, Vec<Mat>)> {
    let keep_cells = keep.cells(s);
    let keep_dims = keep.dims(s);
    let ambient = keep.hilbert_dim(s)?;
    let mut gens = Vec::new();
    for y in images {
        let cells = y.cells(s);
        let inner: Vec<usize> = (0..cells.len())
            .filter(|&k| keep_cells.contains(&cells[k]))
            .collect();
        if inner.is_empty() {
            continue;
        }
        let split = TensorSplit::new(y.interval().dims(s));
        let inner_cells: Vec<usize> = inner.iter().map(|&k| cells[k]).collect();
        let pos = keep.positions(s, &inner_cells)?;
        for m in coefficient_span(y.matrix(), &split, &inner) {
            gens.push(linalg::embed(&m, &keep_dims, &pos));
        }
    }
    // spans carry ~1e-7 errors from singular vectors of small singular values
    let alg = generate_algebra_with(&gens, ambient, SPP_CLOSURE_TOL)?;
    Ok((alg, gens))
}

fn full_size(a: &MatrixAlgebra, what: &str) -> Result<usize> {
    full_matrix_check(a).ok_or_else(|| {
        Error::NotFactor(format!(
            "{what} has dimension {} and is not a full matrix algebra",
            a.dim()
        ))
    })
}

fn max_commutator(a: &[Mat], b: &[Mat]) -> f64 {
    let mut worst = 0.0f64;
    for x in a {
        let xs = [x.clone(), x.adjoint()];
        for y in b {
            for x in &xs {
                let c = x * y - y * x;
                let scale = linalg::fro(x).max(1e-300) * linalg::fro(y).max(1e-300);
                worst = worst.max(linalg::fro(&c) / scale);
            }
        }
    }
    worst
}

/// Per-position support algebras ℛ_y and their dimensions.
#[derive(Clone, Debug, Serialize)]
pub struct SupportAlgebraReport {
    pub grouping: Grouping,
    pub grouped_dims: Vec<usize>,
    /// r(y) with ℛ_y ≅ M_{r(y)}, for y = 0 … count−1.
    pub ranks: Vec<usize>,
    /// Largest commutator between generators of ℛ_{2x−1} and ℛ_{2x}.
    pub max_commutator: f64,
    pub index: RationalIndex,
}

/// Support algebras of every block pair, before the consistency checks.
pub(super) struct SupportData {
    pub grouping: Grouping,
    pub dims: Vec<usize>,
    pub ranks: Vec<usize>,
    /// ℛ_y inside the ambient of blocks (y−1, y) for even y and (y, y+1) for odd y.
    pub algebras: Vec<MatrixAlgebra>,
    gens: Vec<Vec<Mat>>,
}

pub(super) fn support_data(sys: &QcaSystem) -> Result<SupportData> {
    let s = sys.structure();
    let ci = CellImages::new(sys)?;
    let gr = Grouping::pairing_from(sys, &ci)?;
    let dims = gr.dims(s);
    let k = gr.count;
    let mut ranks = vec![0usize; k];
    let mut algebras = Vec::with_capacity(k);
    let mut gens: Vec<Vec<Mat>> = Vec::with_capacity(k);
    for j in 0..k / 2 {
        let e = 2 * j as i64;
        let mut pair = gr.cells(e);
        pair.extend(gr.cells(e + 1));
        let images: Vec<&LocalizedOperator> =
            pair.iter().flat_map(|&c| ci.images[c].iter()).collect();
        let window = gr.interval(s, e - 1, 4)?;
        for y in &images {
            window.positions(s, &y.cells(s)).map_err(|_| {
                Error::Causality(format!(
                    "image of block pair {j} leaves blocks {}…{}",
                    e - 1,
                    e + 2
                ))
            })?;
        }
        let (a, ga) = spp(s, &images, &gr.interval(s, e - 1, 2)?)?;
        let (b, gb) = spp(s, &images, &gr.interval(s, e + 1, 2)?)?;
        ranks[2 * j] = full_size(&a, &format!("ℛ_{}", 2 * j))?;
        ranks[2 * j + 1] = full_size(&b, &format!("ℛ_{}", 2 * j + 1))?;
        algebras.push(a);
        algebras.push(b);
        gens.push(ga);
        gens.push(gb);
    }
    Ok(SupportData {
        grouping: gr,
        dims,
        ranks,
        algebras,
        gens,
    })
}

/// Index from the algebras ℛ_{2x}, ℛ_{2x+1} into which α splits each block pair.
pub fn index_support(sys: &QcaSystem) -> Result<(RationalIndex, SupportAlgebraReport)> {
    let SupportData {
        grouping: gr,
        dims,
        ranks,
        gens,
        ..
    } = support_data(sys)?;
    let k = gr.count;
    for j in 0..k / 2 {
        let (e, o) = (2 * j, 2 * j + 1);
        let next = (o + 1) % k;
        if dims[e] * dims[o] != ranks[e] * ranks[o] {
            return Err(Error::Check(format!(
                "d({e})d({o}) = {} but r({e})r({o}) = {}",
                dims[e] * dims[o],
                ranks[e] * ranks[o]
            )));
        }
        if ranks[o] * ranks[next] != dims[o] * dims[next] {
            return Err(Error::Check(format!(
                "r({o})r({next}) = {} but d({o})d({next}) = {}",
                ranks[o] * ranks[next],
                dims[o] * dims[next]
            )));
        }
    }
    let mut worst = 0.0f64;
    for j in 0..k / 2 {
        let prev = (2 * j + k - 1) % k;
        worst = worst.max(max_commutator(&gens[prev], &gens[2 * j]));
    }
    if worst > 1e-9 {
        return Err(Error::Check(format!(
            "support algebras fail to commute (residual {worst:.3e})"
        )));
    }
    let index = RationalIndex::new(ranks[0] as u64, dims[0] as u64);
    for j in 0..k / 2 {
        let (e, o) = (2 * j, 2 * j + 1);
        let a = RationalIndex::new(ranks[e] as u64, dims[e] as u64);
        let b = RationalIndex::new(dims[o] as u64, ranks[o] as u64);
        if a != index || b != index {
            return Err(Error::CutDependent(format!(
                "{index} at block 0 but {a} and {b} at blocks {e}, {o}"
            )));
        }
    }
    if dims
        .iter()
        .any(|&d| !(d as u64).is_multiple_of(index.num) || !(d as u64).is_multiple_of(index.den))
    {
        return Err(Error::Check(format!(
            "{index} does not divide the block dimensions {dims:?}"
        )));
    }
    let report = SupportAlgebraReport {
        grouping: gr,
        grouped_dims: dims,
        ranks,
        max_commutator: worst,
        index,
    };
    Ok((index, report))
}

fn adjacent(s: &TensorCellStructure, a: &CellInterval, b: &CellInterval) -> bool {
    (a.start + a.len) % s.cells() == b.start
}

/// d_M / r with Spp(α(𝒜_L ⊗ 𝒜_M), 𝒜_M ⊗ 𝒜_R) ≅ M_r.
///
/// Requires α(𝒜_M) ⊂ 𝒜_L ⊗ 𝒜_M ⊗ 𝒜_R and α(𝒜_L) disjoint from R; cells left of L
/// are assumed not to reach into M.
pub fn index_three_cell(
    sys: &QcaSystem,
    l: CellInterval,
    m: CellInterval,
    r: CellInterval,
) -> Result<RationalIndex> {
    let s = sys.structure();
    if !adjacent(s, &l, &m) || !adjacent(s, &m, &r) {
        return Err(Error::Region("L, M, R must be consecutive".into()));
    }
    if l.len + m.len + r.len > s.cells() {
        return Err(Error::Region("L, M, R overlap around the ring".into()));
    }
    let all = CellInterval::new(s, l.start as i64, l.len + m.len + r.len)?;
    let r_cells = r.cells(s);
    let mut images = Vec::new();
    for c in m.cells(s) {
        for g in cell_generators(s, c) {
            let y = sys.heisenberg(&g)?;
            if all.positions(s, &y.cells(s)).is_err() {
                return Err(Error::Region(format!(
                    "α(𝒜_{c}) leaves L ∪ M ∪ R; enlarge L or R"
                )));
            }
            images.push(y);
        }
    }
    for c in l.cells(s) {
        for g in cell_generators(s, c) {
            let y = sys.heisenberg(&g)?;
            if y.cells(s).iter().any(|x| r_cells.contains(x)) {
                return Err(Error::Region(format!(
                    "α(𝒜_{c}) reaches R; M is too small for the band"
                )));
            }
            images.push(y);
        }
    }
    let keep = CellInterval::new(s, m.start as i64, m.len + r.len)?;
    let refs: Vec<&LocalizedOperator> = images.iter().collect();
    let (alg, _) = spp(s, &refs, &keep)?;
    let rank = full_size(&alg, "Spp(α(𝒜_L ⊗ 𝒜_M), 𝒜_M ⊗ 𝒜_R)")?;
    let d_m = m.hilbert_dim(s)?;
    Ok(RationalIndex::new(d_m as u64, rank as u64))
}

/// Three-cell index on the default intervals: blocks 0, 1, 2 of the nearest-neighbour
/// grouping when it has at least 4 blocks, otherwise L = blocks 0–1, M = blocks 2–3
/// and R = block 4 of the pairing.
pub fn index_three_cell_grouped(sys: &QcaSystem) -> Result<RationalIndex> {
    let s = sys.structure();
    if let Ok(gr) = Grouping::nearest_neighbor(sys) {
        if gr.count >= 4 {
            return index_three_cell(
                sys,
                gr.interval(s, 0, 1)?,
                gr.interval(s, 1, 1)?,
                gr.interval(s, 2, 1)?,
            );
        }
    }
    let gr = Grouping::pairing(sys)?;
    if gr.count < 6 {
        return Err(Error::Region(format!(
            "three-cell route needs 6 blocks, the ring has {}",
            gr.count
        )));
    }
    index_three_cell(
        sys,
        gr.interval(s, 0, 2)?,
        gr.interval(s, 2, 2)?,
        gr.interval(s, 4, 1)?,
    )
}

#[derive(Clone, Debug, Serialize)]
pub struct OverlapReport {
    pub grouping: Grouping,
    pub cut: usize,
    /// η(α(𝒜_L), 𝒜_R).
    pub eta_forward: f64,
    /// η(α(𝒜_R), 𝒜_L).
    pub eta_backward: f64,
    pub raw: f64,
    pub snap_distance: f64,
    pub index: RationalIndex,
}

/// η(α(𝒜_src), 𝒜_dst)² = (d_src/d_dst) Σ_ij ‖reduce_dst α(e_ij)‖², inside `region`.
fn eta_image(
    sys: &QcaSystem,
    src: &CellInterval,
    dst: &CellInterval,
    region: &CellInterval,
) -> Result<f64> {
    let s = sys.structure();
    let d_src = src.hilbert_dim(s)?;
    let d_dst = dst.hilbert_dim(s)?;
    let rdims = region.dims(s);
    let dst_pos = region.positions(s, &dst.cells(s))?;
    let mut acc = 0.0;
    for i in 0..d_src {
        for j in 0..d_src {
            let e =
                LocalizedOperator::new(s, src.start, src.len, linalg::matrix_unit(d_src, i, j))?;
            let y = sys.heisenberg(&e)?;
            let big = y.embed_into(s, region).map_err(|_| {
                Error::Causality(format!("image of a unit on {src:?} leaves {region:?}"))
            })?;
            let red = linalg::reduce(&big, &rdims, &dst_pos);
            acc += red.iter().map(|z| z.norm_sqr()).sum::<f64>();
        }
    }
    Ok((acc * d_src as f64 / d_dst as f64).sqrt())
}

/// Nearest p/q with p and q dividing `g`.
fn snap(value: f64, g: usize) -> (RationalIndex, f64) {
    let divisors: Vec<usize> = (1..=g).filter(|d| g.is_multiple_of(*d)).collect();
    let mut best = (RationalIndex::one(), f64::INFINITY);
    for &p in &divisors {
        for &q in &divisors {
            let dist = (value - p as f64 / q as f64).abs();
            if dist < best.1 {
                best = (RationalIndex::new(p as u64, q as u64), dist);
            }
        }
    }
    best
}

/// ind α = η(α(𝒜_R), 𝒜_L) / η(α(𝒜_L), 𝒜_R) across the cut in front of block `cut`.
pub fn index_overlap(sys: &QcaSystem, cut: usize) -> Result<OverlapReport> {
    index_overlap_with(sys, cut, &Tolerances::default())
}

pub fn index_overlap_with(sys: &QcaSystem, cut: usize, tol: &Tolerances) -> Result<OverlapReport> {
    let s = sys.structure();
    let gr = Grouping::nearest_neighbor(sys)?;
    let c = (cut % gr.count) as i64;
    let l = gr.interval(s, c - 1, 1)?;
    let r = gr.interval(s, c, 1)?;
    let eta_forward = eta_image(sys, &l, &r, &gr.interval(s, c - 2, 3)?)?;
    let eta_backward = eta_image(sys, &r, &l, &gr.interval(s, c - 1, 3)?)?;
    let raw = eta_backward / eta_forward;
    let g = gr.dim(s, c - 1).gcd(&gr.dim(s, c));
    let (index, dist) = snap(raw, g);
    if dist > tol.snap {
        return Err(Error::Snap {
            value: raw,
            distance: dist,
        });
    }
    Ok(OverlapReport {
        grouping: gr,
        cut: c as usize,
        eta_forward,
        eta_backward,
        raw,
        snap_distance: dist,
        index,
    })
}

/// √(Tr((UᴳUᴳ*)²)/(d_L d_R)) with ⟨ia|Uᴳ|jb⟩ = ⟨ja|U|ib⟩.
pub fn eta_partial_transpose(u: &Mat, d_l: usize, d_r: usize) -> Result<f64> {
    let n = d_l * d_r;
    if u.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "unitary of shape {:?} on {d_l}⊗{d_r}",
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
    let ug = Mat::from_fn(n, n, |ia, jb| {
        let (i, a) = (ia / d_r, ia % d_r);
        let (j, b) = (jb / d_r, jb % d_r);
        u[(j * d_r + a, i * d_r + b)]
    });
    let p = &ug * ug.adjoint();
    let t: C64 = (&p * &p).trace();
    Ok((t.re / n as f64).sqrt())
}

/// Half-neighbourhood form α(𝒜_x) ⊂ 𝒜_{x−1} ⊗ 𝒜_x: n(x) with 𝒩_x ≅ M_{n(x)}.
pub fn half_neighborhood_index(sys: &QcaSystem) -> Result<RationalIndex> {
    let s = sys.structure();
    let n_cells = s.cells();
    let mut ns = Vec::with_capacity(n_cells);
    let mut ts = Vec::with_capacity(n_cells);
    for x in 0..n_cells {
        let left = s.wrap(x as i64 - 1);
        let images: Vec<LocalizedOperator> = cell_generators(s, x)
            .iter()
            .map(|g| sys.heisenberg(g))
            .collect::<Result<_>>()?;
        for y in &images {
            if y.cells(s).iter().any(|&c| c != x && c != left) {
                return Err(Error::Structure(format!(
                    "α(𝒜_{x}) is not inside 𝒜_{left} ⊗ 𝒜_{x}"
                )));
            }
        }
        let refs: Vec<&LocalizedOperator> = images.iter().collect();
        let (na, _) = spp(s, &refs, &CellInterval::new(s, left as i64, 1)?)?;
        let (ta, _) = spp(s, &refs, &CellInterval::new(s, x as i64, 1)?)?;
        ns.push(full_size(&na, &format!("𝒩_{x}"))?);
        ts.push(full_size(&ta, &format!("𝒯_{x}"))?);
    }
    for x in 0..n_cells {
        let next = (x + 1) % n_cells;
        if s.dim(x) != ns[x] * ts[x] || s.dim(x) != ts[x] * ns[next] {
            return Err(Error::Check(format!(
                "d({x}) = {} but n({x})t({x}) = {} and t({x})n({next}) = {}",
                s.dim(x),
                ns[x] * ts[x],
                ts[x] * ns[next]
            )));
        }
    }
    if ns.iter().any(|&n| n != ns[0]) {
        return Err(Error::CutDependent(format!("n(x) = {ns:?}")));
    }
    Ok(RationalIndex::new(ns[0] as u64, 1))
}

/// Outcome of iterating α on the algebra of cells x, x+1.
#[derive(Clone, Debug, Serialize)]
pub struct NoPropagation {
    pub cell: usize,
    pub window_start: usize,
    pub window_len: usize,
    pub steps: usize,
    /// Whether α^n(𝒜_x ⊗ 𝒜_{x+1}) stayed in the window for every n ≤ steps.
    pub certified: bool,
    /// Widest support seen.
    pub widest: usize,
}

impl NoPropagation {
    /// Index 1 when certified.
    pub fn index(&self) -> Option<RationalIndex> {
        self.certified.then(RationalIndex::one)
    }
}

/// Iterates α up to N/2 times on the generators of cells x and x+1 and checks that
/// the supports stay in [x − margin, x + 1 + margin].
pub fn no_propagation_certificate(
    sys: &QcaSystem,
    cell: usize,
    margin: usize,
) -> Result<NoPropagation> {
    let s = sys.structure();
    let n = s.cells();
    if 2 + 2 * margin >= n {
        return Err(Error::Region(format!(
            "window of {} cells on a ring of {n}",
            2 + 2 * margin
        )));
    }
    let window = CellInterval::new(s, cell as i64 - margin as i64, 2 + 2 * margin)?;
    let mut ops: Vec<LocalizedOperator> = [cell, (cell + 1) % n]
        .iter()
        .flat_map(|&c| cell_generators(s, c))
        .collect();
    let steps = n / 2;
    let mut widest = 1;
    let mut certified = true;
    'outer: for _ in 0..steps {
        for op in ops.iter_mut() {
            *op = sys.heisenberg(op)?;
            widest = widest.max(op.interval().len);
            if window.positions(s, &op.cells(s)).is_err() {
                certified = false;
                break 'outer;
            }
        }
    }
    Ok(NoPropagation {
        cell,
        window_start: window.start,
        window_len: window.len,
        steps,
        certified,
        widest,
    })
}
