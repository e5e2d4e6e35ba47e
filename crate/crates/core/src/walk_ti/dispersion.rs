use super::LaurentUnitary;
use crate::error::{Error, Result};
use crate::linalg::{self, Mat, C64};
use std::f64::consts::PI;

/// Eigenphase branches ω_k(p) followed continuously around the Brillouin zone.
#[derive(Clone, Debug)]
pub struct DispersionData {
    pub momenta: Vec<f64>,
    /// Unwrapped eigenphases, indexed `[point][branch]`.
    pub omega: Vec<Vec<f64>>,
    /// dω/dp, indexed `[point][branch]`.
    pub velocity: Vec<Vec<f64>>,
    /// Eigenvectors, one column per branch.
    pub vectors: Vec<Mat>,
    /// Phase advance of each branch over one full turn, in units of 2π.
    pub branch_winding: Vec<f64>,
    pub winding_sum: i64,
    pub min_overlap: f64,
}

impl DispersionData {
    pub fn branches(&self) -> usize {
        self.omega.first().map_or(0, |w| w.len())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("p,branch,omega,velocity\n");
        for (j, p) in self.momenta.iter().enumerate() {
            for k in 0..self.branches() {
                out.push_str(&format!(
                    "{p:.12},{k},{:.12},{:.12}\n",
                    self.omega[j][k], self.velocity[j][k]
                ));
            }
        }
        out
    }
}

#[derive(Clone)]
struct Point {
    p: f64,
    phases: Vec<f64>,
    vectors: Mat,
}

const MATCH_OVERLAP: f64 = 0.5;
const MAX_JUMP: f64 = PI / 4.0;
const MAX_REFINE: usize = 14;
const CLUSTER: f64 = 1e-6;

fn wrap_angle(x: f64) -> f64 {
    let y = (x + PI).rem_euclid(2.0 * PI) - PI;
    if y <= -PI {
        y + 2.0 * PI
    } else {
        y
    }
}

fn eigensystem(u: &LaurentUnitary, p: f64) -> (Vec<C64>, Mat) {
    linalg::normal_eigen(&u.symbol(p))
}

/// Groups eigenvalue indices whose values lie within CLUSTER of each other.
fn clusters(vals: &[C64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, v) in vals.iter().enumerate() {
        match out.iter_mut().find(|c| (vals[c[0]] - v).norm() < CLUSTER) {
            Some(c) => c.push(i),
            None => out.push(vec![i]),
        }
    }
    out
}

/// Matches branches at `from` to the eigensystem at `p`; returns the new point and the
/// smallest accepted overlap, or `None` with that overlap when matching fails.
fn match_step(u: &LaurentUnitary, from: &Point, p: f64) -> (Option<Point>, f64) {
    let d = u.d();
    let (vals, vecs) = eigensystem(u, p);
    let groups = clusters(&vals);
    let projections: Vec<Mat> = groups
        .iter()
        .map(|g| {
            let b = Mat::from_fn(d, g.len(), |i, j| vecs[(i, g[j])]);
            &b * b.adjoint()
        })
        .collect();
    let mut pairs = Vec::new();
    for a in 0..d {
        let v = from.vectors.column(a).into_owned();
        for (c, proj) in projections.iter().enumerate() {
            pairs.push(((proj * &v).norm(), a, c));
        }
    }
    pairs.sort_by(|x, y| y.0.partial_cmp(&x.0).unwrap());
    let mut capacity: Vec<usize> = groups.iter().map(|g| g.len()).collect();
    let mut assigned: Vec<Option<(usize, f64)>> = vec![None; d];
    for (ov, a, c) in pairs {
        if assigned[a].is_none() && capacity[c] > 0 {
            assigned[a] = Some((c, ov));
            capacity[c] -= 1;
        }
    }
    let min_overlap = assigned
        .iter()
        .map(|x| x.unwrap().1)
        .fold(f64::INFINITY, f64::min);
    if min_overlap < MATCH_OVERLAP {
        return (None, min_overlap);
    }
    let mut phases = vec![0.0; d];
    let mut vectors = linalg::zeros(d, d);
    for a in 0..d {
        let (c, _) = assigned[a].unwrap();
        let lam = vals[groups[c][0]];
        let step = wrap_angle(linalg::principal_phase(lam) - from.phases[a]);
        if step.abs() >= MAX_JUMP {
            return (None, min_overlap);
        }
        phases[a] = from.phases[a] + step;
        let mut v = &projections[c] * from.vectors.column(a);
        // orthogonalize against branches already placed in the same cluster
        for b in 0..a {
            if assigned[b].unwrap().0 == c {
                let w = vectors.column(b).into_owned();
                let ov = w.dotc(&v);
                v -= w * ov;
            }
        }
        let n = v.norm();
        if n < 1e-8 {
            return (None, min_overlap);
        }
        vectors.set_column(a, &(v / C64::new(n, 0.0)));
    }
    (Some(Point { p, phases, vectors }), min_overlap)
}

/// Walks from `from` to momentum `to`, halving the interval until every step matches.
fn advance(
    u: &LaurentUnitary,
    from: &Point,
    to: f64,
    depth: usize,
    grid: usize,
    out: &mut Vec<Point>,
    worst: &mut f64,
) -> Result<()> {
    let (next, ov) = match_step(u, from, to);
    match next {
        Some(pt) => {
            *worst = worst.min(ov);
            out.push(pt);
            Ok(())
        }
        None if depth < MAX_REFINE => {
            let mid = 0.5 * (from.p + to);
            advance(u, from, mid, depth + 1, grid, out, worst)?;
            let last = out.last().unwrap().clone();
            advance(u, &last, to, depth + 1, grid, out, worst)
        }
        None => Err(Error::BranchMatching {
            p: to,
            overlap: ov,
            grid,
        }),
    }
}

fn velocities(u: &LaurentUnitary, pt: &Point) -> Vec<f64> {
    let du = u.symbol_derivative(pt.p);
    (0..u.d())
        .map(|a| {
            let v = pt.vectors.column(a).into_owned();
            let lam = C64::from_polar(1.0, pt.phases[a]);
            (v.dotc(&(&du * &v)) / (C64::new(0.0, 1.0) * lam)).re
        })
        .collect()
}

/// Dispersion relation on the grid p_j = 2π(j + ½)/G, refined where branch matching
/// needs it.
pub fn dispersion(u: &LaurentUnitary, grid: usize) -> Result<DispersionData> {
    if grid < 2 {
        return Err(Error::Structure(
            "dispersion grid needs at least two points".into(),
        ));
    }
    let d = u.d();
    let step = 2.0 * PI / grid as f64;
    let p0 = 0.5 * step;
    let (vals, vecs) = eigensystem(u, p0);
    let start = Point {
        p: p0,
        phases: vals.iter().map(|&z| linalg::principal_phase(z)).collect(),
        vectors: vecs,
    };
    let mut points = vec![start.clone()];
    let mut worst = 1.0f64;
    for j in 1..=grid {
        let from = points.last().unwrap().clone();
        advance(
            u,
            &from,
            p0 + j as f64 * step,
            0,
            grid,
            &mut points,
            &mut worst,
        )?;
    }
    // the final point sits at p0 + 2π and closes the loop
    let end = points.pop().unwrap();
    let branch_winding: Vec<f64> = (0..d)
        .map(|a| (end.phases[a] - start.phases[a]) / (2.0 * PI))
        .collect();
    let total: f64 = branch_winding.iter().sum();
    let winding_sum = total.round() as i64;
    if (total - winding_sum as f64).abs() > 1e-6 {
        return Err(Error::NonInteger {
            value: total,
            distance: (total - winding_sum as f64).abs(),
        });
    }
    let velocity = points.iter().map(|pt| velocities(u, pt)).collect();
    Ok(DispersionData {
        momenta: points.iter().map(|pt| pt.p).collect(),
        omega: points.iter().map(|pt| pt.phases.clone()).collect(),
        velocity,
        vectors: points.into_iter().map(|pt| pt.vectors).collect(),
        branch_winding,
        winding_sum,
        min_overlap: worst,
    })
}

/// ⟨X(t)⟩ − ⟨X(0)⟩ for the walk on a ring of `ring` sites, started at site 0 with the
/// internal state maximally mixed.
pub fn simulate_mean_position(u: &LaurentUnitary, steps: usize, ring: usize) -> Result<f64> {
    let l = u.width();
    if ring <= 2 * l * steps + 2 {
        return Err(Error::Region(format!(
            "ring of {ring} sites is too small for {steps} steps of width {l}"
        )));
    }
    let d = u.d();
    let w = u.to_ring(ring)?;
    let n = ring * d;
    let position = |site: usize| -> f64 {
        let x = site as i64;
        if 2 * x > ring as i64 {
            (x - ring as i64) as f64
        } else {
            x as f64
        }
    };
    let mut acc = 0.0;
    for i in 0..d {
        let mut psi = nalgebra::DVector::<C64>::zeros(n);
        psi[i] = linalg::ONE;
        for _ in 0..steps {
            psi = w.matrix() * psi;
        }
        for site in 0..ring {
            let prob: f64 = (0..d).map(|k| psi[site * d + k].norm_sqr()).sum();
            acc += prob * position(site);
        }
    }
    Ok(acc / d as f64)
}
