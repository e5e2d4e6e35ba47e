//! Acceptance criteria 1–15, one PASS/FAIL line each.
// `!(x <= tol)` is meant to fail on NaN
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use lattice_index::classical::{
    gauge_invariance_check, quantize, welch_index, welch_stability, ClassicalRule,
};
use lattice_index::linalg::{self, Mat, C64};
use lattice_index::operator_algebra::{conjugate_algebra, overlap_eta, MatrixAlgebra, TensorSplit};
use lattice_index::qca::{
    doubled_implementation_qca, eta_partial_transpose, index_overlap, index_support,
    index_three_cell_grouped, no_propagation_certificate, two_layer_implementation_qca,
    LocalizedOperator, QcaSystem, RationalIndex, TensorCellStructure,
};
use lattice_index::walk::{
    connect_to_identity, crossover, decouple, doubled_implementation, index_all_cuts,
    random_layered_walk, raw_index, two_layer_implementation, BandedUnitary, PartitionedLayer,
    SumCellStructure,
};
use lattice_index::walk_ti::{
    dispersion, factorize, index_coefficient, index_determinant, index_winding_quadrature,
    simulate_mean_position, ti_path, LaurentUnitary,
};
use lattice_index::Error;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($msg:tt)+) => {
        if !$cond {
            return Err(format!($($msg)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: Result<T, E>, what: &str) -> Result<T, String> {
    r.map_err(|e| format!("{what}: {e}"))
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Nearest-neighbour view of a walk.
fn grouped(u: &BandedUnitary) -> Result<BandedUnitary, String> {
    match u.band() {
        0 | 1 => Ok(u.clone()),
        g => ok(u.regroup(g), "regroup"),
    }
}

fn criterion_1() -> Outcome {
    for d in 1..=4 {
        for m in [8, 12] {
            let u = ok(BandedUnitary::shift(m, d, 1), "shift")?;
            let k = ok(index_all_cuts(&u), "index")?;
            ensure!(k == d as i64, "ind S_{d} on {m} sites = {k}");
        }
    }
    for d in [2, 3] {
        let (k, _) = ok(
            index_support(&ok(QcaSystem::shift(6, d, 1), "σ")?),
            "support",
        )?;
        ensure!(k == RationalIndex::new(d as u64, 1), "ind σ_{d} = {k}");
    }
    Ok("S_1..S_4 on M = 8, 12 and σ_2, σ_3 on N = 6".into())
}

fn criterion_2() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..200u64 {
        let mut r = rng(seed);
        let d = r.gen_range(1..=3);
        let k = r.gen_range(-2..=2i64);
        let u = ok(random_layered_walk(12, d, k, &mut r), "walk")?;
        let want = k * d as i64;
        for cut in 0..12 {
            let raw = raw_index(&u, cut);
            worst = worst.max((raw - raw.round()).abs());
            ensure!(
                (raw - want as f64).abs() <= 1e-8,
                "seed {seed} cut {cut}: raw {raw} vs {want}"
            );
        }
    }
    Ok(format!("200 walks, worst integrality residual {worst:.1e}"))
}

fn criterion_3() -> Outcome {
    for seed in 0..50u64 {
        let mut r = rng(1000 + seed);
        let d = r.gen_range(1..=2);
        let (k1, k2) = (r.gen_range(-1..=1i64), r.gen_range(-1..=1i64));
        let u = ok(random_layered_walk(16, d, k1, &mut r), "u")?;
        let v = ok(random_layered_walk(16, d, k2, &mut r), "v")?;
        let (iu, iv) = (
            ok(index_all_cuts(&u), "ind u")?,
            ok(index_all_cuts(&v), "ind v")?,
        );
        let c = ok(index_all_cuts(&ok(u.compose(&v), "compose")?), "ind uv")?;
        ensure!(c == iu + iv, "seed {seed}: ind(uv) = {c} vs {iu} + {iv}");
        let s = ok(
            index_all_cuts(&ok(u.direct_sum(&v), "direct sum")?),
            "ind u⊕v",
        )?;
        ensure!(s == iu + iv, "seed {seed}: ind(u⊕v) = {s} vs {iu} + {iv}");
        let a = ok(index_all_cuts(&u.adjoint()), "ind u*")?;
        ensure!(a == -iu, "seed {seed}: ind(u*) = {a} vs {}", -iu);
    }
    Ok("50 pairs: compose, direct sum, adjoint".into())
}

fn criterion_4() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..50u64 {
        let mut r = rng(2000 + seed);
        let d = r.gen_range(1..=2);
        let u = ok(random_layered_walk(12, d, 0, &mut r), "walk")?;
        let g = grouped(&u)?;
        let dec = ok(decouple(&g, 0), "decouple")?;
        ensure!(
            dec.residual <= 1e-9,
            "seed {seed}: decoupler residual {:.2e}",
            dec.residual
        );
        ensure!(
            dec.window.len() <= 2,
            "seed {seed}: decoupler on {} grouped cells",
            dec.window.len()
        );
        let tl = ok(two_layer_implementation(&g), "two-layer")?;
        ensure!(
            tl.reconstruction_residual <= 1e-9,
            "seed {seed}: reconstruction {:.2e}",
            tl.reconstruction_residual
        );
        for layer in [&tl.first, &tl.second] {
            for (sites, _) in &layer.blocks {
                ensure!(sites.len() <= 2, "seed {seed}: block on {sites:?}");
                if sites.len() == 2 {
                    ensure!(
                        g.structure().distance(sites[0], sites[1]) == 1,
                        "seed {seed}: block on {sites:?}"
                    );
                }
            }
        }
        worst = worst.max(dec.residual).max(tl.reconstruction_residual);
    }
    let shift = ok(BandedUnitary::shift(12, 1, 1), "shift")?;
    ensure!(
        matches!(decouple(&shift, 0), Err(Error::WrongIndex { .. })),
        "index-1 decoupling accepted"
    );
    ensure!(
        matches!(
            two_layer_implementation(&shift),
            Err(Error::WrongIndex { .. })
        ),
        "index-1 two-layer accepted"
    );
    Ok(format!(
        "50 walks, worst residual {worst:.1e}; index 1 rejected"
    ))
}

fn criterion_5() -> Outcome {
    for seed in 0..20u64 {
        let mut r = rng(3000 + seed);
        let u = grouped(&ok(
            random_layered_walk(12, r.gen_range(1..=2), 0, &mut r),
            "walk",
        )?)?;
        let path = ok(connect_to_identity(&u), "path")?;
        for t in [0.0, 0.25, 0.5, 0.75, 1.0] {
            let v = ok(path.sample(t), "sample")?;
            let res = linalg::unitarity_residual(v.matrix());
            ensure!(res <= 1e-9, "seed {seed} t {t}: unitarity {res:.2e}");
            ensure!(v.band() <= 2, "seed {seed} t {t}: band {}", v.band());
            if t == 0.0 {
                let e = linalg::dist(v.matrix(), &linalg::eye(v.matrix().nrows()));
                ensure!(e <= 1e-9, "seed {seed}: start {e:.2e} from identity");
            }
            if t == 1.0 {
                let e = linalg::dist(v.matrix(), u.matrix());
                ensure!(e <= 1e-9, "seed {seed}: end {e:.2e} from U");
            }
        }
    }
    Ok("20 paths at 5 parameters".into())
}

fn criterion_6() -> Outcome {
    let mut worst = 0.0f64;
    for seed in 0..100u64 {
        let mut r = rng(4000 + seed);
        let d = r.gen_range(1..=4);
        let w = r.gen_range(1..=4);
        let u = ok(LaurentUnitary::random_factored(d, w, &mut r), "walk")?;
        let c = ok(index_coefficient(&u), "coefficient")?;
        let (det, _) = ok(index_determinant(&u), "determinant")?;
        ensure!(
            c == det,
            "seed {seed}: coefficient {c} vs determinant {det}"
        );
        let q = ok(index_winding_quadrature(&u, 2048), "quadrature")?;
        worst = worst.max((q - c as f64).abs());
        ensure!(
            (q - c as f64).abs() <= 1e-6,
            "seed {seed}: quadrature {q} vs {c}"
        );
        let disp = ok(dispersion(&u, 256), "dispersion")?;
        ensure!(
            disp.winding_sum == c,
            "seed {seed}: dispersion {} vs {c}",
            disp.winding_sum
        );
    }
    Ok(format!("100 walks, worst quadrature error {worst:.1e}"))
}

fn criterion_7() -> Outcome {
    let mut cases = vec![
        ("S_2".to_string(), LaurentUnitary::shift(2)),
        ("Ŵ_1".to_string(), LaurentUnitary::partial_shift(2, 1)),
        ("Ŵ_−2".to_string(), LaurentUnitary::partial_shift(2, -2)),
    ];
    for seed in 0..10u64 {
        let mut r = rng(5000 + seed);
        let d = r.gen_range(1..=3);
        cases.push((
            format!("random {seed}"),
            ok(LaurentUnitary::random_factored(d, 2, &mut r), "walk")?,
        ));
    }
    let mut worst = 0.0f64;
    for (name, u) in &cases {
        let speed = ok(index_coefficient(u), "index")? as f64 / u.d() as f64;
        for t in 1..=6usize {
            let ring = 2 * u.width() * t + 4;
            let x = ok(simulate_mean_position(u, t, ring), "simulation")?;
            worst = worst.max((x - t as f64 * speed).abs());
            ensure!(
                (x - t as f64 * speed).abs() <= 1e-8,
                "{name} t {t}: {x} vs {}",
                t as f64 * speed
            );
        }
    }
    Ok(format!(
        "{} walks, t ≤ 6, worst deviation {worst:.1e}",
        cases.len()
    ))
}

fn criterion_8() -> Outcome {
    for seed in 0..50u64 {
        let mut r = rng(6000 + seed);
        let d = r.gen_range(1..=3);
        let u = ok(LaurentUnitary::random_factored(d, 3, &mut r), "walk")?;
        let f = ok(factorize(&u), "factorize")?;
        let mut worst = 0.0f64;
        for j in 0..256 {
            let p = 2.0 * std::f64::consts::PI * j as f64 / 256.0;
            worst = worst.max(linalg::dist(&u.symbol(p), &f.symbol(p)));
        }
        ensure!(worst <= 1e-8, "seed {seed}: reconstruction {worst:.2e}");
        let k = ok(index_coefficient(&u), "index")?;
        ensure!(
            f.shift_sum() == k,
            "seed {seed}: Σ m_k = {} vs {k}",
            f.shift_sum()
        );
        // contract the index-0 part: u · Ŵ-factors with the opposite total shift
        let zero = if k == 0 {
            u.clone()
        } else {
            let back = LaurentUnitary::partial_shift(d, -k);
            ok(u.compose(&back), "compose")?
        };
        let fz = ok(factorize(&zero), "factorize index 0")?;
        for t in [0.25, 0.5, 0.75] {
            let p = ok(ti_path(&zero, t), "path")?;
            ensure!(
                p.paraunitarity_residual() <= 1e-9,
                "seed {seed} t {t}: paraunitarity {:.2e}",
                p.paraunitarity_residual()
            );
            ensure!(
                p.degree(1e-12) <= fz.max_width(),
                "seed {seed} t {t}: degree {} > {}",
                p.degree(1e-12),
                fz.max_width()
            );
        }
    }
    Ok("50 factorizations and contractions".into())
}

fn qca_routes(sys: &QcaSystem, label: &str) -> Result<RationalIndex, String> {
    let (a, rep) = ok(index_support(sys), &format!("{label} support"))?;
    let b = ok(
        index_three_cell_grouped(sys),
        &format!("{label} three-cell"),
    )?;
    let c = ok(index_overlap(sys, 0), &format!("{label} overlap"))?.index;
    ensure!(
        a == b && b == c,
        "{label}: support {a}, three-cell {b}, overlap {c}"
    );
    ensure!(
        rep.max_commutator <= 1e-9,
        "{label}: commutator {:.2e}",
        rep.max_commutator
    );
    let (d, r) = (&rep.grouped_dims, &rep.ranks);
    let k = d.len();
    for x in 0..k / 2 {
        let (e0, e1, e2) = (2 * x, 2 * x + 1, (2 * x + 2) % k);
        ensure!(
            d[e0] * d[e1] == r[e0] * r[e1],
            "{label}: d(2x)d(2x+1) ≠ r(2x)r(2x+1) at x = {x}"
        );
        ensure!(
            r[e1] * r[e2] == d[e1] * d[e2],
            "{label}: r(2x+1)r(2x+2) ≠ d(2x+1)d(2x+2) at x = {x}"
        );
    }
    Ok(a)
}

fn criterion_9() -> Outcome {
    let q2 = ok(TensorCellStructure::uniform(6, 2), "structure")?;
    let fixed = [
        (
            "identity",
            QcaSystem::identity(q2.clone()),
            RationalIndex::one(),
        ),
        (
            "σ_2",
            ok(QcaSystem::shift(6, 2, 1), "σ_2")?,
            RationalIndex::new(2, 1),
        ),
        (
            "σ_2⊗σ_3⁻¹",
            ok(
                QcaSystem::factor_shift(6, vec![2, 3], vec![1, -1]),
                "factor shift",
            )?,
            RationalIndex::new(2, 3),
        ),
        (
            "cluster",
            ok(QcaSystem::cluster(6), "cluster")?,
            RationalIndex::one(),
        ),
    ];
    for (label, sys, want) in &fixed {
        let got = qca_routes(sys, label)?;
        ensure!(got == *want, "{label}: {got} vs {want}");
    }
    for seed in 0..50u64 {
        let sys = ok(
            QcaSystem::random_two_layer(q2.clone(), &mut rng(7000 + seed)),
            "circuit",
        )?;
        let got = qca_routes(&sys, &format!("two-layer seed {seed}"))?;
        ensure!(got == RationalIndex::one(), "two-layer seed {seed}: {got}");
    }
    Ok("4 fixtures and 50 two-layer circuits, three routes agree".into())
}

fn criterion_10() -> Outcome {
    let mut worst = 0.0f64;
    let mut smallest = f64::INFINITY;
    for seed in 0..50u64 {
        let mut r = rng(8000 + seed);
        let (dl, dr) = (r.gen_range(2..=3), r.gen_range(2..=3));
        let u = linalg::random_unitary(dl * dr, &mut r);
        let split = TensorSplit::new(vec![dl, dr]);
        let al = MatrixAlgebra::factor(&split, &[0]);
        let ar = MatrixAlgebra::factor(&split, &[1]);
        let a = ok(overlap_eta(&conjugate_algebra(&u, &al), &ar), "overlap η")?;
        let b = ok(eta_partial_transpose(&u, dl, dr), "partial transpose η")?;
        let swapped = linalg::permute_factors(&u, &[dl, dr], &[1, 0]);
        let c = ok(eta_partial_transpose(&swapped, dr, dl), "swapped η")?;
        worst = worst.max((a - b).abs()).max((b - c).abs());
        smallest = smallest.min(a).min(b);
        ensure!((a - b).abs() <= 1e-9, "seed {seed}: {a} vs {b}");
        ensure!((b - c).abs() <= 1e-9, "seed {seed}: L↔R {b} vs {c}");
        ensure!(
            a >= 1.0 - 1e-10 && b >= 1.0 - 1e-10,
            "seed {seed}: η below 1"
        );
    }
    Ok(format!(
        "50 gates, worst deviation {worst:.1e}, smallest η {smallest:.3}"
    ))
}

fn criterion_11() -> Outcome {
    let sys = ok(QcaSystem::cluster(6), "cluster")?;
    let s = sys.structure().clone();
    let c = |re: f64| C64::new(re, 0.0);
    let x = Mat::from_row_slice(2, 2, &[c(0.0), c(1.0), c(1.0), c(0.0)]);
    let z = Mat::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), c(-1.0)]);
    for i in 0..6 {
        let img = ok(
            sys.heisenberg(&ok(LocalizedOperator::single(&s, i, x.clone()), "op")?),
            "image",
        )?;
        let want = ok(
            LocalizedOperator::new(
                &s,
                (i + 5) % 6,
                3,
                linalg::kron_all(&[z.clone(), x.clone(), z.clone()]),
            ),
            "zxz",
        )?;
        let e = ok(img.distance(&s, &want), "distance")?;
        ensure!(e <= 1e-12, "σ_x at {i}: distance {e:.2e}");
        let zi = ok(LocalizedOperator::single(&s, i, z.clone()), "op")?;
        let img = ok(sys.heisenberg(&zi), "image")?;
        let e = ok(img.distance(&s, &zi), "distance")?;
        ensure!(e <= 1e-12, "σ_z at {i}: distance {e:.2e}");
    }
    let got = qca_routes(&sys, "cluster")?;
    ensure!(got == RationalIndex::one(), "index {got}");
    let tl = ok(two_layer_implementation_qca(&sys), "two-layer")?;
    ensure!(
        tl.reconstruction_residual <= 1e-9,
        "reconstruction {:.2e}",
        tl.reconstruction_residual
    );
    Ok("ZXZ images, index 1/1, two layers".into())
}

fn criterion_12() -> Outcome {
    let rules = [
        (
            "shift q=2",
            ok(ClassicalRule::shift(2, 1), "rule")?,
            RationalIndex::new(2, 1),
        ),
        (
            "shift q=3",
            ok(ClassicalRule::shift(3, 1), "rule")?,
            RationalIndex::new(3, 1),
        ),
        (
            "identity q=3",
            ok(ClassicalRule::identity(3), "rule")?,
            RationalIndex::one(),
        ),
        (
            "partitioned",
            ok(ClassicalRule::partitioned_swap(2), "rule")?,
            RationalIndex::one(),
        ),
    ];
    let mut r = rng(9000);
    for (label, rule, want) in &rules {
        let w = rule.radius().max(rule.inv_radius()).max(1);
        let iw = ok(welch_index(rule, w), "welch")?.index;
        ensure!(iw == *want, "{label}: i_W = {iw} vs {want}");
        ensure!(
            ok(welch_stability(rule, w), "stability")?,
            "{label}: i_W changes from r = {w} to {}",
            w + 1
        );
        let n = 6;
        let (iq, _) = ok(
            index_support(&ok(quantize(rule, n), "quantize")?),
            "quantized index",
        )?;
        ensure!(iq == iw, "{label}: ind quantized {iq} vs i_W {iw}");
        let phases: Vec<Vec<C64>> = (0..n)
            .map(|_| {
                (0..rule.q())
                    .map(|_| C64::from_polar(1.0, r.gen_range(-3.0..3.0)))
                    .collect()
            })
            .collect();
        let g = ok(gauge_invariance_check(rule, n, &phases), "gauge")?;
        ensure!(
            g.holds,
            "{label}: gauge check failed ({} → {})",
            g.index_rule,
            g.index_gauged
        );
    }
    Ok("shift, identity, partitioned: i_W, stability, quantization, gauge".into())
}

fn criterion_13() -> Outcome {
    let mut r = rng(10_000);
    let ws = ok(SumCellStructure::uniform(6, 2), "structure")?;
    let layer = ok(
        PartitionedLayer::random_pairs(ws, 0, &mut r).and_then(|l| l.to_banded()),
        "layer",
    )?;
    let u = ok(
        BandedUnitary::shift(6, 2, 1).and_then(|sh| sh.compose(&layer)),
        "walk",
    )?;
    let d = ok(doubled_implementation(&u), "doubled walk")?;
    ensure!(
        d.product_residual <= 1e-9,
        "walk product {:.2e}",
        d.product_residual
    );
    let s = ok(TensorCellStructure::uniform(4, 2), "structure")?;
    let systems = [
        ("σ_2", ok(QcaSystem::shift(4, 2, 1), "σ")?),
        ("cluster", ok(QcaSystem::cluster(4), "cluster")?),
        (
            "two-layer",
            ok(QcaSystem::random_two_layer(s, &mut r), "circuit")?,
        ),
    ];
    for (label, sys) in &systems {
        let d = ok(doubled_implementation_qca(sys), label)?;
        ensure!(
            d.forward_residual <= 1e-9,
            "{label}: β[A⊗1] residual {:.2e}",
            d.forward_residual
        );
        ensure!(
            d.backward_residual <= 1e-9,
            "{label}: β[1⊗B] residual {:.2e}",
            d.backward_residual
        );
    }
    Ok("walk M = 6, d = 2; automata σ_2, cluster, two-layer on N = 4".into())
}

fn criterion_14() -> Outcome {
    let s = ok(SumCellStructure::uniform(24, 1), "structure")?;
    for seed in 0..20u64 {
        let mut r = rng(11_000 + seed);
        let k = r.gen_range(-1..=1i64);
        let mk = |r: &mut ChaCha8Rng| -> Result<BandedUnitary, String> {
            let a = ok(
                PartitionedLayer::random_pairs(s.clone(), 0, r).and_then(|l| l.to_banded()),
                "layer",
            )?;
            ok(
                BandedUnitary::shift(24, 1, k)
                    .and_then(|sh| sh.compose(&a))
                    .and_then(|w| w.regroup(2)),
                "walk",
            )
        };
        let u1 = mk(&mut r)?;
        let u2 = mk(&mut r)?;
        let c = ok(crossover(&u1, &u2, 0), &format!("seed {seed}"))?;
        ensure!(
            c.window_cells() <= 2,
            "seed {seed}: splice window of {} cells",
            c.window_cells()
        );
        let m = u1.sites();
        for (arc, u) in [(&c.left_arc, &u1), (&c.right_arc, &u2)] {
            for &y in arc.iter() {
                for x in 0..m {
                    let e = linalg::dist(&c.walk.block(x, y), &u.block(x, y));
                    ensure!(e <= 1e-9, "seed {seed}: block ({x}, {y}) off by {e:.2e}");
                }
            }
        }
        ensure!(
            ok(index_all_cuts(&c.walk), "index")? == k,
            "seed {seed}: crossover index"
        );
    }
    let a = ok(BandedUnitary::shift(12, 1, 1), "shift")?;
    let b = BandedUnitary::identity(a.structure().clone());
    ensure!(
        matches!(crossover(&a, &b, 0), Err(Error::IndexMismatch { .. })),
        "unequal indices accepted"
    );
    Ok("20 pairs spliced; unequal indices rejected".into())
}

fn criterion_15() -> Outcome {
    for seed in 0..20u64 {
        let mut r = rng(12_000 + seed);
        let n = if seed % 2 == 1 { 8 } else { 6 };
        let d = if n == 8 { 2 } else { r.gen_range(2..=3) };
        let s = ok(TensorCellStructure::uniform(n, d), "structure")?;
        let mut sys = ok(QcaSystem::random_two_layer(s, &mut r), "circuit")?;
        if seed % 2 == 1 {
            sys = ok(
                sys.compose(&ok(QcaSystem::shift(n, d, 1), "shift")?),
                "compose",
            )?;
        }
        let (a, _) = ok(index_support(&sys), "index")?;
        let (b, _) = ok(index_support(&sys.theta_conjugate()), "Θ index")?;
        ensure!(a == b, "seed {seed}: ind α = {a}, ind ΘαΘ = {b}");
    }
    let s = ok(TensorCellStructure::uniform(8, 2), "structure")?;
    let sys = ok(
        QcaSystem::random_local_phases(s, &mut rng(12_500)),
        "phases",
    )?;
    let cert = ok(no_propagation_certificate(&sys, 2, 1), "certificate")?;
    ensure!(
        cert.index() == Some(RationalIndex::one()),
        "local phases not certified (widest {})",
        cert.widest
    );
    Ok("20 circuits Θ-invariant; local phases certified index 1".into())
}

#[test]
fn acceptance() {
    let criteria: [(u32, &str, fn() -> Outcome); 15] = [
        (1, "shift indices", criterion_1),
        (2, "integrality and cut invariance", criterion_2),
        (3, "additivity", criterion_3),
        (4, "decoupling and two layers", criterion_4),
        (5, "homotopy samples", criterion_5),
        (6, "translation-invariant route agreement", criterion_6),
        (7, "mean-speed law", criterion_7),
        (8, "factorization", criterion_8),
        (9, "automaton routes", criterion_9),
        (10, "η cross-check", criterion_10),
        (11, "cluster fixture", criterion_11),
        (12, "classical rules", criterion_12),
        (13, "doubled implementations", criterion_13),
        (14, "crossover", criterion_14),
        (15, "Θ and no-propagation", criterion_15),
    ];
    let mut failed = Vec::new();
    for (n, name, f) in criteria {
        let t = Instant::now();
        let outcome = f();
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {n:>2} PASS  {name}: {detail} ({secs:.1} s)"),
            Err(why) => {
                println!("criterion {n:>2} FAIL  {name}: {why} ({secs:.1} s)");
                failed.push(n);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
