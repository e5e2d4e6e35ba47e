//! Index routes and invariant suites per system kind.

use crate::builtins::{Builtin, IndexValue};
use crate::classical::{gauge_invariance_check, quantize, welch_index, ClassicalRule};
use crate::error::{Error, Result};
use crate::io::System;
use crate::linalg::{self, C64};
use crate::qca::{
    doubled_implementation_qca, half_neighborhood_index, index_overlap_with, index_support,
    index_three_cell_grouped, two_layer_implementation_qca, QcaSystem, RationalIndex,
};
use crate::report::{ReportBuilder, VerificationReport};
use crate::tolerance::Tolerances;
use crate::walk::{
    connect_to_identity, decouple, doubled_implementation, index_rank_form, index_with, raw_index,
    two_layer_implementation, BandedUnitary, SiteInterval,
};
use crate::walk_ti::{
    dispersion, factorize, index_coefficient_with, index_determinant, index_winding_quadrature,
    ti_path, LaurentUnitary,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Quadrature grid of the winding-integral route.
pub const QUADRATURE_GRID: usize = 2048;
/// Largest ring configuration count used when quantizing a classical rule for checks.
const QUANTIZE_CHECK_MAX: u128 = 1 << 16;

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub tol: Tolerances,
    /// Momentum grid of the dispersion route.
    pub grid: usize,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tol: Tolerances::default(),
            grid: 256,
            seed: 0,
        }
    }
}

/// Whether an error only says that an optional route does not apply to this input.
fn not_applicable(e: &Error) -> bool {
    matches!(
        e,
        Error::Region(_)
            | Error::Structure(_)
            | Error::SupportOverflow(_)
            | Error::BandOverflow { .. }
    )
}

fn optional<T>(b: &mut ReportBuilder, step: &str, f: impl FnOnce() -> Result<T>) -> Option<T> {
    match f() {
        Ok(v) => Some(v),
        Err(e) if not_applicable(&e) => {
            b.check(step, true, format!("not applicable: {e}"));
            None
        }
        Err(e) => {
            b.error(step, &e);
            None
        }
    }
}

/// Index routes only.
pub fn index_report(
    subject: &str,
    sys: &System,
    expected: Option<IndexValue>,
    opts: &VerifyOptions,
) -> VerificationReport {
    run(subject, sys, expected, opts, false)
}

/// Index routes plus constructions and invariants.
pub fn verify_report(
    subject: &str,
    sys: &System,
    expected: Option<IndexValue>,
    opts: &VerifyOptions,
) -> VerificationReport {
    run(subject, sys, expected, opts, true)
}

pub fn verify_builtin(b: &Builtin, opts: &VerifyOptions) -> VerificationReport {
    verify_report(
        &format!("builtin:{}", b.name),
        &b.system,
        Some(b.expected),
        opts,
    )
}

fn run(
    subject: &str,
    sys: &System,
    expected: Option<IndexValue>,
    opts: &VerifyOptions,
    full: bool,
) -> VerificationReport {
    let canonical = sys.to_json().unwrap_or_default();
    let mut b = ReportBuilder::new(subject, sys.kind(), &canonical);
    if let Some(e) = expected {
        b.expect(e);
    }
    match sys {
        System::Walk(u) => walk_suite(&mut b, u, opts, full),
        System::WalkCircuit(c) => {
            if let Some(u) = b.attempt("circuit product", || c.to_banded()) {
                walk_suite(&mut b, &u, opts, full);
            }
        }
        System::TiWalk(u) => ti_suite(&mut b, u, opts, full),
        System::Qca(q) => qca_suite(&mut b, q, opts, full),
        System::Classical(r) => classical_suite(&mut b, r, opts, full),
    }
    b.finish()
}

fn walk_suite(b: &mut ReportBuilder, u: &BandedUnitary, opts: &VerifyOptions, full: bool) {
    let tol = &opts.tol;
    let m = u.sites();
    let mut values = Vec::with_capacity(m);
    let mut worst = 0.0f64;
    for cut in 0..m {
        let raw = raw_index(u, cut);
        worst = worst.max((raw - raw.round()).abs());
        match index_with(u, cut, tol) {
            Ok(v) => values.push(v),
            Err(e) => {
                b.error(&format!("cut {cut}"), &e);
                return;
            }
        }
    }
    b.residual("integrality", worst, tol.integrality);
    if values.iter().any(|&v| v != values[0]) {
        b.check("cut independence", false, format!("values {values:?}"));
        return;
    }
    let idx = values[0];
    b.route("cut sum (all cuts)", idx);
    let w = u.band().max(1);
    if let Some(v) = optional(b, "rank form", || {
        index_rank_form(
            u,
            SiteInterval::new(0, w),
            SiteInterval::new(w, w),
            SiteInterval::new(2 * w, w),
        )
    }) {
        b.route("rank form", v)
    }
    if !full {
        return;
    }
    if idx == 0 {
        if let Some(d) = b.attempt("decouple", || decouple(u, 0)) {
            b.residual("decoupler crossing blocks", d.residual, tol.reconstruction);
        }
        let g = u.band().max(1);
        let grouped = optional(b, "grouping", || {
            if g > 1 {
                u.regroup(g)
            } else {
                Ok(u.clone())
            }
        });
        if let Some(v) = grouped {
            if let Some(tl) = optional(b, "two-layer", || two_layer_implementation(&v)) {
                b.residual(
                    "two-layer reconstruction",
                    tl.reconstruction_residual,
                    tol.reconstruction,
                );
            }
            if let Some(path) = optional(b, "path", || connect_to_identity(&v)) {
                if let (Some(p0), Some(ph), Some(p1)) = (
                    b.attempt("path t=0", || path.sample(0.0)),
                    b.attempt("path t=0.5", || path.sample(0.5)),
                    b.attempt("path t=1", || path.sample(1.0)),
                ) {
                    b.residual(
                        "path unitarity t=0.5",
                        linalg::unitarity_residual(ph.matrix()),
                        tol.reconstruction,
                    );
                    b.check("path band", ph.band() <= 2, format!("band {}", ph.band()));
                    b.residual(
                        "path start",
                        linalg::dist(p0.matrix(), &linalg::eye(p0.matrix().nrows())),
                        tol.reconstruction,
                    );
                    b.residual(
                        "path end",
                        linalg::dist(p1.matrix(), v.matrix()),
                        tol.reconstruction,
                    );
                }
            }
        }
    } else {
        let rejected = matches!(decouple(u, 0), Err(Error::WrongIndex { .. }));
        b.check("decoupling rejected", rejected, format!("index {idx} ≠ 0"));
    }
    if let Some(d) = b.attempt("doubled", || doubled_implementation(u)) {
        b.residual("doubled product", d.product_residual, tol.reconstruction);
        b.residual(
            "doubled commutators",
            d.commutator_residual,
            tol.reconstruction,
        );
    }
}

fn ti_suite(b: &mut ReportBuilder, u: &LaurentUnitary, opts: &VerifyOptions, full: bool) {
    let tol = &opts.tol;
    if let Some(k) = b.attempt("coefficient formula", || index_coefficient_with(u, tol)) {
        b.route("coefficient formula", k);
    }
    if let Some((k, _)) = b.attempt("determinant", || index_determinant(u)) {
        b.route("determinant exponent", k);
    }
    if let Some(q) = b.attempt("quadrature", || {
        index_winding_quadrature(u, QUADRATURE_GRID)
    }) {
        b.residual(
            "quadrature integrality",
            (q - q.round()).abs(),
            1e-6_f64.max(tol.snap),
        );
        b.route("winding quadrature", q.round() as i64);
    }
    if let Some(d) = b.attempt("dispersion", || dispersion(u, opts.grid)) {
        b.route("dispersion winding sum", d.winding_sum);
    }
    if let Some(f) = b.attempt("factorization", || factorize(u)) {
        b.route("factorization shift sum", f.shift_sum());
        b.residual(
            "factorization reconstruction",
            f.reconstruction_residual,
            tol.integrality,
        );
        if full && f.shift_sum() != 0 {
            let rejected = matches!(ti_path(u, 0.5), Err(Error::WrongIndex { .. }));
            b.check(
                "contraction rejected",
                rejected,
                format!("index {} ≠ 0", f.shift_sum()),
            );
        } else if full {
            if let Some(p) = b.attempt("ti path", || ti_path(u, 0.5)) {
                b.residual(
                    "path paraunitarity",
                    p.paraunitarity_residual(),
                    tol.reconstruction,
                );
                b.check(
                    "path degree",
                    p.degree(1e-12) <= f.max_width(),
                    format!("degree {} vs Σ|m_k| = {}", p.degree(1e-12), f.max_width()),
                );
            }
        }
    }
    if full {
        b.residual("paraunitarity", u.paraunitarity_residual(), tol.unitarity);
    }
}

fn qca_suite(b: &mut ReportBuilder, sys: &QcaSystem, opts: &VerifyOptions, full: bool) {
    let tol = &opts.tol;
    let Some((idx, rep)) = b.attempt("support algebras", || index_support(sys)) else {
        return;
    };
    b.route("support algebras", idx);
    b.residual(
        "support commutators",
        rep.max_commutator,
        tol.reconstruction,
    );
    if let Some(v) = optional(b, "three-cell", || index_three_cell_grouped(sys)) {
        b.route("three-cell", v)
    }
    if let Some(r) = optional(b, "overlap", || index_overlap_with(sys, 0, tol)) {
        b.route("overlap", r.index);
        b.residual("overlap snap", r.snap_distance, tol.snap);
    }
    // the route presumes every 𝒩_x is a factor
    let half = half_neighborhood_index(sys).map_err(|e| match e {
        Error::NotFactor(m) => Error::Structure(m),
        e => e,
    });
    if let Some(v) = optional(b, "half-neighbourhood", || half) {
        b.route("half-neighbourhood", v)
    }
    if !full {
        return;
    }
    if let Some(t) = b.attempt("theta conjugate", || index_support(&sys.theta_conjugate())) {
        b.check("theta invariance", t.0 == idx, format!("ind ΘαΘ = {}", t.0));
    }
    if idx == RationalIndex::one() {
        if let Some(tl) = optional(b, "two-layer", || two_layer_implementation_qca(sys)) {
            b.residual(
                "two-layer reconstruction",
                tl.reconstruction_residual,
                tol.reconstruction,
            );
        }
    } else {
        let rejected = matches!(
            two_layer_implementation_qca(sys),
            Err(Error::WrongIndex { .. })
        );
        b.check("two-layer rejected", rejected, format!("index {idx} ≠ 1/1"));
    }
    let s = sys.structure();
    if s.cells() <= 6 && s.dims().iter().all(|&d| d <= 2) && matches!(sys.reach(), Ok(r) if r <= 1)
    {
        if let Some(d) = b.attempt("doubled", || doubled_implementation_qca(sys)) {
            b.residual("doubled forward", d.forward_residual, tol.reconstruction);
            b.residual("doubled backward", d.backward_residual, tol.reconstruction);
            b.residual("doubled commutation", d.commutation_residual, tol.unitarity);
        }
    }
}

/// Smallest even ring admissible for quantization, if its configuration count is small.
fn quantize_ring(r: &ClassicalRule) -> Option<usize> {
    let mut n = (2 * (r.radius() + r.inv_radius()) + 2).max(6);
    n += n % 2;
    ((r.q() as u128).checked_pow(n as u32)? <= QUANTIZE_CHECK_MAX).then_some(n)
}

fn classical_suite(b: &mut ReportBuilder, r: &ClassicalRule, opts: &VerifyOptions, full: bool) {
    let w = r.radius().max(r.inv_radius()).max(1);
    for win in [w, w + 1] {
        if let Some(rep) = optional(b, &format!("welch r={win}"), || welch_index(r, win)) {
            b.route(&format!("welch r={win}"), rep.index);
        }
    }
    let Some(n) = quantize_ring(r) else {
        b.check(
            "quantization",
            true,
            "not applicable: ring configuration count too large",
        );
        return;
    };
    let Some(sys) = b.attempt("quantize", || quantize(r, n)) else {
        return;
    };
    if let Some((idx, _)) = b.attempt("quantized support", || index_support(&sys)) {
        b.route(&format!("quantized support N={n}"), idx);
    }
    if full {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        let phases: Vec<Vec<C64>> = (0..n)
            .map(|_| {
                (0..r.q())
                    .map(|_| C64::from_polar(1.0, rng.gen_range(-3.0..3.0)))
                    .collect()
            })
            .collect();
        if let Some(g) = b.attempt("gauge", || gauge_invariance_check(r, n, &phases)) {
            b.check(
                "gauge invariance",
                g.holds,
                format!(
                    "ind {} → {} (Θ: {}), Θ residual {:.1e}",
                    g.index_rule, g.index_gauged, g.index_gauged_theta, g.theta_residual
                ),
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtins;

    #[test]
    fn every_builtin_verifies() {
        let opts = VerifyOptions::default();
        for bi in builtins::all().unwrap() {
            let r = verify_builtin(&bi, &opts);
            assert!(r.pass, "{r}");
        }
    }

    #[test]
    fn wrong_expectation_is_a_disagreement() {
        let bi = builtins::builtin("shift-walk-d2").unwrap();
        let r = index_report(
            "x",
            &bi.system,
            Some(IndexValue::Integer(1)),
            &VerifyOptions::default(),
        );
        assert_eq!(r.exit_code(), crate::report::EXIT_DISAGREEMENT);
    }
}
