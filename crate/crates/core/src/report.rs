//! Verification reports shared by the CLI and the C interface.

use crate::error::Error;
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fmt;
use std::time::Instant;

#[derive(Clone, Debug, Serialize)]
pub struct RouteValue {
    pub route: String,
    pub value: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct Residual {
    pub name: String,
    pub value: f64,
    pub tol: f64,
    pub pass: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

/// Outcome of running index routes and invariant checks on one input.
#[derive(Clone, Debug, Serialize)]
pub struct VerificationReport {
    pub subject: String,
    pub kind: String,
    /// SHA-256 of the canonical JSON of the input.
    pub digest: String,
    pub index: Option<String>,
    pub expected: Option<String>,
    pub routes: Vec<RouteValue>,
    pub residuals: Vec<Residual>,
    pub checks: Vec<CheckOutcome>,
    /// Set when the input itself was rejected.
    pub input_error: Option<String>,
    pub pass: bool,
    pub wall_time_ms: f64,
}

/// 0 pass, 1 input error, 2 disagreement.
pub const EXIT_PASS: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_DISAGREEMENT: i32 = 2;

impl VerificationReport {
    pub fn exit_code(&self) -> i32 {
        if self.input_error.is_some() {
            EXIT_INPUT
        } else if self.pass {
            EXIT_PASS
        } else {
            EXIT_DISAGREEMENT
        }
    }
}

pub fn digest(canonical: &str) -> String {
    Sha256::digest(canonical.as_bytes())
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

pub struct ReportBuilder {
    started: Instant,
    report: VerificationReport,
}

impl ReportBuilder {
    pub fn new(subject: &str, kind: &str, canonical: &str) -> Self {
        ReportBuilder {
            started: Instant::now(),
            report: VerificationReport {
                subject: subject.to_string(),
                kind: kind.to_string(),
                digest: digest(canonical),
                index: None,
                expected: None,
                routes: Vec::new(),
                residuals: Vec::new(),
                checks: Vec::new(),
                input_error: None,
                pass: true,
                wall_time_ms: 0.0,
            },
        }
    }

    pub fn route(&mut self, route: &str, value: impl fmt::Display) {
        self.report.routes.push(RouteValue {
            route: route.into(),
            value: value.to_string(),
        });
    }

    pub fn residual(&mut self, name: &str, value: f64, tol: f64) {
        self.report.residuals.push(Residual {
            name: name.into(),
            value,
            tol,
            pass: value <= tol,
        });
    }

    pub fn check(&mut self, name: &str, pass: bool, detail: impl Into<String>) {
        self.report.checks.push(CheckOutcome {
            name: name.into(),
            pass,
            detail: detail.into(),
        });
    }

    pub fn expect(&mut self, expected: impl fmt::Display) {
        self.report.expected = Some(expected.to_string());
    }

    /// Records a failed step; input errors mark the whole report as rejected input.
    pub fn error(&mut self, step: &str, e: &Error) {
        if e.is_disagreement() {
            self.check(step, false, e.to_string());
        } else {
            self.report
                .input_error
                .get_or_insert_with(|| format!("{step}: {e}"));
        }
    }

    /// Runs `f`, recording its error under `step`.
    pub fn attempt<T>(&mut self, step: &str, f: impl FnOnce() -> crate::Result<T>) -> Option<T> {
        match f() {
            Ok(v) => Some(v),
            Err(e) => {
                self.error(step, &e);
                None
            }
        }
    }

    pub fn finish(mut self) -> VerificationReport {
        let r = &mut self.report;
        let values: Vec<&str> = r.routes.iter().map(|v| v.value.as_str()).collect();
        let agree = values.windows(2).all(|w| w[0] == w[1]);
        if !agree {
            let listing: Vec<String> = r
                .routes
                .iter()
                .map(|v| format!("{} = {}", v.route, v.value))
                .collect();
            r.checks.push(CheckOutcome {
                name: "routes agree".into(),
                pass: false,
                detail: listing.join(", "),
            });
        }
        r.index = if agree {
            values.first().map(|v| v.to_string())
        } else {
            None
        };
        if let (Some(e), Some(i)) = (&r.expected, &r.index) {
            if e != i {
                r.checks.push(CheckOutcome {
                    name: "expected index".into(),
                    pass: false,
                    detail: format!("index {i} ≠ {e}"),
                });
            }
        }
        r.pass = r.input_error.is_none()
            && !r.routes.is_empty()
            && agree
            && r.residuals.iter().all(|x| x.pass)
            && r.checks.iter().all(|c| c.pass);
        r.wall_time_ms = self.started.elapsed().as_secs_f64() * 1e3;
        self.report
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let status = if self.pass { "PASS" } else { "FAIL" };
        writeln!(f, "{status} {} ({})", self.subject, self.kind)?;
        if let Some(e) = &self.input_error {
            writeln!(f, "  input rejected: {e}")?;
        }
        if let Some(i) = &self.index {
            match &self.expected {
                Some(e) => writeln!(f, "  index {i} (expected {e})")?,
                None => writeln!(f, "  index {i}")?,
            }
        }
        for r in &self.routes {
            writeln!(f, "  route {:<24} {}", r.route, r.value)?;
        }
        for r in &self.residuals {
            let mark = if r.pass { "ok" } else { "EXCEEDED" };
            writeln!(
                f,
                "  residual {:<21} {:.3e} (tol {:.1e}) {mark}",
                r.name, r.value, r.tol
            )?;
        }
        for c in &self.checks {
            let mark = if c.pass { "ok" } else { "FAILED" };
            writeln!(f, "  check {:<24} {mark} {}", c.name, c.detail)?;
        }
        write!(f, "  {:.1} ms", self.wall_time_ms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disagreement_fails_with_code_two() {
        let mut b = ReportBuilder::new("x", "walk", "{}");
        b.route("a", 1);
        b.route("b", 2);
        let r = b.finish();
        assert!(!r.pass);
        assert_eq!(r.exit_code(), EXIT_DISAGREEMENT);
        assert!(r.index.is_none());
    }

    #[test]
    fn input_errors_give_code_one() {
        let mut b = ReportBuilder::new("x", "walk", "{}");
        b.error(
            "load",
            &Error::NotUnitary {
                residual: 0.5,
                tol: 1e-10,
            },
        );
        assert_eq!(b.finish().exit_code(), EXIT_INPUT);
    }

    #[test]
    fn agreement_passes() {
        let mut b = ReportBuilder::new("x", "qca", "{}");
        b.route("a", "2/1");
        b.route("b", "2/1");
        b.expect("2/1");
        b.residual("r", 1e-12, 1e-9);
        let r = b.finish();
        assert!(r.pass, "{r}");
        assert_eq!(r.index.as_deref(), Some("2/1"));
        assert_eq!(digest("abc").len(), 64);
    }
}
