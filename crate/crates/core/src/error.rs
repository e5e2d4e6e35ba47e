use thiserror::Error;

/// Errors raised by validation, index computation and constructions.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("operator is not unitary (residual {residual:.3e} > {tol:.1e})")]
    NotUnitary { residual: f64, tol: f64 },

    #[error("invalid structure: {0}")]
    Structure(String),

    #[error("band {band} too large for ring of {sites} sites: {detail}")]
    BandOverflow {
        band: usize,
        sites: usize,
        detail: String,
    },

    #[error("index value {value} is not an integer (distance {distance:.3e})")]
    NonInteger { value: f64, distance: f64 },

    #[error("index {found} ≠ {expected}")]
    WrongIndex { found: String, expected: String },

    #[error("indices differ: {left} vs {right}")]
    IndexMismatch { left: String, right: String },

    #[error("cut-dependent index: {0}")]
    CutDependent(String),

    #[error("not a full matrix algebra: {0}")]
    NotFactor(String),

    #[error("causality violated: {0}")]
    Causality(String),

    #[error("support would exceed the ring: {0}")]
    SupportOverflow(String),

    #[error("value {value} is not close to any admissible fraction (distance {distance:.3e})")]
    Snap { value: f64, distance: f64 },

    #[error("region too small: {0}")]
    Region(String),

    #[error("branch matching failed at p = {p:.6}: overlap {overlap:.3}; refine the momentum grid (currently {grid} points)")]
    BranchMatching { p: f64, overlap: f64, grid: usize },

    #[error("factorization stalled: {0}")]
    Factorization(String),

    #[error("not paraunitary (residual {0:.3e})")]
    NotParaunitary(f64),

    #[error("symbol is not a monomial in e^(ip): {0}")]
    NotMonomial(String),

    #[error("rule is not reversible: {0}")]
    NotReversible(String),

    #[error("enumeration cap exceeded: {needed} > {cap}")]
    EnumerationCap { needed: u128, cap: u128 },

    #[error("check failed: {0}")]
    Check(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Whether the error signals mathematical disagreement rather than bad input.
    pub fn is_disagreement(&self) -> bool {
        matches!(
            self,
            Error::NonInteger { .. }
                | Error::WrongIndex { .. }
                | Error::IndexMismatch { .. }
                | Error::CutDependent(_)
                | Error::NotFactor(_)
                | Error::Snap { .. }
                | Error::Check(_)
                | Error::NotMonomial(_)
                | Error::BranchMatching { .. }
                | Error::Factorization(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
