/// Numerical tolerances shared by validation and checks.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub unitarity: f64,
    pub reconstruction: f64,
    pub integrality: f64,
    /// Relative threshold below which a vector counts as linearly dependent.
    pub rank: f64,
    pub snap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            unitarity: 1e-10,
            reconstruction: 1e-9,
            integrality: 1e-8,
            rank: 1e-9,
            snap: 1e-6,
        }
    }
}

impl Tolerances {
    /// All tolerances multiplied by `factor`.
    pub fn scaled(factor: f64) -> Self {
        let d = Tolerances::default();
        Tolerances {
            unitarity: d.unitarity * factor,
            reconstruction: d.reconstruction * factor,
            integrality: d.integrality * factor,
            rank: d.rank * factor,
            snap: d.snap * factor,
        }
    }
}
