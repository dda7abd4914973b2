/// Numeric thresholds shared by every check.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    /// Pass threshold for relative Frobenius residuals and span membership.
    pub residual: f64,
    /// Singular values below `rank * σ_max` count as zero.
    pub rank: f64,
    /// Eigenvalues at or below this floor are not positive.
    pub pd: f64,
}

impl Tolerances {
    pub const DEFAULT_RESIDUAL: f64 = 1e-9;
    pub const DEFAULT_RANK: f64 = 1e-10;
    pub const DEFAULT_PD: f64 = 1e-12;

    pub fn with_residual(mut self, residual: f64) -> Self {
        self.residual = residual;
        self
    }

    pub fn passes(&self, residual: f64) -> bool {
        residual.is_finite() && residual < self.residual
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            residual: Self::DEFAULT_RESIDUAL,
            rank: Self::DEFAULT_RANK,
            pd: Self::DEFAULT_PD,
        }
    }
}
