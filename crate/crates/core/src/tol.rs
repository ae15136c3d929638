use serde::Serialize;

/// Numerical thresholds used by the certificates.
///
/// `hermitian`, `positivity` and `invertibility` are relative to the norm of
/// the matrix being tested; `dual` is an absolute bound on residual norms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Tolerances {
    pub hermitian: f64,
    pub positivity: f64,
    pub invertibility: f64,
    pub dual: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            hermitian: 1e-10,
            positivity: 1e-10,
            invertibility: 1e-12,
            dual: 1e-9,
        }
    }
}

impl Tolerances {
    /// Every threshold set to the same value.
    pub fn uniform(tol: f64) -> Self {
        Self {
            hermitian: tol,
            positivity: tol,
            invertibility: tol,
            dual: tol,
        }
    }
}
