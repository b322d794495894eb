//! Distributionally robust collision-risk bounds.

use crate::error::{Error, Result};
use crate::propagator::MeanCov;

use super::geometry::{Environment, Polytope};

/// One-sided Chebyshev bound on `P(g ≤ 0)` for a scalar `g` with the given
/// mean and variance: `var / (var + mean²)` when `mean ≥ 0`, else 1.
pub fn cantelli_bound(mean: f64, variance: f64) -> Result<f64> {
    if !(variance >= 0.0) {
        return Err(Error::InvalidArgument(format!("variance must be nonnegative, got {variance}")));
    }
    if mean < 0.0 {
        return Ok(1.0);
    }
    let denom = variance + mean * mean;
    Ok(if denom == 0.0 { 0.0 } else { variance / denom })
}

/// Mean and variance of `aᵀp + b`.
pub fn halfspace_moments(mean: [f64; 2], cov: [[f64; 2]; 2], a: [f64; 2], b: f64) -> (f64, f64) {
    let m = a[0] * mean[0] + a[1] * mean[1] + b;
    let v = a[0] * a[0] * cov[0][0] + 2.0 * a[0] * a[1] * cov[0][1] + a[1] * a[1] * cov[1][1];
    (m, v.max(0.0))
}

/// Least risky face of the obstacle.
pub fn obstacle_risk(mean: [f64; 2], cov: [[f64; 2]; 2], obstacle: &Polytope) -> f64 {
    obstacle
        .halfspaces
        .iter()
        .map(|&(a, b)| {
            let (m, v) = halfspace_moments(mean, cov, a, b);
            cantelli_bound(m, v).unwrap_or(1.0)
        })
        .fold(1.0, f64::min)
}

/// Boole bound over steps `1..` of `path` and over all obstacles. May exceed 1.
pub fn trajectory_risk(path: &[MeanCov<f64>], env: &Environment) -> f64 {
    path.iter().skip(1).map(|mc| env.obstacles.iter().map(|o| obstacle_risk(mc.mean, mc.cov, o)).sum::<f64>()).sum()
}

/// The sufficient condition of allocation-based planners:
/// `aᵀμ + b ≥ sqrt(aᵀΣa) · sqrt((1 - ε) / ε)`.
pub fn sigma_margin_condition(mean: [f64; 2], cov: [[f64; 2]; 2], a: [f64; 2], b: f64, eps: f64) -> bool {
    let (m, v) = halfspace_moments(mean, cov, a, b);
    m >= v.sqrt() * ((1.0 - eps) / eps).sqrt()
}
