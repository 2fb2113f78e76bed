//! Closed-form covariance and Peierls bounds, evaluated in log space where the
//! constants overflow.

use thiserror::Error;

use crate::scalar::Real;

/// The knot-counting constant 10²⁴.
pub const KNOT_COUNT_BASE: f64 = 1e24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BoundError {
    #[error("{0} must be nonnegative")]
    Negative(&'static str),
    #[error("probability {0} outside [0, 1]")]
    NotAProbability(f64),
}

/// `2 ‖h₁‖∞ ‖h₂‖∞ P(∉E)`.
pub fn covariance_bound<F: Real>(h1_sup: F, h2_sup: F, p_out: F) -> Result<F, BoundError> {
    if h1_sup < F::zero() {
        return Err(BoundError::Negative("h1 sup norm"));
    }
    if h2_sup < F::zero() {
        return Err(BoundError::Negative("h2 sup norm"));
    }
    if !(p_out >= F::zero() && p_out <= F::one()) {
        return Err(BoundError::NotAProbability(p_out.to_f64().unwrap_or(f64::NAN)));
    }
    Ok(F::lit(2.0) * h1_sup * h2_sup * p_out)
}

/// ln of `4^{|P|} |G|^{2|P|} e^{−β Δ_G |P ∖ P₀|}`.
pub fn ln_phi2_upper<F: Real>(order: usize, delta: F, beta: F, p_len: usize, excess: usize) -> F {
    let n = F::lit(p_len as f64);
    n * F::lit(4.0).ln() + F::lit(2.0) * n * F::lit(order as f64).ln() - beta * delta * F::lit(excess as f64)
}

pub fn phi2_upper<F: Real>(order: usize, delta: F, beta: F, p_len: usize, excess: usize) -> F {
    ln_phi2_upper(order, delta, beta, p_len, excess).exp()
}

/// Both Peierls bounds, with their logarithms.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct PeierlsBounds {
    pub ln_p_out: f64,
    pub p_out: f64,
    pub ln_covariance: f64,
    pub covariance: f64,
    /// β is below the threshold the bounds are proved for.
    pub below_threshold: bool,
}

/// `P(∉E) ≤ 2 (4·10²⁴|G|²)^{|B₁|+|B₂|} e^{−(β/2)Δ_G(L−1)}` and the covariance
/// bound `4 (4·10²⁴|G|²)^{|B₁|+|B₂|} ‖f₁‖‖f₂‖ e^{−(β/2)Δ_G(L−1)}`.
#[allow(clippy::too_many_arguments)]
pub fn percolation_and_theorem_bounds(
    order: usize,
    delta: f64,
    beta: f64,
    threshold: f64,
    b1: usize,
    b2: usize,
    separation: i64,
    f1_sup: f64,
    f2_sup: f64,
) -> PeierlsBounds {
    let m0 = (b1 + b2) as f64;
    let base = (4.0 * KNOT_COUNT_BASE * (order as f64).powi(2)).ln();
    let decay = -(beta / 2.0) * delta * (separation - 1) as f64;
    let ln_p_out = 2f64.ln() + m0 * base + decay;
    let ln_covariance = 4f64.ln() + m0 * base + f1_sup.ln() + f2_sup.ln() + decay;
    PeierlsBounds {
        ln_p_out,
        p_out: ln_p_out.exp(),
        ln_covariance,
        covariance: ln_covariance.exp(),
        below_threshold: beta < threshold,
    }
}
