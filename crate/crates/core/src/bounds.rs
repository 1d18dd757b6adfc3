//! Closed-form evaluators for the explicit error bounds.
//!
//! All combinatorial formulas are evaluated in the log domain: the
//! sixteenth powers appearing in the tail bounds overflow 64-bit integers at
//! realistic sizes. Tests compare against exact rational arithmetic.
//!
//! The headline Wasserstein bound reports precondition violations as data
//! rather than errors, because experiments tabulate it across regimes that
//! include invalid ones. The tail and intersection bounds throw instead:
//! their formulas are meaningless outside the stated regime.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};

/// Arguments of the Wasserstein error bound.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BoundInputs {
    /// Sup-norm of the local statistic.
    pub sup_norm: f64,
    pub d_max: usize,
    pub ell: usize,
    pub n: usize,
    pub m: usize,
    /// Standard deviation of the summed statistic.
    pub sigma: f64,
}

/// The evaluated bound plus its precondition report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Theorem1Report {
    /// `‖h‖³ d_max² ℓ¹⁰ n / (4536 σ³) + ‖h‖² d_max² ℓ⁸ √n / (78 σ²)`.
    pub value: f64,
    /// The cubic (first) term.
    pub term_cubic: f64,
    /// The quadratic (second) term.
    pub term_quadratic: f64,
    pub preconditions_met: bool,
    pub violated: Vec<String>,
}

/// Exact integer test for `x ≤ n^{1/4}`.
fn fourth_power_at_most(x: usize, n: usize) -> bool {
    (x as u128).pow(4) <= n as u128
}

/// Evaluates the Wasserstein bound for standardised local statistics.
/// Preconditions are checked and reported, never thrown.
pub fn theorem1_bound(inputs: &BoundInputs) -> Theorem1Report {
    assert!(
        inputs.sup_norm > 0.0 && inputs.sigma > 0.0 && inputs.d_max > 0 && inputs.ell > 0,
        "bound inputs must be strictly positive"
    );
    assert!(inputs.n > 0 && inputs.m > 0, "bound inputs must be strictly positive");

    let ln_h = inputs.sup_norm.ln();
    let ln_d = (inputs.d_max as f64).ln();
    let ln_ell = (inputs.ell as f64).ln();
    let ln_n = (inputs.n as f64).ln();
    let ln_sigma = inputs.sigma.ln();

    let term_cubic =
        (3.0 * ln_h + 2.0 * ln_d + 10.0 * ln_ell + ln_n - 4536f64.ln() - 3.0 * ln_sigma).exp();
    let term_quadratic =
        (2.0 * ln_h + 2.0 * ln_d + 8.0 * ln_ell + 0.5 * ln_n - 78f64.ln() - 2.0 * ln_sigma).exp();

    let mut violated = Vec::new();
    if inputs.d_max < 2 {
        violated.push("2 <= d_max".to_string());
    }
    if !fourth_power_at_most(inputs.d_max, inputs.n) {
        violated.push("d_max <= n^(1/4)".to_string());
    }
    if inputs.ell < 12 {
        violated.push("12 <= ell".to_string());
    }
    if !fourth_power_at_most(inputs.ell, inputs.n) {
        violated.push("ell <= n^(1/4)".to_string());
    }
    if inputs.m < inputs.n {
        violated.push("m >= n".to_string());
    }
    if (inputs.m as u128) < 7 * (inputs.d_max as u128).pow(2) * inputs.ell as u128 {
        violated.push("m >= 7*d_max^2*ell".to_string());
    }

    Theorem1Report {
        value: term_cubic + term_quadratic,
        term_cubic,
        term_quadratic,
        preconditions_met: violated.is_empty(),
        violated,
    }
}

/// Tail bounds on the number of re-inserted pairs.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TailBounds {
    /// `P[K_v ≥ ℓ + k − 1] ≤ d_max^{2k} ℓ^{2k} / (k! m^k)`.
    pub single: f64,
    /// Union over all vertices: `d_max^{2k} ℓ^{2k} / (k! m^{k−1})`.
    pub union: f64,
}

/// Evaluates the single-vertex and union tail bounds. Raw values are
/// returned unclamped; callers may cap them at 1 for reporting.
pub fn kv_tail_bound(
    d_max: usize,
    ell: usize,
    m: usize,
    k: usize,
    n: usize,
) -> Result<TailBounds> {
    if k < 1 {
        return Err(Error::PreconditionViolated("k >= 1".into()));
    }
    if m < 8 * k.max(ell) {
        return Err(Error::PreconditionViolated(format!(
            "m >= 8*max(k, ell): m = {m}, needed {}",
            8 * k.max(ell)
        )));
    }
    if m < n {
        return Err(Error::PreconditionViolated(format!(
            "m >= n (union bound): m = {m}, n = {n}"
        )));
    }
    let kf = k as f64;
    let ln_single = 2.0 * kf * ((d_max as f64).ln() + (ell as f64).ln())
        - ln_gamma(kf + 1.0)
        - kf * (m as f64).ln();
    let single = ln_single.exp();
    let union = (ln_single + (m as f64).ln()).exp();
    Ok(TailBounds { single, union })
}

/// The probability bound on some vertex needing more than `ℓ + 6`
/// re-insertions: the `k = 8` union tail.
pub fn gamma_bound(d_max: usize, ell: usize, m: usize, n: usize) -> Result<f64> {
    Ok(kv_tail_bound(d_max, ell, m, 8, n)?.union)
}

/// Right-hand sides of the four intersection inequalities for a colour set
/// `α` compatible with the exploration filtration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct IntersectionBounds {
    /// Bound on `P[ξ_v ∩ α ≠ ∅]`.
    pub xi_hit: f64,
    /// Bound on `E|ξ_v ∩ α|`.
    pub xi_size: f64,
    /// Bound on `P[η_v ∩ α ≠ ∅, A]`.
    pub eta_hit: f64,
    /// Bound on `E{|η_v ∩ α| I_A}`.
    pub eta_size: f64,
}

/// Evaluates the per-vertex intersection bounds.
pub fn intersection_bounds(
    alpha_size: usize,
    v_in_alpha: bool,
    d_max: usize,
    ell: usize,
    m: usize,
) -> Result<IntersectionBounds> {
    if m < 2 * d_max * (alpha_size + ell) {
        return Err(Error::PreconditionViolated(format!(
            "m >= 2*d_max*(|alpha| + ell): m = {m}, needed {}",
            2 * d_max * (alpha_size + ell)
        )));
    }
    let indicator = if v_in_alpha { 1.0 } else { 0.0 };
    let scale = 2.0 * d_max as f64 * alpha_size as f64 / m as f64;
    let near = scale * (ell as f64 - 1.0);
    let far = scale * (3.0 * ell as f64 + 11.0);
    Ok(IntersectionBounds {
        xi_hit: indicator + near,
        xi_size: ell as f64 * indicator + near,
        eta_hit: indicator + far,
        eta_size: (3.0 * ell as f64 + 12.0) * indicator + far,
    })
}

/// Aggregate (summed over all vertices) intersection bounds.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CorollaryBounds {
    /// `Σ_v P[ξ_v ∩ α ≠ ∅] ≤ 2|α| d_max ℓ`.
    pub xi_hit_sum: f64,
    /// `Σ_v E|ξ_v ∩ α| ≤ 3|α| d_max ℓ`.
    pub xi_size_sum: f64,
    /// `Σ_v P[η_v ∩ α ≠ ∅, A] ≤ 8|α| d_max ℓ`.
    pub eta_hit_sum: f64,
    /// `Σ_v E{|η_v ∩ α| I_A} ≤ 10|α| d_max ℓ`.
    pub eta_size_sum: f64,
}

/// Evaluates the aggregate bounds under their stricter preconditions.
pub fn corollary_bounds(
    alpha_size: usize,
    d_max: usize,
    ell: usize,
    m: usize,
    n: usize,
) -> Result<CorollaryBounds> {
    if d_max < 2 {
        return Err(Error::PreconditionViolated("d_max >= 2".into()));
    }
    if ell < 12 {
        return Err(Error::PreconditionViolated("ell >= 12".into()));
    }
    if m < n {
        return Err(Error::PreconditionViolated(format!(
            "m >= n: m = {m}, n = {n}"
        )));
    }
    if m < 2 * d_max * (alpha_size + ell) {
        return Err(Error::PreconditionViolated(format!(
            "m >= 2*d_max*(|alpha| + ell): m = {m}, needed {}",
            2 * d_max * (alpha_size + ell)
        )));
    }
    let base = alpha_size as f64 * d_max as f64 * ell as f64;
    Ok(CorollaryBounds {
        xi_hit_sum: 2.0 * base,
        xi_size_sum: 3.0 * base,
        eta_hit_sum: 8.0 * base,
        eta_size_sum: 10.0 * base,
    })
}
