//! Tangent-line resource allocation and the node queue it drives.
//!
//! Within cycle `k` node `i` has admitted `yᵢ(τ) = wᵢ(k) + βᵢuᵢ(k)τ + (αᵢ/2)τ²`
//! requests by time `τ`. Serving at constant rate `γ` drains `z(τ) = γτ`. The
//! chosen `γ̂ᵢ(k)` is the slope of the line from the origin tangent to that
//! parabola, so service never outruns admission inside the cycle.
//!
//! Each node reads only its own state and the shared period `T(k)`.

use serde::{Deserialize, Serialize};

use crate::error::AllocationError;
use crate::model::NodeParams;

/// Queue values below this are snapped to zero.
pub const QUEUE_FLOOR: f64 = 1e-12;
/// Absolute slack for invariant-set membership.
pub const MEMBERSHIP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AllocationDecision {
    /// `γ̂ᵢ(k) = βᵢuᵢ(k) + √(2αᵢwᵢ(k))`.
    pub gamma: f64,
    /// `t_z = √(2wᵢ(k)/αᵢ)`, where the service line touches the admission curve.
    pub t_z: f64,
}

impl AllocationDecision {
    /// Tangency falls after the clearance event; the geometric reading does
    /// not apply to this cycle but the law is still used as is.
    pub fn late_tangency(&self, period: f64) -> bool {
        self.t_z > period
    }
}

fn clamp_queue(w: f64) -> f64 {
    if w < QUEUE_FLOOR {
        0.0
    } else {
        w
    }
}

pub fn service_rate(u_k: f64, w_k: f64, p: &NodeParams) -> Result<AllocationDecision, AllocationError> {
    if !(w_k >= 0.0) {
        return Err(AllocationError::NegativeQueue(w_k));
    }
    if !(u_k >= 0.0) {
        return Err(AllocationError::NegativeRate(u_k));
    }
    let w = clamp_queue(w_k);
    Ok(AllocationDecision {
        gamma: p.beta * u_k + (2.0 * p.alpha * w).sqrt(),
        t_z: (2.0 * w / p.alpha).sqrt(),
    })
}

/// `wᵢ(k+1) = wᵢ(k) + (βᵢuᵢ(k) + (αᵢ/2)T − γ)T`, for any service rate `γ`.
///
/// Results below [`QUEUE_FLOOR`] are returned as exactly zero.
pub fn queue_update(w_k: f64, u_k: f64, gamma: f64, period: f64, p: &NodeParams) -> f64 {
    clamp_queue(w_k + (p.beta * u_k + 0.5 * p.alpha * period - gamma) * period)
}

/// Closed loop under `γ̂`: `w + (α/2)T² − √(2αw)·T`, i.e. `(√w − √(α/2)·T)²`.
pub fn closed_loop_queue(w_k: f64, period: f64, alpha: f64) -> f64 {
    let w = clamp_queue(w_k);
    clamp_queue(w + 0.5 * alpha * period * period - (2.0 * alpha * w).sqrt() * period)
}

/// `𝒲ᵢ(k) = [0, (αᵢ/2)T(k)²]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantSet {
    pub lower: f64,
    pub upper: f64,
}

impl InvariantSet {
    pub fn contains(&self, w: f64) -> bool {
        w >= self.lower - MEMBERSHIP_SLACK && w <= self.upper + MEMBERSHIP_SLACK
    }
}

pub fn invariant_set(period: f64, p: &NodeParams) -> InvariantSet {
    InvariantSet { lower: 0.0, upper: 0.5 * p.alpha * period * period }
}

pub fn contains(set: &InvariantSet, w: f64) -> bool {
    set.contains(w)
}

/// First cycle at which a queue trajectory is inside its invariant set, plus
/// the a-priori bound on that index in two forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EntryReport {
    pub step: usize,
    /// `⌈(w(0) − (α/2)T(k*)) / ((α/2)·minⱼ T(j)²)⌉`, the bound exactly as
    /// derived, whose numerator mixes a period with a squared period.
    pub bound_linear: Option<i64>,
    /// Same bound with the dimensionally consistent numerator
    /// `w(0) − (α/2)T(k*)²`.
    pub bound_squared: Option<i64>,
}

/// Smallest `k` with `w(k) ∈ [0, (α/2)T(k)²]` along `run`, a sequence of
/// `(w(k), T(k))` pairs.
///
/// The bounds are `None` when `k* = 0` (the minimum over an empty prefix is
/// undefined) and are reported, not enforced.
pub fn entry_step(run: &[(f64, f64)], p: &NodeParams) -> Result<EntryReport, AllocationError> {
    let step = run
        .iter()
        .position(|&(w, t)| invariant_set(t, p).contains(w))
        .ok_or(AllocationError::NotYet { horizon: run.len() })?;
    if step == 0 {
        return Ok(EntryReport { step, bound_linear: None, bound_squared: None });
    }
    let w0 = run[0].0;
    let t_entry = run[step].1;
    let min_t2 = run[..step].iter().map(|&(_, t)| t * t).fold(f64::INFINITY, f64::min);
    let half_alpha = 0.5 * p.alpha;
    let bound = |numerator: f64| (numerator / (half_alpha * min_t2)).ceil() as i64;
    Ok(EntryReport {
        step,
        bound_linear: Some(bound(w0 - half_alpha * t_entry)),
        bound_squared: Some(bound(w0 - half_alpha * t_entry * t_entry)),
    })
}

/// `y(τ) = w(k) + βu(k)τ + (α/2)τ²`: requests admitted into node `i` by `τ`,
/// counting the carried-over backlog.
pub fn admitted_cumulative(tau: f64, w_k: f64, u_k: f64, p: &NodeParams) -> f64 {
    w_k + p.beta * u_k * tau + 0.5 * p.alpha * tau * tau
}

/// `z(τ) = γτ`.
pub fn served_cumulative(tau: f64, gamma: f64) -> f64 {
    gamma * tau
}

/// Node queue `τ` into the cycle: `y(τ) − z(τ)`.
pub fn queue_at(tau: f64, w_k: f64, u_k: f64, gamma: f64, p: &NodeParams) -> f64 {
    admitted_cumulative(tau, w_k, u_k, p) - served_cumulative(tau, gamma)
}
