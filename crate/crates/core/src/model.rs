//! Domain types and the closed-form AIMD admission dynamics.
//!
//! Every quantity is a continuous fluid value (requests, requests/second,
//! seconds). Functions here are pure; the engine composes them.

use std::ops::Deref;

use serde::{Deserialize, Serialize};

use crate::error::{ConfigError, ModelError, Violation};

/// What the engine does when `λ ≤ Σ βᵢuᵢ(k)` at an event.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NegativeCyclePolicy {
    /// Abort the run with diagnostics.
    Error,
    /// Apply further zero-duration multiplicative decreases until the batch
    /// queue can refill.
    #[default]
    RepeatBackoff,
}

/// Per-node AIMD tuning and initial state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NodeParams {
    /// Growth rate `αᵢ` (requests/s²).
    pub alpha: f64,
    /// Backoff factor `βᵢ ∈ (0, 1)`.
    pub beta: f64,
    /// Initial admission rate `uᵢ(0)` (requests/s).
    #[serde(default)]
    pub u0: f64,
    /// Initial node queue `wᵢ(0)` (requests).
    #[serde(default)]
    pub w0: f64,
}

impl NodeParams {
    pub fn new(alpha: f64, beta: f64, u0: f64, w0: f64) -> Self {
        Self { alpha, beta, u0, w0 }
    }
}

fn default_max_cycles() -> usize {
    10_000
}

/// The full experiment description before validation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SystemConfig {
    /// Arrival rate `λ` (requests/s).
    pub lambda: f64,
    #[serde(rename = "node")]
    pub nodes: Vec<NodeParams>,
    #[serde(default)]
    pub negative_cycle_policy: NegativeCyclePolicy,
    #[serde(default = "default_max_cycles")]
    pub max_cycles: usize,
}

impl SystemConfig {
    pub fn new(lambda: f64, nodes: Vec<NodeParams>) -> Self {
        Self {
            lambda,
            nodes,
            negative_cycle_policy: NegativeCyclePolicy::default(),
            max_cycles: default_max_cycles(),
        }
    }

    pub fn with_policy(mut self, policy: NegativeCyclePolicy) -> Self {
        self.negative_cycle_policy = policy;
        self
    }

    /// The four-node setup used throughout the numerical example:
    /// `λ = 100`, `αᵢ = 5i`, `βᵢ = 0.5`, `uᵢ(0) = 5(i−1)`, `wᵢ(0) = 7.5(2i−1)`.
    pub fn four_node() -> Self {
        let nodes = (1..=4)
            .map(|i| {
                let i = i as f64;
                NodeParams::new(5.0 * i, 0.5, 5.0 * (i - 1.0), 7.5 * (2.0 * i - 1.0))
            })
            .collect();
        Self::new(100.0, nodes)
    }

    pub fn validate(self) -> Result<ValidatedConfig, ConfigError> {
        validate_config(self)
    }
}

/// A config whose invariants have been checked, with the normalized growth
/// vector `ᾱ = α / Σαⱼ` cached.
#[derive(Debug, Clone, PartialEq)]
pub struct ValidatedConfig {
    cfg: SystemConfig,
    alpha_bar: Vec<f64>,
    alpha_sum: f64,
}

impl ValidatedConfig {
    pub fn config(&self) -> &SystemConfig {
        &self.cfg
    }

    pub fn into_inner(self) -> SystemConfig {
        self.cfg
    }

    pub fn n(&self) -> usize {
        self.cfg.nodes.len()
    }

    pub fn alpha_bar(&self) -> &[f64] {
        &self.alpha_bar
    }

    pub fn alpha_sum(&self) -> f64 {
        self.alpha_sum
    }

    pub fn betas(&self) -> Vec<f64> {
        self.cfg.nodes.iter().map(|p| p.beta).collect()
    }

    pub fn initial_rates(&self) -> Vec<f64> {
        self.cfg.nodes.iter().map(|p| p.u0).collect()
    }

    pub fn initial_queues(&self) -> Vec<f64> {
        self.cfg.nodes.iter().map(|p| p.w0).collect()
    }

    /// Same config with every node's initial state replaced.
    pub fn with_initial_state(&self, u0: &[f64], w0: &[f64]) -> Result<Self, ConfigError> {
        let mut cfg = self.cfg.clone();
        for ((p, &u), &w) in cfg.nodes.iter_mut().zip(u0).zip(w0) {
            p.u0 = u;
            p.w0 = w;
        }
        validate_config(cfg)
    }
}

impl Deref for ValidatedConfig {
    type Target = SystemConfig;

    fn deref(&self) -> &SystemConfig {
        &self.cfg
    }
}

/// Check every invariant of `cfg`, collecting all violations.
pub fn validate_config(cfg: SystemConfig) -> Result<ValidatedConfig, ConfigError> {
    let mut violations = Vec::new();
    if !(cfg.lambda.is_finite() && cfg.lambda > 0.0) {
        violations.push(Violation::NonPositiveLambda(cfg.lambda));
    }
    if cfg.nodes.is_empty() {
        violations.push(Violation::NoNodes);
    }
    if cfg.max_cycles == 0 {
        violations.push(Violation::ZeroMaxCycles);
    }
    for (index, p) in cfg.nodes.iter().enumerate() {
        if !(p.alpha.is_finite() && p.alpha > 0.0) {
            violations.push(Violation::NonPositiveAlpha { index, value: p.alpha });
        }
        if !(p.beta > 0.0 && p.beta < 1.0) {
            violations.push(Violation::BackoffOutOfRange { index, value: p.beta });
        }
        if !(p.u0.is_finite() && p.u0 >= 0.0) {
            violations.push(Violation::NegativeInitialRate { index, value: p.u0 });
        }
        if !(p.w0.is_finite() && p.w0 >= 0.0) {
            violations.push(Violation::NegativeInitialQueue { index, value: p.w0 });
        }
    }
    if violations.is_empty() && cfg.negative_cycle_policy == NegativeCyclePolicy::Error {
        let backoff_load: f64 = cfg.nodes.iter().map(|p| p.beta * p.u0).sum();
        if cfg.lambda <= backoff_load {
            violations.push(Violation::Infeasible { lambda: cfg.lambda, backoff_load });
        }
    }
    if !violations.is_empty() {
        return Err(ConfigError::Invalid(violations));
    }
    let alpha_sum: f64 = cfg.nodes.iter().map(|p| p.alpha).sum();
    let alpha_bar = cfg.nodes.iter().map(|p| p.alpha / alpha_sum).collect();
    Ok(ValidatedConfig { cfg, alpha_bar, alpha_sum })
}

/// Per-node state at an event index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeState {
    /// Admission rate `uᵢ(k)` just before the event's multiplicative decrease.
    pub u: f64,
    /// Node queue `wᵢ(k)`.
    pub w: f64,
    /// Service rate chosen for cycle `k`.
    pub gamma: f64,
}

/// System state at a clearance event. `delta` (the batch queue) is zero at
/// every event by construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemState {
    pub k: usize,
    pub t: f64,
    pub nodes: Vec<NodeState>,
    pub delta: f64,
}

impl SystemState {
    pub fn initial(cfg: &ValidatedConfig) -> Self {
        Self {
            k: 0,
            t: 0.0,
            nodes: cfg
                .nodes
                .iter()
                .map(|p| NodeState { u: p.u0, w: p.w0, gamma: 0.0 })
                .collect(),
            delta: 0.0,
        }
    }

    pub fn rates(&self) -> Vec<f64> {
        self.nodes.iter().map(|s| s.u).collect()
    }

    pub fn queues(&self) -> Vec<f64> {
        self.nodes.iter().map(|s| s.w).collect()
    }

    pub fn cycle_period(&self, cfg: &ValidatedConfig) -> Result<f64, ModelError> {
        cycle_period(cfg, &self.rates())
    }
}

/// Limiting values of the closed loop.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Equilibrium {
    pub t_star: f64,
    pub u_star: Vec<f64>,
    pub w_star: Vec<f64>,
}

/// `Σ βᵢuᵢ`: the aggregate admission rate right after a multiplicative decrease.
pub fn backoff_load(cfg: &ValidatedConfig, rates: &[f64]) -> f64 {
    cfg.nodes.iter().zip(rates).map(|(p, u)| p.beta * u).sum()
}

/// Cycle period `T(k) = (λ − Σ βᵢuᵢ(k)) / (Σ αᵢ / 2)`.
///
/// The batch queue, empty at the event, refills while the aggregate
/// admission rate is below `λ` and clears again once the admitted volume
/// catches up with `λT`. A non-positive result means it never refills.
pub fn cycle_period(cfg: &ValidatedConfig, rates: &[f64]) -> Result<f64, ModelError> {
    if rates.len() != cfg.n() {
        return Err(ModelError::DimensionMismatch { expected: cfg.n(), got: rates.len() });
    }
    let load = backoff_load(cfg, rates);
    let period = (cfg.lambda - load) / (cfg.alpha_sum / 2.0);
    if period > 0.0 {
        Ok(period)
    } else {
        Err(ModelError::NonPositiveCycle { period, lambda: cfg.lambda, backoff_load: load })
    }
}

/// `uᵢ(k+1) = βᵢuᵢ(k) + αᵢT(k)`.
pub fn admission_update(u_k: f64, period: f64, p: &NodeParams) -> f64 {
    p.beta * u_k + p.alpha * period
}

/// Admission rate `τ` seconds into the cycle: `βᵢuᵢ(k) + αᵢτ`.
///
/// `τ = T` is accepted and returns the left limit, i.e. the peak rate just
/// before the next multiplicative decrease.
pub fn admission_rate_at(tau: f64, u_k: f64, period: f64, p: &NodeParams) -> Result<f64, ModelError> {
    if !(tau >= 0.0 && tau <= period) {
        return Err(ModelError::TauOutOfRange { tau, period });
    }
    Ok(p.beta * u_k + p.alpha * tau)
}

/// `uᵢᵃᵛ(k) = βᵢuᵢ(k) + (αᵢ/2)T(k)`, the mean admission rate over the cycle.
pub fn average_admission_rate(u_k: f64, period: f64, p: &NodeParams) -> f64 {
    p.beta * u_k + 0.5 * p.alpha * period
}

/// Requests admitted by node `i` over the whole cycle (the trapezoid area
/// under the admission ramp).
pub fn admitted_volume(u_k: f64, period: f64, p: &NodeParams) -> f64 {
    average_admission_rate(u_k, period, p) * period
}

/// Limiting cycle period `T* = λ / Σⱼ (αⱼ/2)(1+βⱼ)/(1−βⱼ)`, admission rates
/// `u*ᵢ = αᵢT*/(1−βᵢ)` and queue fixed points `w*ᵢ = αᵢT*²/8`.
pub fn fixed_point(cfg: &ValidatedConfig) -> Equilibrium {
    let denom: f64 = cfg
        .nodes
        .iter()
        .map(|p| 0.5 * p.alpha * (1.0 + p.beta) / (1.0 - p.beta))
        .sum();
    let t_star = cfg.lambda / denom;
    Equilibrium {
        t_star,
        u_star: cfg.nodes.iter().map(|p| p.alpha * t_star / (1.0 - p.beta)).collect(),
        w_star: cfg.nodes.iter().map(|p| p.alpha * t_star * t_star / 8.0).collect(),
    }
}
