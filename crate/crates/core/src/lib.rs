//! Event-driven AIMD admission control with decentralized resource allocation.
//!
//! A constant workload `λ` enters a central batch queue and is dispatched to
//! `n` computing nodes. Each node runs an AIMD admission controller: its
//! admission rate ramps up linearly with slope `αᵢ` and is cut by `βᵢ` every
//! time the batch queue empties (a clearance event). Between two clearance
//! events each node serves its local queue at a rate chosen by a tangent-line
//! feedback law.
//!
//! The crate is organised bottom-up:
//!
//! * [`model`]: domain types and the closed-form per-node AIMD dynamics.
//! * [`spectral`]: the aggregate AIMD matrix, its spectrum via the
//!   diagonal-plus-rank-one secular equation, and the Schur certificate.
//! * [`allocation`]: the service-rate feedback law, queue update and
//!   invariant sets.
//! * [`metrics`]: queueing-time metrics and conservation checks.
//! * [`engine`]: deterministic, oracle (forward Euler) and stochastic runs.
//! * [`cli`]: config files, CSV/JSON writers and the command entry points
//!   behind the `aimd` binary.

// `!(x > 0.0)` is used on purpose so NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod allocation;
pub mod cli;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod model;
pub mod spectral;

pub use error::{AllocationError, ConfigError, EngineError, MetricsError, ModelError, SpectralError};
pub use model::{
    Equilibrium, NegativeCyclePolicy, NodeParams, NodeState, SystemConfig, SystemState,
    ValidatedConfig,
};

/// Relative tolerance for closed-form algebraic identities.
pub const REL_TOL: f64 = 1e-9;
/// Absolute floor paired with [`REL_TOL`].
pub const ABS_FLOOR: f64 = 1e-12;

/// `|a - b| <= REL_TOL * max(|a|, |b|) + ABS_FLOOR`.
pub fn approx_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= REL_TOL * a.abs().max(b.abs()) + ABS_FLOOR
}
