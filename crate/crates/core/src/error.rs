use std::fmt;

use thiserror::Error;

/// A single violated config invariant. Node indices are zero-based in the
/// value and printed one-based.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Violation {
    #[error("arrival rate must be positive and finite, got {0}")]
    NonPositiveLambda(f64),
    #[error("at least one node is required")]
    NoNodes,
    #[error("max_cycles must be a positive integer")]
    ZeroMaxCycles,
    #[error("node {}: growth rate must be positive and finite, got {value}", index + 1)]
    NonPositiveAlpha { index: usize, value: f64 },
    #[error("node {}: backoff must lie in open interval (0,1), got {value}", index + 1)]
    BackoffOutOfRange { index: usize, value: f64 },
    #[error("node {}: initial admission rate must be nonnegative and finite, got {value}", index + 1)]
    NegativeInitialRate { index: usize, value: f64 },
    #[error("node {}: initial queue length must be nonnegative and finite, got {value}", index + 1)]
    NegativeInitialQueue { index: usize, value: f64 },
    #[error("infeasible initial state: lambda = {lambda} does not exceed sum(beta_i * u_i(0)) = {backoff_load}")]
    Infeasible { lambda: f64, backoff_load: f64 },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid configuration: {}", ViolationList(.0))]
    Invalid(Vec<Violation>),
    #[error("cannot parse configuration: {0}")]
    Parse(String),
}

impl ConfigError {
    pub fn violations(&self) -> &[Violation] {
        match self {
            ConfigError::Invalid(v) => v,
            ConfigError::Parse(_) => &[],
        }
    }
}

struct ViolationList<'a>(&'a [Violation]);

impl fmt::Display for ViolationList<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    /// `λ ≤ Σ βᵢuᵢ(k)`: the batch queue cannot refill, so no positive cycle exists.
    #[error("non-positive cycle period {period} (lambda = {lambda}, sum(beta_i * u_i) = {backoff_load})")]
    NonPositiveCycle {
        period: f64,
        lambda: f64,
        backoff_load: f64,
    },
    #[error("intra-cycle time {tau} outside [0, {period}]")]
    TauOutOfRange { tau: f64, period: f64 },
    #[error("cycle period must be positive, got {0}")]
    NonPositivePeriod(f64),
    #[error("rate vector has {got} entries, expected {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("eigenvalue {index} = {value} escapes its interlacing bracket [{lower}, {upper}]")]
    InterlacingViolation {
        index: usize,
        value: f64,
        lower: f64,
        upper: f64,
    },
    #[error("determinant identity violated: |prod(phi) + prod(beta)| = {residual} ({relative} relative)")]
    DetIdentityViolation { residual: f64, relative: f64 },
    #[error("spectrum does not have the expected sign structure: {0}")]
    StructureViolation(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("rank-one weight must be non-zero and finite, got {0}")]
    InvalidWeight(f64),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AllocationError {
    #[error("queue length must be nonnegative, got {0}")]
    NegativeQueue(f64),
    #[error("admission rate must be nonnegative, got {0}")]
    NegativeRate(f64),
    #[error("queue never entered its invariant set within {horizon} cycles")]
    NotYet { horizon: usize },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("no arrivals in the window: queueing time is undefined")]
    ZeroArrivals,
    #[error("average admission rate is zero: queueing time is undefined")]
    ZeroAdmission,
    #[error("cumulative arrivals decrease at sample {0}")]
    NonMonotoneArrivals(usize),
    #[error("departures exceed arrivals plus carry-in at sample {0}")]
    DeparturesExceedArrivals(usize),
    #[error("trace columns have different lengths or fewer than two samples")]
    MalformedTrace,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("cycle {k}: {source}")]
    Cycle {
        k: usize,
        #[source]
        source: ModelError,
    },
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Allocation(#[from] AllocationError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
