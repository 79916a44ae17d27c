//! Event-driven simulation.
//!
//! One cycle runs from a clearance event (the batch queue is empty) to the
//! next: every node cuts its admission rate by `βᵢ`, ramps it with slope `αᵢ`,
//! and serves its local queue at the rate picked at the start of the cycle.
//!
//! Three drivers produce [`CycleRecord`]s:
//!
//! * [`run_deterministic`]: the closed-form recursion.
//! * [`run_oracle`]: forward-Euler integration of the continuous dynamics
//!   with clearance detection, sharing none of the closed forms it checks.
//! * [`run_stochastic`]: exponential inter-arrival times, empirical only.

mod oracle;
mod stochastic;
mod trace;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use oracle::run_oracle;
pub use stochastic::{run_stochastic, StochasticConfig, StochasticRun};
pub use trace::{reconstruct_trace, NodeTracePoint, TracePoint};

use crate::allocation::{queue_update, service_rate};
use crate::error::EngineError;
use crate::metrics::{queueing_time, CycleMetrics, NodeCycle};
use crate::model::{
    admission_update, backoff_load, cycle_period, NegativeCyclePolicy, NodeState, SystemState,
    ValidatedConfig,
};

/// Upper bound on zero-duration backoffs at a single event. Each one scales
/// `Σβu` by at most `max β < 1`, so this is only hit by absurd inputs.
const MAX_BACKOFF_REPEATS: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeCycleRecord {
    /// `uᵢ(k)`, after any repeated backoffs at this event.
    pub u: f64,
    pub gamma: f64,
    pub t_z: f64,
    /// `wᵢ(k)`.
    pub w: f64,
    /// `uᵢ(k+1)`.
    pub u_next: f64,
    /// `wᵢ(k+1)`.
    pub w_next: f64,
    pub metrics: CycleMetrics,
    /// Tangency instant falls after the clearance event.
    pub late_tangency: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub k: usize,
    pub t_start: f64,
    pub t_end: f64,
    pub period: f64,
    pub nodes: Vec<NodeCycleRecord>,
    /// Zero-duration multiplicative decreases applied at event `k`.
    pub backoff_repeats: usize,
    /// `λT − Σᵢ(admitted by node i)`: the batch queue left at the event.
    pub clearance_residual: f64,
}

impl CycleRecord {
    pub fn rates(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.u).collect()
    }

    pub fn queues(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.w).collect()
    }

    pub fn next_rates(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.u_next).collect()
    }

    pub fn next_queues(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.w_next).collect()
    }

    pub fn average_rates(&self) -> Vec<f64> {
        self.nodes.iter().map(|n| n.metrics.u_av).collect()
    }
}

/// System state at every event `0..=K` of a run.
pub fn states(records: &[CycleRecord]) -> Vec<SystemState> {
    let mut out: Vec<SystemState> = records
        .iter()
        .map(|r| SystemState {
            k: r.k,
            t: r.t_start,
            nodes: r
                .nodes
                .iter()
                .map(|n| NodeState { u: n.u, w: n.w, gamma: n.gamma })
                .collect(),
            delta: 0.0,
        })
        .collect();
    if let Some(last) = records.last() {
        out.push(SystemState {
            k: last.k + 1,
            t: last.t_end,
            nodes: last
                .nodes
                .iter()
                .map(|n| NodeState { u: n.u_next, w: n.w_next, gamma: 0.0 })
                .collect(),
            delta: 0.0,
        });
    }
    out
}

/// Resolve `λ ≤ Σβu` at event `k` according to the config's policy.
/// Returns the number of extra backoffs applied to `rates`.
pub(crate) fn enforce_feasibility(
    cfg: &ValidatedConfig,
    k: usize,
    rates: &mut [f64],
) -> Result<usize, EngineError> {
    let mut repeats = 0;
    while backoff_load(cfg, rates) >= cfg.lambda {
        match cfg.negative_cycle_policy {
            NegativeCyclePolicy::Error => {
                let source = cycle_period(cfg, rates).expect_err("load exceeds lambda");
                return Err(EngineError::Cycle { k, source });
            }
            NegativeCyclePolicy::RepeatBackoff => {
                if repeats == MAX_BACKOFF_REPEATS {
                    let source = cycle_period(cfg, rates).expect_err("load exceeds lambda");
                    return Err(EngineError::Cycle { k, source });
                }
                for (u, p) in rates.iter_mut().zip(&cfg.nodes) {
                    *u *= p.beta;
                }
                repeats += 1;
            }
        }
    }
    Ok(repeats)
}

/// Closed-form run of `cycles` cycles from the config's initial state.
///
/// Each cycle computes, in order: `T(k)`, `γᵢ(k)` from the pre-update queue,
/// `wᵢ(k+1)`, `uᵢ(k+1)`, then advances the clock.
pub fn run_deterministic(cfg: &ValidatedConfig, cycles: usize) -> Result<Vec<CycleRecord>, EngineError> {
    let mut rates = cfg.initial_rates();
    let mut queues = cfg.initial_queues();
    let mut t = 0.0;
    let mut records = Vec::with_capacity(cycles);
    for k in 0..cycles {
        let backoff_repeats = enforce_feasibility(cfg, k, &mut rates)?;
        let period = cycle_period(cfg, &rates).map_err(|source| EngineError::Cycle { k, source })?;
        let mut nodes = Vec::with_capacity(cfg.n());
        let mut admitted = 0.0;
        for ((p, &u), &w) in cfg.nodes.iter().zip(&rates).zip(&queues) {
            let decision = service_rate(u, w, p)?;
            let w_next = queue_update(w, u, decision.gamma, period, p);
            let u_next = admission_update(u, period, p);
            let metrics = queueing_time(
                &NodeCycle { u_k: u, w_k: w, w_next, gamma: decision.gamma, period },
                p,
            )?;
            admitted += metrics.u_av * period;
            nodes.push(NodeCycleRecord {
                u,
                gamma: decision.gamma,
                t_z: decision.t_z,
                w,
                u_next,
                w_next,
                metrics,
                late_tangency: decision.late_tangency(period),
            });
        }
        rates = nodes.iter().map(|n| n.u_next).collect();
        queues = nodes.iter().map(|n| n.w_next).collect();
        records.push(CycleRecord {
            k,
            t_start: t,
            t_end: t + period,
            period,
            nodes,
            backoff_repeats,
            clearance_residual: cfg.lambda * period - admitted,
        });
        t += period;
    }
    Ok(records)
}

/// Independent deterministic runs in parallel; results keep input order.
pub fn run_deterministic_batch(
    cfgs: &[ValidatedConfig],
    cycles: usize,
) -> Vec<Result<Vec<CycleRecord>, EngineError>> {
    cfgs.par_iter().map(|cfg| run_deterministic(cfg, cycles)).collect()
}

/// Independent stochastic runs of one config, one per seed.
pub fn run_stochastic_batch(cfg: &ValidatedConfig, seeds: &[u64], horizon: f64) -> Vec<StochasticRun> {
    seeds
        .par_iter()
        .map(|&seed| run_stochastic(cfg, &StochasticConfig { seed, horizon }))
        .collect()
}

/// Relative distance `‖U − u*‖ / ‖u*‖`.
pub fn relative_distance(u: &[f64], target: &[f64]) -> f64 {
    let num: f64 = u.iter().zip(target).map(|(a, b)| (a - b) * (a - b)).sum();
    let den: f64 = target.iter().map(|b| b * b).sum();
    (num / den).sqrt()
}

/// Worst disagreement between two runs of the same config.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunDeviation {
    /// `max_k |T̃(k) − T(k)| / T(k)`.
    pub period: f64,
    /// Per node `max_k |ũᵢ(k) − uᵢ(k)| / max_k |uᵢ(k)|`, maximized over nodes.
    pub rate: f64,
    /// Same for the node queues.
    pub queue: f64,
    /// Largest of the three measures restricted to each cycle.
    pub per_cycle: Vec<f64>,
    /// `(k, quantity, node)` of the worst offender; node is one-based, 0 for `T`.
    pub worst: Option<(usize, String, usize)>,
}

impl RunDeviation {
    pub fn max(&self) -> f64 {
        self.period.max(self.rate).max(self.queue)
    }
}

/// Compare `candidate` against `reference` on `T(k)` and on the states
/// `uᵢ(k+1)`, `wᵢ(k+1)` they produce. Rates and queues are scaled by the
/// largest magnitude the reference trajectory `k = 0..=K` reaches for that
/// node, since queues touch zero along the way.
pub fn compare_runs(reference: &[CycleRecord], candidate: &[CycleRecord]) -> RunDeviation {
    let cycles = reference.len().min(candidate.len());
    let n = reference.first().map_or(0, |r| r.nodes.len());
    let scale = |f: fn(&NodeCycleRecord) -> (f64, f64), i: usize| {
        reference[..cycles]
            .iter()
            .map(|r| {
                let (a, b) = f(&r.nodes[i]);
                a.abs().max(b.abs())
            })
            .fold(0.0_f64, f64::max)
            .max(f64::MIN_POSITIVE)
    };
    let u_scale: Vec<f64> = (0..n).map(|i| scale(|x| (x.u, x.u_next), i)).collect();
    let w_scale: Vec<f64> = (0..n).map(|i| scale(|x| (x.w, x.w_next), i)).collect();

    let mut dev = RunDeviation { period: 0.0, rate: 0.0, queue: 0.0, per_cycle: Vec::with_capacity(cycles), worst: None };
    let mut worst = 0.0;
    for (k, (r, c)) in reference.iter().zip(candidate).enumerate() {
        let mut cycle_max = 0.0_f64;
        let mut consider = |value: f64, what: &str, node: usize, slot: &mut f64| {
            *slot = slot.max(value);
            cycle_max = cycle_max.max(value);
            if value > worst {
                worst = value;
                dev.worst = Some((k, what.to_string(), node));
            }
        };
        consider((c.period - r.period).abs() / r.period, "T", 0, &mut dev.period);
        for i in 0..n {
            let (a, b) = (&c.nodes[i], &r.nodes[i]);
            consider((a.u_next - b.u_next).abs() / u_scale[i], "u", i + 1, &mut dev.rate);
            consider((a.w_next - b.w_next).abs() / w_scale[i], "w", i + 1, &mut dev.queue);
        }
        dev.per_cycle.push(cycle_max);
    }
    dev
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::ModelError;
    use crate::model::{fixed_point, NodeParams, SystemConfig};
    use approx::assert_relative_eq;

    #[test]
    fn four_node_first_cycle() {
        let cfg = SystemConfig::four_node().validate().unwrap();
        let recs = run_deterministic(&cfg, 2).unwrap();
        assert_relative_eq!(recs[0].period, 3.4, epsilon = 1e-12);
        assert_relative_eq!(recs[1].period, 0.3, epsilon = 1e-12);
        assert_eq!(recs[1].rates(), recs[0].next_rates());
        for (got, want) in recs[0].next_rates().iter().zip([17.0, 36.5, 56.0, 75.5]) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
        assert_relative_eq!(recs[0].nodes[0].gamma, 75.0_f64.sqrt(), epsilon = 1e-12);
        assert!(recs[0].clearance_residual.abs() < 1e-9);
    }

    #[test]
    fn four_node_converges() {
        let cfg = SystemConfig::four_node().validate().unwrap();
        let recs = run_deterministic(&cfg, 30).unwrap();
        assert!((recs[29].period - 4.0 / 3.0).abs() < 0.01);
        let eq = fixed_point(&cfg);
        assert!(relative_distance(&recs[10].rates(), &eq.u_star) < 0.15);
        assert!(recs.iter().all(|r| r.backoff_repeats == 0));
    }

    #[test]
    fn stationary_single_node() {
        let p = NodeParams::new(3.0, 0.4, 0.0, 0.0);
        let base = SystemConfig::new(10.0, vec![p]).validate().unwrap();
        let eq = fixed_point(&base);
        let cfg = base.with_initial_state(&eq.u_star, &eq.w_star).unwrap();
        let recs = run_deterministic(&cfg, 5).unwrap();
        for r in &recs {
            assert_relative_eq!(r.period, eq.t_star, max_relative = 1e-12);
            assert_relative_eq!(r.nodes[0].u, eq.u_star[0], max_relative = 1e-12);
            assert_relative_eq!(r.nodes[0].w, eq.w_star[0], max_relative = 1e-12);
            assert_relative_eq!(r.nodes[0].metrics.u_av, 10.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn overloaded_start_under_each_policy() {
        let nodes = vec![NodeParams::new(1.0, 0.5, 150.0, 0.0), NodeParams::new(1.0, 0.5, 150.0, 0.0)];
        let cfg = SystemConfig::new(100.0, nodes.clone()).validate().unwrap();
        let recs = run_deterministic(&cfg, 3).unwrap();
        // Σβu = 150 → 75 after one extra backoff
        assert_eq!(recs[0].backoff_repeats, 1);
        assert_eq!(recs[0].nodes[0].u, 75.0);
        assert!(recs[0].period > 0.0);

        // under `error` the same start is rejected up front
        let strict = SystemConfig::new(100.0, nodes)
            .with_policy(NegativeCyclePolicy::Error)
            .validate();
        assert!(strict.is_err());
    }

    #[test]
    fn error_policy_aborts_with_cycle_index() {
        let cfg = SystemConfig::new(
            10.0,
            vec![NodeParams::new(100.0, 0.99, 0.0, 0.0), NodeParams::new(0.01, 0.01, 0.0, 0.0)],
        )
        .with_policy(NegativeCyclePolicy::Error)
        .validate()
        .unwrap();
        let mut rates = vec![20.0, 0.0];
        let err = enforce_feasibility(&cfg, 7, &mut rates).unwrap_err();
        assert!(matches!(err, EngineError::Cycle { k: 7, source: ModelError::NonPositiveCycle { .. } }));
    }

    #[test]
    fn states_include_final_event() {
        let cfg = SystemConfig::four_node().validate().unwrap();
        let recs = run_deterministic(&cfg, 3).unwrap();
        let s = states(&recs);
        assert_eq!(s.len(), 4);
        assert_eq!(s[3].k, 3);
        assert_eq!(s[3].rates(), recs[2].next_rates());
        assert!(s.windows(2).all(|w| w[1].t >= w[0].t));
        assert!(states(&[]).is_empty());
    }

    #[test]
    fn batch_preserves_order() {
        let a = SystemConfig::four_node().validate().unwrap();
        let b = SystemConfig::new(5.0, vec![NodeParams::new(1.0, 0.5, 0.0, 0.0)]).validate().unwrap();
        let out = run_deterministic_batch(&[a.clone(), b.clone()], 4);
        assert_eq!(out[0].as_ref().unwrap(), &run_deterministic(&a, 4).unwrap());
        assert_eq!(out[1].as_ref().unwrap(), &run_deterministic(&b, 4).unwrap());
    }
}
