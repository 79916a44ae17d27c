//! Random arrivals with exponential inter-arrival times.
//!
//! Each arrival adds one request to the batch queue, which the nodes drain
//! as a fluid at rate `Σᵢ uᵢ(t)` while it is non-empty. A clearance event
//! fires every time the batch queue empties before the next arrival; the
//! next cycle then starts with an empty batch queue and waits for traffic
//! while the admission rates keep ramping. No analytical guarantees apply
//! to this mode.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{CycleRecord, NodeCycleRecord};
use crate::allocation::service_rate;
use crate::metrics::CycleMetrics;
use crate::model::ValidatedConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StochasticConfig {
    pub seed: u64,
    /// Simulated time span, seconds.
    pub horizon: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StochasticRun {
    /// Completed cycles; a cycle still open at the horizon is dropped.
    pub records: Vec<CycleRecord>,
    /// Arrival instants up to the horizon.
    pub arrivals: Vec<f64>,
    /// Stopped early at the config's `max_cycles`.
    pub truncated: bool,
}

impl StochasticRun {
    /// The first gap is measured from `t = 0`.
    pub fn mean_interarrival(&self) -> Option<f64> {
        let last = *self.arrivals.last()?;
        Some(last / self.arrivals.len() as f64)
    }

    /// Simulated time covered by completed cycles divided by their count.
    pub fn mean_cycle_period(&self) -> Option<f64> {
        let last = self.records.last()?;
        Some(last.t_end / self.records.len() as f64)
    }
}

/// Exponential variate by inverse CDF.
fn exponential(rng: &mut ChaCha8Rng, rate: f64) -> f64 {
    let u: f64 = rng.random();
    -(1.0 - u).ln() / rate
}

/// Per-node accumulator over one cycle.
#[derive(Debug, Clone, Copy)]
struct NodeTally {
    w: f64,
    admitted: f64,
    w_area: f64,
}

/// Advance a node queue over `len` seconds with inflow `c0 + γ + αs` (or no
/// inflow when `busy` is false) and outflow `γ`, floored at zero. Returns
/// (queue at end, ∫ queue).
fn advance_queue(w0: f64, c0: f64, alpha: f64, gamma: f64, len: f64, busy: bool) -> (f64, f64) {
    if len <= 0.0 {
        return (w0, 0.0);
    }
    if !busy {
        if gamma <= 0.0 {
            return (w0, w0 * len);
        }
        let empty_at = w0 / gamma;
        return if empty_at >= len {
            (w0 - gamma * len, w0 * len - 0.5 * gamma * len * len)
        } else {
            (0.0, 0.5 * w0 * empty_at)
        };
    }
    // net rate g(s) = c0 + αs, increasing
    let path = |s: f64| w0 + c0 * s + 0.5 * alpha * s * s;
    let path_area = |s: f64| w0 * s + 0.5 * c0 * s * s + alpha * s * s * s / 6.0;
    let turn = if c0 < 0.0 { (-c0 / alpha).min(len) } else { 0.0 };
    if c0 >= 0.0 || path(turn) >= 0.0 {
        return (path(len).max(0.0), path_area(len));
    }
    // queue empties at s₁ < turn, stays empty until g turns positive at s*
    let disc = (c0 * c0 - 2.0 * alpha * w0).max(0.0);
    let s1 = 2.0 * w0 / (-c0 + disc.sqrt());
    let s_star = -c0 / alpha;
    let area_before = path_area(s1);
    if len <= s_star {
        (0.0, area_before)
    } else {
        let r = len - s_star;
        (0.5 * alpha * r * r, area_before + alpha * r * r * r / 6.0)
    }
}

/// Run until `s.horizon` or `cfg.max_cycles` completed cycles. Bit-identical
/// for a given seed.
pub fn run_stochastic(cfg: &ValidatedConfig, s: &StochasticConfig) -> StochasticRun {
    let n = cfg.n();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let alpha_sum = cfg.alpha_sum();

    let mut arrivals = Vec::new();
    let mut records = Vec::new();
    let mut truncated = false;

    let mut rates = cfg.initial_rates();
    let mut queues = cfg.initial_queues();
    let mut next_arrival = exponential(&mut rng, cfg.lambda);
    let mut t = 0.0_f64;
    let mut delta = 0.0_f64;

    'cycles: loop {
        if records.len() >= cfg.max_cycles {
            truncated = true;
            break;
        }
        let k = records.len();
        let t_start = t;
        let base: Vec<f64> = rates.iter().zip(&cfg.nodes).map(|(u, p)| p.beta * u).collect();
        let base_sum: f64 = base.iter().sum();
        let decisions: Vec<_> = cfg
            .nodes
            .iter()
            .zip(&rates)
            .zip(&queues)
            .map(|((p, &u), &w)| service_rate(u, w, p).expect("queues and rates stay nonnegative"))
            .collect();
        let mut tally: Vec<NodeTally> =
            queues.iter().map(|&w| NodeTally { w, admitted: 0.0, w_area: 0.0 }).collect();
        let mut delta_area = 0.0;

        let advance = |tally: &mut [NodeTally], from: f64, to: f64, busy: bool| {
            let (tau0, len) = (from - t_start, to - from);
            for (i, node) in tally.iter_mut().enumerate() {
                let p = &cfg.nodes[i];
                let gamma = decisions[i].gamma;
                let c0 = base[i] + p.alpha * tau0 - gamma;
                let (w, area) = advance_queue(node.w, c0, p.alpha, gamma, len, busy);
                node.w = w;
                node.w_area += area;
                if busy {
                    node.admitted += (base[i] + p.alpha * tau0) * len + 0.5 * p.alpha * len * len;
                }
            }
        };

        loop {
            if delta > 0.0 {
                let tau = t - t_start;
                let drain_rate = base_sum + alpha_sum * tau;
                // time for Σu to remove δ: drain_rate·s + (Σα/2)s² = δ
                let s_clear =
                    2.0 * delta / (drain_rate + (drain_rate * drain_rate + 2.0 * alpha_sum * delta).sqrt());
                if t + s_clear < next_arrival {
                    if t + s_clear > s.horizon {
                        break 'cycles;
                    }
                    advance(&mut tally, t, t + s_clear, true);
                    delta_area += delta * s_clear
                        - 0.5 * drain_rate * s_clear * s_clear
                        - alpha_sum * s_clear * s_clear * s_clear / 6.0;
                    t += s_clear;
                    delta = 0.0;
                    break;
                }
                let len = next_arrival - t;
                if next_arrival > s.horizon {
                    break 'cycles;
                }
                advance(&mut tally, t, next_arrival, true);
                delta_area += delta * len - 0.5 * drain_rate * len * len - alpha_sum * len * len * len / 6.0;
                delta -= drain_rate * len + 0.5 * alpha_sum * len * len;
                delta = delta.max(0.0);
            } else {
                if next_arrival > s.horizon {
                    break 'cycles;
                }
                advance(&mut tally, t, next_arrival, false);
            }
            t = next_arrival;
            arrivals.push(t);
            delta += 1.0;
            next_arrival = t + exponential(&mut rng, cfg.lambda);
        }

        let period = t - t_start;
        let total_admitted: f64 = tally.iter().map(|x| x.admitted).sum();
        let batch_wait = if total_admitted > 0.0 { delta_area / total_admitted } else { 0.0 };
        let mut nodes = Vec::with_capacity(n);
        for i in 0..n {
            let p = &cfg.nodes[i];
            let x = tally[i];
            let u_av = x.admitted / period;
            let t_w = if x.admitted > 0.0 { x.w_area / x.admitted } else { 0.0 };
            nodes.push(NodeCycleRecord {
                u: rates[i],
                gamma: decisions[i].gamma,
                t_z: decisions[i].t_z,
                w: queues[i],
                u_next: base[i] + p.alpha * period,
                w_next: x.w,
                metrics: CycleMetrics {
                    u_av,
                    w_av: 0.5 * (queues[i] + x.w),
                    t_delta: batch_wait,
                    t_w,
                    t_total: batch_wait + t_w,
                },
                late_tangency: decisions[i].late_tangency(period),
            });
        }
        rates = nodes.iter().map(|r| r.u_next).collect();
        queues = nodes.iter().map(|r| r.w_next).collect();
        records.push(CycleRecord {
            k,
            t_start,
            t_end: t,
            period,
            nodes,
            backoff_repeats: 0,
            clearance_residual: delta,
        });
    }

    StochasticRun { records, arrivals, truncated }
}
