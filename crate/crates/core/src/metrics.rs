//! Queueing-time metrics.
//!
//! Requests for node `i` first wait in the batch queue (its share
//! `δᵢ(τ)`) and then in the node queue `wᵢ(τ)`. Their sum is linear in `τ`,
//! so the mean wait over a cycle is the trapezium area
//! `(wᵢ(k) + wᵢ(k+1))T/2` divided by the admitted volume `uᵢᵃᵛT`.

use serde::{Deserialize, Serialize};

use crate::error::MetricsError;
use crate::model::{average_admission_rate, NodeParams};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CycleMetrics {
    pub u_av: f64,
    /// `(w(k) + w(k+1)) / 2`.
    pub w_av: f64,
    /// Mean wait in the batch queue.
    pub t_delta: f64,
    /// Mean wait in the node queue.
    pub t_w: f64,
    pub t_total: f64,
}

/// Sampled cumulative counts over a window. `carry_in` is the backlog
/// present at the start of the window, so `Q = carry_in + X − Y`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CumulativeTrace {
    pub t: Vec<f64>,
    pub arrivals: Vec<f64>,
    pub departures: Vec<f64>,
    pub carry_in: f64,
}

/// `T_q = ∫ Q(s) ds / X(t_end)`, integrated with the trapezoid rule over the
/// samples.
pub fn generic_queueing_time(trace: &CumulativeTrace) -> Result<f64, MetricsError> {
    let n = trace.t.len();
    if n < 2 || trace.arrivals.len() != n || trace.departures.len() != n {
        return Err(MetricsError::MalformedTrace);
    }
    let slack = 1e-9 * trace.arrivals[n - 1].abs().max(trace.carry_in).max(1.0);
    let mut area = 0.0;
    let mut prev_q = trace.carry_in + trace.arrivals[0] - trace.departures[0];
    for i in 0..n {
        let q = trace.carry_in + trace.arrivals[i] - trace.departures[i];
        if q < -slack {
            return Err(MetricsError::DeparturesExceedArrivals(i));
        }
        if i > 0 {
            if trace.arrivals[i] < trace.arrivals[i - 1] {
                return Err(MetricsError::NonMonotoneArrivals(i));
            }
            area += 0.5 * (q + prev_q) * (trace.t[i] - trace.t[i - 1]);
        }
        prev_q = q;
    }
    let arrived = trace.arrivals[n - 1] - trace.arrivals[0];
    if arrived <= 0.0 {
        return Err(MetricsError::ZeroArrivals);
    }
    Ok(area / arrived)
}

/// Node `i`'s share of the batch queue: `δᵢ(τ) = uᵢᵃᵛτ − βᵢuᵢ(k)τ − (αᵢ/2)τ²`.
/// Zero at both ends of the cycle, peak `(αᵢ/8)T²` at `T/2`.
pub fn batch_share_trace(tau: f64, u_k: f64, u_av: f64, p: &NodeParams) -> f64 {
    u_av * tau - p.beta * u_k * tau - 0.5 * p.alpha * tau * tau
}

/// One node over one completed cycle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCycle {
    pub u_k: f64,
    pub w_k: f64,
    pub w_next: f64,
    pub gamma: f64,
    pub period: f64,
}

/// `Tᵢ(k) = (wᵢ(k) + wᵢ(k+1)) / (2uᵢᵃᵛ(k))`, the Little's-Law form.
pub fn little_total(w_k: f64, w_next: f64, u_av: f64) -> Result<f64, MetricsError> {
    if !(u_av > 0.0) {
        return Err(MetricsError::ZeroAdmission);
    }
    Ok(0.5 * (w_k + w_next) / u_av)
}

/// Total and per-queue waiting times for one node and cycle. The component
/// integrals are polynomial and evaluated in closed form:
///
/// * `∫₀ᵀ δᵢ = αᵢT³/12`
/// * `∫₀ᵀ wᵢ = w(k)T + (βᵢuᵢ(k) − γ)T²/2 + αᵢT³/6`
pub fn queueing_time(c: &NodeCycle, p: &NodeParams) -> Result<CycleMetrics, MetricsError> {
    let u_av = average_admission_rate(c.u_k, c.period, p);
    let t_total = little_total(c.w_k, c.w_next, u_av)?;
    let t = c.period;
    let admitted = u_av * t;
    let delta_area = p.alpha * t * t * t / 12.0;
    let w_area = c.w_k * t + (p.beta * c.u_k - c.gamma) * t * t / 2.0 + p.alpha * t * t * t / 6.0;
    Ok(CycleMetrics {
        u_av,
        w_av: 0.5 * (c.w_k + c.w_next),
        t_delta: delta_area / admitted,
        t_w: w_area / admitted,
        t_total,
    })
}

/// `|Σᵢ uᵢᵃᵛ(k) − λ|`.
pub fn throughput_conservation(u_avs: &[f64], lambda: f64) -> f64 {
    (u_avs.iter().sum::<f64>() - lambda).abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::allocation::{queue_update, service_rate};
    use crate::model::SystemConfig;
    use approx::assert_relative_eq;

    fn node1() -> NodeParams {
        SystemConfig::four_node().nodes[0]
    }

    #[test]
    fn instant_service_has_zero_wait() {
        let t: Vec<f64> = (0..=10).map(|i| i as f64 * 0.1).collect();
        let x: Vec<f64> = t.iter().map(|s| 3.0 * s).collect();
        let trace = CumulativeTrace { t, arrivals: x.clone(), departures: x, carry_in: 0.0 };
        assert_eq!(generic_queueing_time(&trace).unwrap(), 0.0);
    }

    #[test]
    fn no_service_waits_half_the_window() {
        let t: Vec<f64> = (0..=100).map(|i| i as f64 * 0.05).collect();
        let x: Vec<f64> = t.iter().map(|s| 7.0 * s).collect();
        let trace =
            CumulativeTrace { departures: vec![0.0; t.len()], t, arrivals: x, carry_in: 0.0 };
        // ∫λs ds / λt = t/2 with t = 5
        assert_relative_eq!(generic_queueing_time(&trace).unwrap(), 2.5, epsilon = 1e-12);
    }

    #[test]
    fn generic_errors() {
        let trace = CumulativeTrace {
            t: vec![0.0, 1.0],
            arrivals: vec![0.0, 0.0],
            departures: vec![0.0, 0.0],
            carry_in: 0.0,
        };
        assert_eq!(generic_queueing_time(&trace), Err(MetricsError::ZeroArrivals));
        let trace = CumulativeTrace {
            t: vec![0.0, 1.0],
            arrivals: vec![0.0, 1.0],
            departures: vec![0.0, 2.0],
            carry_in: 0.0,
        };
        assert_eq!(generic_queueing_time(&trace), Err(MetricsError::DeparturesExceedArrivals(1)));
        let trace = CumulativeTrace {
            t: vec![0.0, 1.0, 2.0],
            arrivals: vec![0.0, 2.0, 1.0],
            departures: vec![0.0, 0.0, 0.0],
            carry_in: 0.0,
        };
        assert_eq!(generic_queueing_time(&trace), Err(MetricsError::NonMonotoneArrivals(2)));
        assert_eq!(
            generic_queueing_time(&CumulativeTrace::default()),
            Err(MetricsError::MalformedTrace)
        );
    }

    #[test]
    fn batch_share_profile() {
        let p = node1();
        let u_av = 8.5;
        assert_eq!(batch_share_trace(0.0, 0.0, u_av, &p), 0.0);
        assert_relative_eq!(batch_share_trace(3.4, 0.0, u_av, &p), 0.0, epsilon = 1e-12);
        assert_relative_eq!(batch_share_trace(1.7, 0.0, u_av, &p), 7.225, epsilon = 1e-12);
        assert_relative_eq!(p.alpha / 8.0 * 3.4 * 3.4, 7.225, epsilon = 1e-12);
    }

    #[test]
    fn equilibrium_wait() {
        let p = node1();
        let t = 4.0 / 3.0;
        let u = p.alpha * t / (1.0 - p.beta);
        let w = p.alpha * t * t / 8.0;
        let gamma = service_rate(u, w, &p).unwrap().gamma;
        let m = queueing_time(&NodeCycle { u_k: u, w_k: w, w_next: w, gamma, period: t }, &p).unwrap();
        assert_relative_eq!(m.u_av, 10.0, max_relative = 1e-12);
        assert_relative_eq!(m.t_total, 1.0 / 9.0, max_relative = 1e-12);
        assert_relative_eq!(m.t_delta + m.t_w, m.t_total, max_relative = 1e-12);
    }

    #[test]
    fn empty_queues_wait_nothing() {
        assert_eq!(little_total(0.0, 0.0, 4.0).unwrap(), 0.0);
        assert_eq!(little_total(1.0, 1.0, 0.0), Err(MetricsError::ZeroAdmission));
    }

    #[test]
    fn four_node_first_cycle_wait() {
        let p = node1();
        let gamma = service_rate(0.0, 7.5, &p).unwrap().gamma;
        let w1 = queue_update(7.5, 0.0, gamma, 3.4, &p);
        let m = queueing_time(&NodeCycle { u_k: 0.0, w_k: 7.5, w_next: w1, gamma, period: 3.4 }, &p)
            .unwrap();
        assert_relative_eq!(m.t_total, (7.5 + w1) / 17.0, max_relative = 1e-12);
        assert!((m.t_total - 0.8503).abs() < 1e-4);
        assert_relative_eq!(m.t_delta + m.t_w, m.t_total, max_relative = 1e-12);
        assert_relative_eq!(m.t_total, m.w_av / m.u_av, max_relative = 1e-15);
    }

    #[test]
    fn four_node_conservation() {
        let cfg = SystemConfig::four_node();
        let avs: Vec<f64> =
            cfg.nodes.iter().map(|p| average_admission_rate(p.u0, 3.4, p)).collect();
        for (got, want) in avs.iter().zip([8.5, 19.5, 30.5, 41.5]) {
            assert_relative_eq!(*got, want, epsilon = 1e-12);
        }
        assert!(throughput_conservation(&avs, 100.0) < 1e-9 * 100.0);
        assert!(throughput_conservation(&[40.0, 40.0, 40.0, 80.0], 200.0) < 1e-12);
        assert_eq!(throughput_conservation(&[3.0], 3.0), 0.0);
    }
}
