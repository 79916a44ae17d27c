use serde::{Deserialize, Serialize};

use super::CycleRecord;
use crate::allocation::queue_at;
use crate::error::EngineError;
use crate::metrics::batch_share_trace;
use crate::model::ValidatedConfig;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NodeTracePoint {
    /// Admission rate `uᵢ(τ)`.
    pub u: f64,
    /// Node queue `wᵢ(τ)`.
    pub w: f64,
    /// Node `i`'s share of the batch queue `δᵢ(τ)`.
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// Wall-clock time.
    pub t: f64,
    pub nodes: Vec<NodeTracePoint>,
    /// Aggregate batch queue `Σᵢ δᵢ(τ)`.
    pub delta: f64,
}

/// Continuous-time picture of one cycle on a uniform grid of `samples`
/// points spanning `[0, T]`. The rate at `τ = T` is the pre-backoff peak.
pub fn reconstruct_trace(
    rec: &CycleRecord,
    cfg: &ValidatedConfig,
    samples: usize,
) -> Result<Vec<TracePoint>, EngineError> {
    if samples < 2 {
        return Err(EngineError::InvalidArgument(format!(
            "trace needs at least 2 samples per cycle, got {samples}"
        )));
    }
    if rec.nodes.len() != cfg.n() {
        return Err(EngineError::InvalidArgument(format!(
            "record has {} nodes, config has {}",
            rec.nodes.len(),
            cfg.n()
        )));
    }
    let step = rec.period / (samples - 1) as f64;
    Ok((0..samples)
        .map(|j| {
            let last = j == samples - 1;
            let tau = if last { rec.period } else { j as f64 * step };
            let nodes: Vec<NodeTracePoint> = rec
                .nodes
                .iter()
                .zip(&cfg.nodes)
                .map(|(n, p)| NodeTracePoint {
                    u: p.beta * n.u + p.alpha * tau,
                    w: if last { n.w_next } else { queue_at(tau, n.w, n.u, n.gamma, p).max(0.0) },
                    delta: if last { 0.0 } else { batch_share_trace(tau, n.u, n.metrics.u_av, p).max(0.0) },
                })
                .collect();
            TracePoint {
                t: if last { rec.t_end } else { rec.t_start + tau },
                delta: nodes.iter().map(|n| n.delta).sum(),
                nodes,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::run_deterministic;
    use crate::model::SystemConfig;
    use approx::assert_relative_eq;

    #[test]
    fn endpoints_stitch_to_records() {
        let cfg = SystemConfig::four_node().validate().unwrap();
        let recs = run_deterministic(&cfg, 5).unwrap();
        for r in &recs {
            let tr = reconstruct_trace(r, &cfg, 17).unwrap();
            let (first, last) = (&tr[0], &tr[16]);
            assert_eq!(first.t, r.t_start);
            assert_eq!(last.t, r.t_end);
            for (i, n) in r.nodes.iter().enumerate() {
                assert_relative_eq!(first.nodes[i].w, n.w, epsilon = 1e-12);
                assert_relative_eq!(last.nodes[i].w, n.w_next, epsilon = 1e-12);
                assert_relative_eq!(last.nodes[i].u, n.u_next, epsilon = 1e-12);
            }
            assert_eq!(first.delta, 0.0);
            assert_eq!(last.delta, 0.0);
            assert!(tr.iter().all(|p| p.delta >= 0.0));
        }
    }

    #[test]
    fn queue_touches_zero_at_tangency() {
        let cfg = SystemConfig::four_node().validate().unwrap();
        let recs = run_deterministic(&cfg, 1).unwrap();
        let n = &recs[0].nodes[0];
        assert_relative_eq!(n.t_z, 3.0_f64.sqrt(), epsilon = 1e-12);
        let w = queue_at(n.t_z, n.w, n.u, n.gamma, &cfg.nodes[0]);
        assert!(w.abs() < 1e-12);
    }

    #[test]
    fn rejects_single_sample() {
        let cfg = SystemConfig::four_node().validate().unwrap();
        let recs = run_deterministic(&cfg, 1).unwrap();
        assert!(reconstruct_trace(&recs[0], &cfg, 1).is_err());
    }
}
