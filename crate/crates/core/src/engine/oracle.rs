use super::{enforce_feasibility, CycleRecord, NodeCycleRecord};
use crate::allocation::service_rate;
use crate::error::EngineError;
use crate::metrics::{queueing_time, NodeCycle};
use crate::model::ValidatedConfig;

/// Hard stop on Euler steps in one cycle.
const MAX_STEPS_PER_CYCLE: usize = 200_000_000;

/// Forward-Euler integration of the continuous dynamics
///
/// ```text
/// δ̇ = λ − Σᵢ uᵢ(t),   u̇ᵢ = αᵢ,   ẇᵢ = uᵢ(t) − γᵢ
/// ```
///
/// with a clearance event wherever `δ` crosses from positive to non-positive;
/// the crossing instant and the state there are linearly interpolated within
/// the step. At the event every `uᵢ` is multiplied by `βᵢ` and `γᵢ` is reset
/// by the allocation law. Node queues are floored at zero.
pub fn run_oracle(cfg: &ValidatedConfig, dt: f64, cycles: usize) -> Result<Vec<CycleRecord>, EngineError> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(EngineError::InvalidArgument(format!("time step must be positive, got {dt}")));
    }
    let n = cfg.n();
    let mut rates = cfg.initial_rates();
    let mut queues = cfg.initial_queues();
    let mut t = 0.0;
    let mut records = Vec::with_capacity(cycles);

    for k in 0..cycles {
        let backoff_repeats = enforce_feasibility(cfg, k, &mut rates)?;
        let gammas: Vec<f64> = cfg
            .nodes
            .iter()
            .zip(&rates)
            .zip(&queues)
            .map(|((p, &u), &w)| service_rate(u, w, p).map(|d| d.gamma))
            .collect::<Result<_, _>>()?;

        let mut u: Vec<f64> = rates.iter().zip(&cfg.nodes).map(|(u, p)| p.beta * u).collect();
        let mut w = queues.clone();
        let mut delta = 0.0_f64;
        let mut tau = 0.0_f64;
        let mut prev_u = u.clone();
        let mut prev_w = w.clone();
        let mut steps = 0usize;
        let period = loop {
            if steps == MAX_STEPS_PER_CYCLE {
                return Err(EngineError::InvalidArgument(format!(
                    "cycle {k} did not clear within {MAX_STEPS_PER_CYCLE} steps of {dt}"
                )));
            }
            steps += 1;
            prev_u.copy_from_slice(&u);
            prev_w.copy_from_slice(&w);
            let prev_delta = delta;
            let total: f64 = u.iter().sum();
            delta += (cfg.lambda - total) * dt;
            for i in 0..n {
                w[i] = (w[i] + (u[i] - gammas[i]) * dt).max(0.0);
                u[i] += cfg.nodes[i].alpha * dt;
            }
            if prev_delta > 0.0 && delta <= 0.0 {
                let theta = prev_delta / (prev_delta - delta);
                for i in 0..n {
                    u[i] = prev_u[i] + theta * (u[i] - prev_u[i]);
                    w[i] = prev_w[i] + theta * (w[i] - prev_w[i]);
                }
                break tau + theta * dt;
            }
            tau += dt;
        };

        let mut nodes = Vec::with_capacity(n);
        let mut admitted = 0.0;
        for i in 0..n {
            let p = &cfg.nodes[i];
            let d = service_rate(rates[i], queues[i], p)?;
            let metrics = queueing_time(
                &NodeCycle { u_k: rates[i], w_k: queues[i], w_next: w[i], gamma: gammas[i], period },
                p,
            )?;
            admitted += metrics.u_av * period;
            nodes.push(NodeCycleRecord {
                u: rates[i],
                gamma: gammas[i],
                t_z: d.t_z,
                w: queues[i],
                u_next: u[i],
                w_next: w[i],
                metrics,
                late_tangency: d.late_tangency(period),
            });
        }
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
        rates = u;
        queues = w;
    }
    Ok(records)
}
