use aimd_core::engine::{
    compare_runs, reconstruct_trace, run_deterministic, run_oracle, run_stochastic, StochasticConfig,
};
use aimd_core::model::{fixed_point, NegativeCyclePolicy, NodeParams, SystemConfig};

#[test]
fn oracle_error_is_first_order() {
    let cfg = SystemConfig::four_node().validate().unwrap();
    let exact = run_deterministic(&cfg, 20).unwrap();
    let coarse = compare_runs(&exact, &run_oracle(&cfg, 1e-4, 20).unwrap());
    let fine = compare_runs(&exact, &run_oracle(&cfg, 5e-5, 20).unwrap());
    assert!(fine.max() < coarse.max());
    let ratio = coarse.max() / fine.max();
    assert!((1.6..2.4).contains(&ratio), "ratio {ratio}");
    assert!(coarse.period < 1e-4 && coarse.rate < 1e-4);
}

#[test]
fn oracle_holds_single_node_fixed_point() {
    let base = SystemConfig::new(50.0, vec![NodeParams::new(8.0, 0.6, 0.0, 0.0)]).validate().unwrap();
    let eq = fixed_point(&base);
    let cfg = base.with_initial_state(&eq.u_star, &eq.w_star).unwrap();
    for r in run_oracle(&cfg, 1e-5, 10).unwrap() {
        assert!((r.period - eq.t_star).abs() < 1e-3 * eq.t_star);
        assert!((r.nodes[0].u_next - eq.u_star[0]).abs() < 1e-3 * eq.u_star[0]);
    }
}

#[test]
fn oracle_clearance_is_an_exact_event() {
    let cfg = SystemConfig::four_node().validate().unwrap();
    for r in run_oracle(&cfg, 1e-4, 20).unwrap() {
        assert!(r.clearance_residual.abs() < 1e-2);
    }
    for r in run_deterministic(&cfg, 20).unwrap() {
        assert!(r.clearance_residual.abs() <= 1e-9 * cfg.lambda * r.period);
    }
}

#[test]
fn trace_ends_at_the_next_event() {
    let cfg = SystemConfig::four_node().validate().unwrap();
    for r in run_deterministic(&cfg, 10).unwrap() {
        let trace = reconstruct_trace(&r, &cfg, 33).unwrap();
        let (first, last) = (&trace[0], &trace[32]);
        assert_eq!(first.t, r.t_start);
        assert_eq!(last.t, r.t_end);
        assert_eq!(last.delta, 0.0);
        assert!(trace.iter().all(|p| p.delta >= -1e-9 && p.nodes.iter().all(|n| n.w >= 0.0)));
        for (n, rec) in last.nodes.iter().zip(&r.nodes) {
            assert_eq!(n.w, rec.w_next);
        }
    }
}

#[test]
fn negative_cycle_policy() {
    let nodes = vec![NodeParams::new(1.0, 0.9, 50.0, 0.0), NodeParams::new(1.0, 0.9, 50.0, 0.0)];
    let strict = SystemConfig::new(10.0, nodes.clone()).with_policy(NegativeCyclePolicy::Error);
    // Under the error policy an infeasible start is rejected up front.
    assert!(strict.validate().is_err());
    let lenient = SystemConfig::new(10.0, nodes).validate().unwrap();
    let recs = run_deterministic(&lenient, 3).unwrap();
    assert!(recs[0].backoff_repeats > 0);
    assert!(recs.iter().all(|r| r.period > 0.0));
}

#[test]
fn stochastic_runs_are_reproducible() {
    let cfg = SystemConfig::four_node().validate().unwrap();
    let s = StochasticConfig { seed: 5, horizon: 100.0 };
    let a = run_stochastic(&cfg, &s);
    assert_eq!(a, run_stochastic(&cfg, &s));
    assert_ne!(a.arrivals, run_stochastic(&cfg, &StochasticConfig { seed: 6, horizon: 100.0 }).arrivals);
}

#[test]
fn stochastic_statistics() {
    let cfg = SystemConfig::four_node().validate().unwrap();
    let run = run_stochastic(&cfg, &StochasticConfig { seed: 1, horizon: 1000.0 });
    let gap = run.mean_interarrival().unwrap();
    assert!((gap * cfg.lambda - 1.0).abs() < 0.02);
    let t_star = fixed_point(&cfg).t_star;
    let mean = run.mean_cycle_period().unwrap();
    assert!((mean - t_star).abs() < 0.15 * t_star, "mean period {mean}");
    assert!(run.records.iter().all(|r| r.nodes.iter().all(|n| n.w >= 0.0 && n.u >= 0.0)));
}
