mod common;

use aimd_core::allocation::{closed_loop_queue, entry_step, invariant_set, queue_update, service_rate};
use aimd_core::engine::run_deterministic;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn queues_stay_nonnegative() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for _ in 0..10_000 {
        let p = common::random_params(&mut rng);
        let w = rng.random_range(0.0..1e4);
        let u = rng.random_range(0.0..1e3);
        let t = rng.random_range(1e-3..20.0);
        let d = service_rate(u, w, &p).unwrap();
        assert!(queue_update(w, u, d.gamma, t, &p) >= 0.0);
        assert!(closed_loop_queue(w, t, p.alpha) >= 0.0);
    }
}

#[test]
fn invariant_set_is_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..10_000 {
        let p = common::random_params(&mut rng);
        let t = rng.random_range(1e-3..20.0);
        let set = invariant_set(t, &p);
        let w = rng.random_range(0.0..=set.upper);
        let u = rng.random_range(0.0..1e3);
        let d = service_rate(u, w, &p).unwrap();
        assert!(set.contains(queue_update(w, u, d.gamma, t, &p)));
    }
}

#[test]
fn general_update_matches_closed_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..1000 {
        let p = common::random_params(&mut rng);
        let (w, u, t) = (rng.random_range(0.0..100.0), rng.random_range(0.0..50.0), rng.random_range(0.01..5.0));
        let d = service_rate(u, w, &p).unwrap();
        let a = queue_update(w, u, d.gamma, t, &p);
        let b = closed_loop_queue(w, t, p.alpha);
        assert!((a - b).abs() <= 1e-9 * (w + p.alpha * t * t).max(1.0));
    }
}

#[test]
fn far_out_queues_enter_their_sets() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..100 {
        let cfg = common::far_out_four_node(&mut rng);
        let recs = run_deterministic(&cfg, 200).unwrap();
        for (i, p) in cfg.nodes.iter().enumerate() {
            let run: Vec<(f64, f64)> = recs.iter().map(|r| (r.nodes[i].w, r.period)).collect();
            let entry = entry_step(&run, p).expect("enters within 200 cycles");
            if let Some(bound) = entry.bound_squared {
                assert!(entry.step as i64 <= bound.max(1), "step {} bound {bound}", entry.step);
            }
        }
    }
}

#[test]
fn outside_the_set_the_queue_drops_by_at_least_the_set_size() {
    let mut rng = ChaCha8Rng::seed_from_u64(25);
    for _ in 0..10_000 {
        let p = common::random_params(&mut rng);
        let t = rng.random_range(1e-3..20.0);
        let upper = invariant_set(t, &p).upper;
        let w = upper * rng.random_range(1.0001..100.0);
        let next = closed_loop_queue(w, t, p.alpha);
        assert!(next <= w - upper + 1e-9 * w);
    }
}

#[test]
fn descent_by_half_alpha_t_can_fail_for_short_cycles() {
    // Just outside the set with T < 1 the drop is about (α/2)T², which is
    // smaller than (α/2)T.
    let p = aimd_core::NodeParams::new(10.0, 0.5, 0.0, 0.0);
    let t = 0.3;
    let w = invariant_set(t, &p).upper * 1.01;
    let next = closed_loop_queue(w, t, p.alpha);
    assert!(next > w - 0.5 * p.alpha * t);
}
