// The service-rate law maps `[0, (α/2)T²]` into itself within a cycle, and a
// queue that starts far outside descends until it enters. The set moves
// with `T(k)`, so membership settles only once the period does.

use std::error::Error;

use aimd_core::allocation::{entry_step, invariant_set};
use aimd_core::engine::run_deterministic;
use aimd_core::model::{fixed_point, SystemConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut base = SystemConfig::four_node();
    base.nodes[3].w0 = 400.0;
    let cfg = base.validate()?;
    let eq = fixed_point(&cfg);
    let records = run_deterministic(&cfg, 40)?;

    for (i, p) in cfg.nodes.iter().enumerate() {
        let set = invariant_set(eq.t_star, p);
        let run: Vec<(f64, f64)> = records.iter().map(|r| (r.nodes[i].w, r.period)).collect();
        let entry = entry_step(&run, p)?;
        let mut mapped_inside = true;
        for r in &records {
            let set_k = invariant_set(r.period, p);
            if set_k.contains(r.nodes[i].w) && !set_k.contains(r.nodes[i].w_next) {
                mapped_inside = false;
            }
        }
        let settled = records[15..].iter().all(|r| invariant_set(r.period, p).contains(r.nodes[i].w));
        println!(
            "node {}: set at T* [0, {:.3}], first inside at k = {}, in-set states stay in-set: {mapped_inside}, inside for k >= 15: {settled}",
            i + 1,
            set.upper,
            entry.step
        );
        if !(mapped_inside && settled) {
            return Err(format!("node {} violates invariance", i + 1).into());
        }
    }
    let far: Vec<String> = records.iter().take(12).map(|r| format!("{:.1}", r.nodes[3].w)).collect();
    println!("node 4 from w(0) = 400: {}", far.join(" "));
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
