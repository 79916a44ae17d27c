// Exponential inter-arrival times instead of a constant stream. The cycle
// period is now random; its mean lands near `T*`.

use std::error::Error;

use aimd_core::engine::{run_stochastic, run_stochastic_batch, StochasticConfig};
use aimd_core::model::{fixed_point, SystemConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = SystemConfig::four_node().validate()?;
    let t_star = fixed_point(&cfg).t_star;

    let run = run_stochastic(&cfg, &StochasticConfig { seed: 42, horizon: 200.0 });
    let again = run_stochastic(&cfg, &StochasticConfig { seed: 42, horizon: 200.0 });
    println!("seed 42: {} arrivals, {} cycles, same on rerun: {}", run.arrivals.len(), run.records.len(), run == again);
    println!("mean inter-arrival {:.5} (1/lambda = {:.5})", run.mean_interarrival().unwrap_or(f64::NAN), 1.0 / cfg.lambda);

    let seeds: Vec<u64> = (1..=8).collect();
    for (seed, r) in seeds.iter().zip(run_stochastic_batch(&cfg, &seeds, 200.0)) {
        let mean = r.mean_cycle_period().unwrap_or(f64::NAN);
        println!("seed {seed}: mean T = {mean:.4} ({:+.1}% vs T* = {t_star:.4})", 100.0 * (mean / t_star - 1.0));
    }
    if run != again {
        return Err("same seed gave different runs".into());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
