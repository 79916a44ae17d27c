// Closed-form cycles against a forward-Euler integration of the
// continuous dynamics, at two step sizes.

use std::error::Error;

use aimd_core::engine::{compare_runs, run_deterministic, run_oracle};
use aimd_core::model::SystemConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = SystemConfig::four_node().validate()?;
    let exact = run_deterministic(&cfg, 20)?;
    let mut previous = f64::INFINITY;
    for dt in [2e-4, 1e-4, 5e-5] {
        let dev = compare_runs(&exact, &run_oracle(&cfg, dt, 20)?);
        println!(
            "dt = {dt:.0e}: T {:.2e}  u {:.2e}  w {:.2e}",
            dev.period, dev.rate, dev.queue
        );
        if dev.max() >= previous {
            return Err("oracle error did not shrink with dt".into());
        }
        previous = dev.max();
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
