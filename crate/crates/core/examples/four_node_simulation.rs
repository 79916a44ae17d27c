// Four-node setup from the numerical example: 30 clearance events, the
// cycle period settling at `T* = 4/3` and the rates approaching `u*`.

use std::error::Error;

use aimd_core::engine::{relative_distance, run_deterministic, states};
use aimd_core::model::{fixed_point, SystemConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = SystemConfig::four_node().validate()?;
    let eq = fixed_point(&cfg);
    let records = run_deterministic(&cfg, 30)?;

    println!("{:>3} {:>10} {:>10}  u(k)", "k", "t", "T(k)");
    for r in &records {
        let rates: Vec<String> = r.rates().iter().map(|u| format!("{u:7.3}")).collect();
        println!("{:>3} {:>10.4} {:>10.6}  {}", r.k, r.t_start, r.period, rates.join(" "));
    }
    let last = records.last().ok_or("no cycles")?;
    println!("T* = {:.6}, T(29) = {:.6}", eq.t_star, last.period);

    for s in states(&records).iter().step_by(5) {
        println!("k = {:>2}: |U - u*|/|u*| = {:.2e}", s.k, relative_distance(&s.rates(), &eq.u_star));
    }
    if (last.period - eq.t_star).abs() > 0.01 {
        return Err("cycle period did not settle".into());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
