// Waiting times for one node and cycle: the closed-form metrics next to a
// trapezoid integration of the sampled cumulative counts.

use std::error::Error;

use aimd_core::allocation::{admitted_cumulative, served_cumulative};
use aimd_core::engine::run_deterministic;
use aimd_core::metrics::{generic_queueing_time, CumulativeTrace};
use aimd_core::model::{admitted_volume, SystemConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let cfg = SystemConfig::four_node().validate()?;
    let records = run_deterministic(&cfg, 25)?;
    let p = &cfg.nodes[0];
    let rec = &records[24];
    let node = &rec.nodes[0];
    let m = node.metrics;
    println!("cycle {} of node 1: T = {:.6}, u_av = {:.6}, w_av = {:.6}", rec.k, rec.period, m.u_av, m.w_av);
    println!("t_delta = {:.6}  t_w = {:.6}  t_total (Little) = {:.6}", m.t_delta, m.t_w, m.t_total);
    println!("w_av / u_av = {:.6}", m.w_av / m.u_av);

    // Node queue: admitted y(τ) against served z(τ), carry-in w(k).
    let samples = 20_001;
    let mut trace = CumulativeTrace { carry_in: node.w, ..Default::default() };
    for j in 0..samples {
        let tau = rec.period * j as f64 / (samples - 1) as f64;
        trace.t.push(tau);
        trace.arrivals.push(admitted_cumulative(tau, node.w, node.u, p) - node.w);
        trace.departures.push(served_cumulative(tau, node.gamma));
    }
    let t_w = generic_queueing_time(&trace)?;
    let expected = m.t_w * m.u_av * rec.period / admitted_volume(node.u, rec.period, p);
    println!("t_w by quadrature = {t_w:.6} (closed form {expected:.6})");
    if (t_w - expected).abs() > 1e-6 * expected {
        return Err("quadrature disagrees with the closed form".into());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
