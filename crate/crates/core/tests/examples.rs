#[allow(dead_code)]
mod four_node_simulation {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/four_node_simulation.rs"));
}

#[test]
fn four_node_simulation_example_runs() {
    four_node_simulation::run_example().expect("four_node_simulation example should run");
}

#[allow(dead_code)]
mod spectral_certificate {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/spectral_certificate.rs"));
}

#[test]
fn spectral_certificate_example_runs() {
    spectral_certificate::run_example().expect("spectral_certificate example should run");
}

#[allow(dead_code)]
mod oracle_check {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/oracle_check.rs"));
}

#[test]
fn oracle_check_example_runs() {
    oracle_check::run_example().expect("oracle_check example should run");
}

#[allow(dead_code)]
mod stochastic_arrivals {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/stochastic_arrivals.rs"));
}

#[test]
fn stochastic_arrivals_example_runs() {
    stochastic_arrivals::run_example().expect("stochastic_arrivals example should run");
}

#[allow(dead_code)]
mod growth_rate_sweep {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/growth_rate_sweep.rs"));
}

#[test]
fn growth_rate_sweep_example_runs() {
    growth_rate_sweep::run_example().expect("growth_rate_sweep example should run");
}

#[allow(dead_code)]
mod queueing_time {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/queueing_time.rs"));
}

#[test]
fn queueing_time_example_runs() {
    queueing_time::run_example().expect("queueing_time example should run");
}

#[allow(dead_code)]
mod allocation_invariant_sets {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/allocation_invariant_sets.rs"));
}

#[test]
fn allocation_invariant_sets_example_runs() {
    allocation_invariant_sets::run_example().expect("allocation_invariant_sets example should run");
}

#[allow(dead_code)]
mod cli_outputs {
    include!(concat!(env!("CARGO_MANIFEST_DIR"), "/examples/cli_outputs.rs"));
}

#[test]
fn cli_outputs_example_runs() {
    cli_outputs::run_example().expect("cli_outputs example should run");
}
