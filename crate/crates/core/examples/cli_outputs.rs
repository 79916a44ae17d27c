// `aimd simulate` and `aimd stochastic` through their library entry points:
// CSV and JSON files with a manifest header, byte-identical across reruns.

use std::error::Error;
use std::path::PathBuf;

use aimd_core::cli::{cmd_simulate, cmd_stochastic, SimulateArgs, StochasticArgs};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/two_node.cfg");
    let root = std::env::temp_dir().join(format!("aimd-cli-example-{}", std::process::id()));
    let mut log = std::io::stdout();

    let sim = SimulateArgs { config: config.clone(), cycles: 12, trace_samples: 5, out: root.join("sim") };
    cmd_simulate(&sim, &mut log)?;
    let cycles = std::fs::read_to_string(root.join("sim/cycles.csv"))?;
    for line in cycles.lines().take(10) {
        println!("  {line}");
    }

    let mut texts = Vec::new();
    for run in ["a", "b"] {
        let args = StochasticArgs { config: config.clone(), seed: 9, horizon: 50.0, out: root.join(run) };
        cmd_stochastic(&args, &mut log)?;
        texts.push(std::fs::read(root.join(run).join("arrivals.csv"))?);
    }
    println!("identical reruns: {}", texts[0] == texts[1]);
    std::fs::remove_dir_all(&root)?;
    if texts[0] != texts[1] {
        return Err("reruns differ".into());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
