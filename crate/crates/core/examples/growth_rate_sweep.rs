// Sweeps over the common backoff factor and over the arrival rate using the
// library entry point behind `aimd sweep`, writing `summary.csv` into a
// scratch directory.

use std::error::Error;
use std::path::PathBuf;

use aimd_core::cli::{cmd_sweep, SweepArgs, SweepParam};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let config = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("configs/four_node.cfg");
    let out = std::env::temp_dir().join(format!("aimd-sweep-example-{}", std::process::id()));
    for (param, values) in [
        (SweepParam::Beta, vec![0.1, 0.3, 0.5, 0.7, 0.9]),
        (SweepParam::Lambda, vec![50.0, 100.0, 200.0]),
    ] {
        let args = SweepArgs { config: config.clone(), param, values, cycles: 80, out: out.clone() };
        let certified = cmd_sweep(&args, &mut std::io::stdout())?;
        let summary = std::fs::read_to_string(out.join("summary.csv"))?;
        for line in summary.lines().filter(|l| !l.starts_with('#')) {
            println!("{line}");
        }
        if !certified {
            return Err("a sweep point is not Schur".into());
        }
    }
    std::fs::remove_dir_all(&out)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
