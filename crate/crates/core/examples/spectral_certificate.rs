// Spectrum of the aggregate AIMD matrix from the diagonal-plus-rank-one
// secular equation, checked against a dense symmetric eigensolver.

use std::error::Error;

use aimd_core::model::{NodeParams, SystemConfig};
use aimd_core::spectral::{build_phi, certify, symmetrize};
use nalgebra::SymmetricEigen;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let nodes = vec![
        NodeParams::new(1.0, 0.3, 0.0, 0.0),
        NodeParams::new(4.0, 0.6, 0.0, 0.0),
        NodeParams::new(2.0, 0.85, 0.0, 0.0),
        NodeParams::new(0.5, 0.95, 0.0, 0.0),
    ];
    let cfg = SystemConfig::new(10.0, nodes).validate()?;
    let report = certify(&cfg)?;

    println!("eigenvalues (secular): {:?}", report.eigenvalues);
    let mut dense: Vec<f64> = SymmetricEigen::new(symmetrize(&build_phi(&cfg)).matrix()).eigenvalues.iter().copied().collect();
    dense.sort_by(f64::total_cmp);
    println!("eigenvalues (dense):   {dense:?}");
    let worst = report.eigenvalues.iter().zip(&dense).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    println!("max difference {worst:.1e}");

    for (v, b) in report.eigenvalues.iter().zip(&report.brackets) {
        println!("  {v:+.6} in [{:+.6}, {:+.6}]", b.lower, b.upper);
    }
    let prod_beta: f64 = cfg.betas().iter().product();
    println!("prod(phi) = {:.6}, -prod(beta) = {:.6}", report.eigenvalues.iter().product::<f64>(), -prod_beta);
    println!("spectral radius {:.6}, schur: {}", report.spectral_radius, report.schur);

    if !report.schur || worst > 1e-9 {
        return Err("certificate failed".into());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
