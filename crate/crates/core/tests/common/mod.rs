#![allow(dead_code)]

use aimd_core::model::{NodeParams, SystemConfig, ValidatedConfig};
use aimd_core::spectral::AggregateMatrix;
use nalgebra::DMatrix;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_params(rng: &mut ChaCha8Rng) -> NodeParams {
    NodeParams::new(rng.random_range(0.1..10.0), rng.random_range(0.01..0.99), 0.0, 0.0)
}

pub fn random_config(rng: &mut ChaCha8Rng, n: usize) -> ValidatedConfig {
    let nodes = (0..n).map(|_| random_params(rng)).collect();
    SystemConfig::new(rng.random_range(1.0..200.0), nodes).validate().expect("random config is valid")
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> AggregateMatrix {
    let alpha: Vec<f64> = (0..n).map(|_| rng.random_range(0.1..10.0)).collect();
    let sum: f64 = alpha.iter().sum();
    let beta = (0..n).map(|_| rng.random_range(0.01..0.99)).collect();
    AggregateMatrix::from_parts(alpha.iter().map(|a| a / sum).collect(), beta).expect("valid parts")
}

/// Roots of the characteristic polynomial of a real matrix with real
/// spectrum, `n ≤ 3`, ascending. Cubic roots by the trigonometric formula,
/// then two Newton polishes.
pub fn char_poly_eigs(m: &DMatrix<f64>) -> Vec<f64> {
    let n = m.nrows();
    let mut roots = match n {
        1 => vec![m[(0, 0)]],
        2 => {
            let tr = m[(0, 0)] + m[(1, 1)];
            let det = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)];
            let disc = (tr * tr / 4.0 - det).max(0.0).sqrt();
            vec![tr / 2.0 - disc, tr / 2.0 + disc]
        }
        3 => {
            // λ³ + aλ² + bλ + c
            let a = -m.trace();
            let minor = |i: usize, j: usize| m[(i, i)] * m[(j, j)] - m[(i, j)] * m[(j, i)];
            let b = minor(0, 1) + minor(0, 2) + minor(1, 2);
            let c = -m.determinant();
            let p = b - a * a / 3.0;
            let q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
            let r = (-p / 3.0).max(0.0).sqrt();
            let arg = if r == 0.0 { 0.0 } else { (-q / (2.0 * r * r * r)).clamp(-1.0, 1.0) };
            let theta = arg.acos() / 3.0;
            let mut out: Vec<f64> = (0..3)
                .map(|k| 2.0 * r * (theta - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() - a / 3.0)
                .collect();
            for x in out.iter_mut() {
                for _ in 0..2 {
                    let f = ((*x + a) * *x + b) * *x + c;
                    let df = (3.0 * *x + 2.0 * a) * *x + b;
                    if df != 0.0 {
                        *x -= f / df;
                    }
                }
            }
            out
        }
        _ => panic!("characteristic polynomial oracle only for n <= 3"),
    };
    roots.sort_by(f64::total_cmp);
    roots
}

/// The four-node config with initial queues far above their invariant sets.
pub fn far_out_four_node(rng: &mut ChaCha8Rng) -> ValidatedConfig {
    let mut cfg = SystemConfig::four_node();
    for p in &mut cfg.nodes {
        p.w0 = rng.random_range(50.0..5000.0);
        p.u0 = rng.random_range(0.0..30.0);
    }
    cfg.validate().expect("valid")
}

/// Random config starting at `u = 0` with every queue between 1× and 100×
/// the upper end of its set at `T(0)`.
pub fn far_out_random(rng: &mut ChaCha8Rng) -> ValidatedConfig {
    let n = rng.random_range(1..=8);
    let mut cfg = random_config(rng, n).into_inner();
    let t0 = cfg.lambda / cfg.nodes.iter().map(|p| 0.5 * p.alpha).sum::<f64>();
    for p in &mut cfg.nodes {
        p.w0 = rng.random_range(1.0..100.0) * 0.5 * p.alpha * t0 * t0;
    }
    cfg.validate().expect("valid")
}
