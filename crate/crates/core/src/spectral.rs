//! Aggregate AIMD map `U(k+1) = Φ U(k) + 2ᾱλ` and its Schur certificate.
//!
//! `Φ = B − 2ᾱβ'` is not symmetric, but with `zᵢ = √(ᾱᵢβᵢ)` it is similar to
//! `Φ̂ = B − 2zz'`, a diagonal matrix plus a negative rank-one term. The
//! eigenvalues of `D + ρzz'` are the roots of the secular equation
//!
//! ```text
//! 1 + ρ Σⱼ zⱼ² / (dⱼ − c) = 0
//! ```
//!
//! and they interlace the sorted diagonal. Each root therefore has a known
//! bracket, and the solver never searches outside it.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::SpectralError;
use crate::model::ValidatedConfig;

/// Components with `|zⱼ|` below this are deflated.
pub const DEFLATE_Z: f64 = 1e-14;
/// Diagonal entries closer than this (relative to `max |d|`) are merged.
pub const DEFLATE_D: f64 = 1e-14;
/// Residual target for the secular equation.
pub const ROOT_TOL: f64 = 1e-13;
/// Slack allowed when checking interlacing brackets.
pub const INTERLACING_SLACK: f64 = 1e-10;
/// Relative tolerance on `Πφᵢ = −Πβᵢ`.
pub const DET_REL_TOL: f64 = 1e-8;

/// `Φ = B − 2ᾱβ'` together with the pieces it is built from.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregateMatrix {
    pub phi: DMatrix<f64>,
    pub alpha_bar: Vec<f64>,
    pub beta: Vec<f64>,
}

impl AggregateMatrix {
    /// Build from a normalized growth vector and backoff factors. `ᾱ` must
    /// be nonnegative and sum to one; zero entries are allowed and deflate.
    pub fn from_parts(alpha_bar: Vec<f64>, beta: Vec<f64>) -> Result<Self, SpectralError> {
        if alpha_bar.len() != beta.len() || beta.is_empty() {
            return Err(SpectralError::DimensionMismatch(format!(
                "alpha_bar has {} entries, beta has {}",
                alpha_bar.len(),
                beta.len()
            )));
        }
        let sum: f64 = alpha_bar.iter().sum();
        if alpha_bar.iter().any(|a| !(*a >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(SpectralError::DimensionMismatch(format!(
                "alpha_bar must be nonnegative and sum to 1, sum is {sum}"
            )));
        }
        let n = beta.len();
        let phi = DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { beta[i] } else { 0.0 };
            diag - 2.0 * alpha_bar[i] * beta[j]
        });
        Ok(Self { phi, alpha_bar, beta })
    }

    pub fn n(&self) -> usize {
        self.beta.len()
    }

    pub fn b(&self) -> DMatrix<f64> {
        DMatrix::from_diagonal(&DVector::from_column_slice(&self.beta))
    }
}

/// Entries `Φᵢⱼ = βᵢ[i=j] − 2ᾱᵢβⱼ` for a validated config.
pub fn build_phi(cfg: &ValidatedConfig) -> AggregateMatrix {
    AggregateMatrix::from_parts(cfg.alpha_bar().to_vec(), cfg.betas())
        .expect("validated config has consistent dimensions")
}

/// `Φ̂ = D − 2zz'` in factored form.
#[derive(Debug, Clone, PartialEq)]
pub struct Symmetrized {
    pub d: Vec<f64>,
    pub z: Vec<f64>,
    /// Node indices whose `zᵢ` vanishes; each contributes the exact eigenvalue `βᵢ`.
    pub deflated: Vec<usize>,
}

impl Symmetrized {
    pub fn matrix(&self) -> DMatrix<f64> {
        let n = self.d.len();
        DMatrix::from_fn(n, n, |i, j| {
            let diag = if i == j { self.d[i] } else { 0.0 };
            diag - 2.0 * self.z[i] * self.z[j]
        })
    }
}

/// Similarity transform of `Φ` to symmetric form: `D = B`, `zᵢ = √(ᾱᵢβᵢ)`.
pub fn symmetrize(m: &AggregateMatrix) -> Symmetrized {
    let z: Vec<f64> = m.alpha_bar.iter().zip(&m.beta).map(|(a, b)| (a * b).sqrt()).collect();
    let deflated = z
        .iter()
        .enumerate()
        .filter(|(_, zi)| zi.abs() < DEFLATE_Z)
        .map(|(i, _)| i)
        .collect();
    Symmetrized { d: m.beta.clone(), z, deflated }
}

/// Closed interval an eigenvalue is guaranteed to lie in.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
}

impl Bracket {
    pub fn slack(&self, value: f64) -> f64 {
        (value - self.lower).min(self.upper - value)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankOneSpectrum {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    /// `brackets[i]` holds `eigenvalues[i]`.
    pub brackets: Vec<Bracket>,
    /// Number of eigenvalues obtained exactly by deflation.
    pub deflated: usize,
}

/// Eigenvalues of `C = diag(d) + ρzz'`.
///
/// With `d` sorted ascending as `d₁ ≤ … ≤ dₙ` the eigenvalues interlace:
/// for `ρ < 0`, `d₁ + ρ‖z‖² ≤ c₁ ≤ d₁ ≤ c₂ ≤ … ≤ cₙ ≤ dₙ`; for `ρ > 0`,
/// `d₁ ≤ c₁ ≤ d₂ ≤ … ≤ dₙ ≤ cₙ ≤ dₙ + ρ‖z‖²`. Zero `zⱼ` and repeated `dⱼ`
/// are deflated first and yield `dⱼ` exactly; each remaining root is found
/// by safeguarded Newton inside its open bracket.
pub fn rank_one_eigs(d: &[f64], rho: f64, z: &[f64]) -> Result<RankOneSpectrum, SpectralError> {
    if d.len() != z.len() {
        return Err(SpectralError::DimensionMismatch(format!(
            "diagonal has {} entries, z has {}",
            d.len(),
            z.len()
        )));
    }
    if !rho.is_finite() {
        return Err(SpectralError::InvalidWeight(rho));
    }
    let n = d.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| d[a].total_cmp(&d[b]));
    let ds: Vec<f64> = order.iter().map(|&i| d[i]).collect();
    let zs: Vec<f64> = order.iter().map(|&i| z[i]).collect();
    let norm2: f64 = zs.iter().map(|v| v * v).sum();

    let brackets = interlacing_brackets(&ds, rho, norm2);

    let mut eigenvalues = Vec::with_capacity(n);
    let mut active_d = Vec::new();
    let mut active_z2 = Vec::new();

    if rho == 0.0 {
        eigenvalues.extend_from_slice(&ds);
    } else {
        let scale = ds.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let merge_tol = DEFLATE_D * scale;
        let mut i = 0;
        while i < n {
            // group of (numerically) equal diagonal entries
            let mut j = i + 1;
            while j < n && (ds[j] - ds[i]).abs() <= merge_tol {
                j += 1;
            }
            let mut group_z2 = 0.0;
            let mut survivors = 0;
            for k in i..j {
                if zs[k].abs() < DEFLATE_Z {
                    eigenvalues.push(ds[k]);
                } else {
                    group_z2 += zs[k] * zs[k];
                    survivors += 1;
                }
            }
            if survivors > 0 {
                // A rotation inside the group concentrates the weight in one
                // component; the others decouple with eigenvalue d.
                for _ in 1..survivors {
                    eigenvalues.push(ds[i]);
                }
                active_d.push(ds[i]);
                active_z2.push(group_z2);
            }
            i = j;
        }
    }
    let deflated = eigenvalues.len();

    let m = active_d.len();
    let active_norm2: f64 = active_z2.iter().sum();
    for r in 0..m {
        let (lo, hi) = if rho < 0.0 {
            let lo = if r == 0 { active_d[0] + rho * active_norm2 } else { active_d[r - 1] };
            (lo, active_d[r])
        } else {
            let hi = if r + 1 == m { active_d[m - 1] + rho * active_norm2 } else { active_d[r + 1] };
            (active_d[r], hi)
        };
        if m == 1 {
            // single pole: the secular equation is linear
            eigenvalues.push(active_d[0] + rho * active_z2[0]);
        } else {
            eigenvalues.push(secular_root(&active_d, &active_z2, rho, lo, hi));
        }
    }
    eigenvalues.sort_by(f64::total_cmp);

    Ok(RankOneSpectrum { eigenvalues, brackets, deflated })
}

/// Interlacing intervals for the sorted diagonal `ds`.
fn interlacing_brackets(ds: &[f64], rho: f64, norm2: f64) -> Vec<Bracket> {
    let n = ds.len();
    (0..n)
        .map(|i| {
            if rho < 0.0 {
                let lower = if i == 0 { ds[0] + rho * norm2 } else { ds[i - 1] };
                Bracket { lower, upper: ds[i] }
            } else if rho > 0.0 {
                let upper = if i + 1 == n { ds[n - 1] + rho * norm2 } else { ds[i + 1] };
                Bracket { lower: ds[i], upper }
            } else {
                Bracket { lower: ds[i], upper: ds[i] }
            }
        })
        .collect()
}

/// Secular function and its derivative at `origin + mu`, with the pole
/// distances formed relative to `origin` to keep digits near a pole.
fn secular(deltas: &[f64], z2: &[f64], rho: f64, mu: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut dsum = 0.0;
    for (&delta, &w) in deltas.iter().zip(z2) {
        let gap = delta - mu;
        let q = w / gap;
        sum += q;
        dsum += q / gap;
    }
    (1.0 + rho * sum, rho * dsum)
}

/// Root of `1 + ρΣ z²/(d − c)` in `[lo, hi]`, where `lo`/`hi` are poles or
/// the outer interlacing bound.
fn secular_root(d: &[f64], z2: &[f64], rho: f64, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    // f is monotone between consecutive poles: decreasing for ρ < 0,
    // increasing for ρ > 0. The midpoint sign tells which end the root
    // is closer to; shifting the origin to that end preserves relative
    // accuracy of c − d there.
    let mid = 0.5 * (lo + hi);
    let deltas_mid: Vec<f64> = d.iter().map(|v| v - mid).collect();
    let (f_mid, _) = secular(&deltas_mid, z2, rho, 0.0);
    if f_mid == 0.0 {
        return mid;
    }
    let toward_hi = (f_mid > 0.0) == (rho < 0.0);
    let origin = if toward_hi { hi } else { lo };
    let deltas: Vec<f64> = d.iter().map(|v| v - origin).collect();
    let (mut a, mut b) = if toward_hi { (mid - origin, 0.0) } else { (0.0, mid - origin) };
    // the outer bound for a single active pole is itself the root
    let sign = if rho < 0.0 { -1.0 } else { 1.0 };

    let mut mu = 0.5 * (a + b);
    for _ in 0..400 {
        let (f, df) = secular(&deltas, z2, rho, mu);
        if !f.is_finite() {
            // landed on a pole: step back inside
            mu = 0.5 * (a + b);
            continue;
        }
        if f.abs() <= ROOT_TOL {
            return origin + mu;
        }
        // root lies where sign * f crosses from negative to positive
        if sign * f < 0.0 {
            a = mu;
        } else {
            b = mu;
        }
        if (b - a).abs() <= 2.0 * f64::EPSILON * a.abs().max(b.abs()) || b - a <= f64::MIN_POSITIVE {
            return origin + 0.5 * (a + b);
        }
        let newton = mu - f / df;
        mu = if df != 0.0 && newton > a && newton < b { newton } else { 0.5 * (a + b) };
    }
    origin + mu
}

/// Eigenvalue summary and Schur certificate of `Φ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub brackets: Vec<Bracket>,
    pub schur: bool,
    pub spectral_radius: f64,
    /// `|Πφᵢ + Πβᵢ|`.
    pub det_residual: f64,
    /// `det_residual / Πβᵢ`.
    pub det_relative_residual: f64,
    pub z: Vec<f64>,
    pub deflated: usize,
    pub phi: Vec<Vec<f64>>,
    pub phi_hat: Vec<Vec<f64>>,
}

impl SpectralReport {
    pub fn min_interlacing_slack(&self) -> f64 {
        self.eigenvalues
            .iter()
            .zip(&self.brackets)
            .map(|(v, b)| b.slack(*v))
            .fold(f64::INFINITY, f64::min)
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}

/// Validate the computed spectrum against the structure the AIMD map must
/// have and issue the certificate.
///
/// Checks interlacing, `Πφᵢ = −Πβᵢ` (from `det Φ = det B · det(I − 2ᾱ𝟏')`),
/// and that exactly one eigenvalue is negative with `|φ₁| ≤ max β`.
/// Violations indicate a solver bug, not an unstable config.
pub fn schur_check(
    m: &AggregateMatrix,
    sym: &Symmetrized,
    spectrum: RankOneSpectrum,
) -> Result<SpectralReport, SpectralError> {
    let RankOneSpectrum { eigenvalues, brackets, deflated } = spectrum;
    for (index, (v, b)) in eigenvalues.iter().zip(&brackets).enumerate() {
        if b.slack(*v) < -INTERLACING_SLACK {
            return Err(SpectralError::InterlacingViolation {
                index,
                value: *v,
                lower: b.lower,
                upper: b.upper,
            });
        }
    }

    let prod_phi: f64 = eigenvalues.iter().product();
    let prod_beta: f64 = m.beta.iter().product();
    let det_residual = (prod_phi + prod_beta).abs();
    let relative = det_residual / prod_beta;
    if !(relative < DET_REL_TOL) {
        return Err(SpectralError::DetIdentityViolation { residual: det_residual, relative });
    }

    let max_beta = m.beta.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let negatives = eigenvalues.iter().filter(|v| **v < 0.0).count();
    if negatives != 1 {
        return Err(SpectralError::StructureViolation(format!(
            "expected exactly one negative eigenvalue, found {negatives}"
        )));
    }
    if eigenvalues[0].abs() > max_beta + INTERLACING_SLACK {
        return Err(SpectralError::StructureViolation(format!(
            "|phi_1| = {} exceeds max beta = {max_beta}",
            eigenvalues[0].abs()
        )));
    }

    let spectral_radius = eigenvalues.iter().fold(0.0_f64, |r, v| r.max(v.abs()));
    Ok(SpectralReport {
        schur: spectral_radius < 1.0,
        spectral_radius,
        det_residual,
        det_relative_residual: relative,
        z: sym.z.clone(),
        deflated,
        phi: rows(&m.phi),
        phi_hat: rows(&sym.matrix()),
        eigenvalues,
        brackets,
    })
}

/// Build `Φ`, solve its spectrum through the symmetric form and certify it.
pub fn certify_matrix(m: &AggregateMatrix) -> Result<SpectralReport, SpectralError> {
    let sym = symmetrize(m);
    let spectrum = rank_one_eigs(&sym.d, -2.0, &sym.z)?;
    schur_check(m, &sym, spectrum)
}

pub fn certify(cfg: &ValidatedConfig) -> Result<SpectralReport, SpectralError> {
    certify_matrix(&build_phi(cfg))
}

/// One step of the aggregate affine map `ΦU + 2ᾱλ`.
pub fn iterate_aggregate(u: &[f64], m: &AggregateMatrix, lambda: f64) -> Vec<f64> {
    let next = &m.phi * DVector::from_column_slice(u);
    next.iter().zip(&m.alpha_bar).map(|(v, a)| v + 2.0 * a * lambda).collect()
}
