//! Scalar diagnostics of chain states. Entropies use the natural logarithm.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenvalues, CMatrix, DensityMatrix, DENSITY_POSITIVITY_TOL, I};
use crate::model::{bit, ClassicalConfig};

/// One labelled measurement taken at time `s` within pulse `pulse_index`.
#[derive(Clone, Debug, PartialEq)]
pub struct ObservableRecord {
    pub label: String,
    pub value: f64,
    pub s_time: f64,
    pub pulse_index: usize,
}

impl ObservableRecord {
    pub fn new(label: impl Into<String>, value: f64, s_time: f64, pulse_index: usize) -> Result<Self> {
        if !value.is_finite() {
            return Err(Error::Domain(format!("non-finite observable value {value}")));
        }
        Ok(Self { label: label.into(), value, s_time, pulse_index })
    }
}

/// Diagonal of `ρ` keyed by configuration.
pub fn populations(rho: &DensityMatrix) -> BTreeMap<ClassicalConfig, f64> {
    population_vector(rho)
        .into_iter()
        .enumerate()
        .map(|(a, p)| (ClassicalConfig::from_index(rho.n_sites(), a).expect("index within chain"), p))
        .collect()
}

/// Diagonal of `ρ` ordered by configuration index.
pub fn population_vector(rho: &DensityMatrix) -> Vec<f64> {
    rho.matrix().diag().iter().map(|v| v.re).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CoherenceAxis {
    X,
    Y,
}

/// `Tr(ρ Σ_k σ_k^axis)`.
pub fn coherence_expect(rho: &DensityMatrix, axis: CoherenceAxis) -> f64 {
    let m = rho.matrix();
    let mut total = 0.0;
    for a in 0..rho.dim() {
        for k in 0..rho.n_sites() {
            let b = a ^ (1 << k);
            // Tr(ρ σ) = Σ_{a,b} ρ_ba σ_ab with σ_ab = ⟨a|σ|b⟩.
            let sigma = match axis {
                CoherenceAxis::X => 1.0.into(),
                CoherenceAxis::Y => {
                    if bit(a, k) {
                        -I
                    } else {
                        I
                    }
                }
            };
            total += (m[(b, a)] * sigma).re;
        }
    }
    total
}

/// `½ Σ |eig(σ − μ)|`.
pub fn trace_distance(sigma: &CMatrix, mu: &CMatrix) -> Result<f64> {
    if sigma.rows() != mu.rows() || sigma.cols() != mu.cols() {
        return Err(Error::Shape(format!(
            "{}x{} and {}x{} states",
            sigma.rows(),
            sigma.cols(),
            mu.rows(),
            mu.cols()
        )));
    }
    let eigs = hermitian_eigenvalues(&(sigma - mu))?;
    Ok(0.5 * eigs.iter().map(|e| e.abs()).sum::<f64>())
}

/// `D` between two density matrices of the same chain.
pub fn state_distance(a: &DensityMatrix, b: &DensityMatrix) -> Result<f64> {
    trace_distance(a.matrix(), b.matrix())
}

fn entropy_of_spectrum(eigs: &[f64]) -> Result<f64> {
    let mut s = 0.0;
    for &e in eigs {
        if e < -DENSITY_POSITIVITY_TOL {
            return Err(Error::Domain(format!("negative eigenvalue {e:e} in entropy")));
        }
        if e > 0.0 {
            s -= e * e.ln();
        }
    }
    Ok(s)
}

/// `−Tr ρ ln ρ`.
pub fn von_neumann_entropy(rho: &CMatrix) -> Result<f64> {
    entropy_of_spectrum(&hermitian_eigenvalues(rho)?)
}

/// `S(ρ_diag) − S(ρ)`.
pub fn entropy_of_coherence(rho: &CMatrix) -> Result<f64> {
    let diag: Vec<f64> = rho.diag().iter().map(|v| v.re).collect();
    Ok(entropy_of_spectrum(&diag)? - von_neumann_entropy(rho)?)
}

/// `(1/N) Σ_k Tr(ρ n_k)`.
pub fn excitation_density(rho: &DensityMatrix) -> f64 {
    let n = rho.n_sites() as f64;
    population_vector(rho).iter().enumerate().map(|(a, p)| p * a.count_ones() as f64).sum::<f64>() / n
}
