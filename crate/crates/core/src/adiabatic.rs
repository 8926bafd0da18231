//! First-order adiabatic theory for classical initial states.
//!
//! Starting from a mixture of classical configurations, the lab-frame state
//! during a slow pulse is `ρ(s) ≈ ρ(0) + T⁻¹𝒜(s)[ρ(0)] ≈ e^{𝒜(s)/T}[ρ(0)]`
//! with
//!
//! ```text
//! 𝒜(s)[ρ] = Σ_k ( −i[K_k(s), ρ] + 𝒲_k(s)[ρ] )
//! K_k(s)  = g(s) Λ_k (Θ_k σ_k^y + (γ/2) σ_k^x)
//! 𝒲_k(s)  = γ G₂(s) ( √Λ_k σ_k^x ρ σ_k^x √Λ_k − ½{Λ_k, ρ} )
//! Θ_k     = Δ + Σ_{m≠k} V_km n_m,    Λ_k = (γ²/4 + Θ_k²)⁻¹
//! ```
//!
//! [`first_order_direct`] evaluates the same correction as a literal sum
//! over the instantaneous spectrum and serves as the reference for `𝒜`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{expm, CMatrix, DensityMatrix, I, MAX_DIM, ZERO};
use crate::model::{bit, pauli, Axis, ClassicalConfig, SpinChainModel};
use crate::ode::{self, Tolerances};
use crate::pulse::PulseProfile;
use crate::quadrature;
use crate::spectral::{derivative_p, eigenmatrix, eigenvalue, EigenLabel};

/// Largest off-diagonal magnitude tolerated in a "classical" input state.
pub const DIAGONAL_TOL: f64 = 1e-12;

/// Largest chain whose `𝒜` is exponentiated as a dense `4^N × 4^N` matrix
/// by [`ExpMethod::Auto`].
pub const MATERIALIZE_MAX_SITES: usize = 4;

/// Drive amplitudes `|g(s)|` below this count as switched off.
pub const DRIVE_TOL: f64 = 1e-12;

/// A linear map on `2^N × 2^N` matrices.
pub trait SuperOperator {
    fn dim(&self) -> usize;

    fn apply(&self, rho: &CMatrix) -> CMatrix;

    /// Matrix of the map in the column-stacking basis.
    fn materialize(&self) -> Result<CMatrix> {
        let dim = self.dim();
        let big = dim * dim;
        if big > MAX_DIM {
            return Err(Error::Capacity { dim: big, cap: MAX_DIM });
        }
        let mut out = CMatrix::zeros(big, big);
        for col in 0..big {
            let basis = CMatrix::outer_basis(dim, col % dim, col / dim);
            for (row, v) in self.apply(&basis).vec_columns().into_iter().enumerate() {
                out[(row, col)] = v;
            }
        }
        Ok(out)
    }
}

/// Per-site diagonals of `Θ_k` and `Λ_k` in the classical basis.
#[derive(Clone, Debug)]
pub struct ConstraintOperators {
    n_sites: usize,
    theta: Vec<Vec<f64>>,
    lambda: Vec<Vec<f64>>,
}

impl ConstraintOperators {
    pub fn new(model: &SpinChainModel) -> Self {
        let quarter_gamma_sq = 0.25 * model.gamma().powi(2);
        let theta: Vec<Vec<f64>> = (0..model.n_sites())
            .map(|k| (0..model.dim()).map(|a| model.flip_energy(k, a)).collect())
            .collect();
        let lambda = theta
            .iter()
            .map(|row| row.iter().map(|t| 1.0 / (quarter_gamma_sq + t * t)).collect())
            .collect();
        Self { n_sites: model.n_sites(), theta, lambda }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn theta(&self, site: usize, config: usize) -> f64 {
        self.theta[site][config]
    }

    pub fn lambda(&self, site: usize, config: usize) -> f64 {
        self.lambda[site][config]
    }

    pub fn theta_matrix(&self, site: usize) -> CMatrix {
        CMatrix::from_real_diag(&self.theta[site])
    }

    pub fn lambda_matrix(&self, site: usize) -> CMatrix {
        CMatrix::from_real_diag(&self.lambda[site])
    }
}

fn check_site(model: &SpinChainModel, site: usize) -> Result<()> {
    if site < model.n_sites() {
        Ok(())
    } else {
        Err(Error::Index { index: site, n_sites: model.n_sites() })
    }
}

/// `K_k(s)` as a dense matrix.
pub fn k_hamiltonian(model: &SpinChainModel, pulse: &PulseProfile, s: f64, site: usize) -> Result<CMatrix> {
    check_site(model, site)?;
    let ops = ConstraintOperators::new(model);
    let n = model.n_sites();
    let inner = &ops.theta_matrix(site).dot(&pauli(n, site, Axis::Y)?) + &(&pauli(n, site, Axis::X)? * (0.5 * model.gamma()));
    Ok(&ops.lambda_matrix(site).dot(&inner) * pulse.g(s))
}

/// `𝒲_k(s)` built from dense operators.
#[derive(Clone, Debug)]
pub struct FlipDissipator {
    rate: f64,
    sigma_x: CMatrix,
    lambda: CMatrix,
    sqrt_lambda: CMatrix,
}

impl SuperOperator for FlipDissipator {
    fn dim(&self) -> usize {
        self.lambda.rows()
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let jump = self.sqrt_lambda.dot(&self.sigma_x);
        let mut out = jump.dot(rho).dot(&jump.adjoint());
        let anti = &self.lambda.dot(rho) + &rho.dot(&self.lambda);
        out -= &(&anti * 0.5);
        &out * self.rate
    }
}

pub fn w_superop(model: &SpinChainModel, pulse: &PulseProfile, s: f64, site: usize) -> Result<FlipDissipator> {
    check_site(model, site)?;
    let ops = ConstraintOperators::new(model);
    let sqrt: Vec<f64> = (0..model.dim()).map(|a| ops.lambda(site, a).sqrt()).collect();
    Ok(FlipDissipator {
        rate: model.gamma() * pulse.g2_integral(s),
        sigma_x: pauli(model.n_sites(), site, Axis::X)?,
        lambda: ops.lambda_matrix(site),
        sqrt_lambda: CMatrix::from_real_diag(&sqrt),
    })
}

/// `𝒜(s)`, applied through its single-flip structure.
#[derive(Clone, Debug)]
pub struct AdiabaticGenerator {
    n_sites: usize,
    dim: usize,
    half_gamma: f64,
    g: f64,
    flip_rate: f64,
    ops: ConstraintOperators,
}

/// Builds `𝒜(s)`.
pub fn build_a(model: &SpinChainModel, pulse: &PulseProfile, s: f64) -> AdiabaticGenerator {
    AdiabaticGenerator {
        n_sites: model.n_sites(),
        dim: model.dim(),
        half_gamma: 0.5 * model.gamma(),
        g: pulse.g(s),
        flip_rate: model.gamma() * pulse.g2_integral(s),
        ops: ConstraintOperators::new(model),
    }
}

impl AdiabaticGenerator {
    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// `⟨a|K_k|a^k⟩`.
    fn k_element(&self, site: usize, a: usize) -> C64 {
        let sy = if bit(a, site) { -I } else { I };
        (sy * self.ops.theta(site, a) + self.half_gamma) * (self.g * self.ops.lambda(site, a))
    }

    /// True when `K_k(s) = 0`, so that diagonal states stay diagonal.
    pub fn is_dissipative_only(&self) -> bool {
        self.g.abs() <= DRIVE_TOL
    }

    /// Classical rates `W(p → p^k) = γ G₂(s) Λ_k(p)` of the dissipative part.
    pub fn rate_matrix(&self) -> ClassicalRateMatrix {
        let mut rates = vec![0.0; self.dim * self.dim];
        for from in 0..self.dim {
            for k in 0..self.n_sites {
                let to = from ^ (1 << k);
                let w = self.flip_rate * self.ops.lambda(k, from);
                rates[to * self.dim + from] += w;
                rates[from * self.dim + from] -= w;
            }
        }
        ClassicalRateMatrix { n_sites: self.n_sites, dim: self.dim, rates }
    }
}

impl SuperOperator for AdiabaticGenerator {
    fn dim(&self) -> usize {
        self.dim
    }

    fn apply(&self, rho: &CMatrix) -> CMatrix {
        let dim = self.dim;
        CMatrix::from_fn(dim, dim, |a, b| {
            let mut acc = ZERO;
            for k in 0..self.n_sites {
                let m = 1usize << k;
                let (ak, bk) = (a ^ m, b ^ m);
                if self.g != 0.0 {
                    // −i(K ρ − ρ K)
                    let k_rho = self.k_element(k, a) * rho[(ak, b)];
                    let rho_k = rho[(a, bk)] * self.k_element(k, bk);
                    acc += -I * (k_rho - rho_k);
                }
                if self.flip_rate != 0.0 {
                    let (la, lb) = (self.ops.lambda(k, a), self.ops.lambda(k, b));
                    acc += (rho[(ak, bk)] * (la * lb).sqrt() - rho[(a, b)] * (0.5 * (la + lb))) * self.flip_rate;
                }
            }
            acc
        })
    }
}

/// First-order adiabatic state in the rotating frame from the literal
/// spectral sum
///
/// ```text
/// ρ̄(s) = P_p + T⁻¹ Σ_{q≠p} ( P_q P′_p / λ_qp + P′_p P_q / λ_pq )
///            − T⁻¹ Σ_{q≠p} (P_p − P_q) ∫₀ˢ f_pq,
/// f_pq = −2 r_pq / |λ_pq|² · g²·[hamming(p, q) = 1].
/// ```
pub fn first_order_direct(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    s: f64,
    p: ClassicalConfig,
) -> Result<DensityMatrix> {
    if p.n_sites() != model.n_sites() {
        return Err(Error::Shape(format!("{}-site configuration for a {}-site model", p.n_sites(), model.n_sites())));
    }
    let t = pulse.duration();
    let label_p = EigenLabel::diagonal(p);
    let proj_p = eigenmatrix(pulse, s, label_p);
    let d_proj_p = derivative_p(pulse, s, label_p);
    let mut correction = CMatrix::zeros(model.dim(), model.dim());
    for q in ClassicalConfig::all(model.n_sites()).filter(|&q| q != p) {
        let proj_q = eigenmatrix(pulse, s, EigenLabel::diagonal(q));
        let lambda_qp = eigenvalue(model, EigenLabel { q, p }).as_complex();
        let lambda_pq = eigenvalue(model, EigenLabel { q: p, p: q }).as_complex();
        correction += &(&proj_q.dot(&d_proj_p) * (1.0 / lambda_qp));
        correction += &(&d_proj_p.dot(&proj_q) * (1.0 / lambda_pq));
        if p.hamming(&q) == 1 {
            let ev = eigenvalue(model, EigenLabel { q: p, p: q });
            let weight = -2.0 * ev.r / ev.norm_sqr();
            let integral = quadrature::integrate(|x| weight * pulse.g(x).powi(2), 0.0, s, 1e-13);
            correction -= &(&(&proj_p - &proj_q) * integral);
        }
    }
    let rho = &proj_p + &(&correction * (1.0 / t));
    DensityMatrix::new(rho)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MapMode {
    /// `ρ0 + T⁻¹𝒜(s)[ρ0]`
    Linear,
    /// `e^{𝒜(s)/T}[ρ0]`
    Exponential,
}

/// How `e^{𝒜/T}` is evaluated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExpMethod {
    /// Classical rates when `K = 0`, a dense exponential for small chains,
    /// integration otherwise.
    Auto,
    Materialized,
    Integrated,
}

fn classical_probabilities(rho0: &DensityMatrix) -> Result<Vec<f64>> {
    let m = rho0.matrix();
    if !m.is_diagonal(DIAGONAL_TOL) {
        return Err(Error::Validation("first-order maps require a diagonal (classical) initial state".into()));
    }
    Ok(m.diag().iter().map(|v| v.re).collect())
}

fn check_model_state(model: &SpinChainModel, rho0: &DensityMatrix) -> Result<()> {
    if rho0.n_sites() != model.n_sites() {
        return Err(Error::Shape(format!("{}-site state for a {}-site model", rho0.n_sites(), model.n_sites())));
    }
    Ok(())
}

/// `e^{t·𝒮}[ρ]`.
pub fn exp_apply(op: &AdiabaticGenerator, time: f64, rho: &CMatrix, method: ExpMethod) -> Result<CMatrix> {
    let method = match method {
        ExpMethod::Auto if op.is_dissipative_only() && rho.is_diagonal(DIAGONAL_TOL) => {
            let probs: Vec<f64> = rho.diag().iter().map(|v| v.re).collect();
            return Ok(CMatrix::from_real_diag(&op.rate_matrix().propagate(&probs, time)?));
        }
        ExpMethod::Auto if op.n_sites() <= MATERIALIZE_MAX_SITES => ExpMethod::Materialized,
        ExpMethod::Auto => ExpMethod::Integrated,
        other => other,
    };
    let dim = op.dim();
    match method {
        ExpMethod::Materialized => {
            let generator = &op.materialize()? * time;
            let v = expm(&generator)?.matvec(&rho.vec_columns());
            CMatrix::unvec_columns(&v, dim, dim)
        }
        _ => {
            let tol = Tolerances::new(1e-12, 1e-14);
            let mut out = ode::integrate(
                |_, y, out| {
                    let image = op.apply(y);
                    out.data_mut().iter_mut().zip(image.data()).for_each(|(o, v)| *o = v * time);
                },
                0.0,
                rho,
                &[1.0],
                tol,
            )?;
            Ok(out.pop().expect("one target"))
        }
    }
}

/// Lab-frame first-order state `ρ(s)` from a classical `ρ0`.
pub fn apply_first_order_map(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    s: f64,
    rho0: &DensityMatrix,
    mode: MapMode,
) -> Result<DensityMatrix> {
    apply_first_order_map_with(model, pulse, s, rho0, mode, ExpMethod::Auto)
}

pub fn apply_first_order_map_with(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    s: f64,
    rho0: &DensityMatrix,
    mode: MapMode,
    method: ExpMethod,
) -> Result<DensityMatrix> {
    check_model_state(model, rho0)?;
    classical_probabilities(rho0)?;
    let generator = build_a(model, pulse, s);
    let inv_t = 1.0 / pulse.duration();
    let out = match mode {
        MapMode::Linear => rho0.matrix() + &(&generator.apply(rho0.matrix()) * inv_t),
        MapMode::Exponential => exp_apply(&generator, inv_t, rho0.matrix(), method)?,
    };
    DensityMatrix::new(out)
}

/// Real generator of classical flips, `dP/dt = W P`. Column `from`, row `to`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalRateMatrix {
    n_sites: usize,
    dim: usize,
    rates: Vec<f64>,
}

impl ClassicalRateMatrix {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    /// `W(from → to)`; the diagonal holds minus the escape rate.
    pub fn rate(&self, from: usize, to: usize) -> f64 {
        self.rates[to * self.dim + from]
    }

    pub fn escape_rate(&self, from: usize) -> f64 {
        -self.rate(from, from)
    }

    pub fn to_cmatrix(&self) -> CMatrix {
        CMatrix::from_fn(self.dim, self.dim, |r, c| C64::new(self.rates[r * self.dim + c], 0.0))
    }

    /// `exp(time·W)` as a row-major real matrix.
    pub fn propagator(&self, time: f64) -> Result<Vec<f64>> {
        let e = expm(&(&self.to_cmatrix() * time))?;
        Ok(e.data().iter().map(|v| v.re).collect())
    }

    /// `exp(time·W) P`.
    pub fn propagate(&self, probs: &[f64], time: f64) -> Result<Vec<f64>> {
        if probs.len() != self.dim {
            return Err(Error::Shape(format!("probability vector of length {} for dimension {}", probs.len(), self.dim)));
        }
        let prop = self.propagator(time)?;
        Ok((0..self.dim).map(|r| (0..self.dim).map(|c| prop[r * self.dim + c] * probs[c]).sum()).collect())
    }
}

/// Rates of `𝒜(1)` restricted to diagonal states.
pub fn classical_rate_matrix(model: &SpinChainModel, pulse: &PulseProfile) -> ClassicalRateMatrix {
    build_a(model, pulse, 1.0).rate_matrix()
}

/// State after `n_pulses` full pulses, `e^{(m/T)𝒜(1)}[ρ0]`, evaluated on
/// configuration probabilities.
pub fn multi_pulse_map(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    rho0: &DensityMatrix,
    n_pulses: usize,
) -> Result<DensityMatrix> {
    check_model_state(model, rho0)?;
    let probs = classical_probabilities(rho0)?;
    if n_pulses == 0 {
        return Ok(rho0.clone());
    }
    let time = n_pulses as f64 / pulse.duration();
    let out = classical_rate_matrix(model, pulse).propagate(&probs, time)?;
    DensityMatrix::new(CMatrix::from_real_diag(&out))
}

/// Same as [`multi_pulse_map`] but exponentiating `𝒜(1)` on the full
/// operator space.
pub fn multi_pulse_map_full(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    rho0: &DensityMatrix,
    n_pulses: usize,
) -> Result<DensityMatrix> {
    check_model_state(model, rho0)?;
    classical_probabilities(rho0)?;
    let generator = build_a(model, pulse, 1.0);
    let time = n_pulses as f64 / pulse.duration();
    DensityMatrix::new(exp_apply(&generator, time, rho0.matrix(), ExpMethod::Materialized)?)
}

/// `ρ(m + s) ≈ e^{𝒜(s)/T} ∘ e^{(m/T)𝒜(1)}[ρ0]`, the state a fraction `s`
/// into pulse `m + 1`.
pub fn fractional_pulse_state(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    rho0: &DensityMatrix,
    n_pulses: usize,
    s: f64,
) -> Result<DensityMatrix> {
    if !(s > 0.0 && s < 1.0) {
        return Err(Error::Validation(format!("fraction of a pulse must lie in (0, 1), got {s}")));
    }
    let after = multi_pulse_map(model, pulse, rho0, n_pulses)?;
    apply_first_order_map(model, pulse, s, &after, MapMode::Exponential)
}
