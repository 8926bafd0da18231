//! Numerically exact integration of the driven, dephased chain.
//!
//! Evolution is parametrized by the normalized time `s = t/T`, so the lab
//! frame equation reads `dρ/ds = T·L(Ω = g(s)/T)[ρ]`. In the classical basis
//! the undriven part of `L` acts entrywise,
//! `ρ_ab ↦ (−i(E_a − E_b) − (γ/2)·hamming(a, b)) ρ_ab`, and the drive only
//! couples entries that differ by one spin flip. [`LabGenerator`] exploits
//! this; [`lindblad_rhs`] is the literal dense-operator form used to check it.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{anticommutator, commutator, CMatrix, DensityMatrix, I, ZERO};
use crate::model::{hamiltonian, jump_ops, SpinChainModel};
use crate::ode::{self, Tolerances};
use crate::pulse::PulseProfile;
use crate::spectral::RotatedGenerator;

/// `−i[H(Ω), ρ] + Σ_k (L_k ρ L_k† − ½{L_k†L_k, ρ})` built from dense operators.
pub fn lindblad_rhs(model: &SpinChainModel, omega: f64, rho: &CMatrix) -> Result<CMatrix> {
    if !rho.is_square() || rho.rows() != model.dim() {
        return Err(Error::Shape(format!(
            "{}x{} matrix does not match a {}-site chain",
            rho.rows(),
            rho.cols(),
            model.n_sites()
        )));
    }
    let h = hamiltonian(model, omega);
    let mut out = &commutator(&h, rho) * -I;
    for l in jump_ops(model) {
        let ld = l.adjoint();
        out += &l.dot(rho).dot(&ld);
        out -= &(&anticommutator(&ld.dot(&l), rho) * 0.5);
    }
    Ok(out)
}

/// Lab-frame generator specialized to the dephased Ising chain.
#[derive(Clone, Debug)]
pub struct LabGenerator {
    n_sites: usize,
    dim: usize,
    // Eigenvalue of the undriven Liouvillian on |a⟩⟨b|, row-major.
    static_rates: Vec<C64>,
}

impl LabGenerator {
    pub fn new(model: &SpinChainModel) -> Self {
        let dim = model.dim();
        let energies: Vec<f64> = (0..dim).map(|a| model.classical_energy(a)).collect();
        let half_gamma = 0.5 * model.gamma();
        let mut static_rates = Vec::with_capacity(dim * dim);
        for a in 0..dim {
            for b in 0..dim {
                let flips = (a ^ b).count_ones() as f64;
                static_rates.push(C64::new(-half_gamma * flips, -(energies[a] - energies[b])));
            }
        }
        Self { n_sites: model.n_sites(), dim, static_rates }
    }

    /// `out = time_scale · L(Ω)[ρ]` with `Ω = drive / time_scale`; with
    /// `time_scale = T` and `drive = g(s)` this is the `s`-derivative.
    pub fn apply_into(&self, time_scale: f64, drive: f64, rho: &CMatrix, out: &mut CMatrix) {
        let dim = self.dim;
        let r = rho.data();
        let o = out.data_mut();
        let minus_i_drive = -I * drive;
        for a in 0..dim {
            for b in 0..dim {
                let idx = a * dim + b;
                let mut flip = ZERO;
                if drive != 0.0 {
                    for k in 0..self.n_sites {
                        let m = 1usize << k;
                        flip += r[(a ^ m) * dim + b] - r[a * dim + (b ^ m)];
                    }
                }
                o[idx] = self.static_rates[idx] * time_scale * r[idx] + minus_i_drive * flip;
            }
        }
    }

    /// `L(Ω)[ρ]` in lab time units.
    pub fn apply(&self, omega: f64, rho: &CMatrix) -> CMatrix {
        let mut out = CMatrix::zeros(self.dim, self.dim);
        self.apply_into(1.0, omega, rho, &mut out);
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FrameDirection {
    /// `ρ̄ = U†ρU`
    ToRotating,
    /// `ρ = Uρ̄U†`
    ToLab,
}

/// Applies the single-site operator `op` on the left (`op ⊗ 1`) in place.
pub(crate) fn site_left(m: &mut CMatrix, site: usize, op: [[C64; 2]; 2]) {
    let (rows, cols) = (m.rows(), m.cols());
    let mask = 1usize << site;
    let d = m.data_mut();
    for a in (0..rows).filter(|a| a & mask == 0) {
        let a1 = a | mask;
        for c in 0..cols {
            let (x0, x1) = (d[a * cols + c], d[a1 * cols + c]);
            d[a * cols + c] = op[0][0] * x0 + op[0][1] * x1;
            d[a1 * cols + c] = op[1][0] * x0 + op[1][1] * x1;
        }
    }
}

/// Applies the single-site operator `op` on the right in place.
pub(crate) fn site_right(m: &mut CMatrix, site: usize, op: [[C64; 2]; 2]) {
    let (rows, cols) = (m.rows(), m.cols());
    let mask = 1usize << site;
    let d = m.data_mut();
    for r in 0..rows {
        for b in (0..cols).filter(|b| b & mask == 0) {
            let b1 = b | mask;
            let (x0, x1) = (d[r * cols + b], d[r * cols + b1]);
            d[r * cols + b] = x0 * op[0][0] + x1 * op[1][0];
            d[r * cols + b1] = x0 * op[0][1] + x1 * op[1][1];
        }
    }
}

/// Conjugates by `U = Π_k exp(−i·angle·σ_k^x)`.
pub fn rotate_by_angle(angle: f64, m: &CMatrix, direction: FrameDirection) -> CMatrix {
    let n_sites = m.rows().trailing_zeros() as usize;
    let (c, s) = (C64::new(angle.cos(), 0.0), C64::new(0.0, angle.sin()));
    let u = [[c, -s], [-s, c]];
    let u_dag = [[c, s], [s, c]];
    let (left, right) = match direction {
        FrameDirection::ToRotating => (u_dag, u),
        FrameDirection::ToLab => (u, u_dag),
    };
    let mut out = m.clone();
    for k in 0..n_sites {
        site_left(&mut out, k, left);
        site_right(&mut out, k, right);
    }
    out
}

/// Moves a matrix between the lab frame and the frame rotating with `ω(s)`.
pub fn rotate_frame(pulse: &PulseProfile, s: f64, m: &CMatrix, direction: FrameDirection) -> CMatrix {
    rotate_by_angle(pulse.omega(s), m, direction)
}

/// Snapshots of an evolution. `times` are normalized; in multi-pulse runs
/// `m + s` is the time `s` into pulse `m + 1`.
#[derive(Clone, Debug)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last(&self) -> Option<&DensityMatrix> {
        self.states.last()
    }
}

fn check_grid(s_grid: &[f64]) -> Result<()> {
    if s_grid.is_empty() {
        return Err(Error::Validation("empty time grid".into()));
    }
    if s_grid.iter().any(|&s| !(0.0..=1.0).contains(&s)) || s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Validation("time grid must be strictly increasing within [0, 1]".into()));
    }
    Ok(())
}

fn check_state(model: &SpinChainModel, rho: &DensityMatrix) -> Result<()> {
    if rho.n_sites() != model.n_sites() {
        return Err(Error::Shape(format!(
            "state of {} sites for a {}-site model",
            rho.n_sites(),
            model.n_sites()
        )));
    }
    Ok(())
}

fn to_state(m: CMatrix, at: f64) -> Result<DensityMatrix> {
    DensityMatrix::new(m).map_err(|e| Error::Convergence {
        at,
        steps: 0,
        achieved: f64::NAN,
        reason: format!("integrated state is no longer a density matrix: {e}"),
    })
}

/// Integrates one pulse in the lab frame and returns the states at `s_grid`.
pub fn evolve_exact(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    rho0: &DensityMatrix,
    s_grid: &[f64],
) -> Result<Trajectory> {
    evolve_exact_with(model, pulse, rho0, s_grid, Tolerances::default())
}

pub fn evolve_exact_with(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    rho0: &DensityMatrix,
    s_grid: &[f64],
    tol: Tolerances,
) -> Result<Trajectory> {
    check_state(model, rho0)?;
    check_grid(s_grid)?;
    let generator = LabGenerator::new(model);
    let t = pulse.duration();
    let states = ode::integrate(
        |s, rho, out| generator.apply_into(t, pulse.g(s), rho, out),
        0.0,
        rho0.matrix(),
        s_grid,
        tol,
    )?;
    let states = states.into_iter().zip(s_grid).map(|(m, &s)| to_state(m, s)).collect::<Result<_>>()?;
    Ok(Trajectory { times: s_grid.to_vec(), states })
}

/// Integrates `dρ̄/ds = T·L̄(s)[ρ̄]` directly in the rotating frame. Uses the
/// dense rotated generator, so it is meant for small chains.
pub fn evolve_exact_rotating(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    rho_bar0: &DensityMatrix,
    s_grid: &[f64],
    tol: Tolerances,
) -> Result<Trajectory> {
    check_state(model, rho_bar0)?;
    check_grid(s_grid)?;
    let t = pulse.duration();
    let states = ode::integrate(
        |s, rho, out| {
            let l = RotatedGenerator::new(model, pulse, s).apply(rho);
            out.data_mut().iter_mut().zip(l.data()).for_each(|(o, v)| *o = v * t);
        },
        0.0,
        rho_bar0.matrix(),
        s_grid,
        tol,
    )?;
    let states = states.into_iter().zip(s_grid).map(|(m, &s)| to_state(m, s)).collect::<Result<_>>()?;
    Ok(Trajectory { times: s_grid.to_vec(), states })
}

/// Applies `n_pulses` identical pulses back to back, recording the lab-frame
/// state at `m + s` for each `s` in `s_grid_per_pulse`. The lab-frame
/// equation restarts from `s = 0` every pulse, so no frame bookkeeping is
/// carried between pulses.
pub fn evolve_multi_pulse_exact(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    rho0: &DensityMatrix,
    n_pulses: usize,
    s_grid_per_pulse: &[f64],
) -> Result<Trajectory> {
    evolve_multi_pulse_exact_with(model, pulse, rho0, n_pulses, s_grid_per_pulse, Tolerances::default())
}

pub fn evolve_multi_pulse_exact_with(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    rho0: &DensityMatrix,
    n_pulses: usize,
    s_grid_per_pulse: &[f64],
    tol: Tolerances,
) -> Result<Trajectory> {
    check_state(model, rho0)?;
    check_grid(s_grid_per_pulse)?;
    let mut trajectory = Trajectory { times: vec![0.0], states: vec![rho0.clone()] };
    if n_pulses == 0 {
        return Ok(trajectory);
    }
    let mut targets: Vec<f64> = s_grid_per_pulse.iter().copied().filter(|&s| s > 0.0).collect();
    if targets.last() != Some(&1.0) {
        targets.push(1.0);
    }
    let recorded: Vec<bool> = targets.iter().map(|s| s_grid_per_pulse.contains(s)).collect();
    let mut state = rho0.clone();
    for m in 0..n_pulses {
        let segment = evolve_exact_with(model, pulse, &state, &targets, tol).map_err(|e| match e {
            Error::Convergence { at, steps, achieved, reason } => {
                Error::Convergence { at: m as f64 + at, steps, achieved, reason }
            }
            other => other,
        })?;
        for ((s, rho), &keep) in segment.times.iter().zip(&segment.states).zip(&recorded) {
            if keep {
                trajectory.times.push(m as f64 + s);
                trajectory.states.push(rho.clone());
            }
        }
        state = segment.states.last().expect("pulse end is always a target").clone();
    }
    Ok(trajectory)
}

/// Lab-frame state after `n_pulses` complete pulses.
pub fn state_after_pulses(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    rho0: &DensityMatrix,
    n_pulses: usize,
    tol: Tolerances,
) -> Result<DensityMatrix> {
    let mut state = rho0.clone();
    for _ in 0..n_pulses {
        state = evolve_exact_with(model, pulse, &state, &[1.0], tol)?.states.pop().expect("one target");
    }
    Ok(state)
}
