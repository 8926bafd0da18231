//! Instantaneous spectrum of the rotating-frame generator `L̄(s)`.
//!
//! In the frame `ρ̄ = U_s†ρU_s` the drive disappears and `L̄(s)` is the
//! undriven Liouvillian conjugated by `U_s`. Its eigenmatrices are therefore
//! `P_qp(s) = U_s†|q⟩⟨p|U_s` with `s`-independent eigenvalues.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exact::{rotate_by_angle, rotate_frame, FrameDirection};
use crate::linalg::{anticommutator, commutator, CMatrix, I};
use crate::model::{hamiltonian, number_op, ClassicalConfig, SpinChainModel};
use crate::pulse::PulseProfile;

/// Label `(q, p)` of the eigenmatrix `P_qp`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct EigenLabel {
    pub q: ClassicalConfig,
    pub p: ClassicalConfig,
}

impl EigenLabel {
    pub fn new(q: ClassicalConfig, p: ClassicalConfig) -> Result<Self> {
        if q.n_sites() != p.n_sites() {
            return Err(Error::Shape(format!("labels of {} and {} sites", q.n_sites(), p.n_sites())));
        }
        Ok(Self { q, p })
    }

    /// `P_pp`, the label of a stationary state.
    pub fn diagonal(p: ClassicalConfig) -> Self {
        Self { q: p, p }
    }

    pub fn n_sites(&self) -> usize {
        self.p.n_sites()
    }

    pub fn hamming(&self) -> u32 {
        self.q.hamming(&self.p)
    }

    pub fn transposed(&self) -> Self {
        Self { q: self.p, p: self.q }
    }
}

/// `λ = r + i c`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigenValue {
    pub r: f64,
    pub c: f64,
}

impl EigenValue {
    pub fn as_complex(&self) -> C64 {
        C64::new(self.r, self.c)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.r * self.r + self.c * self.c
    }
}

/// `λ_qp = −(γ/2)·hamming(q, p) − i(E_q − E_p)`.
pub fn eigenvalue(model: &SpinChainModel, label: EigenLabel) -> EigenValue {
    let r = -0.5 * model.gamma() * label.hamming() as f64;
    let c = model.classical_energy(label.p.index()) - model.classical_energy(label.q.index());
    EigenValue { r, c }
}

/// `P_qp(s) = U_s†|q⟩⟨p|U_s`.
pub fn eigenmatrix(pulse: &PulseProfile, s: f64, label: EigenLabel) -> CMatrix {
    let dim = 1usize << label.n_sites();
    let bare = CMatrix::outer_basis(dim, label.q.index(), label.p.index());
    rotate_frame(pulse, s, &bare, FrameDirection::ToRotating)
}

/// `P′_qp(s) = i g(s) Σ_k [σ_k^x, P_qp(s)]`.
pub fn derivative_p(pulse: &PulseProfile, s: f64, label: EigenLabel) -> CMatrix {
    let p = eigenmatrix(pulse, s, label);
    let g = pulse.g(s);
    let mut out = sum_sigma_x_commutator(&p, label.n_sites());
    out = &out * (I * g);
    out
}

/// `Σ_k [σ_k^x, M]` using bit flips.
fn sum_sigma_x_commutator(m: &CMatrix, n_sites: usize) -> CMatrix {
    let dim = m.rows();
    CMatrix::from_fn(dim, dim, |a, b| {
        (0..n_sites).map(|k| m[(a ^ (1 << k), b)] - m[(a, b ^ (1 << k))]).sum()
    })
}

/// The rotating-frame generator at fixed `s`, stored as the dense rotated
/// Hamiltonian `H̄ = U_s†H(0)U_s` and rotated number operators
/// `n_k(s) = U_s†n_kU_s`.
#[derive(Clone, Debug)]
pub struct RotatedGenerator {
    gamma: f64,
    h_bar: CMatrix,
    n_bar: Vec<CMatrix>,
}

impl RotatedGenerator {
    pub fn new(model: &SpinChainModel, pulse: &PulseProfile, s: f64) -> Self {
        let angle = pulse.omega(s);
        let rotate = |m: &CMatrix| rotate_by_angle(angle, m, FrameDirection::ToRotating);
        let h_bar = rotate(&hamiltonian(model, 0.0));
        let n_bar = (0..model.n_sites())
            .map(|k| rotate(&number_op(model.n_sites(), k).expect("site in range")))
            .collect();
        Self { gamma: model.gamma(), h_bar, n_bar }
    }

    pub fn dim(&self) -> usize {
        self.h_bar.rows()
    }

    /// `−i[H̄, ρ̄] + γ Σ_k (n̄_k ρ̄ n̄_k − ½{n̄_k, ρ̄})`.
    pub fn apply(&self, rho_bar: &CMatrix) -> CMatrix {
        let mut out = &commutator(&self.h_bar, rho_bar) * -I;
        for n in &self.n_bar {
            let jump = &n.dot(rho_bar).dot(n) - &(&anticommutator(n, rho_bar) * 0.5);
            out.axpy(C64::new(self.gamma, 0.0), &jump);
        }
        out
    }
}

/// `L̄(s)[ρ̄]`.
pub fn rotated_generator_apply(
    model: &SpinChainModel,
    pulse: &PulseProfile,
    s: f64,
    rho_bar: &CMatrix,
) -> Result<CMatrix> {
    if !rho_bar.is_square() || rho_bar.rows() != model.dim() {
        return Err(Error::Shape(format!(
            "{}x{} matrix does not match a {}-site chain",
            rho_bar.rows(),
            rho_bar.cols(),
            model.n_sites()
        )));
    }
    Ok(RotatedGenerator::new(model, pulse, s).apply(rho_bar))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::lindblad_rhs;
    use crate::linalg::{expm, ZERO};

    fn cfg(s: &str) -> ClassicalConfig {
        s.parse().unwrap()
    }

    fn label(q: &str, p: &str) -> EigenLabel {
        EigenLabel::new(cfg(q), cfg(p)).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        let one = SpinChainModel::new(1, 0.0, 0.0, 3.0, 1.0).unwrap();
        assert_eq!(eigenvalue(&one, label("0", "0")), EigenValue { r: 0.0, c: 0.0 });
        assert_eq!(eigenvalue(&one, label("1", "0")), EigenValue { r: -0.5, c: 0.0 });

        let two = SpinChainModel::new(2, 0.0, 1.0, 3.0, 1.0).unwrap();
        let ev = eigenvalue(&two, label("11", "10"));
        assert_eq!(ev.r, -0.5);
        assert!((ev.c.abs() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn single_flip_frequency_is_flip_energy() {
        let model = SpinChainModel::new(4, 0.7, 3.0, 3.0, 1.0).unwrap();
        for p in ClassicalConfig::all(4) {
            for k in 0..4 {
                let q = p.flipped(k);
                let ev = eigenvalue(&model, EigenLabel::new(q, p).unwrap());
                assert!((ev.c.abs() - model.flip_energy(k, p.index())).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn brute_force_single_spin_spectrum() {
        // Liouvillian of one dephased spin in the column-stacking basis.
        let (delta, gamma) = (0.0, 1.0);
        let model = SpinChainModel::new(1, delta, 0.0, 3.0, gamma).unwrap();
        let mut l = CMatrix::zeros(4, 4);
        for col in 0..4 {
            let mut basis = vec![ZERO; 4];
            basis[col] = C64::new(1.0, 0.0);
            let rho = CMatrix::unvec_columns(&basis, 2, 2).unwrap();
            let image = lindblad_rhs(&model, 0.0, &rho).unwrap().vec_columns();
            for (row, v) in image.into_iter().enumerate() {
                l[(row, col)] = v;
            }
        }
        // Diagonal in this basis, eigenvalues are the diagonal entries.
        let mut got: Vec<f64> = (0..4).map(|i| l[(i, i)].re).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, vec![-0.5, -0.5, 0.0, 0.0]);
    }

    #[test]
    fn eigenmatrix_at_pulse_edges() {
        let pulse = PulseProfile::default_shape(100.0).unwrap();
        let l = label("01", "11");
        let bare = CMatrix::outer_basis(4, l.q.index(), l.p.index());
        assert!(eigenmatrix(&pulse, 0.0, l).max_abs_diff(&bare) < 1e-15);
        assert!(eigenmatrix(&pulse, 1.0, l).max_abs_diff(&bare) < 1e-13);
    }

    #[test]
    fn projector_properties() {
        let pulse = PulseProfile::default_shape(100.0).unwrap();
        let p = eigenmatrix(&pulse, 0.3, label("010", "010"));
        assert!((p.trace() - C64::new(1.0, 0.0)).norm() < 1e-14);
        assert!(p.dot(&p).max_abs_diff(&p) < 1e-14);
        let off = eigenmatrix(&pulse, 0.3, label("110", "010"));
        assert!(off.trace().norm() < 1e-14);
        let flipped = eigenmatrix(&pulse, 0.3, label("010", "110"));
        assert!(off.adjoint().max_abs_diff(&flipped) < 1e-14);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let pulse = PulseProfile::default_shape(100.0).unwrap();
        let l = label("10", "11");
        let (s, h) = (0.37, 1e-6);
        let fd = &(&eigenmatrix(&pulse, s + h, l) - &eigenmatrix(&pulse, s - h, l)) * (0.5 / h);
        let exact = derivative_p(&pulse, s, l);
        assert!(fd.max_abs_diff(&exact) <= 1e-6 * exact.max_abs());
        assert!(exact.trace().norm() < 1e-12);
        assert!(derivative_p(&pulse, 0.0, l).max_abs() < 1e-12);
        assert!(derivative_p(&pulse, 1.0, l).max_abs() < 1e-12);
    }

    #[test]
    fn stationary_eigenmatrices_are_annihilated() {
        let model = SpinChainModel::new(3, 1.0, 3.0, 3.0, 1.0).unwrap();
        let pulse = PulseProfile::default_shape(100.0).unwrap();
        for p in ClassicalConfig::all(3) {
            let pp = eigenmatrix(&pulse, 0.41, EigenLabel::diagonal(p));
            let out = rotated_generator_apply(&model, &pulse, 0.41, &pp).unwrap();
            assert!(out.max_abs() < 1e-12);
        }
    }

    #[test]
    fn frame_consistency_with_lab_generator() {
        // L̄[ρ̄] = U†(L_lab[UρU†])U + iΩ[Σσx, ρ̄]
        let model = SpinChainModel::new(2, 0.3, 3.0, 3.0, 1.0).unwrap();
        let pulse = PulseProfile::default_shape(40.0).unwrap();
        let s = 0.23;
        let omega = pulse.g(s) / pulse.duration();
        let rho_bar = CMatrix::from_fn(4, 4, |a, b| C64::new((a + 2 * b) as f64 * 0.1, (a as f64 - b as f64) * 0.05));
        let rho = rotate_frame(&pulse, s, &rho_bar, FrameDirection::ToLab);
        let lab = lindblad_rhs(&model, omega, &rho).unwrap();
        let frame_term = &sum_sigma_x_commutator(&rho_bar, 2) * (I * omega);
        let expected = &rotate_frame(&pulse, s, &lab, FrameDirection::ToRotating) + &frame_term;
        let got = rotated_generator_apply(&model, &pulse, s, &rho_bar).unwrap();
        assert!(got.max_abs_diff(&expected) < 1e-12);
    }

    #[test]
    fn rotation_matches_dense_exponential() {
        let pulse = PulseProfile::default_shape(10.0).unwrap();
        let s = 0.2;
        let x_total = CMatrix::from_fn(4, 4, |a, b| if (a ^ b).count_ones() == 1 { C64::new(1.0, 0.0) } else { ZERO });
        let u = expm(&(&x_total * C64::new(0.0, -pulse.omega(s)))).unwrap();
        let l = label("01", "10");
        let bare = CMatrix::outer_basis(4, l.q.index(), l.p.index());
        let dense = u.adjoint().dot(&bare).dot(&u);
        assert!(dense.max_abs_diff(&eigenmatrix(&pulse, s, l)) < 1e-13);
    }

    #[test]
    fn shape_error() {
        let model = SpinChainModel::new(2, 0.0, 1.0, 3.0, 1.0).unwrap();
        let pulse = PulseProfile::default_shape(10.0).unwrap();
        assert!(rotated_generator_apply(&model, &pulse, 0.1, &CMatrix::identity(8)).is_err());
        assert!(EigenLabel::new(cfg("0"), cfg("00")).is_err());
    }
}
