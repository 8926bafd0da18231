//! The dephased Ising chain: parameters, basis conventions, and the operators
//! that define the lab-frame master equation.
//!
//! Sites are numbered from 0. A classical configuration `p` is stored as the
//! integer whose bit `k` is `p_k`, so site 0 is the least significant bit.
//! The single-site basis is ordered `(|0⟩, |1⟩)` with `σ_z = diag(−1, 1)`,
//! which makes `n = (1 + σ_z)/2` the projector onto `|1⟩`. The remaining
//! Pauli matrices follow from the same `su(2)` algebra (`σ_x σ_y = i σ_z`):
//! `σ_x = [[0, 1], [1, 0]]` and `σ_y = [[0, i], [−i, 0]]`.

use std::collections::BTreeMap;
use std::fmt;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::{CMatrix, DensityMatrix, I, ONE, ZERO};

/// Largest chain for which full 2^N × 2^N states are built.
pub const MAX_SITES: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// Static parameters of the chain. All rates and fields share the unit of
/// `gamma`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpinChainModel {
    n_sites: usize,
    delta: f64,
    v0: f64,
    alpha: f64,
    gamma: f64,
    interactions: Vec<f64>,
}

impl SpinChainModel {
    pub fn new(n_sites: usize, delta: f64, v0: f64, alpha: f64, gamma: f64) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES {
            return Err(Error::Validation(format!("n_sites must be in 1..={MAX_SITES}, got {n_sites}")));
        }
        if !(gamma > 0.0 && gamma.is_finite()) {
            return Err(Error::Validation(format!("dephasing rate must be positive, got {gamma}")));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::Validation(format!("interaction exponent must be positive, got {alpha}")));
        }
        if !delta.is_finite() || !v0.is_finite() {
            return Err(Error::Validation("non-finite field or interaction strength".into()));
        }
        let mut interactions = vec![0.0; n_sites * n_sites];
        for k in 0..n_sites {
            for m in 0..n_sites {
                if k != m {
                    interactions[k * n_sites + m] = v0 * (k.abs_diff(m) as f64).powf(-alpha);
                }
            }
        }
        Ok(Self { n_sites, delta, v0, alpha, gamma, interactions })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        1 << self.n_sites
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn v0(&self) -> f64 {
        self.v0
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// `V_km = V₀ |k − m|^(−α)`, zero on the diagonal. Open boundaries.
    pub fn interaction(&self, k: usize, m: usize) -> f64 {
        self.interactions[k * self.n_sites + m]
    }

    /// Diagonal energy `E_p = Δ Σ_k p_k + ½ Σ_km V_km p_k p_m` of a
    /// configuration index.
    pub fn classical_energy(&self, config: usize) -> f64 {
        let mut e = 0.0;
        for k in (0..self.n_sites).filter(|&k| bit(config, k)) {
            e += self.delta;
            for m in (k + 1..self.n_sites).filter(|&m| bit(config, m)) {
                e += self.interaction(k, m);
            }
        }
        e
    }

    /// `Θ_k(p) = Δ + Σ_{m≠k} V_km p_m`: the energy cost of exciting site `k`
    /// from configuration `p` (independent of `p_k` itself).
    pub fn flip_energy(&self, site: usize, config: usize) -> f64 {
        self.delta
            + (0..self.n_sites)
                .filter(|&m| m != site && bit(config, m))
                .map(|m| self.interaction(site, m))
                .sum::<f64>()
    }
}

#[inline]
pub(crate) fn bit(config: usize, site: usize) -> bool {
    config >> site & 1 == 1
}

fn check_site(n_sites: usize, site: usize) -> Result<()> {
    if site >= n_sites {
        Err(Error::Index { index: site, n_sites })
    } else {
        Ok(())
    }
}

/// A bitstring `p ∈ {0,1}^N`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ClassicalConfig {
    n_sites: usize,
    index: usize,
}

impl ClassicalConfig {
    pub fn from_index(n_sites: usize, index: usize) -> Result<Self> {
        if n_sites == 0 || n_sites > MAX_SITES || index >= 1 << n_sites {
            return Err(Error::Validation(format!("index {index} is not a configuration of {n_sites} sites")));
        }
        Ok(Self { n_sites, index })
    }

    /// `bits[k]` is the occupation of site `k`.
    pub fn from_bits(bits: &[u8]) -> Result<Self> {
        if bits.iter().any(|&b| b > 1) {
            return Err(Error::Validation(format!("bits must be 0 or 1: {bits:?}")));
        }
        let index = bits.iter().enumerate().map(|(k, &b)| (b as usize) << k).sum();
        Self::from_index(bits.len(), index)
    }

    pub fn all(n_sites: usize) -> impl Iterator<Item = ClassicalConfig> {
        (0..1usize << n_sites).map(move |index| ClassicalConfig { n_sites, index })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn index(&self) -> usize {
        self.index
    }

    pub fn bit(&self, site: usize) -> u8 {
        bit(self.index, site) as u8
    }

    pub fn bits(&self) -> Vec<u8> {
        (0..self.n_sites).map(|k| self.bit(k)).collect()
    }

    pub fn flipped(&self, site: usize) -> Self {
        assert!(site < self.n_sites);
        Self { n_sites: self.n_sites, index: self.index ^ (1 << site) }
    }

    pub fn hamming(&self, other: &Self) -> u32 {
        (self.index ^ other.index).count_ones()
    }

    pub fn excitations(&self) -> u32 {
        self.index.count_ones()
    }
}

impl fmt::Display for ClassicalConfig {
    /// Site 0 first, e.g. `01` is site 0 empty and site 1 excited.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.n_sites {
            write!(f, "{}", self.bit(k))?;
        }
        Ok(())
    }
}

impl std::str::FromStr for ClassicalConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .trim()
            .chars()
            .map(|ch| match ch {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::Validation(format!("invalid configuration string {s:?}"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        Self::from_bits(&bits)
    }
}

pub const MIXTURE_NORM_TOL: f64 = 1e-12;

/// Probability weights over classical configurations.
#[derive(Clone, Debug, PartialEq)]
pub struct ClassicalMixture {
    n_sites: usize,
    weights: BTreeMap<usize, f64>,
}

impl ClassicalMixture {
    pub fn new(entries: impl IntoIterator<Item = (ClassicalConfig, f64)>) -> Result<Self> {
        let mut n_sites = None;
        let mut weights = BTreeMap::new();
        for (config, w) in entries {
            if *n_sites.get_or_insert(config.n_sites) != config.n_sites {
                return Err(Error::Validation("configurations of different lengths in one mixture".into()));
            }
            if !(w >= 0.0 && w.is_finite()) {
                return Err(Error::Validation(format!("weight {w} for {config} is not a probability")));
            }
            *weights.entry(config.index).or_insert(0.0) += w;
        }
        let n_sites = n_sites.ok_or_else(|| Error::Validation("empty mixture".into()))?;
        let total: f64 = weights.values().sum();
        if (total - 1.0).abs() > MIXTURE_NORM_TOL {
            return Err(Error::Validation(format!("mixture weights sum to {total}, not 1")));
        }
        Ok(Self { n_sites, weights })
    }

    pub fn pure(config: ClassicalConfig) -> Self {
        Self { n_sites: config.n_sites, weights: BTreeMap::from([(config.index, 1.0)]) }
    }

    pub fn uniform(n_sites: usize) -> Result<Self> {
        let w = 1.0 / (1usize << n_sites) as f64;
        Self::new(ClassicalConfig::all(n_sites).map(|c| (c, w)))
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn weight(&self, config: &ClassicalConfig) -> f64 {
        self.weights.get(&config.index).copied().unwrap_or(0.0)
    }

    pub fn iter(&self) -> impl Iterator<Item = (ClassicalConfig, f64)> + '_ {
        self.weights.iter().map(|(&index, &w)| (ClassicalConfig { n_sites: self.n_sites, index }, w))
    }

    /// Dense probability vector indexed by configuration.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = vec![0.0; 1 << self.n_sites];
        for (&i, &w) in &self.weights {
            v[i] = w;
        }
        v
    }
}

/// `ρ = Σ_p a_p |p⟩⟨p|`.
pub fn mixture_to_density(mix: &ClassicalMixture) -> DensityMatrix {
    DensityMatrix::new(CMatrix::from_real_diag(&mix.to_vector()))
        .expect("normalized mixture is a valid state")
}

/// The 2×2 Pauli matrix in the `(|0⟩, |1⟩)` basis.
pub fn pauli_2x2(axis: Axis) -> CMatrix {
    match axis {
        Axis::X => CMatrix::from_rows(&[vec![ZERO, ONE], vec![ONE, ZERO]]),
        Axis::Y => CMatrix::from_rows(&[vec![ZERO, I], vec![-I, ZERO]]),
        Axis::Z => CMatrix::from_real_diag(&[-1.0, 1.0]),
    }
}

/// `σ^axis` acting on `site` of an `n_sites` chain.
pub fn pauli(n_sites: usize, site: usize, axis: Axis) -> Result<CMatrix> {
    check_site(n_sites, site)?;
    if n_sites > MAX_SITES {
        return Err(Error::Capacity { dim: 1 << n_sites, cap: 1 << MAX_SITES });
    }
    let dim = 1usize << n_sites;
    let mask = 1usize << site;
    let mut m = CMatrix::zeros(dim, dim);
    for a in 0..dim {
        let occupied = a & mask != 0;
        match axis {
            Axis::X => m[(a ^ mask, a)] = ONE,
            // ⟨1|σ_y|0⟩ = −i, ⟨0|σ_y|1⟩ = i
            Axis::Y => m[(a ^ mask, a)] = if occupied { I } else { -I },
            Axis::Z => m[(a, a)] = if occupied { ONE } else { -ONE },
        }
    }
    Ok(m)
}

/// Projector `n_k = (1 + σ_k^z)/2` onto `|1⟩` at `site`.
pub fn number_op(n_sites: usize, site: usize) -> Result<CMatrix> {
    check_site(n_sites, site)?;
    let dim = 1usize << n_sites;
    let diag: Vec<f64> = (0..dim).map(|a| if bit(a, site) { 1.0 } else { 0.0 }).collect();
    Ok(CMatrix::from_real_diag(&diag))
}

/// `H = Σ_k [Δ n_k + Ω σ_k^x] + ½ Σ_km V_km n_k n_m` at transverse field `Ω`.
pub fn hamiltonian(model: &SpinChainModel, omega: f64) -> CMatrix {
    let dim = model.dim();
    let mut h = CMatrix::zeros(dim, dim);
    for a in 0..dim {
        h[(a, a)] = model.classical_energy(a).into();
        if omega != 0.0 {
            for k in 0..model.n_sites {
                h[(a ^ (1 << k), a)] += C64::new(omega, 0.0);
            }
        }
    }
    h
}

/// Dephasing jump operators `L_k = √γ n_k`.
pub fn jump_ops(model: &SpinChainModel) -> Vec<CMatrix> {
    (0..model.n_sites)
        .map(|k| &number_op(model.n_sites, k).expect("site in range") * model.gamma.sqrt())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{commutator, kron};

    fn model(n: usize, delta: f64, v0: f64) -> SpinChainModel {
        SpinChainModel::new(n, delta, v0, 3.0, 1.0).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(SpinChainModel::new(2, 0.0, 1.0, 3.0, 0.0).is_err());
        assert!(SpinChainModel::new(0, 0.0, 1.0, 3.0, 1.0).is_err());
        assert!(SpinChainModel::new(2, 0.0, 1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn single_site_pauli_z() {
        assert_eq!(pauli(1, 0, Axis::Z).unwrap(), CMatrix::from_real_diag(&[-1.0, 1.0]));
    }

    #[test]
    fn pauli_algebra() {
        let (x, y, z) = (pauli_2x2(Axis::X), pauli_2x2(Axis::Y), pauli_2x2(Axis::Z));
        assert!(x.dot(&y).max_abs_diff(&(&z * I)) < 1e-15);
        assert!(y.dot(&z).max_abs_diff(&(&x * I)) < 1e-15);
        let x1 = pauli(2, 0, Axis::X).unwrap();
        assert_eq!(x1.dot(&x1), CMatrix::identity(4));
        let y2 = pauli(2, 1, Axis::Y).unwrap();
        assert_eq!(commutator(&x1, &y2), CMatrix::zeros(4, 4));
    }

    #[test]
    fn pauli_matches_kron_construction() {
        let n = 3;
        for axis in [Axis::X, Axis::Y, Axis::Z] {
            for site in 0..n {
                // Left factors act on the highest sites.
                let mut m = CMatrix::identity(1);
                for k in (0..n).rev() {
                    let factor = if k == site { pauli_2x2(axis) } else { CMatrix::identity(2) };
                    m = kron(&m, &factor).unwrap();
                }
                assert_eq!(m, pauli(n, site, axis).unwrap(), "{axis:?} at {site}");
            }
        }
    }

    #[test]
    fn pauli_index_error() {
        assert!(matches!(pauli(2, 2, Axis::X), Err(Error::Index { index: 2, n_sites: 2 })));
    }

    #[test]
    fn number_operator_counts() {
        let n = number_op(1, 0).unwrap();
        assert_eq!(n.matvec(&[ZERO, ONE]), vec![ZERO, ONE]);
        assert_eq!(n.matvec(&[ONE, ZERO]), vec![ZERO, ZERO]);
        let config: ClassicalConfig = "110".parse().unwrap();
        let total = (0..3).fold(CMatrix::zeros(8, 8), |acc, k| &acc + &number_op(3, k).unwrap());
        assert_eq!(total[(config.index(), config.index())], C64::new(2.0, 0.0));
        assert_eq!(n.dot(&n), n);
    }

    #[test]
    fn hamiltonian_examples() {
        assert_eq!(hamiltonian(&model(1, 0.0, 1.0), 0.0), CMatrix::zeros(2, 2));
        let h = hamiltonian(&model(2, 0.0, 1.0), 0.0);
        assert_eq!(h[(3, 3)], C64::new(1.0, 0.0));
        let m3 = model(3, 0.0, 2.0);
        assert_eq!(m3.interaction(0, 2), 2.0 / 8.0);
    }

    #[test]
    fn hamiltonian_is_hermitian() {
        let h = hamiltonian(&model(4, 0.7, 3.0), 1.3);
        assert!(h.hermitian_defect() <= 1e-14);
    }

    #[test]
    fn diagonal_energies_match_brute_force() {
        for n in 1..=4 {
            let m = SpinChainModel::new(n, 0.4, 2.5, 1.7, 1.0).unwrap();
            let h = hamiltonian(&m, 0.0);
            assert!(h.is_diagonal(0.0));
            for p in ClassicalConfig::all(n) {
                let bits = p.bits();
                let mut e = 0.0;
                for k in 0..n {
                    e += m.delta() * bits[k] as f64;
                    for q in 0..n {
                        e += 0.5 * m.interaction(k, q) * (bits[k] * bits[q]) as f64;
                    }
                }
                assert!((h[(p.index(), p.index())].re - e).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn interaction_matrix_symmetry() {
        for n in 1..=8 {
            let m = model(n, 0.0, 3.0);
            for k in 0..n {
                assert_eq!(m.interaction(k, k), 0.0);
                for q in 0..n {
                    assert_eq!(m.interaction(k, q), m.interaction(q, k));
                }
            }
        }
    }

    #[test]
    fn jump_operators() {
        let m = SpinChainModel::new(1, 0.0, 0.0, 3.0, 2.0).unwrap();
        let l = jump_ops(&m);
        assert_eq!(l[0], CMatrix::from_real_diag(&[0.0, 2f64.sqrt()]));
        let m3 = SpinChainModel::new(3, 0.0, 0.0, 3.0, 0.5).unwrap();
        let total = jump_ops(&m3).iter().fold(CMatrix::zeros(8, 8), |acc, l| &acc + &l.adjoint().dot(l));
        assert!((total[(7, 7)].re - 3.0 * 0.5).abs() < 1e-15);
        for (k, l) in jump_ops(&m3).iter().enumerate() {
            let ldl = l.adjoint().dot(l);
            assert!(ldl.max_abs_diff(&(&number_op(3, k).unwrap() * 0.5)) < 1e-15);
        }
    }

    #[test]
    fn mixtures() {
        let zero: ClassicalConfig = "00".parse().unwrap();
        assert_eq!(*mixture_to_density(&ClassicalMixture::pure(zero)).matrix(), CMatrix::outer_basis(4, 0, 0));
        let uni = mixture_to_density(&ClassicalMixture::uniform(3).unwrap());
        assert!(uni.matrix().max_abs_diff(&(&CMatrix::identity(8) * 0.125)) < 1e-15);
        let mix = ClassicalMixture::new([("0".parse().unwrap(), 0.3), ("1".parse().unwrap(), 0.7)]).unwrap();
        assert_eq!(*mixture_to_density(&mix).matrix(), CMatrix::from_real_diag(&[0.3, 0.7]));
        assert!(ClassicalMixture::new([(zero, 0.5)]).is_err());
    }

    #[test]
    fn config_string_round_trip() {
        let c: ClassicalConfig = "0110".parse().unwrap();
        assert_eq!(c.bits(), vec![0, 1, 1, 0]);
        assert_eq!(c.index(), 0b0110);
        assert_eq!(c.to_string(), "0110");
        assert_eq!(c.flipped(0).to_string(), "1110");
        assert!("012".parse::<ClassicalConfig>().is_err());
    }
}
