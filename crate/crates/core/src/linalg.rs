//! Dense complex matrices and the handful of linear-algebra kernels the rest
//! of the crate is built on.
//!
//! Storage is row-major. Whenever a matrix is flattened into a vector (to
//! materialize a superoperator), columns are stacked, so that
//! `vec(A X B) = (Bᵀ ⊗ A) vec(X)`. Nothing else in the crate picks its own
//! convention.
//!
//! Basis states of an `N`-site chain are indexed by the integer whose bit `k`
//! is the occupation of site `k` (site 0 is the least significant bit). Under
//! [`kron`], the *left* factor therefore acts on the *highest* site.

use std::fmt;
use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Largest row/column count any constructor will allocate: a 4⁵ × 4⁵
/// superoperator, or a 2¹⁰ × 2¹⁰ state.
pub const MAX_DIM: usize = 1024;

pub(crate) const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
pub(crate) const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub(crate) const I: C64 = C64 { re: 0.0, im: 1.0 };

#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            write!(f, "  ")?;
            for c in 0..self.cols {
                let z = self[(r, c)];
                write!(f, "{:+.4e}{:+.4e}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Shape(format!("empty matrix {rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries supplied for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self { rows, cols, data: vec![ZERO; rows * cols] }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for r in 0..rows {
            for c in 0..cols {
                m.data[r * cols + c] = f(r, c);
            }
        }
        m
    }

    /// Builds a matrix from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<C64>]) -> Self {
        let n_cols = rows[0].len();
        assert!(rows.iter().all(|r| r.len() == n_cols), "ragged rows");
        Self::from_fn(rows.len(), n_cols, |r, c| rows[r][c])
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    /// `|row⟩⟨col|` in a space of the given dimension.
    pub fn outer_basis(dim: usize, row: usize, col: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        m[(row, col)] = ONE;
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    /// Row-major entries.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [C64] {
        &mut self.data
    }

    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).collect()
    }

    pub fn trace(&self) -> C64 {
        self.diag().into_iter().sum()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)])
    }

    pub fn scale(&self, a: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * a).collect() }
    }

    /// `self += a * other`.
    pub fn axpy(&mut self, a: C64, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "axpy shape mismatch");
        for (x, y) in self.data.iter_mut().zip(&other.data) {
            *x += a * y;
        }
    }

    /// Matrix product; panics on mismatched inner dimensions.
    pub fn dot(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        let n = other.cols;
        for i in 0..self.rows {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == ZERO {
                    continue;
                }
                let b_row = &other.data[k * n..(k + 1) * n];
                for (o, b) in out_row.iter_mut().zip(b_row) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn try_dot(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(self.dot(other))
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm_fro(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Induced 1-norm (largest absolute column sum).
    pub fn norm_one(&self) -> f64 {
        (0..self.cols)
            .map(|c| (0..self.rows).map(|r| self[(r, c)].norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// Largest entry of `|M − M†|`.
    pub fn hermitian_defect(&self) -> f64 {
        assert!(self.is_square());
        let n = self.rows;
        let mut worst: f64 = 0.0;
        for r in 0..n {
            for c in r..n {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian within `rel_tol` relative to the largest entry.
    pub fn is_hermitian(&self, rel_tol: f64) -> bool {
        self.is_square() && self.hermitian_defect() <= rel_tol * self.max_abs().max(f64::MIN_POSITIVE)
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        (0..self.rows).all(|r| (0..self.cols).all(|c| r == c || self[(r, c)].norm() <= tol))
    }

    /// The matrix with all off-diagonal entries removed.
    pub fn diagonal_part(&self) -> Self {
        Self::from_diag(&self.diag())
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data.iter().zip(&other.data).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Column-stacked vectorization.
    pub fn vec_columns(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.data.len());
        for c in 0..self.cols {
            for r in 0..self.rows {
                v.push(self[(r, c)]);
            }
        }
        v
    }

    /// Inverse of [`CMatrix::vec_columns`].
    pub fn unvec_columns(v: &[C64], rows: usize, cols: usize) -> Result<Self> {
        if v.len() != rows * cols {
            return Err(Error::Shape(format!("vector of length {} is not {rows}x{cols}", v.len())));
        }
        Ok(Self::from_fn(rows, cols, |r, c| v[c * rows + r]))
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len());
        (0..self.rows)
            .map(|r| self.data[r * self.cols..(r + 1) * self.cols].iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;
    fn index(&self, (r, c): (usize, usize)) -> &C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut C64 {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl AddAssign<&CMatrix> for CMatrix {
    fn add_assign(&mut self, rhs: &CMatrix) {
        self.axpy(ONE, rhs);
    }
}

impl SubAssign<&CMatrix> for CMatrix {
    fn sub_assign(&mut self, rhs: &CMatrix) {
        self.axpy(-ONE, rhs);
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.dot(rhs)
    }
}

impl Mul<C64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: C64) -> CMatrix {
        self.scale(rhs)
    }
}

impl Mul<f64> for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: f64) -> CMatrix {
        self.scale(C64::new(rhs, 0.0))
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(-ONE)
    }
}

/// `[a, b] = ab − ba`.
pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    &a.dot(b) - &b.dot(a)
}

/// `{a, b} = ab + ba`.
pub fn anticommutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    &a.dot(b) + &b.dot(a)
}

/// Kronecker product `a ⊗ b`, refusing results larger than [`MAX_DIM`].
pub fn kron(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    kron_with_cap(a, b, MAX_DIM)
}

pub fn kron_with_cap(a: &CMatrix, b: &CMatrix, cap: usize) -> Result<CMatrix> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    if rows.max(cols) > cap {
        return Err(Error::Capacity { dim: rows.max(cols), cap });
    }
    Ok(CMatrix::from_fn(rows, cols, |r, c| {
        a[(r / b.rows, c / b.cols)] * b[(r % b.rows, c % b.cols)]
    }))
}

/// Matrix of the superoperator `X ↦ a X b` acting on column-stacked vectors.
pub fn sandwich_superop(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    kron(&b.transpose(), a)
}

// Padé numerator coefficients b_0..b_m for the diagonal [m/m] approximant of e^x.
const PADE3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const PADE5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const PADE7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const PADE9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

// Largest 1-norms for which each approximant reaches double-precision
// backward error without scaling.
const THETA3: f64 = 1.495585217958292e-2;
const THETA5: f64 = 2.539398330063230e-1;
const THETA7: f64 = 9.504178996162932e-1;
const THETA9: f64 = 2.097847961257068e0;
const THETA13: f64 = 5.371920351148152e0;

/// Matrix exponential by scaling and squaring with a Padé approximant whose
/// order and squaring count are chosen from the 1-norm of the input.
pub fn expm(m: &CMatrix) -> Result<CMatrix> {
    if !m.is_square() {
        return Err(Error::Shape(format!("expm of a non-square {}x{} matrix", m.rows, m.cols)));
    }
    let n = m.rows;
    let norm = m.norm_one();
    if !norm.is_finite() {
        return Err(Error::Domain("expm of a matrix with non-finite entries".into()));
    }
    let ident = CMatrix::identity(n);
    if norm == 0.0 {
        return Ok(ident);
    }

    let a2 = m.dot(m);
    let low_order = [(THETA3, &PADE3[..]), (THETA5, &PADE5[..]), (THETA7, &PADE7[..]), (THETA9, &PADE9[..])];
    for (theta, coeffs) in low_order {
        if norm <= theta {
            let (u, v) = pade_low(m, &a2, coeffs);
            return pade_solve(&u, &v);
        }
    }

    let squarings = (norm / THETA13).log2().ceil().max(0.0) as i32;
    let scale = 0.5_f64.powi(squarings);
    let a = m * scale;
    let a2 = &a2 * (scale * scale);
    let a4 = a2.dot(&a2);
    let a6 = a4.dot(&a2);
    let b = &PADE13;

    let mut inner_u = &a6 * b[13];
    inner_u.axpy(b[11].into(), &a4);
    inner_u.axpy(b[9].into(), &a2);
    let mut u = a6.dot(&inner_u);
    u.axpy(b[7].into(), &a6);
    u.axpy(b[5].into(), &a4);
    u.axpy(b[3].into(), &a2);
    u.axpy(b[1].into(), &ident);
    let u = a.dot(&u);

    let mut inner_v = &a6 * b[12];
    inner_v.axpy(b[10].into(), &a4);
    inner_v.axpy(b[8].into(), &a2);
    let mut v = a6.dot(&inner_v);
    v.axpy(b[6].into(), &a6);
    v.axpy(b[4].into(), &a4);
    v.axpy(b[2].into(), &a2);
    v.axpy(b[0].into(), &ident);

    let mut r = pade_solve(&u, &v)?;
    for _ in 0..squarings {
        r = r.dot(&r);
    }
    Ok(r)
}

fn pade_low(a: &CMatrix, a2: &CMatrix, b: &[f64]) -> (CMatrix, CMatrix) {
    let n = a.rows;
    let mut power = CMatrix::identity(n);
    let mut u = CMatrix::zeros(n, n);
    let mut v = CMatrix::zeros(n, n);
    for j in 0..b.len() / 2 {
        v.axpy(b[2 * j].into(), &power);
        u.axpy(b[2 * j + 1].into(), &power);
        power = power.dot(a2);
    }
    (a.dot(&u), v)
}

fn pade_solve(u: &CMatrix, v: &CMatrix) -> Result<CMatrix> {
    solve(&(v - u), &(v + u))
}

/// Solves `a X = b` by LU decomposition with partial pivoting.
pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    if !a.is_square() || a.rows != b.rows {
        return Err(Error::Shape(format!(
            "cannot solve {}x{} system with {}x{} right-hand side",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let n = a.rows;
    let m = b.cols;
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| lu[(i, col)].norm().total_cmp(&lu[(j, col)].norm()))
            .expect("non-empty pivot range");
        if lu[(pivot, col)].norm() == 0.0 {
            return Err(Error::Domain("singular matrix in linear solve".into()));
        }
        if pivot != col {
            for c in 0..n {
                lu.data.swap(pivot * n + c, col * n + c);
            }
            for c in 0..m {
                x.data.swap(pivot * m + c, col * m + c);
            }
        }
        let diag = lu[(col, col)];
        for row in col + 1..n {
            let factor = lu[(row, col)] / diag;
            if factor == ZERO {
                continue;
            }
            for c in col..n {
                let t = lu[(col, c)];
                lu[(row, c)] -= factor * t;
            }
            for c in 0..m {
                let t = x[(col, c)];
                x[(row, c)] -= factor * t;
            }
        }
    }
    for row in (0..n).rev() {
        for c in 0..m {
            let mut acc = x[(row, c)];
            for k in row + 1..n {
                acc -= lu[(row, k)] * x[(k, c)];
            }
            x[(row, c)] = acc / lu[(row, row)];
        }
    }
    Ok(x)
}

/// Relative tolerance on `|M − M†|` accepted by [`hermitian_eigs`].
pub const HERMITIAN_TOL: f64 = 1e-10;

/// Eigen-decomposition of a Hermitian matrix. Eigenvalues are returned in
/// ascending order; eigenvectors are the matching columns of the second
/// value.
pub fn hermitian_eigs(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    if !m.is_square() {
        return Err(Error::Shape(format!("eigendecomposition of non-square {}x{} matrix", m.rows, m.cols)));
    }
    if !m.is_hermitian(HERMITIAN_TOL) {
        return Err(Error::Domain(format!(
            "matrix is not Hermitian (defect {:e}, scale {:e})",
            m.hermitian_defect(),
            m.max_abs()
        )));
    }
    let n = m.rows;
    // Symmetrize so round-off in the input cannot leak into the solver.
    let h = DMatrix::from_fn(n, n, |r, c| 0.5 * (m[(r, c)] + m[(c, r)].conj()));
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = CMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    hermitian_eigs(m).map(|(v, _)| v)
}

/// Reduced state of a single site: traces out every other site of an
/// `n_sites` chain.
pub fn partial_trace(rho: &CMatrix, keep_site: usize, n_sites: usize) -> Result<CMatrix> {
    if n_sites == 0 || n_sites >= usize::BITS as usize || rho.rows != 1 << n_sites || !rho.is_square() {
        return Err(Error::Shape(format!(
            "{}x{} matrix is not a state of {n_sites} sites",
            rho.rows, rho.cols
        )));
    }
    if keep_site >= n_sites {
        return Err(Error::Index { index: keep_site, n_sites });
    }
    let bit = 1usize << keep_site;
    let mut out = CMatrix::zeros(2, 2);
    for a in (0..rho.rows).filter(|a| a & bit == 0) {
        out[(0, 0)] += rho[(a, a)];
        out[(0, 1)] += rho[(a, a | bit)];
        out[(1, 0)] += rho[(a | bit, a)];
        out[(1, 1)] += rho[(a | bit, a | bit)];
    }
    Ok(out)
}

/// Tolerances a matrix must meet to be accepted as a density matrix.
pub const DENSITY_HERMITIAN_TOL: f64 = 1e-10;
pub const DENSITY_TRACE_TOL: f64 = 1e-8;
pub const DENSITY_POSITIVITY_TOL: f64 = 1e-8;

/// Hermitian, unit-trace state of an `N`-site chain.
///
/// Positivity is *not* enforced on construction: first-order adiabatic
/// states may dip slightly negative at small `T`, which callers measure with
/// [`DensityMatrix::min_eigenvalue`].
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    n_sites: usize,
    matrix: CMatrix,
}

impl DensityMatrix {
    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() || !matrix.rows.is_power_of_two() {
            return Err(Error::Shape(format!(
                "{}x{} matrix is not a chain state",
                matrix.rows, matrix.cols
            )));
        }
        let n_sites = matrix.rows.trailing_zeros() as usize;
        if !matrix.is_hermitian(DENSITY_HERMITIAN_TOL) {
            return Err(Error::Validation(format!(
                "state is not Hermitian (defect {:e})",
                matrix.hermitian_defect()
            )));
        }
        let tr = matrix.trace();
        if (tr - ONE).norm() > DENSITY_TRACE_TOL {
            return Err(Error::Validation(format!("state has trace {tr}")));
        }
        Ok(Self { n_sites, matrix })
    }

    /// `|config⟩⟨config|`.
    pub fn basis_state(n_sites: usize, config: usize) -> Self {
        let dim = 1usize << n_sites;
        assert!(config < dim);
        Self { n_sites, matrix: CMatrix::outer_basis(dim, config, config) }
    }

    pub fn maximally_mixed(n_sites: usize) -> Self {
        let dim = 1usize << n_sites;
        Self { n_sites, matrix: &CMatrix::identity(dim) * (1.0 / dim as f64) }
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn min_eigenvalue(&self) -> f64 {
        hermitian_eigenvalues(&self.matrix).map(|v| v[0]).unwrap_or(f64::NAN)
    }

    pub fn is_positive(&self) -> bool {
        self.min_eigenvalue() >= -DENSITY_POSITIVITY_TOL
    }

    pub fn is_classical(&self, tol: f64) -> bool {
        self.matrix.is_diagonal(tol)
    }

    pub fn reduced_site(&self, site: usize) -> Result<DensityMatrix> {
        let m = partial_trace(&self.matrix, site, self.n_sites)?;
        Ok(DensityMatrix { n_sites: 1, matrix: m })
    }
}
