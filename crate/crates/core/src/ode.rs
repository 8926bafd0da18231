//! Adaptive Dormand–Prince 5(4) integrator for matrix-valued ODEs
//! `dY/dt = f(t, Y)`.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::linalg::CMatrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol: f64,
    pub max_steps: usize,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-10, atol: 1e-12, max_steps: 20_000_000 }
    }
}

impl Tolerances {
    pub fn new(rtol: f64, atol: f64) -> Self {
        Self { rtol, atol, ..Self::default() }
    }
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

// Fifth-order weights minus the embedded fourth-order ones.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const SAFETY: f64 = 0.9;
const MIN_FACTOR: f64 = 0.2;
const MAX_FACTOR: f64 = 5.0;

fn combine(out: &mut CMatrix, y: &CMatrix, h: f64, terms: &[(f64, &CMatrix)]) {
    let data = out.data_mut();
    data.copy_from_slice(y.data());
    for &(coef, k) in terms {
        if coef == 0.0 {
            continue;
        }
        let c = h * coef;
        for (o, v) in data.iter_mut().zip(k.data()) {
            *o += v * c;
        }
    }
}

/// Integrates from `t0` through every time in `targets` (strictly
/// increasing, all `≥ t0`) and returns the state at each target.
///
/// `rhs(t, y, out)` must overwrite `out` with `f(t, y)`.
pub fn integrate<F>(mut rhs: F, t0: f64, y0: &CMatrix, targets: &[f64], tol: Tolerances) -> Result<Vec<CMatrix>>
where
    F: FnMut(f64, &CMatrix, &mut CMatrix),
{
    if targets.windows(2).any(|w| w[1] <= w[0]) || targets.first().is_some_and(|&t| t < t0) {
        return Err(Error::Validation("integration targets must be increasing and start after t0".into()));
    }
    let (rows, cols) = (y0.rows(), y0.cols());
    let zeros = || CMatrix::zeros(rows, cols);
    let (mut k1, mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
        (zeros(), zeros(), zeros(), zeros(), zeros(), zeros(), zeros());
    let mut stage = zeros();
    let mut y_new = zeros();

    let mut t = t0;
    let mut y = y0.clone();
    let mut out = Vec::with_capacity(targets.len());
    let mut steps = 0usize;
    let span = targets.last().map_or(0.0, |&t_end| t_end - t0);
    let mut h = initial_step(&mut rhs, t0, &y, &mut k1, span, tol);
    rhs(t, &y, &mut k1);

    for &target in targets {
        while t < target {
            if steps >= tol.max_steps {
                return Err(Error::Convergence {
                    at: t,
                    steps,
                    achieved: f64::NAN,
                    reason: "step budget exhausted".into(),
                });
            }
            let remaining = target - t;
            let last = h >= remaining;
            let h_try = if last { remaining } else { h };

            combine(&mut stage, &y, h_try, &[(A21, &k1)]);
            rhs(t + C2 * h_try, &stage, &mut k2);
            combine(&mut stage, &y, h_try, &[(A31, &k1), (A32, &k2)]);
            rhs(t + C3 * h_try, &stage, &mut k3);
            combine(&mut stage, &y, h_try, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
            rhs(t + C4 * h_try, &stage, &mut k4);
            combine(&mut stage, &y, h_try, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
            rhs(t + C5 * h_try, &stage, &mut k5);
            combine(&mut stage, &y, h_try, &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]);
            rhs(t + h_try, &stage, &mut k6);
            combine(&mut y_new, &y, h_try, &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
            rhs(t + h_try, &y_new, &mut k7);
            steps += 1;

            let mut acc = 0.0;
            for i in 0..y.data().len() {
                let err: C64 = (k1.data()[i] * E1
                    + k3.data()[i] * E3
                    + k4.data()[i] * E4
                    + k5.data()[i] * E5
                    + k6.data()[i] * E6
                    + k7.data()[i] * E7)
                    * h_try;
                let scale = tol.atol + tol.rtol * y.data()[i].norm().max(y_new.data()[i].norm());
                acc += (err.norm() / scale).powi(2);
            }
            let err_norm = (acc / y.data().len() as f64).sqrt();
            if !err_norm.is_finite() {
                return Err(Error::Convergence { at: t, steps, achieved: err_norm, reason: "non-finite state".into() });
            }

            let factor = if err_norm == 0.0 {
                MAX_FACTOR
            } else {
                (SAFETY * err_norm.powf(-0.2)).clamp(MIN_FACTOR, MAX_FACTOR)
            };
            if err_norm <= 1.0 {
                t = if last { target } else { t + h_try };
                std::mem::swap(&mut y, &mut y_new);
                std::mem::swap(&mut k1, &mut k7);
                // Keep the controller's step when the last one was clipped to land on a target.
                if !last {
                    h = h_try * factor;
                } else {
                    h = h.max(h_try * factor.min(1.0));
                }
            } else {
                h = h_try * factor.min(1.0);
                if h <= f64::EPSILON * t.abs().max(1.0) {
                    return Err(Error::Convergence { at: t, steps, achieved: err_norm, reason: "step size underflow".into() });
                }
            }
        }
        out.push(y.clone());
    }
    Ok(out)
}

fn initial_step<F>(rhs: &mut F, t0: f64, y0: &CMatrix, scratch: &mut CMatrix, span: f64, tol: Tolerances) -> f64
where
    F: FnMut(f64, &CMatrix, &mut CMatrix),
{
    rhs(t0, y0, scratch);
    let n = y0.data().len() as f64;
    let mut d0 = 0.0;
    let mut d1 = 0.0;
    for (y, f) in y0.data().iter().zip(scratch.data()) {
        let sc = tol.atol + tol.rtol * y.norm();
        d0 += (y.norm() / sc).powi(2);
        d1 += (f.norm() / sc).powi(2);
    }
    let (d0, d1) = ((d0 / n).sqrt(), (d1 / n).sqrt());
    let h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    if span > 0.0 {
        h.min(span)
    } else {
        h
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_decay_and_rotation() {
        // y' = λ y with complex λ, evaluated at several targets.
        let lambda = C64::new(-0.7, 3.0);
        let y0 = CMatrix::from_real_diag(&[1.0, 2.0]);
        let targets = [0.1, 0.5, 2.0];
        let sol = integrate(
            |_, y, out| {
                for (o, v) in out.data_mut().iter_mut().zip(y.data()) {
                    *o = lambda * v;
                }
            },
            0.0,
            &y0,
            &targets,
            Tolerances::default(),
        )
        .unwrap();
        for (t, y) in targets.iter().zip(&sol) {
            let exact = (lambda * t).exp();
            assert!((y[(0, 0)] - exact).norm() < 1e-9);
            assert!((y[(1, 1)] - exact * 2.0).norm() < 1e-9);
        }
    }

    #[test]
    fn time_dependent_rhs() {
        // y' = cos(t) y  ->  y = exp(sin t)
        let sol = integrate(
            |t, y, out| out.data_mut()[0] = y.data()[0] * t.cos(),
            0.0,
            &CMatrix::identity(1),
            &[3.0],
            Tolerances::default(),
        )
        .unwrap();
        assert!((sol[0][(0, 0)].re - 3f64.sin().exp()).abs() < 1e-9);
    }

    #[test]
    fn rejects_unordered_targets() {
        let r = integrate(|_, _, _| {}, 0.0, &CMatrix::identity(1), &[1.0, 0.5], Tolerances::default());
        assert!(matches!(r, Err(Error::Validation(_))));
    }

    #[test]
    fn reports_exhausted_budget() {
        let tol = Tolerances { max_steps: 3, ..Tolerances::default() };
        let r = integrate(
            |_, y, out| out.data_mut()[0] = y.data()[0] * C64::new(0.0, 1e4),
            0.0,
            &CMatrix::identity(1),
            &[10.0],
            tol,
        );
        assert!(matches!(r, Err(Error::Convergence { .. })));
    }
}
