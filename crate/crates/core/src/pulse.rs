//! Pulse profiles `Ω(t) = g(t/T)/T` and the running integrals
//! `ω(s) = ∫₀ˢ g` and `G₂(s) = ∫₀ˢ g²` that enter the rotating frame and the
//! adiabatic generator.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::quadrature;

/// Tolerance on `g(0) = g(1) = 0` for user-supplied shapes.
pub const BOUNDARY_TOL: f64 = 1e-8;
/// Absolute tolerance of the quadrature behind custom shapes.
pub const QUADRATURE_TOL: f64 = 1e-10;
const GRID_INTERVALS: usize = 1024;

type ShapeFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Shape {
    /// `g(s) = 2A sin²(πs)`, so that `ω(1) = A`.
    SineSquared { area: f64 },
    Custom(Arc<CustomShape>),
}

struct CustomShape {
    name: String,
    g: ShapeFn,
    // Cumulative integrals at s = i / GRID_INTERVALS.
    omega_grid: Vec<f64>,
    g2_grid: Vec<f64>,
}

impl CustomShape {
    fn new(name: String, g: ShapeFn) -> Self {
        let mut omega_grid = Vec::with_capacity(GRID_INTERVALS + 1);
        let mut g2_grid = Vec::with_capacity(GRID_INTERVALS + 1);
        let (mut omega, mut g2) = (0.0, 0.0);
        omega_grid.push(0.0);
        g2_grid.push(0.0);
        let tol = QUADRATURE_TOL / GRID_INTERVALS as f64;
        for i in 0..GRID_INTERVALS {
            let a = i as f64 / GRID_INTERVALS as f64;
            let b = (i + 1) as f64 / GRID_INTERVALS as f64;
            omega += quadrature::integrate(|s| g(s), a, b, tol);
            g2 += quadrature::integrate(|s| g(s).powi(2), a, b, tol);
            omega_grid.push(omega);
            g2_grid.push(g2);
        }
        Self { name, g, omega_grid, g2_grid }
    }

    /// Cached node below `s` plus quadrature over the remainder; the result
    /// is nondecreasing wherever the integrand is nonnegative.
    fn running(&self, grid: &[f64], s: f64, f: impl Fn(f64) -> f64) -> f64 {
        let s = s.clamp(0.0, 1.0);
        let i = ((s * GRID_INTERVALS as f64).floor() as usize).min(GRID_INTERVALS);
        let node = i as f64 / GRID_INTERVALS as f64;
        grid[i] + quadrature::integrate(f, node, s, QUADRATURE_TOL / GRID_INTERVALS as f64)
    }
}

/// The shape `g` of a single pulse together with its duration `T`.
#[derive(Clone)]
pub struct PulseProfile {
    shape: Shape,
    duration: f64,
}

impl fmt::Debug for PulseProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PulseProfile").field("shape", &self.shape_name()).field("duration", &self.duration).finish()
    }
}

fn check_duration(duration: f64) -> Result<()> {
    if duration > 0.0 && duration.is_finite() {
        Ok(())
    } else {
        Err(Error::Validation(format!("pulse duration must be positive, got {duration}")))
    }
}

impl PulseProfile {
    /// `g(s) = 4π sin²(πs)`, pulse area 2π.
    pub fn default_shape(duration: f64) -> Result<Self> {
        Self::sine_squared(2.0 * PI, duration)
    }

    /// `g(s) = 2A sin²(πs)` with pulse area `ω(1) = A`.
    pub fn sine_squared(area: f64, duration: f64) -> Result<Self> {
        check_duration(duration)?;
        if !area.is_finite() {
            return Err(Error::Validation(format!("pulse area must be finite, got {area}")));
        }
        let pulse = Self { shape: Shape::SineSquared { area }, duration };
        pulse.verify_closed_forms()?;
        Ok(pulse)
    }

    /// Arbitrary shape on `[0, 1]`; integrals are computed by quadrature.
    pub fn custom(
        name: impl Into<String>,
        g: impl Fn(f64) -> f64 + Send + Sync + 'static,
        duration: f64,
    ) -> Result<Self> {
        check_duration(duration)?;
        let (g0, g1) = (g(0.0), g(1.0));
        if !(g0.abs() <= BOUNDARY_TOL && g1.abs() <= BOUNDARY_TOL) {
            return Err(Error::Validation(format!("pulse must vanish at both ends, got g(0) = {g0}, g(1) = {g1}")));
        }
        let shape = CustomShape::new(name.into(), Arc::new(g));
        Ok(Self { shape: Shape::Custom(Arc::new(shape)), duration })
    }

    /// Piecewise-linear shape through equally spaced samples of `g` on
    /// `[0, 1]` (first and last sample at the pulse edges).
    pub fn from_samples(samples: Vec<f64>, duration: f64) -> Result<Self> {
        if samples.len() < 2 || samples.iter().any(|v| !v.is_finite()) {
            return Err(Error::Validation("need at least two finite samples".into()));
        }
        let intervals = (samples.len() - 1) as f64;
        Self::custom(
            "samples",
            move |s| {
                let x = s.clamp(0.0, 1.0) * intervals;
                let i = (x.floor() as usize).min(samples.len() - 2);
                let t = x - i as f64;
                samples[i] * (1.0 - t) + samples[i + 1] * t
            },
            duration,
        )
    }

    /// Triangle rising linearly to `peak` at `s = 1/2`.
    pub fn triangular(peak: f64, duration: f64) -> Result<Self> {
        Self::from_samples(vec![0.0, peak, 0.0], duration)
    }

    pub fn duration(&self) -> f64 {
        self.duration
    }

    /// Same shape, different duration.
    pub fn with_duration(&self, duration: f64) -> Result<Self> {
        check_duration(duration)?;
        Ok(Self { shape: self.shape.clone(), duration })
    }

    pub fn shape_name(&self) -> String {
        match &self.shape {
            Shape::SineSquared { area } => format!("sine_squared(area={area})"),
            Shape::Custom(c) => c.name.clone(),
        }
    }

    pub fn g(&self, s: f64) -> f64 {
        match &self.shape {
            Shape::SineSquared { area } => 2.0 * area * (PI * s).sin().powi(2),
            Shape::Custom(c) => (c.g)(s),
        }
    }

    /// `ω(s) = ∫₀ˢ g`.
    pub fn omega(&self, s: f64) -> f64 {
        match &self.shape {
            Shape::SineSquared { area } => area * (s - (2.0 * PI * s).sin() / (2.0 * PI)),
            Shape::Custom(c) => c.running(&c.omega_grid, s, |x| (c.g)(x)),
        }
    }

    /// `G₂(s) = ∫₀ˢ g²`.
    pub fn g2_integral(&self, s: f64) -> f64 {
        match &self.shape {
            Shape::SineSquared { area } => {
                4.0 * area * area
                    * (3.0 * s / 8.0 - (2.0 * PI * s).sin() / (4.0 * PI) + (4.0 * PI * s).sin() / (32.0 * PI))
            }
            Shape::Custom(c) => c.running(&c.g2_grid, s, |x| (c.g)(x).powi(2)),
        }
    }

    /// Lab-frame transverse field `Ω(t) = g(t/T)/T`.
    pub fn field_at(&self, t: f64) -> f64 {
        self.g(t / self.duration) / self.duration
    }

    fn verify_closed_forms(&self) -> Result<()> {
        for i in 1..=8 {
            let s = i as f64 / 8.0;
            let omega = quadrature::integrate(|x| self.g(x), 0.0, s, 1e-12);
            let g2 = quadrature::integrate(|x| self.g(x).powi(2), 0.0, s, 1e-12);
            let scale = 1.0 + self.g2_integral(1.0).abs();
            if (omega - self.omega(s)).abs() > 1e-10 * scale || (g2 - self.g2_integral(s)).abs() > 1e-10 * scale {
                return Err(Error::Domain(format!("closed-form pulse integrals disagree with quadrature at s = {s}")));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_shape_values() {
        let p = PulseProfile::default_shape(400.0).unwrap();
        assert!((p.omega(1.0) - 2.0 * PI).abs() < 1e-14);
        assert!((p.omega(0.5) - PI).abs() < 1e-14);
        assert!((p.g(0.5) - 4.0 * PI).abs() < 1e-14);
        assert!((p.g2_integral(1.0) - 6.0 * PI * PI).abs() < 1e-12);
        assert!(p.g(0.0).abs() < 1e-12 && p.g(1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_nonpositive_duration() {
        assert!(PulseProfile::default_shape(0.0).is_err());
        assert!(PulseProfile::default_shape(-3.0).is_err());
    }

    #[test]
    fn custom_boundary_condition() {
        assert!(PulseProfile::custom("bad", |s| 1.0 + s, 10.0).is_err());
    }

    #[test]
    fn zero_shape() {
        let p = PulseProfile::custom("zero", |_| 0.0, 10.0).unwrap();
        for s in [0.0, 0.3, 1.0] {
            assert_eq!(p.omega(s), 0.0);
            assert_eq!(p.g2_integral(s), 0.0);
        }
    }

    #[test]
    fn custom_sine_matches_closed_form() {
        let closed = PulseProfile::default_shape(50.0).unwrap();
        let custom = PulseProfile::custom("sin2", |s| 4.0 * PI * (PI * s).sin().powi(2), 50.0).unwrap();
        for i in 0..=1000 {
            let s = i as f64 / 1000.0;
            assert!((closed.omega(s) - custom.omega(s)).abs() < 1e-9, "omega at {s}");
            assert!((closed.g2_integral(s) - custom.g2_integral(s)).abs() < 1e-9, "G2 at {s}");
        }
    }

    #[test]
    fn triangle_area() {
        let p = PulseProfile::triangular(3.0, 1.0).unwrap();
        assert!((p.omega(1.0) - 1.5).abs() < 1e-10);
        // ∫ g² of a triangle with peak h over unit base is h²/3.
        assert!((p.g2_integral(1.0) - 3.0).abs() < 1e-10);
    }

    #[test]
    fn running_integrals_are_consistent() {
        let p = PulseProfile::custom("bump", |s| 5.0 * (s * (1.0 - s)).powf(1.5), 7.0).unwrap();
        let pairs = [(0.013, 0.71), (0.2, 0.2005), (0.5, 0.99), (0.0, 1.0)];
        for (a, b) in pairs {
            let direct = quadrature::integrate(|x| p.g(x), a, b, 1e-13);
            assert!((p.omega(b) - p.omega(a) - direct).abs() < 1e-9);
        }
        let mut last = 0.0;
        for i in 0..=2000 {
            let v = p.g2_integral(i as f64 / 2000.0);
            assert!(v >= last && v >= 0.0);
            last = v;
        }
    }

    #[test]
    fn area_is_independent_of_duration() {
        for duration in [10.0, 1e3, 1e4] {
            let p = PulseProfile::default_shape(duration).unwrap();
            let area = quadrature::integrate(|t| p.field_at(t), 0.0, duration, 1e-12);
            assert!((area - p.omega(1.0)).abs() < 1e-10);
        }
    }
}
