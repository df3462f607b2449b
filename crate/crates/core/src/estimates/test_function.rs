use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{vec2, Vec2};
use crate::quadrature::integrate_1d;

/// Radial profile of a test function.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "profile", rename_all = "snake_case")]
pub enum Profile {
    /// `(1 - s^2)^4` with `s = |x - c| / r`.
    Bump,
    /// `(1 - s)_+`; Lipschitz only.
    Cone,
    /// One on `|x - c| <= inner`, then a bump-shaped decay to zero at `r`.
    Plateau { inner: f64 },
}

/// Nonnegative compactly supported `phi(x, t) = m(t) psi(|x - c - w t|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarTestFunction {
    #[serde(flatten)]
    pub profile: Profile,
    pub center: [f64; 2],
    pub radius: f64,
    /// Velocity `w` of the centre.
    #[serde(default)]
    pub velocity: [f64; 2],
    /// Angular frequency of `m(t) = 1 + sin(omega t) / 2`; `m = 1` when absent.
    #[serde(default)]
    pub modulation: Option<f64>,
}

impl ScalarTestFunction {
    pub fn bump(center: Vec2, radius: f64) -> Self {
        ScalarTestFunction {
            profile: Profile::Bump,
            center: [center.x, center.y],
            radius,
            velocity: [0.0; 2],
            modulation: None,
        }
    }

    pub fn cone(center: Vec2, radius: f64) -> Self {
        ScalarTestFunction { profile: Profile::Cone, ..Self::bump(center, radius) }
    }

    pub fn plateau(center: Vec2, inner: f64, radius: f64) -> Self {
        ScalarTestFunction { profile: Profile::Plateau { inner }, ..Self::bump(center, radius) }
    }

    pub fn moving(mut self, velocity: Vec2) -> Self {
        self.velocity = [velocity.x, velocity.y];
        self
    }

    pub fn modulated(mut self, omega: f64) -> Self {
        self.modulation = Some(omega);
        self
    }

    pub fn check(&self) -> Result<()> {
        let finite = self.center.iter().chain(&self.velocity).all(|v| v.is_finite());
        if !(self.radius > 0.0 && self.radius.is_finite()) || !finite {
            return Err(Error::InvalidArgument("test function needs a finite positive radius".into()));
        }
        if let Profile::Plateau { inner } = self.profile {
            if !(inner >= 0.0 && inner < self.radius) {
                return Err(Error::InvalidArgument(format!("plateau radius {inner} must lie in [0, {})", self.radius)));
            }
        }
        if self.modulation.is_some_and(|w| !w.is_finite()) {
            return Err(Error::InvalidArgument("modulation frequency must be finite".into()));
        }
        Ok(())
    }

    /// Small fixed family covering a region of half-width `scale` around `center`.
    pub fn catalog(center: Vec2, scale: f64) -> Vec<(String, ScalarTestFunction)> {
        let r = scale.max(1e-9);
        vec![
            ("bump".into(), Self::bump(center, 1.5 * r)),
            ("cone".into(), Self::cone(center, 1.5 * r)),
            ("offset_bump".into(), Self::bump(center + vec2(0.5 * r, 0.3 * r), r)),
            ("plateau".into(), Self::plateau(center, 1.2 * r, 2.0 * r)),
            ("pulsing_bump".into(), Self::bump(center, 1.5 * r).modulated(2.0 * PI)),
        ]
    }

    pub fn center_at(&self, t: f64) -> Vec2 {
        vec2(self.center[0] + self.velocity[0] * t, self.center[1] + self.velocity[1] * t)
    }

    fn velocity(&self) -> Vec2 {
        vec2(self.velocity[0], self.velocity[1])
    }

    pub fn support_radius(&self) -> f64 {
        self.radius
    }

    fn modulation(&self, t: f64) -> (f64, f64) {
        match self.modulation {
            Some(w) => (1.0 + 0.5 * (w * t).sin(), 0.5 * w * (w * t).cos()),
            None => (1.0, 0.0),
        }
    }

    fn inner(&self) -> f64 {
        match self.profile {
            Profile::Plateau { inner } => inner,
            _ => 0.0,
        }
    }

    /// `(psi(rho), psi'(rho))`.
    pub fn profile_at(&self, rho: f64) -> (f64, f64) {
        let r = self.radius;
        if rho >= r {
            return (0.0, 0.0);
        }
        match self.profile {
            Profile::Cone => (1.0 - rho / r, -1.0 / r),
            _ => {
                let a = self.inner();
                if rho <= a {
                    return (1.0, 0.0);
                }
                let w = r - a;
                let q = (rho - a) / w;
                let b = 1.0 - q * q;
                (b.powi(4), -8.0 * q * b.powi(3) / w)
            }
        }
    }

    /// `int_0^rho s psi(s) ds`; constant beyond the support.
    pub fn flux_primitive(&self, rho: f64) -> f64 {
        let r = self.radius;
        let p = rho.min(r);
        match self.profile {
            Profile::Cone => p * p / 2.0 - p.powi(3) / (3.0 * r),
            _ => {
                let a = self.inner();
                if p <= a {
                    p * p / 2.0
                } else {
                    a * a / 2.0 + integrate_1d(|s| s * self.profile_at(s).0, a, p, 6, 1)
                }
            }
        }
    }

    /// `int psi dx` over the plane.
    pub fn plane_integral(&self) -> f64 {
        2.0 * PI * self.flux_primitive(self.radius)
    }

    pub fn value(&self, x: &Vec2, t: f64) -> f64 {
        let (m, _) = self.modulation(t);
        m * self.profile_at((x - self.center_at(t)).norm()).0
    }

    pub fn gradient(&self, x: &Vec2, t: f64) -> Vec2 {
        let (m, _) = self.modulation(t);
        self.psi_gradient(x, t) * m
    }

    fn psi_gradient(&self, x: &Vec2, t: f64) -> Vec2 {
        let y = x - self.center_at(t);
        let rho = y.norm();
        if rho == 0.0 {
            return Vec2::zeros();
        }
        y * (self.profile_at(rho).1 / rho)
    }

    pub fn time_derivative(&self, x: &Vec2, t: f64) -> f64 {
        let (m, dm) = self.modulation(t);
        let psi = self.profile_at((x - self.center_at(t)).norm()).0;
        dm * psi - m * self.psi_gradient(x, t).dot(&self.velocity())
    }

    /// Upper bound on the spatial Hessian norm; infinite for the cone.
    pub fn hessian_bound(&self) -> f64 {
        let m = if self.modulation.is_some() { 1.5 } else { 1.0 };
        match self.profile {
            Profile::Cone => f64::INFINITY,
            _ => {
                let w = self.radius - self.inner();
                8.0 * m / (w * w)
            }
        }
    }

    /// Vector field `F` with `div F = psi(|x - c|)` away from infinity:
    /// `F(x) = (x - c) Psi(rho) / rho^2`.
    pub fn flux_field(&self, x: &Vec2, t: f64) -> Vec2 {
        let y = x - self.center_at(t);
        let rho2 = y.norm_squared();
        if rho2 == 0.0 {
            return Vec2::zeros();
        }
        y * (self.flux_primitive(rho2.sqrt()) / rho2)
    }

    pub fn modulation_at(&self, t: f64) -> (f64, f64) {
        self.modulation(t)
    }

    pub(crate) fn center_velocity(&self) -> Vec2 {
        self.velocity()
    }
}
