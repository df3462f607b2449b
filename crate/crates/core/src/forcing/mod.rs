//! Forcing fields `u(x, t)`: an analytic catalog, sampled grids, and
//! transformations (rotation, translation, scaling, parabolic rescaling,
//! space-time mollification).

mod budget;
mod grid;
mod mollify;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{cutoff, radial_cutoff, rotation, vec2, BBox, Mat2, Vec2};

pub use budget::{sobolev_budget, spatial_integrals, w12_distance, SobolevBudget};
pub use grid::{GridField, GridLattice};
pub use mollify::{mollify, spatial_kernel, temporal_kernel, MollifierParams};

fn v2(a: &[f64; 2]) -> Vec2 {
    vec2(a[0], a[1])
}

/// A forcing field. Catalog entries are constant in time on `[0, horizon]`
/// and vanish outside it (`horizon = None` means forever).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ForcingField {
    Zero,
    /// `value * eta(|x - center| / radius)`.
    ConstantPatch {
        value: [f64; 2],
        center: [f64; 2],
        radius: f64,
        #[serde(default)]
        horizon: Option<f64>,
    },
    /// Divergence-free swirl with stream function
    /// `-A s exp(-r^2 / 2 s^2) eta(r / 4 s)`, `s` the width.
    GaussianSwirl {
        amplitude: f64,
        width: f64,
        #[serde(default)]
        center: [f64; 2],
        #[serde(default)]
        horizon: Option<f64>,
    },
    /// `(A (y - cy) / R, 0) * eta(|x - c| / R)`.
    ShearPatch {
        amplitude: f64,
        center: [f64; 2],
        radius: f64,
        #[serde(default)]
        horizon: Option<f64>,
    },
    Grid(GridField),
    /// `R u(R^T x, t)`.
    Rotated {
        angle: f64,
        inner: Box<ForcingField>,
    },
    /// `u(x - shift, t)`.
    Translated {
        shift: [f64; 2],
        inner: Box<ForcingField>,
    },
    /// `factor * u`.
    Scaled {
        factor: f64,
        inner: Box<ForcingField>,
    },
    /// Parabolic rescaling `lambda u(lambda x, lambda^2 t)`.
    Rescaled {
        lambda: f64,
        inner: Box<ForcingField>,
    },
    /// Space-time mollification at scale `1/m` with cutoff `eta(|x| / m)`.
    Mollified {
        m: u32,
        inner: Box<ForcingField>,
    },
}

fn active(t: f64, horizon: &Option<f64>) -> bool {
    t >= 0.0 && horizon.is_none_or(|h| t <= h)
}

impl ForcingField {
    pub fn gaussian_swirl(amplitude: f64, width: f64) -> Self {
        ForcingField::GaussianSwirl { amplitude, width, center: [0.0, 0.0], horizon: None }
    }

    pub fn constant_patch(value: Vec2, center: Vec2, radius: f64) -> Self {
        ForcingField::ConstantPatch { value: [value.x, value.y], center: [center.x, center.y], radius, horizon: None }
    }

    pub fn shear_patch(amplitude: f64, center: Vec2, radius: f64) -> Self {
        ForcingField::ShearPatch { amplitude, center: [center.x, center.y], radius, horizon: None }
    }

    pub fn scaled(self, factor: f64) -> Self {
        ForcingField::Scaled { factor, inner: Box::new(self) }
    }

    pub fn rotated(self, angle: f64) -> Self {
        ForcingField::Rotated { angle, inner: Box::new(self) }
    }

    pub fn translated(self, shift: Vec2) -> Self {
        ForcingField::Translated { shift: [shift.x, shift.y], inner: Box::new(self) }
    }

    pub fn rescaled(self, lambda: f64) -> Self {
        ForcingField::Rescaled { lambda, inner: Box::new(self) }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let f: ForcingField = serde_json::from_str(text)?;
        f.check()?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("field serializes")
    }

    /// Parameter sanity checks.
    pub fn check(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        match self {
            ForcingField::Zero => Ok(()),
            ForcingField::ConstantPatch { radius, .. } | ForcingField::ShearPatch { radius, .. } => {
                if *radius > 0.0 {
                    Ok(())
                } else {
                    bad("patch radius must be positive")
                }
            }
            ForcingField::GaussianSwirl { width, .. } => {
                if *width > 0.0 {
                    Ok(())
                } else {
                    bad("swirl width must be positive")
                }
            }
            ForcingField::Grid(g) => g.check(),
            ForcingField::Rotated { inner, .. }
            | ForcingField::Translated { inner, .. }
            | ForcingField::Scaled { inner, .. } => inner.check(),
            ForcingField::Rescaled { lambda, inner } => {
                if *lambda > 0.0 {
                    inner.check()
                } else {
                    bad("rescaling factor must be positive")
                }
            }
            ForcingField::Mollified { m, inner } => {
                if *m >= 1 {
                    inner.check()
                } else {
                    bad("mollification index must be at least 1")
                }
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            ForcingField::Zero => true,
            ForcingField::Scaled { factor, inner } => *factor == 0.0 || inner.is_zero(),
            ForcingField::Rotated { inner, .. }
            | ForcingField::Translated { inner, .. }
            | ForcingField::Rescaled { inner, .. }
            | ForcingField::Mollified { inner, .. } => inner.is_zero(),
            _ => false,
        }
    }

    pub fn value(&self, x: &Vec2, t: f64) -> Vec2 {
        self.sample(x, t).0
    }

    /// `G[(i, j)] = d u_i / d x_j`.
    pub fn gradient(&self, x: &Vec2, t: f64) -> Mat2 {
        self.sample(x, t).1
    }

    /// Value and spatial gradient.
    pub fn sample(&self, x: &Vec2, t: f64) -> (Vec2, Mat2) {
        let zero = (Vec2::zeros(), Mat2::zeros());
        match self {
            ForcingField::Zero => zero,
            ForcingField::ConstantPatch { value, center, radius, horizon } => {
                if !active(t, horizon) {
                    return zero;
                }
                let v = v2(value);
                let (eta, deta) = radial_cutoff(x, &v2(center), *radius);
                (v * eta, v * deta.transpose())
            }
            ForcingField::ShearPatch { amplitude, center, radius, horizon } => {
                if !active(t, horizon) {
                    return zero;
                }
                let c = v2(center);
                let (eta, deta) = radial_cutoff(x, &c, *radius);
                let k = amplitude / radius;
                let base = vec2(k * (x.y - c.y), 0.0);
                let gbase = Mat2::new(0.0, k, 0.0, 0.0);
                (base * eta, gbase * eta + base * deta.transpose())
            }
            ForcingField::GaussianSwirl { amplitude, width, center, horizon } => {
                if !active(t, horizon) {
                    return zero;
                }
                swirl(x - v2(center), *amplitude, *width)
            }
            ForcingField::Grid(g) => g.sample(x, t),
            ForcingField::Rotated { angle, inner } => {
                let r = rotation(*angle);
                let (v, g) = inner.sample(&(r.transpose() * x), t);
                (r * v, r * g * r.transpose())
            }
            ForcingField::Translated { shift, inner } => inner.sample(&(x - v2(shift)), t),
            ForcingField::Scaled { factor, inner } => {
                let (v, g) = inner.sample(x, t);
                (v * *factor, g * *factor)
            }
            ForcingField::Rescaled { lambda, inner } => {
                let l = *lambda;
                let (v, g) = inner.sample(&(x * l), l * l * t);
                (v * l, g * (l * l))
            }
            ForcingField::Mollified { m, inner } => mollify::sample(*m, inner, x, t),
        }
    }

    /// A disk containing the spatial support, or `None` for the zero field.
    pub fn support(&self) -> Option<(Vec2, f64)> {
        match self {
            ForcingField::Zero => None,
            ForcingField::ConstantPatch { center, radius, .. } | ForcingField::ShearPatch { center, radius, .. } => {
                Some((v2(center), 2.0 * radius))
            }
            ForcingField::GaussianSwirl { center, width, .. } => Some((v2(center), 8.0 * width)),
            ForcingField::Grid(g) => {
                let b = g.lattice.bbox();
                Some((0.5 * (b.min + b.max), 0.5 * (b.max - b.min).norm()))
            }
            ForcingField::Rotated { angle, inner } => inner.support().map(|(c, r)| (rotation(*angle) * c, r)),
            ForcingField::Translated { shift, inner } => inner.support().map(|(c, r)| (c + v2(shift), r)),
            ForcingField::Scaled { factor, inner } => {
                if *factor == 0.0 {
                    None
                } else {
                    inner.support()
                }
            }
            ForcingField::Rescaled { lambda, inner } => inner.support().map(|(c, r)| (c / *lambda, r / *lambda)),
            ForcingField::Mollified { m, inner } => inner.support().map(|(c, r)| {
                let grown = (c, r + 1.0 / *m as f64);
                let cut = (Vec2::zeros(), 2.0 * *m as f64);
                if grown.0.norm() + grown.1 <= cut.1 {
                    grown
                } else {
                    cut
                }
            }),
        }
    }

    /// Radius of a disk about the origin outside which the field vanishes.
    pub fn support_radius(&self) -> f64 {
        self.support().map_or(0.0, |(c, r)| c.norm() + r)
    }

    /// Time after which the field vanishes.
    pub fn horizon(&self) -> Option<f64> {
        match self {
            ForcingField::Zero => None,
            ForcingField::ConstantPatch { horizon, .. }
            | ForcingField::ShearPatch { horizon, .. }
            | ForcingField::GaussianSwirl { horizon, .. } => *horizon,
            ForcingField::Grid(g) => g.lattice.horizon(),
            ForcingField::Rotated { inner, .. }
            | ForcingField::Translated { inner, .. }
            | ForcingField::Scaled { inner, .. } => inner.horizon(),
            ForcingField::Rescaled { lambda, inner } => inner.horizon().map(|h| h / (lambda * lambda)),
            ForcingField::Mollified { m, inner } => {
                let d = 1.0 / *m as f64;
                let h = inner.horizon().map_or(*m as f64, |h| h.min(*m as f64));
                Some(h + d)
            }
        }
    }

    /// Times at which the field may fail to be smooth in `t`.
    pub fn time_breakpoints(&self) -> Vec<f64> {
        match self {
            ForcingField::Zero => vec![],
            ForcingField::ConstantPatch { horizon, .. }
            | ForcingField::ShearPatch { horizon, .. }
            | ForcingField::GaussianSwirl { horizon, .. } => std::iter::once(0.0).chain(*horizon).collect(),
            ForcingField::Grid(g) => g.lattice.time_nodes(),
            ForcingField::Rotated { inner, .. }
            | ForcingField::Translated { inner, .. }
            | ForcingField::Scaled { inner, .. } => inner.time_breakpoints(),
            ForcingField::Rescaled { lambda, inner } => {
                inner.time_breakpoints().into_iter().map(|b| b / (lambda * lambda)).collect()
            }
            ForcingField::Mollified { m, inner } => {
                let d = 1.0 / *m as f64;
                let mut out = Vec::new();
                for b in inner.time_breakpoints().into_iter().chain([0.0, *m as f64]) {
                    out.extend([b - d, b, b + d]);
                }
                out
            }
        }
    }

    /// Smallest length scale on which the field varies.
    pub fn feature_width(&self) -> f64 {
        match self {
            ForcingField::Zero => f64::INFINITY,
            ForcingField::ConstantPatch { radius, .. } | ForcingField::ShearPatch { radius, .. } => *radius,
            ForcingField::GaussianSwirl { width, .. } => *width,
            ForcingField::Grid(g) => 8.0 * g.lattice.dx.min(g.lattice.dy),
            ForcingField::Rotated { inner, .. }
            | ForcingField::Translated { inner, .. }
            | ForcingField::Scaled { inner, .. } => inner.feature_width(),
            ForcingField::Rescaled { lambda, inner } => inner.feature_width() / lambda,
            ForcingField::Mollified { m, inner } => inner.feature_width().min(1.0 / *m as f64),
        }
    }

    /// Largest `|u|` over a regular `n x n x nt` sample of a space-time box.
    pub fn sup_norm_sampled(&self, bbox: &BBox, t0: f64, t1: f64, n: usize, nt: usize) -> f64 {
        if self.is_zero() || bbox.is_empty() {
            return 0.0;
        }
        let mut best = 0.0f64;
        for k in 0..nt.max(1) {
            let t = if nt <= 1 { t0 } else { t0 + (t1 - t0) * k as f64 / (nt - 1) as f64 };
            for i in 0..=n {
                for j in 0..=n {
                    let x = bbox.min.x + (bbox.max.x - bbox.min.x) * i as f64 / n as f64;
                    let y = bbox.min.y + (bbox.max.y - bbox.min.y) * j as f64 / n as f64;
                    best = best.max(self.value(&vec2(x, y), t).norm());
                }
            }
        }
        best
    }

    /// Samples the field and its gradient on a lattice.
    pub fn to_grid(&self, lattice: GridLattice) -> Result<GridField> {
        GridField::sample_from(self, lattice)
    }
}

/// Velocity `w(r) (-y, x)` of the truncated Gaussian swirl and its gradient.
fn swirl(d: Vec2, a: f64, s: f64) -> (Vec2, Mat2) {
    let r2 = d.norm_squared();
    let r = r2.sqrt();
    if r >= 8.0 * s {
        return (Vec2::zeros(), Mat2::zeros());
    }
    let e = (-r2 / (2.0 * s * s)).exp();
    let (w, wr) = if r <= 4.0 * s {
        // Cutoff is identically one: closed form without the 1/r singularity.
        (a / s * e, -a / (s * s * s) * e)
    } else {
        // psi = -A s e, psi' = (A r / s) e, psi'' = (A / s)(1 - r^2 / s^2) e.
        let (p0, p1, p2) = (-a * s * e, a * r / s * e, a / s * (1.0 - r2 / (s * s)) * e);
        let q = 1.0 / (4.0 * s);
        let (c0, c1, c2) = cutoff(r * q);
        let d1 = p1 * c0 + p0 * c1 * q;
        let d2 = p2 * c0 + 2.0 * p1 * c1 * q + p0 * c2 * q * q;
        let w = d1 / r;
        (w, (d2 - w) / r2)
    };
    let (x, y) = (d.x, d.y);
    let u = vec2(-y * w, x * w);
    let g = Mat2::new(-x * y * wr, -w - y * y * wr, w + x * x * wr, x * y * wr);
    (u, g)
}

/// Normal part `u - (u . tau) tau` of `u` relative to a unit tangent.
pub fn perp_project(u: &Vec2, tau: &Vec2) -> Result<Vec2> {
    if (tau.norm() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidArgument(format!("tangent has norm {}", tau.norm())));
    }
    Ok(u - tau * u.dot(tau))
}
