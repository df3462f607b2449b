use std::f64::consts::PI;
use std::sync::LazyLock;

use super::ForcingField;
use crate::error::{Error, Result};
use crate::geom::{radial_cutoff, vec2, Mat2, Vec2};
use crate::quadrature::{gauss_legendre, panel_nodes};

const RADIAL_ORDER: usize = 8;
const ANGLES: usize = 16;
const TIME_ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierParams {
    pub m: u32,
}

/// `zeta_delta(y) = (5 / pi) (1 - |y|^2 / delta^2)^4 / delta^2` on the disk.
pub fn spatial_kernel(y: &Vec2, delta: f64) -> f64 {
    let s2 = y.norm_squared() / (delta * delta);
    if s2 >= 1.0 {
        0.0
    } else {
        5.0 / PI * (1.0 - s2).powi(4) / (delta * delta)
    }
}

/// `rho_delta(s) = (315 / 256) (1 - s^2 / delta^2)^4 / delta` on `(-delta, delta)`.
pub fn temporal_kernel(s: f64, delta: f64) -> f64 {
    let q = s / delta;
    if q.abs() >= 1.0 {
        0.0
    } else {
        315.0 / 256.0 * (1.0 - q * q).powi(4) / delta
    }
}

/// Unit-disk polar rule: offsets and weights including the area element.
static DISK_RULE: LazyLock<Vec<(Vec2, f64)>> = LazyLock::new(|| {
    let (xs, ws) = gauss_legendre(RADIAL_ORDER);
    let mut out = Vec::with_capacity(RADIAL_ORDER * ANGLES);
    for (x, w) in xs.iter().zip(ws) {
        let r = 0.5 * (x + 1.0);
        for k in 0..ANGLES {
            let a = 2.0 * PI * (k as f64 + 0.5) / ANGLES as f64;
            out.push((vec2(r * a.cos(), r * a.sin()), 0.5 * w * r * 2.0 * PI / ANGLES as f64));
        }
    }
    out
});

/// Lazily evaluated `u^(m) = eta(|x| / m) (zeta * rho * u~)`, with `u~` equal
/// to `u` for `t` in `[0, m]` and zero otherwise.
pub fn mollify(u: &ForcingField, params: &MollifierParams) -> Result<ForcingField> {
    if params.m == 0 {
        return Err(Error::InvalidArgument("mollification index m must be at least 1".into()));
    }
    if u.is_zero() {
        return Ok(ForcingField::Zero);
    }
    Ok(ForcingField::Mollified { m: params.m, inner: Box::new(u.clone()) })
}

pub(super) fn sample(m: u32, inner: &ForcingField, x: &Vec2, t: f64) -> (Vec2, Mat2) {
    let zero = (Vec2::zeros(), Mat2::zeros());
    let mf = m as f64;
    let (eta, deta) = radial_cutoff(x, &Vec2::zeros(), mf);
    if eta == 0.0 {
        return zero;
    }
    let d = 1.0 / mf;
    let breaks: Vec<f64> = inner.time_breakpoints().into_iter().chain([0.0, mf]).map(|b| t - b).collect();
    let mut v = Vec2::zeros();
    let mut g = Mat2::zeros();
    for (s, ws) in panel_nodes(-d, d, &breaks, TIME_ORDER, 1) {
        let tt = t - s;
        if !(0.0..=mf).contains(&tt) {
            continue;
        }
        let wt = ws * temporal_kernel(s, d);
        for (off, w) in DISK_RULE.iter() {
            let y = off * d;
            let k = wt * w * d * d * spatial_kernel(&y, d);
            let (uv, ug) = inner.sample(&(x - y), tt);
            v += uv * k;
            g += ug * k;
        }
    }
    (v * eta, g * eta + v * deta.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernels_have_unit_mass() {
        let d = 0.125;
        let s: f64 = DISK_RULE.iter().map(|(o, w)| w * d * d * spatial_kernel(&(o * d), d)).sum();
        assert!((s - 1.0).abs() < 1e-10, "{s}");
        let t: f64 = panel_nodes(-d, d, &[], TIME_ORDER, 1).iter().map(|(x, w)| w * temporal_kernel(*x, d)).sum();
        assert!((t - 1.0).abs() < 1e-10, "{t}");
        assert!(DISK_RULE.iter().all(|(o, _)| spatial_kernel(o, 1.0) >= 0.0));
    }

    #[test]
    fn zero_maps_to_zero_and_m_zero_rejected() {
        let p = MollifierParams { m: 4 };
        assert_eq!(mollify(&ForcingField::Zero, &p).unwrap(), ForcingField::Zero);
        assert!(mollify(&ForcingField::gaussian_swirl(1.0, 0.2), &MollifierParams { m: 0 }).is_err());
    }

    #[test]
    fn converges_uniformly_with_decreasing_error() {
        let u = ForcingField::gaussian_swirl(1.0, 0.3);
        let pts: Vec<Vec2> = (0..25).map(|k| vec2(-0.6 + 0.05 * k as f64, 0.1 + 0.02 * k as f64)).collect();
        let mut prev = f64::INFINITY;
        for m in [4, 8, 16, 32] {
            let um = mollify(&u, &MollifierParams { m }).unwrap();
            let err = pts.iter().map(|p| (um.value(p, 1.0) - u.value(p, 1.0)).norm()).fold(0.0, f64::max);
            assert!(err < prev, "m = {m}: {err} vs {prev}");
            prev = err;
        }
        assert!(prev < 1e-3);
    }

    #[test]
    fn commutes_with_translation_when_cutoff_is_one() {
        let u = ForcingField::gaussian_swirl(1.0, 0.2);
        let shift = vec2(0.3, -0.2);
        let p = MollifierParams { m: 8 };
        let a = mollify(&u.clone().translated(shift), &p).unwrap();
        let b = mollify(&u, &p).unwrap().translated(shift);
        for x in [vec2(0.2, 0.1), vec2(0.5, -0.4), vec2(-0.1, 0.0)] {
            assert!((a.value(&x, 0.7) - b.value(&x, 0.7)).norm() < 1e-13);
        }
    }

    #[test]
    fn gradient_matches_differences() {
        let u = mollify(&ForcingField::shear_patch(0.9, vec2(0.1, 0.0), 0.4), &MollifierParams { m: 4 }).unwrap();
        let x = vec2(0.35, 0.2);
        let h = 1e-6;
        let g = u.gradient(&x, 0.5);
        for j in 0..2 {
            let mut e = Vec2::zeros();
            e[j] = h;
            let fd = (u.value(&(x + e), 0.5) - u.value(&(x - e), 0.5)) / (2.0 * h);
            for i in 0..2 {
                assert!((g[(i, j)] - fd[i]).abs() < 1e-3 * g.norm());
            }
        }
    }
}
