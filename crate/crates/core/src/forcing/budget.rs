use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::ForcingField;
use crate::error::{Error, Result};
use crate::geom::{vec2, Vec2};
use crate::quadrature::panel_nodes;

const SPACE_ORDER: usize = 4;
const TIME_ORDER: usize = 4;

/// `esssup_t int |u|^2`, `int_0^T int |grad u|^2` and their product.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SobolevBudget {
    /// Maximum of `int |u|^2 dx` over time nodes in `[0, T]`.
    pub sup_l2: f64,
    pub dirichlet: f64,
    pub c1: f64,
    pub horizon: f64,
    /// Same maximum over `[0, T + 1]`.
    pub sup_l2_extended: f64,
    pub resolution: usize,
    /// Fewer than eight quadrature nodes across the field's feature width.
    pub coarse: bool,
}

impl SobolevBudget {
    pub fn zero(horizon: f64) -> Self {
        SobolevBudget {
            sup_l2: 0.0,
            dirichlet: 0.0,
            c1: 0.0,
            horizon,
            sup_l2_extended: 0.0,
            resolution: 0,
            coarse: false,
        }
    }
}

fn square_nodes(center: Vec2, half: f64, resolution: usize) -> Vec<(Vec2, f64)> {
    let line = panel_nodes(-half, half, &[], SPACE_ORDER, resolution.max(1));
    let mut out = Vec::with_capacity(line.len() * line.len());
    for &(y, wy) in &line {
        for &(x, wx) in &line {
            out.push((center + vec2(x, y), wx * wy));
        }
    }
    out
}

/// Sum over nodes in fixed-size chunks, reduced in order.
fn ordered_sum(nodes: &[(Vec2, f64)], f: impl Fn(&Vec2) -> (f64, f64) + Sync) -> (f64, f64) {
    let parts: Vec<(f64, f64)> = nodes
        .par_chunks(256)
        .map(|chunk| {
            chunk.iter().fold((0.0, 0.0), |(a, b), (p, w)| {
                let (x, y) = f(p);
                (a + w * x, b + w * y)
            })
        })
        .collect();
    parts.iter().fold((0.0, 0.0), |(a, b), (x, y)| (a + x, b + y))
}

/// `(int |u|^2 dx, int |grad u|^2 dx)` at time `t`.
pub fn spatial_integrals(u: &ForcingField, t: f64, resolution: usize) -> (f64, f64) {
    let Some((c, r)) = u.support() else { return (0.0, 0.0) };
    let nodes = square_nodes(c, r, resolution);
    ordered_sum(&nodes, |p| {
        let (v, g) = u.sample(p, t);
        (v.norm_squared(), g.norm_squared())
    })
}

fn time_pieces(resolution: usize) -> usize {
    (resolution / 4).max(2)
}

/// Tensor Gauss quadrature of the budget over the support square and `[0, t_end]`.
///
/// `resolution` is the number of panels per spatial axis (four nodes each).
pub fn sobolev_budget(u: &ForcingField, t_end: f64, resolution: usize) -> Result<SobolevBudget> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon {t_end} must be positive")));
    }
    if let Some(h) = u.horizon() {
        if t_end > h * (1.0 + 1e-12) {
            return Err(Error::Precondition(format!("T = {t_end} exceeds the field horizon {h}")));
        }
    }
    let Some((_, r)) = u.support() else { return Ok(SobolevBudget::zero(t_end)) };
    let breaks = u.time_breakpoints();
    let pieces = time_pieces(resolution);
    let mut sup_l2 = 0.0f64;
    let mut dirichlet = 0.0;
    for (t, w) in panel_nodes(0.0, t_end, &breaks, TIME_ORDER, pieces) {
        let (l2, d) = spatial_integrals(u, t, resolution);
        sup_l2 = sup_l2.max(l2);
        dirichlet += w * d;
    }
    let mut sup_ext = sup_l2;
    for (t, _) in panel_nodes(t_end, t_end + 1.0, &breaks, TIME_ORDER, pieces) {
        sup_ext = sup_ext.max(spatial_integrals(u, t, resolution).0);
    }
    let spacing = 2.0 * r / (resolution.max(1) * SPACE_ORDER) as f64;
    Ok(SobolevBudget {
        sup_l2,
        dirichlet,
        c1: sup_l2 * dirichlet,
        horizon: t_end,
        sup_l2_extended: sup_ext,
        resolution,
        coarse: u.feature_width() / spacing < 8.0,
    })
}

/// `int_0^T (int |u - v|^2 + |grad u - grad v|^2 dx) dt`.
pub fn w12_distance(u: &ForcingField, v: &ForcingField, t_end: f64, resolution: usize) -> Result<f64> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("horizon {t_end} must be positive")));
    }
    let (c, r) = match (u.support(), v.support()) {
        (None, None) => return Ok(0.0),
        (Some(a), None) | (None, Some(a)) => a,
        (Some((ca, ra)), Some((cb, rb))) => {
            let lo = (ca - Vec2::repeat(ra)).inf(&(cb - Vec2::repeat(rb)));
            let hi = (ca + Vec2::repeat(ra)).sup(&(cb + Vec2::repeat(rb)));
            (0.5 * (lo + hi), 0.5 * (hi - lo).max())
        }
    };
    let nodes = square_nodes(c, r, resolution);
    let mut breaks = u.time_breakpoints();
    breaks.extend(v.time_breakpoints());
    let mut total = 0.0;
    for (t, w) in panel_nodes(0.0, t_end, &breaks, TIME_ORDER, time_pieces(resolution)) {
        let (a, b) = ordered_sum(&nodes, |p| {
            let (uv, ug) = u.sample(p, t);
            let (vv, vg) = v.sample(p, t);
            ((uv - vv).norm_squared(), (ug - vg).norm_squared())
        });
        total += w * (a + b);
    }
    Ok(total)
}
