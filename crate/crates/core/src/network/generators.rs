//! Analytic initial configurations.

use std::f64::consts::PI;

use super::{Curve, CurveEnd, CurveNetwork, EndFlag, Junction, PhaseSeed};
use crate::error::{Error, Result};
use crate::geom::{vec2, Vec2};

/// Regular `n`-gon inscribed in the circle of radius `r`, counter-clockwise,
/// phase 1 inside and phase 2 outside.
pub fn circle(r: f64, n: usize, center: Vec2) -> CurveNetwork {
    let vertices: Vec<Vec2> = (0..n)
        .map(|k| {
            let a = 2.0 * PI * k as f64 / n as f64;
            center + vec2(r * a.cos(), r * a.sin())
        })
        .collect();
    CurveNetwork::from_parts_unchecked(
        vertices,
        vec![Curve { ids: (0..n).collect(), closed: true, left: 1, right: 2 }],
        vec![],
        2,
        vec![PhaseSeed { phase: 1, point: center }, PhaseSeed { phase: 2, point: center + vec2(2.0 * r, 0.0) }],
    )
}

/// Axis-aligned square with side `a`, four vertices, phase 1 inside.
pub fn square(a: f64, center: Vec2) -> CurveNetwork {
    let h = 0.5 * a;
    let vertices = vec![center + vec2(-h, -h), center + vec2(h, -h), center + vec2(h, h), center + vec2(-h, h)];
    CurveNetwork::from_parts_unchecked(
        vertices,
        vec![Curve { ids: vec![0, 1, 2, 3], closed: true, left: 1, right: 2 }],
        vec![],
        2,
        vec![PhaseSeed { phase: 1, point: center }, PhaseSeed { phase: 2, point: center + vec2(a, 0.0) }],
    )
}

/// Two disjoint unit squares, both phase 1.
pub fn two_squares() -> CurveNetwork {
    let a = square(1.0, vec2(0.0, 0.0));
    let b = square(1.0, vec2(3.0, 0.0));
    let mut vertices = a.vertices.clone();
    vertices.extend_from_slice(&b.vertices);
    CurveNetwork::from_parts_unchecked(
        vertices,
        vec![
            Curve { ids: vec![0, 1, 2, 3], closed: true, left: 1, right: 2 },
            Curve { ids: vec![4, 5, 6, 7], closed: true, left: 1, right: 2 },
        ],
        vec![],
        2,
        vec![PhaseSeed { phase: 1, point: vec2(0.0, 0.0) }, PhaseSeed { phase: 2, point: vec2(1.5, 0.0) }],
    )
}

/// Open polyline through `points` with pinned ends; phase 1 on its left.
pub fn line_network(points: &[Vec2]) -> Result<CurveNetwork> {
    if points.len() < 2 {
        return Err(Error::InvalidArgument("a line needs two points".into()));
    }
    CurveNetwork::new(
        points.to_vec(),
        vec![Curve { ids: (0..points.len()).collect(), closed: false, left: 1, right: 2 }],
        vec![],
        2,
        vec![],
    )
}

/// Horizontal segment of length `l` centred at the origin, `n` equal pieces.
pub fn line(l: f64, n: usize) -> CurveNetwork {
    let pts: Vec<Vec2> = (0..=n).map(|k| vec2(-0.5 * l + l * k as f64 / n as f64, 0.0)).collect();
    line_network(&pts).expect("valid line")
}

/// Straight arms of length `l` leaving the origin at the given angles
/// (degrees, ascending), each split into `n` equal pieces and pinned at the
/// far end. The sector counter-clockwise of arm `i` is phase `i + 1`.
pub fn star(angles_deg: &[f64], l: f64, n: usize) -> Result<CurveNetwork> {
    let k = angles_deg.len();
    if k < 3 || n == 0 {
        return Err(Error::InvalidArgument("a star needs three arms".into()));
    }
    let mut vertices = vec![Vec2::zeros()];
    let mut curves = Vec::with_capacity(k);
    let mut ends = Vec::with_capacity(k);
    let mut seeds = Vec::with_capacity(k);
    for (i, &deg) in angles_deg.iter().enumerate() {
        let d = vec2(deg.to_radians().cos(), deg.to_radians().sin());
        let end = d * l;
        let mut ids = vec![0];
        for s in 1..=n {
            vertices.push(end * (s as f64 / n as f64));
            ids.push(vertices.len() - 1);
        }
        curves.push(Curve { ids, closed: false, left: i + 1, right: (i + k - 1) % k + 1 });
        ends.push(CurveEnd { curve: i, end: EndFlag::Start });
        let next = angles_deg[(i + 1) % k] + if i + 1 == k { 360.0 } else { 0.0 };
        let mid = (0.5 * (deg + next)).to_radians();
        seeds.push(PhaseSeed { phase: i + 1, point: vec2(mid.cos(), mid.sin()) * (0.5 * l) });
    }
    CurveNetwork::new(vertices, curves, vec![Junction { vertex: 0, ends }], k, seeds)
}

/// Three arms of length `l` at 120 degrees.
pub fn steiner_triod(l: f64, n: usize) -> CurveNetwork {
    star(&[90.0, 210.0, 330.0], l, n).expect("valid triod")
}

/// The curve `y = -log cos x` on `(-pi/2 + delta, pi/2 - delta)`, sampled at
/// uniform arc length close to `spacing`, with the vertex at `x = 0` included.
/// Phase 1 lies above the curve.
pub fn grim_reaper(delta: f64, spacing: f64) -> Result<CurveNetwork> {
    if !(delta > 0.0 && delta < 0.5 * PI && spacing > 0.0) {
        return Err(Error::InvalidArgument("grim reaper needs delta in (0, pi/2) and spacing > 0".into()));
    }
    // Arc length from the tip is asinh(tan x); x(s) = atan(sinh s), y(s) = log cosh s.
    let s_max = (0.5 * PI - delta).tan().asinh();
    let half = (s_max / spacing).round().max(1.0) as usize;
    let ds = s_max / half as f64;
    let pts: Vec<Vec2> = (0..=2 * half)
        .map(|k| {
            let s = (k as f64 - half as f64) * ds;
            vec2(s.sinh().atan(), s.cosh().ln())
        })
        .collect();
    line_network(&pts)
}

/// Two exactly coincident unit segments, traversed with opposite phase
/// orders, giving a multiplicity-two sheet inside phase 1.
pub fn doubled_segment() -> CurveNetwork {
    CurveNetwork::new(
        vec![vec2(0.0, 0.0), vec2(1.0, 0.0), vec2(0.0, 0.0), vec2(1.0, 0.0)],
        vec![
            Curve { ids: vec![0, 1], closed: false, left: 1, right: 2 },
            Curve { ids: vec![2, 3], closed: false, left: 2, right: 1 },
        ],
        vec![],
        2,
        vec![],
    )
    .expect("valid doubled segment")
}
