//! Uniform arc-length resampling of curves.

use super::{Curve, CurveNetwork, Junction, VertexRole};
use crate::error::{Error, Result};
use crate::geom::Vec2;

fn target_segments(len: f64, spacing: f64, closed: bool) -> usize {
    // Ignore round-off when the spacing divides the length.
    let n = (len / spacing * (1.0 - 1e-12)).ceil() as usize;
    if closed {
        n.max(3)
    } else {
        n.max(1)
    }
}

/// Resamples every curve into `ceil(L / spacing)` pieces of equal arc length
/// measured along the existing polygon. Junctions, pinned ends and the first
/// vertex of each closed curve keep their positions.
pub fn remesh(net: &CurveNetwork, spacing: f64) -> Result<CurveNetwork> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidArgument(format!("spacing {spacing} must be positive")));
    }
    Ok(remesh_curves(net, spacing, &vec![true; net.curves.len()]))
}

/// Resamples only the curves with a segment outside `[0.5, 1.5] * spacing`
/// (short segments only count when the curve has more pieces than it needs).
pub(crate) fn remesh_where_needed(net: &CurveNetwork, spacing: f64) -> Option<CurveNetwork> {
    let mask: Vec<bool> = net
        .curves
        .iter()
        .map(|c| {
            let lens: Vec<f64> = c.segments().map(|(a, b)| (net.vertices[b] - net.vertices[a]).norm()).collect();
            let total: f64 = lens.iter().sum();
            let target = target_segments(total, spacing, c.closed);
            let long = lens.iter().any(|&l| l > 1.5 * spacing);
            let short = lens.iter().any(|&l| l < 0.5 * spacing) && lens.len() > target;
            long || short
        })
        .collect();
    mask.iter().any(|&m| m).then(|| remesh_curves(net, spacing, &mask))
}

fn resample(points: &[Vec2], n: usize) -> Vec<Vec2> {
    let mut cum = Vec::with_capacity(points.len());
    cum.push(0.0);
    for w in points.windows(2) {
        let last = *cum.last().unwrap();
        cum.push(last + (w[1] - w[0]).norm());
    }
    let total = *cum.last().unwrap();
    let mut out = Vec::with_capacity(n.saturating_sub(1));
    let mut seg = 0;
    for k in 1..n {
        let s = total * k as f64 / n as f64;
        while seg + 2 < cum.len() && cum[seg + 1] < s {
            seg += 1;
        }
        let span = cum[seg + 1] - cum[seg];
        let t = if span > 0.0 { ((s - cum[seg]) / span).clamp(0.0, 1.0) } else { 0.0 };
        out.push(points[seg] * (1.0 - t) + points[seg + 1] * t);
    }
    out
}

pub(crate) fn remesh_curves(net: &CurveNetwork, spacing: f64, mask: &[bool]) -> CurveNetwork {
    let roles = net.vertex_roles();
    let mut vertices: Vec<Vec2> = Vec::with_capacity(net.vertices.len());
    let mut shared = vec![usize::MAX; net.vertices.len()];
    let mut keep = |old: usize, vertices: &mut Vec<Vec2>| -> usize {
        let is_shared = matches!(roles[old], VertexRole::Junction(_));
        if is_shared && shared[old] != usize::MAX {
            return shared[old];
        }
        vertices.push(net.vertices[old]);
        let id = vertices.len() - 1;
        if is_shared {
            shared[old] = id;
        }
        id
    };
    let mut curves = Vec::with_capacity(net.curves.len());
    for (ci, c) in net.curves.iter().enumerate() {
        let ids = if !mask[ci] {
            c.ids.iter().map(|&v| keep(v, &mut vertices)).collect()
        } else {
            let mut pts: Vec<Vec2> = c.ids.iter().map(|&v| net.vertices[v]).collect();
            if c.closed {
                pts.push(pts[0]);
            }
            let len = net.curve_length(ci);
            let n = target_segments(len, spacing, c.closed);
            let interior = resample(&pts, n);
            let first = keep(c.ids[0], &mut vertices);
            let mut ids = vec![first];
            for p in interior {
                vertices.push(p);
                ids.push(vertices.len() - 1);
            }
            if !c.closed {
                ids.push(keep(*c.ids.last().unwrap(), &mut vertices));
            }
            ids
        };
        curves.push(Curve { ids, closed: c.closed, left: c.left, right: c.right });
    }
    let junctions = net.junctions.iter().map(|j| Junction { vertex: shared[j.vertex], ends: j.ends.clone() }).collect();
    CurveNetwork::from_parts_unchecked(vertices, curves, junctions, net.phase_count, net.seeds.clone())
}
