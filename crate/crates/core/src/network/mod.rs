//! Polygonal multiphase curve networks.
//!
//! A network is a set of polygonal curves, each either closed or open. The
//! ends of an open curve either meet other curves at a junction (degree three
//! or more) or are pinned boundary points. Every curve carries the phase ids
//! on its left and right, so the phases `1..=N` are recovered from the
//! oriented curves alone.

mod generators;
mod io;
mod raster;
pub(crate) mod remesh;
mod topology;

pub use generators::*;
pub use io::NetworkFile;
pub use raster::{symmetric_difference_area, PhaseRaster};
pub use remesh::remesh;
pub use topology::{topology_events, EventKind, TopologyEvent};

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geom::{cross, left_normal, segments_intersect, BBox, Mat2, Vec2};

/// Which end of an open curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EndFlag {
    Start,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CurveEnd {
    pub curve: usize,
    pub end: EndFlag,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Curve {
    /// Vertex indices in traversal order. A closed curve does not repeat its
    /// first vertex.
    pub ids: Vec<usize>,
    pub closed: bool,
    pub left: usize,
    pub right: usize,
}

impl Curve {
    pub fn segment_count(&self) -> usize {
        if self.closed {
            self.ids.len()
        } else {
            self.ids.len().saturating_sub(1)
        }
    }

    /// Vertex index pairs of the curve's segments, in order.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.ids.len();
        (0..self.segment_count()).map(move |k| (self.ids[k], self.ids[(k + 1) % n]))
    }

    pub fn end_vertex(&self, end: EndFlag) -> usize {
        match end {
            EndFlag::Start => self.ids[0],
            EndFlag::End => *self.ids.last().expect("curve has vertices"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Junction {
    pub vertex: usize,
    pub ends: Vec<CurveEnd>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseSeed {
    pub phase: usize,
    pub point: Vec2,
}

/// How a vertex participates in the network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VertexRole {
    /// Position `pos` along curve `curve`, with two neighbours on it.
    Interior {
        curve: usize,
        pos: usize,
    },
    Junction(usize),
    /// End of an open curve that is not at a junction; held fixed by the flow.
    Pinned {
        curve: usize,
        end: EndFlag,
    },
    Unused,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CurveNetwork {
    pub(crate) vertices: Vec<Vec2>,
    pub(crate) curves: Vec<Curve>,
    pub(crate) junctions: Vec<Junction>,
    pub(crate) phase_count: usize,
    pub(crate) seeds: Vec<PhaseSeed>,
}

/// Tolerance under which two segments count as the same segment.
pub const COINCIDENCE_TOL: f64 = 1e-12;

impl CurveNetwork {
    /// Builds and validates a network.
    pub fn new(
        vertices: Vec<Vec2>,
        curves: Vec<Curve>,
        junctions: Vec<Junction>,
        phase_count: usize,
        seeds: Vec<PhaseSeed>,
    ) -> Result<Self> {
        let net = Self::from_parts_unchecked(vertices, curves, junctions, phase_count, seeds);
        net.validate()?;
        Ok(net)
    }

    pub(crate) fn from_parts_unchecked(
        vertices: Vec<Vec2>,
        curves: Vec<Curve>,
        junctions: Vec<Junction>,
        phase_count: usize,
        seeds: Vec<PhaseSeed>,
    ) -> Self {
        CurveNetwork { vertices, curves, junctions, phase_count, seeds }
    }

    /// A network with no curves; the whole plane is one phase.
    pub fn empty(phase_count: usize, seeds: Vec<PhaseSeed>) -> Self {
        Self::from_parts_unchecked(vec![], vec![], vec![], phase_count, seeds)
    }

    pub fn vertices(&self) -> &[Vec2] {
        &self.vertices
    }
    pub fn curves(&self) -> &[Curve] {
        &self.curves
    }
    pub fn junctions(&self) -> &[Junction] {
        &self.junctions
    }
    pub fn phase_count(&self) -> usize {
        self.phase_count
    }
    pub fn seeds(&self) -> &[PhaseSeed] {
        &self.seeds
    }
    pub fn is_empty(&self) -> bool {
        self.curves.is_empty()
    }

    pub fn segment_count(&self) -> usize {
        self.curves.iter().map(Curve::segment_count).sum()
    }

    /// All segments as `(curve, a, b)` vertex indices.
    pub fn segments(&self) -> impl Iterator<Item = (usize, usize, usize)> + '_ {
        self.curves.iter().enumerate().flat_map(|(c, curve)| curve.segments().map(move |(a, b)| (c, a, b)))
    }

    pub fn curve_length(&self, c: usize) -> f64 {
        self.curves[c].segments().map(|(a, b)| (self.vertices[b] - self.vertices[a]).norm()).sum()
    }

    /// Total polygonal length.
    pub fn length(&self) -> f64 {
        (0..self.curves.len()).map(|c| self.curve_length(c)).sum()
    }

    pub fn min_segment_length(&self) -> Option<f64> {
        self.segments()
            .map(|(_, a, b)| (self.vertices[b] - self.vertices[a]).norm())
            .fold(None, |m, l| Some(m.map_or(l, |m: f64| m.min(l))))
    }

    pub fn bbox(&self) -> BBox {
        let mut bb = BBox::empty();
        for c in &self.curves {
            for &v in &c.ids {
                bb.include(&self.vertices[v]);
            }
        }
        bb
    }

    /// Applies `x -> rot * x + shift` to vertices and seeds.
    pub fn transformed(&self, rot: &Mat2, shift: &Vec2) -> Self {
        let mut out = self.clone();
        for v in &mut out.vertices {
            *v = rot * *v + shift;
        }
        for s in &mut out.seeds {
            s.point = rot * s.point + shift;
        }
        out
    }

    pub fn vertex_roles(&self) -> Vec<VertexRole> {
        let mut roles = vec![VertexRole::Unused; self.vertices.len()];
        for (j, junc) in self.junctions.iter().enumerate() {
            roles[junc.vertex] = VertexRole::Junction(j);
        }
        for (c, curve) in self.curves.iter().enumerate() {
            let n = curve.ids.len();
            for (pos, &v) in curve.ids.iter().enumerate() {
                if matches!(roles[v], VertexRole::Junction(_)) {
                    continue;
                }
                roles[v] = if !curve.closed && pos == 0 {
                    VertexRole::Pinned { curve: c, end: EndFlag::Start }
                } else if !curve.closed && pos == n - 1 {
                    VertexRole::Pinned { curve: c, end: EndFlag::End }
                } else {
                    VertexRole::Interior { curve: c, pos }
                };
            }
        }
        roles
    }

    fn neighbour_positions(&self, curve: usize, pos: usize) -> (Option<usize>, Option<usize>) {
        let c = &self.curves[curve];
        let n = c.ids.len();
        if c.closed {
            (Some(c.ids[(pos + n - 1) % n]), Some(c.ids[(pos + 1) % n]))
        } else {
            let prev = (pos > 0).then(|| c.ids[pos - 1]);
            let next = (pos + 1 < n).then(|| c.ids[pos + 1]);
            (prev, next)
        }
    }

    fn unit(&self, from: usize, to: usize) -> Result<(Vec2, f64)> {
        let e = self.vertices[to] - self.vertices[from];
        let l = e.norm();
        if !(l > 0.0) {
            return Err(Error::MeshCorruption(format!("zero-length segment between vertices {from} and {to}")));
        }
        Ok((e / l, l))
    }

    /// Unit tangent at position `pos` of curve `curve`, oriented along the curve.
    ///
    /// Interior positions average the two adjacent unit edge directions; curve
    /// ends use their single adjacent segment.
    pub fn tangent(&self, curve: usize, pos: usize) -> Result<Vec2> {
        let c = self.curves.get(curve).ok_or_else(|| Error::InvalidArgument(format!("no curve {curve}")))?;
        if pos >= c.ids.len() {
            return Err(Error::InvalidArgument(format!("curve {curve} has no position {pos}")));
        }
        let v = c.ids[pos];
        let (prev, next) = self.neighbour_positions(curve, pos);
        let t = match (prev, next) {
            (Some(p), Some(n)) => {
                let (tm, _) = self.unit(p, v)?;
                let (tp, _) = self.unit(v, n)?;
                tm + tp
            }
            (None, Some(n)) => self.unit(v, n)?.0,
            (Some(p), None) => self.unit(p, v)?.0,
            (None, None) => return Err(Error::MeshCorruption(format!("curve {curve} has a single vertex"))),
        };
        let l = t.norm();
        if !(l > 1e-300) {
            return Err(Error::MeshCorruption(format!("curve {curve} folds back on itself at position {pos}")));
        }
        Ok(t / l)
    }

    /// Arc-length second difference at a non-junction vertex.
    pub fn discrete_curvature(&self, vertex: usize) -> Result<Vec2> {
        self.curvature_and_dual(vertex).map(|(h, _)| h)
    }

    /// Curvature vector together with the dual length `(|e-| + |e+|) / 2`.
    pub fn curvature_and_dual(&self, vertex: usize) -> Result<(Vec2, f64)> {
        match self.vertex_roles().get(vertex) {
            Some(VertexRole::Interior { curve, pos }) => self.curvature_at(*curve, *pos),
            Some(VertexRole::Junction(_)) => Err(Error::JunctionVertex(vertex)),
            Some(_) => Err(Error::InvalidArgument(format!("vertex {vertex} is not interior to a curve"))),
            None => Err(Error::InvalidArgument(format!("no vertex {vertex}"))),
        }
    }

    pub(crate) fn curvature_at(&self, curve: usize, pos: usize) -> Result<(Vec2, f64)> {
        let v = self.curves[curve].ids[pos];
        match self.neighbour_positions(curve, pos) {
            (Some(p), Some(n)) => {
                let (tm, lm) = self.unit(p, v)?;
                let (tp, lp) = self.unit(v, n)?;
                Ok(((tp - tm) * (2.0 / (lm + lp)), 0.5 * (lm + lp)))
            }
            _ => Err(Error::InvalidArgument(format!("position {pos} of curve {curve} is a curve end"))),
        }
    }

    /// Direction pointing from the junction into the curve at the given end.
    pub fn inward_direction(&self, end: &CurveEnd) -> Result<Vec2> {
        let c = &self.curves[end.curve];
        let n = c.ids.len();
        let (from, to) = match end.end {
            EndFlag::Start => (c.ids[0], c.ids[1]),
            EndFlag::End => (c.ids[n - 1], c.ids[n - 2]),
        };
        Ok(self.unit(from, to)?.0)
    }

    /// Sum of inward unit tangents at a junction, and the angles in degrees
    /// between angularly consecutive incident curves, sorted ascending.
    pub fn junction_balance(&self, junction: usize) -> Result<(Vec2, Vec<f64>)> {
        let j =
            self.junctions.get(junction).ok_or_else(|| Error::InvalidArgument(format!("no junction {junction}")))?;
        let dirs: Vec<Vec2> = j.ends.iter().map(|e| self.inward_direction(e)).collect::<Result<_>>()?;
        let residual = dirs.iter().fold(Vec2::zeros(), |s, d| s + d);
        let mut polar: Vec<f64> = dirs.iter().map(|d| d.y.atan2(d.x)).collect();
        polar.sort_by(f64::total_cmp);
        let k = polar.len();
        let mut angles: Vec<f64> = (0..k)
            .map(|i| {
                let next = if i + 1 < k { polar[i + 1] } else { polar[0] + std::f64::consts::TAU };
                (next - polar[i]).to_degrees()
            })
            .collect();
        angles.sort_by(f64::total_cmp);
        Ok((residual, angles))
    }

    /// Junction ends in counter-clockwise order with their inward directions.
    pub(crate) fn ends_ccw(&self, junction: &Junction) -> Result<Vec<(CurveEnd, Vec2)>> {
        let mut ends: Vec<(CurveEnd, Vec2)> =
            junction.ends.iter().map(|e| Ok((*e, self.inward_direction(e)?))).collect::<Result<_>>()?;
        ends.sort_by(|a, b| a.1.y.atan2(a.1.x).total_cmp(&b.1.y.atan2(b.1.x)));
        Ok(ends)
    }

    /// Phases on the counter-clockwise and clockwise side of an end's inward
    /// direction.
    pub(crate) fn end_sides(&self, end: &CurveEnd) -> (usize, usize) {
        let c = &self.curves[end.curve];
        match end.end {
            EndFlag::Start => (c.left, c.right),
            EndFlag::End => (c.right, c.left),
        }
    }

    /// Checks every structural invariant.
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidNetwork(m));
        if self.phase_count < 2 {
            return bad(format!("phase_count {} < 2", self.phase_count));
        }
        let nv = self.vertices.len();
        if self.vertices.iter().any(|v| !v.x.is_finite() || !v.y.is_finite()) {
            return bad("non-finite vertex coordinate".into());
        }
        for (ci, c) in self.curves.iter().enumerate() {
            let min = if c.closed { 3 } else { 2 };
            if c.ids.len() < min {
                return bad(format!("curve {ci} has {} vertices", c.ids.len()));
            }
            if let Some(&v) = c.ids.iter().find(|&&v| v >= nv) {
                return bad(format!("curve {ci} references missing vertex {v}"));
            }
            for p in [c.left, c.right] {
                if p == 0 || p > self.phase_count {
                    return bad(format!("curve {ci} has phase label {p} outside 1..={}", self.phase_count));
                }
            }
            for (a, b) in c.segments() {
                if !((self.vertices[b] - self.vertices[a]).norm() > 0.0) {
                    return bad(format!("curve {ci} has a zero-length segment ({a}, {b})"));
                }
            }
        }
        // Vertex usage: junction vertices may be shared, nothing else.
        let mut claimed: HashMap<usize, Vec<CurveEnd>> = HashMap::new();
        let mut use_count = vec![0usize; nv];
        for (ci, c) in self.curves.iter().enumerate() {
            for (pos, &v) in c.ids.iter().enumerate() {
                use_count[v] += 1;
                if !c.closed && (pos == 0 || pos + 1 == c.ids.len()) {
                    let end = if pos == 0 { EndFlag::Start } else { EndFlag::End };
                    claimed.entry(v).or_default().push(CurveEnd { curve: ci, end });
                }
            }
        }
        let mut junction_vertices = HashMap::new();
        for (ji, j) in self.junctions.iter().enumerate() {
            if j.vertex >= nv {
                return bad(format!("junction {ji} references missing vertex {}", j.vertex));
            }
            if junction_vertices.insert(j.vertex, ji).is_some() {
                return bad(format!("vertex {} hosts two junctions", j.vertex));
            }
            if j.ends.len() < 3 {
                return bad(format!("junction {ji} has degree {}", j.ends.len()));
            }
            for e in &j.ends {
                let Some(c) = self.curves.get(e.curve) else {
                    return bad(format!("junction {ji} references missing curve {}", e.curve));
                };
                if c.closed || c.end_vertex(e.end) != j.vertex {
                    return bad(format!("junction {ji} end {:?} does not match its curve", e));
                }
            }
            let mut mine: Vec<_> = j.ends.clone();
            let mut theirs = claimed.get(&j.vertex).cloned().unwrap_or_default();
            let key = |e: &CurveEnd| (e.curve, e.end);
            mine.sort_by_key(key);
            theirs.sort_by_key(key);
            if mine != theirs {
                return bad(format!("junction {ji} end list does not match the curves claiming it"));
            }
            if use_count[j.vertex] != j.ends.len() {
                return bad(format!("junction {ji} vertex is also used as an interior vertex"));
            }
        }
        for (v, ends) in &claimed {
            if !junction_vertices.contains_key(v) && (ends.len() != 1 || use_count[*v] != 1) {
                return bad(format!("vertex {v} is shared by curves but is not a junction"));
            }
        }
        for (v, &n) in use_count.iter().enumerate() {
            if n > 1 && !junction_vertices.contains_key(&v) {
                return bad(format!("vertex {v} is used {n} times"));
            }
        }
        for (ji, j) in self.junctions.iter().enumerate() {
            let ends = self.ends_ccw(j)?;
            let k = ends.len();
            for i in 0..k {
                let (ccw, _) = self.end_sides(&ends[i].0);
                let (_, cw_next) = self.end_sides(&ends[(i + 1) % k].0);
                if ccw != cw_next {
                    return bad(format!("phase labels around junction {ji} are inconsistent ({ccw} vs {cw_next})"));
                }
            }
        }
        for s in &self.seeds {
            if s.phase == 0 || s.phase > self.phase_count {
                return bad(format!("seed for phase {} out of range", s.phase));
            }
        }
        if let Some((s1, s2)) = self.find_crossing() {
            return bad(format!("segments {s1:?} and {s2:?} intersect"));
        }
        Ok(())
    }

    /// First pair of distinct segments meeting away from a shared vertex.
    /// Exactly coincident segments are allowed; they carry multiplicity.
    pub fn find_crossing(&self) -> Option<((usize, usize), (usize, usize))> {
        let segs: Vec<(usize, usize)> = self.segments().map(|(_, a, b)| (a, b)).collect();
        if segs.len() < 2 {
            return None;
        }
        let bb = self.bbox();
        let max_len = segs.iter().map(|&(a, b)| (self.vertices[b] - self.vertices[a]).norm()).fold(0.0, f64::max);
        let extent = (bb.max - bb.min).max();
        let cells_per_axis = ((extent / max_len.max(1e-300)).ceil() as usize).clamp(1, 2048);
        let cell = (extent / cells_per_axis as f64).max(1e-300);
        let idx = |x: f64, o: f64| (((x - o) / cell).floor().max(0.0) as usize).min(cells_per_axis - 1);
        let mut cells: Vec<(usize, usize)> = Vec::with_capacity(2 * segs.len());
        for (s, &(a, b)) in segs.iter().enumerate() {
            let (pa, pb) = (self.vertices[a], self.vertices[b]);
            let (i0, i1) = (idx(pa.x.min(pb.x), bb.min.x), idx(pa.x.max(pb.x), bb.min.x));
            let (j0, j1) = (idx(pa.y.min(pb.y), bb.min.y), idx(pa.y.max(pb.y), bb.min.y));
            for i in i0..=i1 {
                for j in j0..=j1 {
                    cells.push((i * cells_per_axis + j, s));
                }
            }
        }
        cells.sort_unstable();
        for bucket in cells.chunk_by(|x, y| x.0 == y.0) {
            for (k, &(_, s)) in bucket.iter().enumerate() {
                for &(_, t) in &bucket[k + 1..] {
                    let (a, b) = segs[s];
                    let (c, d) = segs[t];
                    if a == c || a == d || b == c || b == d {
                        continue;
                    }
                    let (pa, pb, pc, pd) = (self.vertices[a], self.vertices[b], self.vertices[c], self.vertices[d]);
                    let same = ((pa - pc).norm() <= COINCIDENCE_TOL && (pb - pd).norm() <= COINCIDENCE_TOL)
                        || ((pa - pd).norm() <= COINCIDENCE_TOL && (pb - pc).norm() <= COINCIDENCE_TOL);
                    if same {
                        continue;
                    }
                    // Segments of coincident curves share endpoint positions.
                    let touch = |p: &Vec2, q: &Vec2| (p - q).norm() <= COINCIDENCE_TOL;
                    if touch(&pa, &pc) || touch(&pa, &pd) || touch(&pb, &pc) || touch(&pb, &pd) {
                        continue;
                    }
                    if segments_intersect(&pa, &pb, &pc, &pd) {
                        return Some(((a, b), (c, d)));
                    }
                }
            }
        }
        None
    }

    /// Signed area enclosed by a closed curve (positive when counter-clockwise).
    pub fn curve_signed_area(&self, c: usize) -> f64 {
        0.5 * self.curves[c].segments().map(|(a, b)| cross(&self.vertices[a], &self.vertices[b])).sum::<f64>()
    }

    /// Length of boundary between phase `phase` and its neighbours, with each
    /// segment counted when the phase sits on exactly one side of it.
    pub fn phase_perimeter(&self, phase: usize) -> f64 {
        self.curves
            .iter()
            .enumerate()
            .filter(|(_, c)| (c.left == phase) != (c.right == phase))
            .map(|(ci, _)| self.curve_length(ci))
            .sum()
    }

    /// Sorted crossings of the horizontal line `y` as `(x, west phase, east phase)`.
    pub(crate) fn row_crossings(&self, y: f64) -> Vec<(f64, usize, usize)> {
        let mut out = Vec::new();
        for c in &self.curves {
            for (a, b) in c.segments() {
                let (pa, pb) = (self.vertices[a], self.vertices[b]);
                let up = pa.y <= y && y < pb.y;
                let down = pb.y <= y && y < pa.y;
                if !(up || down) {
                    continue;
                }
                let x = pa.x + (y - pa.y) * (pb.x - pa.x) / (pb.y - pa.y);
                if up {
                    out.push((x, c.left, c.right));
                } else {
                    out.push((x, c.right, c.left));
                }
            }
        }
        out.sort_by(|a, b| a.0.total_cmp(&b.0));
        out
    }

    /// Phase occupying the unbounded component, if it can be determined.
    pub fn unbounded_phase(&self) -> Option<usize> {
        if self.curves.is_empty() {
            return match self.seeds.as_slice() {
                [s] => Some(s.phase),
                _ => None,
            };
        }
        let mut ys: Vec<f64> = self.curves.iter().flat_map(|c| c.ids.iter().map(|&v| self.vertices[v].y)).collect();
        ys.sort_by(f64::total_cmp);
        ys.dedup();
        let mid = ys.len() / 2;
        // Probe rows strictly between distinct vertex heights, starting near the middle.
        let mut order: Vec<usize> = (0..ys.len().saturating_sub(1)).collect();
        order.sort_by_key(|&i| (i as isize - mid as isize).unsigned_abs());
        for i in order {
            let y = 0.5 * (ys[i] + ys[i + 1]);
            if let Some(&(_, _, east)) = self.row_crossings(y).last() {
                return Some(east);
            }
        }
        None
    }

    /// Phase containing `p`, found from the nearest boundary crossing east of it.
    pub fn phase_at(&self, p: &Vec2) -> Option<usize> {
        let row = self.row_crossings(p.y);
        match row.iter().find(|(x, _, _)| *x > p.x) {
            Some(&(_, west, _)) => Some(west),
            None => self.unbounded_phase(),
        }
    }

    /// Area of a bounded phase from the oriented boundary.
    ///
    /// Returns `Ok(None)` for the unbounded phase. Fails when the phase
    /// boundary does not close up into cycles.
    pub fn phase_area(&self, phase: usize) -> Result<Option<f64>> {
        if phase == 0 || phase > self.phase_count {
            return Err(Error::InvalidArgument(format!("phase {phase} out of range")));
        }
        if self.unbounded_phase() == Some(phase) {
            return Ok(None);
        }
        let mut balance: HashMap<usize, i64> = HashMap::new();
        let mut twice_area = 0.0;
        for c in &self.curves {
            let sign = match (c.left == phase, c.right == phase) {
                (true, false) => 1.0,
                (false, true) => -1.0,
                _ => continue,
            };
            for (a, b) in c.segments() {
                let (from, to) = if sign > 0.0 { (a, b) } else { (b, a) };
                *balance.entry(from).or_default() += 1;
                *balance.entry(to).or_default() -= 1;
                twice_area += sign * cross(&self.vertices[a], &self.vertices[b]);
            }
        }
        if let Some((v, _)) = balance.iter().find(|(_, &d)| d != 0) {
            return Err(Error::Orientation(format!("boundary of phase {phase} does not close at vertex {v}")));
        }
        Ok(Some(0.5 * twice_area))
    }

    /// Outward unit normal of `phase` along a curve direction `t`, if the
    /// curve borders that phase on exactly one side.
    pub fn outward_normal(&self, curve: usize, t: &Vec2, phase: usize) -> Option<Vec2> {
        let c = &self.curves[curve];
        match (c.left == phase, c.right == phase) {
            (true, false) => Some(-left_normal(t)),
            (false, true) => Some(left_normal(t)),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::vec2;
    use std::f64::consts::PI;

    #[test]
    fn tangent_straight_and_corner() {
        let net = line_network(&[vec2(0.0, 0.0), vec2(1.0, 0.0), vec2(2.0, 0.0)]).unwrap();
        let t = net.tangent(0, 1).unwrap();
        assert!((t - vec2(1.0, 0.0)).norm() < 1e-15);

        let corner = line_network(&[vec2(0.0, 0.0), vec2(1.0, 0.0), vec2(1.0, 1.0)]).unwrap();
        let t = corner.tangent(0, 1).unwrap();
        let s = 0.5f64.sqrt();
        assert!((t - vec2(s, s)).norm() < 1e-15);
        assert!((corner.tangent(0, 0).unwrap() - vec2(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn tangent_on_polygon_is_perpendicular_to_radius() {
        let net = circle(1.0, 37, vec2(0.3, -0.2));
        let c = vec2(0.3, -0.2);
        for pos in 0..37 {
            let v = net.vertices[net.curves[0].ids[pos]];
            let t = net.tangent(0, pos).unwrap();
            assert!(t.dot(&(v - c)).abs() < 1e-12);
        }
    }

    #[test]
    fn degenerate_tangent_is_reported() {
        let mut net = line_network(&[vec2(0.0, 0.0), vec2(1.0, 0.0), vec2(2.0, 0.0)]).unwrap();
        net.vertices[1] = vec2(0.0, 0.0);
        assert!(matches!(net.tangent(0, 1), Err(Error::MeshCorruption(_))));
    }

    #[test]
    fn curvature_of_regular_polygons() {
        let line = line_network(&[vec2(0.0, 0.0), vec2(0.5, 0.0), vec2(1.0, 0.0)]).unwrap();
        assert_eq!(line.discrete_curvature(1).unwrap(), Vec2::zeros());

        for (r, tol) in [(1.0, 1e-3), (2.0, 5e-4)] {
            let net = circle(r, 256, Vec2::zeros());
            for v in 0..256 {
                let h = net.discrete_curvature(v).unwrap();
                assert!((h.norm() - 1.0 / r).abs() < tol);
                // points to the centre
                let x = net.vertices[v];
                assert!((h.normalize() + x.normalize()).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn curvature_rejects_junctions() {
        let net = steiner_triod(1.0, 4);
        let jv = net.junctions[0].vertex;
        assert!(matches!(net.discrete_curvature(jv), Err(Error::JunctionVertex(_))));
    }

    #[test]
    fn steiner_triod_is_balanced() {
        let net = steiner_triod(1.0, 5);
        let (res, angles) = net.junction_balance(0).unwrap();
        assert!(res.norm() < 1e-12);
        for a in angles {
            assert!((a - 120.0).abs() < 1e-9);
        }
    }

    #[test]
    fn unbalanced_triod_residual() {
        // arms at 0, 90 and 225 degrees: gaps 90, 135, 135
        let net = star(&[0.0, 90.0, 225.0], 1.0, 3).unwrap();
        let (res, angles) = net.junction_balance(0).unwrap();
        let expect = vec2(1.0, 0.0) + vec2(0.0, 1.0) + vec2((225f64).to_radians().cos(), (225f64).to_radians().sin());
        assert!((res - expect).norm() < 1e-12);
        assert!(res.norm() > 0.1);
        assert!((angles[0] - 90.0).abs() < 1e-9);
        assert!((angles[1] - 135.0).abs() < 1e-9);
        assert!((angles[2] - 135.0).abs() < 1e-9);
    }

    #[test]
    fn four_way_cross_is_balanced() {
        let net = star(&[0.0, 90.0, 180.0, 270.0], 1.0, 2).unwrap();
        let (res, angles) = net.junction_balance(0).unwrap();
        assert!(res.norm() < 1e-12);
        assert_eq!(angles.len(), 4);
        assert!(angles.iter().all(|a| (a - 90.0).abs() < 1e-9));
    }

    #[test]
    fn balance_is_rigid_motion_invariant() {
        let net = star(&[0.0, 80.0, 200.0], 1.3, 3).unwrap();
        let (r0, a0) = net.junction_balance(0).unwrap();
        let rot = crate::geom::rotation(0.7);
        let moved = net.transformed(&rot, &vec2(3.0, -2.0));
        let (r1, a1) = moved.junction_balance(0).unwrap();
        assert!((rot * r0 - r1).norm() < 1e-12);
        for (x, y) in a0.iter().zip(&a1) {
            assert!((x - y).abs() < 1e-9);
        }
    }

    #[test]
    fn phase_areas() {
        let sq = square(1.0, Vec2::zeros());
        assert!((sq.phase_area(1).unwrap().unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(sq.phase_area(2).unwrap(), None);

        let disk = circle(1.0, 256, Vec2::zeros());
        let a = disk.phase_area(1).unwrap().unwrap();
        assert!((a - PI).abs() < 1e-3);
        let exact = 128.0 * (2.0 * PI / 256.0).sin();
        assert!((a - exact).abs() < 1e-12);

        let two = two_squares();
        assert!((two.phase_area(1).unwrap().unwrap() - 2.0).abs() < 1e-14);
    }

    #[test]
    fn open_boundary_has_no_area() {
        let tri = steiner_triod(1.0, 3);
        assert!(matches!(tri.phase_area(1), Err(Error::Orientation(_))));
    }

    #[test]
    fn validation_catches_bad_labels_and_crossings() {
        let mut net = steiner_triod(1.0, 3);
        net.curves[0].left = 3;
        assert!(net.validate().is_err());

        let bow = CurveNetwork::new(
            vec![vec2(0., 0.), vec2(1., 1.), vec2(1., 0.), vec2(0., 1.)],
            vec![Curve { ids: vec![0, 1, 2, 3], closed: true, left: 1, right: 2 }],
            vec![],
            2,
            vec![],
        );
        assert!(bow.is_err());
    }

    #[test]
    fn phase_lookup() {
        let disk = circle(1.0, 64, Vec2::zeros());
        assert_eq!(disk.phase_at(&vec2(0.1, 0.2)), Some(1));
        assert_eq!(disk.phase_at(&vec2(3.0, 0.2)), Some(2));
        assert_eq!(disk.phase_at(&vec2(-3.0, 0.0)), Some(2));
        assert_eq!(disk.unbounded_phase(), Some(2));
    }
}
