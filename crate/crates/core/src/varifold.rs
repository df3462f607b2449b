//! Discrete one-dimensional varifolds carried by polygonal networks.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geom::{clip_length_in_disk, point_segment_distance, radial_cutoff, vec2, Mat2, Vec2};
use crate::network::CurveNetwork;
use crate::quadrature::gauss_legendre;
use crate::report::EstimateReport;

const MERGE_QUANTUM: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VarifoldSegment {
    pub a: Vec2,
    pub b: Vec2,
    pub theta: u32,
}

impl VarifoldSegment {
    pub fn length(&self) -> f64 {
        (self.b - self.a).norm()
    }

    pub fn weight(&self) -> f64 {
        self.theta as f64 * self.length()
    }
}

/// Segments with integer multiplicity.
///
/// When built from a network the first-variation atoms at nodes are known;
/// varifolds read from plain segment lists carry no adjacency.
#[derive(Debug, Clone, PartialEq)]
pub struct DiscreteVarifold {
    segments: Vec<VarifoldSegment>,
    atoms: Option<Vec<(Vec2, Vec2)>>,
}

/// Smooth vector field with compact support.
pub trait VectorTestField: Sync {
    fn value(&self, x: &Vec2) -> Vec2;
    /// `G[(i, j)] = d g_i / d x_j`.
    fn gradient(&self, x: &Vec2) -> Mat2;
    fn center(&self) -> Vec2;
    fn support_radius(&self) -> f64;
}

/// `g(x) = (A x + b) * eta(|x - c| / R)`, supported in the disk of radius `2R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AffineCutoff {
    pub a: Mat2,
    pub b: Vec2,
    pub center: Vec2,
    pub radius: f64,
}

impl AffineCutoff {
    pub fn identity(center: Vec2, radius: f64) -> Self {
        AffineCutoff { a: Mat2::identity(), b: Vec2::zeros(), center, radius }
    }

    pub fn constant(b: Vec2, center: Vec2, radius: f64) -> Self {
        AffineCutoff { a: Mat2::zeros(), b, center, radius }
    }
}

impl VectorTestField for AffineCutoff {
    fn value(&self, x: &Vec2) -> Vec2 {
        let (eta, _) = radial_cutoff(x, &self.center, self.radius);
        (self.a * x + self.b) * eta
    }

    fn gradient(&self, x: &Vec2) -> Mat2 {
        let (eta, deta) = radial_cutoff(x, &self.center, self.radius);
        self.a * eta + (self.a * x + self.b) * deta.transpose()
    }

    fn center(&self) -> Vec2 {
        self.center
    }

    fn support_radius(&self) -> f64 {
        2.0 * self.radius
    }
}

/// Best ball found by [`DiscreteVarifold::density_ratio`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityWitness {
    pub value: f64,
    pub center: Vec2,
    pub radius: f64,
}

/// Limits on the candidate search of the density ratio.
#[derive(Debug, Clone, Copy)]
pub struct DensitySearch {
    pub max_pair_centers: usize,
    /// Cap on centres taken from nodes, segment midpoints and far pairs.
    pub max_node_centers: usize,
    pub refine_steps: usize,
}

impl Default for DensitySearch {
    fn default() -> Self {
        DensitySearch { max_pair_centers: 4096, max_node_centers: usize::MAX, refine_steps: 48 }
    }
}

fn quantize(p: &Vec2) -> (i64, i64) {
    ((p.x / MERGE_QUANTUM).round() as i64, (p.y / MERGE_QUANTUM).round() as i64)
}

fn seg_key(a: &Vec2, b: &Vec2) -> ((i64, i64), (i64, i64)) {
    let (ka, kb) = (quantize(a), quantize(b));
    if ka <= kb {
        (ka, kb)
    } else {
        (kb, ka)
    }
}

impl DiscreteVarifold {
    /// Unit-multiplicity lift of a network; coincident segments are merged.
    pub fn from_network(net: &CurveNetwork) -> Self {
        let segs: Vec<VarifoldSegment> = net
            .segments()
            .map(|(_, a, b)| VarifoldSegment { a: net.vertices()[a], b: net.vertices()[b], theta: 1 })
            .collect();
        let mut v = Self::merged(segs);
        v.atoms = Some(v.compute_atoms());
        v
    }

    /// Varifold from explicit segments, merging coincident ones; no adjacency.
    pub fn from_segments(segments: Vec<VarifoldSegment>) -> Result<Self> {
        for s in &segments {
            if s.theta == 0 || !(s.length() > 0.0) {
                return Err(Error::InvalidArgument("segments need theta >= 1 and positive length".into()));
            }
        }
        Ok(Self::merged(segments))
    }

    /// Computes node adjacency by endpoint position.
    pub fn with_adjacency(mut self) -> Self {
        self.atoms = Some(self.compute_atoms());
        self
    }

    fn merged(segments: Vec<VarifoldSegment>) -> Self {
        let mut index: HashMap<_, usize> = HashMap::new();
        let mut out: Vec<VarifoldSegment> = Vec::with_capacity(segments.len());
        for s in segments {
            let key = seg_key(&s.a, &s.b);
            match index.get(&key) {
                Some(&i) => out[i].theta += s.theta,
                None => {
                    index.insert(key, out.len());
                    out.push(s);
                }
            }
        }
        DiscreteVarifold { segments: out, atoms: None }
    }

    /// Curvature atoms `sum theta (tau_out - tau_in)` at every node.
    fn compute_atoms(&self) -> Vec<(Vec2, Vec2)> {
        let mut index: HashMap<(i64, i64), usize> = HashMap::new();
        let mut atoms: Vec<(Vec2, Vec2)> = Vec::new();
        let mut add = |p: Vec2, v: Vec2| {
            let k = quantize(&p);
            let i = *index.entry(k).or_insert_with(|| {
                atoms.push((p, Vec2::zeros()));
                atoms.len() - 1
            });
            atoms[i].1 += v;
        };
        for s in &self.segments {
            let tau = (s.b - s.a) / s.length() * s.theta as f64;
            add(s.a, tau);
            add(s.b, -tau);
        }
        atoms
    }

    pub fn segments(&self) -> &[VarifoldSegment] {
        &self.segments
    }

    pub fn has_adjacency(&self) -> bool {
        self.atoms.is_some()
    }

    /// Node positions with their curvature atoms; `dV(g) = -sum atom . g(node)`.
    pub fn atoms(&self) -> Result<&[(Vec2, Vec2)]> {
        self.atoms.as_deref().ok_or(Error::NoAdjacency)
    }

    pub fn is_empty(&self) -> bool {
        self.segments.is_empty()
    }

    pub fn scaled_multiplicity(&self, k: u32) -> Self {
        DiscreteVarifold {
            segments: self.segments.iter().map(|s| VarifoldSegment { theta: s.theta * k, ..*s }).collect(),
            atoms: self.atoms.as_ref().map(|a| a.iter().map(|(p, v)| (*p, v * k as f64)).collect()),
        }
    }

    pub fn mass(&self) -> f64 {
        self.segments.iter().map(VarifoldSegment::weight).sum()
    }

    /// Weight of the open ball `B_r(center)`.
    pub fn ball_mass(&self, center: &Vec2, r: f64) -> f64 {
        self.segments.iter().map(|s| s.theta as f64 * clip_length_in_disk(&s.a, &s.b, center, r)).sum()
    }

    /// Best `||V||(B_r(c)) / r` over radii through the nodes and their midpoints,
    /// swept outward with the set of segments straddling the circle.
    fn best_for_center(&self, c: &Vec2, nodes: &[Vec2]) -> (f64, f64) {
        let n = self.segments.len();
        let mut dmin = Vec::with_capacity(n);
        let mut dmax = Vec::with_capacity(n);
        for s in &self.segments {
            dmin.push(point_segment_distance(c, &s.a, &s.b));
            dmax.push((s.a - c).norm().max((s.b - c).norm()));
        }
        let mut by_min: Vec<usize> = (0..n).collect();
        by_min.sort_by(|&i, &j| dmin[i].total_cmp(&dmin[j]));
        let mut by_max: Vec<usize> = (0..n).collect();
        by_max.sort_by(|&i, &j| dmax[i].total_cmp(&dmax[j]));
        let mut radii: Vec<f64> = nodes.iter().map(|v| (v - c).norm()).filter(|&r| r > 0.0).collect();
        radii.sort_by(f64::total_cmp);
        radii.dedup();
        let mut sweep = Vec::with_capacity(2 * radii.len());
        for (k, &r) in radii.iter().enumerate() {
            sweep.push(r);
            if k + 1 < radii.len() {
                sweep.push(0.5 * (r + radii[k + 1]));
            }
        }
        let (mut im, mut ix) = (0, 0);
        let mut full = 0.0;
        let mut active: Vec<usize> = Vec::new();
        let mut best = (0.0, 0.0);
        for r in sweep {
            while ix < n && dmax[by_max[ix]] <= r {
                full += self.segments[by_max[ix]].weight();
                ix += 1;
            }
            while im < n && dmin[by_min[im]] < r {
                active.push(by_min[im]);
                im += 1;
            }
            active.retain(|&i| dmax[i] > r);
            let partial: f64 = active
                .iter()
                .map(|&i| {
                    let s = &self.segments[i];
                    s.theta as f64 * clip_length_in_disk(&s.a, &s.b, c, r)
                })
                .sum();
            let v = (full + partial) / r;
            if v > best.0 {
                best = (v, r);
            }
        }
        best
    }

    /// Lower bound for `sup ||V||(B_r(x)) / r` with the maximizing ball.
    pub fn density_ratio(&self) -> DensityWitness {
        self.density_ratio_with(&DensitySearch::default())
    }

    pub fn density_ratio_with(&self, search: &DensitySearch) -> DensityWitness {
        if self.segments.is_empty() {
            return DensityWitness { value: 0.0, center: Vec2::zeros(), radius: 0.0 };
        }
        let mut nodes: Vec<Vec2> = Vec::new();
        let mut seen = HashMap::new();
        for s in &self.segments {
            for p in [s.a, s.b] {
                if seen.insert(quantize(&p), ()).is_none() {
                    nodes.push(p);
                }
            }
        }
        let node_stride = nodes.len().div_ceil(search.max_node_centers.max(1)).max(1);
        let mut centers: Vec<Vec2> = nodes.iter().step_by(node_stride).copied().collect();
        centers.extend(self.segments.iter().step_by(node_stride).map(|s| 0.5 * (s.a + s.b)));
        let centroid = nodes.iter().fold(Vec2::zeros(), |a, b| a + b) / nodes.len() as f64;
        centers.push(centroid);
        for a in nodes.iter().step_by(node_stride) {
            let far = nodes.iter().max_by(|p, q| (*p - a).norm_squared().total_cmp(&(*q - a).norm_squared())).unwrap();
            centers.push(0.5 * (a + far));
        }
        let n = nodes.len();
        let pairs = n * (n - 1) / 2;
        let stride = pairs.div_ceil(search.max_pair_centers.max(1)).max(1);
        let mut k = 0usize;
        'outer: for i in 0..n {
            for j in i + 1..n {
                if k.is_multiple_of(stride) {
                    centers.push(0.5 * (nodes[i] + nodes[j]));
                    if centers.len() > 4 * n + 1 + search.max_pair_centers {
                        break 'outer;
                    }
                }
                k += 1;
            }
        }
        let scores: Vec<(f64, f64)> = centers.par_iter().map(|c| self.best_for_center(c, &nodes)).collect();
        let (mut bi, mut best) = (0, scores[0]);
        for (i, s) in scores.iter().enumerate() {
            if s.0 > best.0 {
                bi = i;
                best = *s;
            }
        }
        let (mut value, mut radius, mut center) = (best.0, best.1, centers[bi]);
        // Dyadic pattern search around the best ball.
        let mut h = 0.25 * radius;
        for _ in 0..search.refine_steps {
            let mut improved = false;
            for (dx, dy, dr) in [
                (1.0, 0.0, 0.0),
                (-1.0, 0.0, 0.0),
                (0.0, 1.0, 0.0),
                (0.0, -1.0, 0.0),
                (0.0, 0.0, 1.0),
                (0.0, 0.0, -1.0),
            ] {
                let c = center + vec2(dx * h, dy * h);
                let r = radius + dr * h;
                if r <= 0.0 {
                    continue;
                }
                let v = self.ball_mass(&c, r) / r;
                if v > value {
                    (value, center, radius) = (v, c, r);
                    improved = true;
                }
            }
            if !improved {
                h *= 0.5;
            }
        }
        DensityWitness { value, center, radius }
    }

    /// `dV(g) = sum theta int tr(S grad g) ds` by Gauss-Legendre on each segment.
    pub fn first_variation(&self, g: &dyn VectorTestField) -> f64 {
        let (xs, ws) = gauss_legendre(6);
        let (c, rad) = (g.center(), g.support_radius());
        self.segments
            .iter()
            .filter(|s| point_segment_distance(&c, &s.a, &s.b) < rad)
            .map(|s| {
                let d = s.b - s.a;
                let len = d.norm();
                let tau = d / len;
                let sum: f64 = xs
                    .iter()
                    .zip(ws)
                    .map(|(x, w)| {
                        let p = s.a + d * (0.5 * (x + 1.0));
                        w * tau.dot(&(g.gradient(&p) * tau))
                    })
                    .sum();
                s.theta as f64 * 0.5 * len * sum
            })
            .sum()
    }

    /// `||dV||(R^2)`: the sum of atom norms.
    pub fn total_first_variation(&self) -> Result<f64> {
        Ok(self.atoms()?.iter().map(|(_, a)| a.norm()).sum())
    }

    /// Smoothed curvature `-(Phi * dV)(x) / ((Phi * ||V||)(x) + eps)` with a
    /// Gaussian of width `eps` truncated at `6 eps`.
    pub fn smoothed_curvature(&self, x: &Vec2, eps: f64) -> Result<Vec2> {
        if !(eps > 0.0) {
            return Err(Error::InvalidArgument(format!("eps {eps} must be positive")));
        }
        let atoms = self.atoms()?;
        let cut = 6.0 * eps;
        let norm = 1.0 / (2.0 * PI * eps * eps * (1.0 - (-18.0f64).exp()));
        let kernel = |z: Vec2| {
            let d2 = z.norm_squared();
            if d2 >= cut * cut {
                0.0
            } else {
                norm * (-d2 / (2.0 * eps * eps)).exp()
            }
        };
        let num = atoms.iter().fold(Vec2::zeros(), |acc, (p, a)| acc + a * kernel(x - p));
        let (xs, ws) = gauss_legendre(8);
        let mut den = 0.0;
        for s in &self.segments {
            if point_segment_distance(x, &s.a, &s.b) >= cut {
                continue;
            }
            let d = s.b - s.a;
            let len = d.norm();
            let pieces = (len / eps).ceil().max(1.0) as usize;
            let h = 1.0 / pieces as f64;
            let mut sum = 0.0;
            for k in 0..pieces {
                for (xi, w) in xs.iter().zip(ws) {
                    let t = (k as f64 + 0.5 * (xi + 1.0)) * h;
                    sum += w * 0.5 * h * kernel(x - (s.a + d * t));
                }
            }
            den += s.theta as f64 * len * sum;
        }
        Ok(num / (den + eps))
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("ax,ay,bx,by,theta\n");
        for s in &self.segments {
            writeln!(out, "{:?},{:?},{:?},{:?},{}", s.a.x, s.a.y, s.b.x, s.b.y, s.theta).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        match lines.next().map(str::trim) {
            Some("ax,ay,bx,by,theta") => {}
            other => return Err(Error::Parse(format!("bad varifold header {other:?}"))),
        }
        let mut segs = Vec::new();
        for (k, line) in lines.enumerate().filter(|(_, l)| !l.trim().is_empty()) {
            let f: Vec<&str> = line.split(',').map(str::trim).collect();
            if f.len() != 5 {
                return Err(Error::Parse(format!("line {}: expected 5 fields", k + 2)));
            }
            let num = |i: usize| f[i].parse::<f64>().map_err(|e| Error::Parse(format!("line {}: {e}", k + 2)));
            let theta = f[4].parse::<u32>().map_err(|e| Error::Parse(format!("line {}: {e}", k + 2)))?;
            segs.push(VarifoldSegment { a: vec2(num(0)?, num(1)?), b: vec2(num(2)?, num(3)?), theta });
        }
        Self::from_segments(segs)
    }
}

/// `sum |h|^2 * dual length` over interior vertices of every curve.
///
/// Coincident curves contribute once each, which weights by multiplicity.
pub fn l2_curvature(net: &CurveNetwork) -> f64 {
    let mut total = 0.0;
    for (ci, c) in net.curves().iter().enumerate() {
        let n = c.ids.len();
        let range = if c.closed { 0..n } else { 1..n.saturating_sub(1) };
        for pos in range {
            if let Ok((h, dual)) = net.curvature_at(ci, pos) {
                total += h.norm_squared() * dual;
            }
        }
    }
    total
}

/// Density ratio against total variation, and against `sqrt(mass * int |h|^2)`
/// when every curve is closed (no junction or end atoms).
pub fn verify_density_bounds(v: &DiscreteVarifold, net: &CurveNetwork) -> Result<Vec<EstimateReport>> {
    let dw = v.density_ratio();
    let tv = v.total_first_variation()?;
    let witness = serde_json::json!({
        "center": [dw.center.x, dw.center.y],
        "radius": dw.radius,
    });
    let slack = 1e-9 * tv.max(1.0);
    let first = EstimateReport::new("density_vs_total_variation", dw.value, tv, slack).witness("ball", witness.clone());
    let second = if net.curves().iter().all(|c| c.closed) && !net.is_empty() {
        let mass = v.mass();
        let h2 = l2_curvature(net);
        EstimateReport::new("density_vs_curvature", dw.value, (mass * h2).sqrt(), slack)
            .constant("mass", mass)
            .constant("l2_curvature", h2)
            .witness("ball", witness)
    } else {
        EstimateReport::not_applicable("density_vs_curvature", "curvature has atoms at junctions or curve ends")
    };
    Ok(vec![first, second])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{circle, doubled_segment, line, line_network, square, steiner_triod};

    fn unit_segment() -> DiscreteVarifold {
        DiscreteVarifold::from_network(&line_network(&[vec2(0.0, 0.0), vec2(1.0, 0.0)]).unwrap())
    }

    #[test]
    fn mass_and_merging() {
        let sq = DiscreteVarifold::from_network(&square(1.0, Vec2::zeros()));
        assert_eq!(sq.segments().len(), 4);
        assert!((sq.mass() - 4.0).abs() < 1e-15);
        let d = DiscreteVarifold::from_network(&doubled_segment());
        assert_eq!(d.segments().len(), 1);
        assert_eq!(d.segments()[0].theta, 2);
        assert_eq!(d.mass(), 2.0);
        let c = DiscreteVarifold::from_network(&circle(1.0, 256, Vec2::zeros()));
        let exact = 2.0 * 256.0 * (PI / 256.0).sin();
        assert!((c.mass() - exact).abs() < 1e-12);
        assert!((c.mass() - 2.0 * PI).abs() < 1e-3);
    }

    #[test]
    fn ball_mass_cases() {
        let s = DiscreteVarifold::from_network(&line(1.0, 1));
        assert!((s.ball_mass(&Vec2::zeros(), 0.25) - 0.5).abs() < 1e-15);
        let c = DiscreteVarifold::from_network(&circle(1.0, 256, Vec2::zeros()));
        assert_eq!(c.ball_mass(&Vec2::zeros(), 2.0), c.mass());
        assert_eq!(c.ball_mass(&Vec2::zeros(), 0.5), 0.0);
    }

    #[test]
    fn density_ratio_cases() {
        let s = unit_segment().density_ratio();
        assert!((s.value - 2.0).abs() < 1e-12, "{s:?}");
        let d = DiscreteVarifold::from_network(&doubled_segment()).density_ratio();
        assert!((d.value - 4.0).abs() < 1e-12);
        let c = DiscreteVarifold::from_network(&circle(1.0, 256, Vec2::zeros())).density_ratio();
        assert!((c.value - 2.0 * PI).abs() < 0.01 * 2.0 * PI, "{c:?}");
        assert!(c.center.norm() < 1e-3);
        assert!((c.radius - 1.0).abs() < 1e-2);
    }

    #[test]
    fn doubling_theta_doubles_density() {
        let v = DiscreteVarifold::from_network(&steiner_triod(1.0, 5));
        let a = v.density_ratio().value;
        let b = v.scaled_multiplicity(2).density_ratio().value;
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn first_variation_cases() {
        let c = DiscreteVarifold::from_network(&circle(1.0, 256, Vec2::zeros()));
        let id = AffineCutoff::identity(Vec2::zeros(), 3.0);
        assert!((c.first_variation(&id) - c.mass()).abs() < 1e-10);
        let k = AffineCutoff::constant(vec2(0.3, -0.7), Vec2::zeros(), 3.0);
        assert!(c.first_variation(&k).abs() < 1e-10);
        let g = AffineCutoff { a: Mat2::new(1.0, 0.0, 0.0, 0.0), b: Vec2::zeros(), center: Vec2::zeros(), radius: 5.0 };
        assert!((unit_segment().first_variation(&g) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn first_variation_matches_atoms() {
        let v = DiscreteVarifold::from_network(&circle(0.8, 40, vec2(0.1, 0.2)));
        let g =
            AffineCutoff { a: Mat2::new(0.3, -1.1, 0.7, 0.2), b: vec2(0.4, -0.2), center: vec2(0.5, 0.0), radius: 0.4 };
        let by_atoms: f64 = -v.atoms().unwrap().iter().map(|(p, a)| a.dot(&g.value(p))).sum::<f64>();
        assert!((v.first_variation(&g) - by_atoms).abs() < 1e-6);
    }

    #[test]
    fn total_variation_cases() {
        let chain = DiscreteVarifold::from_network(&line(2.0, 7));
        assert!((chain.total_first_variation().unwrap() - 2.0).abs() < 1e-12);
        let n = 64.0;
        let poly = DiscreteVarifold::from_network(&circle(1.0, 64, Vec2::zeros()));
        assert!((poly.total_first_variation().unwrap() - n * 2.0 * (PI / n).sin()).abs() < 1e-12);
        let tri = DiscreteVarifold::from_network(&steiner_triod(1.0, 4));
        assert!((tri.total_first_variation().unwrap() - 3.0).abs() < 1e-12);
        let raw = DiscreteVarifold::from_segments(unit_segment().segments().to_vec()).unwrap();
        assert!(matches!(raw.total_first_variation(), Err(Error::NoAdjacency)));
    }

    #[test]
    fn l2_curvature_cases() {
        assert_eq!(l2_curvature(&line(1.0, 8)), 0.0);
        let c1 = l2_curvature(&circle(1.0, 256, Vec2::zeros()));
        assert!((c1 - 2.0 * PI).abs() < 0.01 * 2.0 * PI);
        let c2 = l2_curvature(&circle(2.0, 256, Vec2::zeros()));
        assert!((c2 - PI).abs() < 0.01 * PI);
    }

    #[test]
    fn density_bound_witnesses() {
        let seg = line_network(&[vec2(0.0, 0.0), vec2(1.0, 0.0)]).unwrap();
        let r = verify_density_bounds(&DiscreteVarifold::from_network(&seg), &seg).unwrap();
        assert!((r[0].lhs - 2.0).abs() < 1e-12 && (r[0].rhs - 2.0).abs() < 1e-12);
        assert!(r[0].pass && !r[1].applicable);

        let c = circle(1.0, 256, Vec2::zeros());
        let r = verify_density_bounds(&DiscreteVarifold::from_network(&c), &c).unwrap();
        assert!(r.iter().all(|x| x.pass && x.applicable));
        assert!((r[1].rhs - 2.0 * PI).abs() < 0.02 * 2.0 * PI);

        let t = steiner_triod(1.0, 6);
        let r = verify_density_bounds(&DiscreteVarifold::from_network(&t), &t).unwrap();
        assert!(r[0].pass && (r[0].rhs - 3.0).abs() < 1e-12 && r[0].lhs <= r[0].rhs);
        assert!(!r[1].applicable);
    }

    #[test]
    fn smoothed_curvature_cases() {
        let chain = DiscreteVarifold::from_network(&line(2.0, 200));
        let h = chain.smoothed_curvature(&vec2(0.013, 0.0), 0.01).unwrap();
        assert!(h.norm() <= 1e-8);
        let v = DiscreteVarifold::from_network(&circle(1.0, 2048, Vec2::zeros()));
        let x = vec2(0.6, 0.8);
        let h = v.smoothed_curvature(&x, 0.01).unwrap();
        assert!((h.norm() - 1.0).abs() < 0.05, "{h}");
        assert!((h.normalize() + x).norm() < 1e-3);
        assert_eq!(v.smoothed_curvature(&vec2(0.0, 0.0), 0.01).unwrap(), Vec2::zeros());
        assert!(v.smoothed_curvature(&x, 0.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let v = DiscreteVarifold::from_network(&doubled_segment());
        let back = DiscreteVarifold::from_csv(&v.to_csv()).unwrap();
        assert_eq!(back.segments(), v.segments());
        assert!(!back.has_adjacency());
        assert!(DiscreteVarifold::from_csv("a,b\n").is_err());
    }
}
