//! Planar vector helpers shared by every module.

use nalgebra::{Matrix2, Vector2};

pub type Vec2 = Vector2<f64>;
pub type Mat2 = Matrix2<f64>;

#[inline]
pub fn vec2(x: f64, y: f64) -> Vec2 {
    Vec2::new(x, y)
}

#[inline]
pub fn cross(a: &Vec2, b: &Vec2) -> f64 {
    a.x * b.y - a.y * b.x
}

/// Counter-clockwise rotation by 90 degrees.
#[inline]
pub fn left_normal(t: &Vec2) -> Vec2 {
    Vec2::new(-t.y, t.x)
}

pub fn rotation(angle: f64) -> Mat2 {
    let (s, c) = angle.sin_cos();
    Mat2::new(c, -s, s, c)
}

pub fn point_segment_distance(p: &Vec2, a: &Vec2, b: &Vec2) -> f64 {
    let d = b - a;
    let len2 = d.norm_squared();
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&d) / len2).clamp(0.0, 1.0);
    (p - (a + d * s)).norm()
}

/// Length of the part of segment `[a, b]` inside the disk of radius `r`.
///
/// Open and closed disks give the same value since a segment meets a circle
/// in at most two points.
pub fn clip_length_in_disk(a: &Vec2, b: &Vec2, center: &Vec2, r: f64) -> f64 {
    let d = b - a;
    let len = d.norm();
    let r2 = r * r;
    let fa = (a - center).norm_squared();
    let fb = (b - center).norm_squared();
    if fa <= r2 && fb <= r2 {
        return len;
    }
    if len == 0.0 {
        return 0.0;
    }
    // Measure from the endpoint nearer the centre so small disks stay accurate.
    let (p, tau) = if fa <= fb { (*a, d / len) } else { (*b, -d / len) };
    let w = center - p;
    let foot = w.dot(&tau);
    let perp = cross(&tau, &w);
    let h2 = r2 - perp * perp;
    if h2 <= 0.0 {
        return 0.0;
    }
    let half = h2.sqrt();
    ((foot + half).min(len) - (foot - half).max(0.0)).max(0.0)
}

/// Closed-segment intersection test (touching counts).
pub fn segments_intersect(a: &Vec2, b: &Vec2, c: &Vec2, d: &Vec2) -> bool {
    let o1 = cross(&(b - a), &(c - a));
    let o2 = cross(&(b - a), &(d - a));
    let o3 = cross(&(d - c), &(a - c));
    let o4 = cross(&(d - c), &(b - c));
    if ((o1 > 0.0 && o2 < 0.0) || (o1 < 0.0 && o2 > 0.0)) && ((o3 > 0.0 && o4 < 0.0) || (o3 < 0.0 && o4 > 0.0)) {
        return true;
    }
    let on = |p: &Vec2, q: &Vec2, r: &Vec2, o: f64| {
        o == 0.0 && r.x >= p.x.min(q.x) && r.x <= p.x.max(q.x) && r.y >= p.y.min(q.y) && r.y <= p.y.max(q.y)
    };
    on(a, b, c, o1) || on(a, b, d, o2) || on(c, d, a, o3) || on(c, d, b, o4)
}

fn bump_exp(t: f64) -> (f64, f64, f64) {
    if t <= 0.0 {
        return (0.0, 0.0, 0.0);
    }
    let f = (-1.0 / t).exp();
    let t2 = t * t;
    (f, f / t2, f * (1.0 - 2.0 * t) / (t2 * t2))
}

/// Smooth cutoff with value 1 on `[0, 1]` and 0 on `[2, inf)`.
///
/// Returns the value and its first two derivatives.
pub fn cutoff(s: f64) -> (f64, f64, f64) {
    if s <= 1.0 {
        return (1.0, 0.0, 0.0);
    }
    if s >= 2.0 {
        return (0.0, 0.0, 0.0);
    }
    let (a, fa1, fa2) = bump_exp(2.0 - s);
    let (b, fb1, fb2) = bump_exp(s - 1.0);
    // d/ds of a = f(2 - s) flips the sign of odd derivatives.
    let (a1, a2) = (-fa1, fa2);
    let (b1, b2) = (fb1, fb2);
    let den = a + b;
    let num1 = a1 * b - a * b1;
    let val = a / den;
    let d1 = num1 / (den * den);
    let d2 = (a2 * b - a * b2) / (den * den) - 2.0 * num1 * (a1 + b1) / (den * den * den);
    (val, d1, d2)
}

/// Radial cutoff `eta(|x - c| / r)` with its spatial gradient.
pub fn radial_cutoff(x: &Vec2, c: &Vec2, r: f64) -> (f64, Vec2) {
    let d = x - c;
    let rho = d.norm();
    let (v, d1, _) = cutoff(rho / r);
    if d1 == 0.0 || rho == 0.0 {
        return (v, Vec2::zeros());
    }
    (v, d * (d1 / (r * rho)))
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BBox {
    pub min: Vec2,
    pub max: Vec2,
}

impl BBox {
    pub fn empty() -> Self {
        BBox { min: Vec2::repeat(f64::INFINITY), max: Vec2::repeat(f64::NEG_INFINITY) }
    }

    pub fn is_empty(&self) -> bool {
        self.min.x > self.max.x || self.min.y > self.max.y
    }

    pub fn include(&mut self, p: &Vec2) {
        self.min = self.min.inf(p);
        self.max = self.max.sup(p);
    }

    pub fn union(&self, o: &BBox) -> BBox {
        BBox { min: self.min.inf(&o.min), max: self.max.sup(&o.max) }
    }

    pub fn inflate(&self, m: f64) -> BBox {
        BBox { min: self.min - Vec2::repeat(m), max: self.max + Vec2::repeat(m) }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn clip_midpoint_ball() {
        let a = vec2(0.0, 0.0);
        let b = vec2(1.0, 0.0);
        let l = clip_length_in_disk(&a, &b, &vec2(0.5, 0.0), 0.25);
        assert!((l - 0.5).abs() < 1e-15);
        assert_eq!(clip_length_in_disk(&a, &b, &vec2(0.5, 0.0), 0.5), 1.0);
        assert_eq!(clip_length_in_disk(&a, &b, &vec2(0.5, 2.0), 0.5), 0.0);
    }

    #[test]
    fn cutoff_derivatives_match_differences() {
        for &s in &[1.1, 1.3, 1.5, 1.77, 1.95] {
            let h = 1e-5;
            let (_, d1, d2) = cutoff(s);
            let fd1 = (cutoff(s + h).0 - cutoff(s - h).0) / (2.0 * h);
            let fd2 = (cutoff(s + h).1 - cutoff(s - h).1) / (2.0 * h);
            assert!((d1 - fd1).abs() < 1e-6, "{s}: {d1} vs {fd1}");
            assert!((d2 - fd2).abs() < 1e-5, "{s}: {d2} vs {fd2}");
        }
        assert_eq!(cutoff(0.5).0, 1.0);
        assert_eq!(cutoff(2.5).0, 0.0);
        assert!((cutoff(1.5).0 - 0.5).abs() < 1e-14);
    }

    #[test]
    fn crossing_segments() {
        let p = |x, y| vec2(x, y);
        assert!(segments_intersect(&p(0., 0.), &p(1., 1.), &p(0., 1.), &p(1., 0.)));
        assert!(!segments_intersect(&p(0., 0.), &p(1., 0.), &p(0., 1.), &p(1., 1.)));
        assert!(segments_intersect(&p(0., 0.), &p(1., 0.), &p(1., 0.), &p(2., 1.)));
    }
}
