//! Gauss–Legendre rules and a small adaptive cubature on rectangles.

use std::sync::LazyLock;

const MAX_ORDER: usize = 24;

static RULES: LazyLock<Vec<(Vec<f64>, Vec<f64>)>> = LazyLock::new(|| (0..=MAX_ORDER).map(compute_rule).collect());

fn compute_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 0 {
        return (vec![], vec![]);
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { x } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (x * pn - pm) / (x * x - 1.0);
            let dx = pn / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

/// Nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(order: usize) -> (&'static [f64], &'static [f64]) {
    assert!((1..=MAX_ORDER).contains(&order), "unsupported order {order}");
    let (n, w) = &RULES[order];
    (n, w)
}

/// Integrates `f` over `[a, b]` with `pieces` equal panels of the given order.
pub fn integrate_1d(f: impl Fn(f64) -> f64, a: f64, b: f64, order: usize, pieces: usize) -> f64 {
    let (xs, ws) = gauss_legendre(order);
    let h = (b - a) / pieces as f64;
    let mut total = 0.0;
    for p in 0..pieces {
        let lo = a + p as f64 * h;
        let mid = lo + 0.5 * h;
        let mut s = 0.0;
        for (x, w) in xs.iter().zip(ws) {
            s += w * f(mid + 0.5 * h * x);
        }
        total += 0.5 * h * s;
    }
    total
}

/// Gauss nodes and weights on `[a, b]`, split at the breakpoints that fall
/// inside it and then into `pieces` equal panels per sub-interval.
pub fn panel_nodes(a: f64, b: f64, breaks: &[f64], order: usize, pieces: usize) -> Vec<(f64, f64)> {
    let mut cuts = vec![a];
    let mut inner: Vec<f64> = breaks.iter().copied().filter(|&x| x > a && x < b).collect();
    inner.sort_by(f64::total_cmp);
    inner.dedup();
    cuts.extend(inner);
    cuts.push(b);
    let (xs, ws) = gauss_legendre(order);
    let mut out = Vec::new();
    for w in cuts.windows(2) {
        let h = (w[1] - w[0]) / pieces as f64;
        for p in 0..pieces {
            let mid = w[0] + (p as f64 + 0.5) * h;
            for (x, wt) in xs.iter().zip(ws) {
                out.push((mid + 0.5 * h * x, 0.5 * h * wt));
            }
        }
    }
    out
}

fn cell_rule(f: &impl Fn(f64, f64) -> f64, x0: f64, x1: f64, y0: f64, y1: f64, order: usize) -> f64 {
    let (xs, ws) = gauss_legendre(order);
    let (hx, hy) = (0.5 * (x1 - x0), 0.5 * (y1 - y0));
    let (cx, cy) = (x0 + hx, y0 + hy);
    let mut s = 0.0;
    for (xi, wi) in xs.iter().zip(ws) {
        for (yj, wj) in xs.iter().zip(ws) {
            s += wi * wj * f(cx + hx * xi, cy + hy * yj);
        }
    }
    s * hx * hy
}

/// Adaptive tensor Gauss cubature over a rectangle.
///
/// A cell is accepted when the order-5 result on the cell agrees with the sum
/// over its four children to within `tol * (cell area / total area)`.
pub fn adaptive_2d(f: impl Fn(f64, f64) -> f64, x0: f64, x1: f64, y0: f64, y1: f64, tol: f64, max_depth: usize) -> f64 {
    let area = (x1 - x0) * (y1 - y0);
    // Seed with a uniform 8x8 partition so narrow features are not skipped.
    let seeds = 8;
    let (dx, dy) = ((x1 - x0) / seeds as f64, (y1 - y0) / seeds as f64);
    let mut total = 0.0;
    for i in 0..seeds {
        for j in 0..seeds {
            let (a0, b0) = (x0 + i as f64 * dx, y0 + j as f64 * dy);
            let coarse = cell_rule(&f, a0, a0 + dx, b0, b0 + dy, 5);
            total += refine(&f, a0, a0 + dx, b0, b0 + dy, coarse, tol, area, max_depth);
        }
    }
    total
}

#[allow(clippy::too_many_arguments)]
fn refine(
    f: &impl Fn(f64, f64) -> f64,
    x0: f64,
    x1: f64,
    y0: f64,
    y1: f64,
    coarse: f64,
    tol: f64,
    area: f64,
    depth: usize,
) -> f64 {
    let (xm, ym) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let kids = [(x0, xm, y0, ym), (xm, x1, y0, ym), (x0, xm, ym, y1), (xm, x1, ym, y1)];
    let vals: Vec<f64> = kids.iter().map(|&(a, b, c, d)| cell_rule(f, a, b, c, d, 5)).collect();
    let fine: f64 = vals.iter().sum();
    let local_tol = tol * (x1 - x0) * (y1 - y0) / area;
    if depth == 0 || (fine - coarse).abs() <= local_tol {
        return fine;
    }
    kids.iter().zip(vals).map(|(&(a, b, c, d), v)| refine(f, a, b, c, d, v, tol, area, depth - 1)).sum()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn panel_nodes_integrate_kinks() {
        let nodes = panel_nodes(-1.0, 2.0, &[0.0, 5.0], 4, 2);
        let s: f64 = nodes.iter().map(|(x, w)| w * x.abs()).sum();
        assert!((s - 2.5).abs() < 1e-14);
        assert_eq!(nodes.len(), 2 * 2 * 4);
    }

    #[test]
    fn gauss_rules_integrate_polynomials_exactly() {
        for n in 1..=12 {
            let (xs, ws) = gauss_legendre(n);
            let wsum: f64 = ws.iter().sum();
            assert!((wsum - 2.0).abs() < 1e-13, "order {n}");
            let deg = 2 * n - 1;
            let s: f64 = xs.iter().zip(ws).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            // x^(deg-1) has even degree: integral 2/deg
            assert!((s - 2.0 / deg as f64).abs() < 1e-13, "order {n}");
        }
    }

    #[test]
    fn adaptive_disk_area() {
        let v = adaptive_2d(|x, y| if x * x + y * y < 1.0 { 1.0 } else { 0.0 }, -1.0, 1.0, -1.0, 1.0, 1e-4, 8);
        assert!((v - std::f64::consts::PI).abs() < 2e-3);
    }
}
