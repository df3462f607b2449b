use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::ForcingField;
use crate::error::{Error, Result};
use crate::geom::{vec2, BBox, Mat2, Vec2};

/// Regular space-time lattice; nodes at `x0 + i dx`, `y0 + j dy`, `t0 + k dt`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridLattice {
    pub nx: usize,
    pub ny: usize,
    pub nt: usize,
    pub x0: f64,
    pub y0: f64,
    pub t0: f64,
    pub dx: f64,
    pub dy: f64,
    pub dt: f64,
}

impl GridLattice {
    /// Square lattice of `n x n` nodes covering `[-half, half]^2` with `nt`
    /// time levels on `[0, t_end]` (a single level means constant in time).
    pub fn square(half: f64, n: usize, nt: usize, t_end: f64) -> Self {
        let h = 2.0 * half / (n - 1) as f64;
        GridLattice {
            nx: n,
            ny: n,
            nt,
            x0: -half,
            y0: -half,
            t0: 0.0,
            dx: h,
            dy: h,
            dt: if nt > 1 { t_end / (nt - 1) as f64 } else { 0.0 },
        }
    }

    pub fn len(&self) -> usize {
        self.nx * self.ny * self.nt
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn index(&self, i: usize, j: usize, k: usize) -> usize {
        (k * self.ny + j) * self.nx + i
    }

    pub fn node(&self, i: usize, j: usize, k: usize) -> (Vec2, f64) {
        (vec2(self.x0 + i as f64 * self.dx, self.y0 + j as f64 * self.dy), self.t0 + k as f64 * self.dt)
    }

    pub fn bbox(&self) -> BBox {
        BBox {
            min: vec2(self.x0, self.y0),
            max: vec2(self.x0 + (self.nx - 1) as f64 * self.dx, self.y0 + (self.ny - 1) as f64 * self.dy),
        }
    }

    pub fn horizon(&self) -> Option<f64> {
        (self.nt > 1).then(|| self.t0 + (self.nt - 1) as f64 * self.dt)
    }

    pub fn time_nodes(&self) -> Vec<f64> {
        if self.nt > 1 {
            (0..self.nt).map(|k| self.t0 + k as f64 * self.dt).collect()
        } else {
            vec![]
        }
    }

    fn check(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 || self.nt < 1 {
            return Err(Error::Grid(format!("lattice {}x{}x{} too small", self.nx, self.ny, self.nt)));
        }
        if !(self.dx > 0.0 && self.dy > 0.0) || (self.nt > 1 && !(self.dt > 0.0)) {
            return Err(Error::Grid("lattice spacings must be positive".into()));
        }
        Ok(())
    }
}

/// Field sampled on a lattice: bilinear in space, linear in time, zero
/// outside the lattice box and time range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridField {
    pub lattice: GridLattice,
    pub values: Vec<[f64; 2]>,
    /// Optional `[gxx, gxy, gyx, gyy]` per node; otherwise gradients come
    /// from finite differences of the values.
    #[serde(default)]
    pub gradients: Option<Vec<[f64; 4]>>,
}

fn locate(s: f64, n: usize) -> Option<(usize, f64)> {
    if !(s >= 0.0 && s <= (n - 1) as f64) {
        return None;
    }
    let r = s.round();
    let s = if (s - r).abs() < 1e-9 { r } else { s };
    let i = (s.floor() as usize).min(n - 2);
    Some((i, s - i as f64))
}

impl GridField {
    pub fn new(lattice: GridLattice, values: Vec<[f64; 2]>, gradients: Option<Vec<[f64; 4]>>) -> Result<Self> {
        let g = GridField { lattice, values, gradients };
        g.check()?;
        Ok(g)
    }

    pub(crate) fn check(&self) -> Result<()> {
        self.lattice.check()?;
        let n = self.lattice.len();
        if self.values.len() != n {
            return Err(Error::Grid(format!("{} values for {} nodes", self.values.len(), n)));
        }
        if let Some(g) = &self.gradients {
            if g.len() != n {
                return Err(Error::Grid(format!("{} gradients for {} nodes", g.len(), n)));
            }
        }
        if self.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Grid("non-finite value".into()));
        }
        Ok(())
    }

    pub fn sample_from(field: &ForcingField, lattice: GridLattice) -> Result<Self> {
        lattice.check()?;
        let mut values = Vec::with_capacity(lattice.len());
        let mut grads = Vec::with_capacity(lattice.len());
        for k in 0..lattice.nt {
            for j in 0..lattice.ny {
                for i in 0..lattice.nx {
                    let (p, t) = lattice.node(i, j, k);
                    let (v, g) = field.sample(&p, t);
                    values.push([v.x, v.y]);
                    grads.push([g[(0, 0)], g[(0, 1)], g[(1, 0)], g[(1, 1)]]);
                }
            }
        }
        Self::new(lattice, values, Some(grads))
    }

    fn node_value(&self, i: usize, j: usize, k: usize) -> Vec2 {
        let v = self.values[self.lattice.index(i, j, k)];
        vec2(v[0], v[1])
    }

    fn node_gradient(&self, i: usize, j: usize, k: usize) -> Mat2 {
        let l = &self.lattice;
        if let Some(g) = &self.gradients {
            let g = g[l.index(i, j, k)];
            return Mat2::new(g[0], g[1], g[2], g[3]);
        }
        let diff = |lo: Vec2, hi: Vec2, span: f64| (hi - lo) / span;
        let dx = if i == 0 {
            diff(self.node_value(0, j, k), self.node_value(1, j, k), l.dx)
        } else if i == l.nx - 1 {
            diff(self.node_value(i - 1, j, k), self.node_value(i, j, k), l.dx)
        } else {
            diff(self.node_value(i - 1, j, k), self.node_value(i + 1, j, k), 2.0 * l.dx)
        };
        let dy = if j == 0 {
            diff(self.node_value(i, 0, k), self.node_value(i, 1, k), l.dy)
        } else if j == l.ny - 1 {
            diff(self.node_value(i, j - 1, k), self.node_value(i, j, k), l.dy)
        } else {
            diff(self.node_value(i, j - 1, k), self.node_value(i, j + 1, k), 2.0 * l.dy)
        };
        Mat2::new(dx.x, dy.x, dx.y, dy.y)
    }

    pub fn sample(&self, x: &Vec2, t: f64) -> (Vec2, Mat2) {
        let zero = (Vec2::zeros(), Mat2::zeros());
        let l = &self.lattice;
        let times: [(usize, f64); 2] = if l.nt == 1 {
            [(0, 1.0), (0, 0.0)]
        } else {
            match locate((t - l.t0) / l.dt, l.nt) {
                Some((k, a)) => [(k, 1.0 - a), (k + 1, a)],
                None => return zero,
            }
        };
        let (Some((i, a)), Some((j, b))) = (locate((x.x - l.x0) / l.dx, l.nx), locate((x.y - l.y0) / l.dy, l.ny))
        else {
            return zero;
        };
        let corners = [
            (i, j, (1.0 - a) * (1.0 - b)),
            (i + 1, j, a * (1.0 - b)),
            (i, j + 1, (1.0 - a) * b),
            (i + 1, j + 1, a * b),
        ];
        let mut v = Vec2::zeros();
        let mut g = Mat2::zeros();
        for &(k, wt) in &times {
            if wt == 0.0 {
                continue;
            }
            for &(ci, cj, w) in &corners {
                if w == 0.0 {
                    continue;
                }
                v += self.node_value(ci, cj, k) * (w * wt);
                g += self.node_gradient(ci, cj, k) * (w * wt);
            }
        }
        (v, g)
    }

    /// CSV body `t,x,y,ux,uy[,gxx,gxy,gyx,gyy]`, time slowest and x fastest.
    pub fn to_csv(&self) -> String {
        let l = &self.lattice;
        let mut out = String::from("t,x,y,ux,uy");
        if self.gradients.is_some() {
            out.push_str(",gxx,gxy,gyx,gyy");
        }
        out.push('\n');
        for k in 0..l.nt {
            for j in 0..l.ny {
                for i in 0..l.nx {
                    let (p, t) = l.node(i, j, k);
                    let n = l.index(i, j, k);
                    let v = self.values[n];
                    write!(out, "{t:?},{:?},{:?},{:?},{:?}", p.x, p.y, v[0], v[1]).unwrap();
                    if let Some(g) = &self.gradients {
                        let g = g[n];
                        write!(out, ",{:?},{:?},{:?},{:?}", g[0], g[1], g[2], g[3]).unwrap();
                    }
                    out.push('\n');
                }
            }
        }
        out
    }

    /// Reads the CSV body for a lattice given separately.
    pub fn from_csv(text: &str, lattice: GridLattice) -> Result<Self> {
        lattice.check()?;
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header: Vec<&str> =
            lines.next().ok_or_else(|| Error::Grid("empty grid file".into()))?.split(',').map(str::trim).collect();
        let with_grad = match header.as_slice() {
            ["t", "x", "y", "ux", "uy"] => false,
            ["t", "x", "y", "ux", "uy", "gxx", "gxy", "gyx", "gyy"] => true,
            _ => return Err(Error::Grid(format!("unexpected header {header:?}"))),
        };
        let width = if with_grad { 9 } else { 5 };
        let mut values = Vec::with_capacity(lattice.len());
        let mut grads = Vec::with_capacity(if with_grad { lattice.len() } else { 0 });
        let tol = 1e-9 * (lattice.dx.max(lattice.dy) + lattice.x0.abs().max(lattice.y0.abs()));
        let ttol = 1e-9 * (lattice.dt.abs() + lattice.t0.abs()).max(1e-12);
        for (n, line) in lines.enumerate() {
            if n >= lattice.len() {
                return Err(Error::Grid("more rows than lattice nodes".into()));
            }
            let f: Vec<f64> = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .map_err(|e| Error::Grid(format!("row {}: {e}", n + 2)))?;
            if f.len() != width {
                return Err(Error::Grid(format!("row {}: expected {width} fields", n + 2)));
            }
            let (i, j, k) = (n % lattice.nx, (n / lattice.nx) % lattice.ny, n / (lattice.nx * lattice.ny));
            let (p, t) = lattice.node(i, j, k);
            if (f[0] - t).abs() > ttol || (f[1] - p.x).abs() > tol || (f[2] - p.y).abs() > tol {
                return Err(Error::Grid(format!("row {} is not at lattice node ({i},{j},{k})", n + 2)));
            }
            values.push([f[3], f[4]]);
            if with_grad {
                grads.push([f[5], f[6], f[7], f[8]]);
            }
        }
        Self::new(lattice, values, with_grad.then_some(grads))
    }
}
