use std::collections::BTreeMap;

use serde_json::json;

use super::test_function::ScalarTestFunction;
use crate::error::{Error, Result};
use crate::flow::FlowTrace;
use crate::forcing::{perp_project, spatial_integrals, ForcingField, SobolevBudget};
use crate::geom::{left_normal, Vec2};
use crate::network::{CurveNetwork, PhaseRaster, VertexRole};
use crate::quadrature::{adaptive_2d, gauss_legendre};
use crate::report::EstimateReport;
use crate::varifold::{l2_curvature, DiscreteVarifold};

const SEG_ORDER: usize = 6;

/// `int f ds` over the segment `[a, b]`, split into `pieces` Gauss panels.
fn segment_integral(a: &Vec2, b: &Vec2, pieces: usize, f: &impl Fn(&Vec2) -> f64) -> f64 {
    let (xs, ws) = gauss_legendre(SEG_ORDER);
    let d = b - a;
    let n = pieces.max(1);
    let mut s = 0.0;
    for p in 0..n {
        let (s0, s1) = (p as f64 / n as f64, (p + 1) as f64 / n as f64);
        for (x, w) in xs.iter().zip(ws) {
            let tt = s0 + (s1 - s0) * 0.5 * (x + 1.0);
            s += w * 0.5 * (s1 - s0) * f(&(a + d * tt));
        }
    }
    s * d.norm()
}

/// `int f d||V||` with panels no longer than `h`.
pub fn measure_integral(v: &DiscreteVarifold, h: f64, f: impl Fn(&Vec2) -> f64) -> f64 {
    v.segments()
        .iter()
        .map(|s| {
            let pieces = (s.length() / h).ceil().max(1.0) as usize;
            s.theta as f64 * segment_integral(&s.a, &s.b, pieces.min(64), &f)
        })
        .sum()
}

/// Quantities at an interior vertex of a network.
#[derive(Debug, Clone, Copy)]
pub struct VertexSample {
    pub x: Vec2,
    pub curve: usize,
    pub tangent: Vec2,
    pub h: Vec2,
    pub u: Vec2,
    pub u_perp: Vec2,
    pub dual: f64,
}

pub fn vertex_samples(net: &CurveNetwork, u: &ForcingField, t: f64) -> Result<Vec<VertexSample>> {
    let mut out = Vec::new();
    for (v, role) in net.vertex_roles().into_iter().enumerate() {
        if let VertexRole::Interior { curve, pos } = role {
            let (h, dual) = net.curvature_at(curve, pos)?;
            let tangent = net.tangent(curve, pos)?;
            let x = net.vertices()[v];
            let uv = u.value(&x, t);
            out.push(VertexSample { x, curve, tangent, h, u: uv, u_perp: perp_project(&uv, &tangent)?, dual });
        }
    }
    Ok(out)
}

fn has_free_ends(net: &CurveNetwork) -> bool {
    net.vertex_roles().iter().any(|r| matches!(r, VertexRole::Pinned { .. }))
}

fn all_closed(net: &CurveNetwork) -> bool {
    net.curves().iter().all(|c| c.closed)
}

/// Trapezoid rule over `(t, f)` samples.
fn trapezoid(samples: &[(f64, f64)]) -> f64 {
    samples.windows(2).map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1 + w[1].1)).sum()
}

/// A constant-dependent inequality `lhs <= rhs(C)`, with `rhs` nondecreasing in `C`.
pub struct Inequality {
    pub name: String,
    pub lhs: f64,
    rhs: Box<dyn Fn(f64) -> f64 + Send + Sync>,
    slack: f64,
    constants: BTreeMap<String, f64>,
    witnesses: BTreeMap<String, serde_json::Value>,
    applicable: Option<String>,
}

impl Inequality {
    fn new(name: &str, lhs: f64, slack: f64, rhs: impl Fn(f64) -> f64 + Send + Sync + 'static) -> Self {
        Inequality {
            name: name.into(),
            lhs,
            rhs: Box::new(rhs),
            slack,
            constants: BTreeMap::new(),
            witnesses: BTreeMap::new(),
            applicable: None,
        }
    }

    fn not_applicable(name: &str, why: &str) -> Self {
        let mut i = Self::new(name, 0.0, 0.0, |_| 0.0);
        i.applicable = Some(why.into());
        i
    }

    fn constant(mut self, k: &str, v: f64) -> Self {
        self.constants.insert(k.into(), v);
        self
    }

    fn witness(mut self, k: &str, v: impl Into<serde_json::Value>) -> Self {
        self.witnesses.insert(k.into(), v.into());
        self
    }

    pub fn rhs(&self, c: f64) -> f64 {
        (self.rhs)(c)
    }

    pub fn holds(&self, c: f64) -> bool {
        self.applicable.is_some() || self.rhs(c) - self.lhs >= -self.slack
    }

    pub fn report(&self, c: f64) -> EstimateReport {
        if let Some(why) = &self.applicable {
            return EstimateReport::not_applicable(self.name.clone(), why);
        }
        let mut r = EstimateReport::new(self.name.clone(), self.lhs, self.rhs(c), self.slack).constant("c_mz", c);
        r.constants.extend(self.constants.clone());
        r.witnesses.extend(self.witnesses.clone());
        r
    }

    /// Smallest `C` in `[lo, hi]` (to relative precision `1e-6`) at which the
    /// inequality holds; `None` if it fails at `hi`.
    pub fn min_constant(&self, lo: f64, hi: f64) -> Option<f64> {
        if self.holds(lo) {
            return Some(lo);
        }
        if !self.holds(hi) {
            return None;
        }
        let (mut a, mut b) = (lo.ln(), hi.ln());
        while b - a > 1e-6 {
            let m = 0.5 * (a + b);
            if self.holds(m.exp()) {
                b = m;
            } else {
                a = m;
            }
        }
        Some(b.exp())
    }
}

fn c1_of(budget: &SobolevBudget) -> f64 {
    budget.c1
}

/// `L0 exp(C^2 c1)`.
pub fn gronwall_rhs(l0: f64, c: f64, c1: f64) -> f64 {
    l0 * (c * c * c1).exp()
}

/// `4 L0 (1 + C^2 c1 exp(C^2 c1))`.
pub fn curvature_budget_rhs(l0: f64, c: f64, c1: f64) -> f64 {
    let k = c * c * c1;
    4.0 * l0 * (1.0 + k * k.exp())
}

/// `4 C sqrt(c1) L0 sqrt(1 + C^2 c1 exp(C^2 c1)) exp(C^2 c1 / 2)`.
pub fn trace_u_budget_rhs(l0: f64, c: f64, c1: f64) -> f64 {
    let k = c * c * c1;
    4.0 * c * c1.sqrt() * l0 * (1.0 + k * k.exp()).sqrt() * (0.5 * k).exp()
}

pub fn gronwall_inequality(trace: &FlowTrace, budget: &SobolevBudget) -> Inequality {
    let l0 = trace.initial_mass();
    let (mut sup, mut at) = (l0, 0.0);
    for (t, m) in trace.snapshots.iter().map(|s| (s.t, s.ledger.mass)).chain(trace.steps.iter().map(|s| (s.t, s.mass)))
    {
        if m > sup {
            (sup, at) = (m, t);
        }
    }
    let c1 = c1_of(budget);
    Inequality::new("gronwall", sup, 1e-9 * l0, move |c| gronwall_rhs(l0, c, c1))
        .constant("c1", c1)
        .constant("l0", l0)
        .witness("t_sup", at)
}

pub fn gronwall_check(trace: &FlowTrace, budget: &SobolevBudget, c: f64) -> EstimateReport {
    gronwall_inequality(trace, budget).report(c)
}

pub fn curvature_budget_inequality(trace: &FlowTrace, budget: &SobolevBudget) -> Inequality {
    let l0 = trace.initial_mass();
    let total: f64 = trace.steps.iter().map(|s| s.dissipation).sum();
    let c1 = c1_of(budget);
    Inequality::new("curvature_budget", total, 1e-9 * l0, move |c| curvature_budget_rhs(l0, c, c1))
        .constant("c1", c1)
        .constant("l0", l0)
}

pub fn curvature_budget_check(trace: &FlowTrace, budget: &SobolevBudget, c: f64) -> EstimateReport {
    curvature_budget_inequality(trace, budget).report(c)
}

/// `int_0^T int |u|^2 d||V_t|| dt` by segment quadrature and the trapezoid rule.
pub fn trace_u_integral(trace: &FlowTrace) -> f64 {
    if trace.forcing.is_zero() {
        return 0.0;
    }
    let h = trace.spacing();
    let samples: Vec<(f64, f64)> = trace
        .snapshots
        .iter()
        .map(|s| (s.t, measure_integral(&s.varifold(), h, |x| trace.forcing.value(x, s.t).norm_squared())))
        .collect();
    trapezoid(&samples)
}

pub fn trace_u_budget_inequality(trace: &FlowTrace, budget: &SobolevBudget) -> Inequality {
    let l0 = trace.initial_mass();
    let c1 = c1_of(budget);
    Inequality::new("trace_u_budget", trace_u_integral(trace), 1e-9 * l0, move |c| trace_u_budget_rhs(l0, c, c1))
        .constant("c1", c1)
        .constant("l0", l0)
}

pub fn trace_u_budget_check(trace: &FlowTrace, budget: &SobolevBudget, c: f64) -> EstimateReport {
    trace_u_budget_inequality(trace, budget).report(c)
}

/// Per-step mass increase relative to the mass, excluding topology events.
pub fn mass_monotonicity_check(trace: &FlowTrace) -> EstimateReport {
    if !trace.forcing.is_zero() {
        return EstimateReport::not_applicable("mass_monotone", "forcing is not zero");
    }
    let (mut worst, mut at) = (f64::NEG_INFINITY, 0.0);
    for s in &trace.steps {
        let rel = (s.dmass_motion + s.dmass_remesh) / s.mass.max(f64::MIN_POSITIVE);
        if rel > worst {
            (worst, at) = (rel, s.t);
        }
    }
    if trace.steps.is_empty() {
        worst = 0.0;
    }
    EstimateReport::new("mass_monotone", worst, 0.0, 1e-9).witness("t", at)
}

pub fn interpolation_inequality(
    v: &DiscreteVarifold,
    net: &CurveNetwork,
    u: &ForcingField,
    t: f64,
    resolution: usize,
) -> Inequality {
    let name = "interpolation";
    if !all_closed(net) {
        return Inequality::not_applicable(name, "curvature is not absolutely continuous with free ends or junctions");
    }
    let mass = v.mass();
    let h = (mass / v.segments().len().max(1) as f64).max(1e-12);
    let lhs = measure_integral(v, h, |x| u.value(x, t).norm_squared());
    let curv = l2_curvature(net);
    let (l2, dir) = spatial_integrals(u, t, resolution);
    Inequality::new(name, lhs, 1e-12 * (lhs + curv).max(1e-300), move |c| 0.5 * curv + 2.0 * c * c * mass * dir * l2)
        .constant("mass", mass)
        .constant("l2", l2)
        .constant("dirichlet", dir)
        .witness("t", t)
}

pub fn interpolation_check(
    v: &DiscreteVarifold,
    net: &CurveNetwork,
    u: &ForcingField,
    t: f64,
    c: f64,
    resolution: usize,
) -> EstimateReport {
    interpolation_inequality(v, net, u, t, resolution).report(c)
}

/// `int |grad phi| dx` over the support square by adaptive cubature.
pub fn gradient_integral(phi: &ScalarTestFunction, t: f64) -> f64 {
    let c = phi.center_at(t);
    let r = phi.support_radius();
    adaptive_2d(|x, y| phi.gradient(&Vec2::new(x, y), t).norm(), c.x - r, c.x + r, c.y - r, c.y + r, 1e-7 * r, 10)
}

pub fn meyers_ziemer_inequality(v: &DiscreteVarifold, phi: &ScalarTestFunction, t: f64) -> Inequality {
    let h = phi.support_radius() / 16.0;
    let lhs = measure_integral(v, h, |x| phi.value(x, t));
    let density = if v.is_empty() { 0.0 } else { v.density_ratio().value };
    let grad = gradient_integral(phi, t);
    Inequality::new("meyers_ziemer", lhs, 1e-9 * lhs, move |c| c * density * grad)
        .constant("density_ratio", density)
        .constant("gradient_integral", grad)
}

pub fn meyers_ziemer_check(v: &DiscreteVarifold, phi: &ScalarTestFunction, t: f64, c: f64) -> EstimateReport {
    meyers_ziemer_inequality(v, phi, t).report(c)
}

/// Terms of the weak inequality at one snapshot.
#[derive(Debug, Clone, Copy, Default)]
struct BrakkeTerms {
    mass_phi: f64,
    dphi_dt: f64,
    motion: f64,
}

fn brakke_terms(net: &CurveNetwork, u: &ForcingField, phi: &ScalarTestFunction, t: f64, h: f64) -> Result<BrakkeTerms> {
    let v = DiscreteVarifold::from_network(net);
    let mass_phi = measure_integral(&v, h, |x| phi.value(x, t));
    let dphi_dt = measure_integral(&v, h, |x| phi.time_derivative(x, t));
    let motion = vertex_samples(net, u, t)?
        .iter()
        .map(|s| (phi.gradient(&s.x, t) - s.h * phi.value(&s.x, t)).dot(&(s.h + s.u_perp)) * s.dual)
        .sum();
    Ok(BrakkeTerms { mass_phi, dphi_dt, motion })
}

fn snapshot_range(trace: &FlowTrace, t1: f64, t2: f64) -> Result<(usize, usize)> {
    if !(t1 < t2) {
        return Err(Error::InvalidArgument(format!("need t1 < t2, got {t1} and {t2}")));
    }
    let tol = 1e-12 * trace.t_end.max(1.0);
    let i1 = trace.snapshots.iter().position(|s| s.t >= t1 - tol);
    let i2 = trace.snapshots.iter().rposition(|s| s.t <= t2 + tol);
    match (i1, i2) {
        (Some(a), Some(b)) if a < b => Ok((a, b)),
        _ => Err(Error::InvalidArgument(format!("fewer than two snapshots in [{t1}, {t2}]"))),
    }
}

/// Slack `kappa (dt + spacing^2) L0 (t2 - t1)` of the discrete scheme.
pub fn scheme_slack(trace: &FlowTrace, t1: f64, t2: f64, kappa: f64) -> f64 {
    let s = trace.spacing();
    kappa * (trace.max_dt(t1, t2) + s * s) * trace.initial_mass() * (t2 - t1)
}

/// Signed residual of the weak inequality between the snapshots nearest
/// inside `[t1, t2]`; passes when it does not exceed the scheme slack.
pub fn brakke_residual(
    trace: &FlowTrace,
    phi: &ScalarTestFunction,
    t1: f64,
    t2: f64,
    kappa: f64,
) -> Result<EstimateReport> {
    phi.check()?;
    let (i1, i2) = snapshot_range(trace, t1, t2)?;
    let h = trace.spacing().min(phi.support_radius() / 16.0);
    let terms = trace.snapshots[i1..=i2]
        .iter()
        .map(|s| brakke_terms(&s.network, &trace.forcing, phi, s.t, h))
        .collect::<Result<Vec<_>>>()?;
    let times: Vec<f64> = trace.snapshots[i1..=i2].iter().map(|s| s.t).collect();
    let mut dt_int = 0.0;
    let mut motion_int = 0.0;
    for k in 0..terms.len() - 1 {
        let w = 0.5 * (times[k + 1] - times[k]);
        dt_int += w * (terms[k].dphi_dt + terms[k + 1].dphi_dt);
        motion_int += w * (terms[k].motion + terms[k + 1].motion);
    }
    let dmass = terms[terms.len() - 1].mass_phi - terms[0].mass_phi;
    let residual = dmass - dt_int - motion_int;
    let (ta, tb) = (times[0], times[times.len() - 1]);
    let slack = scheme_slack(trace, ta, tb, kappa);
    Ok(EstimateReport::new("brakke_residual", residual, 0.0, slack)
        .constant("kappa", kappa)
        .witness("t1", ta)
        .witness("t2", tb)
        .witness("mass_change", dmass)
        .witness("time_derivative_term", dt_int)
        .witness("motion_term", motion_int))
}

/// Emptiness of shrinking balls after an empty ball at time `t`.
pub fn clearing_out_check(trace: &FlowTrace, center: Vec2, r: f64, t: f64) -> Result<EstimateReport> {
    if !(r > 0.0) {
        return Err(Error::InvalidArgument("ball radius must be positive".into()));
    }
    let tol = 1e-12 * trace.t_end.max(1.0);
    let i0 = trace
        .snapshots
        .iter()
        .position(|s| (s.t - t).abs() <= tol)
        .ok_or_else(|| Error::InvalidArgument(format!("no snapshot at t = {t}")))?;
    let m0 = trace.snapshots[i0].varifold().ball_mass(&center, r);
    if m0 > 0.0 {
        return Err(Error::Precondition(format!("ball of radius {r} at t = {t} carries mass {m0}")));
    }
    let u_sup = if trace.forcing.is_zero() {
        0.0
    } else {
        let mut bbox = crate::geom::BBox::empty();
        for s in &trace.snapshots {
            bbox = bbox.union(&s.network.bbox());
        }
        bbox.include(&center);
        trace.forcing.sup_norm_sampled(&bbox.inflate(r), t, trace.t_end, 48, 16)
    };
    let rate = 2.0 + 2.0 * r * u_sup;
    let t_max = t + r * r / rate;
    let (mut worst, mut checked, mut violations) = (0.0f64, 0usize, 0usize);
    let mut at = t;
    for s in &trace.snapshots[i0 + 1..] {
        if s.t > t_max {
            break;
        }
        let rr = (r * r - rate * (s.t - t)).max(0.0).sqrt();
        let m = s.varifold().ball_mass(&center, rr);
        checked += 1;
        if m > 0.0 {
            violations += 1;
        }
        if m > worst {
            (worst, at) = (m, s.t);
        }
    }
    Ok(EstimateReport::new("clearing_out", worst, 0.0, 0.0)
        .constant("u_sup", u_sup)
        .witness("checked", checked)
        .witness("violations", violations)
        .witness("t_worst", at))
}

/// Default Hölder constant from the a priori bounds:
/// `sqrt(2 sup_mass (int int |h|^2 + int int |u|^2))` with the bound values.
pub fn default_holder_constant(l0: f64, c: f64, c1: f64) -> f64 {
    let sup_mass = gronwall_rhs(l0, c, c1);
    (2.0 * sup_mass * (curvature_budget_rhs(l0, c, c1) + trace_u_budget_rhs(l0, c, c1))).sqrt()
}

fn rasters(trace: &FlowTrace, phase: usize, cell: f64) -> Vec<(PhaseRaster, f64)> {
    let mut bbox = crate::geom::BBox::empty();
    for s in &trace.snapshots {
        bbox = bbox.union(&s.network.bbox());
    }
    let bbox = bbox.inflate(4.0 * cell);
    let outer = trace.snapshots[0].network.unbounded_phase();
    trace
        .snapshots
        .iter()
        .map(|s| {
            let net = &s.network;
            let perimeter = net.phase_perimeter(phase);
            let r = if net.curves().is_empty() {
                PhaseRaster::uniform(&bbox, cell, net.unbounded_phase().or(outer) == Some(phase))
            } else {
                PhaseRaster::of_phase(net, phase, &bbox, cell)
            };
            (r, perimeter)
        })
        .collect()
}

/// Largest `|E(t2) sym. diff. E(t1)| / sqrt(t2 - t1)` over snapshot pairs,
/// with raster error removed, against `constant`.
pub fn phase_holder_check(trace: &FlowTrace, phase: usize, constant: f64, cell: Option<f64>) -> Result<EstimateReport> {
    if phase == 0 || phase > trace.snapshots[0].network.phase_count() {
        return Err(Error::InvalidArgument(format!("no phase {phase}")));
    }
    let name = format!("phase_holder[{phase}]");
    if has_free_ends(&trace.snapshots[0].network) {
        return Ok(EstimateReport::not_applicable(name, "phases are not enclosed"));
    }
    let cell = cell.unwrap_or_else(|| {
        let mut bbox = crate::geom::BBox::empty();
        for s in &trace.snapshots {
            bbox = bbox.union(&s.network.bbox());
        }
        ((bbox.max - bbox.min).norm() / 512.0).max(1e-9)
    });
    let rs = rasters(trace, phase, cell);
    let times = trace.times();
    let (mut worst, mut pair) = (0.0f64, (0.0, 0.0));
    for i in 0..rs.len() {
        for j in i + 1..rs.len() {
            let gap = times[j] - times[i];
            let diff = rs[i].0.symmetric_difference(&rs[j].0)?;
            let noise = 2.0 * cell * (rs[i].1 + rs[j].1);
            let ratio = (diff - noise).max(0.0) / gap.sqrt();
            if ratio > worst {
                (worst, pair) = (ratio, (times[i], times[j]));
            }
        }
    }
    Ok(EstimateReport::new(name, worst, constant, 0.0)
        .constant("cell", cell)
        .witness("t1", pair.0)
        .witness("t2", pair.1))
}

/// Terms of the phase transport identity at one snapshot.
#[derive(Debug, Clone, Copy, Default)]
struct PhaseTerms {
    volume_phi: f64,
    volume_dt: f64,
    boundary_velocity: f64,
    beta_density: f64,
    phi_sq: f64,
}

fn phase_terms(
    net: &CurveNetwork,
    outer: Option<usize>,
    phase: usize,
    u: &ForcingField,
    phi: &ScalarTestFunction,
    t: f64,
    h: f64,
) -> Result<PhaseTerms> {
    let (m, dm) = phi.modulation_at(t);
    let w = phi.center_velocity();
    let mut flux = 0.0;
    let mut moving = 0.0;
    for c in net.curves() {
        let side = match (c.left == phase, c.right == phase) {
            (true, false) => -1.0,
            (false, true) => 1.0,
            _ => continue,
        };
        for (a, b) in c.segments() {
            let (pa, pb) = (net.vertices()[a], net.vertices()[b]);
            let d = pb - pa;
            let nu = left_normal(&d) * (side / d.norm());
            let pieces = (d.norm() / h).ceil().max(1.0) as usize;
            flux += segment_integral(&pa, &pb, pieces.min(64), &|x| phi.flux_field(x, t).dot(&nu));
            moving += segment_integral(&pa, &pb, pieces.min(64), &|x| {
                phi.profile_at((x - phi.center_at(t)).norm()).0 * w.dot(&nu)
            });
        }
    }
    let unbounded = if net.curves().is_empty() { net.unbounded_phase().or(outer) } else { net.unbounded_phase() };
    let at_infinity = if unbounded == Some(phase) { phi.plane_integral() } else { 0.0 };
    let psi_volume = flux + at_infinity;
    let mut boundary_velocity = 0.0;
    let mut beta_density = 0.0;
    for s in vertex_samples(net, u, t)? {
        let c = &net.curves()[s.curve];
        let side = match (c.left == phase, c.right == phase) {
            (true, false) => -1.0,
            (false, true) => 1.0,
            _ => continue,
        };
        let nu = left_normal(&s.tangent) * side;
        boundary_velocity += (s.h + s.u).dot(&nu) * phi.value(&s.x, t) * s.dual;
        beta_density += 2.0 * (s.h.norm_squared() + s.u.norm_squared()) * s.dual;
    }
    let v = DiscreteVarifold::from_network(net);
    let phi_sq = measure_integral(&v, h, |x| phi.value(x, t).powi(2));
    Ok(PhaseTerms {
        volume_phi: m * psi_volume,
        volume_dt: dm * psi_volume - m * moving,
        boundary_velocity,
        beta_density,
        phi_sq,
    })
}

/// Transport identity for `int_{E_i} phi` and its square-root estimate with
/// `beta = 2 int (|h|^2 + |u|^2)` over the phase boundary.
pub fn phase_transport_check(
    trace: &FlowTrace,
    phase: usize,
    phi: &ScalarTestFunction,
    kappa: f64,
) -> Result<EstimateReport> {
    phi.check()?;
    let net0 = &trace.snapshots[0].network;
    if phase == 0 || phase > net0.phase_count() {
        return Err(Error::InvalidArgument(format!("no phase {phase}")));
    }
    let name = format!("phase_transport[{phase}]");
    if has_free_ends(net0) {
        return Ok(EstimateReport::not_applicable(name, "phases are not enclosed"));
    }
    let outer = net0.unbounded_phase();
    let h = trace.spacing().min(phi.support_radius() / 16.0);
    let terms = trace
        .snapshots
        .iter()
        .map(|s| phase_terms(&s.network, outer, phase, &trace.forcing, phi, s.t, h))
        .collect::<Result<Vec<_>>>()?;
    let times = trace.times();
    let integrate = |f: &dyn Fn(&PhaseTerms) -> f64| {
        let samples: Vec<(f64, f64)> = times.iter().zip(&terms).map(|(t, p)| (*t, f(p))).collect();
        trapezoid(&samples)
    };
    let dvol = terms[terms.len() - 1].volume_phi - terms[0].volume_phi;
    let vol_dt = integrate(&|p| p.volume_dt);
    let boundary = integrate(&|p| p.boundary_velocity);
    let beta = integrate(&|p| p.beta_density);
    let phi_sq = integrate(&|p| p.phi_sq);
    let (ta, tb) = (times[0], times[times.len() - 1]);
    let slack = scheme_slack(trace, ta, tb, kappa);
    let identity = EstimateReport::residual(format!("{name}.identity"), dvol - vol_dt - boundary, slack);
    let estimate =
        EstimateReport::new(format!("{name}.estimate"), (dvol - vol_dt).abs(), (beta * phi_sq).sqrt(), slack)
            .constant("beta", beta);
    Ok(EstimateReport::all(name, vec![identity, estimate]).witness("volume_change", dvol))
}

/// Segment groups keyed by quantized position: multiplicity and the net jump
/// of each phase indicator across the group.
type GridPoint = (i64, i64);

fn segment_groups(net: &CurveNetwork) -> Vec<(f64, u32, Vec<i64>)> {
    let q = |v: &Vec2| ((v.x * 1e12).round() as i64, (v.y * 1e12).round() as i64);
    let n = net.phase_count();
    let mut groups: BTreeMap<(GridPoint, GridPoint), (f64, u32, Vec<i64>)> = BTreeMap::new();
    for c in net.curves() {
        for (a, b) in c.segments() {
            let (pa, pb) = (net.vertices()[a], net.vertices()[b]);
            let (ka, kb) = (q(&pa), q(&pb));
            let (key, sign) = if ka <= kb { ((ka, kb), 1) } else { ((kb, ka), -1) };
            let e = groups.entry(key).or_insert_with(|| ((pb - pa).norm(), 0, vec![0; n + 1]));
            e.1 += 1;
            e.2[c.left] += sign;
            e.2[c.right] -= sign;
        }
    }
    groups.into_values().collect()
}

/// Perimeter of each phase from segments where its indicator jumps.
pub fn reduced_perimeters(net: &CurveNetwork) -> Vec<f64> {
    let mut out = vec![0.0; net.phase_count() + 1];
    for (len, _, jumps) in segment_groups(net) {
        for (p, j) in jumps.iter().enumerate() {
            if *j != 0 {
                out[p] += len;
            }
        }
    }
    out.remove(0);
    out
}

/// Junction angles, perimeter bounds and the multiplicity parity rule.
pub fn structure_checks(net: &CurveNetwork, angle_tol_deg: f64) -> Result<EstimateReport> {
    let mass = net.length();
    let slack = 1e-9 * mass.max(1.0);
    let mut parts = Vec::new();
    let mut worst_angle = 0.0f64;
    for j in 0..net.junctions().len() {
        let (_, angles) = net.junction_balance(j)?;
        for a in angles {
            let d = [0.0, 60.0, 120.0].iter().map(|t| (a - t).abs()).fold(f64::INFINITY, f64::min);
            worst_angle = worst_angle.max(d);
        }
    }
    parts.push(EstimateReport::new("structure.angles", worst_angle, angle_tol_deg, 0.0));
    let per = reduced_perimeters(net);
    let max_per = per.iter().cloned().fold(0.0, f64::max);
    parts.push(EstimateReport::new("structure.perimeter_each", max_per, mass, slack));
    let sum: f64 = per.iter().sum();
    parts.push(EstimateReport::new("structure.perimeter_sum", sum, 2.0 * mass, slack));
    let groups = segment_groups(net);
    let mut parity_violations = 0usize;
    for (_, theta, jumps) in &groups {
        let on_boundary = jumps.iter().any(|j| *j != 0);
        let bad = if net.phase_count() == 2 { (theta % 2 == 1) != on_boundary } else { *theta == 1 && !on_boundary };
        if bad {
            parity_violations += 1;
        }
    }
    parts.push(
        EstimateReport::new("structure.parity", parity_violations as f64, 0.0, 0.0)
            .witness("max_multiplicity", groups.iter().map(|g| g.1).max().unwrap_or(0)),
    );
    if groups.iter().all(|g| g.1 == 1) {
        parts.push(EstimateReport::residual("structure.half_perimeter", mass - 0.5 * sum, slack));
    }
    Ok(EstimateReport::all("structure", parts).witness("perimeters", json!(per)))
}
