//! Explicit front-tracking stepper for `v = h + u_perp`.

mod trace;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::forcing::{perp_project, sobolev_budget, spatial_integrals, ForcingField, SobolevBudget};
use crate::geom::Vec2;
use crate::network::remesh::remesh_where_needed;
use crate::network::{topology_events, CurveNetwork, EventKind, TopologyEvent, VertexRole};
use crate::quadrature::panel_nodes;
use crate::varifold::{DensitySearch, DiscreteVarifold};

pub use trace::{FlowTrace, Snapshot, SnapshotLedger, StepRecord, TraceSummary};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CurvatureMode {
    Direct,
    Smoothed { eps: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum DtMode {
    Fixed { dt: f64 },
    Cfl { c: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FlowOptions {
    pub curvature: CurvatureMode,
    pub dt: DtMode,
    /// Target segment length; defaults to the initial mean segment length.
    pub remesh_spacing: Option<f64>,
    /// Defaults to a tenth of the spacing.
    pub length_tol: Option<f64>,
    /// Bridge length for re-split junctions; defaults to half the spacing.
    pub junction_tol: Option<f64>,
    pub record_every: usize,
    /// Constant in front of the Dirichlet integral in `U`; derived from the
    /// budget and `c_mz` when absent.
    pub u_constant: Option<f64>,
    pub c_mz: f64,
    pub budget_resolution: usize,
    pub density_pair_centers: usize,
    /// Record the density ratio in snapshot ledgers.
    pub snapshot_density: bool,
}

impl Default for FlowOptions {
    fn default() -> Self {
        FlowOptions {
            curvature: CurvatureMode::Direct,
            dt: DtMode::Cfl { c: 0.25 },
            remesh_spacing: None,
            length_tol: None,
            junction_tol: None,
            record_every: 100,
            u_constant: None,
            c_mz: 1.0,
            budget_resolution: 16,
            density_pair_centers: 256,
            snapshot_density: true,
        }
    }
}

impl FlowOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.into()));
        match self.dt {
            DtMode::Fixed { dt } if !(dt > 0.0) => return bad("fixed dt must be positive"),
            DtMode::Cfl { c } if !(c > 0.0 && c <= 0.5) => return bad("cfl constant must lie in (0, 0.5]"),
            _ => {}
        }
        if let CurvatureMode::Smoothed { eps } = self.curvature {
            if !(eps > 0.0) {
                return bad("smoothing width must be positive");
            }
        }
        for v in [self.remesh_spacing, self.length_tol, self.junction_tol, self.u_constant].into_iter().flatten() {
            if !(v > 0.0) {
                return bad("spacings, tolerances and constants must be positive");
            }
        }
        if self.record_every == 0 || !(self.c_mz > 0.0) || self.budget_resolution == 0 {
            return bad("record_every, c_mz and budget_resolution must be positive");
        }
        Ok(())
    }

    fn spacing_for(&self, net: &CurveNetwork) -> f64 {
        self.remesh_spacing.unwrap_or_else(|| {
            let n = net.segment_count().max(1);
            net.length() / n as f64
        })
    }
}

/// `c * min(min_segment^2, 1 / (1 + max |u| at vertices))`.
pub fn cfl_dt(net: &CurveNetwork, u: &ForcingField, t: f64, c: f64) -> Result<f64> {
    let h = net.min_segment_length().ok_or_else(|| Error::InvalidArgument("cfl step of an empty network".into()))?;
    let sup = net.vertices().iter().map(|x| u.value(x, t).norm()).fold(0.0, f64::max);
    Ok(c * (h * h).min(1.0 / (1.0 + sup)))
}

/// Velocity of every vertex and the ledger integrals of the configuration.
struct Motion {
    velocity: Vec<Vec2>,
    dissipation_rate: f64,
    forcing_rate: f64,
    u_normal_rate: f64,
    u_trace_rate: f64,
}

fn motion(net: &CurveNetwork, u: &ForcingField, t: f64, mode: &CurvatureMode) -> Result<Motion> {
    let smoothed = match mode {
        CurvatureMode::Smoothed { eps } => Some((DiscreteVarifold::from_network(net), *eps)),
        CurvatureMode::Direct => None,
    };
    let mut m = Motion {
        velocity: vec![Vec2::zeros(); net.vertices().len()],
        dissipation_rate: 0.0,
        forcing_rate: 0.0,
        u_normal_rate: 0.0,
        u_trace_rate: 0.0,
    };
    for (v, role) in net.vertex_roles().into_iter().enumerate() {
        let x = net.vertices()[v];
        match role {
            VertexRole::Interior { curve, pos } => {
                let (h_direct, dual) = net.curvature_at(curve, pos)?;
                let h = match &smoothed {
                    Some((var, eps)) => var.smoothed_curvature(&x, *eps)?,
                    None => h_direct,
                };
                let uv = u.value(&x, t);
                let up = perp_project(&uv, &net.tangent(curve, pos)?)?;
                m.velocity[v] = h + up;
                m.dissipation_rate += h.norm_squared() * dual;
                m.forcing_rate -= h.dot(&up) * dual;
                m.u_normal_rate += up.norm_squared() * dual;
                m.u_trace_rate += uv.norm_squared() * dual;
            }
            VertexRole::Junction(j) => {
                let junction = &net.junctions()[j];
                let mut force = Vec2::zeros();
                let mut dual = 0.0;
                for e in &junction.ends {
                    force += net.inward_direction(e)?;
                    let c = &net.curves()[e.curve];
                    let n = c.ids.len();
                    let other = match e.end {
                        crate::network::EndFlag::Start => c.ids[1],
                        crate::network::EndFlag::End => c.ids[n - 2],
                    };
                    dual += 0.5 * (net.vertices()[other] - x).norm();
                }
                let uv = u.value(&x, t);
                m.velocity[v] = force / dual + uv;
                m.u_trace_rate += uv.norm_squared() * dual;
            }
            VertexRole::Pinned { .. } | VertexRole::Unused => {}
        }
    }
    Ok(m)
}

/// Resolved spacing and tolerances for a run.
#[derive(Debug, Clone, Copy)]
struct Mesh {
    spacing: f64,
    length_tol: f64,
    junction_tol: f64,
}

impl Mesh {
    fn new(opts: &FlowOptions, net: &CurveNetwork) -> Self {
        let spacing = opts.spacing_for(net);
        Mesh {
            spacing,
            length_tol: opts.length_tol.unwrap_or(0.1 * spacing),
            junction_tol: opts.junction_tol.unwrap_or(0.5 * spacing),
        }
    }
}

/// One explicit step: move, check for crossings, remesh where needed, apply
/// topology events. Ledger quantities refer to the configuration before the
/// remesh.
pub fn step(
    net: &CurveNetwork,
    u: &ForcingField,
    t: f64,
    dt: f64,
    opts: &FlowOptions,
) -> Result<(CurveNetwork, StepRecord)> {
    step_with(net, u, t, dt, opts, &Mesh::new(opts, net))
}

fn step_with(
    net: &CurveNetwork,
    u: &ForcingField,
    t: f64,
    dt: f64,
    opts: &FlowOptions,
    mesh: &Mesh,
) -> Result<(CurveNetwork, StepRecord)> {
    if !(dt > 0.0) {
        return Err(Error::InvalidArgument(format!("dt {dt} must be positive")));
    }
    let mass = net.length();
    let mv = motion(net, u, t, &opts.curvature).map_err(|e| Error::Step { t, reason: e.to_string() })?;
    let mut moved = net.clone();
    let mut max_disp = 0.0f64;
    for (x, v) in moved.vertices.iter_mut().zip(&mv.velocity) {
        let d = v * dt;
        max_disp = max_disp.max(d.norm());
        *x += d;
    }
    if let Some(((c1, s1), (c2, s2))) = moved.find_crossing() {
        return Err(Error::Step {
            t,
            reason: format!("segment {s1} of curve {c1} crosses segment {s2} of curve {c2}; dt too large"),
        });
    }
    if moved.min_segment_length().is_some_and(|l| !(l > 0.0)) {
        return Err(Error::Step { t, reason: "a segment collapsed to zero length".into() });
    }
    let mass_moved = moved.length();
    let remeshed = remesh_where_needed(&moved, mesh.spacing).unwrap_or(moved);
    let mass_remeshed = remeshed.length();
    let (next, mut events) = topology_events(&remeshed, mesh.length_tol, mesh.junction_tol)
        .map_err(|e| Error::Step { t, reason: e.to_string() })?;
    for e in &mut events {
        e.time = Some(t + dt);
    }
    let record = StepRecord {
        t,
        dt,
        mass,
        dmass_motion: mass_moved - mass,
        dmass_remesh: mass_remeshed - mass_moved,
        dmass_topology: next.length() - mass_remeshed,
        dissipation: mv.dissipation_rate * dt,
        forcing_work: mv.forcing_rate * dt,
        u_normal_sq: mv.u_normal_rate * dt,
        u_trace: mv.u_trace_rate * dt,
        max_displacement: max_disp,
        events,
    };
    Ok((next, record))
}

fn snapshot_ledger(net: &CurveNetwork, search: Option<&DensitySearch>) -> SnapshotLedger {
    let v = DiscreteVarifold::from_network(net);
    SnapshotLedger {
        mass: net.length(),
        density_ratio: search.filter(|_| !v.is_empty()).map(|s| v.density_ratio_with(s)),
        phase_areas: (1..=net.phase_count()).map(|p| net.phase_area(p).ok().flatten()).collect(),
        l2_curvature: crate::varifold::l2_curvature(net),
        ..SnapshotLedger::default()
    }
}

/// Default constant of `U`: `C^2 * esssup int |u|^2 * L0 * exp(C^2 c1)`.
pub fn default_u_constant(c_mz: f64, budget: &SobolevBudget, mass0: f64) -> f64 {
    let c2 = c_mz * c_mz;
    c2 * budget.sup_l2 * mass0 * (c2 * budget.c1).exp()
}

/// Runs the flow on `[0, t_end]`, or until the network vanishes.
///
/// Step failures end the run early with `failure` set on the trace.
pub fn run(initial: &CurveNetwork, u: &ForcingField, t_end: f64, opts: &FlowOptions) -> Result<FlowTrace> {
    if !(t_end > 0.0) {
        return Err(Error::InvalidArgument(format!("T = {t_end} must be positive")));
    }
    opts.validate()?;
    u.check()?;
    if !initial.is_empty() {
        initial.validate()?;
    }
    let mesh = Mesh::new(opts, initial);
    let search = opts.snapshot_density.then(|| DensitySearch {
        max_pair_centers: opts.density_pair_centers,
        max_node_centers: opts.density_pair_centers,
        ..DensitySearch::default()
    });
    let budget_t = u.horizon().map_or(t_end, |h| h.min(t_end));
    let budget = if u.is_zero() || !(budget_t > 0.0) {
        SobolevBudget::zero(t_end)
    } else {
        sobolev_budget(u, budget_t, opts.budget_resolution)?
    };
    let mass0 = initial.length();
    let u_constant = opts.u_constant.unwrap_or_else(|| default_u_constant(opts.c_mz, &budget, mass0));

    let mut net = initial.clone();
    let mut t = 0.0;
    let mut steps = Vec::new();
    let mut snapshots =
        vec![Snapshot { t, step: 0, network: net.clone(), ledger: snapshot_ledger(&net, search.as_ref()) }];
    let mut failure = None;
    let mut k = 0usize;
    let t_stop = t_end * (1.0 - 1e-12);
    while t < t_stop && !net.is_empty() {
        let mut dt = match opts.dt {
            DtMode::Fixed { dt } => dt,
            DtMode::Cfl { c } => cfl_dt(&net, u, t, c)?,
        };
        if t + dt > t_end {
            dt = t_end - t;
        }
        match step_with(&net, u, t, dt, opts, &mesh) {
            Ok((next, record)) => {
                net = next;
                steps.push(record);
            }
            Err(e) => {
                failure = Some(e.to_string());
                break;
            }
        }
        k += 1;
        t = if t + dt >= t_stop { t_end } else { t + dt };
        if k.is_multiple_of(opts.record_every) || t >= t_end || net.is_empty() {
            snapshots.push(Snapshot {
                t,
                step: k,
                network: net.clone(),
                ledger: snapshot_ledger(&net, search.as_ref()),
            });
        }
    }
    if snapshots.last().is_some_and(|s| s.step != k) {
        snapshots.push(Snapshot { t, step: k, network: net.clone(), ledger: snapshot_ledger(&net, search.as_ref()) });
    }
    fill_cumulative(&mut snapshots, &steps, u, u_constant, opts.budget_resolution);
    Ok(FlowTrace { snapshots, steps, forcing: u.clone(), options: opts.clone(), t_end, u_constant, budget, failure })
}

/// Cumulative ledger sums and the bookkeeping functions at snapshot times.
fn fill_cumulative(snapshots: &mut [Snapshot], steps: &[StepRecord], u: &ForcingField, u_constant: f64, res: usize) {
    let mut acc = SnapshotLedger::default();
    let mut si = 0;
    let mut dirichlet = 0.0;
    let mut t_prev = 0.0;
    let breaks = u.time_breakpoints();
    for snap in snapshots.iter_mut() {
        while si < steps.len() && steps[si].t < snap.t - 1e-15 * snap.t.max(1.0) {
            let s = &steps[si];
            acc.dissipation_cum += s.dissipation;
            acc.forcing_work_cum += s.forcing_work;
            acc.u_trace_cum += s.u_trace;
            acc.dmass_cum += s.dmass_motion + s.dmass_remesh + s.dmass_topology;
            si += 1;
        }
        if snap.t > t_prev && !u.is_zero() {
            for (tq, w) in panel_nodes(t_prev, snap.t, &breaks, 4, 1) {
                dirichlet += w * spatial_integrals(u, tq, res).1;
            }
        }
        t_prev = snap.t;
        snap.ledger.dissipation_cum = acc.dissipation_cum;
        snap.ledger.forcing_work_cum = acc.forcing_work_cum;
        snap.ledger.u_trace_cum = acc.u_trace_cum;
        snap.ledger.dmass_cum = acc.dmass_cum;
        snap.ledger.h = 0.25 * acc.dissipation_cum;
        snap.ledger.dirichlet_cum = dirichlet;
        snap.ledger.u = u_constant * dirichlet;
    }
}

/// Dyadic step of the discrete construction: `c2 = 3n + 20` and the unique
/// `p` with `eps^c2 / 2 < 2^-p <= eps^c2`, computed exactly.
///
/// Returns `(c2, p, dt)`; `dt` underflows to zero when `p > 1074`.
pub fn dyadic_step_params(eps: f64, n: u32) -> Result<(u32, i64, f64)> {
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::InvalidArgument(format!("eps = {eps} must lie in (0, 1)")));
    }
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let c2 = 3 * n + 20;
    let bits = eps.to_bits();
    let exp_field = ((bits >> 52) & 0x7ff) as i64;
    let frac = bits & ((1u64 << 52) - 1);
    let (mut mant, mut e) = if exp_field == 0 { (frac, -1074) } else { (frac | (1u64 << 52), exp_field - 1075) };
    let tz = mant.trailing_zeros();
    mant >>= tz;
    e += tz as i64;
    let power = BigUint::from(mant).pow(c2);
    let p = -((power.bits() as i64 - 1) + e * c2 as i64);
    let dt = if p > 1074 { 0.0 } else { 2f64.powi(-(p as i32)) };
    Ok((c2, p, dt))
}

/// Time of the first extinction event in a trace.
pub fn extinction_time(trace: &FlowTrace) -> Option<f64> {
    trace.steps.iter().flat_map(|s| &s.events).find(|e| e.kind == EventKind::Extinction).and_then(|e| e.time)
}

/// All topology events in a trace in order.
pub fn events(trace: &FlowTrace) -> Vec<TopologyEvent> {
    trace.steps.iter().flat_map(|s| s.events.iter().cloned()).collect()
}
