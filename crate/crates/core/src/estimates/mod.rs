//! Diagnostics evaluated on flow traces: a priori bounds, the weak motion
//! inequality, phase transport and structural properties.

mod checks;
mod test_function;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::flow::FlowTrace;
use crate::forcing::SobolevBudget;
use crate::geom::Vec2;
use crate::report::EstimateReport;
use crate::varifold::verify_density_bounds;

pub use checks::{
    brakke_residual, clearing_out_check, curvature_budget_check, curvature_budget_inequality, curvature_budget_rhs,
    default_holder_constant, gradient_integral, gronwall_check, gronwall_inequality, gronwall_rhs, interpolation_check,
    interpolation_inequality, mass_monotonicity_check, measure_integral, meyers_ziemer_check, meyers_ziemer_inequality,
    phase_holder_check, phase_transport_check, reduced_perimeters, scheme_slack, structure_checks,
    trace_u_budget_check, trace_u_budget_inequality, trace_u_budget_rhs, trace_u_integral, vertex_samples, Inequality,
    VertexSample,
};
pub use test_function::{Profile, ScalarTestFunction};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CheckConfig {
    pub c_mz: f64,
    /// Multiplier of the `(dt + spacing^2)` slack.
    pub kappa: f64,
    /// Hölder constant; derived from the a priori bounds when absent.
    pub holder_constant: Option<f64>,
    pub holder_cell: Option<f64>,
    pub angle_tol_deg: f64,
    pub budget_resolution: usize,
    /// Number of snapshots (evenly spread) used by the per-snapshot checks.
    pub max_snapshots: usize,
}

impl Default for CheckConfig {
    fn default() -> Self {
        CheckConfig {
            c_mz: 1.0,
            kappa: 10.0,
            holder_constant: None,
            holder_cell: None,
            angle_tol_deg: 2.0,
            budget_resolution: 16,
            max_snapshots: 12,
        }
    }
}

/// Which checks a suite runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    All,
    Budgets,
    Brakke,
    Phases,
    Structure,
}

impl std::str::FromStr for Suite {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "all" => Suite::All,
            "budgets" => Suite::Budgets,
            "brakke" => Suite::Brakke,
            "phases" => Suite::Phases,
            "structure" => Suite::Structure,
            _ => return Err(crate::error::Error::InvalidArgument(format!("unknown suite '{s}'"))),
        })
    }
}

fn sample_indices(n: usize, k: usize) -> Vec<usize> {
    if n <= k || k < 2 {
        return (0..n).collect();
    }
    let mut v: Vec<usize> = (0..k).map(|i| i * (n - 1) / (k - 1)).collect();
    v.dedup();
    v
}

/// Centre and half-diagonal of the initial network's bounding box.
fn frame(trace: &FlowTrace) -> (Vec2, f64) {
    let b = trace.snapshots[0].network.bbox();
    if b.is_empty() {
        return (Vec2::zeros(), 1.0);
    }
    (0.5 * (b.min + b.max), (0.5 * (b.max - b.min).norm()).max(1e-6))
}

/// Inequalities whose right-hand side depends on the constant `C`.
pub fn constant_dependent(trace: &FlowTrace, budget: &SobolevBudget, cfg: &CheckConfig) -> Vec<Inequality> {
    let mut out = vec![
        gronwall_inequality(trace, budget),
        curvature_budget_inequality(trace, budget),
        trace_u_budget_inequality(trace, budget),
    ];
    let (center, scale) = frame(trace);
    let idx = sample_indices(trace.snapshots.len(), cfg.max_snapshots);
    let catalog = ScalarTestFunction::catalog(center, scale);
    let per_snapshot: Vec<Vec<Inequality>> = idx
        .par_iter()
        .map(|&i| {
            let s = &trace.snapshots[i];
            let v = s.varifold();
            let mut part = vec![interpolation_inequality(&v, &s.network, &trace.forcing, s.t, cfg.budget_resolution)];
            if !v.is_empty() {
                for (_, phi) in &catalog {
                    part.push(meyers_ziemer_inequality(&v, phi, s.t));
                }
            }
            part
        })
        .collect();
    out.extend(per_snapshot.into_iter().flatten());
    out
}

fn combine(name: &str, mut parts: Vec<EstimateReport>) -> EstimateReport {
    if parts.len() == 1 {
        let mut p = parts.remove(0);
        p.name = name.into();
        return p;
    }
    EstimateReport::all(name, parts)
}

/// Runs a suite on a trace; reports are sorted by name.
pub fn run_suite(
    trace: &FlowTrace,
    budget: &SobolevBudget,
    suite: Suite,
    cfg: &CheckConfig,
) -> Result<Vec<EstimateReport>> {
    let mut out = Vec::new();
    let want = |s: Suite| suite == Suite::All || suite == s;
    let c = cfg.c_mz;
    let (center, scale) = frame(trace);
    let catalog = ScalarTestFunction::catalog(center, scale);
    let idx = sample_indices(trace.snapshots.len(), cfg.max_snapshots);
    let t0 = trace.snapshots[0].t;
    let t_last = trace.snapshots[trace.snapshots.len() - 1].t;

    if want(Suite::Budgets) {
        out.push(mass_monotonicity_check(trace));
        let ineqs = constant_dependent(trace, budget, cfg);
        let mut interp = Vec::new();
        let mut mz = Vec::new();
        for i in &ineqs {
            match i.name.as_str() {
                "interpolation" => interp.push(i.report(c)),
                "meyers_ziemer" => mz.push(i.report(c)),
                _ => out.push(i.report(c)),
            }
        }
        out.push(combine("interpolation", interp));
        if !mz.is_empty() {
            out.push(combine("meyers_ziemer", mz));
        }
        let prop: Vec<Vec<EstimateReport>> = idx
            .par_iter()
            .map(|&i| {
                let s = &trace.snapshots[i];
                if s.network.is_empty() {
                    return Ok(Vec::new());
                }
                verify_density_bounds(&s.varifold(), &s.network)
            })
            .collect::<Result<_>>()?;
        let prop: Vec<EstimateReport> = prop.into_iter().flatten().collect();
        for key in ["density_vs_total_variation", "density_vs_curvature"] {
            let parts: Vec<EstimateReport> = prop.iter().filter(|r| r.name == key).cloned().collect();
            if !parts.is_empty() {
                out.push(combine(&format!("density_bounds.{key}"), parts));
            }
        }
    }

    if want(Suite::Brakke) && t_last > t0 {
        let reports: Vec<EstimateReport> = catalog
            .par_iter()
            .map(|(name, phi)| {
                brakke_residual(trace, phi, t0, t_last, cfg.kappa).map(|mut r| {
                    r.name = format!("brakke_residual[{name}]");
                    r
                })
            })
            .collect::<Result<_>>()?;
        out.extend(reports);
        let mut parts = Vec::new();
        let net0 = &trace.snapshots[0].network;
        let mut centers = vec![center];
        centers.extend(net0.seeds().iter().map(|s| s.point));
        for c0 in centers {
            let v = trace.snapshots[0].varifold();
            let d = v
                .segments()
                .iter()
                .map(|s| crate::geom::point_segment_distance(&c0, &s.a, &s.b))
                .fold(f64::INFINITY, f64::min);
            if d.is_finite() && d > 1e-9 * scale {
                parts.push(clearing_out_check(trace, c0, 0.9 * d, t0)?);
            }
        }
        if !parts.is_empty() {
            out.push(combine("clearing_out", parts));
        }
    }

    if want(Suite::Phases) && t_last > t0 {
        let l0 = trace.initial_mass();
        let holder = cfg.holder_constant.unwrap_or_else(|| default_holder_constant(l0, c, budget.c1));
        let phases = trace.snapshots[0].network.phase_count();
        for p in 1..=phases {
            out.push(phase_holder_check(trace, p, holder, cfg.holder_cell)?);
            let parts: Vec<EstimateReport> = catalog
                .par_iter()
                .map(|(_, phi)| phase_transport_check(trace, p, phi, cfg.kappa))
                .collect::<Result<_>>()?;
            out.push(combine(&format!("phase_transport[{p}]"), parts));
        }
    }

    if want(Suite::Structure) {
        let parts: Vec<EstimateReport> = idx
            .iter()
            .map(|&i| structure_checks(&trace.snapshots[i].network, cfg.angle_tol_deg))
            .collect::<Result<_>>()?;
        out.push(combine("structure", parts));
    }

    out.sort_by(|a, b| a.name.cmp(&b.name));
    Ok(out)
}

/// Smallest `C` in `[1e-4, 1e4]` at which every constant-dependent check
/// passes on every trace; `None` if some check fails even at `1e4`.
pub fn fit_c_mz(traces: &[(&FlowTrace, &SobolevBudget)], cfg: &CheckConfig) -> Option<f64> {
    let mut best: f64 = 1e-4;
    for (trace, budget) in traces {
        for ineq in constant_dependent(trace, budget, cfg) {
            best = best.max(ineq.min_constant(1e-4, 1e4)?);
        }
    }
    Some(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{run, FlowOptions};
    use crate::forcing::ForcingField;
    use crate::network::circle;

    #[test]
    fn circle_suite_passes_and_is_sorted() {
        let opts = FlowOptions { record_every: 20, ..FlowOptions::default() };
        let trace = run(&circle(1.0, 64, Vec2::zeros()), &ForcingField::Zero, 0.1, &opts).unwrap();
        let reports = run_suite(&trace, &trace.budget, Suite::All, &CheckConfig::default()).unwrap();
        for r in &reports {
            assert!(r.pass, "{} failed: {:?}", r.name, r);
        }
        assert!(reports.windows(2).all(|w| w[0].name <= w[1].name));
    }

    #[test]
    fn fit_is_monotone_threshold() {
        let opts = FlowOptions { record_every: 20, ..FlowOptions::default() };
        let u = ForcingField::gaussian_swirl(1.0, 0.3);
        let trace = run(&circle(0.5, 48, Vec2::zeros()), &u, 0.05, &opts).unwrap();
        let cfg = CheckConfig::default();
        let c = fit_c_mz(&[(&trace, &trace.budget)], &cfg).unwrap();
        for i in constant_dependent(&trace, &trace.budget, &cfg) {
            assert!(i.holds(c * 1.0001));
            assert!(i.holds(c * 10.0));
        }
    }
}
