use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::FlowOptions;
use crate::error::{Error, Result};
use crate::forcing::{ForcingField, SobolevBudget};
use crate::network::{CurveNetwork, TopologyEvent};
use crate::varifold::{DensityWitness, DiscreteVarifold};

/// Per-step ledger. Motion quantities refer to the configuration before the
/// step; mass changes are split by cause.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub mass: f64,
    pub dmass_motion: f64,
    pub dmass_remesh: f64,
    pub dmass_topology: f64,
    /// `sum |h|^2 dual * dt`.
    pub dissipation: f64,
    /// `-sum h . u_perp dual * dt`.
    pub forcing_work: f64,
    pub u_normal_sq: f64,
    pub u_trace: f64,
    pub max_displacement: f64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub events: Vec<TopologyEvent>,
}

impl StepRecord {
    pub fn dmass(&self) -> f64 {
        self.dmass_motion + self.dmass_remesh + self.dmass_topology
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SnapshotLedger {
    pub mass: f64,
    pub density_ratio: Option<DensityWitness>,
    /// Area of each bounded phase; `None` for unbounded or undetermined ones.
    pub phase_areas: Vec<Option<f64>>,
    pub l2_curvature: f64,
    pub dissipation_cum: f64,
    pub forcing_work_cum: f64,
    pub u_trace_cum: f64,
    pub dmass_cum: f64,
    pub dirichlet_cum: f64,
    /// `H(t) = 1/4 int_0^t int |h|^2`.
    pub h: f64,
    /// `U(t) = C int_0^t int |grad u|^2`.
    pub u: f64,
}

impl SnapshotLedger {
    pub fn psi1(&self) -> f64 {
        self.mass + self.h - self.u
    }

    pub fn psi2(&self) -> f64 {
        self.mass - self.u
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Snapshot {
    pub t: f64,
    pub step: usize,
    pub network: CurveNetwork,
    pub ledger: SnapshotLedger,
}

impl Snapshot {
    pub fn varifold(&self) -> DiscreteVarifold {
        DiscreteVarifold::from_network(&self.network)
    }
}

/// Time series of the bookkeeping functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub t: Vec<f64>,
    pub mass: Vec<f64>,
    pub h: Vec<f64>,
    pub u: Vec<f64>,
    pub psi1: Vec<f64>,
    pub psi2: Vec<f64>,
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowTrace {
    pub snapshots: Vec<Snapshot>,
    pub steps: Vec<StepRecord>,
    pub forcing: ForcingField,
    pub options: FlowOptions,
    pub t_end: f64,
    pub u_constant: f64,
    pub budget: SobolevBudget,
    pub failure: Option<String>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
enum Line {
    Header { forcing: ForcingField, options: FlowOptions, t_end: f64, u_constant: f64, budget: SobolevBudget },
    Snapshot(Snapshot),
    Step(StepRecord),
    Summary(TraceSummary),
}

impl FlowTrace {
    pub fn final_network(&self) -> &CurveNetwork {
        &self.snapshots.last().expect("trace has a snapshot").network
    }

    /// Target segment length of the run.
    pub fn spacing(&self) -> f64 {
        self.options.remesh_spacing.unwrap_or_else(|| {
            let net = &self.snapshots[0].network;
            net.length() / net.segment_count().max(1) as f64
        })
    }

    /// Largest step size used inside `[t1, t2]`.
    pub fn max_dt(&self, t1: f64, t2: f64) -> f64 {
        self.steps.iter().filter(|s| s.t + s.dt > t1 && s.t < t2).map(|s| s.dt).fold(0.0, f64::max)
    }

    pub fn initial_mass(&self) -> f64 {
        self.snapshots[0].ledger.mass
    }

    pub fn times(&self) -> Vec<f64> {
        self.snapshots.iter().map(|s| s.t).collect()
    }

    pub fn summary(&self) -> TraceSummary {
        let l = || self.snapshots.iter().map(|s| &s.ledger);
        TraceSummary {
            t: self.times(),
            mass: l().map(|x| x.mass).collect(),
            h: l().map(|x| x.h).collect(),
            u: l().map(|x| x.u).collect(),
            psi1: l().map(|x| x.psi1()).collect(),
            psi2: l().map(|x| x.psi2()).collect(),
            failure: self.failure.clone(),
        }
    }

    /// One JSON object per line: header, snapshots, steps, summary.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        let mut put = |line: &Line| -> Result<()> {
            serde_json::to_writer(&mut w, line)?;
            w.write_all(b"\n")?;
            Ok(())
        };
        put(&Line::Header {
            forcing: self.forcing.clone(),
            options: self.options.clone(),
            t_end: self.t_end,
            u_constant: self.u_constant,
            budget: self.budget.clone(),
        })?;
        for s in &self.snapshots {
            put(&Line::Snapshot(s.clone()))?;
        }
        for s in &self.steps {
            put(&Line::Step(s.clone()))?;
        }
        put(&Line::Summary(self.summary()))
    }

    pub fn to_jsonl(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)?;
        String::from_utf8(buf).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn read_jsonl<R: BufRead>(r: R) -> Result<Self> {
        let mut header = None;
        let mut snapshots = Vec::new();
        let mut steps = Vec::new();
        let mut failure = None;
        for (k, line) in r.lines().enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let rec: Line =
                serde_json::from_str(&line).map_err(|e| Error::Parse(format!("trace line {}: {e}", k + 1)))?;
            match rec {
                Line::Header { forcing, options, t_end, u_constant, budget } => {
                    header = Some((forcing, options, t_end, u_constant, budget))
                }
                Line::Snapshot(s) => snapshots.push(s),
                Line::Step(s) => steps.push(s),
                Line::Summary(s) => failure = s.failure,
            }
        }
        let (forcing, options, t_end, u_constant, budget) =
            header.ok_or_else(|| Error::Parse("trace has no header line".into()))?;
        if snapshots.is_empty() {
            return Err(Error::Parse("trace has no snapshots".into()));
        }
        if snapshots.windows(2).any(|w| !(w[1].t > w[0].t)) {
            return Err(Error::Parse("snapshot times are not strictly increasing".into()));
        }
        Ok(FlowTrace { snapshots, steps, forcing, options, t_end, u_constant, budget, failure })
    }

    pub fn from_jsonl(text: &str) -> Result<Self> {
        Self::read_jsonl(text.as_bytes())
    }
}
