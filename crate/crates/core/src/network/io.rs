use serde::{Deserialize, Serialize};

use super::{Curve, CurveEnd, CurveNetwork, EndFlag, Junction, PhaseSeed};
use crate::error::{Error, Result};
use crate::geom::Vec2;

/// On-disk network document.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NetworkFile {
    pub vertices: Vec<[f64; 2]>,
    pub curves: Vec<CurveRecord>,
    #[serde(default)]
    pub junctions: Vec<JunctionRecord>,
    pub phase_count: usize,
    #[serde(default)]
    pub seeds: Vec<SeedRecord>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveRecord {
    pub ids: Vec<usize>,
    pub closed: bool,
    pub left: usize,
    pub right: usize,
}

/// `ends` holds `[curve, endflag]` pairs, endflag 0 for the start and 1 for the end.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JunctionRecord {
    pub vertex: usize,
    pub ends: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SeedRecord {
    pub phase: usize,
    pub point: [f64; 2],
}

impl From<&CurveNetwork> for NetworkFile {
    fn from(net: &CurveNetwork) -> Self {
        NetworkFile {
            vertices: net.vertices.iter().map(|v| [v.x, v.y]).collect(),
            curves: net
                .curves
                .iter()
                .map(|c| CurveRecord { ids: c.ids.clone(), closed: c.closed, left: c.left, right: c.right })
                .collect(),
            junctions: net
                .junctions
                .iter()
                .map(|j| JunctionRecord {
                    vertex: j.vertex,
                    ends: j.ends.iter().map(|e| [e.curve, if e.end == EndFlag::Start { 0 } else { 1 }]).collect(),
                })
                .collect(),
            phase_count: net.phase_count,
            seeds: net.seeds.iter().map(|s| SeedRecord { phase: s.phase, point: [s.point.x, s.point.y] }).collect(),
        }
    }
}

impl TryFrom<NetworkFile> for CurveNetwork {
    type Error = Error;

    fn try_from(f: NetworkFile) -> Result<Self> {
        let junctions = f
            .junctions
            .into_iter()
            .map(|j| {
                let ends = j
                    .ends
                    .into_iter()
                    .map(|[curve, flag]| match flag {
                        0 => Ok(CurveEnd { curve, end: EndFlag::Start }),
                        1 => Ok(CurveEnd { curve, end: EndFlag::End }),
                        other => Err(Error::Parse(format!("end flag {other} is not 0 or 1"))),
                    })
                    .collect::<Result<_>>()?;
                Ok(Junction { vertex: j.vertex, ends })
            })
            .collect::<Result<_>>()?;
        let net = CurveNetwork::from_parts_unchecked(
            f.vertices.into_iter().map(|[x, y]| Vec2::new(x, y)).collect(),
            f.curves
                .into_iter()
                .map(|c| Curve { ids: c.ids, closed: c.closed, left: c.left, right: c.right })
                .collect(),
            junctions,
            f.phase_count,
            f.seeds
                .into_iter()
                .map(|s| PhaseSeed { phase: s.phase, point: Vec2::new(s.point[0], s.point[1]) })
                .collect(),
        );
        // Empty networks (after extinction) are valid snapshots.
        if !net.curves.is_empty() {
            net.validate()?;
        } else if net.phase_count < 2 {
            return Err(Error::InvalidNetwork("phase_count < 2".into()));
        }
        Ok(net)
    }
}

impl Serialize for CurveNetwork {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        NetworkFile::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for CurveNetwork {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = NetworkFile::deserialize(d)?;
        CurveNetwork::try_from(f).map_err(serde::de::Error::custom)
    }
}

impl CurveNetwork {
    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("network serializes")
    }
}
