//! Mesh-level topology changes: vanishing closed curves, collapsing short
//! curves between junctions, and re-splitting the resulting four-way
//! junctions along the shorter pairing.

use serde::{Deserialize, Serialize};

use super::{Curve, CurveEnd, CurveNetwork, EndFlag, Junction};
use crate::error::{Error, Result};
use crate::geom::{cross, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum EventKind {
    ClosedCurveDeleted {
        curve: usize,
        length: f64,
        absorbed_phase: usize,
        into_phase: usize,
    },
    LoopDeleted {
        curve: usize,
        length: f64,
    },
    OpenCurveCollapsed {
        curve: usize,
        length: f64,
        merged_degree: usize,
    },
    JunctionSplit {
        length_before: f64,
        length_after: f64,
    },
    /// A merged junction of degree five or more is kept as is.
    HighDegreeJunction {
        degree: usize,
    },
    Extinction,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TopologyEvent {
    /// Filled in by the flow with the time of the step that produced it.
    pub time: Option<f64>,
    #[serde(flatten)]
    pub kind: EventKind,
}

impl TopologyEvent {
    fn new(kind: EventKind) -> Self {
        TopologyEvent { time: None, kind }
    }
}

struct Work {
    vertices: Vec<Vec2>,
    curves: Vec<Option<Curve>>,
    junctions: Vec<Option<Junction>>,
    phase_count: usize,
    seeds: Vec<super::PhaseSeed>,
}

impl Work {
    fn from(net: &CurveNetwork) -> Self {
        Work {
            vertices: net.vertices.clone(),
            curves: net.curves.iter().cloned().map(Some).collect(),
            junctions: net.junctions.iter().cloned().map(Some).collect(),
            phase_count: net.phase_count,
            seeds: net.seeds.clone(),
        }
    }

    /// Drops deleted curves and junctions and unused vertices, renumbering.
    fn compact(self) -> CurveNetwork {
        let mut curve_map = vec![usize::MAX; self.curves.len()];
        let mut curves = Vec::new();
        for (i, c) in self.curves.into_iter().enumerate() {
            if let Some(c) = c {
                curve_map[i] = curves.len();
                curves.push(c);
            }
        }
        let mut vmap = vec![usize::MAX; self.vertices.len()];
        let mut vertices = Vec::new();
        for c in &mut curves {
            for v in &mut c.ids {
                if vmap[*v] == usize::MAX {
                    vmap[*v] = vertices.len();
                    vertices.push(self.vertices[*v]);
                }
                *v = vmap[*v];
            }
        }
        let junctions = self
            .junctions
            .into_iter()
            .flatten()
            .map(|j| Junction {
                vertex: vmap[j.vertex],
                ends: j.ends.iter().map(|e| CurveEnd { curve: curve_map[e.curve], end: e.end }).collect(),
            })
            .collect();
        CurveNetwork::from_parts_unchecked(vertices, curves, junctions, self.phase_count, self.seeds)
    }
}

fn point_in_polygon(p: &Vec2, poly: &[Vec2]) -> bool {
    let mut inside = false;
    let n = poly.len();
    for i in 0..n {
        let (a, b) = (poly[i], poly[(i + 1) % n]);
        if (a.y > p.y) != (b.y > p.y) {
            let x = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
            if p.x < x {
                inside = !inside;
            }
        }
    }
    inside
}

fn junction_of(net: &CurveNetwork, vertex: usize) -> Option<usize> {
    net.junctions.iter().position(|j| j.vertex == vertex)
}

fn delete_closed(net: &CurveNetwork, c: usize, log: &mut Vec<TopologyEvent>) -> CurveNetwork {
    let curve = &net.curves[c];
    let length = net.curve_length(c);
    let ccw = net.curve_signed_area(c) >= 0.0;
    let (inside, outside) = if ccw { (curve.left, curve.right) } else { (curve.right, curve.left) };
    let poly: Vec<Vec2> = curve.ids.iter().map(|&v| net.vertices[v]).collect();
    let mut w = Work::from(net);
    w.curves[c] = None;
    w.seeds.retain(|s| !(s.phase == inside && point_in_polygon(&s.point, &poly)));
    log.push(TopologyEvent::new(EventKind::ClosedCurveDeleted {
        curve: c,
        length,
        absorbed_phase: inside,
        into_phase: outside,
    }));
    w.compact()
}

/// Orients curve `c` so that it ends (`to_end = true`) or starts at its
/// junction end `e`; returns vertex ids and (left, right).
fn oriented(curve: &Curve, end: EndFlag, to_end: bool) -> (Vec<usize>, usize, usize) {
    let keep = (end == EndFlag::End) == to_end;
    if keep {
        (curve.ids.clone(), curve.left, curve.right)
    } else {
        let mut ids = curve.ids.clone();
        ids.reverse();
        (ids, curve.right, curve.left)
    }
}

fn delete_loop(net: &CurveNetwork, c: usize, j: usize, log: &mut Vec<TopologyEvent>) -> Result<CurveNetwork> {
    let length = net.curve_length(c);
    let mut w = Work::from(net);
    w.curves[c] = None;
    let junc = w.junctions[j].as_mut().expect("junction exists");
    junc.ends.retain(|e| e.curve != c);
    log.push(TopologyEvent::new(EventKind::LoopDeleted { curve: c, length }));
    match junc.ends.len() {
        d if d >= 3 => Ok(w.compact()),
        2 => {
            let (e1, e2) = (junc.ends[0], junc.ends[1]);
            w.junctions[j] = None;
            if e1.curve == e2.curve {
                let mut curve = w.curves[e1.curve].take().expect("curve exists");
                curve.ids.pop();
                curve.closed = true;
                w.curves[e1.curve] = Some(curve);
                return Ok(w.compact());
            }
            let a = w.curves[e1.curve].take().expect("curve exists");
            let b = w.curves[e2.curve].take().expect("curve exists");
            let (mut ids, la, ra) = oriented(&a, e1.end, true);
            let (ids_b, lb, rb) = oriented(&b, e2.end, false);
            if (la, ra) != (lb, rb) {
                return Err(Error::Topology(format!(
                    "fusing curves {} and {} would join phase labels ({la},{ra}) and ({lb},{rb})",
                    e1.curve, e2.curve
                )));
            }
            ids.extend_from_slice(&ids_b[1..]);
            // The far ends may sit on junctions that refer to the old curves.
            let fused = e1.curve;
            let (start_v, end_v) = (ids[0], *ids.last().unwrap());
            for junc in w.junctions.iter_mut().flatten() {
                for e in &mut junc.ends {
                    if e.curve == e1.curve || e.curve == e2.curve {
                        e.curve = fused;
                        e.end = if junc.vertex == start_v && e.curve == fused && junc.vertex != end_v {
                            EndFlag::Start
                        } else {
                            EndFlag::End
                        };
                    }
                }
            }
            w.curves[fused] = Some(Curve { ids, closed: false, left: la, right: ra });
            Ok(w.compact())
        }
        d => Err(Error::Topology(format!("junction left with degree {d} after loop removal"))),
    }
}

fn sector_bisector(d_from: &Vec2, d_to: &Vec2) -> Vec2 {
    let a0 = d_from.y.atan2(d_from.x);
    let mut a1 = d_to.y.atan2(d_to.x);
    if a1 <= a0 {
        a1 += std::f64::consts::TAU;
    }
    let m = 0.5 * (a0 + a1);
    Vec2::new(m.cos(), m.sin())
}

/// Splits a degree-four junction into two triple junctions joined by a
/// bridge of length `bridge`, choosing the pairing of angular neighbours with
/// the smaller total length.
fn split_four(
    net: &CurveNetwork,
    j: usize,
    bridge: f64,
    min_bridge: f64,
    log: &mut Vec<TopologyEvent>,
) -> Result<CurveNetwork> {
    let junc = &net.junctions[j];
    let ends = net.ends_ccw(junc)?;
    let p = net.vertices[junc.vertex];
    let neighbour = |e: &CurveEnd| {
        let c = &net.curves[e.curve];
        let n = c.ids.len();
        net.vertices[match e.end {
            EndFlag::Start => c.ids[1],
            EndFlag::End => c.ids[n - 2],
        }]
    };
    let before = net.length();
    let try_bridge = |b: f64| {
        let mut best: Option<(f64, usize, Vec2, Vec2)> = None;
        for shift in 0..2 {
            let idx = |k: usize| (k + shift) % 4;
            let x1 = p + sector_bisector(&ends[idx(0)].1, &ends[idx(1)].1) * (0.5 * b);
            let x2 = p + sector_bisector(&ends[idx(2)].1, &ends[idx(3)].1) * (0.5 * b);
            let mut delta = (x2 - x1).norm();
            for k in 0..4 {
                let q = neighbour(&ends[idx(k)].0);
                let x = if k < 2 { x1 } else { x2 };
                delta += (q - x).norm() - (q - p).norm();
            }
            if best.as_ref().is_none_or(|c| delta < c.0) {
                best = Some((delta, shift, x1, x2));
            }
        }
        best.expect("two pairings")
    };
    // Scan shorter bridges, longer than `min_bridge`, for the shortest result.
    let mut b = bridge;
    let mut best = try_bridge(b);
    for _ in 0..64 {
        b *= 0.9;
        let next = try_bridge(b);
        if (next.3 - next.2).norm() <= min_bridge {
            break;
        }
        if next.0 < best.0 {
            best = next;
        }
    }
    let (delta, shift, x1, x2) = best;
    let idx = |k: usize| (k + shift) % 4;
    let mut w = Work::from(net);
    let old_v = junc.vertex;
    w.vertices[old_v] = x1;
    w.vertices.push(x2);
    let v2 = w.vertices.len() - 1;
    for k in 2..4 {
        let e = ends[idx(k)].0;
        let c = w.curves[e.curve].as_mut().expect("curve exists");
        match e.end {
            EndFlag::Start => c.ids[0] = v2,
            EndFlag::End => *c.ids.last_mut().unwrap() = v2,
        }
    }
    // Sectors cut by the bridge: after end 1 and after end 3 (counter-clockwise).
    let sector_a = net.end_sides(&ends[idx(1)].0).0;
    let sector_b = net.end_sides(&ends[idx(3)].0).0;
    let dir_a = sector_bisector(&ends[idx(1)].1, &ends[idx(2)].1);
    let wdir = x2 - x1;
    let (left, right) = if cross(&wdir, &dir_a) > 0.0 { (sector_a, sector_b) } else { (sector_b, sector_a) };
    w.curves.push(Some(Curve { ids: vec![old_v, v2], closed: false, left, right }));
    let bridge_id = w.curves.len() - 1;
    w.junctions[j] = Some(Junction {
        vertex: old_v,
        ends: vec![ends[idx(0)].0, ends[idx(1)].0, CurveEnd { curve: bridge_id, end: EndFlag::Start }],
    });
    w.junctions.push(Some(Junction {
        vertex: v2,
        ends: vec![ends[idx(2)].0, ends[idx(3)].0, CurveEnd { curve: bridge_id, end: EndFlag::End }],
    }));
    log.push(TopologyEvent::new(EventKind::JunctionSplit { length_before: before, length_after: before + delta }));
    Ok(w.compact())
}

fn collapse_open(
    net: &CurveNetwork,
    c: usize,
    j1: usize,
    j2: usize,
    (bridge, min_bridge): (f64, f64),
    log: &mut Vec<TopologyEvent>,
) -> Result<CurveNetwork> {
    let length = net.curve_length(c);
    let (v1, v2) = (net.junctions[j1].vertex, net.junctions[j2].vertex);
    let mid = (net.vertices[v1] + net.vertices[v2]) * 0.5;
    let mut w = Work::from(net);
    w.curves[c] = None;
    w.vertices[v1] = mid;
    for curve in w.curves.iter_mut().flatten() {
        for v in curve.ids.iter_mut() {
            if *v == v2 {
                *v = v1;
            }
        }
    }
    let mut ends: Vec<CurveEnd> = net.junctions[j1].ends.clone();
    ends.extend_from_slice(&net.junctions[j2].ends);
    ends.retain(|e| e.curve != c);
    let degree = ends.len();
    w.junctions[j1] = Some(Junction { vertex: v1, ends });
    w.junctions[j2] = None;
    log.push(TopologyEvent::new(EventKind::OpenCurveCollapsed { curve: c, length, merged_degree: degree }));
    let merged = w.compact();
    let jm = junction_of(&merged, merged_vertex(&merged, mid)).expect("merged junction exists");
    match degree {
        4 => split_four(&merged, jm, bridge, min_bridge, log),
        d if d >= 5 => {
            log.push(TopologyEvent::new(EventKind::HighDegreeJunction { degree: d }));
            Ok(merged)
        }
        _ => Ok(merged),
    }
}

fn merged_vertex(net: &CurveNetwork, at: Vec2) -> usize {
    net.junctions
        .iter()
        .map(|j| j.vertex)
        .min_by(|&a, &b| (net.vertices[a] - at).norm().total_cmp(&(net.vertices[b] - at).norm()))
        .expect("network has junctions")
}

/// Applies topology events until none is pending.
///
/// Closed curves shorter than `length_tol` are deleted; open curves shorter
/// than `length_tol` joining two junctions are collapsed, and a resulting
/// degree-four junction is re-split with a bridge of length at most
/// `max(junction_tol, 2 * length_tol)`, shortened to the length-minimizing
/// candidate that stays longer than `length_tol`.
pub fn topology_events(
    net: &CurveNetwork,
    length_tol: f64,
    junction_tol: f64,
) -> Result<(CurveNetwork, Vec<TopologyEvent>)> {
    if !(length_tol > 0.0 && junction_tol > 0.0) {
        return Err(Error::InvalidArgument("topology tolerances must be positive".into()));
    }
    let bridge = junction_tol.max(2.0 * length_tol);
    if (0..net.curves.len()).all(|c| net.curve_length(c) >= length_tol) {
        return Ok((net.clone(), Vec::new()));
    }
    let had_curves = !net.curves.is_empty();
    let mut cur = net.clone();
    let mut log = Vec::new();
    // Each event removes a curve or raises the minimum curve length, so this terminates.
    for _ in 0..10_000 {
        let short = (0..cur.curves.len()).find(|&c| {
            cur.curve_length(c) < length_tol && {
                let curve = &cur.curves[c];
                curve.closed
                    || (junction_of(&cur, curve.ids[0]).is_some()
                        && junction_of(&cur, *curve.ids.last().unwrap()).is_some())
            }
        });
        let Some(c) = short else { break };
        let curve = &cur.curves[c];
        cur = if curve.closed {
            delete_closed(&cur, c, &mut log)
        } else {
            let j1 = junction_of(&cur, curve.ids[0]).unwrap();
            let j2 = junction_of(&cur, *curve.ids.last().unwrap()).unwrap();
            if j1 == j2 {
                delete_loop(&cur, c, j1, &mut log)?
            } else {
                collapse_open(&cur, c, j1, j2, (bridge, length_tol), &mut log)?
            }
        };
    }
    if had_curves && cur.curves.is_empty() {
        log.push(TopologyEvent::new(EventKind::Extinction));
    }
    if !cur.curves.is_empty() {
        cur.validate().map_err(|e| Error::Topology(format!("network invalid after events: {e}")))?;
    }
    Ok((cur, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::vec2;
    use crate::network::{circle, steiner_triod, PhaseSeed};

    #[test]
    fn tiny_circle_is_removed() {
        let r = 1e-6 / (2.0 * std::f64::consts::PI);
        let net = circle(r, 8, Vec2::zeros());
        let (out, log) = topology_events(&net, 1e-3, 2e-3).unwrap();
        assert!(out.is_empty());
        assert!(matches!(log[0].kind, EventKind::ClosedCurveDeleted { absorbed_phase: 1, into_phase: 2, .. }));
        assert_eq!(log.last().unwrap().kind, EventKind::Extinction);
        assert_eq!(out.seeds().len(), 1);
        assert_eq!(out.unbounded_phase(), Some(2));
    }

    #[test]
    fn nothing_short_means_no_events() {
        let net = steiner_triod(1.0, 4);
        let (out, log) = topology_events(&net, 1e-3, 2e-3).unwrap();
        assert_eq!(out, net);
        assert!(log.is_empty());
    }

    /// Two triple junctions joined by a short vertical bridge whose arms pair
    /// badly: the upper junction carries the two upper arms, which open
    /// almost flat.
    pub(crate) fn bridged_triods(b: f64) -> CurveNetwork {
        let vertices = vec![
            vec2(0.0, 0.5 * b),  // 0 upper junction
            vec2(0.0, -0.5 * b), // 1 lower junction
            vec2(-1.0, 0.2),     // 2
            vec2(1.0, 0.2),      // 3
            vec2(-1.0, -0.2),    // 4
            vec2(1.0, -0.2),     // 5
        ];
        // Phases: 1 above, 2 below, 3 left, 4 right.
        let curves = vec![
            Curve { ids: vec![1, 0], closed: false, left: 3, right: 4 }, // bridge, upward
            Curve { ids: vec![0, 2], closed: false, left: 3, right: 1 },
            Curve { ids: vec![0, 3], closed: false, left: 1, right: 4 },
            Curve { ids: vec![1, 4], closed: false, left: 2, right: 3 },
            Curve { ids: vec![1, 5], closed: false, left: 4, right: 2 },
        ];
        let junctions = vec![
            Junction {
                vertex: 0,
                ends: vec![
                    CurveEnd { curve: 0, end: EndFlag::End },
                    CurveEnd { curve: 1, end: EndFlag::Start },
                    CurveEnd { curve: 2, end: EndFlag::Start },
                ],
            },
            Junction {
                vertex: 1,
                ends: vec![
                    CurveEnd { curve: 0, end: EndFlag::Start },
                    CurveEnd { curve: 3, end: EndFlag::Start },
                    CurveEnd { curve: 4, end: EndFlag::Start },
                ],
            },
        ];
        let seeds = vec![
            PhaseSeed { phase: 1, point: vec2(0.0, 1.0) },
            PhaseSeed { phase: 2, point: vec2(0.0, -1.0) },
            PhaseSeed { phase: 3, point: vec2(-0.9, 0.0) },
            PhaseSeed { phase: 4, point: vec2(0.9, 0.0) },
        ];
        CurveNetwork::new(vertices, curves, junctions, 4, seeds).unwrap()
    }

    #[test]
    fn short_bridge_flips_and_shortens() {
        let net = bridged_triods(5e-4);
        let before = net.length();
        let (out, log) = topology_events(&net, 1e-3, 2e-3).unwrap();
        assert!(matches!(log[0].kind, EventKind::OpenCurveCollapsed { merged_degree: 4, .. }));
        let EventKind::JunctionSplit { length_before, length_after } = log[1].kind else {
            panic!("expected split, got {:?}", log)
        };
        assert!(length_after < length_before);
        assert_eq!(out.junctions().len(), 2);
        assert!(out.length() < before);
        // The new bridge is horizontal: it separates phases 1 and 2.
        let bridge = out.curves().iter().find(|c| {
            c.ids.len() == 2 && {
                let (a, b) = (out.vertices()[c.ids[0]], out.vertices()[c.ids[1]]);
                (a - b).norm() < 0.01
            }
        });
        let bridge = bridge.expect("bridge present");
        let mut labels = [bridge.left, bridge.right];
        labels.sort();
        assert_eq!(labels, [1, 2]);
        out.validate().unwrap();
        for j in 0..2 {
            let (_, angles) = out.junction_balance(j).unwrap();
            assert_eq!(angles.len(), 3);
        }
    }

    #[test]
    fn rejects_bad_tolerances() {
        assert!(topology_events(&steiner_triod(1.0, 2), 0.0, 1.0).is_err());
    }
}
