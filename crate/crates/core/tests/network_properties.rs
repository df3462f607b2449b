use std::f64::consts::PI;

use curveflow::geom::{rotation, vec2, Vec2};
use curveflow::network::{
    circle, remesh, star, symmetric_difference_area, topology_events, Curve, CurveEnd, CurveNetwork, EndFlag, Junction,
    PhaseSeed, VertexRole,
};
use proptest::prelude::*;

/// Two triple junctions joined by a bridge of length `d`, arms pinned.
fn h_network(d: f64, n: usize) -> CurveNetwork {
    let mut vertices = vec![vec2(-0.5 * d, 0.0), vec2(0.5 * d, 0.0)];
    let mut arm = |from: usize, to: Vec2| {
        let a = vertices[from];
        let mut ids = vec![from];
        for s in 1..=n {
            vertices.push(a + (to - a) * (s as f64 / n as f64));
            ids.push(vertices.len() - 1);
        }
        ids
    };
    let up_left = arm(0, vec2(-1.0, 1.0));
    let down_left = arm(0, vec2(-1.0, -1.0));
    let up_right = arm(1, vec2(1.0, 1.0));
    let down_right = arm(1, vec2(1.0, -1.0));
    let curves = vec![
        Curve { ids: vec![0, 1], closed: false, left: 1, right: 2 },
        Curve { ids: up_left, closed: false, left: 3, right: 1 },
        Curve { ids: down_left, closed: false, left: 2, right: 3 },
        Curve { ids: up_right, closed: false, left: 1, right: 4 },
        Curve { ids: down_right, closed: false, left: 4, right: 2 },
    ];
    let start = |c| CurveEnd { curve: c, end: EndFlag::Start };
    let junctions = vec![
        Junction { vertex: 0, ends: vec![start(0), start(1), start(2)] },
        Junction { vertex: 1, ends: vec![CurveEnd { curve: 0, end: EndFlag::End }, start(3), start(4)] },
    ];
    let seeds = vec![
        PhaseSeed { phase: 1, point: vec2(0.0, 0.5) },
        PhaseSeed { phase: 2, point: vec2(0.0, -0.5) },
        PhaseSeed { phase: 3, point: vec2(-0.9, 0.0) },
        PhaseSeed { phase: 4, point: vec2(0.9, 0.0) },
    ];
    CurveNetwork::new(vertices, curves, junctions, 4, seeds).expect("valid H network")
}

/// Star-shaped closed polygon with the given radii at equal angles.
fn blob(radii: &[f64]) -> CurveNetwork {
    let n = radii.len();
    let pts: Vec<Vec2> = radii
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let a = 2.0 * PI * k as f64 / n as f64;
            vec2(r * a.cos(), r * a.sin())
        })
        .collect();
    let seeds = vec![PhaseSeed { phase: 1, point: Vec2::zeros() }, PhaseSeed { phase: 2, point: vec2(10.0, 0.0) }];
    CurveNetwork::new(pts, vec![Curve { ids: (0..n).collect(), closed: true, left: 1, right: 2 }], vec![], 2, seeds)
        .expect("valid blob")
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn remesh_keeps_length_when_old_vertices_are_on_the_grid(n in 3usize..40, r in 0.1f64..5.0, k in 1usize..6) {
        let net = circle(r, n, Vec2::zeros());
        let side = net.length() / n as f64;
        let out = remesh(&net, side / k as f64).unwrap();
        prop_assert!((out.length() - net.length()).abs() <= 1e-9 * net.length());
        prop_assert_eq!(out.segment_count(), n * k);
    }

    #[test]
    fn remesh_never_lengthens_and_converges(radii in prop::collection::vec(0.5f64..2.0, 5..20), h in 0.01f64..0.5) {
        let net = blob(&radii);
        let out = remesh(&net, h).unwrap();
        prop_assert!(out.length() <= net.length() * (1.0 + 1e-12));
        let fine = remesh(&net, h / 64.0).unwrap();
        prop_assert!(net.length() - fine.length() <= net.length() - out.length() + 1e-12);
        out.validate().unwrap();
    }

    #[test]
    fn regular_polygon_curvature_is_close_to_inverse_radius(n in 16usize..400, r in 0.2f64..4.0) {
        let net = circle(r, n, Vec2::zeros());
        let bound = 4.0 / (n * n) as f64 * 10.0;
        for v in 0..n {
            let h = net.discrete_curvature(v).unwrap();
            prop_assert!((h.norm() * r - 1.0).abs() <= bound);
            // Points inward.
            prop_assert!(h.dot(&net.vertices()[v]) < 0.0);
        }
    }

    #[test]
    fn junction_balance_is_rigid_invariant(
        a1 in 20.0f64..100.0, a2 in 20.0f64..100.0, angle in -PI..PI, sx in -5.0f64..5.0, sy in -5.0f64..5.0,
    ) {
        let net = star(&[0.0, a1, a1 + a2], 1.0, 4).unwrap();
        let moved = net.transformed(&rotation(angle), &vec2(sx, sy));
        let (b0, ang0) = net.junction_balance(0).unwrap();
        let (b1, ang1) = moved.junction_balance(0).unwrap();
        prop_assert!((b0.norm() - b1.norm()).abs() <= 1e-12);
        prop_assert!((rotation(angle) * b0 - b1).norm() <= 1e-12);
        for (x, y) in ang0.iter().zip(&ang1) {
            prop_assert!((x - y).abs() <= 1e-9);
        }
    }

    #[test]
    fn topology_events_never_lengthen(d in 0.001f64..0.3, n in 1usize..6, tol in 0.01f64..0.2) {
        let net = h_network(d, n);
        let (out, events) = topology_events(&net, tol, 0.05).unwrap();
        prop_assert!(out.length() <= net.length() + 1e-12);
        prop_assert_eq!(events.is_empty(), d >= tol);
        if !out.is_empty() {
            out.validate().unwrap();
        }
    }

    #[test]
    fn small_loops_are_removed_without_lengthening(r in 0.001f64..0.05, n in 3usize..12) {
        let net = circle(r, n, Vec2::zeros());
        let (out, events) = topology_events(&net, 0.5, 0.1).unwrap();
        prop_assert!(out.is_empty());
        prop_assert!(!events.is_empty());
        prop_assert!(out.length() <= net.length());
    }

    #[test]
    fn symmetric_difference_with_itself_is_zero(radii in prop::collection::vec(0.5f64..2.0, 5..12), cell in 0.01f64..0.2) {
        let net = blob(&radii);
        prop_assert_eq!(symmetric_difference_area(&net, &net, 1, cell).unwrap(), 0.0);
    }

    #[test]
    fn bounded_phase_area_matches_shoelace(radii in prop::collection::vec(0.5f64..2.0, 5..12)) {
        let net = blob(&radii);
        let n = radii.len() as f64;
        let exact: f64 = (0..radii.len())
            .map(|k| 0.5 * radii[k] * radii[(k + 1) % radii.len()] * (2.0 * PI / n).sin())
            .sum();
        let a = net.phase_area(1).unwrap().unwrap();
        prop_assert!((a - exact).abs() <= 1e-12 * exact.max(1.0));
        prop_assert_eq!(net.phase_area(2).unwrap(), None);
    }
}

#[test]
fn h_network_roles() {
    let net = h_network(0.2, 3);
    let roles = net.vertex_roles();
    assert_eq!(roles[0], VertexRole::Junction(0));
    assert_eq!(roles[1], VertexRole::Junction(1));
    let pinned = roles.iter().filter(|r| matches!(r, VertexRole::Pinned { .. })).count();
    assert_eq!(pinned, 4);
    net.validate().unwrap();
}
