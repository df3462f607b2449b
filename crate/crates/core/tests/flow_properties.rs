use std::f64::consts::PI;

use curveflow::flow::{run, FlowOptions};
use curveflow::forcing::ForcingField;
use curveflow::geom::{rotation, vec2, Vec2};
use curveflow::network::{circle, Curve, CurveNetwork, PhaseSeed};
use proptest::prelude::*;

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

fn quick() -> FlowOptions {
    FlowOptions { record_every: 10, snapshot_density: false, ..FlowOptions::default() }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn unforced_mass_never_increases(radii in prop::collection::vec(0.7f64..1.3, 24..40)) {
        let trace = run(&blob(&radii), &ForcingField::Zero, 0.01, &quick()).unwrap();
        prop_assert!(trace.failure.is_none());
        for s in &trace.steps {
            prop_assert!(s.dmass() <= 1e-12 * s.mass, "mass grew by {}", s.dmass());
        }
        for w in trace.snapshots.windows(2) {
            prop_assert!(w[1].ledger.mass <= w[0].ledger.mass * (1.0 + 1e-12));
        }
    }

    #[test]
    fn ledger_accounts_for_every_mass_change(
        radii in prop::collection::vec(0.7f64..1.3, 24..40),
        amp in -1.0f64..1.0,
    ) {
        let u = ForcingField::gaussian_swirl(amp, 0.4).translated(vec2(0.2, 0.0));
        let trace = run(&blob(&radii), &u, 0.01, &quick()).unwrap();
        let m0 = trace.snapshots[0].ledger.mass;
        for s in &trace.snapshots {
            prop_assert!((s.ledger.mass - m0 - s.ledger.dmass_cum).abs() <= 1e-10 * m0);
            prop_assert!((s.ledger.h - 0.25 * s.ledger.dissipation_cum).abs() <= 1e-14 * (1.0 + s.ledger.h));
            prop_assert!((s.ledger.psi1() - (s.ledger.mass + s.ledger.h - s.ledger.u)).abs() == 0.0);
        }
    }

    #[test]
    fn psi2_never_increases(amp in 0.2f64..2.0, width in 0.15f64..0.4) {
        let u = ForcingField::gaussian_swirl(amp, width).translated(vec2(0.5, 0.0));
        let trace = run(&circle(0.6, 48, Vec2::zeros()), &u, 0.02, &quick()).unwrap();
        let psi: Vec<f64> = trace.snapshots.iter().map(|s| s.ledger.psi2()).collect();
        for w in psi.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-12 * w[0].abs(), "{psi:?}");
        }
    }

    #[test]
    fn rotation_equivariance(angle in -PI..PI) {
        let net = circle(0.5, 48, vec2(0.15, -0.05));
        let u = ForcingField::shear_patch(0.6, vec2(0.1, 0.0), 0.5);
        let a = run(&net, &u, 0.01, &quick()).unwrap();
        let rot = rotation(angle);
        let b = run(&net.transformed(&rot, &Vec2::zeros()), &u.rotated(angle), 0.01, &quick()).unwrap();
        prop_assert_eq!(a.snapshots.len(), b.snapshots.len());
        for (p, q) in a.final_network().vertices().iter().zip(b.final_network().vertices()) {
            prop_assert!((rot * p - q).norm() <= 1e-9);
        }
        let (ma, mb) = (a.snapshots.last().unwrap().ledger.mass, b.snapshots.last().unwrap().ledger.mass);
        prop_assert!((ma - mb).abs() <= 1e-10 * ma);
    }
}

#[test]
fn shrinking_circle_error_drops_under_refinement() {
    let t: f64 = 0.1;
    let exact = 2.0 * PI * (1.0 - 2.0 * t).sqrt();
    let err = |n: usize| {
        let trace = run(&circle(1.0, n, Vec2::zeros()), &ForcingField::Zero, t, &quick()).unwrap();
        (trace.snapshots.last().unwrap().ledger.mass - exact).abs()
    };
    let (coarse, fine) = (err(32), err(64));
    assert!(fine < 0.5 * coarse, "errors {coarse} and {fine}");
}
