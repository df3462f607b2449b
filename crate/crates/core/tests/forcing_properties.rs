use curveflow::forcing::{mollify, perp_project, sobolev_budget, ForcingField, MollifierParams};
use curveflow::geom::{vec2, Vec2};
use proptest::prelude::*;

fn catalog() -> Vec<ForcingField> {
    vec![
        ForcingField::constant_patch(vec2(0.3, -0.5), vec2(0.1, 0.2), 0.4),
        ForcingField::gaussian_swirl(1.3, 0.2),
        ForcingField::shear_patch(0.8, vec2(-0.2, 0.1), 0.5),
        ForcingField::gaussian_swirl(0.7, 0.25).rotated(0.9).translated(vec2(0.2, -0.1)),
        ForcingField::shear_patch(0.8, vec2(0.0, 0.1), 0.3).rescaled(2.0).scaled(-1.5),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn perp_project_is_an_orthogonal_projection(u in prop::array::uniform2(-5.0f64..5.0), a in -3.2f64..3.2) {
        let tau = vec2(a.cos(), a.sin());
        let u = vec2(u[0], u[1]);
        let p = perp_project(&u, &tau).unwrap();
        prop_assert!(p.dot(&tau).abs() <= 1e-12 * (1.0 + u.norm()));
        prop_assert!(p.norm() <= u.norm() + 1e-12);
        let pp = perp_project(&p, &tau).unwrap();
        prop_assert!((pp - p).norm() <= 1e-12 * (1.0 + u.norm()));
    }

    #[test]
    fn perp_project_rejects_non_unit_tangents(s in 0.0f64..0.99) {
        prop_assert!(perp_project(&vec2(1.0, 1.0), &vec2(s, 0.0)).is_err());
    }

    #[test]
    fn catalog_gradients_match_differences(x in prop::array::uniform2(-0.8f64..0.8), t in 0.0f64..1.0) {
        let x = vec2(x[0], x[1]);
        let h = 1e-6;
        for f in catalog() {
            let g = f.gradient(&x, t);
            for j in 0..2 {
                let e = if j == 0 { vec2(h, 0.0) } else { vec2(0.0, h) };
                let fd = (f.value(&(x + e), t) - f.value(&(x - e), t)) / (2.0 * h);
                for i in 0..2 {
                    prop_assert!((g[(i, j)] - fd[i]).abs() <= 1e-5 * (1.0 + g.abs().max()), "{f:?} at {x:?}");
                }
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn mollification_commutes_with_translation(
        s in prop::array::uniform2(-0.5f64..0.5),
        x in prop::array::uniform2(-1.0f64..1.0),
        t in 0.1f64..2.0,
    ) {
        // Inside the region where the outer cutoff is identically one.
        let u = ForcingField::gaussian_swirl(1.0, 0.3);
        let s = vec2(s[0], s[1]);
        let x = vec2(x[0], x[1]);
        let p = MollifierParams { m: 4 };
        let a = mollify(&u.clone().translated(s), &p).unwrap().sample(&x, t);
        let b = mollify(&u, &p).unwrap().sample(&(x - s), t);
        prop_assert!((a.0 - b.0).norm() <= 1e-12);
        prop_assert!((a.1 - b.1).abs().max() <= 1e-11);
    }

    #[test]
    fn c1_is_invariant_under_parabolic_rescaling(lambda in 0.5f64..2.0) {
        let u = ForcingField::gaussian_swirl(1.0, 0.3);
        let t = 0.5;
        let b = sobolev_budget(&u, t, 16).unwrap();
        let r = sobolev_budget(&u.rescaled(lambda), t / (lambda * lambda), 16).unwrap();
        prop_assert!((r.c1 / b.c1 - 1.0).abs() <= 0.02, "{} vs {}", r.c1, b.c1);
        prop_assert!((r.sup_l2 / b.sup_l2 - 1.0).abs() <= 0.02);
    }
}

#[test]
fn mollification_of_zero_is_zero() {
    let z = mollify(&ForcingField::Zero, &MollifierParams { m: 3 }).unwrap();
    assert!(z.is_zero());
    assert_eq!(z.value(&Vec2::zeros(), 0.5), Vec2::zeros());
}
