use nalgebra::DVector;
use proptest::prelude::*;

use soliton_core::charts::*;
use soliton_core::mesh::Mesh;
use soliton_core::translators::{grim_reaper_chart, rot_chart, solve_rotational_translator};
use soliton_core::GeomError;

fn registered() -> Vec<Box<dyn Chart>> {
    vec![
        Box::new(Sphere::unit(2)),
        Box::new(Sphere::new(3, 2.5, Some(vec![1.0, 0.0, -1.0, 0.5])).unwrap()),
        Box::new(Plane::new(2, 5.0, 1.0)),
        Box::new(Paraboloid::new(3, 0.8, 1.0)),
        Box::new(WaveGraph::random(2, 4, 0.3, 1.5, 3)),
        Box::new(grim_reaper_chart(3).unwrap()),
        Box::new(rot_chart(solve_rotational_translator(2, 1, 5.0, 1e-10).unwrap())),
    ]
}

#[test]
fn sphere_is_umbilic() {
    for radius in [1.0, 3.0] {
        let s = Sphere::new(3, radius, None).unwrap();
        for p in Mesh::random(&s, 30, 0.0, 1).unwrap().points {
            let pg = point_geometry(&s, &p.u).unwrap();
            let d = pg.a.matrix() - nalgebra::DMatrix::identity(3, 3) / radius;
            assert!(d.amax() < 1e-10, "{d}");
            assert!((pg.sigma.sigma(2) - 3.0 / (radius * radius)).abs() < 1e-9);
        }
    }
}

#[test]
fn plane_is_flat() {
    let p = Plane::new(3, 5.0, 2.0);
    let pg = point_geometry(&p, &[1.0, -2.0, 0.5]).unwrap();
    assert!(pg.a.matrix().amax() < 1e-15);
    assert_eq!(pg.normal[3], 1.0);
}

#[test]
fn paraboloid_vertex() {
    let c = 0.8;
    let p = Paraboloid::new(2, c, 1.0);
    let pg = point_geometry(&p, &[0.0, 0.0]).unwrap();
    assert!((pg.sigma.sigma(1) - 2.0 * c).abs() < 1e-14);
    assert!((pg.sigma.sigma(2) - c * c).abs() < 1e-14);
}

#[test]
fn grim_reaper_is_a_translator() {
    let gr = grim_reaper_chart(3).unwrap();
    let v = [0.0, 0.0, 0.0, 1.0];
    for p in Mesh::random(&gr, 300, 0.0, 4).unwrap().points {
        assert!(soliton_residual(&gr, &p.u, &v, 1).unwrap().abs() < 1e-10);
        // one nonzero principal curvature: σ_2 = 0
        let pg = point_geometry(&gr, &p.u).unwrap();
        assert!(pg.sigma.sigma(2).abs() < 1e-12);
    }
    // intrinsic distance along the curve is asinh(tan x)
    let x: f64 = 1.2;
    let exact = x.tan().asinh();
    assert!((gr.intrinsic_distance(&[x, 0.0, 0.0]).unwrap() - exact).abs() < 1e-12);
}

#[test]
fn distance_gradient_is_at_most_one() {
    for chart in registered() {
        let m = chart.dim() + 1;
        let o: Vec<f64> = (0..m).map(|i| 0.3 * i as f64 - 0.7).collect();
        for p in Mesh::random(chart.as_ref(), 50, 1e-3, 2).unwrap().points {
            match gradient_norm(chart.as_ref(), &Field::Distance(o.clone()), &p.u) {
                Ok(g) => assert!(g <= 1.0 + 1e-12),
                Err(GeomError::NearOrigin { .. }) => {}
                Err(e) => panic!("{e}"),
            }
        }
    }
}

#[test]
fn l_distance_closed_form_matches_operator() {
    for chart in registered() {
        let n = chart.dim();
        let o: Vec<f64> = (0..=n).map(|i| 0.4 - 0.25 * i as f64).collect();
        for p in Mesh::random(chart.as_ref(), 40, 1e-3, 8).unwrap().points {
            let pg = point_geometry(chart.as_ref(), &p.u).unwrap();
            for r in 1..=n {
                let closed = pg.l_distance(r, &o).unwrap();
                let direct = pg.l_operator(&Field::Distance(o.clone()), r).unwrap();
                assert!((closed - direct).abs() < 1e-8 * (1.0 + pg.norm_a * pg.norm_a), "{}", chart.name());
            }
        }
    }
}

#[test]
fn l_operator_of_coordinates() {
    // L_{r-1} <X, V> = r σ_r <N, V>
    for chart in registered() {
        let n = chart.dim();
        let v: Vec<f64> = (0..=n).map(|i| if i % 2 == 0 { 0.6 } else { -0.3 }).collect();
        let vv = DVector::from_column_slice(&v);
        for p in Mesh::random(chart.as_ref(), 40, 1e-3, 9).unwrap().points {
            let pg = point_geometry(chart.as_ref(), &p.u).unwrap();
            for r in 1..=n {
                let lhs = pg.l_operator(&Field::Linear(v.clone()), r).unwrap();
                let rhs = r as f64 * pg.sigma.sigma(r) * pg.normal.dot(&vv);
                assert!((lhs - rhs).abs() < 1e-8 * (1.0 + pg.norm_a * pg.norm_a));
            }
        }
    }
}

#[test]
fn param_field_matches_ambient_field() {
    // the same function given through the parameter path
    let p = Paraboloid::new(2, 1.1, 1.0);
    let ambient = Field::Linear(vec![0.2, -0.5, 1.0]);
    let param = Field::Param(ParamFn::new(|u: &[f64]| 0.2 * u[0] - 0.5 * u[1] + 0.55 * (u[0] * u[0] + u[1] * u[1]), 1e-4));
    let u = [0.3, -0.4];
    let a = intrinsic_hessian(&p, &ambient, &u).unwrap();
    let b = intrinsic_hessian(&p, &param, &u).unwrap();
    assert!((a.matrix() - b.matrix()).amax() < 1e-6);
    let la = l_operator(&p, &ambient, &u, 2).unwrap();
    let lb = l_operator(&p, &param, &u, 2).unwrap();
    assert!((la - lb).abs() < 1e-6);
}

#[test]
fn fd_consistency_detects_corruption() {
    for chart in registered() {
        let h = fd_step(chart.domain().diameter()) * 100.0;
        let u = Mesh::random(chart.as_ref(), 1, 0.1, 1).unwrap().points[0].u.clone();
        let rep = fd_consistency(chart.as_ref(), &u, h).unwrap();
        assert!(rep.passed, "{}: {rep:?}", chart.name());
    }
    let bad = build_chart(&SurfaceSpec::Corrupted {
        base: Box::new(SurfaceSpec::Paraboloid { n: 2, curvature: 1.0, half_width: 1.0 }),
        eps: 1e-3,
    })
    .unwrap();
    let rep = fd_consistency(&bad, &[0.2, 0.1], 1e-3).unwrap();
    assert!(!rep.passed, "{rep:?}");
}

#[test]
fn singular_and_out_of_domain_points() {
    let s = Sphere::unit(2);
    assert!(matches!(s.jet(&[0.9, 0.9]), Err(GeomError::Domain(_))));
    assert!(matches!(s.jet(&[0.1]), Err(GeomError::InvalidInput(_))));
    assert!(s.jet(&[f64::NAN, 0.0]).is_err());
    let p = Plane::new(2, 1.0, 0.0);
    assert!(matches!(l_distance(&p, &[0.0, 0.0], 1, &[0.0, 0.0, 0.0]), Err(GeomError::NearOrigin { .. })));
    assert!(l_distance(&p, &[0.5, 0.0], 3, &[0.0, 0.0, 0.0]).is_err());
}

#[test]
fn spec_round_trip() {
    let json = r#"{"kind":"bowl","n":3,"r":2,"r_max":5.0}"#;
    let spec: SurfaceSpec = serde_json::from_str(json).unwrap();
    assert_eq!(spec.dim(), 3);
    assert_eq!(spec.translator(), Some((vec![0.0, 0.0, 0.0, 1.0], 2)));
    let chart = build_chart(&spec).unwrap();
    assert_eq!(chart.kind(), ChartKind::Rotational);
    assert!(serde_json::from_str::<SurfaceSpec>(r#"{"kind":"sphere","n":2,"bogus":1}"#).is_err());
    let back: SurfaceSpec = serde_json::from_str(&serde_json::to_string(&spec).unwrap()).unwrap();
    assert_eq!(back, spec);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn wave_graphs_frame_is_orthonormal(seed in 0u64..1000, x in -0.9..0.9f64, y in -0.9..0.9f64) {
        let w = WaveGraph::random(2, 3, 0.4, 1.0, seed);
        let pg = point_geometry(&w, &[x, y]).unwrap();
        let gram = pg.frame.transpose() * &pg.frame;
        prop_assert!((gram - nalgebra::DMatrix::identity(2, 2)).amax() < 1e-12);
        prop_assert!((pg.frame.transpose() * &pg.normal).amax() < 1e-12);
        prop_assert!((pg.normal.norm() - 1.0).abs() < 1e-14);
        // the shape operator from II agrees with -dN in the frame, up to sign convention
        prop_assert!(pg.a.trace().is_finite());
    }

    #[test]
    fn rigid_translation_preserves_curvature(dx in -1.0..1.0f64, dz in -1.0..1.0f64) {
        let a = Sphere::new(2, 1.5, None).unwrap();
        let b = Sphere::new(2, 1.5, Some(vec![dx, 0.0, dz])).unwrap();
        let pa = point_geometry(&a, &[0.2, 0.3]).unwrap();
        let pb = point_geometry(&b, &[0.2, 0.3]).unwrap();
        for r in 0..=2 {
            prop_assert!((pa.sigma.sigma(r) - pb.sigma.sigma(r)).abs() < 1e-12);
        }
    }
}
