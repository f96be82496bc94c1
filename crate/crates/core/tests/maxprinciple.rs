use std::f64::consts::E;

use soliton_core::charts::{Chart, Field, Paraboloid, Plane, Sphere};
use soliton_core::maxprinciple::*;
use soliton_core::mesh::{logspace, Mesh};
use soliton_core::regions::{Halfspace, Region};
use soliton_core::translators::{grim_reaper_chart, rot_chart, solve_rotational_translator};

fn up(n: usize) -> Vec<f64> {
    let mut v = vec![0.0; n + 1];
    v[n] = 1.0;
    v
}

fn registered() -> Vec<GFunction> {
    vec![
        GFunction::Constant { value: 1.0 },
        GFunction::Constant { value: 4.0 },
        GFunction::IteratedLog { levels: 1 },
        GFunction::IteratedLog { levels: 2 },
        GFunction::IteratedLog { levels: 3 },
        GFunction::Table { t: vec![0.0, 2.0, 10.0], g: vec![1.0, 3.0, 50.0] },
    ]
}

#[test]
fn phi_closed_forms() {
    let g1 = GFunction::Constant { value: 1.0 };
    let g4 = GFunction::Constant { value: 4.0 };
    for t in [0.0, 0.5, 3.0, 1e3] {
        assert!((g1.phi(t).unwrap() - (t + 1.0).ln()).abs() < 1e-10);
        assert!((g4.phi(t).unwrap() - (t / 2.0 + 1.0).ln()).abs() < 1e-10);
    }
}

#[test]
fn iterated_log_phi_matches_antiderivative_on_tail() {
    // below the splice G is constant, above it 1/sqrt(G) = 1/(t log t)
    let g = GFunction::IteratedLog { levels: 1 };
    let t0 = splice_point();
    let g0 = (t0 * t0.ln()).powi(2);
    for t in [50.0_f64, 1e4, 1e9] {
        let exact = (t0 / g0.sqrt() + t.ln().ln() - t0.ln().ln() + 1.0).ln();
        assert!((g.phi(t).unwrap() - exact).abs() < 1e-10, "t = {t}");
    }
}

#[test]
fn g_functions_are_admissible() {
    for g in registered() {
        g.validate().unwrap();
        assert!(g.check_monotone(1e4, 1000), "{g:?}");
        for t in [1.0, 1e2, 1e4, 1e6] {
            assert!(g.integral(0.0, t).unwrap().is_finite());
        }
    }
}

#[test]
fn phi_increasing_and_concave() {
    for g in registered() {
        assert_eq!(g.phi(0.0).unwrap(), 0.0);
        let ts = logspace(1e-3, 1e5, 1000);
        let mut prev = 0.0;
        for &t in &ts {
            let p = g.phi(t).unwrap();
            assert!(p > prev, "{g:?} at {t}");
            prev = p;
            assert!(g.phi_second(t).unwrap() < 0.0, "{g:?} at {t}");
        }
    }
}

#[test]
fn phi_prime_matches_differences() {
    for g in registered() {
        for t in [0.7, 5.0, 40.0, 3e3] {
            let h = 1e-5 * t;
            let fd = (g.phi(t + h).unwrap() - g.phi(t - h).unwrap()) / (2.0 * h);
            let exact = g.phi_prime(t).unwrap();
            assert!((fd - exact).abs() < 1e-6 * exact, "{g:?} at {t}: {fd} vs {exact}");
        }
    }
}

#[test]
fn p_gamma_closed_form() {
    let g = GFunction::IteratedLog { levels: 1 };
    let a = (2.0 * E).exp();
    for rho in logspace(10.0, 1e3, 40) {
        let p = p_gamma(&g, rho * rho, a).unwrap();
        let exact = 2.0 * rho * rho * rho.ln() * rho.ln().ln();
        assert!((p - exact).abs() < 1e-6 * exact, "rho = {rho}");
    }
}

fn sphere_run(m: usize) -> (OYRun, Mesh) {
    let s = Sphere::unit(2);
    let mesh = Mesh::grid(&s, m, 0.0).unwrap();
    let v = up(2);
    let u = Field::Linear(v.clone());
    let gamma = Field::Affine { w: v.iter().map(|x| -x).collect(), c: 2.0 };
    let g = GFunction::IteratedLog { levels: 1 };
    (oy_sequence(&s, &mesh, &u, &gamma, &g, &OyParams { k_max: 20, r: 1, z: None }).unwrap(), mesh)
}

#[test]
fn sphere_maximizer_is_the_pole() {
    let (run, mesh) = sphere_run(21);
    let pole = mesh.points.iter().position(|p| p.u.iter().all(|x| x.abs() < 1e-12)).unwrap();
    assert!(run.index.iter().all(|i| *i == pole));
    assert!(run.grad_norms.iter().all(|g| *g <= run.mesh_tol));
    assert!(run.pass.iter().all(|p| *p));
    assert!(!run.inconclusive);
    assert!(run.eps.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn refinement_moves_values_less_than_mesh_tol() {
    let (coarse, _) = sphere_run(11);
    let (fine, _) = sphere_run(21);
    for (a, b) in coarse.values.iter().zip(&fine.values) {
        assert!((a - b).abs() < coarse.mesh_tol);
    }
}

#[test]
fn refinement_on_an_off_grid_maximum() {
    // shifted paraboloid cap: the maximum of u is not a grid node
    let p = Paraboloid::new(2, -1.0, 1.0);
    let u = Field::Linear(vec![0.3, 0.1, 1.0]);
    let gamma = Field::DistanceSquared(vec![0.0, 0.0, 0.0]);
    let g = GFunction::Constant { value: 1.0 };
    let params = OyParams { k_max: 10, r: 1, z: None };
    let coarse = oy_sequence(&p, &Mesh::grid(&p, 11, 0.0).unwrap(), &u, &gamma, &g, &params).unwrap();
    let fine = oy_sequence(&p, &Mesh::grid(&p, 21, 0.0).unwrap(), &u, &gamma, &g, &params).unwrap();
    for (a, b) in coarse.values.iter().zip(&fine.values) {
        assert!((a - b).abs() < coarse.mesh_tol, "{a} {b} tol {}", coarse.mesh_tol);
    }
}

#[test]
fn constant_function_picks_first_point() {
    let p = Plane::new(2, 1.0, 0.0);
    let mesh = Mesh::grid(&p, 5, 0.0).unwrap();
    let run = oy_sequence(
        &p,
        &mesh,
        &Field::Constant(3.0),
        &Field::Constant(1.0),
        &GFunction::Constant { value: 1.0 },
        &OyParams { k_max: 5, r: 1, z: None },
    )
    .unwrap();
    assert!(run.index.iter().all(|i| *i == 0));
    assert!(run.grad_norms.iter().all(|g| *g == 0.0));
    assert!(run.l_values.iter().all(|l| l.abs() < 1e-14));
}

#[test]
fn drift_term_enters_the_operator() {
    let s = Sphere::unit(2);
    let mesh = Mesh::grid(&s, 9, 0.0).unwrap();
    let u = Field::Linear(vec![1.0, 0.0, 0.0]);
    let gamma = Field::Affine { w: vec![0.0, 0.0, -1.0], c: 2.0 };
    let g = GFunction::Constant { value: 1.0 };
    let plain = oy_sequence(&s, &mesh, &u, &gamma, &g, &OyParams { k_max: 3, r: 1, z: None }).unwrap();
    let z = vec![2.0, 0.0, 0.0];
    let drifted = oy_sequence(&s, &mesh, &u, &gamma, &g, &OyParams { k_max: 3, r: 1, z: Some(z) }).unwrap();
    assert_eq!(plain.index, drifted.index);
    assert_eq!(drifted.z_sup, 2.0);
    for i in 0..3 {
        let expected = plain.l_values[i] - 2.0 * plain.grad_norms[i] * plain.grad_norms[i];
        assert!((drifted.l_values[i] - expected).abs() < 1e-10);
    }
    // A enters the threshold through sup |Z|
    assert!(drifted.eps[0] <= plain.eps[0]);
}

#[test]
fn truncated_grim_reaper_is_boundary_dominated() {
    let gr = grim_reaper_chart(2).unwrap();
    let mesh = Mesh::grid(&gr, 41, 1e-6).unwrap();
    let v = up(2);
    let g = GFunction::IteratedLog { levels: 1 };
    let rep = cone_drive(&gr, &mesh, &v, 0.9, 1, &g, 12).unwrap();
    assert!(rep.oy.boundary_dominated());
    assert!(rep.oy.grad_norms.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    // maximizers drift out toward the asymptotic planes |x| -> π/2
    let xs: Vec<f64> = rep.oy.params.iter().map(|u| u[0].abs()).collect();
    assert!(xs.windows(2).all(|w| w[1] >= w[0]));
    assert!(*xs.last().unwrap() > 1.5);
    assert!(!rep.containment);
}

#[test]
fn cone_drive_on_the_bowl() {
    let bowl = rot_chart(solve_rotational_translator(2, 1, 10.0, 1e-10).unwrap());
    let mesh = Mesh::grid(&bowl, 31, 0.0).unwrap();
    let g = GFunction::IteratedLog { levels: 1 };
    let rep = cone_drive(&bowl, &mesh, &up(2), 0.5, 1, &g, 10).unwrap();
    assert!(!rep.containment);
    assert!(rep.exit.found);
    assert!(rep.operator_residual < 1e-6, "{}", rep.operator_residual);
    assert!(rep.gradient_residual < 1e-9);
    assert!(rep.translator_residual < 1e-6);
    assert_eq!(rep.chain.len(), 10);
}

#[test]
fn halfspace_drive_identities() {
    let gr = grim_reaper_chart(2).unwrap();
    let mesh = Mesh::random(&gr, 200, 1e-6, 3).unwrap();
    let v = up(2);
    let c: f64 = 0.4;
    let w = vec![(1.0 - c * c).sqrt(), 0.0, c];
    let g = GFunction::IteratedLog { levels: 1 };
    let rep = halfspace_drive(&gr, &mesh, &v, &w, 1, &g, 8).unwrap();
    assert!(rep.identities_pass, "{} {}", rep.gradient_residual, rep.operator_residual);
    assert!(rep.frame_residuals.iter().all(|r| *r < 1e-10));
    assert!(!rep.containment);
}

#[test]
fn halfspace_control_chart_misses_the_translator_limit() {
    // downward cap: inside H_W for W = E_3, but L psi = sigma_1 <N, W> stays
    // near -2c... far from the translator value r <V, W> = 1
    let cap = Paraboloid::new(2, -1.0, 1.0);
    let shifted = Field::Linear(vec![0.0, 0.0, 1.0]);
    let mesh = Mesh::grid(&cap, 21, 0.0).unwrap();
    let v = up(2);
    let g = GFunction::Constant { value: 1.0 };
    let rep = halfspace_drive(&cap, &mesh, &v, &v, 1, &g, 10).unwrap();
    let _ = shifted;
    assert!(rep.containment);
    assert!(rep.identities_pass);
    let last = *rep.l_at_maximizers.last().unwrap();
    assert!((last - 1.0).abs() > 0.5, "{last}");
}

#[test]
fn gate_on_the_bowl_fails_only_containment() {
    let bowl = rot_chart(solve_rotational_translator(2, 1, 100.0, 1e-10).unwrap());
    let radii = logspace(1e-2, 100.0, 120);
    let dirs: Vec<Vec<f64>> = (0..8).map(|k| {
        let t = k as f64 * std::f64::consts::PI / 4.0;
        vec![t.cos(), t.sin()]
    }).collect();
    let mesh = Mesh::radial(&radii, &dirs);
    let params = GateParams {
        theorem: Theorem::ConeProper,
        r: 1,
        v: up(2),
        region: Region::Cone { v: up(2), a: 0.5 },
        eps: None,
        base_point: None,
    };
    let rep = hypothesis_gate(&bowl, &mesh, &params).unwrap();
    for p in &rep.premises {
        assert_eq!(p.passed(), p.id != "containment", "{p:?}");
    }
    assert!(rep.consistent);
}

#[test]
fn gate_on_a_sample_inside_the_region_is_inconsistent_only_if_everything_passes() {
    // a small sphere cap far down the -V axis is inside the cone complement but
    // is no translator
    let s = Sphere::new(2, 1.0, Some(vec![0.0, 0.0, -10.0])).unwrap();
    let mesh = Mesh::grid(&s, 9, 0.0).unwrap();
    let params = GateParams {
        theorem: Theorem::Halfspace,
        r: 1,
        v: up(2),
        region: Region::Halfspace { b: vec![0.0; 3], w: up(2) },
        eps: None,
        base_point: None,
    };
    let rep = hypothesis_gate(&s, &mesh, &params).unwrap();
    let by_id = |id: &str| rep.premises.iter().find(|p| p.id == id).unwrap().passed();
    assert!(by_id("containment"));
    assert!(!by_id("translator-residual"));
    assert!(rep.consistent);
}

#[test]
fn gate_reports_sigma_bound_and_region_mismatch() {
    let gr = grim_reaper_chart(2).unwrap();
    let mesh = Mesh::random(&gr, 100, 1e-6, 1).unwrap();
    let params = GateParams {
        theorem: Theorem::Halfspace,
        r: 1,
        v: up(2),
        region: Region::Halfspace { b: vec![0.0; 3], w: vec![0.6, 0.0, 0.8] },
        eps: None,
        base_point: None,
    };
    let rep = hypothesis_gate(&gr, &mesh, &params).unwrap();
    let oy3 = rep.premises.iter().find(|p| p.id == "hyp-OY-3").unwrap();
    assert!(oy3.passed() && oy3.value <= 1.0 + 1e-8);
    let bad = GateParams {
        theorem: Theorem::BiHalfspace,
        region: Region::Cone { v: up(2), a: 0.5 },
        ..params
    };
    assert!(hypothesis_gate(&gr, &mesh, &bad).is_err());
}

#[test]
fn gate_on_the_r_bowl_reports_newton_eigenvalue() {
    let bowl = rot_chart(solve_rotational_translator(3, 2, 10.0, 1e-10).unwrap());
    let mesh = Mesh::random(&bowl, 150, 0.0, 5).unwrap();
    let bi = Region::BiHalfspace {
        first: Halfspace { b: vec![0.0; 4], w: vec![0.6, 0.8, 0.0, 0.0] },
        second: Halfspace { b: vec![0.0; 4], w: vec![0.6, -0.8, 0.0, 0.0] },
        vertical: Some(up(3)),
    };
    let params = GateParams { theorem: Theorem::BiHalfspace, r: 2, v: up(3), region: bi, eps: None, base_point: None };
    let rep = hypothesis_gate(&bowl, &mesh, &params).unwrap();
    let eig = rep.premises.iter().find(|p| p.id == "eps-definite").unwrap();
    assert!(eig.value > 0.0, "{eig:?}");
    assert!(rep.consistent);
}

#[test]
fn sphere_oy_premises_are_dimension_checked() {
    let s = Sphere::unit(2);
    let mesh = Mesh::grid(&s, 5, 0.0).unwrap();
    let g = GFunction::Constant { value: 1.0 };
    let bad = oy_sequence(&s, &mesh, &Field::Linear(vec![1.0, 0.0]), &Field::Constant(1.0), &g, &OyParams { k_max: 2, r: 1, z: None });
    assert!(bad.is_err());
    let neg = oy_sequence(&s, &mesh, &Field::Constant(0.0), &Field::Constant(-1.0), &g, &OyParams { k_max: 2, r: 1, z: None });
    assert!(neg.is_err());
    let _ = s.dim();
}
