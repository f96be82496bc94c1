use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Value};

use soliton_core::charts::{build_chart, fd_consistency, fd_step, point_geometry, Chart, Field};
use soliton_core::maxprinciple::{
    cone_drive, halfspace_drive, hypothesis_gate, oy_sequence, GateParams, OyParams, Theorem, RESIDUAL_TOL,
};
use soliton_core::mesh::Mesh;
use soliton_core::regions::{bihalfspace_drive, first_exit, Region};
use soliton_core::symfun::{char_poly_eval, newton_polynomial, newton_transform, random_symmetric, trace_identities};
use soliton_core::translators::{solve_rotational_translator, RotProfile};
use soliton_core::{GeomError, SymMatrix};

use crate::config::{build_mesh, ExperimentConfig, ProfileConfig};
use crate::report::{float, value};
use crate::CliError;

pub struct Outcome {
    pub body: Value,
    /// Mathematical verdict; `Err` carries the message for a failure.
    pub verdict: std::result::Result<(), String>,
    pub files: Vec<(String, String)>,
}

const ALGEBRA_TOL: f64 = 1e-9;
const OPERATOR_TOL: f64 = 1e-6;
const FRAME_TOL: f64 = 1e-10;
const FD_POINTS: usize = 25;

#[derive(Debug, Serialize)]
struct Check {
    id: &'static str,
    passed: bool,
    /// Worst scaled error, or the smallest Richardson slope for fd-consistency.
    value: f64,
    tolerance: f64,
    samples: usize,
    skipped: usize,
}

#[derive(Default)]
struct Worst {
    value: f64,
    samples: usize,
    skipped: usize,
}

impl Worst {
    fn add(&mut self, x: f64) {
        self.value = self.value.max(x);
        self.samples += 1;
    }

    fn check(self, id: &'static str, tolerance: f64) -> Check {
        Check { id, passed: self.value < tolerance, value: self.value, tolerance, samples: self.samples, skipped: self.skipped }
    }
}

fn algebra_checks(mats: &[SymMatrix]) -> Result<Vec<Check>, CliError> {
    let (mut cp, mut rec, mut tr, mut van) = (Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for a in mats {
        let n = a.dim();
        let scale = (1.0 + a.tolerance_scale()).powi(n as i32);
        let spec = a.spectrum()?;
        for t in [-1.3, 0.4, 2.1] {
            let det = (a.matrix() - DMatrix::identity(n, n) * t).determinant();
            cp.add((char_poly_eval(a, t)? - det).abs() / scale);
        }
        for r in 0..=n {
            let d = newton_transform(a, r)?.matrix() - newton_polynomial(a, r)?.matrix();
            rec.add(d.amax() / scale);
        }
        for r in 1..=n {
            let (tp, tap) = trace_identities(a, r)?;
            tr.add((tp - (n - r + 1) as f64 * spec.sigma(r - 1)).abs() / scale);
            tr.add((tap - r as f64 * spec.sigma(r)).abs() / scale);
        }
        van.add(newton_transform(a, n)?.matrix().amax() / scale);
    }
    Ok(vec![
        cp.check("char-poly", ALGEBRA_TOL),
        rec.check("newton-recursion", ALGEBRA_TOL),
        tr.check("trace-identities", ALGEBRA_TOL),
        van.check("newton-vanishing", ALGEBRA_TOL),
    ])
}

fn fd_check(chart: &dyn Chart, mesh: &Mesh) -> Result<Check, CliError> {
    let h = (1e-3 * chart.domain().diameter()).max(100.0 * fd_step(0.0));
    let stride = (mesh.len() / FD_POINTS).max(1);
    let (mut min_slope, mut samples, mut skipped, mut passed) = (f64::INFINITY, 0, 0, true);
    for p in mesh.points.iter().step_by(stride) {
        match fd_consistency(chart, &p.u, h) {
            Ok(rep) => {
                samples += 1;
                passed &= rep.passed;
                if !rep.exact {
                    min_slope = min_slope.min(rep.slope);
                }
            }
            Err(GeomError::Domain(_)) => skipped += 1,
            Err(e) => return Err(e.into()),
        }
    }
    if samples == 0 {
        return Err(CliError::Math("no mesh point admits the finite-difference stencil".into()));
    }
    Ok(Check { id: "fd-consistency", passed, value: min_slope, tolerance: 1.9, samples, skipped })
}

pub fn verify_identities(cfg: &ExperimentConfig, mesh_n: Option<usize>, seed: u64) -> Result<Outcome, CliError> {
    let spec = cfg.surface()?;
    let chart = build_chart(spec).map_err(CliError::setup)?;
    let mesh = build_mesh(cfg.mesh.as_ref(), chart.as_ref(), mesh_n)?;
    let n = chart.dim();
    let v = cfg.velocity()?;
    let vv = DVector::from_column_slice(&v);

    let mut checks = vec![fd_check(chart.as_ref(), &mesh)?];

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut mats: Vec<SymMatrix> = (0..cfg.identity_trials).map(|_| random_symmetric(n, 2.0, &mut rng)).collect();
    let geoms = mesh
        .points
        .iter()
        .map(|p| point_geometry(chart.as_ref(), &p.u))
        .collect::<Result<Vec<_>, _>>()?;
    mats.extend(geoms.iter().map(|g| g.a.clone()));
    checks.extend(algebra_checks(&mats)?);

    let origin: Vec<f64> = chart.position(&chart.base_param())?.iter().enumerate().map(|(i, x)| x + 0.37 + 0.1 * i as f64).collect();
    let ov = DVector::from_column_slice(&origin);
    let (mut lin, mut sq, mut grad, mut frame) = (Worst::default(), Worst::default(), Worst::default(), Worst::default());
    for pg in &geoms {
        let scale = 1.0 + pg.norm_a * pg.norm_a;
        for r in 1..=n {
            let l = pg.l_operator(&Field::Linear(v.clone()), r)?;
            lin.add((l - r as f64 * pg.sigma.sigma(r) * pg.normal.dot(&vv)).abs() / scale);
            let l2 = pg.l_operator(&Field::DistanceSquared(origin.clone()), r)?;
            let exact = 2.0
                * ((n - r + 1) as f64 * pg.sigma.sigma(r - 1) + r as f64 * pg.sigma.sigma(r) * (&pg.x - &ov).dot(&pg.normal));
            sq.add((l2 - exact).abs() / scale);
        }
        match pg.gradient_norm(&Field::Distance(origin.clone())) {
            Ok(g) => grad.add((g - 1.0).max(0.0)),
            Err(GeomError::NearOrigin { .. }) => grad.skipped += 1,
            Err(GeomError::Tolerance(_)) => grad.add(f64::INFINITY),
            Err(e) => return Err(e.into()),
        }
        let gram = pg.frame.transpose() * &pg.frame - DMatrix::identity(n, n);
        frame.add(gram.amax().max((pg.frame.transpose() * &pg.normal).amax()));
    }
    checks.push(lin.check("operator-linear", OPERATOR_TOL));
    checks.push(sq.check("operator-distance-squared", OPERATOR_TOL));
    checks.push(grad.check("distance-gradient", 1e-12));
    checks.push(frame.check("frame-orthonormal", FRAME_TOL));
    if let Some((tv, tr)) = spec.translator() {
        let tv = DVector::from_column_slice(&tv);
        let mut res = Worst::default();
        for pg in &geoms {
            res.add((pg.sigma.sigma(tr) - pg.normal.dot(&tv)).abs());
        }
        checks.push(res.check("translator-residual", RESIDUAL_TOL));
    }
    let failed: Vec<&str> = checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    let body = json!({
        "surface": value(spec),
        "chart": chart.name(),
        "mesh_points": mesh.len(),
        "random_matrices": cfg.identity_trials,
        "seed": seed,
        "checks": value(&checks),
        "failed": failed,
        "passed": failed.is_empty(),
    });
    let verdict = match failed.first() {
        None => Ok(()),
        Some(id) => Err(format!("identity failure: {id}")),
    };
    Ok(Outcome { body, verdict, files: Vec::new() })
}

fn default_theorem(region: &Region) -> Theorem {
    match region {
        Region::Cone { .. } => Theorem::ConeProper,
        Region::Halfspace { .. } => Theorem::Halfspace,
        Region::BiHalfspace { .. } => Theorem::BiHalfspace,
    }
}

fn theorem_fits(theorem: Theorem, region: &Region) -> bool {
    matches!(
        (theorem, region),
        (Theorem::ConeProper | Theorem::ConeBounded, Region::Cone { .. })
            | (Theorem::Halfspace, Region::Halfspace { .. })
            | (Theorem::BiHalfspace, Region::BiHalfspace { .. })
    )
}

pub fn theorem_check(cfg: &ExperimentConfig, mesh_n: Option<usize>) -> Result<Outcome, CliError> {
    let spec = cfg.surface()?;
    let chart = build_chart(spec).map_err(CliError::setup)?;
    let mesh = build_mesh(cfg.mesh.as_ref(), chart.as_ref(), mesh_n)?;
    let r = cfg.order()?;
    let v = cfg.velocity()?;
    let g = cfg.g_function()?;
    let regions = cfg.all_regions()?;
    let mut cases = Vec::new();
    let mut inconsistent = Vec::new();
    for (i, region) in regions.iter().enumerate() {
        let theorem = cfg.theorem.unwrap_or_else(|| default_theorem(region));
        if !theorem_fits(theorem, region) {
            return Err(CliError::Config(format!("region {i} does not match theorem {}", theorem.id())));
        }
        let params = GateParams { theorem, r, v: v.clone(), region: region.clone(), eps: cfg.eps, base_point: None };
        let gate = hypothesis_gate(chart.as_ref(), &mesh, &params)?;
        let exit = first_exit(chart.as_ref(), region, &mesh)?;
        let drive = match region {
            Region::Cone { a, .. } => cone_drive(chart.as_ref(), &mesh, &v, *a, r, &g, cfg.k_max).map(|d| value(&d)),
            Region::Halfspace { b, w } => {
                if b.iter().any(|x| *x != 0.0) {
                    return Err(CliError::Config("the half-space drive takes regions through the origin".into()));
                }
                halfspace_drive(chart.as_ref(), &mesh, &v, w, r, &g, cfg.k_max).map(|d| value(&d))
            }
            Region::BiHalfspace { first, second, vertical } => {
                let vert = vertical.clone().unwrap_or_else(|| v.clone());
                bihalfspace_drive(chart.as_ref(), &mesh, first, second, &vert, cfg.cylinder_radius, r, cfg.eps).map(|d| value(&d))
            }
        };
        let drive = match drive {
            Ok(d) => d,
            Err(e @ GeomError::InvalidInput(_)) => return Err(CliError::Config(e.to_string())),
            Err(e) => json!({ "error": e.to_string() }),
        };
        if !gate.consistent {
            inconsistent.push(i);
        }
        let premises: Vec<Value> = gate
            .premises
            .iter()
            .map(|p| {
                json!({
                    "id": p.id,
                    "status": value(&p.status),
                    "empirical": p.empirical,
                    "value": float(p.value),
                    "detail": p.detail,
                })
            })
            .collect();
        cases.push(json!({
            "index": i,
            "region": value(region),
            "theorem": theorem.id(),
            "premises": premises,
            "all_premises_pass": gate.all_pass,
            "consistent": gate.consistent,
            "exit": value(&exit),
            "drive": drive,
        }));
    }
    let body = json!({
        "surface": value(spec),
        "chart": chart.name(),
        "r": r,
        "velocity": value(&v),
        "mesh_points": mesh.len(),
        "cases": cases,
        "consistent": inconsistent.is_empty(),
    });
    let verdict = if inconsistent.is_empty() {
        Ok(())
    } else {
        Err(format!("every premise and containment hold for region(s) {inconsistent:?}"))
    };
    Ok(Outcome { body, verdict, files: Vec::new() })
}

pub fn oy_run(cfg: &ExperimentConfig, mesh_n: Option<usize>) -> Result<Outcome, CliError> {
    let spec = cfg.surface()?;
    let chart = build_chart(spec).map_err(CliError::setup)?;
    let mesh = build_mesh(cfg.mesh.as_ref(), chart.as_ref(), mesh_n)?;
    let r = cfg.order()?;
    let v = cfg.velocity()?;
    let g = cfg.g_function()?;
    let oy = cfg.oy.clone().unwrap_or(crate::config::OyConfig { u: crate::config::FieldSpec::Height, gamma: None, z: None });
    let u = oy.u.to_field(&v);
    let gamma = match &oy.gamma {
        Some(f) => f.to_field(&v),
        None => Field::DistanceSquared(chart.position(&chart.base_param())?.as_slice().to_vec()),
    };
    let run = oy_sequence(chart.as_ref(), &mesh, &u, &gamma, &g, &OyParams { k_max: cfg.k_max, r, z: oy.z.clone() })
        .map_err(CliError::setup)?;
    let all_pass = run.pass.iter().all(|p| *p);
    let body = json!({
        "surface": value(spec),
        "chart": chart.name(),
        "r": r,
        "mesh_points": mesh.len(),
        "g": value(&g),
        "run": value(&run),
        "all_pass": all_pass,
        "inconclusive": run.inconclusive,
    });
    let verdict = if run.inconclusive {
        Err("every maximizer lies on the mesh boundary; run inconclusive".into())
    } else if !all_pass {
        let k = run.pass.iter().position(|p| !*p).map_or(0, |i| run.k[i]);
        Err(format!("Omori-Yau inequalities fail first at k = {k}"))
    } else {
        Ok(())
    };
    Ok(Outcome { body, verdict, files: Vec::new() })
}

fn fit_summary(p: &RotProfile) -> Value {
    let r_max = p.r_max();
    let (lo, hi) = (0.5 * r_max, r_max);
    let fit = match p.fit_asymptotics(lo, hi, 201) {
        Ok((c2, c1, c0)) => json!({ "lo": float(lo), "hi": float(hi), "c2": float(c2), "c1": float(c1), "c0": float(c0) }),
        Err(e) => json!({ "error": e.to_string() }),
    };
    let mut out = json!({ "fit": fit });
    if p.r() == 1 && p.n() >= 2 {
        let lead = 1.0 / (2.0 * (p.n() - 1) as f64);
        let d = |x: f64| p.height(x).map(|u| u - lead * x * x + x.ln());
        if let (Ok(a), Ok(b)) = (d(0.8 * r_max), d(r_max)) {
            out["expected_c2"] = float(lead);
            out["drift"] = float((b - a).abs());
        }
    }
    out
}

pub fn profile(pc: Option<&ProfileConfig>, import: Option<&str>) -> Result<Outcome, CliError> {
    let prof = match (import, pc) {
        (Some(text), _) => RotProfile::from_csv(text).map_err(|e| CliError::Config(e.to_string()))?,
        (None, Some(pc)) => match solve_rotational_translator(pc.n, pc.r, pc.r_max, pc.tol) {
            Ok(p) => p,
            Err(e @ GeomError::InvalidInput(_)) => return Err(CliError::Config(e.to_string())),
            Err(GeomError::GraphicalBreakdown { radius }) => {
                return Err(CliError::Math(format!("profile stopped being graphical; last good radius R = {radius:.12e}")))
            }
            Err(GeomError::StiffFailure { last_good_radius }) => {
                return Err(CliError::Math(format!("step size collapsed; last good radius R = {last_good_radius:.12e}")))
            }
            Err(e) => return Err(CliError::Math(e.to_string())),
        },
        (None, None) => return Err(CliError::Config("profile needs --n (and optionally --r, --r-max, --tol) or a config".into())),
    };
    let csv = prof.to_csv();
    let body = json!({
        "meta": value(&prof.meta),
        "imported": import.is_some(),
        "vertex_curvature": float(prof.vertex_curvature()),
        "grid_points": prof.grid.len(),
        "grid_residual": float(prof.grid_residual()?),
        "height_at_r_max": float(prof.height(prof.r_max())?),
        "slope_at_r_max": float(prof.slope(prof.r_max())?),
        "asymptotics": fit_summary(&prof),
    });
    Ok(Outcome { body, verdict: Ok(()), files: vec![("profile.csv".into(), csv)] })
}
