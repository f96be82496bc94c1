//! The maximizer sequence `x_k = argmax (u - ε_k φ(γ))` on a finite mesh.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gfunction::GFunction;
use crate::charts::{point_geometry, Chart, Field};
use crate::error::{GeomError, Result};
use crate::mesh::Mesh;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OyParams {
    pub k_max: usize,
    /// `L_{r-1}` with tensor `P_{r-1}`.
    pub r: usize,
    /// Constant ambient drift `Z`; the operator becomes `L u - <Z^T, ∇u>`.
    #[serde(default)]
    pub z: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OYRun {
    pub k: Vec<usize>,
    pub eps: Vec<f64>,
    pub index: Vec<usize>,
    pub params: Vec<Vec<f64>>,
    pub values: Vec<f64>,
    pub grad_norms: Vec<f64>,
    pub l_values: Vec<f64>,
    pub pass: Vec<bool>,
    pub boundary: Vec<bool>,
    pub mesh_tol: f64,
    /// Empirical `max |∇γ| / P(γ)`.
    pub a_const: f64,
    /// Empirical `max L γ / P(γ)`, floored at 0.
    pub b_const: f64,
    pub z_sup: f64,
    pub u_sup: f64,
    /// Every maximizer sits on the truncation boundary.
    pub inconclusive: bool,
}

impl OYRun {
    pub fn boundary_dominated(&self) -> bool {
        self.boundary.iter().any(|b| *b)
    }
}

struct Sample {
    u: f64,
    grad: f64,
    lu: f64,
    hess_norm: f64,
    metric_max: f64,
    phi: f64,
    grad_gamma_ratio: f64,
    l_gamma_ratio: f64,
}

/// Runs `k = 1..=k_max`. `ε_k = 1 / (2k max{A, B + A sup|Z|})` with `A`, `B`
/// the mesh maxima of `|∇γ|/P(γ)` and `L γ / P(γ)`, `P = 1/φ'`.
pub fn oy_sequence<C: Chart + ?Sized>(
    chart: &C,
    mesh: &Mesh,
    u: &Field,
    gamma: &Field,
    g: &GFunction,
    params: &OyParams,
) -> Result<OYRun> {
    g.validate()?;
    if mesh.is_empty() {
        return Err(GeomError::InvalidInput("Omori-Yau run needs a nonempty mesh".into()));
    }
    if params.k_max == 0 {
        return Err(GeomError::InvalidInput("k_max must be at least 1".into()));
    }
    let r = params.r;
    let z = params.z.as_ref().map(|z| DVector::from_column_slice(z));
    let z_sup = z.as_ref().map_or(0.0, |z| z.norm());
    let samples: Vec<Result<Sample>> = mesh
        .points
        .par_iter()
        .map(|p| {
            let pg = point_geometry(chart, &p.u)?;
            let (uv, _, _) = pg.coordinate_derivatives(u)?;
            let grad_u = pg.gradient(u)?;
            let drift = |grad: &DVector<f64>| z.as_ref().map_or(0.0, |z| pg.tangential(z).dot(grad));
            let lu = pg.l_operator(u, r)? - drift(&grad_u);
            let hess_u = pg.hessian(u)?.eigenvalues()?;
            let hess_norm = hess_u.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
            let metric_max = pg.g.clone().symmetric_eigenvalues().max().max(0.0).sqrt();
            let (gv, _, _) = pg.coordinate_derivatives(gamma)?;
            if !(gv >= 0.0) {
                return Err(GeomError::InvalidInput(format!("γ must be nonnegative, got {gv} at {:?}", p.u)));
            }
            let grad_gamma = pg.gradient(gamma)?.norm();
            let l_gamma = pg.l_operator(gamma, r)?;
            let big_p = g.p_value(gv, 0.0)?;
            Ok(Sample {
                u: uv,
                grad: grad_u.norm(),
                lu,
                hess_norm,
                metric_max,
                phi: g.phi(gv)?,
                grad_gamma_ratio: grad_gamma / big_p,
                l_gamma_ratio: l_gamma / big_p,
            })
        })
        .collect();
    let samples: Vec<Sample> = samples.into_iter().collect::<Result<_>>()?;
    if samples.iter().any(|s| !s.u.is_finite()) {
        return Err(GeomError::Numerical("u is not finite on the mesh".into()));
    }
    let a_const = samples.iter().map(|s| s.grad_gamma_ratio).fold(0.0, f64::max);
    let b_const = samples.iter().map(|s| s.l_gamma_ratio).fold(0.0, f64::max);
    let denom = a_const.max(b_const + a_const * z_sup);
    let metric = samples.iter().map(|s| s.metric_max).fold(0.0, f64::max);
    let lip = samples.iter().map(|s| s.hess_norm).fold(0.0, f64::max);
    let mesh_tol = 2.0 * mesh.spacing * metric * lip;
    let u_sup = samples.iter().map(|s| s.u).fold(f64::NEG_INFINITY, f64::max);

    let mut run = OYRun {
        k: Vec::new(),
        eps: Vec::new(),
        index: Vec::new(),
        params: Vec::new(),
        values: Vec::new(),
        grad_norms: Vec::new(),
        l_values: Vec::new(),
        pass: Vec::new(),
        boundary: Vec::new(),
        mesh_tol,
        a_const,
        b_const,
        z_sup,
        u_sup,
        inconclusive: false,
    };
    for k in 1..=params.k_max {
        let kf = k as f64;
        let eps = if denom > 0.0 { 1.0 / (2.0 * kf * denom) } else { 1.0 / (2.0 * kf) };
        let mut best = 0;
        let mut best_f = f64::NEG_INFINITY;
        for (i, s) in samples.iter().enumerate() {
            let f = s.u - eps * s.phi;
            if f > best_f {
                best_f = f;
                best = i;
            }
        }
        let s = &samples[best];
        run.k.push(k);
        run.eps.push(eps);
        run.index.push(best);
        run.params.push(mesh.points[best].u.clone());
        run.values.push(s.u);
        run.grad_norms.push(s.grad);
        run.l_values.push(s.lu);
        run.pass.push(s.grad < 1.0 / kf + mesh_tol && s.lu < 1.0 / kf + mesh_tol);
        run.boundary.push(mesh.points[best].boundary);
    }
    run.inconclusive = run.boundary.iter().all(|b| *b);
    Ok(run)
}
