//! The cone and half-space arguments replayed on a mesh.

use nalgebra::DVector;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gfunction::GFunction;
use super::oy::{oy_sequence, OYRun, OyParams};
use crate::charts::{point_geometry, Chart, Field};
use crate::error::{GeomError, Result};
use crate::mesh::Mesh;
use crate::regions::{first_exit, ExitReport, Region};

/// `α(t) = t - sqrt(t^2 - (1 - a^2) t)` on `[1 - a^2, 1]`.
pub fn alpha(t: f64, a: f64) -> Result<f64> {
    if !(a > 0.0 && a < 1.0) {
        return Err(GeomError::InvalidInput(format!("a = {a} outside (0, 1)")));
    }
    let lo = 1.0 - a * a;
    if !(t >= lo - 1e-15 && t <= 1.0 + 1e-15) {
        return Err(GeomError::Domain(format!("α is defined on [{lo}, 1], got t = {t}")));
    }
    Ok(t - (t * t - lo * t).max(0.0).sqrt())
}

fn unit(name: &str, v: &[f64], m: usize) -> Result<DVector<f64>> {
    let v = DVector::from_column_slice(v);
    if v.len() != m || (v.norm() - 1.0).abs() > 1e-12 {
        return Err(GeomError::InvalidInput(format!("{name} must be a unit vector in R^{m}")));
    }
    Ok(v)
}

/// Drops points where `|X|` is too small for the cone function.
fn away_from_origin<C: Chart + ?Sized>(chart: &C, mesh: &Mesh) -> Result<(Mesh, usize)> {
    let keep: Vec<Result<bool>> = mesh.points.par_iter().map(|p| Ok(chart.position(&p.u)?.norm() > 1e-6)).collect();
    let mut points = Vec::new();
    for (p, k) in mesh.points.iter().zip(keep) {
        if k? {
            points.push(p.clone());
        }
    }
    let dropped = mesh.len() - points.len();
    Ok((Mesh { points, spacing: mesh.spacing }, dropped))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    pub k: usize,
    pub sigma_r_sq: f64,
    /// `(1/r)(1/k + a (n-r+1) σ_{r-1} / |x_k|)`.
    pub lhs: f64,
    /// `α(σ_r^2)` when `σ_r^2 ∈ [1 - a^2, 1]`.
    pub alpha: Option<f64>,
    /// `lhs >= α`, the inequality a translator in the region must satisfy.
    pub holds: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConeDriveReport {
    pub a: f64,
    pub r: usize,
    pub exit: ExitReport,
    pub containment: bool,
    pub dropped_near_origin: usize,
    /// `max |∇ψ - (V^T - a ∇δ_0)|`.
    pub gradient_residual: f64,
    /// `max |L ψ - (r σ_r^2 - a L δ_0)| / (1 + |A|^2)`.
    pub operator_residual: f64,
    /// `max |σ_r - <N, V>|`.
    pub translator_residual: f64,
    pub oy: OYRun,
    pub chain: Vec<ChainRow>,
}

/// Evaluates `ψ = <X,V> - a|X|` and the identities used for it, runs the
/// maximizer sequence on `ψ` with `γ = |X - X(p_0)|^2`, and tabulates the
/// inequality chain at the maximizers.
pub fn cone_drive<C: Chart + ?Sized>(
    chart: &C,
    mesh: &Mesh,
    v: &[f64],
    a: f64,
    r: usize,
    g: &GFunction,
    k_max: usize,
) -> Result<ConeDriveReport> {
    let n = chart.dim();
    let vv = unit("V", v, n + 1)?;
    let region = Region::Cone { v: v.to_vec(), a };
    region.validate()?;
    if r == 0 || r > n {
        return Err(GeomError::InvalidInput(format!("need 1 <= r <= n, got r = {r}")));
    }
    let exit = first_exit(chart, &region, mesh)?;
    let (mesh, dropped) = away_from_origin(chart, mesh)?;
    if mesh.is_empty() {
        return Err(GeomError::InvalidInput("no mesh point away from the origin".into()));
    }
    let origin = vec![0.0; n + 1];
    let psi = Field::ConePsi { v: v.to_vec(), a };
    let rows: Vec<Result<(f64, f64, f64)>> = mesh
        .points
        .par_iter()
        .map(|p| {
            let pg = point_geometry(chart, &p.u)?;
            let grad = pg.gradient(&psi)?;
            let expected = pg.tangential(&vv) - a * pg.tangential(&(&pg.x / pg.x.norm()));
            let lhs = pg.l_operator(&psi, r)?;
            let s = pg.sigma.sigma(r);
            let rhs = r as f64 * s * s - a * pg.l_distance(r, &origin)?;
            let trans = s - pg.normal.dot(&vv);
            Ok(((grad - expected).amax(), (lhs - rhs).abs() / (1.0 + pg.norm_a * pg.norm_a), trans.abs()))
        })
        .collect();
    let (mut gres, mut lres, mut tres) = (0.0_f64, 0.0_f64, 0.0_f64);
    for row in rows {
        let (x, y, z) = row?;
        gres = gres.max(x);
        lres = lres.max(y);
        tres = tres.max(z);
    }
    let base = chart.position(&chart.base_param())?;
    let gamma = Field::DistanceSquared(base.as_slice().to_vec());
    let oy = oy_sequence(chart, &mesh, &psi, &gamma, g, &OyParams { k_max, r, z: None })?;
    let mut chain = Vec::with_capacity(oy.k.len());
    for (i, &k) in oy.k.iter().enumerate() {
        let pg = point_geometry(chart, &oy.params[i])?;
        let s2 = pg.sigma.sigma(r).powi(2);
        let lhs = (1.0 / k as f64 + a * (n - r + 1) as f64 * pg.sigma.sigma(r - 1) / pg.x.norm()) / r as f64;
        let al = if s2 >= 1.0 - a * a && s2 <= 1.0 { Some(alpha(s2, a)?) } else { None };
        chain.push(ChainRow { k, sigma_r_sq: s2, lhs, alpha: al, holds: al.map(|x| lhs >= x) });
    }
    Ok(ConeDriveReport {
        a,
        r,
        containment: !exit.found,
        exit,
        dropped_near_origin: dropped,
        gradient_residual: gres,
        operator_residual: lres,
        translator_residual: tres,
        oy,
        chain,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceDriveReport {
    pub r: usize,
    /// `<V, W>`.
    pub vw: f64,
    pub exit: ExitReport,
    pub containment: bool,
    /// `max |∇ψ - W^T|`.
    pub gradient_residual: f64,
    /// `max |L ψ - r σ_r <N, W>|`.
    pub operator_residual: f64,
    pub identities_pass: bool,
    pub oy: OYRun,
    /// `|<V,W> - Σ <V,e_i><W,e_i> - <V,N><W,N>|` at each maximizer.
    pub frame_residuals: Vec<f64>,
    /// `L ψ(x_k)`, to compare with the translator limit `r <V, W>`.
    pub l_at_maximizers: Vec<f64>,
}

/// `ψ = <X, W>` on a surface tested against `H_W = {<X, W> <= 0}`.
pub fn halfspace_drive<C: Chart + ?Sized>(
    chart: &C,
    mesh: &Mesh,
    v: &[f64],
    w: &[f64],
    r: usize,
    g: &GFunction,
    k_max: usize,
) -> Result<HalfspaceDriveReport> {
    let n = chart.dim();
    let vv = unit("V", v, n + 1)?;
    let ww = unit("W", w, n + 1)?;
    let vw = vv.dot(&ww);
    if !(vw > 0.0) {
        return Err(GeomError::InvalidInput(format!("half-space theorem needs <V, W> > 0, got {vw}")));
    }
    if r == 0 || r > n {
        return Err(GeomError::InvalidInput(format!("need 1 <= r <= n, got r = {r}")));
    }
    let region = Region::Halfspace { b: vec![0.0; n + 1], w: w.to_vec() };
    let exit = first_exit(chart, &region, mesh)?;
    let psi = Field::Linear(w.to_vec());
    let rows: Vec<Result<(f64, f64)>> = mesh
        .points
        .par_iter()
        .map(|p| {
            let pg = point_geometry(chart, &p.u)?;
            let grad = pg.gradient(&psi)?;
            let lhs = pg.l_operator(&psi, r)?;
            let rhs = r as f64 * pg.sigma.sigma(r) * pg.normal.dot(&ww);
            Ok(((grad - pg.tangential(&ww)).amax(), (lhs - rhs).abs() / (1.0 + pg.norm_a * pg.norm_a)))
        })
        .collect();
    let (mut gres, mut lres) = (0.0_f64, 0.0_f64);
    for row in rows {
        let (x, y) = row?;
        gres = gres.max(x);
        lres = lres.max(y);
    }
    let base = chart.position(&chart.base_param())?;
    let gamma = Field::DistanceSquared(base.as_slice().to_vec());
    let oy = oy_sequence(chart, mesh, &psi, &gamma, g, &OyParams { k_max, r, z: None })?;
    let mut frame_residuals = Vec::with_capacity(oy.k.len());
    let mut l_at_maximizers = Vec::with_capacity(oy.k.len());
    for u in &oy.params {
        let pg = point_geometry(chart, u)?;
        let expansion = pg.tangential(&vv).dot(&pg.tangential(&ww)) + pg.normal.dot(&vv) * pg.normal.dot(&ww);
        frame_residuals.push((vw - expansion).abs());
        l_at_maximizers.push(pg.l_operator(&psi, r)?);
    }
    Ok(HalfspaceDriveReport {
        r,
        vw,
        containment: !exit.found,
        exit,
        gradient_residual: gres,
        operator_residual: lres,
        identities_pass: gres <= 1e-7 && lres <= 1e-7,
        oy,
        frame_residuals,
        l_at_maximizers,
    })
}
