//! Region predicates, growth-condition estimators and the distance to the
//! axis of a bi-halfspace wedge.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts::{point_geometry, Chart, Field, PointGeometry};
use crate::error::{GeomError, Result};
use crate::mesh::Mesh;

const UNIT_TOL: f64 = 1e-12;

/// `y = Q (x - p)` with `Q` orthogonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RigidMotion {
    q: DMatrix<f64>,
    p: DVector<f64>,
}

impl RigidMotion {
    pub fn identity(m: usize) -> Self {
        Self { q: DMatrix::identity(m, m), p: DVector::zeros(m) }
    }

    pub fn new(q: DMatrix<f64>, p: DVector<f64>) -> Result<Self> {
        let m = q.nrows();
        if q.ncols() != m || p.len() != m {
            return Err(GeomError::InvalidInput("rigid motion dimensions disagree".into()));
        }
        let defect = (q.transpose() * &q - DMatrix::identity(m, m)).amax();
        if defect > 1e-10 {
            return Err(GeomError::InvalidInput(format!("rotation is not orthogonal (defect {defect:e})")));
        }
        Ok(Self { q, p })
    }

    pub fn rotation(&self) -> &DMatrix<f64> {
        &self.q
    }

    pub fn translation(&self) -> &DVector<f64> {
        &self.p
    }

    pub fn apply(&self, x: &DVector<f64>) -> DVector<f64> {
        &self.q * (x - &self.p)
    }

    pub fn apply_vector(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.q * v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Halfspace {
    pub b: Vec<f64>,
    pub w: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Region {
    /// Complement of the open cone: `<X/|X|, v> <= a`.
    Cone { v: Vec<f64>, a: f64 },
    /// `<X - b, w> <= 0`.
    Halfspace { b: Vec<f64>, w: Vec<f64> },
    /// `<X - b_i, w_i> >= 0` for both; `vertical` holds the translation
    /// direction the normals are orthogonal to, when flagged.
    BiHalfspace {
        first: Halfspace,
        second: Halfspace,
        #[serde(default)]
        vertical: Option<Vec<f64>>,
    },
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

fn check_unit(name: &str, v: &[f64]) -> Result<()> {
    if (norm(v) - 1.0).abs() > UNIT_TOL {
        return Err(GeomError::InvalidInput(format!("{name} must be a unit vector, |{name}| = {}", norm(v))));
    }
    Ok(())
}

impl Region {
    pub fn ambient_dim(&self) -> usize {
        match self {
            Region::Cone { v, .. } => v.len(),
            Region::Halfspace { w, .. } => w.len(),
            Region::BiHalfspace { first, .. } => first.w.len(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Region::Cone { v, a } => {
                check_unit("V", v)?;
                if !(*a > 0.0 && *a < 1.0) {
                    return Err(GeomError::InvalidInput(format!("cone aperture a = {a} outside (0, 1)")));
                }
            }
            Region::Halfspace { b, w } => {
                check_unit("W", w)?;
                if b.len() != w.len() {
                    return Err(GeomError::InvalidInput("halfspace base point has the wrong dimension".into()));
                }
            }
            Region::BiHalfspace { first, second, vertical } => {
                for h in [first, second] {
                    check_unit("W", &h.w)?;
                    if h.b.len() != h.w.len() || h.w.len() != first.w.len() {
                        return Err(GeomError::InvalidInput("bi-halfspace dimensions disagree".into()));
                    }
                }
                let c = dot(&first.w, &second.w).clamp(-1.0, 1.0);
                let angle = c.acos().min(std::f64::consts::PI - c.acos());
                if angle <= 1e-6 {
                    return Err(GeomError::InvalidInput("bi-halfspace normals are not transversal".into()));
                }
                if let Some(v) = vertical {
                    check_unit("V", v)?;
                    for h in [first, second] {
                        if dot(&h.w, v).abs() > 1e-10 {
                            return Err(GeomError::InvalidInput(format!(
                                "vertical bi-halfspace needs <W, V> = 0, got {:e}",
                                dot(&h.w, v)
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// How far `x` is outside the region; positive means outside.
    pub fn violation(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.ambient_dim() {
            return Err(GeomError::InvalidInput("point has the wrong dimension".into()));
        }
        Ok(match self {
            Region::Cone { v, a } => {
                let len = norm(x);
                if len == 0.0 {
                    return Err(GeomError::Domain("cone membership is undefined at the origin".into()));
                }
                dot(x, v) / len - a
            }
            Region::Halfspace { b, w } => {
                let d: Vec<f64> = x.iter().zip(b).map(|(p, q)| p - q).collect();
                dot(&d, w)
            }
            Region::BiHalfspace { first, second, .. } => [first, second]
                .iter()
                .map(|h| {
                    let d: Vec<f64> = x.iter().zip(&h.b).map(|(p, q)| p - q).collect();
                    -dot(&d, &h.w)
                })
                .fold(f64::NEG_INFINITY, f64::max),
        })
    }

    pub fn contains(&self, x: &[f64]) -> Result<bool> {
        Ok(self.violation(x)? <= 0.0)
    }
}

/// `region_contains` in function form.
pub fn region_contains(region: &Region, x: &[f64]) -> Result<bool> {
    region.validate()?;
    region.contains(x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Witness {
    pub index: usize,
    pub u: Vec<f64>,
    pub x: Vec<f64>,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExitReport {
    pub found: bool,
    pub witness: Option<Witness>,
    pub checked: usize,
    /// Points where membership is undefined (the cone vertex).
    pub skipped: usize,
}

/// Scans the mesh for points outside `region`; the witness is the one with
/// the largest violation, lowest index on ties.
pub fn first_exit<C: Chart + ?Sized>(chart: &C, region: &Region, mesh: &Mesh) -> Result<ExitReport> {
    region.validate()?;
    let margins: Vec<Result<Option<(f64, Vec<f64>)>>> = mesh
        .points
        .par_iter()
        .map(|p| {
            let x = chart.position(&p.u)?;
            if matches!(region, Region::Cone { .. }) && x.norm() < 1e-12 {
                return Ok(None);
            }
            Ok(Some((region.violation(x.as_slice())?, x.as_slice().to_vec())))
        })
        .collect();
    let mut best: Option<Witness> = None;
    let mut skipped = 0;
    for (index, m) in margins.into_iter().enumerate() {
        let Some((margin, x)) = m? else {
            skipped += 1;
            continue;
        };
        if margin > 0.0 && best.as_ref().is_none_or(|w| margin > w.margin) {
            best = Some(Witness { index, u: mesh.points[index].u.clone(), x, margin });
        }
    }
    Ok(ExitReport { found: best.is_some(), witness: best, checked: mesh.len(), skipped })
}

/// `d_R(x) = sqrt((x_1 - R/a)^2 + x_2^2)`.
pub fn cylinder_distance(radius: f64, a: f64, x: &[f64]) -> Result<f64> {
    check_cylinder(radius, a, x)?;
    Ok(((x[0] - radius / a).powi(2) + x[1] * x[1]).sqrt())
}

fn check_cylinder(radius: f64, a: f64, x: &[f64]) -> Result<()> {
    if !(radius > 0.0) || !(a > 0.0 && a < 1.0) {
        return Err(GeomError::InvalidInput(format!("need R > 0 and a in (0, 1), got R = {radius}, a = {a}")));
    }
    if x.len() < 2 {
        return Err(GeomError::InvalidInput("cylinder distance needs at least two coordinates".into()));
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CylinderFrame {
    pub distance: f64,
    pub grad: Vec<f64>,
    pub chi: Vec<f64>,
    /// `1/d` followed by `n` zeros.
    pub eigenvalues: Vec<f64>,
}

/// Gradient, rotational direction `chi` and Hessian spectrum of `d_R`.
pub fn cylinder_hessian_frame(radius: f64, a: f64, x: &[f64]) -> Result<CylinderFrame> {
    check_cylinder(radius, a, x)?;
    let m = x.len();
    let d = cylinder_distance(radius, a, x)?;
    if d <= 1e-10 {
        return Err(GeomError::Domain(format!("d_R = {d:e} is on the axis, where d_R is not smooth")));
    }
    let dx1 = x[0] - radius / a;
    let mut grad = vec![0.0; m];
    grad[0] = dx1 / d;
    grad[1] = x[1] / d;
    let mut chi = vec![0.0; m];
    chi[0] = -x[1] / d;
    chi[1] = dx1 / d;
    let mut eigenvalues = vec![0.0; m];
    eigenvalues[0] = 1.0 / d;
    Ok(CylinderFrame { distance: d, grad, chi, eigenvalues })
}

/// Ambient Hessian `(1/d) chi chi^T`.
pub fn cylinder_hessian(radius: f64, a: f64, x: &[f64]) -> Result<DMatrix<f64>> {
    let f = cylinder_hessian_frame(radius, a, x)?;
    let chi = DVector::from_column_slice(&f.chi);
    Ok(&chi * chi.transpose() / f.distance)
}

/// Central-difference Hessian of `d_R` with step `h`.
pub fn cylinder_hessian_fd(radius: f64, a: f64, x: &[f64], h: f64) -> Result<DMatrix<f64>> {
    let m = x.len();
    let d = |p: &[f64]| cylinder_distance(radius, a, p);
    let mut hess = DMatrix::zeros(m, m);
    let mut p = x.to_vec();
    let f0 = d(x)?;
    for i in 0..m {
        for j in i..m {
            let v = if i == j {
                p[i] = x[i] + h;
                let fp = d(&p)?;
                p[i] = x[i] - h;
                let fm = d(&p)?;
                p[i] = x[i];
                (fp - 2.0 * f0 + fm) / (h * h)
            } else {
                let mut corner = |si: f64, sj: f64| -> Result<f64> {
                    p[i] = x[i] + si * h;
                    p[j] = x[j] + sj * h;
                    let v = d(&p);
                    p[i] = x[i];
                    p[j] = x[j];
                    v
                };
                (corner(1.0, 1.0)? - corner(1.0, -1.0)? - corner(-1.0, 1.0)? + corner(-1.0, -1.0)?) / (4.0 * h * h)
            };
            hess[(i, j)] = v;
            hess[(j, i)] = v;
        }
    }
    Ok(hess)
}

/// `a y_1 >= b |y_2|`, `d_R > R` and `y_1 < R b^2 / a`: the bounded part of
/// the wedge outside the cylinder.
pub fn in_v_region(radius: f64, a: f64, b: f64, y: &[f64]) -> Result<bool> {
    let d = cylinder_distance(radius, a, y)?;
    Ok(a * y[0] >= b * y[1].abs() && d > radius && y[0] < radius * b * b / a)
}

/// Coordinates in which a vertical bi-halfspace becomes
/// `{a x_1 ± b x_2 >= 0}` with translation direction `E_{n+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiNormalization {
    pub motion: RigidMotion,
    pub a: f64,
    pub b: f64,
}

pub fn normalize_bihalfspace(first: &Halfspace, second: &Halfspace, v: &[f64]) -> Result<BiNormalization> {
    let region = Region::BiHalfspace { first: first.clone(), second: second.clone(), vertical: Some(v.to_vec()) };
    region.validate()?;
    let m = v.len();
    if m < 3 {
        return Err(GeomError::InvalidInput("a vertical bi-halfspace needs ambient dimension >= 3".into()));
    }
    let w1 = DVector::from_column_slice(&first.w);
    let w2 = DVector::from_column_slice(&second.w);
    let sum = &w1 + &w2;
    let diff = &w1 - &w2;
    let (a, b) = (sum.norm() / 2.0, diff.norm() / 2.0);
    // origin on P_1 ∩ P_2 spanned by W_1, W_2
    let c = w1.dot(&w2);
    let gram = nalgebra::Matrix2::new(1.0, c, c, 1.0);
    let rhs = nalgebra::Vector2::new(dot(&first.b, &first.w), dot(&second.b, &second.w));
    let coef = gram
        .try_inverse()
        .ok_or_else(|| GeomError::InvalidInput("bi-halfspace normals are parallel".into()))?
        * rhs;
    let p = &w1 * coef[0] + &w2 * coef[1];
    let mut rows: Vec<DVector<f64>> = vec![sum / (2.0 * a), diff / (2.0 * b)];
    let vv = DVector::from_column_slice(v);
    let mut basis = rows.clone();
    basis.push(vv.clone());
    for k in 0..m {
        if basis.len() == m {
            break;
        }
        let mut e = DVector::zeros(m);
        e[k] = 1.0;
        for q in &basis {
            e -= q * q.dot(&e);
        }
        if e.norm() > 1e-6 {
            let e = e.normalize();
            basis.push(e.clone());
            rows.push(e);
        }
    }
    rows.push(vv);
    let mut q = DMatrix::zeros(m, m);
    for (i, row) in rows.iter().enumerate() {
        q.set_row(i, &row.transpose());
    }
    Ok(BiNormalization { motion: RigidMotion::new(q, p)?, a, b })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Hypothesis {
    #[serde(rename = "HS2-1")]
    Hs2_1,
    #[serde(rename = "HS2-2")]
    Hs2_2,
    #[serde(rename = "HS1-1")]
    Hs1_1,
    #[serde(rename = "CM")]
    Cm,
}

impl Hypothesis {
    pub fn id(self) -> &'static str {
        match self {
            Hypothesis::Hs2_1 => "HS2-1",
            Hypothesis::Hs2_2 => "HS2-2",
            Hypothesis::Hs1_1 => "HS1-1",
            Hypothesis::Cm => "CM",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthParams {
    pub r: usize,
    /// Cone aperture, required by HS2-1.
    pub a: Option<f64>,
    /// Fixed ambient point for `δ`; defaults to the chart's base point.
    pub base_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GrowthStatus {
    /// Mesh reached scale 10^3; the verdict is an empirical tail estimate.
    Empirical,
    InsufficientScale,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    pub hypothesis: Hypothesis,
    pub samples: Vec<(f64, f64)>,
    pub tail_estimate: f64,
    pub bound: f64,
    pub satisfied: bool,
    pub status: GrowthStatus,
    pub max_scale: f64,
}

/// Scale the mesh must reach before a verdict is labelled empirical.
pub const CERTIFY_SCALE: f64 = 1e3;
const LOGLOG_MIN: f64 = std::f64::consts::E * 1.01;

fn log_weight(s: f64) -> f64 {
    s * s.ln() * s.ln().ln()
}

/// Ratio samples and tail estimate for one growth hypothesis.
///
/// `limsup < bound` hypotheses use the stated bound. For `limsup < ∞` the
/// bound is twice the largest ratio over the decade below the top one, so a
/// ratio that keeps growing by more than a factor two per decade is flagged.
pub fn growth_report<C: Chart + ?Sized>(chart: &C, mesh: &Mesh, hypothesis: Hypothesis, params: &GrowthParams) -> Result<GrowthReport> {
    let n = chart.dim();
    let r = params.r;
    if r == 0 || r > n {
        return Err(GeomError::InvalidInput(format!("growth hypotheses need 1 <= r <= n, got r = {r}")));
    }
    let base = match &params.base_point {
        Some(b) => DVector::from_column_slice(b),
        None => chart.position(&chart.base_param())?,
    };
    let rows: Vec<Result<Option<(f64, f64)>>> = mesh
        .points
        .par_iter()
        .map(|p| {
            let pg = point_geometry(chart, &p.u)?;
            let delta = (&pg.x - &base).norm();
            let s_prev = pg.sigma.sigma(r - 1);
            Ok(match hypothesis {
                Hypothesis::Hs2_1 => (delta > 0.0).then(|| (delta, s_prev / delta)),
                Hypothesis::Hs2_2 => {
                    let rho = chart.intrinsic_distance(&p.u)?;
                    (rho > LOGLOG_MIN).then(|| (rho, pg.norm_a / log_weight(rho)))
                }
                Hypothesis::Hs1_1 | Hypothesis::Cm => {
                    (delta > LOGLOG_MIN).then(|| (delta, s_prev / (delta * log_weight(delta))))
                }
            })
        })
        .collect();
    let mut samples = Vec::new();
    for row in rows {
        if let Some(s) = row? {
            samples.push(s);
        }
    }
    let max_scale = samples.iter().map(|s| s.0).fold(0.0, f64::max);
    if samples.is_empty() || max_scale < 10.0 {
        return Err(GeomError::Domain(format!(
            "mesh reaches scale {max_scale:e}; growth estimates need scales >= 10"
        )));
    }
    let top = samples.iter().filter(|s| s.0 >= max_scale / 10.0).map(|s| s.1).fold(f64::NEG_INFINITY, f64::max);
    let prev = samples
        .iter()
        .filter(|s| s.0 >= max_scale / 100.0 && s.0 < max_scale / 10.0)
        .map(|s| s.1)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut status = if max_scale >= CERTIFY_SCALE { GrowthStatus::Empirical } else { GrowthStatus::InsufficientScale };
    let bound = match hypothesis {
        Hypothesis::Hs2_1 => {
            let a = params
                .a
                .ok_or_else(|| GeomError::InvalidInput("HS2-1 needs the cone aperture a".into()))?;
            if !(a > 0.0 && a < 1.0) {
                return Err(GeomError::InvalidInput(format!("cone aperture a = {a} outside (0, 1)")));
            }
            r as f64 * (1.0 - a) / (a * (n - r + 1) as f64)
        }
        _ if prev.is_finite() => 2.0 * prev.abs().max(top.abs() * 1e-12),
        _ => {
            status = GrowthStatus::InsufficientScale;
            0.0
        }
    };
    Ok(GrowthReport {
        hypothesis,
        satisfied: top < bound,
        samples,
        tail_estimate: top,
        bound,
        status,
        max_scale,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiDriveRow {
    pub index: usize,
    pub lhs: f64,
    pub rhs: f64,
    pub slack: f64,
    pub distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiDriveReport {
    pub a: f64,
    pub b: f64,
    pub radius: f64,
    pub r: usize,
    pub eps: f64,
    /// Smallest eigenvalue of `P_{r-1}` over the points in the region.
    pub min_eigen: f64,
    pub rows: Vec<BiDriveRow>,
    pub min_slack: Option<f64>,
    /// Largest violation of `<E_{n+1},N>^2 <= 2(1 ± <N, grad d>)`.
    pub en_violation: f64,
    pub empty: bool,
    pub passed: bool,
}

/// Both sides of the bi-halfspace inequality at one point, in normalized
/// coordinates; `None` outside the region `V_R`.
pub fn bihalfspace_sides(pg: &PointGeometry, norm: &BiNormalization, radius: f64, r: usize, eps: f64) -> Result<Option<(f64, f64, f64)>> {
    let y = norm.motion.apply(&pg.x);
    if !in_v_region(radius, norm.a, norm.b, y.as_slice())? {
        return Ok(None);
    }
    let field = Field::Cylinder { radius, a: norm.a, motion: norm.motion.clone() };
    let lhs = pg.l_operator(&field, r)?;
    let frame = cylinder_hessian_frame(radius, norm.a, y.as_slice())?;
    let nn = norm.motion.apply_vector(&pg.normal);
    let chi_n = dot(&frame.chi, nn.as_slice());
    let grad_n = dot(&frame.grad, nn.as_slice());
    let e_n = nn[nn.len() - 1];
    let rhs = eps * (1.0 - chi_n * chi_n) / frame.distance + r as f64 * e_n * grad_n;
    Ok(Some((lhs, rhs, frame.distance)))
}

/// Evaluates `L_{r-1} d_R >= ε(1 - <χ,N>^2)/d + r <E_{n+1},N><∇d,N>` on the
/// mesh points inside `V_R`. `eps` defaults to the smallest eigenvalue of
/// `P_{r-1}` over those points.
pub fn bihalfspace_drive<C: Chart + ?Sized>(
    chart: &C,
    mesh: &Mesh,
    first: &Halfspace,
    second: &Halfspace,
    v: &[f64],
    radius: f64,
    r: usize,
    eps: Option<f64>,
) -> Result<BiDriveReport> {
    let norm = normalize_bihalfspace(first, second, v)?;
    if r == 0 || r > chart.dim() {
        return Err(GeomError::InvalidInput(format!("need 1 <= r <= n, got r = {r}")));
    }
    let geoms: Vec<Result<Option<(usize, PointGeometry, f64)>>> = mesh
        .points
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let pg = point_geometry(chart, &p.u)?;
            let y = norm.motion.apply(&pg.x);
            if cylinder_distance(radius, norm.a, y.as_slice())? <= 1e-10
                || !in_v_region(radius, norm.a, norm.b, y.as_slice())?
            {
                return Ok(None);
            }
            let min_eig = pg.newton(r - 1)?.eigenvalues()?[0];
            Ok(Some((i, pg, min_eig)))
        })
        .collect();
    let mut inside = Vec::new();
    for g in geoms {
        if let Some(x) = g? {
            inside.push(x);
        }
    }
    let min_eigen = inside.iter().map(|x| x.2).fold(f64::INFINITY, f64::min);
    let eps = eps.unwrap_or(if min_eigen.is_finite() { min_eigen } else { 0.0 });
    let mut rows = Vec::with_capacity(inside.len());
    let mut en_violation: f64 = f64::NEG_INFINITY;
    for (index, pg, _) in &inside {
        let (lhs, rhs, distance) = bihalfspace_sides(pg, &norm, radius, r, eps)?.expect("point is inside V_R");
        rows.push(BiDriveRow { index: *index, lhs, rhs, slack: lhs - rhs, distance });
        let y = norm.motion.apply(&pg.x);
        let frame = cylinder_hessian_frame(radius, norm.a, y.as_slice())?;
        let nn = norm.motion.apply_vector(&pg.normal);
        en_violation = en_violation.max(en_inequality_violation(nn.as_slice(), &frame.grad));
    }
    let min_slack = rows.iter().map(|r| r.slack).reduce(f64::min);
    let empty = rows.is_empty();
    let passed = empty || min_eigen < eps || min_slack.is_some_and(|s| s >= -1e-6);
    Ok(BiDriveReport {
        a: norm.a,
        b: norm.b,
        radius,
        r,
        eps,
        min_eigen,
        rows,
        min_slack,
        en_violation: if empty { 0.0 } else { en_violation },
        empty,
        passed,
    })
}

/// `max_± (<E_{n+1},N>^2 - 2(1 ± <N, grad d>))`; nonpositive when `grad d`
/// is a unit vector orthogonal to `E_{n+1}`.
pub fn en_inequality_violation(normal: &[f64], grad: &[f64]) -> f64 {
    let e = normal[normal.len() - 1];
    let g = dot(normal, grad);
    (e * e - 2.0 * (1.0 + g)).max(e * e - 2.0 * (1.0 - g))
}
