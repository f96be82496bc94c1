//! Premise-by-premise check of a nonexistence theorem on a sampled surface.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::charts::{point_geometry, Chart};
use crate::error::{GeomError, Result};
use crate::mesh::Mesh;
use crate::regions::{first_exit, growth_report, GrowthParams, GrowthStatus, Hypothesis, Region};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Theorem {
    /// Cone complement, properly immersed branch.
    ConeProper,
    /// Cone complement, bounded `σ_{r-1}` branch.
    ConeBounded,
    Halfspace,
    BiHalfspace,
}

impl Theorem {
    pub fn id(self) -> &'static str {
        match self {
            Theorem::ConeProper => "cone-proper",
            Theorem::ConeBounded => "cone-bounded",
            Theorem::Halfspace => "halfspace",
            Theorem::BiHalfspace => "bi-halfspace",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PremiseStatus {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Premise {
    pub id: String,
    pub status: PremiseStatus,
    /// Verdict rests on a finite-mesh estimate of a limit.
    pub empirical: bool,
    pub value: f64,
    pub detail: String,
}

impl Premise {
    fn new(id: &str, pass: bool, empirical: bool, value: f64, detail: String) -> Self {
        let status = if pass { PremiseStatus::Pass } else { PremiseStatus::Fail };
        Self { id: id.into(), status, empirical, value, detail }
    }

    pub fn passed(&self) -> bool {
        self.status == PremiseStatus::Pass
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateParams {
    pub theorem: Theorem,
    pub r: usize,
    /// Translation velocity.
    pub v: Vec<f64>,
    pub region: Region,
    /// Required lower bound for `P_{r-1}` in the bi-halfspace theorem;
    /// defaults to the smallest eigenvalue seen when that is positive.
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default)]
    pub base_point: Option<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GateReport {
    pub theorem: Theorem,
    pub premises: Vec<Premise>,
    pub all_pass: bool,
    /// No premise set is fully met, as the theorem predicts for any sample.
    pub consistent: bool,
}

pub const PSD_TOL: f64 = 1e-10;
pub const RESIDUAL_TOL: f64 = 1e-6;

fn growth_premise<C: Chart + ?Sized>(chart: &C, mesh: &Mesh, h: Hypothesis, params: &GrowthParams) -> Result<Premise> {
    match growth_report(chart, mesh, h, params) {
        Ok(rep) => {
            let detail = format!("tail {:.6e} vs bound {:.6e} up to scale {:.3e}", rep.tail_estimate, rep.bound, rep.max_scale);
            let pass = rep.satisfied && rep.status == GrowthStatus::Empirical;
            let detail = if rep.status == GrowthStatus::InsufficientScale {
                format!("{detail}; insufficient scale")
            } else {
                detail
            };
            Ok(Premise::new(h.id(), pass, true, rep.tail_estimate, detail))
        }
        Err(GeomError::Domain(msg)) => Ok(Premise::new(h.id(), false, true, f64::NAN, msg)),
        Err(e) => Err(e),
    }
}

/// Evaluates every premise of `params.theorem` plus containment in the
/// region.
pub fn hypothesis_gate<C: Chart + ?Sized>(chart: &C, mesh: &Mesh, params: &GateParams) -> Result<GateReport> {
    let n = chart.dim();
    let r = params.r;
    if r == 0 || r > n {
        return Err(GeomError::InvalidInput(format!("need 1 <= r <= n, got r = {r}")));
    }
    if params.v.len() != n + 1 {
        return Err(GeomError::InvalidInput("velocity has the wrong dimension".into()));
    }
    params.region.validate()?;
    let region_ok = matches!(
        (params.theorem, &params.region),
        (Theorem::ConeProper | Theorem::ConeBounded, Region::Cone { .. })
            | (Theorem::Halfspace, Region::Halfspace { .. })
            | (Theorem::BiHalfspace, Region::BiHalfspace { .. })
    );
    if !region_ok {
        return Err(GeomError::InvalidInput(format!("region does not match theorem {}", params.theorem.id())));
    }
    let v = nalgebra::DVector::from_column_slice(&params.v);
    let rows: Vec<Result<(f64, f64, f64, f64)>> = mesh
        .points
        .par_iter()
        .map(|p| {
            let pg = point_geometry(chart, &p.u)?;
            let min_eig = pg.newton(r - 1)?.eigenvalues()?[0];
            let residual = (pg.sigma.sigma(r) - pg.normal.dot(&v)).abs();
            Ok((min_eig, residual, pg.sigma.sigma(r).abs(), pg.sigma.sigma(r - 1).abs()))
        })
        .collect();
    let (mut min_eig, mut residual, mut sr, mut sr1) = (f64::INFINITY, 0.0_f64, 0.0_f64, 0.0_f64);
    for row in rows {
        let (e, res, s, s1) = row?;
        min_eig = min_eig.min(e);
        residual = residual.max(res);
        sr = sr.max(s);
        sr1 = sr1.max(s1);
    }
    let mut premises = Vec::new();
    premises.push(Premise::new(
        "translator-residual",
        residual < RESIDUAL_TOL,
        false,
        residual,
        format!("sup |σ_r - <N,V>| = {residual:.6e}"),
    ));
    if params.theorem == Theorem::BiHalfspace {
        let eps = params.eps.unwrap_or(min_eig);
        let pass = eps > 0.0 && min_eig >= eps - PSD_TOL;
        premises.push(Premise::new("eps-definite", pass, false, min_eig, format!("min eig P_{{r-1}} = {min_eig:.6e}, ε = {eps:.6e}")));
    } else {
        premises.push(Premise::new("psd", min_eig >= -PSD_TOL, false, min_eig, format!("min eig P_{{r-1}} = {min_eig:.6e}")));
    }
    let a = match &params.region {
        Region::Cone { a, .. } => Some(*a),
        _ => None,
    };
    let gp = GrowthParams { r, a, base_point: params.base_point.clone() };
    match params.theorem {
        Theorem::ConeProper => {
            premises.push(growth_premise(chart, mesh, Hypothesis::Hs2_1, &gp)?);
        }
        Theorem::ConeBounded => {
            premises.push(Premise::new(
                "sigma-bounded",
                sr1.is_finite(),
                true,
                sr1,
                format!("sup |σ_(r-1)| on the mesh = {sr1:.6e}"),
            ));
            premises.push(growth_premise(chart, mesh, Hypothesis::Hs2_2, &gp)?);
        }
        Theorem::Halfspace => {
            premises.push(growth_premise(chart, mesh, Hypothesis::Hs1_1, &gp)?);
            premises.push(Premise::new("hyp-OY-3", sr <= 1.0 + 1e-8, false, sr, format!("sup |σ_r| = {sr:.6e}")));
        }
        Theorem::BiHalfspace => {
            premises.push(growth_premise(chart, mesh, Hypothesis::Cm, &gp)?);
        }
    }
    let exit = first_exit(chart, &params.region, mesh)?;
    let margin = exit.witness.as_ref().map_or(0.0, |w| w.margin);
    let detail = match &exit.witness {
        Some(w) => format!("mesh point {} leaves the region by {:.6e}", w.index, w.margin),
        None => format!("all {} checked points inside", exit.checked - exit.skipped),
    };
    premises.push(Premise::new("containment", !exit.found, false, margin, detail));
    let all_pass = premises.iter().all(Premise::passed);
    Ok(GateReport { theorem: params.theorem, premises, all_pass, consistent: !all_pass })
}
