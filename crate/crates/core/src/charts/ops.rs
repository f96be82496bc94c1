use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::field::{Field, NEAR_ORIGIN};
use super::geometry::{point_geometry, PointGeometry};
use super::{Chart, ChartJet};
use crate::error::{GeomError, Result};
use crate::symfun::SymMatrix;

/// Intrinsic Hessian of `field` at `u`, in the orthonormal frame.
pub fn intrinsic_hessian<C: Chart + ?Sized>(chart: &C, field: &Field, u: &[f64]) -> Result<SymMatrix> {
    point_geometry(chart, u)?.hessian(field)
}

/// `L_{r-1} f = tr(P_{r-1} hess f)` at `u`.
pub fn l_operator<C: Chart + ?Sized>(chart: &C, field: &Field, u: &[f64], r: usize) -> Result<f64> {
    point_geometry(chart, u)?.l_operator(field, r)
}

/// Closed-form `L_{r-1} δ` for `δ = |X - origin|`.
pub fn l_distance<C: Chart + ?Sized>(chart: &C, u: &[f64], r: usize, origin: &[f64]) -> Result<f64> {
    point_geometry(chart, u)?.l_distance(r, origin)
}

/// Norm of the intrinsic gradient of `field`.
pub fn gradient_norm<C: Chart + ?Sized>(chart: &C, field: &Field, u: &[f64]) -> Result<f64> {
    point_geometry(chart, u)?.gradient_norm(field)
}

/// `sigma_r - <N, V>` at `u`.
pub fn soliton_residual<C: Chart + ?Sized>(chart: &C, u: &[f64], v: &[f64], r: usize) -> Result<f64> {
    point_geometry(chart, u)?.soliton_residual(v, r)
}

fn check_unit(v: &[f64], m: usize) -> Result<DVector<f64>> {
    if v.len() != m {
        return Err(GeomError::InvalidInput(format!("vector has {} components, expected {m}", v.len())));
    }
    let v = DVector::from_column_slice(v);
    if (v.norm() - 1.0).abs() > 1e-10 {
        return Err(GeomError::InvalidInput(format!("velocity must be a unit vector, |V| = {}", v.norm())));
    }
    Ok(v)
}

impl PointGeometry {
    pub fn soliton_residual(&self, v: &[f64], r: usize) -> Result<f64> {
        let v = check_unit(v, self.x.len())?;
        Ok(self.sigma.sigma(r) - self.normal.dot(&v))
    }

    pub fn gradient_norm(&self, field: &Field) -> Result<f64> {
        let (_, df, _) = self.coordinate_derivatives(field)?;
        let norm = df.dot(&(&self.g_inv * &df)).max(0.0).sqrt();
        if matches!(field, Field::Distance(_)) && norm > 1.0 + 1e-12 {
            return Err(GeomError::Tolerance(format!("|grad δ| = {norm} exceeds 1")));
        }
        Ok(norm)
    }

    pub fn l_distance(&self, r: usize, origin: &[f64]) -> Result<f64> {
        let n = self.dim();
        if r == 0 || r > n {
            return Err(GeomError::Domain(format!("L_{{r-1}} needs 1 <= r <= n, got r = {r}")));
        }
        if origin.len() != self.x.len() {
            return Err(GeomError::InvalidInput("origin has the wrong dimension".into()));
        }
        let d = &self.x - DVector::from_column_slice(origin);
        let delta = d.norm();
        if delta < NEAR_ORIGIN {
            return Err(GeomError::NearOrigin { distance: delta });
        }
        let t = self.tangential(&d);
        let p = self.newton(r - 1)?;
        let quad = t.dot(&(p.matrix() * &t));
        let (nf, rf) = ((n - r + 1) as f64, r as f64);
        Ok((nf * self.sigma.sigma(r - 1) + rf * self.sigma.sigma(r) * d.dot(&self.normal)) / delta
            - quad / delta.powi(3))
    }
}

/// Default finite-difference step for a parameter box of the given diameter.
pub fn fd_step(diameter: f64) -> f64 {
    1e-5_f64.max(1e-6 * diameter)
}

/// Observed order from errors at steps `h` and `h/2`.
pub fn richardson_slope(err_h: f64, err_half: f64) -> f64 {
    (err_h / err_half).log2()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FdReport {
    pub h: f64,
    pub err_h: f64,
    pub err_half: f64,
    pub slope: f64,
    /// Both errors at round-off level; the slope is meaningless then.
    pub exact: bool,
    pub passed: bool,
}

fn fd_error<C: Chart + ?Sized>(chart: &C, u: &[f64], jet: &ChartJet, h: f64) -> Result<f64> {
    let n = chart.dim();
    let mut worst: f64 = 0.0;
    let mut p = u.to_vec();
    for i in 0..n {
        p[i] = u[i] + h;
        let plus = chart.jet(&p)?;
        p[i] = u[i] - h;
        let minus = chart.jet(&p)?;
        p[i] = u[i];
        let d1: DVector<f64> = (&plus.x - &minus.x) / (2.0 * h);
        worst = worst.max((d1 - jet.dx.column(i)).amax());
        let d2: DMatrix<f64> = (&plus.dx - &minus.dx) / (2.0 * h);
        for j in 0..n {
            worst = worst.max((d2.column(j) - jet.xij(i, j)).amax());
        }
    }
    Ok(worst)
}

/// Compares analytic `dX`, `d²X` at `u` against central differences at
/// steps `h` and `h/2`. Passes when the observed order is at least 1.9 or
/// the discrepancy is already at round-off level.
pub fn fd_consistency<C: Chart + ?Sized>(chart: &C, u: &[f64], h: f64) -> Result<FdReport> {
    let jet = chart.jet(u)?;
    let scale = 1.0 + jet.x.amax() + jet.dx.amax() + jet.ddx.iter().map(|v| v.amax()).fold(0.0, f64::max);
    let err_h = fd_error(chart, u, &jet, h)?;
    let err_half = fd_error(chart, u, &jet, 0.5 * h)?;
    let floor = 1e-9 * scale;
    let exact = err_h <= floor && err_half <= floor;
    let slope = richardson_slope(err_h, err_half);
    Ok(FdReport { h, err_h, err_half, slope, exact, passed: exact || slope >= 1.9 })
}
