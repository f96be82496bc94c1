use nalgebra::{DMatrix, DVector};

use super::field::Field;
use super::{Chart, ChartJet, Orientation};
use crate::error::{GeomError, Result};
use crate::symfun::{newton_transform_with, CurvatureSpectrum, SymMatrix};

/// Smallest admissible singular value of `dX`.
pub const MIN_SINGULAR_VALUE: f64 = 1e-8;

/// Extrinsic geometry at one chart point.
///
/// `a` is the shape operator in the orthonormal frame `frame = dX L^{-T}`,
/// where `g = L L^T`; the second fundamental form is `II_ij = <X_ij, N>`.
#[derive(Debug, Clone)]
pub struct PointGeometry {
    pub u: Vec<f64>,
    pub x: DVector<f64>,
    pub normal: DVector<f64>,
    pub g: DMatrix<f64>,
    pub g_inv: DMatrix<f64>,
    pub second_form: DMatrix<f64>,
    pub a: SymMatrix,
    pub sigma: CurvatureSpectrum,
    pub norm_a: f64,
    pub frame: DMatrix<f64>,
    pub l_inv: DMatrix<f64>,
    pub jet: ChartJet,
    pub domain_size: f64,
}

fn unit_normal(dx: &DMatrix<f64>) -> DVector<f64> {
    let m = dx.nrows();
    let n = dx.ncols();
    let mut normal = DVector::zeros(m);
    for k in 0..m {
        let minor = dx.clone().remove_row(k);
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        normal[k] = sign * if n == 0 { 1.0 } else { minor.determinant() };
    }
    let len = normal.norm();
    normal / len
}

fn orient(normal: DVector<f64>, orientation: &Orientation, x: &DVector<f64>) -> Result<DVector<f64>> {
    let s = match orientation {
        Orientation::Upward => normal[normal.len() - 1],
        Orientation::Inward(c) => {
            if c.len() != x.len() {
                return Err(GeomError::InvalidInput("orientation center has the wrong dimension".into()));
            }
            (DVector::from_column_slice(c) - x).dot(&normal)
        }
        Orientation::Along(v) => {
            if v.len() != x.len() {
                return Err(GeomError::InvalidInput("orientation vector has the wrong dimension".into()));
            }
            DVector::from_column_slice(v).dot(&normal)
        }
    };
    Ok(if s < 0.0 { -normal } else { normal })
}

/// Metric, normal, shape operator and curvature spectrum at `u`.
pub fn point_geometry<C: Chart + ?Sized>(chart: &C, u: &[f64]) -> Result<PointGeometry> {
    let jet = chart.jet(u)?;
    let n = chart.dim();
    let singular = |reason: String| GeomError::SingularPoint { u: u.to_vec(), reason };
    if jet.x.iter().chain(jet.dx.iter()).chain(jet.ddx.iter().flat_map(|v| v.iter())).any(|v| !v.is_finite()) {
        return Err(singular("non-finite chart derivatives".into()));
    }
    let g = jet.dx.transpose() * &jet.dx;
    let g = (&g + g.transpose()) * 0.5;
    let eig = g.clone().symmetric_eigenvalues();
    let min_eig = eig.iter().cloned().fold(f64::INFINITY, f64::min);
    if !(min_eig > MIN_SINGULAR_VALUE * MIN_SINGULAR_VALUE) {
        return Err(singular(format!(
            "dX is rank deficient (smallest singular value {:e})",
            min_eig.max(0.0).sqrt()
        )));
    }
    let chol = g.clone().cholesky().ok_or_else(|| singular("metric is not positive definite".into()))?;
    let l = chol.l();
    let l_inv = l
        .clone()
        .try_inverse()
        .ok_or_else(|| singular("Cholesky factor is not invertible".into()))?;
    let g_inv = chol.inverse();
    let normal = orient(unit_normal(&jet.dx), &chart.orientation(), &jet.x)?;
    let mut second_form = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            second_form[(i, j)] = jet.xij(i, j).dot(&normal);
        }
    }
    let a_frame = &l_inv * &second_form * l_inv.transpose();
    let a = SymMatrix::symmetrized(a_frame);
    let sigma = a.spectrum()?;
    let norm_a = a.frobenius_norm();
    let frame = &jet.dx * l_inv.transpose();
    Ok(PointGeometry {
        u: u.to_vec(),
        x: jet.x.clone(),
        normal,
        g,
        g_inv,
        second_form,
        a,
        sigma,
        norm_a,
        frame,
        l_inv,
        jet,
        domain_size: chart.domain().diameter(),
    })
}

impl PointGeometry {
    pub fn dim(&self) -> usize {
        self.g.nrows()
    }

    /// `P_r` in the orthonormal frame; `r` may equal `n`.
    pub fn newton(&self, r: usize) -> Result<SymMatrix> {
        if r > self.dim() {
            return Err(GeomError::Domain(format!("P_{r} undefined in dimension {}", self.dim())));
        }
        Ok(newton_transform_with(&self.a, &self.sigma, r))
    }

    /// Frame components of the tangential projection of `v`.
    pub fn tangential(&self, v: &DVector<f64>) -> DVector<f64> {
        self.frame.transpose() * v
    }

    /// Ambient vector of the tangential projection of `v`.
    pub fn tangential_ambient(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.frame * self.tangential(v)
    }

    /// `gamma[k][i][j] = Γ^k_ij = g^{kl} <X_ij, X_l>`.
    pub fn christoffel(&self) -> Vec<DMatrix<f64>> {
        let n = self.dim();
        let mut out = vec![DMatrix::zeros(n, n); n];
        for i in 0..n {
            for j in 0..n {
                let proj = self.jet.dx.transpose() * self.jet.xij(i, j);
                let coeffs = &self.g_inv * proj;
                for k in 0..n {
                    out[k][(i, j)] = coeffs[k];
                }
            }
        }
        out
    }

    /// Value and coordinate differentials `(f, ∂f, ∂²f)` of a field.
    pub fn coordinate_derivatives(&self, field: &Field) -> Result<(f64, DVector<f64>, DMatrix<f64>)> {
        let n = self.dim();
        if let Some(amb) = field.ambient_jet(&self.x)? {
            let df = self.jet.dx.transpose() * &amb.grad;
            let mut ddf = self.jet.dx.transpose() * &amb.hess * &self.jet.dx;
            for i in 0..n {
                for j in 0..n {
                    ddf[(i, j)] += amb.grad.dot(self.jet.xij(i, j));
                }
            }
            return Ok((amb.value, df, ddf));
        }
        let (v, df, ddf) = field
            .param_derivatives(&self.u, self.domain_size)?
            .expect("non-ambient fields are parameter fields");
        Ok((v, DVector::from_vec(df), ddf))
    }

    /// Intrinsic Hessian in the orthonormal frame: `∂²f - Γ^k_ij ∂_k f`.
    pub fn hessian(&self, field: &Field) -> Result<SymMatrix> {
        let (_, df, ddf) = self.coordinate_derivatives(field)?;
        Ok(self.hessian_from(&df, &ddf))
    }

    pub(crate) fn hessian_from(&self, df: &DVector<f64>, ddf: &DMatrix<f64>) -> SymMatrix {
        let n = self.dim();
        let gamma = self.christoffel();
        let mut h = ddf.clone();
        for i in 0..n {
            for j in 0..n {
                let corr: f64 = (0..n).map(|k| gamma[k][(i, j)] * df[k]).sum();
                h[(i, j)] -= corr;
            }
        }
        let frame_h = &self.l_inv * h * self.l_inv.transpose();
        SymMatrix::symmetrized(frame_h)
    }

    /// Frame components of the intrinsic gradient.
    pub fn gradient(&self, field: &Field) -> Result<DVector<f64>> {
        let (_, df, _) = self.coordinate_derivatives(field)?;
        Ok(&self.l_inv * df)
    }

    /// `L_{r-1} f = tr(P_{r-1} hess f)`.
    pub fn l_operator(&self, field: &Field, r: usize) -> Result<f64> {
        if r == 0 || r > self.dim() {
            return Err(GeomError::Domain(format!("L_{{r-1}} needs 1 <= r <= n, got r = {r}")));
        }
        let p = self.newton(r - 1)?;
        let h = self.hessian(field)?;
        Ok((p.matrix() * h.matrix()).trace())
    }
}
