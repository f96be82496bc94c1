use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{GeomError, Result};
use crate::regions::{cylinder_distance, cylinder_hessian_frame, RigidMotion};

/// Distance below which the distance function is treated as singular.
pub const NEAR_ORIGIN: f64 = 1e-8;

/// Scalar function given directly on chart parameters, differentiated by
/// central differences with step `h`.
#[derive(Clone)]
pub struct ParamFn {
    pub f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub h: f64,
}

impl ParamFn {
    pub fn new<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(f: F, h: f64) -> Self {
        Self { f: Arc::new(f), h }
    }
}

impl fmt::Debug for ParamFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ParamFn").field("h", &self.h).finish_non_exhaustive()
    }
}

/// Scalar fields on a hypersurface. All but `Param` are restrictions of
/// ambient functions with closed-form gradient and Hessian.
#[derive(Debug, Clone)]
pub enum Field {
    Constant(f64),
    /// `<X, w>`
    Linear(Vec<f64>),
    /// `<X, w> + c`
    Affine { w: Vec<f64>, c: f64 },
    /// `|X - o|`
    Distance(Vec<f64>),
    /// `|X - o|^2`
    DistanceSquared(Vec<f64>),
    /// `<X, v> - a |X|`
    ConePsi { v: Vec<f64>, a: f64 },
    /// Distance to the axis of the bi-halfspace cylinder, evaluated in the
    /// normalized coordinates `motion(X)`.
    Cylinder { radius: f64, a: f64, motion: RigidMotion },
    Param(ParamFn),
}

pub(crate) struct AmbientJet {
    pub value: f64,
    pub grad: DVector<f64>,
    pub hess: DMatrix<f64>,
}

fn check_len(v: &[f64], m: usize) -> Result<()> {
    if v.len() != m {
        return Err(GeomError::InvalidInput(format!(
            "field vector has {} components, ambient space has {m}",
            v.len()
        )));
    }
    Ok(())
}

fn distance_jet(x: &DVector<f64>, o: &[f64]) -> Result<AmbientJet> {
    check_len(o, x.len())?;
    let d = x - DVector::from_column_slice(o);
    let delta = d.norm();
    if delta < NEAR_ORIGIN {
        return Err(GeomError::NearOrigin { distance: delta });
    }
    let unit = &d / delta;
    let m = x.len();
    let hess = (DMatrix::identity(m, m) - &unit * unit.transpose()) / delta;
    Ok(AmbientJet { value: delta, grad: unit, hess })
}

impl Field {
    pub fn is_ambient(&self) -> bool {
        !matches!(self, Field::Param(_))
    }

    pub(crate) fn ambient_jet(&self, x: &DVector<f64>) -> Result<Option<AmbientJet>> {
        let m = x.len();
        let jet = match self {
            Field::Constant(c) => AmbientJet { value: *c, grad: DVector::zeros(m), hess: DMatrix::zeros(m, m) },
            Field::Linear(w) => {
                check_len(w, m)?;
                let w = DVector::from_column_slice(w);
                AmbientJet { value: x.dot(&w), grad: w, hess: DMatrix::zeros(m, m) }
            }
            Field::Affine { w, c } => {
                check_len(w, m)?;
                let w = DVector::from_column_slice(w);
                AmbientJet { value: x.dot(&w) + c, grad: w, hess: DMatrix::zeros(m, m) }
            }
            Field::Distance(o) => distance_jet(x, o)?,
            Field::DistanceSquared(o) => {
                check_len(o, m)?;
                let d = x - DVector::from_column_slice(o);
                AmbientJet { value: d.norm_squared(), grad: 2.0 * d, hess: 2.0 * DMatrix::identity(m, m) }
            }
            Field::ConePsi { v, a } => {
                check_len(v, m)?;
                let origin = vec![0.0; m];
                let dist = distance_jet(x, &origin)?;
                let v = DVector::from_column_slice(v);
                AmbientJet {
                    value: x.dot(&v) - a * dist.value,
                    grad: v - *a * dist.grad,
                    hess: -*a * dist.hess,
                }
            }
            Field::Cylinder { radius, a, motion } => {
                let y = motion.apply(x);
                let value = cylinder_distance(*radius, *a, y.as_slice())?;
                let frame = cylinder_hessian_frame(*radius, *a, y.as_slice())?;
                let chi = DVector::from_column_slice(&frame.chi);
                let grad_y = DVector::from_column_slice(&frame.grad);
                let hess_y = (&chi * chi.transpose()) / value;
                let q = motion.rotation();
                AmbientJet {
                    value,
                    grad: q.transpose() * grad_y,
                    hess: q.transpose() * hess_y * q,
                }
            }
            Field::Param(_) => return Ok(None),
        };
        Ok(Some(jet))
    }

    /// Value, parameter gradient and parameter Hessian of a `Param` field.
    pub(crate) fn param_derivatives(&self, u: &[f64], domain_size: f64) -> Result<Option<(f64, Vec<f64>, DMatrix<f64>)>> {
        let Field::Param(p) = self else {
            return Ok(None);
        };
        if !(p.h >= 1e-8 * domain_size.max(f64::MIN_POSITIVE)) {
            return Err(GeomError::Tolerance(format!(
                "finite-difference step {:e} below 1e-8 times the domain size {domain_size:e}",
                p.h
            )));
        }
        let n = u.len();
        let f = |v: &[f64]| (p.f)(v);
        let h = p.h;
        let f0 = f(u);
        let mut grad = vec![0.0; n];
        let mut hess = DMatrix::zeros(n, n);
        let mut w = u.to_vec();
        for i in 0..n {
            w[i] = u[i] + h;
            let fp = f(&w);
            w[i] = u[i] - h;
            let fm = f(&w);
            w[i] = u[i];
            grad[i] = (fp - fm) / (2.0 * h);
            hess[(i, i)] = (fp - 2.0 * f0 + fm) / (h * h);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                let mut corner = |si: f64, sj: f64| {
                    w[i] = u[i] + si * h;
                    w[j] = u[j] + sj * h;
                    let v = f(&w);
                    w[i] = u[i];
                    w[j] = u[j];
                    v
                };
                let v = (corner(1.0, 1.0) - corner(1.0, -1.0) - corner(-1.0, 1.0) + corner(-1.0, -1.0)) / (4.0 * h * h);
                hess[(i, j)] = v;
                hess[(j, i)] = v;
            }
        }
        Ok(Some((f0, grad, hess)))
    }
}
