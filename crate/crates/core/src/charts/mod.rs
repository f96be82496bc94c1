//! Parametrized hypersurface patches `X: U ⊂ R^n -> R^{n+1}`.
//!
//! Every chart supplies analytic first and second derivatives; the
//! geometry (metric, normal, shape operator) and the operators built on it
//! live in [`geometry`] and [`ops`].

mod field;
mod geometry;
mod library;
mod ops;
mod spec;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::quad;

pub use field::{Field, ParamFn};
pub use geometry::{point_geometry, PointGeometry, MIN_SINGULAR_VALUE};
pub use library::{Corrupted, OscillatingCylinder, Paraboloid, Plane, Sphere, WaveGraph};
pub use ops::{
    fd_consistency, fd_step, gradient_norm, intrinsic_hessian, l_distance, l_operator,
    richardson_slope, soliton_residual, FdReport,
};
pub use spec::{build_chart, SurfaceSpec};

/// Axis-aligned parameter box `[lo_i, hi_i]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl ParamBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() || lo.is_empty() {
            return Err(GeomError::InvalidInput("parameter box bounds disagree in length".into()));
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a < b) || !a.is_finite() || !b.is_finite()) {
            return Err(GeomError::InvalidInput(format!("degenerate parameter box {lo:?} .. {hi:?}")));
        }
        Ok(Self { lo, hi })
    }

    pub fn cube(n: usize, half_width: f64) -> Self {
        Self { lo: vec![-half_width; n], hi: vec![half_width; n] }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    pub fn diameter(&self) -> f64 {
        self.lo.iter().zip(&self.hi).map(|(a, b)| (b - a).powi(2)).sum::<f64>().sqrt()
    }

    pub fn center(&self) -> Vec<f64> {
        self.lo.iter().zip(&self.hi).map(|(a, b)| 0.5 * (a + b)).collect()
    }

    /// Inside the box shrunk by `margin` on every side.
    pub fn contains_with_margin(&self, u: &[f64], margin: f64) -> bool {
        u.len() == self.dim()
            && u.iter().zip(self.lo.iter().zip(&self.hi)).all(|(x, (a, b))| *x >= a + margin && *x <= b - margin)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChartKind {
    Graph,
    Rotational,
    Product,
    Custom,
}

/// Rule fixing the sign of the unit normal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Orientation {
    /// Positive last component.
    Upward,
    /// Pointing toward `center`.
    Inward(Vec<f64>),
    /// Positive inner product with the given vector.
    Along(Vec<f64>),
}

/// Position and derivatives at a parameter point. `ddx[i * n + j]` is `X_ij`.
#[derive(Debug, Clone)]
pub struct ChartJet {
    pub x: DVector<f64>,
    pub dx: DMatrix<f64>,
    pub ddx: Vec<DVector<f64>>,
}

impl ChartJet {
    pub fn zeros(n: usize) -> Self {
        Self {
            x: DVector::zeros(n + 1),
            dx: DMatrix::zeros(n + 1, n),
            ddx: vec![DVector::zeros(n + 1); n * n],
        }
    }

    pub fn xij(&self, i: usize, j: usize) -> &DVector<f64> {
        let n = self.dx.ncols();
        &self.ddx[i * n + j]
    }
}

pub trait Chart: Send + Sync {
    fn dim(&self) -> usize;

    fn domain(&self) -> &ParamBox;

    fn kind(&self) -> ChartKind;

    fn orientation(&self) -> Orientation;

    fn name(&self) -> String;

    /// Analytic jet; callers have already checked [`Chart::contains`].
    fn eval_jet(&self, u: &[f64]) -> Result<ChartJet>;

    fn contains(&self, u: &[f64]) -> bool {
        self.domain().contains_with_margin(u, 0.0)
    }

    fn jet(&self, u: &[f64]) -> Result<ChartJet> {
        if u.len() != self.dim() || u.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::InvalidInput(format!("bad parameter {u:?} for a {}-dimensional chart", self.dim())));
        }
        if !self.contains(u) {
            return Err(GeomError::Domain(format!("parameter {u:?} outside the domain of {}", self.name())));
        }
        self.eval_jet(u)
    }

    fn position(&self, u: &[f64]) -> Result<DVector<f64>> {
        Ok(self.jet(u)?.x)
    }

    /// Parameter of the fixed point used for intrinsic distances.
    fn base_param(&self) -> Vec<f64> {
        self.domain().center()
    }

    /// Intrinsic distance from the base point. The default is the length of
    /// the image of the straight parameter segment, an upper bound that is
    /// exact along geodesic coordinate lines.
    fn intrinsic_distance(&self, u: &[f64]) -> Result<f64> {
        let base = self.base_param();
        let dir: Vec<f64> = u.iter().zip(&base).map(|(a, b)| a - b).collect();
        if dir.iter().all(|d| *d == 0.0) {
            return Ok(0.0);
        }
        let speed = |s: f64| -> f64 {
            let p: Vec<f64> = base.iter().zip(&dir).map(|(b, d)| b + s * d).collect();
            match self.jet(&p) {
                Ok(j) => (&j.dx * DVector::from_column_slice(&dir)).norm(),
                Err(_) => f64::NAN,
            }
        };
        let (len, _) = quad::integrate(speed, 0.0, 1.0, 1e-12, 1e-10)?;
        if !len.is_finite() {
            return Err(GeomError::Numerical(format!("arclength to {u:?} is not finite")));
        }
        Ok(len)
    }
}

impl<C: Chart + ?Sized> Chart for Box<C> {
    fn dim(&self) -> usize {
        (**self).dim()
    }
    fn domain(&self) -> &ParamBox {
        (**self).domain()
    }
    fn kind(&self) -> ChartKind {
        (**self).kind()
    }
    fn orientation(&self) -> Orientation {
        (**self).orientation()
    }
    fn name(&self) -> String {
        (**self).name()
    }
    fn eval_jet(&self, u: &[f64]) -> Result<ChartJet> {
        (**self).eval_jet(u)
    }
    fn contains(&self, u: &[f64]) -> bool {
        (**self).contains(u)
    }
    fn base_param(&self) -> Vec<f64> {
        (**self).base_param()
    }
    fn intrinsic_distance(&self, u: &[f64]) -> Result<f64> {
        (**self).intrinsic_distance(u)
    }
}

/// Jet of the graph `x -> (x, h(x))` from the value, gradient and Hessian of `h`.
pub fn graph_jet(x: &[f64], h: f64, dh: &[f64], ddh: &DMatrix<f64>) -> ChartJet {
    let n = x.len();
    let mut jet = ChartJet::zeros(n);
    for i in 0..n {
        jet.x[i] = x[i];
        jet.dx[(i, i)] = 1.0;
        jet.dx[(n, i)] = dh[i];
    }
    jet.x[n] = h;
    for i in 0..n {
        for j in 0..n {
            jet.ddx[i * n + j][n] = ddh[(i, j)];
        }
    }
    jet
}
