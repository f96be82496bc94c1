//! Test and reference charts.

use std::f64::consts::PI;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{graph_jet, Chart, ChartJet, ChartKind, Orientation, ParamBox};
use crate::error::{GeomError, Result};

/// Upper hemisphere of radius `radius` about `center`, as a graph over the
/// equatorial disk, with the inward normal.
#[derive(Debug, Clone)]
pub struct Sphere {
    pub radius: f64,
    pub center: Vec<f64>,
    domain: ParamBox,
}

impl Sphere {
    pub fn new(n: usize, radius: f64, center: Option<Vec<f64>>) -> Result<Self> {
        if n == 0 || !(radius > 0.0) {
            return Err(GeomError::InvalidInput(format!("sphere needs n >= 1 and radius > 0 (n = {n}, radius = {radius})")));
        }
        let center = center.unwrap_or_else(|| vec![0.0; n + 1]);
        if center.len() != n + 1 {
            return Err(GeomError::InvalidInput("sphere center has the wrong dimension".into()));
        }
        Ok(Self { radius, center, domain: ParamBox::cube(n, 0.9 / (n as f64).sqrt()) })
    }

    pub fn unit(n: usize) -> Self {
        Self::new(n, 1.0, None).expect("valid unit sphere")
    }
}

impl Chart for Sphere {
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    fn domain(&self) -> &ParamBox {
        &self.domain
    }
    fn kind(&self) -> ChartKind {
        ChartKind::Graph
    }
    fn orientation(&self) -> Orientation {
        Orientation::Inward(self.center.clone())
    }
    fn name(&self) -> String {
        format!("sphere(n={}, radius={})", self.dim(), self.radius)
    }
    fn eval_jet(&self, u: &[f64]) -> Result<ChartJet> {
        let n = self.dim();
        let s2: f64 = u.iter().map(|x| x * x).sum();
        let w = (1.0 - s2).sqrt();
        let dh: Vec<f64> = u.iter().map(|x| -x / w).collect();
        let mut ddh = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                ddh[(i, j)] = -u[i] * u[j] / w.powi(3) - if i == j { 1.0 / w } else { 0.0 };
            }
        }
        let mut jet = graph_jet(u, w, &dh, &ddh);
        jet.x *= self.radius;
        jet.dx *= self.radius;
        for v in &mut jet.ddx {
            *v *= self.radius;
        }
        for (xi, ci) in jet.x.iter_mut().zip(&self.center) {
            *xi += ci;
        }
        Ok(jet)
    }
    fn base_param(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
    fn intrinsic_distance(&self, u: &[f64]) -> Result<f64> {
        let s = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        Ok(self.radius * s.min(1.0).asin())
    }
}

/// The horizontal hyperplane `x_{n+1} = height`.
#[derive(Debug, Clone)]
pub struct Plane {
    pub height: f64,
    domain: ParamBox,
}

impl Plane {
    pub fn new(n: usize, half_width: f64, height: f64) -> Self {
        Self { height, domain: ParamBox::cube(n, half_width) }
    }
}

impl Chart for Plane {
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    fn domain(&self) -> &ParamBox {
        &self.domain
    }
    fn kind(&self) -> ChartKind {
        ChartKind::Graph
    }
    fn orientation(&self) -> Orientation {
        Orientation::Upward
    }
    fn name(&self) -> String {
        format!("plane(n={})", self.dim())
    }
    fn eval_jet(&self, u: &[f64]) -> Result<ChartJet> {
        let n = self.dim();
        Ok(graph_jet(u, self.height, &vec![0.0; n], &DMatrix::zeros(n, n)))
    }
}

/// Graph of `c |x|^2 / 2`.
#[derive(Debug, Clone)]
pub struct Paraboloid {
    pub curvature: f64,
    domain: ParamBox,
}

impl Paraboloid {
    pub fn new(n: usize, curvature: f64, half_width: f64) -> Self {
        Self { curvature, domain: ParamBox::cube(n, half_width) }
    }
}

impl Chart for Paraboloid {
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    fn domain(&self) -> &ParamBox {
        &self.domain
    }
    fn kind(&self) -> ChartKind {
        ChartKind::Graph
    }
    fn orientation(&self) -> Orientation {
        Orientation::Upward
    }
    fn name(&self) -> String {
        format!("paraboloid(n={}, c={})", self.dim(), self.curvature)
    }
    fn eval_jet(&self, u: &[f64]) -> Result<ChartJet> {
        let n = self.dim();
        let c = self.curvature;
        let h = 0.5 * c * u.iter().map(|x| x * x).sum::<f64>();
        let dh: Vec<f64> = u.iter().map(|x| c * x).collect();
        let ddh = DMatrix::identity(n, n) * c;
        Ok(graph_jet(u, h, &dh, &ddh))
    }
}

/// A single trigonometric mode `amp * sin(<k, x> + phase)`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveMode {
    pub k: Vec<f64>,
    pub amp: f64,
    pub phase: f64,
}

/// Graph of a finite sum of plane waves; a generic curved test surface.
#[derive(Debug, Clone)]
pub struct WaveGraph {
    pub modes: Vec<WaveMode>,
    domain: ParamBox,
}

impl WaveGraph {
    pub fn random(n: usize, count: usize, amplitude: f64, half_width: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let modes = (0..count)
            .map(|_| WaveMode {
                k: (0..n).map(|_| rng.gen_range(-1.5..1.5)).collect(),
                amp: amplitude * rng.gen_range(0.5..1.0),
                phase: rng.gen_range(0.0..2.0 * PI),
            })
            .collect();
        Self { modes, domain: ParamBox::cube(n, half_width) }
    }
}

impl Chart for WaveGraph {
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    fn domain(&self) -> &ParamBox {
        &self.domain
    }
    fn kind(&self) -> ChartKind {
        ChartKind::Graph
    }
    fn orientation(&self) -> Orientation {
        Orientation::Upward
    }
    fn name(&self) -> String {
        format!("wave(n={}, modes={})", self.dim(), self.modes.len())
    }
    fn eval_jet(&self, u: &[f64]) -> Result<ChartJet> {
        let n = self.dim();
        let mut h = 0.0;
        let mut dh = vec![0.0; n];
        let mut ddh = DMatrix::zeros(n, n);
        for m in &self.modes {
            let arg: f64 = m.k.iter().zip(u).map(|(k, x)| k * x).sum::<f64>() + m.phase;
            let (s, c) = arg.sin_cos();
            h += m.amp * s;
            for i in 0..n {
                dh[i] += m.amp * c * m.k[i];
                for j in 0..n {
                    ddh[(i, j)] -= m.amp * s * m.k[i] * m.k[j];
                }
            }
        }
        Ok(graph_jet(u, h, &dh, &ddh))
    }
}

/// Cylinder over the curve `y = sin(x^4) / x^3`, whose curvature at the
/// troughs grows like `16 x^3`. Used as a growth-condition counterexample.
#[derive(Debug, Clone)]
pub struct OscillatingCylinder {
    domain: ParamBox,
}

impl OscillatingCylinder {
    pub fn new(n: usize, x_min: f64, x_max: f64, half_width: f64) -> Result<Self> {
        if n == 0 || !(x_min > 0.0 && x_max > x_min) {
            return Err(GeomError::InvalidInput("oscillating cylinder needs 0 < x_min < x_max".into()));
        }
        let mut lo = vec![-half_width; n];
        let mut hi = vec![half_width; n];
        lo[0] = x_min;
        hi[0] = x_max;
        Ok(Self { domain: ParamBox::new(lo, hi)? })
    }

    /// Parameters at troughs `sin(x^4) = -1` nearest to the targets.
    pub fn trough_params(&self, targets: &[f64]) -> Vec<Vec<f64>> {
        let n = self.dim();
        let (lo, hi) = (self.domain.lo[0], self.domain.hi[0]);
        targets
            .iter()
            .filter_map(|&x| {
                // x^4 = (m + 1/2) pi with m odd
                let q = x.powi(4) / PI - 0.5;
                let m = ((q - 1.0) / 2.0).round() * 2.0 + 1.0;
                let xm = ((m + 0.5) * PI).powf(0.25);
                (xm > lo && xm < hi).then(|| {
                    let mut u = vec![0.0; n];
                    u[0] = xm;
                    u
                })
            })
            .collect()
    }
}

impl Chart for OscillatingCylinder {
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    fn domain(&self) -> &ParamBox {
        &self.domain
    }
    fn kind(&self) -> ChartKind {
        ChartKind::Product
    }
    fn orientation(&self) -> Orientation {
        Orientation::Upward
    }
    fn name(&self) -> String {
        format!("oscillating-cylinder(n={})", self.dim())
    }
    fn eval_jet(&self, u: &[f64]) -> Result<ChartJet> {
        let n = self.dim();
        let x = u[0];
        let (s, c) = x.powi(4).sin_cos();
        let y = s / x.powi(3);
        let yp = 4.0 * c - 3.0 * s / x.powi(4);
        let ypp = -16.0 * x.powi(3) * s - 12.0 * c / x + 12.0 * s / x.powi(5);
        let mut dh = vec![0.0; n];
        dh[0] = yp;
        let mut ddh = DMatrix::zeros(n, n);
        ddh[(0, 0)] = ypp;
        Ok(graph_jet(u, y, &dh, &ddh))
    }
    fn base_param(&self) -> Vec<f64> {
        let mut u = vec![0.0; self.dim()];
        u[0] = self.domain.lo[0];
        u
    }
}

/// Wraps a chart and perturbs one entry of `dX`; an injected fault for the
/// finite-difference consistency check.
pub struct Corrupted {
    pub inner: Box<dyn Chart>,
    pub eps: f64,
}

impl Chart for Corrupted {
    fn dim(&self) -> usize {
        self.inner.dim()
    }
    fn domain(&self) -> &ParamBox {
        self.inner.domain()
    }
    fn kind(&self) -> ChartKind {
        ChartKind::Custom
    }
    fn orientation(&self) -> Orientation {
        self.inner.orientation()
    }
    fn name(&self) -> String {
        format!("corrupted({})", self.inner.name())
    }
    fn eval_jet(&self, u: &[f64]) -> Result<ChartJet> {
        let mut jet = self.inner.eval_jet(u)?;
        jet.dx[(0, 0)] += self.eps;
        Ok(jet)
    }
    fn contains(&self, u: &[f64]) -> bool {
        self.inner.contains(u)
    }
    fn base_param(&self) -> Vec<f64> {
        self.inner.base_param()
    }
}
