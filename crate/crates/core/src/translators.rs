//! Explicit translating solitons: the Grim Reaper cylinder and the
//! rotationally symmetric bowl family built from the radial ODE.
//!
//! For a rotational graph `x_{n+1} = u(|x|)` with upward normal write
//! `s = sqrt(1 + u'^2)`, `w = u' / (R s)` and `κ = u'' / s^3`. The principal
//! curvatures are `κ` (meridian) and `w` (n - 1 times), so
//!
//! ```text
//! σ_r = C(n-1, r) w^r + C(n-1, r-1) w^{r-1} κ,
//! ```
//!
//! and the translator equation `σ_r = <N, E_{n+1}> = 1/s` gives
//!
//! ```text
//! u'' = s^3 (1/s - C(n-1, r) w^r) / (C(n-1, r-1) w^{r-1}).
//! ```
//!
//! For `r = 1` this is `u''/(1 + u'^2) + (n-1) u'/R = 1`.

use std::cell::Cell;
use std::fmt::Write as _;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::charts::{graph_jet, Chart, ChartJet, ChartKind, Orientation, ParamBox};
use crate::error::{GeomError, Result};
use crate::ode::{solve, DenseSegment, OdeOptions, OdeSystem};
use crate::quad;
use crate::symfun::MAX_DIM;

/// Distance kept from the vertical asymptotes of the Grim Reaper.
pub const GRIM_REAPER_MARGIN: f64 = 1e-3;

/// Radius where the series seed hands over to the integrator.
pub const SERIES_RADIUS: f64 = 1e-3;

/// `|u'|` beyond which the profile is no longer treated as a graph.
pub const GRAPHICAL_LIMIT: f64 = 1e15;

pub fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Cylinder over `y = -log cos x`: `(x, t_2, .., t_n) -> (x, t, -log cos x)`.
#[derive(Debug, Clone)]
pub struct GrimReaper {
    domain: ParamBox,
}

impl GrimReaper {
    pub fn new(n: usize, half_width: f64) -> Result<Self> {
        if n == 0 || n > MAX_DIM || !(half_width > 0.0) {
            return Err(GeomError::InvalidInput(format!("Grim Reaper needs 1 <= n <= {MAX_DIM} and a positive width")));
        }
        let edge = std::f64::consts::FRAC_PI_2 - GRIM_REAPER_MARGIN;
        let mut lo = vec![-half_width; n];
        let mut hi = vec![half_width; n];
        lo[0] = -edge;
        hi[0] = edge;
        Ok(Self { domain: ParamBox::new(lo, hi)? })
    }
}

/// The Grim Reaper cylinder with `|t_i| <= 10`.
pub fn grim_reaper_chart(n: usize) -> Result<GrimReaper> {
    GrimReaper::new(n, 10.0)
}

impl Chart for GrimReaper {
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
        format!("grim-reaper(n={})", self.dim())
    }
    fn eval_jet(&self, u: &[f64]) -> Result<ChartJet> {
        let n = self.dim();
        let x = u[0];
        let c = x.cos();
        let mut dh = vec![0.0; n];
        dh[0] = x.tan();
        let mut ddh = DMatrix::zeros(n, n);
        ddh[(0, 0)] = 1.0 / (c * c);
        Ok(graph_jet(u, -c.ln(), &dh, &ddh))
    }
    fn base_param(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
    /// The cylinder is intrinsically flat: arclength `asinh(tan x)` along the
    /// curve combined with the straight directions.
    fn intrinsic_distance(&self, u: &[f64]) -> Result<f64> {
        let s = u[0].tan().asinh();
        Ok((s * s + u[1..].iter().map(|t| t * t).sum::<f64>()).sqrt())
    }
}

fn check_order(n: usize, r: usize) -> Result<()> {
    if n == 0 || n > MAX_DIM || r == 0 || r > n {
        return Err(GeomError::InvalidInput(format!("need 1 <= r <= n <= {MAX_DIM}, got n = {n}, r = {r}")));
    }
    Ok(())
}

/// `u''` from the rotational translator equation at radius `R` and slope `u'`.
pub fn rot_ode_rhs(n: usize, r: usize, radius: f64, slope: f64) -> Result<f64> {
    check_order(n, r)?;
    if !(radius > 0.0) {
        return Err(GeomError::Domain(format!("radial ODE needs R > 0, got {radius}")));
    }
    let s = (1.0 + slope * slope).sqrt();
    let w = slope / (radius * s);
    let coeff = binomial(n - 1, r - 1) * w.powi(r as i32 - 1);
    let residual = 1.0 / s - binomial(n - 1, r) * w.powi(r as i32);
    if coeff == 0.0 {
        return Err(GeomError::DegenerateOde { radius, slope });
    }
    Ok(residual / coeff * s.powi(3))
}

/// `σ_r - 1/sqrt(1 + u'^2)` of the rotational graph with the given
/// slope and second derivative at radius `R > 0`.
pub fn translator_residual(n: usize, r: usize, radius: f64, slope: f64, second: f64) -> f64 {
    let s = (1.0 + slope * slope).sqrt();
    let w = slope / (radius * s);
    let kappa = second / s.powi(3);
    binomial(n - 1, r) * w.powi(r as i32) + binomial(n - 1, r - 1) * w.powi(r as i32 - 1) * kappa - 1.0 / s
}

/// Vertex curvature `k0 = C(n, r)^{-1/r}` (umbilic with `σ_r = 1`).
pub fn vertex_curvature(n: usize, r: usize) -> f64 {
    binomial(n, r).powf(-1.0 / r as f64)
}

/// Cubic coefficient `b` of the seed `u' = k0 R + b R^3`.
pub fn series_cubic(n: usize, r: usize) -> f64 {
    let k0 = vertex_curvature(n, r);
    let m = r as f64 * binomial(n - 1, r) + (r + 2) as f64 * binomial(n - 1, r - 1);
    let alpha = -k0.powi(3 - r as i32) / (2.0 * m);
    alpha + 0.5 * k0.powi(3)
}

struct RadialSystem {
    n: usize,
    r: usize,
    last: Cell<(f64, f64)>,
}

impl OdeSystem for RadialSystem {
    fn dim(&self) -> usize {
        1
    }
    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()> {
        dy[0] = rot_ode_rhs(self.n, self.r, t, y[0])?;
        Ok(())
    }
    fn check_state(&self, t: f64, y: &[f64]) -> Result<()> {
        if !y[0].is_finite() || y[0].abs() > GRAPHICAL_LIMIT {
            return Err(GeomError::GraphicalBreakdown { radius: t });
        }
        self.last.set((t, y[0]));
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileMeta {
    pub n: usize,
    pub r: usize,
    pub tol: f64,
    pub r_max: f64,
    pub r_series: f64,
    pub steps: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    pub max_error_ratio: f64,
    pub stiff_switch_at: Option<f64>,
}

#[derive(Debug, Clone)]
enum Interp {
    Dense { segments: Vec<DenseSegment>, u_start: Vec<f64> },
    Hermite,
}

/// Radial profile of a rotational r-translator.
#[derive(Debug, Clone)]
pub struct RotProfile {
    pub meta: ProfileMeta,
    pub grid: Vec<f64>,
    pub u: Vec<f64>,
    pub up: Vec<f64>,
    k0: f64,
    b: f64,
    interp: Interp,
}

/// Integrates the radial ODE from the series seed at `R_s = 1e-3` to `r_max`.
pub fn solve_rotational_translator(n: usize, r: usize, r_max: f64, tol: f64) -> Result<RotProfile> {
    check_order(n, r)?;
    if !(r_max > SERIES_RADIUS && r_max <= 1e4) {
        return Err(GeomError::InvalidInput(format!("R_max = {r_max} outside ({SERIES_RADIUS}, 1e4]")));
    }
    if !(1e-12..=1e-6).contains(&tol) {
        return Err(GeomError::InvalidInput(format!("tol = {tol:e} outside [1e-12, 1e-6]")));
    }
    let k0 = vertex_curvature(n, r);
    let b = series_cubic(n, r);
    let rs = SERIES_RADIUS;
    let v0 = k0 * rs + b * rs.powi(3);
    let u0 = 0.5 * k0 * rs * rs + 0.25 * b * rs.powi(4);
    let sys = RadialSystem { n, r, last: Cell::new((rs, v0)) };
    let opts = OdeOptions { rtol: tol, atol: tol, h_init: Some(1e-2 * rs), ..Default::default() };
    let sol = match solve(&sys, rs, r_max, &[v0], &opts) {
        Ok(sol) => sol,
        Err(GeomError::StiffFailure { .. } | GeomError::Numerical(_) | GeomError::DegenerateOde { .. })
            if sys.last.get().1.abs() > 1e6 =>
        {
            return Err(GeomError::GraphicalBreakdown { radius: sys.last.get().0 });
        }
        Err(e) => return Err(e),
    };
    let mut grid = vec![0.0, rs];
    let mut u = vec![0.0, u0];
    let mut up = vec![0.0, v0];
    let mut u_start = Vec::with_capacity(sol.segments.len());
    let mut acc = u0;
    let mut buf = [0.0];
    for seg in &sol.segments {
        u_start.push(acc);
        seg.integral(seg.t1(), &mut buf);
        acc += buf[0];
        grid.push(seg.t1());
        u.push(acc);
        // one entry per segment; stiff steps contribute two segments
        seg.eval(seg.t1(), &mut buf);
        up.push(buf[0]);
    }
    *grid.last_mut().expect("nonempty") = r_max;
    let meta = ProfileMeta {
        n,
        r,
        tol,
        r_max,
        r_series: rs,
        steps: sol.stats.accepted,
        rejected: sol.stats.rejected,
        rhs_evals: sol.stats.rhs_evals,
        max_error_ratio: sol.stats.max_error_ratio,
        stiff_switch_at: sol.stats.stiff_switch_at,
    };
    Ok(RotProfile { meta, grid, u, up, k0, b, interp: Interp::Dense { segments: sol.segments, u_start } })
}

impl RotProfile {
    pub fn n(&self) -> usize {
        self.meta.n
    }

    pub fn r(&self) -> usize {
        self.meta.r
    }

    pub fn r_max(&self) -> f64 {
        self.meta.r_max
    }

    pub fn vertex_curvature(&self) -> f64 {
        self.k0
    }

    fn check_radius(&self, radius: f64) -> Result<()> {
        if !(radius >= 0.0 && radius <= self.meta.r_max * (1.0 + 1e-12)) {
            return Err(GeomError::Domain(format!("R = {radius} outside [0, {}]", self.meta.r_max)));
        }
        Ok(())
    }

    fn in_series(&self, radius: f64) -> bool {
        radius < self.meta.r_series
    }

    // index i with grid[i] <= R <= grid[i + 1], i >= 1
    fn interval(&self, radius: f64) -> usize {
        let i = self.grid.partition_point(|g| *g <= radius);
        i.saturating_sub(1).clamp(1, self.grid.len() - 2)
    }

    /// `u'(R)`.
    pub fn slope(&self, radius: f64) -> Result<f64> {
        self.check_radius(radius)?;
        if self.in_series(radius) {
            return Ok(self.k0 * radius + self.b * radius.powi(3));
        }
        Ok(match &self.interp {
            Interp::Dense { segments, .. } => {
                let i = segment_at(segments, radius);
                let mut out = [0.0];
                segments[i].eval(radius, &mut out);
                out[0]
            }
            Interp::Hermite => {
                let i = self.interval(radius);
                let (r0, r1) = (self.grid[i], self.grid[i + 1]);
                let d0 = rot_ode_rhs(self.n(), self.r(), r0, self.up[i])?;
                let d1 = rot_ode_rhs(self.n(), self.r(), r1, self.up[i + 1])?;
                hermite(r0, r1, self.up[i], self.up[i + 1], d0, d1, radius).0
            }
        })
    }

    /// `u(R)`.
    pub fn height(&self, radius: f64) -> Result<f64> {
        self.check_radius(radius)?;
        if self.in_series(radius) {
            return Ok(0.5 * self.k0 * radius * radius + 0.25 * self.b * radius.powi(4));
        }
        Ok(match &self.interp {
            Interp::Dense { segments, u_start } => {
                let i = segment_at(segments, radius);
                let mut out = [0.0];
                segments[i].integral(radius, &mut out);
                u_start[i] + out[0]
            }
            Interp::Hermite => {
                let i = self.interval(radius);
                let (r0, r1) = (self.grid[i], self.grid[i + 1]);
                hermite(r0, r1, self.u[i], self.u[i + 1], self.up[i], self.up[i + 1], radius).0
            }
        })
    }

    /// `u''(R)`: the series inside `R_s`, else the ODE right-hand side at the
    /// interpolated slope. The derivative of the dense slope would only be
    /// piecewise smooth across steps, which breaks finite-difference checks
    /// of the chart; its mismatch with the ODE is what `ode_residual_on` reports.
    pub fn second(&self, radius: f64) -> Result<f64> {
        self.check_radius(radius)?;
        if self.in_series(radius) {
            return Ok(self.k0 + 3.0 * self.b * radius * radius);
        }
        rot_ode_rhs(self.n(), self.r(), radius, self.slope(radius)?)
    }

    /// `u'(R)/R`, finite at the vertex.
    pub fn slope_over_radius(&self, radius: f64) -> Result<f64> {
        if self.in_series(radius) {
            self.check_radius(radius)?;
            return Ok(self.k0 + self.b * radius * radius);
        }
        Ok(self.slope(radius)? / radius)
    }

    /// Angle function `<N, E_{n+1}> = 1/sqrt(1 + u'^2)`.
    pub fn theta(&self, radius: f64) -> Result<f64> {
        let v = self.slope(radius)?;
        Ok(1.0 / (1.0 + v * v).sqrt())
    }

    /// Sup over `radii` of the translator residual evaluated with the dense
    /// slope and its derivative. Imported profiles take `u''` from the ODE,
    /// so their residual vanishes by construction.
    pub fn ode_residual_on(&self, radii: &[f64]) -> Result<f64> {
        let Interp::Dense { segments, .. } = &self.interp else {
            return Ok(0.0);
        };
        let mut worst: f64 = 0.0;
        for &radius in radii {
            self.check_radius(radius)?;
            if self.in_series(radius) || radius == 0.0 {
                continue;
            }
            let i = segment_at(segments, radius);
            let (mut v, mut dv) = ([0.0], [0.0]);
            segments[i].eval(radius, &mut v);
            segments[i].derivative(radius, &mut dv);
            worst = worst.max(translator_residual(self.n(), self.r(), radius, v[0], dv[0]).abs());
        }
        Ok(worst)
    }

    /// The residual at the stored grid points.
    pub fn grid_residual(&self) -> Result<f64> {
        let Interp::Dense { segments, .. } = &self.interp else {
            return Ok(0.0);
        };
        let mut worst: f64 = 0.0;
        for seg in segments {
            let t = seg.t1();
            let (mut v, mut dv) = ([0.0], [0.0]);
            seg.eval(t, &mut v);
            seg.derivative(t, &mut dv);
            worst = worst.max(translator_residual(self.n(), self.r(), t, v[0], dv[0]).abs());
        }
        Ok(worst)
    }

    /// Meridian arclength `∫_0^R sqrt(1 + u'^2)`.
    pub fn arclength(&self, radius: f64) -> Result<f64> {
        self.check_radius(radius)?;
        if radius == 0.0 {
            return Ok(0.0);
        }
        let f = |s: f64| self.slope(s).map(|v| (1.0 + v * v).sqrt()).unwrap_or(f64::NAN);
        let (len, _) = quad::integrate(f, 0.0, radius, 1e-12, 1e-11)?;
        Ok(len)
    }

    /// CSV with a `# {json}` metadata line and columns `R,u,up,theta`.
    pub fn to_csv(&self) -> String {
        let meta = serde_json::to_string(&self.meta).expect("metadata serializes");
        let mut out = String::with_capacity(64 * self.grid.len());
        let _ = writeln!(out, "# {meta}");
        out.push_str("R,u,up,theta\n");
        for i in 0..self.grid.len() {
            let v = self.up[i];
            let theta = 1.0 / (1.0 + v * v).sqrt();
            let _ = writeln!(out, "{:e},{:e},{:e},{:e}", self.grid[i], self.u[i], v, theta);
        }
        out
    }

    /// Inverse of [`RotProfile::to_csv`]; interpolates by cubic Hermite.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let meta_line = lines.next().ok_or_else(|| GeomError::Parse("empty profile".into()))?;
        let json = meta_line
            .strip_prefix("# ")
            .ok_or_else(|| GeomError::Parse("missing metadata header".into()))?;
        let meta: ProfileMeta = serde_json::from_str(json).map_err(|e| GeomError::Parse(format!("metadata: {e}")))?;
        check_order(meta.n, meta.r)?;
        if lines.next() != Some("R,u,up,theta") {
            return Err(GeomError::Parse("expected the column header R,u,up,theta".into()));
        }
        let (mut grid, mut u, mut up) = (Vec::new(), Vec::new(), Vec::new());
        for (k, line) in lines.enumerate() {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 4 {
                return Err(GeomError::Parse(format!("row {}: expected 4 columns", k + 1)));
            }
            let parse = |s: &str| s.parse::<f64>().map_err(|e| GeomError::Parse(format!("row {}: {e}", k + 1)));
            grid.push(parse(cols[0])?);
            u.push(parse(cols[1])?);
            up.push(parse(cols[2])?);
        }
        if grid.len() < 3 || grid.windows(2).any(|w| !(w[1] > w[0])) || grid[0] != 0.0 {
            return Err(GeomError::Parse("profile radii must start at 0 and increase".into()));
        }
        let k0 = vertex_curvature(meta.n, meta.r);
        let b = series_cubic(meta.n, meta.r);
        Ok(Self { meta, grid, u, up, k0, b, interp: Interp::Hermite })
    }

    /// Least-squares fit `u ≈ c2 R^2 + c1 log R + c0` on `[lo, hi]`; returns `(c2, c1, c0)`.
    pub fn fit_asymptotics(&self, lo: f64, hi: f64, samples: usize) -> Result<(f64, f64, f64)> {
        if !(lo > 0.0 && hi > lo) || samples < 3 {
            return Err(GeomError::InvalidInput("fit needs 0 < lo < hi and at least 3 samples".into()));
        }
        let mut design = DMatrix::zeros(samples, 3);
        let mut rhs = DVector::zeros(samples);
        for i in 0..samples {
            let radius = lo + (hi - lo) * i as f64 / (samples - 1) as f64;
            // scale columns to keep the normal matrix well conditioned
            design[(i, 0)] = (radius / hi).powi(2);
            design[(i, 1)] = radius.ln();
            design[(i, 2)] = 1.0;
            rhs[i] = self.height(radius)?;
        }
        let svd = design.svd(true, true);
        let c = svd
            .solve(&rhs, 1e-14)
            .map_err(|e| GeomError::Numerical(format!("asymptotic fit failed: {e}")))?;
        Ok((c[0] / (hi * hi), c[1], c[2]))
    }
}

fn segment_at(segments: &[DenseSegment], t: f64) -> usize {
    let i = segments.partition_point(|s| s.t1() < t);
    i.min(segments.len() - 1)
}

// cubic Hermite value and derivative on [x0, x1]
fn hermite(x0: f64, x1: f64, y0: f64, y1: f64, d0: f64, d1: f64, x: f64) -> (f64, f64) {
    let h = x1 - x0;
    let t = (x - x0) / h;
    let (t2, t3) = (t * t, t * t * t);
    let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
    let h10 = t3 - 2.0 * t2 + t;
    let h01 = -2.0 * t3 + 3.0 * t2;
    let h11 = t3 - t2;
    let value = h00 * y0 + h10 * h * d0 + h01 * y1 + h11 * h * d1;
    let dh00 = (6.0 * t2 - 6.0 * t) / h;
    let dh10 = 3.0 * t2 - 4.0 * t + 1.0;
    let dh01 = (-6.0 * t2 + 6.0 * t) / h;
    let dh11 = 3.0 * t2 - 2.0 * t;
    (value, dh00 * y0 + dh10 * d0 + dh01 * y1 + dh11 * d1)
}

/// Rotational graph `x -> (x, u(|x|))` over the ball `|x| <= R_max`.
#[derive(Debug, Clone)]
pub struct RotChart {
    profile: Arc<RotProfile>,
    domain: ParamBox,
}

pub fn rot_chart(profile: RotProfile) -> RotChart {
    let domain = ParamBox::cube(profile.n(), profile.r_max());
    RotChart { profile: Arc::new(profile), domain }
}

impl RotChart {
    pub fn profile(&self) -> &RotProfile {
        &self.profile
    }
}

impl Chart for RotChart {
    fn dim(&self) -> usize {
        self.domain.dim()
    }
    fn domain(&self) -> &ParamBox {
        &self.domain
    }
    fn kind(&self) -> ChartKind {
        ChartKind::Rotational
    }
    fn orientation(&self) -> Orientation {
        Orientation::Upward
    }
    fn name(&self) -> String {
        format!("rot-translator(n={}, r={})", self.profile.n(), self.profile.r())
    }
    fn contains(&self, u: &[f64]) -> bool {
        u.len() == self.dim() && u.iter().map(|x| x * x).sum::<f64>().sqrt() <= self.profile.r_max() * (1.0 + 1e-12)
    }
    fn eval_jet(&self, u: &[f64]) -> Result<ChartJet> {
        let n = self.dim();
        let rho = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        let p = &self.profile;
        let h = p.height(rho)?;
        let q = p.slope_over_radius(rho)?;
        let upp = p.second(rho)?;
        let dh: Vec<f64> = u.iter().map(|x| q * x).collect();
        let mut ddh = DMatrix::identity(n, n) * q;
        if rho > 0.0 {
            for i in 0..n {
                for j in 0..n {
                    ddh[(i, j)] += (upp - q) * u[i] * u[j] / (rho * rho);
                }
            }
        }
        Ok(graph_jet(u, h, &dh, &ddh))
    }
    fn base_param(&self) -> Vec<f64> {
        vec![0.0; self.dim()]
    }
    /// Meridians through the vertex are geodesics.
    fn intrinsic_distance(&self, u: &[f64]) -> Result<f64> {
        let rho = u.iter().map(|x| x * x).sum::<f64>().sqrt();
        self.profile.arclength(rho)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), 6.0);
        assert_eq!(binomial(3, 0), 1.0);
        assert_eq!(binomial(2, 3), 0.0);
        assert_eq!(binomial(0, 0), 1.0);
    }

    #[test]
    fn rhs_examples() {
        assert!((rot_ode_rhs(2, 1, 1.0, 0.0).unwrap() - 1.0).abs() < 1e-15);
        // curve case reproduces u'' = 1 + u'^2
        let v: f64 = 0.7;
        assert!((rot_ode_rhs(1, 1, 0.3, v).unwrap() - (1.0 + v * v)).abs() < 1e-14);
        assert!(matches!(rot_ode_rhs(3, 2, 1.0, 0.0), Err(GeomError::DegenerateOde { .. })));
        assert!(rot_ode_rhs(3, 2, 0.0, 1.0).is_err());
    }

    #[test]
    fn bowl_form_for_r_one() {
        for n in 1..6 {
            for &(radius, v) in &[(0.5, 0.2), (3.0, 1.4), (40.0, 13.0)] {
                let upp = rot_ode_rhs(n, 1, radius, v).unwrap();
                let lhs = upp / (1.0 + v * v) + (n as f64 - 1.0) * v / radius;
                assert!((lhs - 1.0).abs() < 1e-12, "n={n} R={radius}");
            }
        }
    }

    #[test]
    fn vertex_values() {
        assert!((vertex_curvature(2, 1) - 0.5).abs() < 1e-15);
        assert!((vertex_curvature(3, 2) - 3f64.powf(-0.5)).abs() < 1e-15);
        assert!((series_cubic(1, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((series_cubic(2, 1) - 1.0 / 32.0).abs() < 1e-15);
    }

    #[test]
    fn seed_satisfies_ode_to_high_order() {
        for (n, r) in [(2, 1), (3, 1), (3, 2), (4, 2), (4, 3), (5, 5)] {
            let (k0, b) = (vertex_curvature(n, r), series_cubic(n, r));
            let radius = 1e-2;
            let v = k0 * radius + b * radius.powi(3);
            let seed_dv = k0 + 3.0 * b * radius * radius;
            let ode_dv = rot_ode_rhs(n, r, radius, v).unwrap();
            assert!((seed_dv - ode_dv).abs() < 1e-6, "({n},{r}) {seed_dv} vs {ode_dv}");
        }
    }

    #[test]
    fn grim_reaper_tip() {
        let g = grim_reaper_chart(2).unwrap();
        let jet = g.jet(&[0.0, 1.0]).unwrap();
        assert_eq!(jet.x[2], 0.0);
        assert!(g.jet(&[1.6, 0.0]).is_err());
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let f = |x: f64| x * x * x - 2.0 * x + 1.0;
        let df = |x: f64| 3.0 * x * x - 2.0;
        let (v, d) = hermite(1.0, 2.5, f(1.0), f(2.5), df(1.0), df(2.5), 1.7);
        assert!((v - f(1.7)).abs() < 1e-13 && (d - df(1.7)).abs() < 1e-12);
    }
}
