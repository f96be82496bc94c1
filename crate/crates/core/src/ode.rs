//! Adaptive initial-value integrators with dense output.
//!
//! The default method is the Dormand–Prince 5(4) pair with Hairer's
//! continuous extension. When the explicit pair detects stiffness
//! (`h * |lambda|` repeatedly beyond its stability boundary) the remainder
//! of the interval is integrated with the three-stage Radau IIA collocation
//! method, error-controlled by step doubling. Both methods produce
//! polynomial dense segments, so callers never see which one ran.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

pub trait OdeSystem {
    fn dim(&self) -> usize;

    fn rhs(&self, t: f64, y: &[f64], dy: &mut [f64]) -> Result<()>;

    /// Called after every accepted step; an error aborts the integration.
    fn check_state(&self, _t: f64, _y: &[f64]) -> Result<()> {
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Dopri5,
    Radau5,
}

#[derive(Debug, Clone)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    pub h_init: Option<f64>,
    pub h_max: f64,
    pub max_steps: usize,
    /// Start with this method; `Dopri5` may still hand over to `Radau5`.
    pub method: Method,
    pub stiff_switch: bool,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-8,
            atol: 1e-10,
            h_init: None,
            h_max: f64::INFINITY,
            max_steps: 2_000_000,
            method: Method::Dopri5,
            stiff_switch: true,
        }
    }
}

/// Degree <= 4 polynomial in `theta = (t - t0) / h`, one per component.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseSegment {
    pub t0: f64,
    pub h: f64,
    pub coeffs: Vec<[f64; 6]>,
    pub method: Method,
}

impl DenseSegment {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    fn theta(&self, t: f64) -> f64 {
        (t - self.t0) / self.h
    }

    pub fn eval(&self, t: f64, out: &mut [f64]) {
        let th = self.theta(t);
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o = c[0] + th * (c[1] + th * (c[2] + th * (c[3] + th * (c[4] + th * c[5]))));
        }
    }

    pub fn derivative(&self, t: f64, out: &mut [f64]) {
        let th = self.theta(t);
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            let d = c[1] + th * (2.0 * c[2] + th * (3.0 * c[3] + th * (4.0 * c[4] + th * 5.0 * c[5])));
            *o = d / self.h;
        }
    }

    /// `int_{t0}^{t} y(s) ds` per component.
    pub fn integral(&self, t: f64, out: &mut [f64]) {
        let th = self.theta(t);
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            let p = th
                * (c[0] + th * (c[1] / 2.0 + th * (c[2] / 3.0 + th * (c[3] / 4.0 + th * (c[4] / 5.0 + th * c[5] / 6.0)))));
            *o = p * self.h;
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
    /// Largest accepted scaled error estimate (1.0 == tolerance).
    pub max_error_ratio: f64,
    pub stiff_switch_at: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct OdeSolution {
    pub t: Vec<f64>,
    pub y: Vec<Vec<f64>>,
    pub segments: Vec<DenseSegment>,
    pub stats: OdeStats,
}

impl OdeSolution {
    pub fn span(&self) -> (f64, f64) {
        (self.t[0], *self.t.last().expect("nonempty"))
    }

    /// Index of the segment containing `t` (clamped to the ends).
    pub fn segment_index(&self, t: f64) -> usize {
        let idx = self.segments.partition_point(|s| s.t1() < t);
        idx.min(self.segments.len().saturating_sub(1))
    }

    pub fn eval(&self, t: f64) -> Vec<f64> {
        let mut out = vec![0.0; self.y[0].len()];
        if self.segments.is_empty() {
            out.copy_from_slice(&self.y[0]);
        } else {
            self.segments[self.segment_index(t)].eval(t, &mut out);
        }
        out
    }
}

// Dormand–Prince tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;
// continuous extension
const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

struct Integrator<'a, S: OdeSystem> {
    sys: &'a S,
    opts: &'a OdeOptions,
    m: usize,
    stats: OdeStats,
}

impl<'a, S: OdeSystem> Integrator<'a, S> {
    fn f(&mut self, t: f64, y: &[f64], out: &mut [f64]) -> Result<()> {
        self.stats.rhs_evals += 1;
        self.sys.rhs(t, y, out)?;
        if out.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::Numerical(format!("non-finite derivative at t = {t:e}")));
        }
        Ok(())
    }

    fn err_norm(&self, err: &[f64], y0: &[f64], y1: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..self.m {
            let sc = self.opts.atol + self.opts.rtol * y0[i].abs().max(y1[i].abs());
            acc += (err[i] / sc).powi(2);
        }
        (acc / self.m as f64).sqrt()
    }

    fn initial_step(&mut self, t0: f64, y0: &[f64], f0: &[f64], span: f64) -> Result<f64> {
        if let Some(h) = self.opts.h_init {
            return Ok(h.min(span));
        }
        let zeros = vec![0.0; self.m];
        let d0 = self.err_norm(y0, y0, &zeros);
        let d1 = self.err_norm(f0, y0, &zeros);
        let mut h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        h0 = h0.min(span);
        let y1: Vec<f64> = y0.iter().zip(f0).map(|(y, f)| y + h0 * f).collect();
        let mut f1 = vec![0.0; self.m];
        self.f(t0 + h0, &y1, &mut f1)?;
        let df: Vec<f64> = f1.iter().zip(f0).map(|(a, b)| a - b).collect();
        let d2 = self.err_norm(&df, y0, &zeros) / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        Ok((100.0 * h0).min(h1).min(span).min(self.opts.h_max))
    }

    fn run(mut self, t0: f64, t_end: f64, y0: &[f64]) -> Result<OdeSolution> {
        if !(t_end > t0) {
            return Err(GeomError::InvalidInput(format!("empty interval [{t0}, {t_end}]")));
        }
        let m = self.m;
        let mut t = t0;
        let mut y = y0.to_vec();
        let mut ts = vec![t];
        let mut ys = vec![y.clone()];
        let mut segments = Vec::new();
        let mut k1 = vec![0.0; m];
        self.f(t, &y, &mut k1)?;
        let mut h = self.initial_step(t, &y, &k1, t_end - t0)?;
        let mut method = self.opts.method;
        let (mut stiff_hits, mut calm_hits) = (0usize, 0usize);
        let mut reject_streak = 0usize;

        while t < t_end {
            if self.stats.accepted + self.stats.rejected >= self.opts.max_steps {
                return Err(GeomError::StiffFailure { last_good_radius: t });
            }
            let h_min = 1e-14 * t.abs().max(1.0);
            if h < h_min {
                return Err(GeomError::StiffFailure { last_good_radius: t });
            }
            let last = t + h >= t_end;
            if last {
                h = t_end - t;
            }
            match method {
                Method::Dopri5 => {
                    let step = self.dopri_step(t, &y, &k1, h)?;
                    let err = step.err;
                    if err <= 1.0 {
                        self.stats.accepted += 1;
                        self.stats.max_error_ratio = self.stats.max_error_ratio.max(err);
                        let t_new = if last { t_end } else { t + h };
                        self.sys.check_state(t_new, &step.y1)?;
                        segments.push(step.segment);
                        if self.opts.stiff_switch && step.h_lambda > 3.25 {
                            calm_hits = 0;
                            stiff_hits += 1;
                            if stiff_hits >= 15 {
                                method = Method::Radau5;
                                self.stats.stiff_switch_at = Some(t_new);
                            }
                        } else {
                            calm_hits += 1;
                            if calm_hits >= 6 {
                                stiff_hits = 0;
                            }
                        }
                        t = t_new;
                        y = step.y1;
                        k1 = step.k7;
                        ts.push(t);
                        ys.push(y.clone());
                        let fac = (0.9 * err.max(1e-10).powf(-0.2)).clamp(0.2, 10.0);
                        let fac = if reject_streak > 0 { fac.min(1.0) } else { fac };
                        reject_streak = 0;
                        h = (h * fac).min(self.opts.h_max);
                    } else {
                        self.stats.rejected += 1;
                        reject_streak += 1;
                        h *= (0.9 * err.powf(-0.2)).clamp(0.2, 1.0);
                    }
                }
                Method::Radau5 => match self.radau_doubled(t, &y, h)? {
                    Some((err, y1, segs)) if err <= 1.0 => {
                        self.stats.accepted += 1;
                        self.stats.max_error_ratio = self.stats.max_error_ratio.max(err);
                        let t_new = if last { t_end } else { t + h };
                        self.sys.check_state(t_new, &y1)?;
                        segments.extend(segs);
                        t = t_new;
                        y = y1;
                        ts.push(t);
                        ys.push(y.clone());
                        let fac = (0.9 * err.max(1e-10).powf(-1.0 / 6.0)).clamp(0.2, 6.0);
                        let fac = if reject_streak > 0 { fac.min(1.0) } else { fac };
                        reject_streak = 0;
                        h = (h * fac).min(self.opts.h_max);
                    }
                    Some((err, _, _)) => {
                        self.stats.rejected += 1;
                        reject_streak += 1;
                        h *= (0.9 * err.powf(-1.0 / 6.0)).clamp(0.2, 1.0);
                    }
                    None => {
                        self.stats.rejected += 1;
                        reject_streak += 1;
                        h *= 0.25;
                    }
                },
            }
        }
        if method == Method::Radau5 {
            // keep k1 meaningful for callers that never look at it
            let _ = k1;
        }
        Ok(OdeSolution { t: ts, y: ys, segments, stats: self.stats })
    }

    fn dopri_step(&mut self, t: f64, y: &[f64], k1: &[f64], h: f64) -> Result<DopriStep> {
        let m = self.m;
        let mut tmp = vec![0.0; m];
        let (mut k2, mut k3, mut k4, mut k5, mut k6, mut k7) =
            (vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m], vec![0.0; m]);
        for i in 0..m {
            tmp[i] = y[i] + h * A21 * k1[i];
        }
        self.f(t + C2 * h, &tmp, &mut k2)?;
        for i in 0..m {
            tmp[i] = y[i] + h * (A31 * k1[i] + A32 * k2[i]);
        }
        self.f(t + C3 * h, &tmp, &mut k3)?;
        for i in 0..m {
            tmp[i] = y[i] + h * (A41 * k1[i] + A42 * k2[i] + A43 * k3[i]);
        }
        self.f(t + C4 * h, &tmp, &mut k4)?;
        for i in 0..m {
            tmp[i] = y[i] + h * (A51 * k1[i] + A52 * k2[i] + A53 * k3[i] + A54 * k4[i]);
        }
        self.f(t + C5 * h, &tmp, &mut k5)?;
        let mut y_stage6 = vec![0.0; m];
        for i in 0..m {
            y_stage6[i] =
                y[i] + h * (A61 * k1[i] + A62 * k2[i] + A63 * k3[i] + A64 * k4[i] + A65 * k5[i]);
        }
        self.f(t + h, &y_stage6, &mut k6)?;
        let mut y1 = vec![0.0; m];
        for i in 0..m {
            y1[i] = y[i]
                + h * (A71 * k1[i] + A73 * k3[i] + A74 * k4[i] + A75 * k5[i] + A76 * k6[i]);
        }
        self.f(t + h, &y1, &mut k7)?;
        let err: Vec<f64> = (0..m)
            .map(|i| {
                h * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i])
            })
            .collect();
        let err = self.err_norm(&err, y, &y1);

        let (mut num, mut den) = (0.0, 0.0);
        for i in 0..m {
            num += (k7[i] - k6[i]).powi(2);
            den += (y1[i] - y_stage6[i]).powi(2);
        }
        let h_lambda = if den > 0.0 { h * (num / den).sqrt() } else { 0.0 };

        let coeffs = (0..m)
            .map(|i| {
                let r1 = y[i];
                let r2 = y1[i] - y[i];
                let r3 = h * k1[i] - r2;
                let r4 = r2 - h * k7[i] - r3;
                let r5 = h
                    * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
                [r1, r2 + r3, r4 + r5 - r3, -(r4 + 2.0 * r5), r5, 0.0]
            })
            .collect();
        Ok(DopriStep {
            y1,
            k7,
            err,
            h_lambda,
            segment: DenseSegment { t0: t, h, coeffs, method: Method::Dopri5 },
        })
    }

    fn jacobian(&mut self, t: f64, y: &[f64]) -> Result<DMatrix<f64>> {
        let m = self.m;
        let mut f0 = vec![0.0; m];
        self.f(t, y, &mut f0)?;
        let mut jac = DMatrix::zeros(m, m);
        let mut yp = y.to_vec();
        let mut fp = vec![0.0; m];
        for j in 0..m {
            let delta = f64::EPSILON.sqrt() * y[j].abs().max(1e-5);
            yp[j] = y[j] + delta;
            self.f(t, &yp, &mut fp)?;
            for i in 0..m {
                jac[(i, j)] = (fp[i] - f0[i]) / delta;
            }
            yp[j] = y[j];
        }
        Ok(jac)
    }

    /// One Radau IIA step; `None` if the simplified Newton iteration fails.
    fn radau_step(&mut self, t: f64, y: &[f64], h: f64) -> Result<Option<(Vec<f64>, DenseSegment)>> {
        let m = self.m;
        let s6 = 6f64.sqrt();
        let c = [(4.0 - s6) / 10.0, (4.0 + s6) / 10.0, 1.0];
        let a = Matrix3::new(
            (88.0 - 7.0 * s6) / 360.0,
            (296.0 - 169.0 * s6) / 1800.0,
            (-2.0 + 3.0 * s6) / 225.0,
            (296.0 + 169.0 * s6) / 1800.0,
            (88.0 + 7.0 * s6) / 360.0,
            (-2.0 - 3.0 * s6) / 225.0,
            (16.0 - s6) / 36.0,
            (16.0 + s6) / 36.0,
            1.0 / 9.0,
        );
        let jac = self.jacobian(t, y)?;
        let dim = 3 * m;
        let mut mat = DMatrix::<f64>::identity(dim, dim);
        for bi in 0..3 {
            for bj in 0..3 {
                for i in 0..m {
                    for j in 0..m {
                        mat[(bi * m + i, bj * m + j)] -= h * a[(bi, bj)] * jac[(i, j)];
                    }
                }
            }
        }
        let lu = mat.lu();
        let scale: Vec<f64> = y.iter().map(|v| self.opts.atol + self.opts.rtol * v.abs()).collect();
        let mut z = DVector::<f64>::zeros(dim);
        let mut fz = vec![vec![0.0; m]; 3];
        let mut stage = vec![0.0; m];
        let mut prev_norm = f64::INFINITY;
        let mut converged = false;
        for _ in 0..12 {
            for s in 0..3 {
                for i in 0..m {
                    stage[i] = y[i] + z[s * m + i];
                }
                if self.f(t + c[s] * h, &stage, &mut fz[s]).is_err() {
                    return Ok(None);
                }
            }
            let mut g = DVector::<f64>::zeros(dim);
            for s in 0..3 {
                for i in 0..m {
                    let af: f64 = (0..3).map(|q| a[(s, q)] * fz[q][i]).sum();
                    g[s * m + i] = -(z[s * m + i] - h * af);
                }
            }
            let Some(dz) = lu.solve(&g) else {
                return Ok(None);
            };
            z += &dz;
            let norm = (0..dim)
                .map(|k| (dz[k] / scale[k % m]).powi(2))
                .sum::<f64>()
                .sqrt()
                / (dim as f64).sqrt();
            if !norm.is_finite() || norm > 2.0 * prev_norm {
                return Ok(None);
            }
            prev_norm = norm;
            if norm < 1e-3 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Ok(None);
        }
        let y1: Vec<f64> = (0..m).map(|i| y[i] + z[2 * m + i]).collect();
        // collocation polynomial through (0, y), (c_s, y + Z_s)
        let vander = Matrix3::new(
            c[0], c[0] * c[0], c[0].powi(3),
            c[1], c[1] * c[1], c[1].powi(3),
            c[2], c[2] * c[2], c[2].powi(3),
        );
        let inv = vander.try_inverse().expect("Radau nodes are distinct");
        let coeffs = (0..m)
            .map(|i| {
                let p = inv * Vector3::new(z[i], z[m + i], z[2 * m + i]);
                [y[i], p[0], p[1], p[2], 0.0, 0.0]
            })
            .collect();
        Ok(Some((y1, DenseSegment { t0: t, h, coeffs, method: Method::Radau5 })))
    }

    /// Full step against two half steps; the dense output is the pair of
    /// half-step collocation cubics. The returned error ratio also covers
    /// the interpolation error between the nodes.
    #[allow(clippy::type_complexity)]
    fn radau_doubled(&mut self, t: f64, y: &[f64], h: f64) -> Result<Option<(f64, Vec<f64>, Vec<DenseSegment>)>> {
        let Some((y_full, seg_full)) = self.radau_step(t, y, h)? else {
            return Ok(None);
        };
        let Some((y_mid, seg1)) = self.radau_step(t, y, 0.5 * h)? else {
            return Ok(None);
        };
        let Some((y_end, seg2)) = self.radau_step(t + 0.5 * h, &y_mid, 0.5 * h)? else {
            return Ok(None);
        };
        let diff: Vec<f64> = y_end.iter().zip(&y_full).map(|(a, b)| (a - b) / 31.0).collect();
        let err = self.err_norm(&diff, y, &y_end);
        // the full-step cubic at the midpoint against the two-step value;
        // the half-step cubics are about 16 times more accurate
        let mut p_mid = vec![0.0; self.m];
        seg_full.eval(t + 0.5 * h, &mut p_mid);
        let dense: Vec<f64> = p_mid.iter().zip(&y_mid).map(|(a, b)| (a - b) / 16.0).collect();
        let err_dense = self.err_norm(&dense, y, &y_mid);
        // dense error scales like h^4, the end-point error like h^6
        Ok(Some((err.max(err_dense.powf(1.5)), y_end, vec![seg1, seg2])))
    }
}

struct DopriStep {
    y1: Vec<f64>,
    k7: Vec<f64>,
    err: f64,
    h_lambda: f64,
    segment: DenseSegment,
}

/// Integrates `sys` from `(t0, y0)` to `t_end`.
pub fn solve<S: OdeSystem>(sys: &S, t0: f64, t_end: f64, y0: &[f64], opts: &OdeOptions) -> Result<OdeSolution> {
    if y0.len() != sys.dim() {
        return Err(GeomError::InvalidInput(format!(
            "initial state has {} components, system has {}",
            y0.len(),
            sys.dim()
        )));
    }
    Integrator { sys, opts, m: sys.dim(), stats: OdeStats::default() }.run(t0, t_end, y0)
}
