//! The comparison function `G` and the derived `φ(t) = ln(∫_0^t G^{-1/2} + 1)`.

use std::f64::consts::E;

use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};
use crate::quad;

/// Splice point of the iterated-log family.
pub fn splice_point() -> f64 {
    E.exp() * 1.01
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GFunction {
    Constant { value: f64 },
    /// `t^2 Π_{j=1}^{levels} (log^{(j)} t)^2` past the splice point, constant before it.
    IteratedLog { levels: usize },
    /// Piecewise linear through `(t_i, g_i)`, extended by the last slope.
    Table { t: Vec<f64>, g: Vec<f64> },
}

fn iterated_logs(t: f64, levels: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(levels);
    let mut x = t;
    for _ in 0..levels {
        x = x.ln();
        out.push(x);
    }
    out
}

impl GFunction {
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Constant { value } if !(*value > 0.0 && value.is_finite()) => {
                Err(GeomError::InvalidInput(format!("constant G must be positive, got {value}")))
            }
            Self::IteratedLog { levels } if *levels == 0 || *levels > 3 => {
                Err(GeomError::InvalidInput(format!("iterated-log G supports 1 to 3 levels, got {levels}")))
            }
            Self::Table { t, g } => {
                if t.len() < 2 || t.len() != g.len() || t[0] != 0.0 {
                    return Err(GeomError::InvalidInput("G table needs matching columns starting at t = 0".into()));
                }
                if t.windows(2).any(|w| !(w[1] > w[0])) {
                    return Err(GeomError::InvalidInput("G table abscissae must increase".into()));
                }
                if !(g[0] > 0.0) || g.windows(2).any(|w| w[1] < w[0]) {
                    return Err(GeomError::InvalidInput("G table must start positive and be nondecreasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    fn tail(levels: usize, t: f64) -> f64 {
        t * t * iterated_logs(t, levels).iter().map(|l| l * l).product::<f64>()
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Self::Constant { value } => *value,
            Self::IteratedLog { levels } => Self::tail(*levels, t.max(splice_point())),
            Self::Table { t: ts, g } => {
                let i = ts.partition_point(|x| *x <= t).clamp(1, ts.len() - 1) - 1;
                let slope = (g[i + 1] - g[i]) / (ts[i + 1] - ts[i]);
                g[i] + slope * (t - ts[i])
            }
        }
    }

    /// `G'(t)`; one-sided (right) at table knots and the splice point.
    pub fn derivative(&self, t: f64) -> f64 {
        match self {
            Self::Constant { .. } => 0.0,
            Self::IteratedLog { levels } => {
                if t < splice_point() {
                    return 0.0;
                }
                let logs = iterated_logs(t, *levels);
                // d/dt log^{(j)} t = 1 / (t Π_{i<j} log^{(i)} t)
                let mut sum = 2.0 / t;
                let mut prefix = t;
                for l in &logs {
                    sum += 2.0 / (prefix * l);
                    prefix *= l;
                }
                Self::tail(*levels, t) * sum
            }
            Self::Table { t: ts, g } => {
                let i = ts.partition_point(|x| *x <= t).clamp(1, ts.len() - 1) - 1;
                (g[i + 1] - g[i]) / (ts[i + 1] - ts[i])
            }
        }
    }

    fn breakpoints(&self) -> Vec<f64> {
        match self {
            Self::Constant { .. } => Vec::new(),
            Self::IteratedLog { .. } => vec![splice_point()],
            Self::Table { t, .. } => t[1..].to_vec(),
        }
    }

    /// Signed `∫_lower^t ds / sqrt(G(s))`, split at the kinks of `G`. Long pieces
    /// are integrated in `log s`.
    pub fn integral(&self, lower: f64, t: f64) -> Result<f64> {
        if !(lower >= 0.0 && t >= 0.0) {
            return Err(GeomError::Domain(format!("need nonnegative limits, got [{lower}, {t}]")));
        }
        if t < lower {
            return Ok(-self.integral(t, lower)?);
        }
        let mut cuts = vec![lower];
        cuts.extend(self.breakpoints().into_iter().filter(|b| *b > lower && *b < t));
        cuts.push(t);
        let mut total = 0.0;
        for w in cuts.windows(2) {
            let (a, b) = (w[0], w[1]);
            if b == a {
                continue;
            }
            let piece = if a > 0.0 && b / a > 10.0 {
                let f = |x: f64| {
                    let s = x.exp();
                    s / self.eval(s).sqrt()
                };
                quad::integrate(f, a.ln(), b.ln(), 1e-13, 1e-12)?.0
            } else {
                quad::integrate(|s| 1.0 / self.eval(s).sqrt(), a, b, 1e-13, 1e-12)?.0
            };
            total += piece;
        }
        Ok(total)
    }

    /// `sqrt(G(t)) (∫_lower^t ds / sqrt(G) + 1)`.
    pub fn p_value(&self, t: f64, lower: f64) -> Result<f64> {
        Ok(self.eval(t).sqrt() * (self.integral(lower, t)? + 1.0))
    }

    pub fn phi(&self, t: f64) -> Result<f64> {
        Ok((self.integral(0.0, t)? + 1.0).ln())
    }

    pub fn phi_prime(&self, t: f64) -> Result<f64> {
        Ok(1.0 / self.p_value(t, 0.0)?)
    }

    pub fn phi_second(&self, t: f64) -> Result<f64> {
        let g = self.eval(t);
        let i1 = self.integral(0.0, t)? + 1.0;
        let p = g.sqrt() * i1;
        Ok(-(self.derivative(t) / (2.0 * g.sqrt()) * i1 + 1.0) / (p * p))
    }

    /// Checks `G(0) > 0` and monotonicity on `samples` points of `[0, t_max]`.
    pub fn check_monotone(&self, t_max: f64, samples: usize) -> bool {
        let mut prev = self.eval(0.0);
        if !(prev > 0.0) {
            return false;
        }
        for i in 1..=samples {
            let g = self.eval(t_max * i as f64 / samples as f64);
            if g < prev {
                return false;
            }
            prev = g;
        }
        true
    }
}

/// `√G(γ) (∫_lower^γ ds/√G + 1)`.
pub fn p_gamma(g: &GFunction, gamma: f64, lower: f64) -> Result<f64> {
    g.p_value(gamma, lower)
}
