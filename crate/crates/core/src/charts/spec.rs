//! Declarative surface descriptions, as read from experiment configs.

use serde::{Deserialize, Serialize};

use super::library::{Corrupted, OscillatingCylinder, Paraboloid, Plane, Sphere, WaveGraph};
use super::Chart;
use crate::error::{GeomError, Result};
use crate::translators::{rot_chart, solve_rotational_translator, GrimReaper};

fn one() -> f64 {
    1.0
}
fn five() -> f64 {
    5.0
}
fn ten() -> f64 {
    10.0
}
fn three() -> usize {
    3
}
fn wave_amp() -> f64 {
    0.3
}
fn ode_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum SurfaceSpec {
    Sphere {
        n: usize,
        #[serde(default = "one")]
        radius: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    Plane {
        n: usize,
        #[serde(default = "five")]
        half_width: f64,
        #[serde(default)]
        height: f64,
    },
    Paraboloid {
        n: usize,
        #[serde(default = "one")]
        curvature: f64,
        #[serde(default = "one")]
        half_width: f64,
    },
    Wave {
        n: usize,
        #[serde(default = "three")]
        modes: usize,
        #[serde(default = "wave_amp")]
        amplitude: f64,
        #[serde(default = "one")]
        half_width: f64,
        #[serde(default)]
        seed: u64,
    },
    GrimReaper {
        n: usize,
        #[serde(default = "ten")]
        half_width: f64,
    },
    Bowl {
        n: usize,
        #[serde(default = "usize_one")]
        r: usize,
        #[serde(default = "ten")]
        r_max: f64,
        #[serde(default = "ode_tol")]
        tol: f64,
    },
    Oscillating {
        n: usize,
        x_min: f64,
        x_max: f64,
        #[serde(default = "one")]
        half_width: f64,
    },
    Corrupted {
        base: Box<SurfaceSpec>,
        eps: f64,
    },
}

fn usize_one() -> usize {
    1
}

impl SurfaceSpec {
    pub fn dim(&self) -> usize {
        match self {
            Self::Sphere { n, .. }
            | Self::Plane { n, .. }
            | Self::Paraboloid { n, .. }
            | Self::Wave { n, .. }
            | Self::GrimReaper { n, .. }
            | Self::Bowl { n, .. }
            | Self::Oscillating { n, .. } => *n,
            Self::Corrupted { base, .. } => base.dim(),
        }
    }

    /// `(V, r)` when the surface is a translator with velocity `V = E_{n+1}`.
    pub fn translator(&self) -> Option<(Vec<f64>, usize)> {
        let up = |n: usize| {
            let mut v = vec![0.0; n + 1];
            v[n] = 1.0;
            v
        };
        match self {
            Self::GrimReaper { n, .. } => Some((up(*n), 1)),
            Self::Bowl { n, r, .. } => Some((up(*n), *r)),
            Self::Corrupted { base, .. } => base.translator(),
            _ => None,
        }
    }
}

pub fn build_chart(spec: &SurfaceSpec) -> Result<Box<dyn Chart>> {
    let n = spec.dim();
    if n == 0 {
        return Err(GeomError::InvalidInput("surface dimension must be at least 1".into()));
    }
    let positive = |name: &str, v: f64| -> Result<()> {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(GeomError::InvalidInput(format!("{name} must be positive, got {v}")))
        }
    };
    Ok(match spec {
        SurfaceSpec::Sphere { radius, center, .. } => Box::new(Sphere::new(n, *radius, center.clone())?),
        SurfaceSpec::Plane { half_width, height, .. } => {
            positive("half_width", *half_width)?;
            Box::new(Plane::new(n, *half_width, *height))
        }
        SurfaceSpec::Paraboloid { curvature, half_width, .. } => {
            positive("half_width", *half_width)?;
            Box::new(Paraboloid::new(n, *curvature, *half_width))
        }
        SurfaceSpec::Wave { modes, amplitude, half_width, seed, .. } => {
            positive("half_width", *half_width)?;
            Box::new(WaveGraph::random(n, *modes, *amplitude, *half_width, *seed))
        }
        SurfaceSpec::GrimReaper { half_width, .. } => Box::new(GrimReaper::new(n, *half_width)?),
        SurfaceSpec::Bowl { r, r_max, tol, .. } => Box::new(rot_chart(solve_rotational_translator(n, *r, *r_max, *tol)?)),
        SurfaceSpec::Oscillating { x_min, x_max, half_width, .. } => {
            positive("half_width", *half_width)?;
            Box::new(OscillatingCylinder::new(n, *x_min, *x_max, *half_width)?)
        }
        SurfaceSpec::Corrupted { base, eps } => Box::new(Corrupted { inner: build_chart(base)?, eps: *eps }),
    })
}
