use serde::{Deserialize, Serialize};

use soliton_core::charts::{Chart, Field, SurfaceSpec};
use soliton_core::maxprinciple::{GFunction, Theorem};
use soliton_core::mesh::{logspace, Mesh};
use soliton_core::regions::Region;

use crate::CliError;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub surface: Option<SurfaceSpec>,
    /// Defaults to the surface's own order for translators, else 1.
    #[serde(default)]
    pub r: Option<usize>,
    /// Translation velocity, `E_{n+1}` by default.
    #[serde(default)]
    pub velocity: Option<Vec<f64>>,
    #[serde(default)]
    pub theorem: Option<Theorem>,
    #[serde(default)]
    pub region: Option<Region>,
    #[serde(default)]
    pub regions: Vec<Region>,
    #[serde(default)]
    pub mesh: Option<MeshSpec>,
    #[serde(default)]
    pub g: Option<GFunction>,
    #[serde(default = "default_k_max")]
    pub k_max: usize,
    /// `R` of the cylinder used by the bi-halfspace drive.
    #[serde(default = "default_cylinder_radius")]
    pub cylinder_radius: f64,
    #[serde(default)]
    pub eps: Option<f64>,
    #[serde(default = "default_trials")]
    pub identity_trials: usize,
    #[serde(default)]
    pub oy: Option<OyConfig>,
    #[serde(default)]
    pub profile: Option<ProfileConfig>,
    /// Output directory; `--out` takes precedence.
    #[serde(default)]
    pub out: Option<String>,
}

fn default_k_max() -> usize {
    20
}

fn default_cylinder_radius() -> f64 {
    1.0
}

fn default_trials() -> usize {
    200
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum MeshSpec {
    Grid {
        #[serde(default)]
        resolution: Option<usize>,
        #[serde(default)]
        margin: f64,
    },
    Random {
        #[serde(default = "default_count")]
        count: usize,
        #[serde(default)]
        margin: f64,
        #[serde(default)]
        seed: u64,
    },
    /// Log-spaced radii along fixed directions, for charts centred at a vertex.
    Radial {
        #[serde(default = "default_lo")]
        lo: f64,
        #[serde(default)]
        hi: Option<f64>,
        #[serde(default = "default_count_radial")]
        count: usize,
        #[serde(default = "default_directions")]
        directions: usize,
    },
}

fn default_count() -> usize {
    400
}

fn default_lo() -> f64 {
    1e-2
}

fn default_count_radial() -> usize {
    100
}

fn default_directions() -> usize {
    8
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum FieldSpec {
    /// `<X, V>` with the configured velocity.
    Height,
    Constant { value: f64 },
    Linear { w: Vec<f64> },
    Affine { w: Vec<f64>, c: f64 },
    Distance { origin: Vec<f64> },
    DistanceSquared { origin: Vec<f64> },
    ConePsi { v: Vec<f64>, a: f64 },
}

impl FieldSpec {
    pub fn to_field(&self, velocity: &[f64]) -> Field {
        match self {
            Self::Height => Field::Linear(velocity.to_vec()),
            Self::Constant { value } => Field::Constant(*value),
            Self::Linear { w } => Field::Linear(w.clone()),
            Self::Affine { w, c } => Field::Affine { w: w.clone(), c: *c },
            Self::Distance { origin } => Field::Distance(origin.clone()),
            Self::DistanceSquared { origin } => Field::DistanceSquared(origin.clone()),
            Self::ConePsi { v, a } => Field::ConePsi { v: v.clone(), a: *a },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OyConfig {
    #[serde(default = "height")]
    pub u: FieldSpec,
    /// `|X - X(p_0)|^2` from the chart's base point by default.
    #[serde(default)]
    pub gamma: Option<FieldSpec>,
    #[serde(default)]
    pub z: Option<Vec<f64>>,
}

fn height() -> FieldSpec {
    FieldSpec::Height
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProfileConfig {
    pub n: usize,
    #[serde(default = "one")]
    pub r: usize,
    #[serde(default = "default_r_max")]
    pub r_max: f64,
    #[serde(default = "default_tol")]
    pub tol: f64,
}

fn one() -> usize {
    1
}

fn default_r_max() -> f64 {
    100.0
}

fn default_tol() -> f64 {
    1e-10
}

pub fn parse(text: &str) -> Result<ExperimentConfig, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
}

impl ExperimentConfig {
    pub fn surface(&self) -> Result<&SurfaceSpec, CliError> {
        self.surface.as_ref().ok_or_else(|| CliError::Config("config has no surface".into()))
    }

    pub fn order(&self) -> Result<usize, CliError> {
        let s = self.surface()?;
        let r = self.r.or_else(|| s.translator().map(|t| t.1)).unwrap_or(1);
        if r == 0 || r > s.dim() {
            return Err(CliError::Config(format!("need 1 <= r <= n = {}, got r = {r}", s.dim())));
        }
        Ok(r)
    }

    pub fn velocity(&self) -> Result<Vec<f64>, CliError> {
        let n = self.surface()?.dim();
        let v = self.velocity.clone().unwrap_or_else(|| {
            let mut v = vec![0.0; n + 1];
            v[n] = 1.0;
            v
        });
        let len = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if v.len() != n + 1 || (len - 1.0).abs() > 1e-12 {
            return Err(CliError::Config(format!("velocity must be a unit vector in R^{}", n + 1)));
        }
        Ok(v)
    }

    /// `regions` followed by `region`, each checked against the ambient dimension.
    pub fn all_regions(&self) -> Result<Vec<Region>, CliError> {
        let m = self.surface()?.dim() + 1;
        let mut out = self.regions.clone();
        out.extend(self.region.clone());
        if out.is_empty() {
            return Err(CliError::Config("config has no region".into()));
        }
        for reg in &out {
            if reg.ambient_dim() != m {
                return Err(CliError::Config(format!("region lives in R^{}, surface in R^{m}", reg.ambient_dim())));
            }
            reg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        }
        Ok(out)
    }

    pub fn g_function(&self) -> Result<GFunction, CliError> {
        let g = self.g.clone().unwrap_or(GFunction::IteratedLog { levels: 1 });
        g.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(g)
    }
}

fn default_resolution(n: usize) -> usize {
    // about 400 points, odd so the centre is a node
    let m = (400f64).powf(1.0 / n as f64).ceil() as usize;
    let m = m.max(5);
    if m.is_multiple_of(2) {
        m + 1
    } else {
        m
    }
}

fn directions(n: usize, count: usize) -> Vec<Vec<f64>> {
    if n == 1 {
        return vec![vec![1.0], vec![-1.0]];
    }
    if n == 2 {
        return (0..count.max(1))
            .map(|i| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / count.max(1) as f64;
                vec![t.cos(), t.sin()]
            })
            .collect();
    }
    // ± axes and the diagonals of each coordinate plane
    let mut out = Vec::new();
    for i in 0..n {
        for s in [1.0, -1.0] {
            let mut d = vec![0.0; n];
            d[i] = s;
            out.push(d);
        }
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    for i in 0..n {
        for j in i + 1..n {
            for (si, sj) in [(1.0, 1.0), (1.0, -1.0), (-1.0, 1.0), (-1.0, -1.0)] {
                let mut d = vec![0.0; n];
                d[i] = si * h;
                d[j] = sj * h;
                out.push(d);
            }
        }
    }
    out
}

pub fn build_mesh(spec: Option<&MeshSpec>, chart: &dyn Chart, override_n: Option<usize>) -> Result<Mesh, CliError> {
    let n = chart.dim();
    let spec = spec.cloned().unwrap_or(MeshSpec::Grid { resolution: None, margin: 0.0 });
    let mesh = match spec {
        MeshSpec::Grid { resolution, margin } => {
            let m = override_n.or(resolution).unwrap_or_else(|| default_resolution(n));
            Mesh::grid(chart, m, margin)
        }
        MeshSpec::Random { count, margin, seed } => Mesh::random(chart, override_n.unwrap_or(count), margin, seed),
        MeshSpec::Radial { lo, hi, count, directions: k } => {
            let hi = hi.unwrap_or(chart.domain().hi[0]);
            if !(lo > 0.0 && hi > lo) {
                return Err(CliError::Config(format!("radial mesh needs 0 < lo < hi, got {lo}, {hi}")));
            }
            let radii = logspace(lo, hi, override_n.unwrap_or(count).max(2));
            Ok(Mesh::radial(&radii, &directions(n, k)))
        }
    }
    .map_err(CliError::from)?;
    if mesh.is_empty() {
        return Err(CliError::Config("mesh is empty".into()));
    }
    for p in &mesh.points {
        if !chart.contains(&p.u) {
            return Err(CliError::Config(format!("mesh point {:?} lies outside the chart", p.u)));
        }
    }
    Ok(mesh)
}
