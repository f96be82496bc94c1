//! Finite samples of a chart's parameter domain.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::charts::{Chart, ParamBox};
use crate::error::{GeomError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeshPoint {
    pub u: Vec<f64>,
    /// On the truncation boundary of the sample.
    pub boundary: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mesh {
    pub points: Vec<MeshPoint>,
    /// Largest parameter distance between neighbouring samples.
    pub spacing: f64,
}

impl Mesh {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn from_params(params: Vec<Vec<f64>>, spacing: f64) -> Self {
        Self { points: params.into_iter().map(|u| MeshPoint { u, boundary: false }).collect(), spacing }
    }

    /// Tensor grid with `m` nodes per axis on `domain` shrunk by `margin`,
    /// keeping only nodes the chart contains. A node is on the boundary if
    /// it sits on the outer layer or any axis neighbour was dropped.
    pub fn grid<C: Chart + ?Sized>(chart: &C, m: usize, margin: f64) -> Result<Self> {
        Self::grid_on(chart, chart.domain(), m, margin)
    }

    pub fn grid_on<C: Chart + ?Sized>(chart: &C, domain: &ParamBox, m: usize, margin: f64) -> Result<Self> {
        if m < 2 {
            return Err(GeomError::InvalidInput("grid needs at least two nodes per axis".into()));
        }
        let n = domain.dim();
        let total = m.checked_pow(n as u32).filter(|t| *t <= 5_000_000).ok_or_else(|| {
            GeomError::InvalidInput(format!("grid with {m}^{n} nodes is too large"))
        })?;
        let lo: Vec<f64> = domain.lo.iter().map(|x| x + margin).collect();
        let step: Vec<f64> = domain
            .lo
            .iter()
            .zip(&domain.hi)
            .map(|(a, b)| (b - a - 2.0 * margin) / (m - 1) as f64)
            .collect();
        if step.iter().any(|s| !(*s > 0.0)) {
            return Err(GeomError::InvalidInput("margin leaves an empty grid".into()));
        }
        let node = |idx: &[usize]| -> Vec<f64> { (0..n).map(|k| lo[k] + step[k] * idx[k] as f64).collect() };
        let mut keep = vec![false; total];
        let mut idx = vec![0usize; n];
        for flat in 0..total {
            decode(flat, m, &mut idx);
            keep[flat] = chart.contains(&node(&idx));
        }
        let mut points = Vec::new();
        for flat in 0..total {
            if !keep[flat] {
                continue;
            }
            decode(flat, m, &mut idx);
            let mut boundary = false;
            let mut stride = 1;
            for k in 0..n {
                if idx[k] == 0 || idx[k] == m - 1 || !keep[flat - stride] || !keep[flat + stride] {
                    boundary = true;
                }
                stride *= m;
            }
            points.push(MeshPoint { u: node(&idx), boundary });
        }
        let spacing = step.iter().map(|s| s * s).sum::<f64>().sqrt();
        Ok(Self { points, spacing })
    }

    /// `count` points drawn uniformly from the chart's domain shrunk by
    /// `margin`, rejecting points outside the chart.
    pub fn random<C: Chart + ?Sized>(chart: &C, count: usize, margin: f64, seed: u64) -> Result<Self> {
        let domain = chart.domain();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut params = Vec::with_capacity(count);
        let mut attempts = 0usize;
        while params.len() < count {
            attempts += 1;
            if attempts > 1000 * count.max(1) {
                return Err(GeomError::InvalidInput("could not sample the chart domain".into()));
            }
            let u: Vec<f64> = domain
                .lo
                .iter()
                .zip(&domain.hi)
                .map(|(a, b)| rng.gen_range((a + margin)..(b - margin)))
                .collect();
            if chart.contains(&u) && chart.domain().contains_with_margin(&u, margin) {
                params.push(u);
            }
        }
        let volume: f64 = domain.lo.iter().zip(&domain.hi).map(|(a, b)| b - a).product();
        let spacing = (volume / count.max(1) as f64).powf(1.0 / domain.dim() as f64);
        Ok(Self::from_params(params, spacing))
    }

    /// Points `radius * dir` for every radius and direction (radial charts).
    pub fn radial(radii: &[f64], directions: &[Vec<f64>]) -> Self {
        let mut params = Vec::new();
        for d in directions {
            let len = d.iter().map(|x| x * x).sum::<f64>().sqrt();
            for &r in radii {
                params.push(d.iter().map(|x| r * x / len).collect());
            }
        }
        let spacing = radii.windows(2).map(|w| (w[1] - w[0]).abs()).fold(0.0, f64::max);
        let mut mesh = Self::from_params(params, spacing);
        let r_max = radii.iter().cloned().fold(0.0, f64::max);
        for p in &mut mesh.points {
            let r = p.u.iter().map(|x| x * x).sum::<f64>().sqrt();
            p.boundary = (r - r_max).abs() <= 1e-12 * r_max.max(1.0);
        }
        mesh
    }

    pub fn params(&self) -> Vec<Vec<f64>> {
        self.points.iter().map(|p| p.u.clone()).collect()
    }

    pub fn boundary_count(&self) -> usize {
        self.points.iter().filter(|p| p.boundary).count()
    }
}

fn decode(mut flat: usize, m: usize, idx: &mut [usize]) {
    for slot in idx.iter_mut() {
        *slot = flat % m;
        flat /= m;
    }
}

/// `count` log-spaced values on `[lo, hi]`.
pub fn logspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    let mut out: Vec<f64> = (0..count).map(|i| (a + (b - a) * i as f64 / (count - 1) as f64).exp()).collect();
    out[0] = lo;
    out[count - 1] = hi;
    out
}

/// `count` evenly spaced values on `[lo, hi]`.
pub fn linspace(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![lo];
    }
    (0..count).map(|i| lo + (hi - lo) * i as f64 / (count - 1) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::charts::{Plane, Sphere};

    #[test]
    fn grid_flags_outer_layer() {
        let plane = Plane::new(2, 1.0, 0.0);
        let mesh = Mesh::grid(&plane, 5, 0.0).unwrap();
        assert_eq!(mesh.len(), 25);
        assert_eq!(mesh.boundary_count(), 16);
        assert!(mesh.points[12].u.iter().all(|x| x.abs() < 1e-15));
        assert!(!mesh.points[12].boundary);
    }

    #[test]
    fn random_mesh_is_seeded() {
        let s = Sphere::unit(3);
        let a = Mesh::random(&s, 50, 1e-6, 9).unwrap();
        let b = Mesh::random(&s, 50, 1e-6, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.points.iter().all(|p| s.contains(&p.u)));
    }

    #[test]
    fn spaced_values() {
        let v = logspace(1.0, 1000.0, 4);
        assert!((v[1] - 10.0).abs() < 1e-12 && (v[3] - 1000.0).abs() < 1e-9);
        assert_eq!(linspace(0.0, 1.0, 3), vec![0.0, 0.5, 1.0]);
    }
}
