//! Elementary symmetric functions of principal curvatures and the Newton
//! transformations built from them.
//!
//! Everything here is finite-dimensional linear algebra on small dense
//! symmetric matrices (n <= 16). The r-th elementary symmetric function of
//! the eigenvalues is written `sigma_r`, and the r-th Newton transformation
//! `P_r` is given by `P_0 = I`, `P_r = sigma_r I - A P_{r-1}`.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{GeomError, Result};

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

/// Asymmetry allowed on construction, relative to `max(1, ||A||_inf)`.
pub const SYMMETRY_TOL: f64 = 1e-8;

/// `sigma_r(k)` by the incremental product recurrence.
///
/// Returns 1 for `r = 0` and 0 for `r > k.len()`.
pub fn elementary_symmetric(k: &[f64], r: usize) -> Result<f64> {
    validate_curvatures(k)?;
    if r > k.len() {
        return Ok(0.0);
    }
    Ok(symmetric_table(k, r)[r])
}

/// All of `sigma_0..=sigma_n` for the given curvatures.
pub fn elementary_symmetric_all(k: &[f64]) -> Result<Vec<f64>> {
    validate_curvatures(k)?;
    Ok(symmetric_table(k, k.len()))
}

fn validate_curvatures(k: &[f64]) -> Result<()> {
    if k.is_empty() {
        return Err(GeomError::InvalidInput("empty curvature list".into()));
    }
    if let Some(bad) = k.iter().find(|x| !x.is_finite()) {
        return Err(GeomError::InvalidInput(format!(
            "non-finite curvature entry {bad}"
        )));
    }
    Ok(())
}

// e[j] after processing k_1..k_i holds sigma_j(k_1..k_i); one curvature at a time.
fn symmetric_table(k: &[f64], r_max: usize) -> Vec<f64> {
    let r_max = r_max.min(k.len());
    let mut e = vec![0.0; r_max + 1];
    e[0] = 1.0;
    for (i, &ki) in k.iter().enumerate() {
        let top = (i + 1).min(r_max);
        for j in (1..=top).rev() {
            e[j] += ki * e[j - 1];
        }
    }
    e
}

/// Principal curvatures together with `sigma_0..sigma_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvatureSpectrum {
    pub k: Vec<f64>,
    pub sigma: Vec<f64>,
}

impl CurvatureSpectrum {
    pub fn new(k: Vec<f64>) -> Result<Self> {
        let sigma = elementary_symmetric_all(&k)?;
        Ok(Self { k, sigma })
    }

    pub fn dim(&self) -> usize {
        self.k.len()
    }

    /// `sigma_r`, zero for `r > n`.
    pub fn sigma(&self, r: usize) -> f64 {
        self.sigma.get(r).copied().unwrap_or(0.0)
    }

    /// The spectrum of `-A`: `sigma_r -> (-1)^r sigma_r`.
    pub fn flipped(&self) -> Self {
        let k = self.k.iter().map(|x| -x).collect();
        let sigma = self
            .sigma
            .iter()
            .enumerate()
            .map(|(r, s)| if r % 2 == 0 { *s } else { -s })
            .collect();
        Self { k, sigma }
    }
}

/// Dense symmetric matrix, symmetrized on construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymMatrix(DMatrix<f64>);

impl SymMatrix {
    /// Validates and symmetrizes `m`. Asymmetry beyond
    /// `1e-8 * max(1, ||m||_inf)` is rejected.
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || m.ncols() != n {
            return Err(GeomError::InvalidInput(format!(
                "expected a nonempty square matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        if n > MAX_DIM {
            return Err(GeomError::InvalidInput(format!(
                "dimension {n} exceeds the supported maximum {MAX_DIM}"
            )));
        }
        if m.iter().any(|x| !x.is_finite()) {
            return Err(GeomError::InvalidInput("non-finite matrix entry".into()));
        }
        let scale = inf_norm(&m).max(1.0);
        let asym = (&m - m.transpose()).abs().max();
        if asym > SYMMETRY_TOL * scale {
            return Err(GeomError::InvalidInput(format!(
                "matrix is not symmetric (max |a_ij - a_ji| = {asym:e})"
            )));
        }
        Ok(Self::symmetrized(m))
    }

    pub(crate) fn symmetrized(m: DMatrix<f64>) -> Self {
        let t = m.transpose();
        Self((m + t) * 0.5)
    }

    pub fn from_row_slice(n: usize, data: &[f64]) -> Result<Self> {
        if data.len() != n * n {
            return Err(GeomError::InvalidInput(format!(
                "expected {} entries, got {}",
                n * n,
                data.len()
            )));
        }
        Self::new(DMatrix::from_row_slice(n, n, data))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn zeros(n: usize) -> Self {
        Self(DMatrix::zeros(n, n))
    }

    pub fn diagonal(d: &[f64]) -> Result<Self> {
        let n = d.len();
        let mut m = DMatrix::zeros(n, n);
        for (i, x) in d.iter().enumerate() {
            m[(i, i)] = *x;
        }
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    pub fn trace(&self) -> f64 {
        self.0.trace()
    }

    /// `max(1, ||A||_inf)`, the scale used for relative tolerances.
    pub fn tolerance_scale(&self) -> f64 {
        inf_norm(&self.0).max(1.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        let eig = self
            .0
            .clone()
            .try_symmetric_eigen(1e-15, 10_000)
            .ok_or_else(|| {
                GeomError::Numerical(format!(
                    "symmetric eigensolver did not converge (n = {}, ||A||_inf = {:e})",
                    self.dim(),
                    inf_norm(&self.0)
                ))
            })?;
        let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        vals.sort_by(|a, b| a.total_cmp(b));
        Ok(vals)
    }

    pub fn spectrum(&self) -> Result<CurvatureSpectrum> {
        CurvatureSpectrum::new(self.eigenvalues()?)
    }
}

fn inf_norm(m: &DMatrix<f64>) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|x| x.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `sum_j (-1)^j sigma_{n-j} t^j` with the sigma computed from the
/// eigenvalues of `a`; equals `det(A - tI)`.
pub fn char_poly_eval(a: &SymMatrix, t: f64) -> Result<f64> {
    let spec = a.spectrum()?;
    let n = a.dim();
    // Horner in t, highest power first.
    let mut acc = 0.0;
    for j in (0..=n).rev() {
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * t + sign * spec.sigma(n - j);
    }
    Ok(acc)
}

/// `P_r` by the recursion `P_0 = I`, `P_r = sigma_r I - A P_{r-1}`.
///
/// `r = n` is accepted so that `P_n = 0` can be checked.
pub fn newton_transform(a: &SymMatrix, r: usize) -> Result<SymMatrix> {
    check_order(a, r, a.dim())?;
    let spec = a.spectrum()?;
    Ok(newton_transform_with(a, &spec, r))
}

/// Recursion with a spectrum the caller has already computed.
pub fn newton_transform_with(a: &SymMatrix, spec: &CurvatureSpectrum, r: usize) -> SymMatrix {
    let n = a.dim();
    let id = DMatrix::<f64>::identity(n, n);
    let mut p = id.clone();
    for j in 1..=r {
        p = &id * spec.sigma(j) - a.matrix() * &p;
    }
    SymMatrix::symmetrized(p)
}

/// `P_r` as the polynomial `sum_j (-1)^j sigma_{r-j} A^j`, by Horner's scheme.
pub fn newton_polynomial(a: &SymMatrix, r: usize) -> Result<SymMatrix> {
    check_order(a, r, a.dim())?;
    let spec = a.spectrum()?;
    let n = a.dim();
    let id = DMatrix::<f64>::identity(n, n);
    let sign = |j: usize| if j % 2 == 0 { 1.0 } else { -1.0 };
    let mut acc = &id * (sign(r) * spec.sigma(0));
    for j in (0..r).rev() {
        acc = a.matrix() * acc + &id * (sign(j) * spec.sigma(r - j));
    }
    Ok(SymMatrix::symmetrized(acc))
}

/// `(tr P_{r-1}, tr(A P_{r-1}))` for `1 <= r <= n`.
pub fn trace_identities(a: &SymMatrix, r: usize) -> Result<(f64, f64)> {
    if r == 0 || r > a.dim() {
        return Err(GeomError::Domain(format!(
            "trace identities need 1 <= r <= n = {}, got r = {r}",
            a.dim()
        )));
    }
    let spec = a.spectrum()?;
    let p = newton_transform_with(a, &spec, r - 1);
    let tr_p = p.trace();
    let tr_ap = (a.matrix() * p.matrix()).trace();
    Ok((tr_p, tr_ap))
}

/// Smallest eigenvalue of `P_r`, `0 <= r <= n - 1`.
pub fn min_eigen_pr(a: &SymMatrix, r: usize) -> Result<f64> {
    check_order(a, r, a.dim().saturating_sub(1))?;
    let p = newton_transform(a, r)?;
    Ok(p.eigenvalues()?[0])
}

fn check_order(a: &SymMatrix, r: usize, max: usize) -> Result<()> {
    if r > max {
        return Err(GeomError::Domain(format!(
            "Newton transformation order r = {r} outside 0..={max} (n = {})",
            a.dim()
        )));
    }
    Ok(())
}

/// Random symmetric matrix with spectral radius at most `radius`.
pub fn random_symmetric<R: Rng>(n: usize, radius: f64, rng: &mut R) -> SymMatrix {
    let mut m = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let x: f64 = rng.gen_range(-1.0..1.0);
            m[(i, j)] = x;
            m[(j, i)] = x;
        }
    }
    let s = SymMatrix(m);
    let rho = s
        .eigenvalues()
        .map(|v| v.iter().fold(0.0_f64, |acc, x| acc.max(x.abs())))
        .unwrap_or(1.0);
    if rho > radius && rho > 0.0 {
        SymMatrix(s.0 * (radius / rho))
    } else {
        s
    }
}
