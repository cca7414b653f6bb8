//! Discrete energies of weighted node clouds: the direct double sum, its
//! potential, the radial and spatial ball-mass characterizations, and the
//! cross energy at a second exponent.
//!
//! The kernel is singular on the diagonal. `DiagonalMode::Exclude` drops the
//! i = j terms; `SelfCell` replaces them by w_i²·k(σ·h_i), h_i being the
//! radius of a ball with the same native-dimensional measure as cell i.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::gotz_constant;
use crate::error::{invalid, Error, Result};
use crate::geometry::NodeCloud;
use crate::kernel::{EnergySource, EnergyValue, RieszExponent};
use crate::specfun::{dirichlet_beta, log_gamma, zeta};

/// Treatment of the kernel singularity at x = y.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum DiagonalMode {
    /// Drop self-interaction terms.
    Exclude,
    /// Self term w_i²·k(σ·h_i) with σ ∈ (0, 1].
    SelfCell { sigma: f64 },
    /// `Exclude` for atomic clouds; `SelfCell` with [`calibrated_sigma`]
    /// where it exists; otherwise `Exclude` for p < 0 and `SelfCell` with
    /// [`DEFAULT_SIGMA`] for p ≥ 0.
    #[default]
    Auto,
}

/// σ used when no lattice calibration is available.
pub const DEFAULT_SIGMA: f64 = 0.6;

impl DiagonalMode {
    pub fn self_cell(sigma: f64) -> Result<Self> {
        if !(sigma > 0.0 && sigma <= 1.0) {
            return invalid(format!("self-cell sigma must lie in (0, 1], got {sigma}"));
        }
        Ok(DiagonalMode::SelfCell { sigma })
    }

    /// Replace `Auto` by a concrete mode for this exponent and cloud.
    pub fn resolve(self, p: RieszExponent, cloud: &NodeCloud) -> DiagonalMode {
        match self {
            DiagonalMode::Auto if cloud.native_dim() == 0 => DiagonalMode::Exclude,
            DiagonalMode::Auto => match calibrated_sigma(p.value(), cloud.native_dim()) {
                Some(sigma) => DiagonalMode::SelfCell { sigma },
                None if p.maximizes() => DiagonalMode::Exclude,
                None => DiagonalMode::SelfCell {
                    sigma: DEFAULT_SIGMA,
                },
            },
            m => m,
        }
    }

    fn validate(self) -> Result<()> {
        match self {
            DiagonalMode::SelfCell { sigma } => Self::self_cell(sigma).map(|_| ()),
            _ => Ok(()),
        }
    }
}

impl std::fmt::Display for DiagonalMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DiagonalMode::Exclude => write!(f, "exclude"),
            DiagonalMode::SelfCell { sigma } => write!(f, "self-cell:{sigma}"),
            DiagonalMode::Auto => write!(f, "auto"),
        }
    }
}

impl std::str::FromStr for DiagonalMode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "exclude" => Ok(DiagonalMode::Exclude),
            "auto" => Ok(DiagonalMode::Auto),
            "self-cell" | "self_cell" => Self::self_cell(DEFAULT_SIGMA),
            _ => match s
                .strip_prefix("self-cell:")
                .or_else(|| s.strip_prefix("self_cell:"))
            {
                Some(v) => Self::self_cell(
                    v.parse()
                        .map_err(|_| Error::InvalidInput(format!("bad sigma in {s:?}")))?,
                ),
                None => invalid(format!(
                    "diagonal mode must be exclude, auto or self-cell:<sigma>, got {s:?}"
                )),
            },
        }
    }
}

/// σ that makes the self-cell energy exact for uniform weights on an
/// infinite lattice of d-dimensional cells, in the limit of small cells.
///
/// On the lattice hZ (cell radius h/2) and hZ² (cell radius h/√π) the sum
/// over the lattice of |k|^(−p), minus the integral it approximates, is a
/// zeta value: 2ζ(p) for Z and 4ζ(p/2)β(p/2) for Z². Setting the self term
/// equal to that defect gives σ. The logarithmic case uses the derivative at
/// 0; negative p uses the analytic continuation. Defined for −d < p < d with
/// d ∈ {1, 2}.
pub fn calibrated_sigma(p: f64, d: usize) -> Option<f64> {
    let df = d as f64;
    if !(p > -df && p < df) {
        return None;
    }
    let s = match d {
        1 if p == 0.0 => 1.0 / PI,
        1 => 2.0 * (-2.0 * zeta(p).ok()?).powf(-1.0 / p),
        2 if p == 0.0 => {
            // β'(0) = log(Γ(1/4)²/(2π√2)), ζ'(0) = −log(2π)/2
            let beta_prime0 = 2.0 * log_gamma(0.25).ok()? - (2.0 * PI * 2f64.sqrt()).ln();
            let dz = -0.5 * (2.0 * PI).ln() - beta_prime0;
            PI.sqrt() * dz.exp()
        }
        2 => {
            let h = p / 2.0;
            PI.sqrt() * (-4.0 * zeta(h).ok()? * dirichlet_beta(h).ok()?).powf(-1.0 / p)
        }
        _ => return None,
    };
    (s.is_finite() && s > 0.0 && s <= 1.0).then_some(s)
}

/// [`calibrated_sigma`], or [`DEFAULT_SIGMA`] where no calibration exists.
pub fn lattice_sigma(p: f64, d: usize) -> f64 {
    calibrated_sigma(p, d).unwrap_or(DEFAULT_SIGMA)
}

/// A probability vector aligned with the nodes of a cloud.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

/// Allowed deviation of Σw from 1.
pub const SUM_TOL: f64 = 1e-12;

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return invalid("weight vector is empty");
        }
        if w.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return invalid("weights must be finite and nonnegative");
        }
        let s: f64 = w.iter().sum();
        if (s - 1.0).abs() > SUM_TOL {
            return invalid(format!("weights sum to {s}, not 1"));
        }
        Ok(Self(w))
    }

    /// Scale nonnegative weights to unit sum.
    pub fn normalized(mut w: Vec<f64>) -> Result<Self> {
        for x in w.iter_mut() {
            if *x < 0.0 && *x > -1e-15 {
                *x = 0.0;
            }
        }
        let s: f64 = w.iter().sum();
        if !(s > 0.0) || !s.is_finite() {
            return invalid(format!("cannot normalize weights with sum {s}"));
        }
        w.iter_mut().for_each(|x| *x /= s);
        Self::new(w)
    }

    pub fn uniform(n: usize) -> Result<Self> {
        if n == 0 {
            return invalid("weight vector is empty");
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    /// Weights proportional to cell measures.
    pub fn from_cell_measures(cloud: &NodeCloud) -> Result<Self> {
        Self::normalized(cloud.cell_measures().to_vec())
    }

    pub fn point_mass(n: usize, i: usize) -> Result<Self> {
        if i >= n {
            return invalid(format!("index {i} out of range for {n} nodes"));
        }
        let mut w = vec![0.0; n];
        w[i] = 1.0;
        Ok(Self(w))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    /// Indices with weight above `tol`.
    pub fn support(&self, tol: f64) -> Vec<usize> {
        (0..self.0.len()).filter(|&i| self.0[i] > tol).collect()
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = Error;
    fn try_from(w: Vec<f64>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Dense symmetric kernel matrix of a cloud with a resolved diagonal.
#[derive(Debug, Clone)]
pub struct KernelMatrix {
    n: usize,
    data: Vec<f64>,
    diag: DiagonalMode,
}

impl KernelMatrix {
    pub fn new(p: RieszExponent, cloud: &NodeCloud, diag: DiagonalMode) -> Result<Self> {
        diag.validate()?;
        let diag = diag.resolve(p, cloud);
        let n = cloud.len();
        let dist = cloud.distances();
        let mut data = vec![0.0; n * n];
        data.par_chunks_mut(n).enumerate().for_each(|(i, row)| {
            for (j, slot) in row.iter_mut().enumerate() {
                *slot = if i == j {
                    match diag {
                        DiagonalMode::SelfCell { sigma } => p.kernel(sigma * cloud.cell_radius(i)),
                        _ => 0.0,
                    }
                } else {
                    p.kernel(dist[i * n + j])
                };
            }
        });
        if let Some(k) = data.iter().position(|v| !v.is_finite()) {
            return invalid(format!(
                "non-finite kernel entry between nodes {} and {}",
                k / n,
                k % n
            ));
        }
        Ok(Self { n, data, diag })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    /// The concrete diagonal mode used to fill the matrix.
    pub fn diag(&self) -> DiagonalMode {
        self.diag
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.n..(i + 1) * self.n]
    }

    /// U = K·w for an arbitrary (not necessarily normalized) vector.
    pub fn apply(&self, w: &[f64]) -> Vec<f64> {
        self.data
            .par_chunks(self.n)
            .map(|row| row.iter().zip(w).map(|(k, x)| k * x).sum())
            .collect()
    }

    /// wᵀKw for an arbitrary vector.
    pub fn quadratic_form(&self, w: &[f64]) -> f64 {
        self.apply(w).iter().zip(w).map(|(u, x)| u * x).sum()
    }
}

fn check_len(cloud: &NodeCloud, w: &WeightVector) -> Result<()> {
    if cloud.len() != w.len() {
        return invalid(format!("{} weights for {} nodes", w.len(), cloud.len()));
    }
    Ok(())
}

/// Wrap a raw energy sum. A single atom has infinite energy for p ≥ 0 when
/// self-interaction is excluded.
pub(crate) fn energy_value(
    p: RieszExponent,
    kernel: &KernelMatrix,
    w: &[f64],
    value: f64,
    source: EnergySource,
) -> Result<EnergyValue> {
    let atoms = w.iter().filter(|x| **x > 0.0).count();
    if atoms <= 1 && !p.maximizes() && kernel.diag() == DiagonalMode::Exclude {
        return EnergyValue::plus_infinity(p, source);
    }
    // round-off can push a p < 0 energy of near-coincident atoms below zero
    let value = if p.maximizes() { value.max(0.0) } else { value };
    EnergyValue::finite(p, value, source)
}

/// Σ_{i≠j} w_i w_j k(|x_i − x_j|), plus Σ_i w_i² k(σ h_i) in self-cell mode.
pub fn discrete_energy(
    p: RieszExponent,
    cloud: &NodeCloud,
    w: &WeightVector,
    diag: DiagonalMode,
) -> Result<EnergyValue> {
    check_len(cloud, w)?;
    let k = KernelMatrix::new(p, cloud, diag)?;
    let e = k.quadratic_form(w.as_slice());
    energy_value(p, &k, w.as_slice(), e, EnergySource::DirectSum)
}

/// U_i = Σ_{j≠i} w_j k(|x_i − x_j|) (+ self term); Σ w_i U_i is the energy.
pub fn potential(
    p: RieszExponent,
    cloud: &NodeCloud,
    w: &WeightVector,
    diag: DiagonalMode,
) -> Result<Vec<f64>> {
    check_len(cloud, w)?;
    Ok(KernelMatrix::new(p, cloud, diag)?.apply(w.as_slice()))
}

/// Potential of a weighted cloud at arbitrary points off the nodes.
pub fn potential_at(
    p: RieszExponent,
    cloud: &NodeCloud,
    w: &WeightVector,
    points: &[Vec<f64>],
) -> Result<Vec<f64>> {
    check_len(cloud, w)?;
    points
        .iter()
        .map(|x| {
            if x.len() != cloud.dim() {
                return invalid("probe dimension mismatch");
            }
            let mut u = 0.0;
            for (i, y) in cloud.nodes().enumerate() {
                let r = crate::geometry::dist(x, y);
                if r == 0.0 {
                    return invalid("probe coincides with a node");
                }
                u += w.as_slice()[i] * p.kernel(r);
            }
            Ok(u)
        })
        .collect()
}

/// Evaluation of the r-integral in the radial characterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RadialQuadrature {
    /// Exact per-pair integral p∫_d^∞ r^(−p−1) dr = d^(−p).
    Analytic,
    /// Trapezoid rule in log r on a geometric grid over
    /// [d_min/100, 100·d_max], with the exact tail beyond the grid.
    Geometric { points: usize },
}

fn geometric_grid(lo: f64, hi: f64, points: usize) -> Result<Vec<f64>> {
    if points < 2 {
        return invalid("quadrature needs at least 2 points");
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|k| (a + (b - a) * k as f64 / (points - 1) as f64).exp())
        .collect())
}

fn positive_exponent(p: RieszExponent, what: &str) -> Result<()> {
    if p.value() > 0.0 {
        Ok(())
    } else {
        Err(Error::Unsupported(format!(
            "{what} requires p > 0, got {p}"
        )))
    }
}

fn pair_range(cloud: &NodeCloud) -> (f64, f64) {
    let n = cloud.len();
    let d = cloud.distances();
    let mut lo = f64::INFINITY;
    let mut hi = 0.0f64;
    for i in 0..n {
        for j in i + 1..n {
            lo = lo.min(d[i * n + j]);
            hi = hi.max(d[i * n + j]);
        }
    }
    (lo, hi)
}

/// p·Σ_i w_i ∫₀^∞ μ_i(B(x_i, r)) r^(−p−1) dr, where μ_i omits the atom at x_i
/// and balls are open.
pub fn gotz_radial_energy(
    p: RieszExponent,
    cloud: &NodeCloud,
    w: &WeightVector,
    quadrature: RadialQuadrature,
) -> Result<EnergyValue> {
    positive_exponent(p, "radial energy form")?;
    check_len(cloud, w)?;
    let n = cloud.len();
    let ws = w.as_slice();
    let pv = p.value();
    let dist = cloud.distances();
    let total = match quadrature {
        RadialQuadrature::Analytic => (0..n)
            .map(|i| {
                let mut row = 0.0;
                for j in 0..n {
                    if j != i {
                        row += ws[j] * dist[i * n + j].powf(-pv);
                    }
                }
                ws[i] * row
            })
            .sum(),
        RadialQuadrature::Geometric { points } => {
            if n < 2 {
                0.0
            } else {
                let (dmin, dmax) = pair_range(cloud);
                let grid = geometric_grid(dmin / 100.0, 100.0 * dmax, points)?;
                let mass = |r: f64| -> f64 {
                    (0..n)
                        .map(|i| {
                            let inner: f64 = (0..n)
                                .filter(|&j| j != i && dist[i * n + j] < r)
                                .map(|j| ws[j])
                                .sum();
                            ws[i] * inner
                        })
                        .sum()
                };
                let f: Vec<f64> = grid.iter().map(|&r| mass(r)).collect();
                // ∫ F r^(−p−1) dr with F averaged per cell and r^(−p−1) exact
                let mut acc = 0.0;
                for k in 0..points - 1 {
                    let cell = (grid[k].powf(-pv) - grid[k + 1].powf(-pv)) / pv;
                    acc += 0.5 * (f[k] + f[k + 1]) * cell;
                }
                let hi = grid[points - 1];
                let tail = f[points - 1] * hi.powf(-pv) / pv;
                pv * (acc + tail)
            }
        }
    };
    let source = EnergySource::GotzRadial;
    if n < 2 || ws.iter().filter(|x| **x > 0.0).count() < 2 {
        return EnergyValue::plus_infinity(p, source);
    }
    EnergyValue::finite(p, total, source)
}

/// Evaluation of the r-integral in the spatial characterization.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpatialQuadrature {
    /// Geometric r-grid size over [d_min/100, 100·d_max].
    pub points: usize,
}

impl Default for SpatialQuadrature {
    fn default() -> Self {
        Self { points: 800 }
    }
}

/// Volume of the intersection of two radius-r balls at center distance d in
/// R^n, n ∈ {1, 2, 3}.
pub fn lens_volume(n: usize, d: f64, r: f64) -> Result<f64> {
    if 2.0 * r <= d {
        return match n {
            1..=3 => Ok(0.0),
            _ => Err(Error::Unsupported(format!("lens volume in dimension {n}"))),
        };
    }
    Ok(match n {
        1 => 2.0 * r - d,
        2 => 2.0 * r * r * (d / (2.0 * r)).acos() - 0.5 * d * (4.0 * r * r - d * d).sqrt(),
        3 => PI / 12.0 * (4.0 * r + d) * (2.0 * r - d).powi(2),
        _ => return Err(Error::Unsupported(format!("lens volume in dimension {n}"))),
    })
}

/// Power-series coefficients of lens_n(d, r)/r^n in u = d/(2r), to O(u⁶).
fn lens_series(n: usize) -> &'static [f64] {
    const G1: [f64; 2] = [2.0, -2.0];
    const G2: [f64; 6] = [PI, -4.0, 0.0, 2.0 / 3.0, 0.0, 0.1];
    const G3: [f64; 4] = [4.0 * PI / 3.0, -2.0 * PI, 0.0, 2.0 * PI / 3.0];
    match n {
        1 => &G1,
        2 => &G2,
        _ => &G3,
    }
}

/// A(p, n)·Σ_{i≠j} w_i w_j ∫₀^∞ lens_n(d_ij, r) r^(−n−p−1) dr.
pub fn gotz_spatial_energy(
    p: RieszExponent,
    cloud: &NodeCloud,
    w: &WeightVector,
    quadrature: SpatialQuadrature,
) -> Result<EnergyValue> {
    positive_exponent(p, "spatial energy form")?;
    check_len(cloud, w)?;
    let dim = cloud.dim();
    if !(1..=3).contains(&dim) {
        return Err(Error::Unsupported(format!(
            "spatial energy form in dimension {dim}; only 1, 2 and 3 are implemented"
        )));
    }
    let n = cloud.len();
    let ws = w.as_slice();
    let pv = p.value();
    let source = EnergySource::GotzSpatial;
    if ws.iter().filter(|x| **x > 0.0).count() < 2 {
        return EnergyValue::plus_infinity(p, source);
    }
    let (dmin, dmax) = pair_range(cloud);
    let grid = geometric_grid(dmin / 100.0, 100.0 * dmax, quadrature.points)?;
    let hi = *grid.last().expect("grid is nonempty");
    let expo = -(dim as f64) - pv - 1.0;
    let weights: Vec<f64> = grid.iter().map(|r| r.powf(expo) * r).collect();
    let series = lens_series(dim);
    let dist = cloud.distances();
    let pair = |d: f64| -> Result<f64> {
        // trapezoid in log r; the integrand vanishes for r ≤ d/2
        let mut acc = 0.0;
        let mut prev = 0.0;
        for k in 0..grid.len() {
            let f = lens_volume(dim, d, grid[k])? * weights[k];
            if k > 0 {
                acc += 0.5 * (prev + f) * (grid[k] / grid[k - 1]).ln();
            }
            prev = f;
        }
        // exact tail beyond the grid: (d/2)^(−p) Σ c_k u^(p+k)/(p+k)
        let u = d / (2.0 * hi);
        let tail: f64 = series
            .iter()
            .enumerate()
            .map(|(k, c)| c * u.powf(pv + k as f64) / (pv + k as f64))
            .sum();
        Ok(acc + (0.5 * d).powf(-pv) * tail)
    };
    let mut total = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            if ws[i] > 0.0 && ws[j] > 0.0 {
                total += 2.0 * ws[i] * ws[j] * pair(dist[i * n + j])?;
            }
        }
    }
    EnergyValue::finite(p, gotz_constant(pv, dim)? * total, source)
}

/// Energy of fixed weights at a second exponent p*, self terms excluded.
pub fn cross_energy(
    p_star: RieszExponent,
    cloud: &NodeCloud,
    w: &WeightVector,
) -> Result<EnergyValue> {
    discrete_energy(p_star, cloud, w, DiagonalMode::Exclude)
}
