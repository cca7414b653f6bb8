//! Capacity estimation with refinement extrapolation, capacity curves, and
//! numerical witnesses for the structural properties of Riesz capacity:
//! monotonicity in p, the diameter and volume endpoint limits, continuity at
//! the logarithmic case, and equilibrium-measure continuity.
//!
//! Everything here is evidence, not proof. Weak-* convergence of equilibrium
//! measures is proxied by moments and by potentials at a few fixed probes.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closedform::{
    ball_capacity, ball_equilibrium_radial_cdf, ball_volume, closed_form_capacity, gotz_constant,
    interval_capacity, interval_equilibrium_cdf, sphere_area, BallCapacityRegime,
};
use crate::energy::{cross_energy, potential_at, WeightVector};
use crate::error::{invalid, Result};
use crate::geometry::{discretize, NodeCloud, Scheme, SetSpec};
use crate::kernel::{capacity_from_energy, EnergyKind, EnergySource, EnergyValue, RieszExponent};
use crate::solver::{solve_equilibrium, EquilibriumResult, SolverConfig};

/// Dimension of the set itself: p at or above it gives zero capacity.
pub fn set_dimension(spec: &SetSpec) -> usize {
    match spec {
        SetSpec::Ball { dim, .. } => *dim,
        SetSpec::Sphere { dim, .. } => dim - 1,
        SetSpec::Interval { .. } => 1,
        SetSpec::Box { lo, hi } => lo.iter().zip(hi).filter(|(l, h)| h > l).count(),
        SetSpec::Points { .. } => 0,
        SetSpec::Union { parts } => parts.iter().map(set_dimension).max().unwrap_or(0),
    }
}

/// The scheme actually used: `Native` picks boundary nodes for spheres and
/// for balls with p ≤ n − 2, where the equilibrium measure lives on the
/// boundary sphere, Chebyshev–Lobatto nodes for intervals, whose
/// equilibrium measures pile up at (or sit on) the endpoints, and volume
/// nodes otherwise.
pub fn resolve_scheme(spec: &SetSpec, p: f64, scheme: Scheme) -> Scheme {
    match (scheme, spec) {
        (Scheme::Native, SetSpec::Sphere { .. } | SetSpec::Interval { .. }) => Scheme::Boundary,
        (Scheme::Native, SetSpec::Ball { dim, .. }) if *dim >= 2 && p <= *dim as f64 - 2.0 => {
            Scheme::Boundary
        }
        (Scheme::Native, _) => Scheme::Grid,
        (s, _) => s,
    }
}

/// Capacity estimate with refinement diagnostics.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CapacityResult {
    pub p: f64,
    /// Extrapolated value when `extrapolated`, else the finest-level value.
    pub capacity: f64,
    pub finest_capacity: f64,
    /// Energy at the finest level.
    pub energy: EnergyValue,
    /// Actual node counts per level.
    pub node_counts: Vec<usize>,
    pub level_capacities: Vec<f64>,
    pub extrapolated: bool,
    /// Fitted convergence order when extrapolated.
    pub order: Option<f64>,
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    pub diag: Option<String>,
    pub scheme: Scheme,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

/// Cloud and solver output of one ladder level.
#[derive(Debug, Clone)]
pub struct LevelSolve {
    pub cloud: NodeCloud,
    pub result: EquilibriumResult,
}

pub fn solve_level(
    spec: &SetSpec,
    p: f64,
    target: usize,
    scheme: Scheme,
    cfg: &SolverConfig,
) -> Result<LevelSolve> {
    let exponent = RieszExponent::new(p)?;
    let cloud = discretize(spec, target, resolve_scheme(spec, p, scheme))?;
    let result = solve_equilibrium(exponent, &cloud, cfg)?;
    Ok(LevelSolve { cloud, result })
}

/// Fit c(N) = c∞ + a·N^(−β) through three levels. Returns (c∞, β), or None
/// when the differences are not monotonically shrinking.
pub fn richardson(counts: &[usize], values: &[f64]) -> Option<(f64, f64)> {
    if counts.len() < 3 || counts.len() != values.len() {
        return None;
    }
    let k = counts.len();
    let (n1, n2, n3) = (
        counts[k - 3] as f64,
        counts[k - 2] as f64,
        counts[k - 1] as f64,
    );
    let (c1, c2, c3) = (values[k - 3], values[k - 2], values[k - 1]);
    let (d1, d2) = (c2 - c1, c3 - c2);
    if !(n1 < n2 && n2 < n3) || d1 == 0.0 || d2 == 0.0 || d1.signum() != d2.signum() {
        return None;
    }
    let ratio = d1 / d2;
    if !(ratio > 1.0) {
        return None;
    }
    let model = |b: f64| (n1.powf(-b) - n2.powf(-b)) / (n2.powf(-b) - n3.powf(-b));
    // model is increasing in β; bracket the root on [lo, hi]
    let (mut lo, mut hi) = (1e-3, 6.0);
    if model(lo) > ratio || model(hi) < ratio {
        return None;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if model(mid) < ratio {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let beta = 0.5 * (lo + hi);
    let a = (c3 - c2) / (n3.powf(-beta) - n2.powf(-beta));
    let limit = c3 - a * n3.powf(-beta);
    limit.is_finite().then_some((limit, beta))
}

fn zero_capacity(spec: &SetSpec, p: f64, scheme: Scheme, note: String) -> Result<CapacityResult> {
    let exponent = RieszExponent::new(p)?;
    Ok(CapacityResult {
        p,
        capacity: 0.0,
        finest_capacity: 0.0,
        energy: EnergyValue::plus_infinity(exponent, EnergySource::ClosedForm)?,
        node_counts: Vec::new(),
        level_capacities: Vec::new(),
        extrapolated: false,
        order: None,
        gap: 0.0,
        iterations: 0,
        converged: true,
        diag: None,
        scheme: resolve_scheme(spec, p, scheme),
        note: Some(note),
    })
}

/// Solve at each ladder level and extrapolate the capacities in N.
pub fn estimate_capacity(
    spec: &SetSpec,
    p: f64,
    ladder: &[usize],
    scheme: Scheme,
    cfg: &SolverConfig,
) -> Result<CapacityResult> {
    Ok(estimate_with_levels(spec, p, ladder, scheme, cfg)?.0)
}

/// As [`estimate_capacity`], also returning the finest level's solve.
pub fn estimate_with_levels(
    spec: &SetSpec,
    p: f64,
    ladder: &[usize],
    scheme: Scheme,
    cfg: &SolverConfig,
) -> Result<(CapacityResult, Option<LevelSolve>)> {
    spec.validate()?;
    RieszExponent::new(p)?;
    if ladder.is_empty() {
        return invalid("refinement ladder is empty");
    }
    let ambient = spec.ambient_dim();
    if p >= ambient as f64 {
        let note = format!("capacity vanishes for p >= n = {ambient}");
        return Ok((zero_capacity(spec, p, scheme, note)?, None));
    }
    let own = set_dimension(spec);
    if p >= own as f64 {
        let note = format!("the set has dimension {own}, so its energy is infinite for p >= {own}");
        return Ok((zero_capacity(spec, p, scheme, note)?, None));
    }
    let mut ladder = ladder.to_vec();
    ladder.sort_unstable();
    ladder.dedup();
    let levels: Vec<LevelSolve> = ladder
        .par_iter()
        .map(|&n| solve_level(spec, p, n, scheme, cfg))
        .collect::<Result<_>>()?;
    let counts: Vec<usize> = levels.iter().map(|l| l.cloud.len()).collect();
    let caps: Vec<f64> = levels
        .iter()
        .map(|l| l.result.capacity())
        .collect::<Result<_>>()?;
    let finest = levels.last().expect("nonempty ladder").clone();
    let fit = richardson(&counts, &caps);
    let finest_cap = *caps.last().expect("nonempty");
    let r = &finest.result;
    let result = CapacityResult {
        p,
        capacity: fit.map_or(finest_cap, |f| f.0),
        finest_capacity: finest_cap,
        energy: r.energy,
        node_counts: counts,
        level_capacities: caps,
        extrapolated: fit.is_some(),
        order: fit.map(|f| f.1),
        gap: r.gap,
        iterations: r.iterations,
        converged: r.converged,
        diag: Some(r.diag.to_string()),
        scheme: resolve_scheme(spec, p, scheme),
        note: r
            .non_unique_regime
            .then(|| "equilibrium measures of balls are not unique for p <= -2".to_string()),
    };
    Ok((result, Some(finest)))
}

/// One row of a capacity curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveRow {
    pub p: f64,
    pub capacity: f64,
    /// Finest-level energy; `None` when infinite.
    pub energy: Option<f64>,
    pub gap: f64,
    pub iterations: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub closed_form: Option<f64>,
    pub extrapolated: bool,
}

/// Capacity as a function of p, rows ascending in p.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CurveTable {
    pub set: SetSpec,
    pub scheme: Scheme,
    pub ladder: Vec<usize>,
    pub rows: Vec<CurveRow>,
    /// Finest-level cloud and weights per row, for fixed-weight checks.
    #[serde(skip)]
    pub levels: Vec<Option<LevelSolve>>,
}

pub fn capacity_curve(
    spec: &SetSpec,
    p_grid: &[f64],
    ladder: &[usize],
    scheme: Scheme,
    cfg: &SolverConfig,
) -> Result<CurveTable> {
    if p_grid.windows(2).any(|w| !(w[0] < w[1])) {
        return invalid("p grid must be strictly increasing");
    }
    let solved: Vec<(CapacityResult, Option<LevelSolve>)> = p_grid
        .par_iter()
        .map(|&p| estimate_with_levels(spec, p, ladder, scheme, cfg))
        .collect::<Result<_>>()?;
    let mut rows = Vec::with_capacity(solved.len());
    let mut levels = Vec::with_capacity(solved.len());
    for (r, level) in solved {
        rows.push(CurveRow {
            p: r.p,
            capacity: r.capacity,
            energy: r.energy.value(),
            gap: r.gap,
            iterations: r.iterations,
            n: r.node_counts.last().copied().unwrap_or(0),
            closed_form: closed_form_capacity(spec, r.p),
            extrapolated: r.extrapolated,
        });
        levels.push(level);
    }
    Ok(CurveTable {
        set: spec.clone(),
        scheme,
        ladder: ladder.to_vec(),
        rows,
        levels,
    })
}

/// V_p^(1/p) ≤ V_q^(1/q) for fixed weights and 0 < p < q, with self terms
/// excluded (power-mean inequality for the off-diagonal pair measure).
/// A relative allowance of 1e-12 absorbs rounding.
pub fn jensen_holds(cloud: &NodeCloud, w: &WeightVector, p: f64, q: f64) -> Result<bool> {
    if !(0.0 < p && p < q) {
        return invalid("fixed-weight ordering needs 0 < p < q");
    }
    let vp = cross_energy(RieszExponent::new(p)?, cloud, w)?;
    let vq = cross_energy(RieszExponent::new(q)?, cloud, w)?;
    Ok(match (vp.kind, vq.kind) {
        (EnergyKind::Finite(a), EnergyKind::Finite(b)) => {
            let (lhs, rhs) = (a.powf(1.0 / p), b.powf(1.0 / q));
            lhs <= rhs * (1.0 + 1e-12)
        }
        (_, EnergyKind::PlusInfinity) => true,
        (EnergyKind::PlusInfinity, EnergyKind::Finite(_)) => false,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonotonicityReport {
    pub pass: bool,
    pub slack: f64,
    /// Consecutive (p_i, p_{i+1}, Cap_i, Cap_{i+1}) pairs that increase.
    pub violations: Vec<(f64, f64, f64, f64)>,
    pub jensen_checks: usize,
    pub jensen_failures: usize,
}

/// Consecutive capacities must not increase by more than slack·Cap_i. Rows
/// with 0 < p_i < p_j that carry weights are also checked at fixed weights.
pub fn monotonicity_check(curve: &CurveTable, slack: f64) -> Result<MonotonicityReport> {
    if curve.rows.len() < 2 {
        return invalid("monotonicity needs at least two rows");
    }
    let violations: Vec<_> = curve
        .rows
        .windows(2)
        .filter(|w| w[1].capacity > w[0].capacity + slack * w[0].capacity)
        .map(|w| (w[0].p, w[1].p, w[0].capacity, w[1].capacity))
        .collect();
    let mut checks = 0;
    let mut failures = 0;
    for (i, level) in curve.levels.iter().enumerate() {
        let Some(level) = level else { continue };
        let pi = curve.rows[i].p;
        for row in &curve.rows[i + 1..] {
            if pi > 0.0 {
                checks += 1;
                if !jensen_holds(&level.cloud, &level.result.weights, pi, row.p)? {
                    failures += 1;
                }
            }
        }
    }
    Ok(MonotonicityReport {
        pass: violations.is_empty() && failures == 0,
        slack,
        violations,
        jensen_checks: checks,
        jensen_failures: failures,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiameterRow {
    pub p: f64,
    pub capacity: f64,
    pub diameter: f64,
    pub ratio: f64,
    pub lower_bound: f64,
    pub within_bounds: bool,
    /// Set for one-dimensional sets with p ≤ −1, where Cap = 2^(1/p)·diam.
    pub equality_error: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiameterReport {
    pub rows: Vec<DiameterRow>,
    pub equality_tol: f64,
    pub pass: bool,
    /// Ratios Cap/diam in the order of the p list.
    pub trend: Vec<f64>,
}

/// 2^(1/p) ≤ Cap_p/diam ≤ 1 for p < 0, with equality on the left for
/// one-dimensional sets when p ≤ −1. A relative allowance `equality_tol`
/// applies to both bounds and to the equality.
pub fn diameter_limit_check(
    spec: &SetSpec,
    p_list: &[f64],
    ladder: &[usize],
    scheme: Scheme,
    cfg: &SolverConfig,
    equality_tol: f64,
) -> Result<DiameterReport> {
    if p_list.iter().any(|p| !(*p < 0.0)) {
        return invalid("diameter limits need p < 0");
    }
    let one_dim = spec.ambient_dim() == 1;
    let rows: Vec<DiameterRow> = p_list
        .par_iter()
        .map(|&p| {
            let (res, level) = estimate_with_levels(spec, p, ladder, scheme, cfg)?;
            let diameter = spec
                .diameter()
                .or_else(|| level.as_ref().map(|l| l.cloud.diameter()))
                .unwrap_or(0.0);
            let ratio = res.capacity / diameter;
            let lower = 2f64.powf(1.0 / p);
            let within = ratio >= lower * (1.0 - equality_tol) && ratio <= 1.0 + equality_tol;
            let equality_error = (one_dim && p <= -1.0).then(|| (ratio / lower - 1.0).abs());
            Ok(DiameterRow {
                p,
                capacity: res.capacity,
                diameter,
                ratio,
                lower_bound: lower,
                within_bounds: within,
                equality_error,
            })
        })
        .collect::<Result<_>>()?;
    let pass = rows
        .iter()
        .all(|r| r.within_bounds && r.equality_error.is_none_or(|e| e <= equality_tol));
    let trend = rows.iter().map(|r| r.ratio).collect();
    Ok(DiameterReport {
        rows,
        equality_tol,
        pass,
        trend,
    })
}

/// |S^(n−1)|·Cap^p/(n − p), which tends to the volume as p ↗ n.
pub fn volume_proxy(n: usize, p: f64, capacity: f64) -> Result<f64> {
    Ok(sphere_area(n)? * capacity.powf(p) / (n as f64 - p))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeRow {
    pub p: f64,
    pub capacity: f64,
    pub proxy: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VolumeReport {
    pub n: usize,
    pub rows: Vec<VolumeRow>,
    /// Least-squares line in (n − p) evaluated at n − p = 0.
    pub extrapolated: f64,
    pub reference: Option<f64>,
    pub relative_error: Option<f64>,
    pub warnings: Vec<String>,
}

fn linear_intercept(x: &[f64], y: &[f64]) -> f64 {
    let m = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>() / m, y.iter().sum::<f64>() / m);
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - sx) * (b - sy)).sum();
    let sxx: f64 = x.iter().map(|a| (a - sx) * (a - sx)).sum();
    if sxx == 0.0 {
        return sy;
    }
    sy - sxy / sxx * sx
}

/// Volume as the p ↗ n limit of the capacity proxy, from numerical
/// capacities at `p_sequence` and a linear fit in (n − p).
pub fn volume_limit_estimate(
    spec: &SetSpec,
    p_sequence: &[f64],
    ladder: &[usize],
    scheme: Scheme,
    cfg: &SolverConfig,
) -> Result<VolumeReport> {
    let n = spec.ambient_dim();
    let nf = n as f64;
    if p_sequence.is_empty()
        || p_sequence.windows(2).any(|w| !(w[0] < w[1]))
        || p_sequence.iter().any(|p| *p >= nf)
    {
        return invalid("p sequence must be strictly increasing and below the dimension");
    }
    let caps: Vec<f64> = p_sequence
        .par_iter()
        .map(|&p| estimate_capacity(spec, p, ladder, scheme, cfg).map(|r| r.capacity))
        .collect::<Result<_>>()?;
    volume_report(spec, p_sequence, &caps)
}

/// The same estimate from supplied capacities (e.g. closed forms).
pub fn volume_report(spec: &SetSpec, p_sequence: &[f64], caps: &[f64]) -> Result<VolumeReport> {
    let n = spec.ambient_dim();
    let nf = n as f64;
    let rows: Vec<VolumeRow> = p_sequence
        .iter()
        .zip(caps)
        .map(|(&p, &c)| {
            Ok(VolumeRow {
                p,
                capacity: c,
                proxy: volume_proxy(n, p, c)?,
            })
        })
        .collect::<Result<_>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| nf - r.p).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.proxy).collect();
    let extrapolated = if rows.len() >= 2 {
        linear_intercept(&xs, &ys)
    } else {
        ys[0]
    };
    let reference = spec.lebesgue_measure();
    let mut warnings = Vec::new();
    if p_sequence.iter().any(|p| *p > nf - 0.2) {
        warnings.push(format!(
            "kernel entries span many orders of magnitude for p > {}; numerical solves lose accuracy",
            nf - 0.2
        ));
    }
    Ok(VolumeReport {
        n,
        rows,
        extrapolated,
        relative_error: reference.map(|r| ((extrapolated - r) / r).abs()),
        reference,
        warnings,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogLimitRow {
    pub offset: f64,
    pub left: f64,
    pub right: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LogLimitReport {
    pub log_capacity: f64,
    pub rows: Vec<LogLimitRow>,
    pub tolerance: f64,
    /// |Cap_{−δ} − Cap_0| ≤ tol for every offset.
    pub left_agrees: bool,
    /// Cap_{+δ} ≤ Cap_0 + tol for every offset.
    pub right_below: bool,
    pub pass: bool,
}

/// Cap_p → Cap_0 as p ↗ 0 and lim_{p↘0} Cap_p ≤ Cap_0, checked at ±offsets.
pub fn log_limit_check(
    spec: &SetSpec,
    offsets: &[f64],
    ladder: &[usize],
    scheme: Scheme,
    cfg: &SolverConfig,
    tolerance: f64,
) -> Result<LogLimitReport> {
    if offsets.iter().any(|d| !(*d > 0.0)) {
        return invalid("offsets must be positive");
    }
    let log_capacity = estimate_capacity(spec, 0.0, ladder, scheme, cfg)?.capacity;
    let rows: Vec<LogLimitRow> = offsets
        .par_iter()
        .map(|&d| {
            Ok(LogLimitRow {
                offset: d,
                left: estimate_capacity(spec, -d, ladder, scheme, cfg)?.capacity,
                right: estimate_capacity(spec, d, ladder, scheme, cfg)?.capacity,
            })
        })
        .collect::<Result<_>>()?;
    let left_agrees = rows
        .iter()
        .all(|r| (r.left - log_capacity).abs() <= tolerance);
    let right_below = rows.iter().all(|r| r.right <= log_capacity + tolerance);
    Ok(LogLimitReport {
        log_capacity,
        rows,
        tolerance,
        left_agrees,
        right_below,
        pass: left_agrees && right_below,
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ContinuityTrend {
    pub q: f64,
    pub capacity_at_q: f64,
    pub deltas: Vec<f64>,
    /// |Cap_{q−δ} − Cap_q| per δ.
    pub deviations: Vec<f64>,
    /// Ratios of successive deviations.
    pub ratios: Vec<f64>,
    pub decreasing: bool,
}

/// |Cap_{q−δ} − Cap_q| along a shrinking sequence of δ.
pub fn left_continuity_trend(
    spec: &SetSpec,
    q: f64,
    deltas: &[f64],
    ladder: &[usize],
    scheme: Scheme,
    cfg: &SolverConfig,
) -> Result<ContinuityTrend> {
    if deltas.windows(2).any(|w| !(w[1] < w[0])) || deltas.iter().any(|d| !(*d > 0.0)) {
        return invalid("deltas must be positive and strictly decreasing");
    }
    let at_q = estimate_capacity(spec, q, ladder, scheme, cfg)?.capacity;
    let deviations: Vec<f64> = deltas
        .par_iter()
        .map(|&d| Ok((estimate_capacity(spec, q - d, ladder, scheme, cfg)?.capacity - at_q).abs()))
        .collect::<Result<_>>()?;
    let ratios: Vec<f64> = deviations.windows(2).map(|w| w[1] / w[0]).collect();
    Ok(ContinuityTrend {
        q,
        capacity_at_q: at_q,
        deltas: deltas.to_vec(),
        decreasing: deviations.windows(2).all(|w| w[1] < w[0]),
        deviations,
        ratios,
    })
}

/// Which side(s) of q the continuity check samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Approach {
    Left,
    Both,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EqmDeviation {
    pub delta: f64,
    pub first_moment: f64,
    pub second_moment: f64,
    pub probe_potential: f64,
    /// Largest of the three proxies.
    pub max: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EqmContinuityReport {
    pub q: f64,
    pub node_count: usize,
    pub approach: Approach,
    pub deviations: Vec<EqmDeviation>,
    /// Mean of the equilibrium weights at q, per coordinate.
    pub mean_at_q: Vec<f64>,
    /// Deviations are non-increasing as δ shrinks (up to `floor`).
    pub monotone: bool,
    pub floor: f64,
    pub caveat: String,
}

struct Moments {
    first: Vec<f64>,
    second: Vec<f64>,
}

fn moments(cloud: &NodeCloud, w: &[f64]) -> Moments {
    let d = cloud.dim();
    let mut first = vec![0.0; d];
    let mut second = vec![0.0; d * d];
    for (x, &wi) in cloud.nodes().zip(w) {
        for a in 0..d {
            first[a] += wi * x[a];
            for b in 0..d {
                second[a * d + b] += wi * x[a] * x[b];
            }
        }
    }
    Moments { first, second }
}

/// Five fixed probes outside the convex hull of the cloud.
fn probes(cloud: &NodeCloud) -> Vec<Vec<f64>> {
    let d = cloud.dim();
    let mut center = vec![0.0; d];
    for x in cloud.nodes() {
        center
            .iter_mut()
            .zip(x)
            .for_each(|(c, v)| *c += v / cloud.len() as f64);
    }
    let radius = cloud
        .nodes()
        .map(|x| crate::geometry::dist(x, &center))
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let dirs: [(f64, f64, f64, f64); 5] = [
        (1.5, 0.0, 1.0, 0.0),
        (-1.7, 0.3, 0.8, 0.5),
        (2.0, 1.1, 0.2, 0.9),
        (-2.5, 0.7, 0.4, 0.1),
        (3.0, 0.5, 0.6, 0.7),
    ];
    dirs.iter()
        .map(|&(s, a, b, c)| {
            let mut v = vec![0.0; d];
            v[0] = 1.0;
            let extra = [a, b, c];
            for k in 1..d {
                v[k] = extra[(k - 1) % 3];
            }
            let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            (0..d)
                .map(|k| center[k] + s * radius * v[k] / norm)
                .collect()
        })
        .collect()
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Equilibrium weights on one cloud at q and at q ± δ, compared through
/// moments and through potentials at five probes. The probe potentials all
/// use the kernel of exponent q, so they test the measures against one fixed
/// continuous function. This is a necessary condition for weak-* continuity,
/// not a verification of it.
pub fn eqm_continuity_check(
    spec: &SetSpec,
    q: f64,
    deltas: &[f64],
    node_count: usize,
    scheme: Scheme,
    approach: Approach,
    cfg: &SolverConfig,
) -> Result<EqmContinuityReport> {
    if deltas.windows(2).any(|w| !(w[1] < w[0])) || deltas.iter().any(|d| !(*d > 0.0)) {
        return invalid("deltas must be positive and strictly decreasing");
    }
    let base = solve_level(spec, q, node_count, scheme, cfg)?;
    let cloud = &base.cloud;
    let probe_pts = probes(cloud);
    let probe_kernel = RieszExponent::new(q)?;
    let proxies = |w: &WeightVector| -> Result<(Moments, Vec<f64>)> {
        Ok((
            moments(cloud, w.as_slice()),
            potential_at(probe_kernel, cloud, w, &probe_pts)?,
        ))
    };
    let (m0, u0) = proxies(&base.result.weights)?;
    let mut exps = Vec::new();
    for &d in deltas {
        exps.push((d, q - d));
        if approach == Approach::Both {
            exps.push((d, q + d));
        }
    }
    let solved: Vec<(f64, WeightVector)> = exps
        .par_iter()
        .map(|&(d, p)| {
            Ok((
                d,
                solve_equilibrium(RieszExponent::new(p)?, cloud, cfg)?.weights,
            ))
        })
        .collect::<Result<_>>()?;
    let mut deviations: Vec<EqmDeviation> = Vec::new();
    for (d, w) in &solved {
        let (m, u) = proxies(w)?;
        let first = max_abs_diff(&m.first, &m0.first);
        let second = max_abs_diff(&m.second, &m0.second);
        let pot = max_abs_diff(&u, &u0);
        let dev = EqmDeviation {
            delta: *d,
            first_moment: first,
            second_moment: second,
            probe_potential: pot,
            max: first.max(second).max(pot),
        };
        match deviations.last_mut() {
            Some(last) if last.delta == *d => {
                last.first_moment = last.first_moment.max(dev.first_moment);
                last.second_moment = last.second_moment.max(dev.second_moment);
                last.probe_potential = last.probe_potential.max(dev.probe_potential);
                last.max = last.max.max(dev.max);
            }
            _ => deviations.push(dev),
        }
    }
    let floor = 1e-10;
    let monotone = deviations
        .windows(2)
        .all(|w| w[1].max <= w[0].max.max(floor));
    Ok(EqmContinuityReport {
        q,
        node_count: cloud.len(),
        approach,
        deviations,
        mean_at_q: m0.first,
        monotone,
        floor,
        caveat: "moment and probe-potential agreement is a necessary condition for weak-* \
                 convergence, not a proof of it"
            .into(),
    })
}

/// Classification of the cross energy along a refinement ladder.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PstarClass {
    /// Last two levels agree within 10%.
    Bounded,
    /// Strictly increasing by more than 50% per level.
    Divergent,
    Inconclusive,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PstarReport {
    pub p: f64,
    pub p_star: f64,
    pub node_counts: Vec<usize>,
    pub cross_energies: Vec<f64>,
    pub classification: PstarClass,
    pub caveat: String,
}

pub fn classify_cross_energies(values: &[f64]) -> PstarClass {
    if values.len() < 2 || values.iter().any(|v| !v.is_finite()) {
        return PstarClass::Inconclusive;
    }
    let growth: Vec<f64> = values.windows(2).map(|w| w[1] / w[0]).collect();
    if growth.iter().all(|g| *g > 1.5) {
        return PstarClass::Divergent;
    }
    let k = values.len();
    if ((values[k - 1] - values[k - 2]) / values[k - 2]).abs() <= 0.1 {
        PstarClass::Bounded
    } else {
        PstarClass::Inconclusive
    }
}

/// Energy at exponent p* of the p-equilibrium weights along a refinement
/// ladder. A bounded sequence is numerical evidence that μ_p has finite
/// p*-energy; it does not verify it.
pub fn pstar_hypothesis_probe(
    spec: &SetSpec,
    p: f64,
    p_star: f64,
    ladder: &[usize],
    scheme: Scheme,
    cfg: &SolverConfig,
) -> Result<PstarReport> {
    if !(p_star > p) {
        return invalid("p* must exceed p");
    }
    let star = RieszExponent::new(p_star)?;
    let mut ladder = ladder.to_vec();
    ladder.sort_unstable();
    ladder.dedup();
    let levels: Vec<(usize, f64)> = ladder
        .par_iter()
        .map(|&n| {
            let level = solve_level(spec, p, n, scheme, cfg)?;
            let e = cross_energy(star, &level.cloud, &level.result.weights)?;
            Ok((level.cloud.len(), e.kind.as_f64()))
        })
        .collect::<Result<_>>()?;
    let cross_energies: Vec<f64> = levels.iter().map(|l| l.1).collect();
    Ok(PstarReport {
        p,
        p_star,
        node_counts: levels.iter().map(|l| l.0).collect(),
        classification: classify_cross_energies(&cross_energies),
        cross_energies,
        caveat: "numerical evidence only; boundedness along a finite ladder does not establish \
                 finite p*-energy"
            .into(),
    })
}

/// L1 distance between solved node weights and the exact equilibrium mass
/// of each node's cell, for intervals and for balls or spheres in the
/// regimes where the equilibrium measure is known and unique.
///
/// Interval cells are the Voronoi cells of the nodes. For ball volume
/// clouds, nodes are grouped into rings of equal radius and compared
/// against the radial mass of each shell. For nodes on a sphere the
/// reference is the uniform surface measure split by cell measure.
pub fn equilibrium_l1(spec: &SetSpec, p: f64, cloud: &NodeCloud, w: &WeightVector) -> Option<f64> {
    if w.len() != cloud.len() {
        return None;
    }
    let ws = w.as_slice();
    match spec {
        SetSpec::Interval { a, b } => {
            if p >= 1.0 {
                return None;
            }
            let t: Vec<f64> = cloud
                .nodes()
                .map(|x| (2.0 * x[0] - a - b) / (b - a))
                .collect();
            let mut order: Vec<usize> = (0..t.len()).collect();
            order.sort_by(|&i, &j| t[i].total_cmp(&t[j]));
            let mut l1 = 0.0;
            for (k, &i) in order.iter().enumerate() {
                let lo = if k == 0 {
                    0.0
                } else {
                    interval_equilibrium_cdf(p, 0.5 * (t[order[k - 1]] + t[i])).ok()?
                };
                let hi = if k + 1 == order.len() {
                    1.0
                } else {
                    interval_equilibrium_cdf(p, 0.5 * (t[i] + t[order[k + 1]])).ok()?
                };
                l1 += (ws[i] - (hi - lo)).abs();
            }
            Some(l1)
        }
        SetSpec::Ball {
            dim,
            center,
            radius,
        }
        | SetSpec::Sphere {
            dim,
            center,
            radius,
        } => {
            let n = *dim;
            let regime = BallCapacityRegime::classify(n, p).ok()?;
            if n < 2 || regime == BallCapacityRegime::Antipodal {
                return None;
            }
            let is_sphere = matches!(spec, SetSpec::Sphere { .. });
            if is_sphere && regime == BallCapacityRegime::Volume {
                return None;
            }
            let c = |k: usize| center.get(k).copied().unwrap_or(0.0);
            let r: Vec<f64> = cloud
                .nodes()
                .map(|x| {
                    (x.iter()
                        .enumerate()
                        .map(|(k, v)| (v - c(k)).powi(2))
                        .sum::<f64>())
                    .sqrt()
                        / radius
                })
                .collect();
            let on_sphere = r.iter().all(|v| (v - 1.0).abs() < 1e-9);
            if on_sphere {
                if regime == BallCapacityRegime::Volume {
                    return None;
                }
                let total: f64 = cloud.cell_measures().iter().sum();
                return Some(
                    cloud
                        .cell_measures()
                        .iter()
                        .zip(ws)
                        .map(|(m, wi)| (wi - m / total).abs())
                        .sum(),
                );
            }
            // group by radius
            let mut order: Vec<usize> = (0..r.len()).collect();
            order.sort_by(|&i, &j| r[i].total_cmp(&r[j]));
            let mut rings: Vec<(f64, f64)> = Vec::new();
            for &i in &order {
                match rings.last_mut() {
                    Some((rad, mass)) if (r[i] - *rad).abs() < 1e-9 => *mass += ws[i],
                    _ => rings.push((r[i], ws[i])),
                }
            }
            let cdf = |x: f64| -> Option<f64> {
                match regime {
                    BallCapacityRegime::Volume => ball_equilibrium_radial_cdf(n, p, x).ok(),
                    // all mass on the boundary sphere
                    _ => Some(if x >= 1.0 { 1.0 } else { 0.0 }),
                }
            };
            let mut l1 = 0.0;
            for k in 0..rings.len() {
                let lo = if k == 0 {
                    0.0
                } else {
                    cdf(0.5 * (rings[k - 1].0 + rings[k].0))?
                };
                let hi = if k + 1 == rings.len() {
                    1.0
                } else {
                    cdf(0.5 * (rings[k].0 + rings[k + 1].0))?
                };
                l1 += (rings[k].1 - (hi - lo)).abs();
            }
            Some(l1)
        }
        _ => None,
    }
}

/// Reference p grid for the four-curve ball table: 2^(1/p)-type decay on the
/// left, fine spacing near 0, and points up to just below each n.
pub fn figure1_grid() -> Vec<f64> {
    let mut g: Vec<f64> = (0..=70).map(|k| -6.0 + 0.1 * k as f64).collect();
    g.extend((1..=39).map(|k| 1.0 + 0.075 * k as f64));
    g.push(3.99);
    g.iter_mut().for_each(|p| *p = (*p * 1e6).round() / 1e6);
    g.sort_by(f64::total_cmp);
    g.dedup();
    g
}

/// Closed-form ball capacities for n = 1..4 on a p grid; zero for p ≥ n.
pub fn figure1_table(p_grid: &[f64]) -> Result<Vec<(usize, Vec<f64>)>> {
    (1..=4usize)
        .map(|n| {
            let row = p_grid
                .iter()
                .map(|&p| {
                    if p >= n as f64 {
                        Ok(0.0)
                    } else {
                        crate::closedform::ball_capacity(n, p)
                    }
                })
                .collect::<Result<Vec<_>>>()?;
            Ok((n, row))
        })
        .collect()
}

/// Capacity from an energy, for callers holding raw numbers.
pub fn capacity_of(p: f64, energy: f64) -> Result<f64> {
    capacity_from_energy(RieszExponent::new(p)?, EnergyKind::Finite(energy))
}

/// One line of the closed-form identity suite.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub value: f64,
    pub expected: f64,
    pub error: f64,
    pub tolerance: f64,
    pub pass: bool,
}

fn identity(name: String, value: f64, expected: f64, tolerance: f64) -> IdentityCheck {
    let error = (value - expected).abs() / expected.abs().max(1.0);
    IdentityCheck {
        name,
        value,
        expected,
        error,
        tolerance,
        pass: error <= tolerance,
    }
}

/// Closed-form self-consistency: one-sided limits of the ball capacity at
/// every regime boundary, A(n,n)·m_n(B^n)² = |S^(n−1)|, and the table values
/// at p = 0 and p = −2, for n = 1..4.
pub fn closed_form_suite() -> Result<Vec<IdentityCheck>> {
    // linear extrapolation from one side; error O(h²)
    fn side(n: usize, b: f64, dir: f64) -> Result<f64> {
        let h = 1e-6;
        Ok(2.0 * ball_capacity(n, b + dir * h)? - ball_capacity(n, b + 2.0 * dir * h)?)
    }
    let mut out = Vec::new();
    for n in 1..=4usize {
        let nf = n as f64;
        let mut bounds = vec![0.0, if n == 1 { -1.0 } else { -2.0 }];
        if n > 2 {
            bounds.push(nf - 2.0);
        }
        for b in bounds {
            let at = ball_capacity(n, b)?;
            out.push(identity(
                format!("n={n} p={b}: left limit"),
                side(n, b, -1.0)?,
                at,
                1e-9,
            ));
            out.push(identity(
                format!("n={n} p={b}: right limit"),
                side(n, b, 1.0)?,
                at,
                1e-9,
            ));
        }
        let a = gotz_constant(nf, n)? * ball_volume(n)?.powi(2);
        out.push(identity(
            format!("A({n},{n})·m_{n}(B^{n})² = |S^{}|", n - 1),
            a,
            sphere_area(n)?,
            1e-12,
        ));
    }
    let log_values = [0.5, 1.0, 2.0 / std::f64::consts::E.sqrt(), 0.25f64.exp()];
    for (n, want) in (1..=4).zip(log_values) {
        out.push(identity(
            format!("Cap_0(B^{n})"),
            ball_capacity(n, 0.0)?,
            want,
            1e-12,
        ));
    }
    out.push(identity(
        "Cap_-1([-1,1])".into(),
        interval_capacity(-1.0)?,
        1.0,
        1e-12,
    ));
    for n in 2..=4 {
        out.push(identity(
            format!("Cap_-2(B^{n})"),
            ball_capacity(n, -2.0)?,
            2f64.sqrt(),
            1e-12,
        ));
    }
    out.push(identity(
        "Cap_1(B^3)".into(),
        ball_capacity(3, 1.0)?,
        1.0,
        1e-12,
    ));
    out.push(identity(
        "Cap_1(B^2)".into(),
        ball_capacity(2, 1.0)?,
        2.0 / std::f64::consts::PI,
        1e-12,
    ));
    Ok(out)
}
