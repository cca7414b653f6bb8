//! Equilibrium weights on a node cloud: extremize wᵀKw over the probability
//! simplex with Frank–Wolfe plus away steps.
//!
//! The objective is quadratic, so the line search along a vertex direction
//! is solved in closed form. For p < 0 the energy is maximized, which is
//! run as minimization of −wᵀKw. The potential U = Kw is updated in O(N)
//! per step from a single kernel row and refreshed from scratch
//! periodically.

use serde::{Deserialize, Serialize};

use crate::energy::{energy_value, DiagonalMode, KernelMatrix, WeightVector};
use crate::error::{invalid, Error, Result};
use crate::geometry::NodeCloud;
use crate::kernel::{EnergySource, EnergyValue, RieszExponent};

/// Starting point of the iteration.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialWeights {
    Uniform,
    #[default]
    CellProportional,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// Relative tolerance on the duality gap: stop when gap ≤ gap_tol·(1+|E|).
    pub gap_tol: f64,
    pub diag: DiagonalMode,
    pub init: InitialWeights,
    /// Keep the energy after every iteration.
    pub record_trace: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_iters: 5000,
            gap_tol: 1e-8,
            diag: DiagonalMode::Auto,
            init: InitialWeights::CellProportional,
            record_trace: false,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters < 1 {
            return invalid("max_iters must be at least 1");
        }
        if !(self.gap_tol > 0.0) || !self.gap_tol.is_finite() {
            return invalid(format!("gap_tol must be positive, got {}", self.gap_tol));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EquilibriumResult {
    pub weights: WeightVector,
    pub energy: EnergyValue,
    /// Frank–Wolfe duality gap at termination.
    pub gap: f64,
    pub iterations: usize,
    pub converged: bool,
    /// The concrete diagonal treatment that was used.
    pub diag: DiagonalMode,
    /// Set when p ≤ −2, where maximizers on balls are not unique.
    pub non_unique_regime: bool,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub trace: Vec<f64>,
}

impl EquilibriumResult {
    pub fn capacity(&self) -> Result<f64> {
        self.energy.capacity()
    }
}

const REFRESH_EVERY: usize = 256;

fn initial(cloud: &NodeCloud, init: InitialWeights) -> Result<Vec<f64>> {
    Ok(match init {
        InitialWeights::Uniform => WeightVector::uniform(cloud.len())?,
        InitialWeights::CellProportional => WeightVector::from_cell_measures(cloud)?,
    }
    .into_inner())
}

/// Duality gap 2(E − min U) in the minimization frame.
fn gap_of(u: &[f64], e: f64) -> f64 {
    let umin = u.iter().copied().fold(f64::INFINITY, f64::min);
    (2.0 * (e - umin)).max(0.0)
}

/// Lowest index attaining the minimum of `u` (optionally over a subset).
fn argmin(u: &[f64]) -> usize {
    let mut best = 0;
    for i in 1..u.len() {
        if u[i] < u[best] {
            best = i;
        }
    }
    best
}

/// Minimize (p ≥ 0) or maximize (p < 0) the discrete energy over the simplex.
pub fn solve_equilibrium(
    p: RieszExponent,
    cloud: &NodeCloud,
    cfg: &SolverConfig,
) -> Result<EquilibriumResult> {
    cfg.validate()?;
    let n = cloud.len();
    if n < 2 {
        return invalid("the solver needs at least 2 nodes");
    }
    let kernel = KernelMatrix::new(p, cloud, cfg.diag)?;
    let sign = if p.maximizes() { -1.0 } else { 1.0 };
    let mut w = initial(cloud, cfg.init)?;
    // everything below is in the minimization frame: U = sign·K·w, E = wᵀU
    let refresh = |w: &[f64]| -> (Vec<f64>, f64) {
        let mut u = kernel.apply(w);
        u.iter_mut().for_each(|x| *x *= sign);
        let e = u.iter().zip(w).map(|(a, b)| a * b).sum();
        (u, e)
    };
    let (mut u, mut e) = refresh(&w);
    let mut trace = Vec::new();
    if cfg.record_trace {
        trace.push(sign * e);
    }
    let mut gap = gap_of(&u, e);
    let mut iterations = 0;
    let mut converged = gap <= cfg.gap_tol * (1.0 + e.abs());
    while !converged && iterations < cfg.max_iters {
        iterations += 1;
        let s = argmin(&u);
        // away vertex: largest potential on the support, lowest index on ties
        let mut a = usize::MAX;
        for i in 0..n {
            if w[i] > 0.0 && (a == usize::MAX || u[i] > u[a]) {
                a = i;
            }
        }
        let fw_gain = e - u[s];
        let away_gain = u[a] - e;
        let (target, toward, gmax) = if fw_gain >= away_gain || w[a] >= 1.0 {
            (s, true, 1.0)
        } else {
            (a, false, w[a] / (1.0 - w[a]))
        };
        let kt = sign * kernel.get(target, target);
        // f(γ) = E + 2γ·slope + γ²·curv along d = ±(e_t − w)
        let (slope, curv) = if toward {
            (u[target] - e, kt - 2.0 * u[target] + e)
        } else {
            (e - u[target], e - 2.0 * u[target] + kt)
        };
        let mut gamma = if curv > 0.0 { -slope / curv } else { gmax };
        gamma = gamma.clamp(0.0, gmax);
        if !(gamma > 0.0) {
            // no descent along the chosen direction: certified by the gap
            break;
        }
        let row = kernel.row(target);
        if toward {
            for i in 0..n {
                w[i] *= 1.0 - gamma;
                u[i] = (1.0 - gamma) * u[i] + gamma * sign * row[i];
            }
            w[target] += gamma;
            if gamma >= 1.0 {
                w.iter_mut().for_each(|x| *x = 0.0);
                w[target] = 1.0;
            }
        } else {
            for i in 0..n {
                w[i] *= 1.0 + gamma;
                u[i] = (1.0 + gamma) * u[i] - gamma * sign * row[i];
            }
            w[target] -= gamma;
            if gamma >= gmax {
                w[target] = 0.0;
            }
        }
        e += 2.0 * gamma * slope + gamma * gamma * curv;
        if iterations % REFRESH_EVERY == 0 {
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|x| *x = (*x / total).max(0.0));
            (u, e) = refresh(&w);
        }
        if cfg.record_trace {
            trace.push(sign * e);
        }
        gap = gap_of(&u, e);
        converged = gap <= cfg.gap_tol * (1.0 + e.abs());
    }
    let weights = WeightVector::normalized(w)?;
    let (u, e) = refresh(weights.as_slice());
    gap = gap_of(&u, e);
    converged = gap <= cfg.gap_tol * (1.0 + e.abs());
    let support = weights.support(0.0);
    if support.len() == 1 && !p.maximizes() && kernel.diag() == DiagonalMode::Exclude {
        return Err(Error::Degenerate(format!(
            "minimization at p = {p} without self-interaction collapsed onto node {}; \
             use a self-cell diagonal",
            support[0]
        )));
    }
    let energy = energy_value(
        p,
        &kernel,
        weights.as_slice(),
        sign * e,
        EnergySource::DirectSum,
    )?;
    Ok(EquilibriumResult {
        weights,
        energy,
        gap,
        iterations,
        converged,
        diag: kernel.diag(),
        non_unique_regime: p.value() <= -2.0,
        trace,
    })
}

/// Frank–Wolfe duality gap of weights w: 2(E − min U) when minimizing and
/// 2(max U − E) when maximizing.
pub fn optimality_gap(
    p: RieszExponent,
    cloud: &NodeCloud,
    w: &WeightVector,
    diag: DiagonalMode,
) -> Result<f64> {
    if w.len() != cloud.len() {
        return invalid("weight length does not match the cloud");
    }
    let kernel = KernelMatrix::new(p, cloud, diag)?;
    let u = kernel.apply(w.as_slice());
    let e: f64 = u.iter().zip(w.as_slice()).map(|(a, b)| a * b).sum();
    let g = if p.maximizes() {
        let umax = u.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        2.0 * (umax - e)
    } else {
        let umin = u.iter().copied().fold(f64::INFINITY, f64::min);
        2.0 * (e - umin)
    };
    Ok(g.max(0.0))
}
