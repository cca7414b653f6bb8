//! Explicit capacities, equilibrium densities and constants for balls and
//! intervals, plus sphere areas and ball volumes.
//!
//! Gamma ratios raised to the power 1/p are evaluated in log space. Where p
//! is small the log-gamma differences are written as averages of the
//! digamma function, so the 0/0 in log(ratio)/p cancels analytically.

use std::f64::consts::{LN_2, PI};

use serde::{Deserialize, Serialize};
use statrs::function::beta::checked_beta_reg;

use crate::error::{Error, Result};
use crate::specfun::{beta, digamma, log_gamma};

fn domain(func: &'static str, arg: f64, reason: &'static str) -> Error {
    Error::Domain { func, arg, reason }
}

/// |S^(n−1)| = 2π^(n/2)/Γ(n/2).
pub fn sphere_area(n: usize) -> Result<f64> {
    if n < 1 {
        return Err(domain("sphere_area", n as f64, "requires n >= 1"));
    }
    let h = n as f64 / 2.0;
    Ok(2.0 * (h * PI.ln() - log_gamma(h)?).exp())
}

/// m_n(B^n) = |S^(n−1)|/n.
pub fn ball_volume(n: usize) -> Result<f64> {
    Ok(sphere_area(n)? / n as f64)
}

// 8-point Gauss–Legendre rule on [0, 1].
const GL_NODES: [f64; 4] = [
    0.183_434_642_495_649_8,
    0.525_532_409_916_329,
    0.796_666_477_413_626_7,
    0.960_289_856_497_536_3,
];
const GL_WEIGHTS: [f64; 4] = [
    0.362_683_783_378_362,
    0.313_706_645_877_887_3,
    0.222_381_034_453_374_5,
    0.101_228_536_290_376_3,
];

/// (log Γ(a + h) − log Γ(a))/h, continuous at h = 0 where it equals ψ(a).
fn lgamma_slope(a: f64, h: f64) -> Result<f64> {
    if h.abs() > 0.02 {
        return Ok((log_gamma(a + h)? - log_gamma(a)?) / h);
    }
    // mean of ψ over [a, a + h]
    let mut acc = 0.0;
    for (x, w) in GL_NODES.iter().zip(GL_WEIGHTS) {
        let lo = 0.5 - 0.5 * x;
        let hi = 0.5 + 0.5 * x;
        acc += 0.5 * w * (digamma(a + lo * h)? + digamma(a + hi * h)?);
    }
    Ok(acc)
}

/// Regime cells of the ball capacity formula. For n = 1 the cells are
/// p ≤ −1, p = 0 and −1 < p < 1 (reported as `Volume`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BallCapacityRegime {
    /// p ≤ −2 (p ≤ −1 on the interval): the maximizer sits on antipodal points.
    Antipodal,
    /// p = 0.
    Logarithmic,
    /// −2 < p ≤ n − 2, p ≠ 0: uniform surface measure.
    Surface,
    /// n − 2 < p < n: absolutely continuous volume density.
    Volume,
}

impl BallCapacityRegime {
    pub fn classify(n: usize, p: f64) -> Result<Self> {
        if n < 1 {
            return Err(domain("ball_capacity", n as f64, "requires n >= 1"));
        }
        let nf = n as f64;
        if !p.is_finite() || p >= nf {
            return Err(domain("ball_capacity", p, "requires finite p < n"));
        }
        let low = if n == 1 { -1.0 } else { -2.0 };
        Ok(if p <= low {
            Self::Antipodal
        } else if p == 0.0 {
            Self::Logarithmic
        } else if n >= 2 && p <= nf - 2.0 {
            Self::Surface
        } else {
            Self::Volume
        })
    }
}

/// log of the capacity of the unit ball in R^n.
fn log_ball_capacity(n: usize, p: f64) -> Result<f64> {
    let nf = n as f64;
    let lc = match BallCapacityRegime::classify(n, p)? {
        BallCapacityRegime::Antipodal => (1.0 + 1.0 / p) * LN_2,
        BallCapacityRegime::Logarithmic if n == 1 => -LN_2,
        BallCapacityRegime::Logarithmic => {
            LN_2 + 0.5 * (digamma((nf - 1.0) / 2.0)? - digamma(nf - 1.0)?)
        }
        BallCapacityRegime::Surface => {
            // log[Γ(n−1−p/2)Γ((n−1)/2) / (Γ((n−1−p)/2)Γ(n−1))] / p
            let h = -p / 2.0;
            LN_2 - 0.5 * (lgamma_slope(nf - 1.0, h)? - lgamma_slope((nf - 1.0) / 2.0, h)?)
        }
        BallCapacityRegime::Volume => {
            // log[Γ(n/2) / (Γ((n−p)/2)Γ(1+p/2))] / p
            0.5 * (lgamma_slope(nf / 2.0, -p / 2.0)? - lgamma_slope(1.0, p / 2.0)?)
        }
    };
    Ok(lc)
}

/// Riesz p-capacity of the closed unit ball in R^n, p < n. For n = 1 this
/// is the capacity of [−1, 1].
pub fn ball_capacity(n: usize, p: f64) -> Result<f64> {
    Ok(log_ball_capacity(n, p)?.exp())
}

/// Riesz p-capacity of [−1, 1] for p < 1.
pub fn interval_capacity(p: f64) -> Result<f64> {
    if !p.is_finite() || p >= 1.0 {
        return Err(domain("interval_capacity", p, "requires finite p < 1"));
    }
    ball_capacity(1, p)
}

/// Equilibrium density of the unit ball at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "value")]
pub enum EquilibriumDensity {
    /// Density with respect to (n−1)-dimensional surface area; zero off the
    /// unit sphere.
    Surface(f64),
    /// Density with respect to n-dimensional Lebesgue measure.
    Volume(f64),
}

impl EquilibriumDensity {
    pub fn value(self) -> f64 {
        match self {
            Self::Surface(v) | Self::Volume(v) => v,
        }
    }
}

const SPHERE_TOL: f64 = 1e-12;

/// Equilibrium density of the closed unit ball in R^n at x, in the regimes
/// where the equilibrium measure is unique (−2 < p < n). For n = 1 the
/// interval density is returned for −1 < p < 1.
pub fn ball_equilibrium_density(n: usize, p: f64, x: &[f64]) -> Result<EquilibriumDensity> {
    if x.len() != n {
        return Err(Error::InvalidInput(format!(
            "point has {} coordinates, expected {n}",
            x.len()
        )));
    }
    let r2: f64 = x.iter().map(|v| v * v).sum();
    if r2 > 1.0 + SPHERE_TOL {
        return Err(domain(
            "ball_equilibrium_density",
            r2.sqrt(),
            "requires |x| <= 1",
        ));
    }
    let regime = BallCapacityRegime::classify(n, p)?;
    if n == 1 {
        return match regime {
            BallCapacityRegime::Antipodal => Err(Error::Unsupported(format!(
                "p = {p}: the interval equilibrium measure is the endpoint measure (δ₋₁ + δ₊₁)/2"
            ))),
            _ => Ok(EquilibriumDensity::Volume(interval_equilibrium_density(
                p,
                x[0].clamp(-1.0, 1.0),
            )?)),
        };
    }
    let area = sphere_area(n)?;
    match regime {
        BallCapacityRegime::Antipodal => Err(Error::NonUnique {
            p,
            description:
                "every antipodal pair measure (δ₋ξ + δ₊ξ)/2 with |ξ| = 1 is an equilibrium measure"
                    .into(),
        }),
        BallCapacityRegime::Logarithmic | BallCapacityRegime::Surface => {
            let on_sphere = (r2 - 1.0).abs() <= SPHERE_TOL;
            Ok(EquilibriumDensity::Surface(if on_sphere {
                1.0 / area
            } else {
                0.0
            }))
        }
        BallCapacityRegime::Volume => {
            let nf = n as f64;
            let b = (p - nf + 2.0) / 2.0;
            let c = 2.0 / (area * beta(nf / 2.0, b)?);
            Ok(EquilibriumDensity::Volume(
                c * (1.0 - r2.min(1.0)).powf(-(nf - p) / 2.0),
            ))
        }
    }
}

/// Equilibrium density of [−1, 1] for −1 < p < 1:
/// (1 − x²)^(−(1−p)/2) / B(1/2, (1+p)/2).
pub fn interval_equilibrium_density(p: f64, x: f64) -> Result<f64> {
    if !(p > -1.0 && p < 1.0) {
        return Err(domain(
            "interval_equilibrium_density",
            p,
            "requires -1 < p < 1",
        ));
    }
    if !(x.abs() < 1.0) {
        return Err(domain(
            "interval_equilibrium_density",
            x,
            "requires |x| < 1",
        ));
    }
    Ok((1.0 - x * x).powf(-(1.0 - p) / 2.0) / beta(0.5, (1.0 + p) / 2.0)?)
}

fn reg_beta(a: f64, b: f64, x: f64) -> Result<f64> {
    checked_beta_reg(a, b, x.clamp(0.0, 1.0))
        .map_err(|e| Error::InvalidInput(format!("regularized beta({a}, {b}, {x}): {e}")))
}

/// Equilibrium mass of [−1, x] for the interval [−1, 1], p < 1.
pub fn interval_equilibrium_cdf(p: f64, x: f64) -> Result<f64> {
    if !p.is_finite() || p >= 1.0 {
        return Err(domain(
            "interval_equilibrium_cdf",
            p,
            "requires finite p < 1",
        ));
    }
    if x < -1.0 {
        return Ok(0.0);
    }
    if x >= 1.0 {
        return Ok(1.0);
    }
    if p <= -1.0 {
        // endpoint measure
        return Ok(0.5);
    }
    let half = 0.5 * reg_beta(0.5, (1.0 + p) / 2.0, x * x)?;
    Ok(if x < 0.0 { 0.5 - half } else { 0.5 + half })
}

/// Equilibrium mass of the closed ball of radius r ≤ 1 about the origin, for
/// the unit ball in R^n (n ≥ 2) in the unique regimes.
pub fn ball_equilibrium_radial_cdf(n: usize, p: f64, r: f64) -> Result<f64> {
    if n < 2 {
        return Err(Error::InvalidInput("radial mass requires n >= 2".into()));
    }
    match BallCapacityRegime::classify(n, p)? {
        BallCapacityRegime::Antipodal => Err(Error::NonUnique {
            p,
            description: "antipodal pair measures are all maximizers".into(),
        }),
        _ if r >= 1.0 => Ok(1.0),
        _ if r < 0.0 => Ok(0.0),
        BallCapacityRegime::Volume => {
            let nf = n as f64;
            reg_beta(nf / 2.0, (p - nf + 2.0) / 2.0, r * r)
        }
        _ => Ok(0.0),
    }
}

/// The constant A(p, n) of the spatial energy characterization, p > 0.
pub fn gotz_constant(p: f64, n: usize) -> Result<f64> {
    if !(p > 0.0) || !p.is_finite() {
        return Err(domain("gotz_constant", p, "requires finite p > 0"));
    }
    if n < 1 {
        return Err(domain("gotz_constant", n as f64, "requires n >= 1"));
    }
    if n == 1 {
        return Ok(p * (p + 1.0) / 2f64.powf(p + 1.0));
    }
    let h = (n as f64 + 1.0) / 2.0;
    // Γ((n+1)/2) cancels against the numerator of the beta function
    let log_inv = p * LN_2 - p.ln() + (h - 1.0) * PI.ln() + log_gamma((p + 1.0) / 2.0)?
        - log_gamma(h + (p + 1.0) / 2.0)?;
    Ok((-log_inv).exp())
}

/// Closed-form capacity of a set spec when one is known: balls, intervals,
/// spheres for p ≤ n − 2 (where the ball's equilibrium measure lives on the
/// sphere), two-point sets, and the zero-capacity cases p ≥ dimension.
pub fn closed_form_capacity(spec: &crate::geometry::SetSpec, p: f64) -> Option<f64> {
    use crate::geometry::SetSpec;
    match spec {
        SetSpec::Ball { dim, radius, .. } => {
            if p >= *dim as f64 {
                Some(0.0)
            } else {
                ball_capacity(*dim, p).ok().map(|c| radius * c)
            }
        }
        SetSpec::Sphere { dim, radius, .. } => {
            let n = *dim as f64;
            if p >= n - 1.0 {
                Some(0.0)
            } else if p <= n - 2.0 {
                ball_capacity(*dim, p).ok().map(|c| radius * c)
            } else {
                None
            }
        }
        SetSpec::Interval { a, b } => {
            if p >= 1.0 {
                Some(0.0)
            } else {
                interval_capacity(p).ok().map(|c| 0.5 * (b - a) * c)
            }
        }
        SetSpec::Points { coords } => {
            if p >= 0.0 || coords.len() == 1 {
                Some(0.0)
            } else if coords.len() == 2 {
                spec.diameter().map(|d| 2f64.powf(1.0 / p) * d)
            } else {
                None
            }
        }
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SetSpec;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn areas_and_volumes() {
        assert!(rel(sphere_area(1).unwrap(), 2.0) < 1e-15);
        assert!(rel(sphere_area(2).unwrap(), 2.0 * PI) < 1e-15);
        assert!(rel(sphere_area(3).unwrap(), 4.0 * PI) < 1e-15);
        assert!(rel(ball_volume(1).unwrap(), 2.0) < 1e-15);
        assert!(rel(ball_volume(2).unwrap(), PI) < 1e-15);
        assert!(rel(ball_volume(3).unwrap(), 4.0 * PI / 3.0) < 1e-15);
        assert!(sphere_area(0).is_err());
    }

    #[test]
    fn ball_capacity_known_values() {
        assert!(rel(ball_capacity(3, 1.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(ball_capacity(2, 1.0).unwrap(), 2.0 / PI) < 1e-14);
        assert!(rel(ball_capacity(3, 0.0).unwrap(), 2.0 / 0.5f64.exp()) < 1e-14);
        assert!(rel(ball_capacity(4, 0.0).unwrap(), 0.25f64.exp()) < 1e-14);
        assert!(rel(ball_capacity(2, 0.0).unwrap(), 1.0) < 1e-14);
        assert!(rel(ball_capacity(3, -1.0).unwrap(), 4.0 / 3.0) < 1e-14);
        for n in 2..=6 {
            assert!(rel(ball_capacity(n, -2.0).unwrap(), 2f64.sqrt()) < 1e-14);
        }
        // Newtonian capacity of the unit ball is 1 in every dimension ≥ 3.
        for n in 3..=8 {
            assert!(rel(ball_capacity(n, n as f64 - 2.0).unwrap(), 1.0) < 1e-13);
        }
        // disk: π/(Γ(2−p/2)Γ(1+p/2)) = Cap^p·... written as a sinc-type ratio
        let p: f64 = 1.5;
        let want = (1.0
            / (crate::specfun::gamma(1.0 - p / 2.0).unwrap()
                * crate::specfun::gamma(1.0 + p / 2.0).unwrap()))
        .powf(1.0 / p);
        assert!(rel(ball_capacity(2, p).unwrap(), want) < 1e-13);
        assert!(ball_capacity(3, 3.0).is_err());
    }

    #[test]
    fn interval_capacity_values() {
        assert!(rel(interval_capacity(-1.0).unwrap(), 1.0) < 1e-15);
        assert_eq!(interval_capacity(0.0).unwrap(), 0.5);
        assert!(rel(interval_capacity(-3.0).unwrap(), 2f64.powf(2.0 / 3.0)) < 1e-14);
        // the branch is continuous at 0 with slope ≈ −0.41, so at ±1e-4 it
        // sits 4.1e-5 away from 1/2; references from a 30-digit evaluation
        for (p, want) in [
            (1e-4, 0.499_958_876_836_829_645),
            (-1e-4, 0.500_041_123_540_288_201),
            (1e-6, 0.499_999_588_766_502_144),
        ] {
            assert!(rel(interval_capacity(p).unwrap(), want) < 1e-13, "p={p}");
        }
        assert!((interval_capacity(1e-6).unwrap() - 0.5).abs() < 1e-6);
        assert!(interval_capacity(1.0).is_err());
        assert_eq!(
            ball_capacity(1, -0.3).unwrap(),
            interval_capacity(-0.3).unwrap()
        );
    }

    #[test]
    fn regimes_partition() {
        use BallCapacityRegime::*;
        assert_eq!(BallCapacityRegime::classify(3, -2.0).unwrap(), Antipodal);
        assert_eq!(BallCapacityRegime::classify(3, 0.0).unwrap(), Logarithmic);
        assert_eq!(BallCapacityRegime::classify(3, 1.0).unwrap(), Surface);
        assert_eq!(BallCapacityRegime::classify(3, 1.5).unwrap(), Volume);
        assert_eq!(BallCapacityRegime::classify(2, 0.5).unwrap(), Volume);
        assert_eq!(BallCapacityRegime::classify(1, -1.0).unwrap(), Antipodal);
        assert_eq!(BallCapacityRegime::classify(1, -0.5).unwrap(), Volume);
        assert!(BallCapacityRegime::classify(2, 2.0).is_err());
    }

    /// One-sided limit estimate from two samples on the same side.
    fn side_limit(f: impl Fn(f64) -> f64, b: f64, dir: f64) -> f64 {
        let e = 1e-6;
        2.0 * f(b + dir * e) - f(b + 2.0 * dir * e)
    }

    #[test]
    fn continuity_across_regime_boundaries() {
        for n in 1..=6usize {
            let f = |p: f64| ball_capacity(n, p).unwrap();
            let mut bounds = vec![0.0];
            if n >= 2 {
                bounds.push(-2.0);
                if n > 2 {
                    bounds.push(n as f64 - 2.0);
                }
            } else {
                bounds.push(-1.0);
            }
            for b in bounds {
                let left = side_limit(f, b, -1.0);
                let right = side_limit(f, b, 1.0);
                assert!(
                    (left - right).abs() <= 1e-9,
                    "n={n} p={b}: {left} vs {right}"
                );
                assert!((left - f(b)).abs() <= 1e-9, "n={n} p={b}");
            }
        }
    }

    #[test]
    fn strictly_decreasing_in_p() {
        for n in 1..=4usize {
            let lo = -6.0;
            let hi = n as f64 - 1e-3;
            let mut prev = f64::INFINITY;
            for k in 0..200 {
                let p = lo + (hi - lo) * k as f64 / 199.0;
                let c = ball_capacity(n, p).unwrap();
                assert!(c < prev, "n={n} p={p}");
                prev = c;
            }
        }
    }

    #[test]
    fn envelope_in_dimension() {
        let s2 = 2f64.sqrt();
        for p in [-1.0, 0.0, 1.0] {
            let mut prev = 0.0;
            for n in [2usize, 4, 8, 16, 32, 64, 128, 256] {
                let c = ball_capacity(n, p).unwrap();
                assert!(c >= prev && c < s2 + 1e-3, "p={p} n={n}: {c}");
                prev = c;
            }
        }
    }

    #[test]
    fn diameter_endpoint() {
        for n in 1..=4 {
            let c = ball_capacity(n, -50.0).unwrap();
            assert!((2.0 - c).abs() <= 2.0 * (1.0 - 2f64.powf(-1.0 / 50.0)) + 1e-12);
        }
    }

    #[test]
    fn volume_endpoint() {
        for n in [2usize, 3] {
            let p = n as f64 - 0.01;
            let v = sphere_area(n).unwrap() * ball_capacity(n, p).unwrap().powf(p) / (n as f64 - p);
            assert!(rel(v, ball_volume(n).unwrap()) <= 0.01, "n={n}: {v}");
        }
    }

    #[test]
    fn densities() {
        let d = ball_equilibrium_density(3, 1.0, &[0.0, 0.0, 1.0]).unwrap();
        assert!(matches!(d, EquilibriumDensity::Surface(v) if rel(v, 1.0 / (4.0 * PI)) < 1e-14));
        let d = ball_equilibrium_density(2, 1.0, &[0.0, 0.0]).unwrap();
        assert!(rel(d.value(), 1.0 / (2.0 * PI)) < 1e-14);
        let near = ball_equilibrium_density(2, 1.0, &[0.999_999, 0.0])
            .unwrap()
            .value();
        let expect = (1.0 / (2.0 * PI)) * (1.0 - 0.999_999f64.powi(2)).powf(-0.5);
        assert!(rel(near, expect) < 1e-9);
        assert!(matches!(
            ball_equilibrium_density(3, -2.5, &[0.0; 3]),
            Err(Error::NonUnique { .. })
        ));
        assert!(ball_equilibrium_density(2, 1.0, &[1.0, 0.5]).is_err());

        assert!(rel(interval_equilibrium_density(0.0, 0.0).unwrap(), 1.0 / PI) < 1e-14);
        let want = 1.0 / beta(0.5, 0.75).unwrap();
        assert!(rel(interval_equilibrium_density(0.5, 0.0).unwrap(), want) < 1e-14);
        assert!(interval_equilibrium_density(0.0, 1.0).is_err());
        assert!(interval_equilibrium_density(1.0, 0.0).is_err());
    }

    #[test]
    fn volume_density_normalizes() {
        // With t = |x|² and 1 − t = z^(1/b), b = (p − n + 2)/2, the radial
        // integral becomes (|S|/2)·∫₀¹ ρ·(1 − t)^(1−b) t^(n/2−1) dz/b.
        for (n, p) in [(2usize, 0.5), (2, 1.0), (2, 1.5), (3, 1.5), (3, 2.5)] {
            let nf = n as f64;
            let b = (p - nf + 2.0) / 2.0;
            let area = sphere_area(n).unwrap();
            let m = 2_000;
            let mut total = 0.0;
            for k in 0..m {
                let z = (k as f64 + 0.5) / m as f64;
                let mut x = vec![0.0; n];
                x[0] = (1.0 - z.powf(1.0 / b)).sqrt();
                let t = x[0] * x[0];
                let rho = ball_equilibrium_density(n, p, &x).unwrap().value();
                total += 0.5 * area * rho * (1.0 - t).powf(1.0 - b) * t.powf(nf / 2.0 - 1.0)
                    / b
                    / m as f64;
            }
            assert!((total - 1.0).abs() < 1e-3, "n={n} p={p}: {total}");
            assert_eq!(ball_equilibrium_radial_cdf(n, p, 1.0).unwrap(), 1.0);
            let half = ball_equilibrium_radial_cdf(n, p, 0.5).unwrap();
            assert!(half > 0.0 && half < 1.0);
        }
    }

    #[test]
    fn arcsine_density_integrates_to_one() {
        // x = sin θ turns the arcsine density into the constant 1/π.
        let m = 4000;
        let mut total = 0.0;
        for k in 0..m {
            let t = -PI / 2.0 + (k as f64 + 0.5) / m as f64 * PI;
            total += interval_equilibrium_density(0.0, t.sin()).unwrap() * t.cos() * PI / m as f64;
        }
        assert!((total - 1.0).abs() < 1e-8);
        let c = interval_equilibrium_cdf(0.0, 0.5).unwrap();
        assert!((c - (0.5 + 0.5f64.asin() / PI)).abs() < 1e-12);
    }

    #[test]
    fn gotz_constant_values() {
        assert!(rel(gotz_constant(1.0, 1).unwrap(), 0.5) < 1e-15);
        assert!(rel(gotz_constant(2.0, 2).unwrap(), 2.0 / PI) < 1e-14);
        for n in 1..=4usize {
            let lhs = gotz_constant(n as f64, n).unwrap() * ball_volume(n).unwrap().powi(2);
            assert!(rel(lhs, sphere_area(n).unwrap()) < 1e-12, "n={n}");
        }
        // the n ≥ 2 formula reduces to the n = 1 one
        for p in [0.3, 1.0, 2.7] {
            let h: f64 = 1.0;
            let inv = 2f64.powf(p) / p * PI.powf(h - 1.0) / crate::specfun::gamma(h).unwrap()
                * beta(h, (p + 1.0) / 2.0).unwrap();
            assert!(rel(gotz_constant(p, 1).unwrap(), 1.0 / inv) < 1e-13);
        }
        assert!(gotz_constant(0.0, 2).is_err());
    }

    #[test]
    fn closed_forms_for_specs() {
        let b = SetSpec::Ball {
            dim: 3,
            center: vec![1.0, 2.0, 3.0],
            radius: 2.0,
        };
        assert!(rel(closed_form_capacity(&b, 1.0).unwrap(), 2.0) < 1e-14);
        assert_eq!(closed_form_capacity(&b, 3.0), Some(0.0));
        let i = SetSpec::interval(0.0, 4.0);
        assert!(rel(closed_form_capacity(&i, 0.0).unwrap(), 1.0) < 1e-15);
        let pts = SetSpec::Points {
            coords: vec![vec![0.0, 0.0], vec![3.0, 4.0]],
        };
        assert!(
            rel(
                closed_form_capacity(&pts, -10.0).unwrap(),
                5.0 * 2f64.powf(-0.1)
            ) < 1e-15
        );
        let circle = SetSpec::unit_sphere(2);
        assert!(rel(closed_form_capacity(&circle, 0.0).unwrap(), 1.0) < 1e-14);
        assert_eq!(closed_form_capacity(&circle, 0.5), None);
    }
}
