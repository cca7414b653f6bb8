//! Real special functions: log-gamma, digamma, beta, Riemann zeta and the
//! Dirichlet beta function.
//!
//! `log_gamma` reduces its argument into [1.5, 2.5) and sums the Taylor
//! series of log Γ(2 + z), whose coefficients are (ζ(k) − 1)/k. Near the
//! roots x = 1 and x = 2 this keeps full relative accuracy. Large arguments
//! use the Stirling series. The zeta-type sums are evaluated with the
//! Cohen–Rodriguez Villegas–Zagier acceleration of alternating series.

use std::f64::consts::{LN_2, PI};
use std::sync::OnceLock;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

// B_{2k} / (2k (2k - 1)) for k = 1..8
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

// B_{2k} / (2k) for k = 1..7
const DIGAMMA_ASYMP: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32_760.0,
    1.0 / 12.0,
];

const SERIES_TERMS: usize = 40;

fn domain(func: &'static str, arg: f64, reason: &'static str) -> Error {
    Error::Domain { func, arg, reason }
}

/// Σ_{k≥0} (−1)^k a_k for completely monotone a_k.
fn alternating_sum(a: impl Fn(usize) -> f64, terms: usize) -> f64 {
    let n = terms as f64;
    let mut d = (3.0 + 8f64.sqrt()).powf(n);
    d = (d + 1.0 / d) / 2.0;
    let mut b = -1.0;
    let mut c = -d;
    let mut s = 0.0;
    for k in 0..terms {
        let kf = k as f64;
        c = b - c;
        s += c * a(k);
        b = (kf + n) * (kf - n) * b / ((kf + 0.5) * (kf + 1.0));
    }
    s / d
}

/// Riemann zeta function for real s ≠ 1.
///
/// Negative arguments go through the functional equation.
pub fn zeta(s: f64) -> Result<f64> {
    if !s.is_finite() || s == 1.0 {
        return Err(domain("zeta", s, "requires finite s != 1"));
    }
    if s == 0.0 {
        return Ok(-0.5);
    }
    if s < 0.0 {
        // ζ(s) = 2^s π^(s−1) sin(πs/2) Γ(1−s) ζ(1−s)
        let t = 1.0 - s;
        let mag = (s * LN_2 + (s - 1.0) * PI.ln() + log_gamma(t)?).exp();
        return Ok(mag * (0.5 * PI * s).sin() * zeta(t)?);
    }
    let eta = alternating_sum(|k| (k as f64 + 1.0).powf(-s), SERIES_TERMS);
    // 1 - 2^(1-s)
    let denom = -((1.0 - s) * LN_2).exp_m1();
    Ok(eta / denom)
}

/// Dirichlet beta function β(s) = Σ_{k≥0} (−1)^k (2k+1)^(−s), continued to all real s.
pub fn dirichlet_beta(s: f64) -> Result<f64> {
    if !s.is_finite() {
        return Err(domain("dirichlet_beta", s, "requires finite s"));
    }
    if s == 0.0 {
        return Ok(0.5);
    }
    if s < 0.0 {
        // β(1−t) = (2/π)^t sin(πt/2) Γ(t) β(t), t = 1 − s
        let t = 1.0 - s;
        let mag = (t * (2.0 / PI).ln() + log_gamma(t)?).exp();
        return Ok(mag * (0.5 * PI * t).sin() * dirichlet_beta(t)?);
    }
    Ok(alternating_sum(
        |k| (2.0 * k as f64 + 1.0).powf(-s),
        SERIES_TERMS,
    ))
}

/// (ζ(k) − 1)/k for k = 0..=LGAMMA_TERMS; entries 0 and 1 unused.
fn lgamma_coefficients() -> &'static [f64] {
    static TABLE: OnceLock<Vec<f64>> = OnceLock::new();
    TABLE.get_or_init(|| {
        let mut t = vec![0.0; LGAMMA_TERMS + 1];
        for (k, slot) in t.iter_mut().enumerate().skip(2) {
            let s = k as f64;
            let zm1 = if k < 20 {
                zeta(s).expect("integer zeta") - 1.0
            } else {
                (2..60).map(|m| (m as f64).powf(-s)).sum()
            };
            *slot = zm1 / s;
        }
        t
    })
}

const LGAMMA_TERMS: usize = 56;

/// log Γ(2 + z) for |z| ≤ 1/2.
fn lgamma_near_two(z: f64) -> f64 {
    let c = lgamma_coefficients();
    let mut acc = 0.0;
    // Horner over the alternating power series, highest order first.
    for k in (2..=LGAMMA_TERMS).rev() {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc = acc * z + sign * c[k];
    }
    (1.0 - EULER_GAMMA) * z + acc * z * z
}

fn lgamma_stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    for &c in STIRLING.iter().rev() {
        corr = corr * inv2 + c;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + corr * inv
}

/// Natural logarithm of the gamma function for x > 0.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("log_gamma", x, "requires finite x > 0"));
    }
    let v = if x < 0.5 {
        lgamma_near_two(x) - x.ln_1p() - x.ln()
    } else if x < 1.5 {
        let z = x - 1.0;
        lgamma_near_two(z) - z.ln_1p()
    } else if x < 2.5 {
        lgamma_near_two(x - 2.0)
    } else if x < 20.0 {
        let shift = (x - 1.5).floor();
        let y = x - shift;
        let mut prod = 1.0;
        let mut t = y;
        while t < x {
            prod *= t;
            t += 1.0;
        }
        lgamma_near_two(y - 2.0) + prod.ln()
    } else {
        lgamma_stirling(x)
    };
    Ok(v)
}

/// Gamma function for x > 0 (overflows to +inf beyond x ≈ 171.6).
pub fn gamma(x: f64) -> Result<f64> {
    Ok(log_gamma(x)?.exp())
}

/// Digamma ψ(x) = d/dx log Γ(x) for x > 0.
pub fn digamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("digamma", x, "requires finite x > 0"));
    }
    let mut acc = 0.0;
    let mut y = x;
    while y < 8.0 {
        acc -= 1.0 / y;
        y += 1.0;
    }
    let inv2 = 1.0 / (y * y);
    let mut series = 0.0;
    for &c in DIGAMMA_ASYMP.iter().rev() {
        series = series * inv2 + c;
    }
    Ok(acc + y.ln() - 0.5 / y - series * inv2)
}

/// log B(a, b).
pub fn log_beta(a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) {
        return Err(domain("beta", a, "requires a > 0"));
    }
    if !(b > 0.0) {
        return Err(domain("beta", b, "requires b > 0"));
    }
    Ok(log_gamma(a)? + log_gamma(b)? - log_gamma(a + b)?)
}

/// Euler beta function B(a, b) = Γ(a)Γ(b)/Γ(a+b).
pub fn beta(a: f64, b: f64) -> Result<f64> {
    Ok(log_beta(a, b)?.exp())
}
