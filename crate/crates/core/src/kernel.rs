//! Riesz and logarithmic kernels, extended-real energies, and the
//! energy ↔ capacity conversion.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Sign class of a Riesz exponent. It fixes both the kernel and whether the
/// energy is minimized (p ≥ 0) or maximized (p < 0).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Regime {
    Negative,
    Zero,
    Positive,
}

/// A finite real exponent p tagged with its regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct RieszExponent {
    p: f64,
    regime: Regime,
}

impl RieszExponent {
    pub fn new(p: f64) -> Result<Self> {
        if !p.is_finite() {
            return invalid(format!("exponent must be finite, got {p}"));
        }
        let regime = if p < 0.0 {
            Regime::Negative
        } else if p == 0.0 {
            Regime::Zero
        } else {
            Regime::Positive
        };
        Ok(Self { p, regime })
    }

    /// The logarithmic case p = 0.
    pub fn log() -> Self {
        Self {
            p: 0.0,
            regime: Regime::Zero,
        }
    }

    #[inline]
    pub fn value(self) -> f64 {
        self.p
    }

    #[inline]
    pub fn regime(self) -> Regime {
        self.regime
    }

    /// True when the equilibrium problem is a maximization (p < 0).
    #[inline]
    pub fn maximizes(self) -> bool {
        self.regime == Regime::Negative
    }

    /// Kernel at distance r > 0 without argument checks.
    #[inline]
    pub(crate) fn kernel(self, r: f64) -> f64 {
        match self.regime {
            Regime::Zero => -r.ln(),
            _ => r.powf(-self.p),
        }
    }
}

impl TryFrom<f64> for RieszExponent {
    type Error = Error;
    fn try_from(p: f64) -> Result<Self> {
        Self::new(p)
    }
}

impl From<RieszExponent> for f64 {
    fn from(e: RieszExponent) -> f64 {
        e.p
    }
}

impl fmt::Display for RieszExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.p)
    }
}

/// r^(−p) for p ≠ 0 and log(1/r) for p = 0.
pub fn kernel_value(p: RieszExponent, r: f64) -> Result<f64> {
    if !(r > 0.0) || !r.is_finite() {
        return Err(Error::Domain {
            func: "kernel_value",
            arg: r,
            reason: "distance must be finite and positive",
        });
    }
    Ok(p.kernel(r))
}

/// Finite real or +∞.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyKind {
    Finite(f64),
    PlusInfinity,
}

impl EnergyKind {
    pub fn finite(self) -> Option<f64> {
        match self {
            EnergyKind::Finite(v) => Some(v),
            EnergyKind::PlusInfinity => None,
        }
    }

    /// The value as an f64, with +∞ mapped to `f64::INFINITY`.
    pub fn as_f64(self) -> f64 {
        self.finite().unwrap_or(f64::INFINITY)
    }
}

/// How an energy value was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergySource {
    DirectSum,
    GotzRadial,
    GotzSpatial,
    ClosedForm,
}

/// A Riesz or logarithmic energy together with its exponent and provenance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub kind: EnergyKind,
    pub exponent: RieszExponent,
    pub source: EnergySource,
}

impl EnergyValue {
    pub fn finite(exponent: RieszExponent, value: f64, source: EnergySource) -> Result<Self> {
        check_energy(exponent, EnergyKind::Finite(value))?;
        Ok(Self {
            kind: EnergyKind::Finite(value),
            exponent,
            source,
        })
    }

    pub fn plus_infinity(exponent: RieszExponent, source: EnergySource) -> Result<Self> {
        check_energy(exponent, EnergyKind::PlusInfinity)?;
        Ok(Self {
            kind: EnergyKind::PlusInfinity,
            exponent,
            source,
        })
    }

    pub fn value(&self) -> Option<f64> {
        self.kind.finite()
    }

    pub fn capacity(&self) -> Result<f64> {
        capacity_from_energy(self.exponent, self.kind)
    }
}

fn check_energy(p: RieszExponent, kind: EnergyKind) -> Result<()> {
    match (p.regime(), kind) {
        (_, EnergyKind::Finite(v)) if !v.is_finite() => {
            invalid(format!("finite energy expected, got {v}"))
        }
        (Regime::Positive, EnergyKind::Finite(v)) if v <= 0.0 => {
            invalid(format!("energy for p = {p} must be positive, got {v}"))
        }
        (Regime::Negative, EnergyKind::Finite(v)) if v < 0.0 => {
            invalid(format!("energy for p = {p} must be nonnegative, got {v}"))
        }
        (Regime::Negative, EnergyKind::PlusInfinity) => {
            invalid(format!("energy for p = {p} < 0 cannot be infinite"))
        }
        _ => Ok(()),
    }
}

/// Cap = V^(−1/p) for p ≠ 0 and exp(−V) for p = 0, with +∞ energy giving
/// zero capacity.
pub fn capacity_from_energy(p: RieszExponent, energy: EnergyKind) -> Result<f64> {
    check_energy(p, energy)?;
    let cap = match (p.regime(), energy) {
        (_, EnergyKind::PlusInfinity) => 0.0,
        (Regime::Zero, EnergyKind::Finite(v)) => (-v).exp(),
        (_, EnergyKind::Finite(v)) => v.powf(-1.0 / p.value()),
    };
    Ok(cap)
}
