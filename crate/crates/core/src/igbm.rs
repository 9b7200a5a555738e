//! Inhomogeneous geometric Brownian motion `dy = a(b - y)dt + σy dW` and five
//! one-step schemes driven by `(W, H)` increment pairs.
//!
//! In Stratonovich form the drift becomes `ã(b̃ - y)` with `ã = a + σ²/2` and
//! `b̃ = 2ab/(2a + σ²)`, so `ã b̃ = ab`.

use std::fmt;
use std::str::FromStr;

use crate::brownian::{check_length, parabola_unchecked, IncrementPair};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IgbmParams {
    /// Mean-reversion speed.
    pub a: f64,
    /// Mean-reversion level.
    pub b: f64,
    /// Volatility.
    pub sigma: f64,
    /// Initial value.
    pub y0: f64,
    /// Time horizon `T`.
    pub horizon: f64,
}

impl IgbmParams {
    pub fn new(a: f64, b: f64, sigma: f64, y0: f64, horizon: f64) -> Result<Self> {
        let p = Self { a, b, sigma, y0, horizon };
        p.validate()?;
        Ok(p)
    }

    /// `a = 0.1, b = 0.04, σ = 0.6, y0 = 0.06, T = 5`.
    pub fn reference() -> Self {
        Self {
            a: 0.1,
            b: 0.04,
            sigma: 0.6,
            y0: 0.06,
            horizon: 5.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        for (name, v) in [
            ("a", self.a),
            ("b", self.b),
            ("sigma", self.sigma),
            ("y0", self.y0),
            ("horizon", self.horizon),
        ] {
            if !v.is_finite() {
                return bad(format!("{name} must be finite, got {v}"));
            }
        }
        if self.a < 0.0 {
            return bad(format!("a must be non-negative, got {}", self.a));
        }
        if self.sigma < 0.0 {
            return bad(format!("sigma must be non-negative, got {}", self.sigma));
        }
        if self.horizon <= 0.0 {
            return bad(format!("horizon must be positive, got {}", self.horizon));
        }
        Ok(())
    }

    pub fn a_tilde(&self) -> f64 {
        self.a + 0.5 * self.sigma * self.sigma
    }

    /// `2ab / (2a + σ²)`, or `b` when `a = σ = 0`.
    pub fn b_tilde(&self) -> f64 {
        let denom = 2.0 * self.a + self.sigma * self.sigma;
        if denom == 0.0 {
            self.b
        } else {
            2.0 * self.a * self.b / denom
        }
    }

    pub fn ab(&self) -> f64 {
        self.a * self.b
    }

    /// Stratonovich drift `f₀(y) = ab - ãy`.
    pub fn drift(&self, y: f64) -> f64 {
        self.ab() - self.a_tilde() * y
    }

    /// Diffusion `f₁(y) = σy`.
    pub fn diffusion(&self, y: f64) -> f64 {
        self.sigma * y
    }

    /// `[f₁, f₀] = f₀' f₁ - f₁' f₀ = -abσ`, constant in `y`.
    pub fn bracket_10(&self) -> f64 {
        -self.ab() * self.sigma
    }

    /// `[f₁, [f₁, f₀]] = abσ²`, constant in `y`.
    pub fn bracket_110(&self) -> f64 {
        self.ab() * self.sigma * self.sigma
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SchemeKind {
    LogOde,
    ParabolaOde,
    PiecewiseLinear,
    Milstein,
    EulerMaruyama,
}

impl SchemeKind {
    pub const ALL: [SchemeKind; 5] = [
        SchemeKind::LogOde,
        SchemeKind::ParabolaOde,
        SchemeKind::PiecewiseLinear,
        SchemeKind::Milstein,
        SchemeKind::EulerMaruyama,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeKind::LogOde => "log-ode",
            SchemeKind::ParabolaOde => "parabola",
            SchemeKind::PiecewiseLinear => "linear",
            SchemeKind::Milstein => "milstein",
            SchemeKind::EulerMaruyama => "euler",
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "log-ode" | "logode" | "log_ode" => Ok(SchemeKind::LogOde),
            "parabola" | "parabola-ode" => Ok(SchemeKind::ParabolaOde),
            "linear" | "piecewise-linear" => Ok(SchemeKind::PiecewiseLinear),
            "milstein" => Ok(SchemeKind::Milstein),
            "euler" | "euler-maruyama" => Ok(SchemeKind::EulerMaruyama),
            other => Err(Error::InvalidParameter(format!(
                "unknown scheme `{other}` (expected log-ode, parabola, linear, milstein or euler)"
            ))),
        }
    }
}

const PHI_SERIES_CUTOFF: f64 = 1e-5;

/// `(eˣ - 1)/x`, with `phi(0) = 1`.
#[inline]
pub fn phi(x: f64) -> f64 {
    if x.abs() < PHI_SERIES_CUTOFF {
        1.0 + x * (0.5 + x / 6.0)
    } else {
        x.exp_m1() / x
    }
}

#[inline]
fn growth(p: &IgbmParams, pair: &IncrementPair) -> (f64, f64, f64) {
    let x = -p.a_tilde() * pair.length + p.sigma * pair.w;
    let em1 = x.exp_m1();
    let ph = if x.abs() < PHI_SERIES_CUTOFF {
        1.0 + x * (0.5 + x / 6.0)
    } else {
        em1 / x
    };
    (x, em1 + 1.0, ph)
}

/// High order log-ODE step:
/// `y e^x + abh(1 - σH + σ²(3H²/5 + h/30)) phi(x)` with `x = -ãh + σW`.
pub fn step_log_ode(y: f64, p: &IgbmParams, pair: &IncrementPair) -> Result<f64> {
    check_length(pair.length)?;
    Ok(log_ode_unchecked(y, p, pair))
}

#[inline]
pub(crate) fn log_ode_unchecked(y: f64, p: &IgbmParams, pair: &IncrementPair) -> f64 {
    let (_, ex, ph) = growth(p, pair);
    let (h, hh, s) = (pair.length, pair.h_area, p.sigma);
    let correction = 1.0 - s * hh + s * s * (0.6 * hh * hh + h / 30.0);
    y * ex + p.ab() * h * correction * ph
}

// Three-point Gauss–Legendre rule mapped to [0, 1].
const GL3_NODES: [f64; 3] = [
    0.5 - 0.387_298_334_620_741_7,
    0.5,
    0.5 + 0.387_298_334_620_741_7,
];
const GL3_WEIGHTS: [f64; 3] = [5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0];

/// Parabola-ODE step: `e^x (y + ab ∫₀ʰ exp(ãs - σŴ_s) ds)` where `Ŵ` is the
/// Brownian parabola of the pair, integral by 3-point Gauss–Legendre.
pub fn step_parabola(y: f64, p: &IgbmParams, pair: &IncrementPair) -> Result<f64> {
    check_length(pair.length)?;
    Ok(parabola_unchecked_step(y, p, pair))
}

#[inline]
pub(crate) fn parabola_unchecked_step(y: f64, p: &IgbmParams, pair: &IncrementPair) -> f64 {
    let (h, at, s) = (pair.length, p.a_tilde(), p.sigma);
    let ex = (-at * h + s * pair.w).exp();
    let integral: f64 = GL3_NODES
        .iter()
        .zip(GL3_WEIGHTS)
        .map(|(&u, wt)| wt * (at * h * u - s * parabola_unchecked(0.0, pair, u)).exp())
        .sum::<f64>()
        * h;
    ex * (y + p.ab() * integral)
}

/// Parabola-ODE step with the integral done by a composite midpoint rule of
/// `panels` panels; used to check the adequacy of the 3-point rule.
pub fn step_parabola_composite(
    y: f64,
    p: &IgbmParams,
    pair: &IncrementPair,
    panels: usize,
) -> Result<f64> {
    check_length(pair.length)?;
    if panels == 0 {
        return Err(Error::InvalidParameter("panels must be positive".into()));
    }
    let (h, at, s) = (pair.length, p.a_tilde(), p.sigma);
    let du = 1.0 / panels as f64;
    let integral: f64 = (0..panels)
        .map(|j| {
            let u = (j as f64 + 0.5) * du;
            (at * h * u - s * parabola_unchecked(0.0, pair, u)).exp()
        })
        .sum::<f64>()
        * du
        * h;
    Ok((-at * h + s * pair.w).exp() * (y + p.ab() * integral))
}

/// Piecewise-linear (Wong–Zakai) step: `y e^x + abh phi(x)`.
pub fn step_linear(y: f64, p: &IgbmParams, pair: &IncrementPair) -> Result<f64> {
    check_length(pair.length)?;
    Ok(linear_unchecked(y, p, pair))
}

#[inline]
pub(crate) fn linear_unchecked(y: f64, p: &IgbmParams, pair: &IncrementPair) -> f64 {
    let (_, ex, ph) = growth(p, pair);
    y * ex + p.ab() * pair.length * ph
}

/// Milstein step on the Stratonovich form, clamped at zero.
pub fn step_milstein(y: f64, p: &IgbmParams, pair: &IncrementPair) -> Result<f64> {
    check_length(pair.length)?;
    Ok(milstein_unchecked(y, p, pair))
}

#[inline]
pub(crate) fn milstein_unchecked(y: f64, p: &IgbmParams, pair: &IncrementPair) -> f64 {
    let (h, w, s) = (pair.length, pair.w, p.sigma);
    let next = y + (p.ab() - p.a_tilde() * y) * h + s * y * w + 0.5 * s * s * y * w * w;
    next.max(0.0)
}

/// Euler–Maruyama step on the Itô form, clamped at zero.
pub fn step_euler(y: f64, p: &IgbmParams, pair: &IncrementPair) -> Result<f64> {
    check_length(pair.length)?;
    Ok(euler_unchecked(y, p, pair))
}

#[inline]
pub(crate) fn euler_unchecked(y: f64, p: &IgbmParams, pair: &IncrementPair) -> f64 {
    let next = y + p.a * (p.b - y) * pair.length + p.sigma * y * pair.w;
    next.max(0.0)
}

pub fn step(kind: SchemeKind, y: f64, p: &IgbmParams, pair: &IncrementPair) -> Result<f64> {
    check_length(pair.length)?;
    Ok(step_unchecked(kind, y, p, pair))
}

#[inline]
pub(crate) fn step_unchecked(kind: SchemeKind, y: f64, p: &IgbmParams, pair: &IncrementPair) -> f64 {
    match kind {
        SchemeKind::LogOde => log_ode_unchecked(y, p, pair),
        SchemeKind::ParabolaOde => parabola_unchecked_step(y, p, pair),
        SchemeKind::PiecewiseLinear => linear_unchecked(y, p, pair),
        SchemeKind::Milstein => milstein_unchecked(y, p, pair),
        SchemeKind::EulerMaruyama => euler_unchecked(y, p, pair),
    }
}

fn check_pairs(pairs: &[IncrementPair]) -> Result<()> {
    if pairs.is_empty() {
        return Err(Error::Empty("no steps to simulate"));
    }
    pairs.iter().try_for_each(|p| check_length(p.length))
}

/// Terminal value `Y_N` from `y0` over the given pairs.
pub fn simulate(kind: SchemeKind, p: &IgbmParams, pairs: &[IncrementPair]) -> Result<f64> {
    check_pairs(pairs)?;
    Ok(simulate_unchecked(kind, p, pairs))
}

#[inline]
pub(crate) fn simulate_unchecked(kind: SchemeKind, p: &IgbmParams, pairs: &[IncrementPair]) -> f64 {
    pairs
        .iter()
        .fold(p.y0, |y, pair| step_unchecked(kind, y, p, pair))
}

/// `Y_0, …, Y_N`.
pub fn simulate_trajectory(
    kind: SchemeKind,
    p: &IgbmParams,
    pairs: &[IncrementPair],
) -> Result<Vec<f64>> {
    check_pairs(pairs)?;
    let mut out = Vec::with_capacity(pairs.len() + 1);
    let mut y = p.y0;
    out.push(y);
    for pair in pairs {
        y = step_unchecked(kind, y, p, pair);
        out.push(y);
    }
    Ok(out)
}
