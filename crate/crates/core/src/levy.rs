//! Space-space-time Lévy area `L`: conditional moments given `(W, H)` and the
//! algebra linking `(W, H, L)` to the Stratonovich triple integrals of `(t, W)`.
//!
//! All formulas are for a general interval of length `h`.

use crate::brownian::{check_length, DensePath, IncrementPair};
use crate::error::{Error, Result};

/// Second- and third-order Stratonovich iterated integrals of `(t, W)` over one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TripleIntegrals {
    /// `∫∫∫ ∘dW ∘dW du`
    pub i_wwt: f64,
    /// `∫∫∫ ∘dW dv ∘dW`
    pub i_wtw: f64,
    /// `∫∫∫ dr ∘dW ∘dW`
    pub i_tww: f64,
    /// `∫∫ ∘dW du`
    pub i_wt: f64,
    /// `∫∫ dv ∘dW`
    pub i_tw: f64,
}

impl TripleIntegrals {
    /// `(i_wwt - 2 i_wtw + i_tww) / 6`.
    pub fn levy_area(&self) -> f64 {
        (self.i_wwt - 2.0 * self.i_wtw + self.i_tww) / 6.0
    }
}

/// Mean and variance of `L` given `(W, H)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CondLevyEstimate {
    pub mean: f64,
    pub variance: f64,
}

/// `(W, H, L)` over `[0, 1]` measured on a dense path.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevyAreas {
    pub w: f64,
    pub h_area: f64,
    pub l: f64,
}

/// `E[∫ W_{s,u}² du | W, H] = hW²/3 + hWH + 6hH²/5 + h²/15`.
pub fn cond_mean_sq_integral(pair: &IncrementPair) -> Result<f64> {
    check_length(pair.length)?;
    let IncrementPair { w, h_area: hh, length: h } = *pair;
    Ok(h * w * w / 3.0 + h * w * hh + 1.2 * h * hh * hh + h * h / 15.0)
}

/// `E[L | W, H] = h²/30 + 3hH²/5`.
pub fn cond_mean_l(pair: &IncrementPair) -> Result<f64> {
    check_length(pair.length)?;
    Ok(cond_mean_l_unchecked(pair.h_area, pair.length))
}

#[inline]
pub(crate) fn cond_mean_l_unchecked(hh: f64, h: f64) -> f64 {
    h * h / 30.0 + 0.6 * h * hh * hh
}

/// `Var(L | W, H) = 11h⁴/25200 + h³(W²/720 + H²/700)`.
pub fn cond_var_l(pair: &IncrementPair) -> Result<f64> {
    check_length(pair.length)?;
    let IncrementPair { w, h_area: hh, length: h } = *pair;
    Ok(11.0 / 25200.0 * h.powi(4) + h.powi(3) * (w * w / 720.0 + hh * hh / 700.0))
}

pub fn cond_levy_estimate(pair: &IncrementPair) -> Result<CondLevyEstimate> {
    Ok(CondLevyEstimate {
        mean: cond_mean_l(pair)?,
        variance: cond_var_l(pair)?,
    })
}

/// Triple integrals from `(W, H, L)` over an interval of length `h`.
pub fn triple_integrals_from_whl(w: f64, hh: f64, l: f64, h: f64) -> Result<TripleIntegrals> {
    check_length(h)?;
    let base = h * w * w / 6.0;
    let cross = 0.5 * h * w * hh;
    Ok(TripleIntegrals {
        i_wt: 0.5 * h * w + h * hh,
        i_tw: 0.5 * h * w - h * hh,
        i_wwt: base + cross + l,
        i_wtw: base - 2.0 * l,
        i_tww: base - cross + l,
    })
}

/// `L = ½∫W² du - hW²/6 - hWH/2`, inverting the `i_wwt` relation.
pub fn levy_area_from_sq_integral(sq_integral: f64, w: f64, hh: f64, h: f64) -> Result<f64> {
    check_length(h)?;
    Ok(0.5 * sq_integral - h * w * w / 6.0 - 0.5 * h * w * hh)
}

/// Minimum number of grid steps accepted by the dense-path discretizations.
pub const MIN_DENSE_STEPS: usize = 1000;

fn check_dense(path: &DensePath) -> Result<()> {
    if path.steps() < MIN_DENSE_STEPS {
        return Err(Error::GridTooCoarse {
            steps: path.steps(),
            min: MIN_DENSE_STEPS,
        });
    }
    if !path.is_uniform() {
        return Err(Error::InvalidGrid("levy discretization needs a uniform grid".into()));
    }
    Ok(())
}

/// Direct discretization of the five iterated integrals over `[0, 1]`.
///
/// `dW` integrators use the average of adjacent integrand values, `dt`
/// integrators the trapezoidal rule; inner integrals are accumulated the same way.
pub fn discrete_triple_integrals(path: &DensePath) -> Result<TripleIntegrals> {
    check_dense(path)?;
    let t = path.grid();
    let x = path.values();
    let x0 = x[0];

    // Running inner integrals at the left node of each step.
    let mut i_wt = 0.0; // ∫ W dv
    let mut i_tw = 0.0; // ∫ v ∘dW
    let mut i_wwt = 0.0;
    let mut i_wtw = 0.0;
    let mut i_tww = 0.0;
    for j in 0..t.len() - 1 {
        let dt = t[j + 1] - t[j];
        let (w0, w1) = (x[j] - x0, x[j + 1] - x0);
        let dw = w1 - w0;
        let next_wt = i_wt + 0.5 * dt * (w0 + w1);
        let next_tw = i_tw + 0.5 * (t[j] + t[j + 1]) * dw;
        i_wwt += 0.25 * dt * (w0 * w0 + w1 * w1);
        i_wtw += 0.5 * (i_wt + next_wt) * dw;
        i_tww += 0.5 * (i_tw + next_tw) * dw;
        i_wt = next_wt;
        i_tw = next_tw;
    }
    Ok(TripleIntegrals {
        i_wwt,
        i_wtw,
        i_tww,
        i_wt,
        i_tw,
    })
}

/// `(W, H, L)` over `[0, 1]` from a dense path with at least 1000 uniform steps.
pub fn discrete_levy_areas(path: &DensePath) -> Result<LevyAreas> {
    let tri = discrete_triple_integrals(path)?;
    let x = path.values();
    let w = x[x.len() - 1] - x[0];
    Ok(LevyAreas {
        w,
        h_area: tri.i_wt - 0.5 * w,
        l: tri.levy_area(),
    })
}
