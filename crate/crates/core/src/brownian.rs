//! Brownian data: increment / space-time Lévy area pairs, polynomial
//! Karhunen–Loève paths, Brownian parabolas and arches.
//!
//! Over an interval `[s, t]` of length `h`, the pair `(W, H)` is the increment
//! and the rescaled space-time Lévy area
//! `H = (1/h) ∫_s^t (W_{s,u} - (u-s)/h · W_{s,t}) du`.
//! `W ~ N(0, h)` and `H ~ N(0, h/12)` are independent.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::orthopoly::{self, PolyBasis};

/// Increment, space-time Lévy area and length of one interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IncrementPair {
    /// Brownian increment `W_{s,t}`.
    pub w: f64,
    /// Rescaled space-time Lévy area `H_{s,t}`.
    pub h_area: f64,
    /// Interval length `h = t - s`.
    pub length: f64,
}

impl IncrementPair {
    pub fn new(w: f64, h_area: f64, length: f64) -> Result<Self> {
        check_length(length)?;
        Ok(Self { w, h_area, length })
    }
}

pub(crate) fn check_length(length: f64) -> Result<()> {
    if length > 0.0 && length.is_finite() {
        Ok(())
    } else {
        Err(Error::NonPositiveLength(length))
    }
}

/// Draws `(W, H)` over an interval of the given length.
pub fn sample_pair<R: Rng + ?Sized>(length: f64, rng: &mut R) -> Result<IncrementPair> {
    check_length(length)?;
    Ok(sample_pair_unchecked(length, rng))
}

#[inline]
pub(crate) fn sample_pair_unchecked<R: Rng + ?Sized>(length: f64, rng: &mut R) -> IncrementPair {
    let z1: f64 = rng.sample(StandardNormal);
    let z2: f64 = rng.sample(StandardNormal);
    IncrementPair {
        w: length.sqrt() * z1,
        h_area: (length / 12.0).sqrt() * z2,
        length,
    }
}

/// Fills `out` with independent pairs of common length.
pub fn sample_pairs<R: Rng + ?Sized>(
    length: f64,
    rng: &mut R,
    out: &mut [IncrementPair],
) -> Result<()> {
    check_length(length)?;
    for slot in out.iter_mut() {
        *slot = sample_pair_unchecked(length, rng);
    }
    Ok(())
}

/// Combines consecutive equal-length pairs into the pair of their union.
///
/// With `δ` the common length, `h = nδ` and `prefix_i = Σ_{j<i} w_j`:
/// `W = Σ w_i`, `H = (1/h) Σ δ (prefix_i + w_i/2 + H_i) - W/2`.
pub fn coarsen(pairs: &[IncrementPair]) -> Result<IncrementPair> {
    let first = pairs.first().ok_or(Error::Empty("no sub-intervals to coarsen"))?;
    let delta = first.length;
    check_length(delta)?;
    for p in &pairs[1..] {
        if (p.length - delta).abs() > 1e-12 * delta {
            return Err(Error::UnequalLengths(delta, p.length));
        }
    }
    Ok(coarsen_unchecked(pairs))
}

#[inline]
pub(crate) fn coarsen_unchecked(pairs: &[IncrementPair]) -> IncrementPair {
    if pairs.len() == 1 {
        return pairs[0];
    }
    let mut prefix = 0.0;
    let mut area = 0.0;
    for p in pairs {
        area += prefix + 0.5 * p.w + p.h_area;
        prefix += p.w;
    }
    let n = pairs.len() as f64;
    IncrementPair {
        w: prefix,
        h_area: area / n - 0.5 * prefix,
        length: pairs[0].length * n,
    }
}

/// Coarsens `fine` by a whole factor into `out` (`fine.len() = factor · out.len()`).
pub(crate) fn coarsen_into(fine: &[IncrementPair], factor: usize, out: &mut Vec<IncrementPair>) {
    out.clear();
    out.extend(fine.chunks_exact(factor).map(coarsen_unchecked));
}

/// Brownian parabola at normalised position `u` in the interval:
/// `start + u·W + 6u(1-u)·H`.
pub fn parabola_eval(start_value: f64, pair: &IncrementPair, u: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) {
        return Err(Error::OutOfDomain {
            name: "u",
            value: u,
            domain: "[0, 1]",
        });
    }
    Ok(parabola_unchecked(start_value, pair, u))
}

#[inline]
pub(crate) fn parabola_unchecked(start_value: f64, pair: &IncrementPair, u: f64) -> f64 {
    start_value + u * pair.w + 6.0 * u * (1.0 - u) * pair.h_area
}

// ---------------------------------------------------------------------------
// Polynomial paths
// ---------------------------------------------------------------------------

/// Degree-n polynomial path `W^n(t) = W_1 t + Σ_{k<n} I_k e_k(t)` on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct BrownianPolynomial<'a> {
    basis: &'a PolyBasis,
    w1: f64,
    coeffs: Vec<f64>,
}

impl<'a> BrownianPolynomial<'a> {
    /// `coeffs[k-1]` holds `I_k`; the degree is `coeffs.len() + 1`.
    pub fn new(basis: &'a PolyBasis, w1: f64, coeffs: Vec<f64>) -> Result<Self> {
        let degree = coeffs.len() + 1;
        if degree > basis.max_degree() {
            return Err(Error::DegreeOutOfRange {
                degree,
                min: 1,
                max: basis.max_degree(),
            });
        }
        Ok(Self { basis, w1, coeffs })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() + 1
    }

    pub fn w1(&self) -> f64 {
        self.w1
    }

    /// `I_1, …, I_{n-1}`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn basis(&self) -> &PolyBasis {
        self.basis
    }

    pub fn eval(&self, t: f64) -> Result<f64> {
        eval_polynomial_path(self, t)
    }
}

/// Draws `W_1 ~ N(0,1)` and independent `I_k ~ N(0, 1/(k(k+1)))`, `k < n`.
pub fn sample_kl_coefficients<'a, R: Rng + ?Sized>(
    basis: &'a PolyBasis,
    n: usize,
    rng: &mut R,
) -> Result<BrownianPolynomial<'a>> {
    if n < 1 || n > basis.max_degree() {
        return Err(Error::DegreeOutOfRange {
            degree: n,
            min: 1,
            max: basis.max_degree(),
        });
    }
    let w1: f64 = rng.sample(StandardNormal);
    let coeffs = (1..n)
        .map(|k| {
            let z: f64 = rng.sample(StandardNormal);
            z * orthopoly::eigenvalue(k).map(f64::sqrt).unwrap_or(0.0)
        })
        .collect();
    BrownianPolynomial::new(basis, w1, coeffs)
}

/// `W^n(t)`.
pub fn eval_polynomial_path(p: &BrownianPolynomial<'_>, t: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::OutOfDomain {
            name: "t",
            value: t,
            domain: "[0, 1]",
        });
    }
    let bridge: f64 = p
        .coeffs
        .iter()
        .enumerate()
        .map(|(i, &c)| c * orthopoly::e_unchecked(i + 1, t))
        .sum();
    Ok(p.w1 * t + bridge)
}

// ---------------------------------------------------------------------------
// Dense paths
// ---------------------------------------------------------------------------

/// Path values on a strictly increasing grid from 0 to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct DensePath {
    grid: Vec<f64>,
    values: Vec<f64>,
}

impl DensePath {
    pub fn new(grid: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 {
            return Err(Error::InvalidGrid("need at least two grid points".into()));
        }
        if grid.len() != values.len() {
            return Err(Error::InvalidGrid(format!(
                "{} grid points but {} values",
                grid.len(),
                values.len()
            )));
        }
        if grid[0].abs() > 1e-12 || (grid[grid.len() - 1] - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidGrid("grid must start at 0 and end at 1".into()));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidGrid("grid must be strictly increasing".into()));
        }
        if !values.iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidGrid("non-finite path value".into()));
        }
        Ok(Self { grid, values })
    }

    /// Samples `f` on the uniform grid `j/m`, `j = 0..=m`.
    pub fn from_fn<F: FnMut(f64) -> f64>(m: usize, mut f: F) -> Result<Self> {
        if m == 0 {
            return Err(Error::GridTooCoarse { steps: 0, min: 1 });
        }
        let grid = uniform_grid(m);
        let values = grid.iter().map(|&t| f(t)).collect();
        Self::new(grid, values)
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Number of grid intervals.
    pub fn steps(&self) -> usize {
        self.grid.len() - 1
    }

    /// True when all intervals have the same length to 1e-9 relative.
    pub fn is_uniform(&self) -> bool {
        let dt = 1.0 / self.steps() as f64;
        self.grid
            .windows(2)
            .all(|w| ((w[1] - w[0]) - dt).abs() <= 1e-9 * dt)
    }
}

fn uniform_grid(m: usize) -> Vec<f64> {
    (0..=m).map(|j| j as f64 / m as f64).collect()
}

/// Standard Brownian motion on the uniform grid with `m` steps (exact at nodes).
pub fn sample_motion<R: Rng + ?Sized>(m: usize, rng: &mut R) -> Result<DensePath> {
    if m == 0 {
        return Err(Error::GridTooCoarse { steps: 0, min: 1 });
    }
    let sd = (1.0 / m as f64).sqrt();
    let mut values = Vec::with_capacity(m + 1);
    let mut x = 0.0;
    values.push(x);
    for _ in 0..m {
        let z: f64 = rng.sample(StandardNormal);
        x += sd * z;
        values.push(x);
    }
    DensePath::new(uniform_grid(m), values)
}

const MIN_EXTRACT_STEPS: usize = 16;

/// `I_k = ∫₀¹ B_t e_k(t)/(t(1-t)) dt` by the trapezoidal rule on the path grid.
///
/// The path is first turned into a bridge, `B_t = X_t - X_0 - t (X_1 - X_0)`.
pub fn extract_ik(path: &DensePath, k: usize) -> Result<f64> {
    if path.steps() < MIN_EXTRACT_STEPS {
        return Err(Error::GridTooCoarse {
            steps: path.steps(),
            min: MIN_EXTRACT_STEPS,
        });
    }
    if k == 0 || k >= orthopoly::MAX_DEGREE {
        return Err(Error::IndexOutOfRange {
            index: k,
            min: 1,
            max: orthopoly::MAX_DEGREE - 1,
        });
    }
    let v0 = path.values[0];
    let rise = path.values[path.values.len() - 1] - v0;
    let integrand: Vec<f64> = path
        .grid
        .iter()
        .zip(&path.values)
        .map(|(&t, &x)| (x - v0 - t * rise) * orthopoly::e_over_weight_unchecked(k, t))
        .collect();
    Ok(trapezoid(&path.grid, &integrand))
}

pub(crate) fn trapezoid(grid: &[f64], f: &[f64]) -> f64 {
    grid.windows(2)
        .zip(f.windows(2))
        .map(|(t, y)| 0.5 * (t[1] - t[0]) * (y[0] + y[1]))
        .sum()
}

// ---------------------------------------------------------------------------
// Brownian arch
// ---------------------------------------------------------------------------

/// Covariance of the standard Brownian arch,
/// `K_Z(s,t) = min(s,t) - st - 3st(1-s)(1-t)`.
pub fn arch_covariance(s: f64, t: f64) -> Result<f64> {
    for (name, v) in [("s", s), ("t", t)] {
        if !(0.0..=1.0).contains(&v) {
            return Err(Error::OutOfDomain {
                name,
                value: v,
                domain: "[0, 1]",
            });
        }
    }
    Ok(s.min(t) - s * t - 3.0 * s * t * (1.0 - s) * (1.0 - t))
}

const PSD_TOLERANCE: f64 = -1e-10;
const EIGEN_CLAMP: f64 = 1e-12;

/// Gaussian sampler for the arch on a fixed interior grid.
///
/// Holds a square-root factor `F` of the covariance matrix with `F Fᵀ = K`.
/// Cholesky is tried first; if it fails the symmetric eigendecomposition is
/// used with eigenvalues below 1e-12 clamped to zero.
#[derive(Debug, Clone)]
pub struct ArchSampler {
    grid: Vec<f64>,
    factor: DMatrix<f64>,
}

impl ArchSampler {
    /// `grid` must be strictly increasing inside `(0, 1)`.
    pub fn new(grid: &[f64]) -> Result<Self> {
        if grid.is_empty() {
            return Err(Error::Empty("arch grid"));
        }
        if !grid.iter().all(|&t| t > 0.0 && t < 1.0) {
            return Err(Error::InvalidGrid("arch grid must lie inside (0, 1)".into()));
        }
        if !grid.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidGrid("arch grid must be strictly increasing".into()));
        }
        let n = grid.len();
        let cov = DMatrix::from_fn(n, n, |i, j| {
            let (s, t) = (grid[i], grid[j]);
            s.min(t) - s * t - 3.0 * s * t * (1.0 - s) * (1.0 - t)
        });
        let factor = match cov.clone().cholesky() {
            Some(chol) => chol.l(),
            None => {
                let eig = cov.symmetric_eigen();
                let min = eig.eigenvalues.min();
                if min < PSD_TOLERANCE {
                    return Err(Error::Factorization(min));
                }
                let roots = eig
                    .eigenvalues
                    .map(|l| if l < EIGEN_CLAMP { 0.0 } else { l.sqrt() });
                eig.eigenvectors * DMatrix::from_diagonal(&roots)
            }
        };
        Ok(Self {
            grid: grid.to_vec(),
            factor,
        })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// One draw as a dense path on `[0, grid…, 1]` with zero endpoints.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> DensePath {
        let n = self.grid.len();
        let z = DVector::from_fn(n, |_, _| rng.sample::<f64, _>(StandardNormal));
        let interior = &self.factor * z;
        let mut grid = Vec::with_capacity(n + 2);
        grid.push(0.0);
        grid.extend_from_slice(&self.grid);
        grid.push(1.0);
        let mut values = Vec::with_capacity(n + 2);
        values.push(0.0);
        values.extend(interior.iter());
        values.push(0.0);
        DensePath { grid, values }
    }

    /// `count` draws at the interior grid points, one per column.
    pub fn sample_block<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> DMatrix<f64> {
        let n = self.grid.len();
        let z = DMatrix::from_fn(n, count, |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.factor * z
    }
}

/// One arch draw on `grid` (interior points), returned with the zero endpoints appended.
pub fn sample_arch<R: Rng + ?Sized>(grid: &[f64], rng: &mut R) -> Result<DensePath> {
    Ok(ArchSampler::new(grid)?.sample(rng))
}
