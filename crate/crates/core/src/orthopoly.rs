//! Legendre polynomials, (-1,-1)-Jacobi polynomials and the eigenfunctions
//! `e_k` of the Brownian bridge covariance operator.
//!
//! Conventions:
//!
//! - `Q_k` is the Legendre polynomial of degree `k` on `[-1, 1]`.
//! - `P_k` is the (-1,-1)-Jacobi polynomial of degree `k >= 2`, with roots at ±1,
//!   `P_2 = (x² - 1)/4`, `P_3 = x(x² - 1)/2`.
//! - `e_k(t) = (1/k) √(k(k+1)(2k+1)) P_{k+1}(2t - 1)` on `[0, 1]`, `k >= 1`.
//!   These have positive leading coefficient and are orthonormal under the
//!   weight `1/(t(1-t))`; the associated eigenvalues are `1/(k(k+1))`.
//!
//! Polynomials are stored as dense monomial coefficient vectors, lowest power first.
//! Point evaluation goes through the Legendre-difference identity, which stays
//! accurate at degrees where monomial coefficients are hopelessly cancelling.

use crate::error::{Error, Result};

/// Largest polynomial degree supported by [`PolyBasis`] and the free evaluators.
pub const MAX_DEGREE: usize = 64;

/// Largest node count accepted by [`gauss_legendre`].
pub const MAX_NODES: usize = 64;

const NEWTON_TOL: f64 = 1e-15;

// ---------------------------------------------------------------------------
// Monomial coefficient vectors
// ---------------------------------------------------------------------------

/// Horner evaluation of `Σ coeffs[i] x^i`.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
}

/// Coefficients of the derivative.
pub fn derivative(coeffs: &[f64]) -> Vec<f64> {
    coeffs
        .iter()
        .enumerate()
        .skip(1)
        .map(|(i, &c)| c * i as f64)
        .collect()
}

/// Exact quotient of `p(x) / (x² - 1)` by synthetic division.
///
/// The remainder is discarded; callers only divide polynomials known to vanish at ±1.
pub fn divide_by_x2_minus_1(coeffs: &[f64]) -> Vec<f64> {
    let n = coeffs.len();
    if n < 3 {
        return Vec::new();
    }
    // p = (x² - 1) q  =>  p_i = q_{i-2} - q_i, solved from the top down.
    let mut q = vec![0.0; n - 2];
    for i in (0..n - 2).rev() {
        let above = if i + 2 < n - 2 { q[i + 2] } else { 0.0 };
        q[i] = coeffs[i + 2] + above;
    }
    q
}

/// Coefficients of `p(2t - 1)` as a polynomial in `t`.
fn compose_affine(coeffs: &[f64]) -> Vec<f64> {
    // Horner in polynomial arithmetic: acc <- acc * (2t - 1) + c.
    let mut acc: Vec<f64> = Vec::with_capacity(coeffs.len());
    for &c in coeffs.iter().rev() {
        let mut next = vec![0.0; acc.len() + 1];
        for (i, &a) in acc.iter().enumerate() {
            next[i + 1] += 2.0 * a;
            next[i] -= a;
        }
        next[0] += c;
        acc = next;
    }
    acc
}

// ---------------------------------------------------------------------------
// Legendre
// ---------------------------------------------------------------------------

/// Legendre polynomial `Q_k(x)` by Bonnet's recurrence.
pub fn legendre_eval(k: usize, x: f64) -> f64 {
    legendre_with_derivative(k, x).0
}

/// `(Q_k(x), Q_k'(x))`.
///
/// The derivative uses `Q'_{n+1} = Q'_{n-1} + (2n+1) Q_n`, which avoids the
/// `1/(1 - x²)` factor of the usual closed form.
pub fn legendre_with_derivative(k: usize, x: f64) -> (f64, f64) {
    if k == 0 {
        return (1.0, 0.0);
    }
    let (mut q_prev, mut q) = (1.0, x);
    let (mut d_prev, mut d) = (0.0, 1.0);
    for n in 1..k {
        let nf = n as f64;
        let q_next = ((2.0 * nf + 1.0) * x * q - nf * q_prev) / (nf + 1.0);
        let d_next = d_prev + (2.0 * nf + 1.0) * q;
        q_prev = q;
        q = q_next;
        d_prev = d;
        d = d_next;
    }
    (q, d)
}

// ---------------------------------------------------------------------------
// (-1,-1)-Jacobi
// ---------------------------------------------------------------------------

fn check_jacobi_degree(k: usize) -> Result<()> {
    if (2..=MAX_DEGREE).contains(&k) {
        Ok(())
    } else {
        Err(Error::DegreeOutOfRange {
            degree: k,
            min: 2,
            max: MAX_DEGREE,
        })
    }
}

/// Monomial coefficients of `P_k^(-1,-1)` on `[-1, 1]` from the three-term recurrence
/// `n(n+2) P_{n+2} = (n+1)(2n+1) x P_{n+1} - n(n+1) P_n`.
pub fn jacobi_m1m1_coeffs(k: usize) -> Result<Vec<f64>> {
    check_jacobi_degree(k)?;
    Ok(jacobi_table(k).swap_remove(k))
}

/// All coefficient vectors up to degree `max`; entries 0 and 1 are empty.
fn jacobi_table(max: usize) -> Vec<Vec<f64>> {
    let mut table: Vec<Vec<f64>> = vec![Vec::new(), Vec::new()];
    table.push(vec![-0.25, 0.0, 0.25]);
    if max >= 3 {
        table.push(vec![0.0, -0.5, 0.0, 0.5]);
    }
    for n in 2..max.saturating_sub(1) {
        let nf = n as f64;
        let (p_n, p_n1) = (&table[n], &table[n + 1]);
        let mut next = vec![0.0; n + 3];
        let a = (nf + 1.0) * (2.0 * nf + 1.0);
        let b = nf * (nf + 1.0);
        for (i, &c) in p_n1.iter().enumerate() {
            next[i + 1] += a * c;
        }
        for (i, &c) in p_n.iter().enumerate() {
            next[i] -= b * c;
        }
        let denom = nf * (nf + 2.0);
        next.iter_mut().for_each(|c| *c /= denom);
        table.push(next);
    }
    table.truncate(max + 1);
    table
}

/// `P_k^(-1,-1)(x)` via the Legendre difference `n/(4n+2) (Q_{n+1} - Q_{n-1})`, `n = k - 1`.
pub fn jacobi_m1m1_eval_legendre(k: usize, x: f64) -> Result<f64> {
    check_jacobi_degree(k)?;
    let n = (k - 1) as f64;
    Ok(n / (4.0 * n + 2.0) * (legendre_eval(k, x) - legendre_eval(k - 2, x)))
}

/// `P_k^(-1,-1)(x)` by running the three-term recurrence pointwise.
pub fn jacobi_m1m1_eval_recurrence(k: usize, x: f64) -> Result<f64> {
    check_jacobi_degree(k)?;
    let mut p = 0.25 * (x * x - 1.0);
    if k == 2 {
        return Ok(p);
    }
    let mut p_next = 0.5 * x * (x * x - 1.0);
    for n in 2..k - 1 {
        let nf = n as f64;
        let p_new = ((nf + 1.0) * (2.0 * nf + 1.0) * x * p_next - nf * (nf + 1.0) * p)
            / (nf * (nf + 2.0));
        p = p_next;
        p_next = p_new;
    }
    Ok(p_next)
}

// ---------------------------------------------------------------------------
// Eigenfunctions e_k
// ---------------------------------------------------------------------------

fn check_basis_index(k: usize, max_degree: usize) -> Result<()> {
    if k >= 1 && k < max_degree {
        Ok(())
    } else {
        Err(Error::IndexOutOfRange {
            index: k,
            min: 1,
            max: max_degree - 1,
        })
    }
}

fn check_unit(name: &'static str, t: f64) -> Result<()> {
    if (0.0..=1.0).contains(&t) {
        Ok(())
    } else {
        Err(Error::OutOfDomain {
            name,
            value: t,
            domain: "[0, 1]",
        })
    }
}

/// Normalisation `(1/k) √(k(k+1)(2k+1))` of `e_k`.
pub fn e_norm(k: usize) -> f64 {
    let kf = k as f64;
    (kf * (kf + 1.0) * (2.0 * kf + 1.0)).sqrt() / kf
}

/// Eigenvalue `λ_k = 1/(k(k+1))`, the variance of the KL coefficient `I_k`.
pub fn eigenvalue(k: usize) -> Result<f64> {
    if k == 0 {
        return Err(Error::IndexOutOfRange {
            index: 0,
            min: 1,
            max: usize::MAX,
        });
    }
    let kf = k as f64;
    Ok(1.0 / (kf * (kf + 1.0)))
}

/// `e_k(t)` for `1 <= k < MAX_DEGREE`.
pub fn basis_e_eval(k: usize, t: f64) -> Result<f64> {
    check_basis_index(k, MAX_DEGREE)?;
    check_unit("t", t)?;
    Ok(e_unchecked(k, t))
}

/// `e_k(t) / (t(1 - t))`, a polynomial of degree `k - 1`.
///
/// Uses `P_{k+1}(x) = (x² - 1) Q_k'(x) / (2(k+1))`, so the singular weight is
/// never evaluated.
pub fn basis_e_over_weight(k: usize, t: f64) -> Result<f64> {
    check_basis_index(k, MAX_DEGREE)?;
    check_unit("t", t)?;
    Ok(e_over_weight_unchecked(k, t))
}

/// `e_k'(t) = k · norm_k · Q_k(2t - 1)`.
pub fn basis_e_derivative(k: usize, t: f64) -> Result<f64> {
    check_basis_index(k, MAX_DEGREE)?;
    check_unit("t", t)?;
    Ok(k as f64 * e_norm(k) * legendre_eval(k, 2.0 * t - 1.0))
}

pub(crate) fn e_unchecked(k: usize, t: f64) -> f64 {
    let x = 2.0 * t - 1.0;
    let n = k as f64;
    let (q_hi, q_lo) = if k == 1 {
        (legendre_eval(2, x), 1.0)
    } else {
        two_legendre(k + 1, k - 1, x)
    };
    e_norm(k) * n / (4.0 * n + 2.0) * (q_hi - q_lo)
}

pub(crate) fn e_over_weight_unchecked(k: usize, t: f64) -> f64 {
    let x = 2.0 * t - 1.0;
    let (_, dq) = legendre_with_derivative(k, x);
    -2.0 * e_norm(k) * dq / (k as f64 + 1.0)
}

/// `(Q_hi(x), Q_lo(x))` from a single recurrence sweep, `lo < hi`.
fn two_legendre(hi: usize, lo: usize, x: f64) -> (f64, f64) {
    let (mut q_prev, mut q) = (1.0, x);
    let mut q_lo = if lo == 0 { 1.0 } else { x };
    for n in 1..hi {
        let nf = n as f64;
        let q_next = ((2.0 * nf + 1.0) * x * q - nf * q_prev) / (nf + 1.0);
        q_prev = q;
        q = q_next;
        if n + 1 == lo {
            q_lo = q;
        }
    }
    (q, q_lo)
}

// ---------------------------------------------------------------------------
// Gauss–Legendre
// ---------------------------------------------------------------------------

/// Nodes and weights of an n-point Gauss–Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    /// `∫_{-1}^{1} f(x) dx`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// `∫_a^b f(t) dt` with the rule mapped affinely onto `[a, b]`.
    pub fn integrate_on<F: FnMut(f64) -> f64>(&self, a: f64, b: f64, mut f: F) -> f64 {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        half * self.integrate(|x| f(mid + half * x))
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// Gauss–Legendre rule with `n` nodes, computed by Newton iteration on `Q_n`.
///
/// Nodes are returned in ascending order and are exactly antisymmetric.
pub fn gauss_legendre(n: usize) -> Result<QuadratureRule> {
    if !(1..=MAX_NODES).contains(&n) {
        return Err(Error::UnsupportedNodeCount(n));
    }
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess for the i-th largest root.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dq = 1.0;
        for _ in 0..100 {
            let (q, d) = legendre_with_derivative(n, x);
            dq = d;
            let dx = q / d;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                dq = legendre_with_derivative(n, x).1;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dq * dq);
        nodes[n - 1 - i] = x;
        nodes[i] = -x;
        weights[n - 1 - i] = w;
        weights[i] = w;
    }
    if n % 2 == 1 {
        let mid = n / 2;
        nodes[mid] = 0.0;
        let dq = legendre_with_derivative(n, 0.0).1;
        weights[mid] = 2.0 / (dq * dq);
    }
    Ok(QuadratureRule { nodes, weights })
}

// ---------------------------------------------------------------------------
// Precomputed basis
// ---------------------------------------------------------------------------

/// Precomputed coefficient tables for `P_k^(-1,-1)` and `e_k` up to `max_degree`.
///
/// Immutable once built and safe to share across threads.
#[derive(Debug, Clone)]
pub struct PolyBasis {
    max_degree: usize,
    jacobi_coeffs: Vec<Vec<f64>>,
    e_coeffs: Vec<Vec<f64>>,
}

impl PolyBasis {
    pub fn new(max_degree: usize) -> Result<Self> {
        if !(2..=MAX_DEGREE).contains(&max_degree) {
            return Err(Error::DegreeOutOfRange {
                degree: max_degree,
                min: 2,
                max: MAX_DEGREE,
            });
        }
        let jacobi_coeffs = jacobi_table(max_degree);
        let mut e_coeffs = vec![Vec::new()];
        for k in 1..max_degree {
            let scale = e_norm(k);
            let mut c = compose_affine(&jacobi_coeffs[k + 1]);
            c.iter_mut().for_each(|v| *v *= scale);
            e_coeffs.push(c);
        }
        Ok(Self {
            max_degree,
            jacobi_coeffs,
            e_coeffs,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    /// Largest admissible eigenfunction index, `max_degree - 1`.
    pub fn max_index(&self) -> usize {
        self.max_degree - 1
    }

    /// Monomial coefficients of `P_k^(-1,-1)` in `x`, `2 <= k <= max_degree`.
    pub fn jacobi_coeffs(&self, k: usize) -> Result<&[f64]> {
        if !(2..=self.max_degree).contains(&k) {
            return Err(Error::DegreeOutOfRange {
                degree: k,
                min: 2,
                max: self.max_degree,
            });
        }
        Ok(&self.jacobi_coeffs[k])
    }

    /// Monomial coefficients of `e_k` in `t`, `1 <= k < max_degree`.
    ///
    /// Conditioning degrades quickly with `k`; prefer [`PolyBasis::e`] for evaluation.
    pub fn e_coeffs(&self, k: usize) -> Result<&[f64]> {
        check_basis_index(k, self.max_degree)?;
        Ok(&self.e_coeffs[k])
    }

    /// `e_k(t)`.
    pub fn e(&self, k: usize, t: f64) -> Result<f64> {
        check_basis_index(k, self.max_degree)?;
        check_unit("t", t)?;
        Ok(e_unchecked(k, t))
    }

    /// `e_k(t) / (t(1 - t))`.
    pub fn e_over_weight(&self, k: usize, t: f64) -> Result<f64> {
        check_basis_index(k, self.max_degree)?;
        check_unit("t", t)?;
        Ok(e_over_weight_unchecked(k, t))
    }

    /// `∫₀¹ e_i(t) e_j(t) / (t(1-t)) dt`.
    ///
    /// With `x = 2t - 1` the integral becomes `∫ e_i(x) · [e_j/(t(1-t))](x) dx / 2`, a
    /// polynomial of degree `i + j`, integrated exactly with `⌈(i+j+1)/2⌉` nodes.
    pub fn inner_product_mu(&self, i: usize, j: usize) -> Result<f64> {
        check_basis_index(i, self.max_degree)?;
        check_basis_index(j, self.max_degree)?;
        let rule = gauss_legendre((i + j + 2) / 2)?;
        Ok(rule.integrate_on(0.0, 1.0, |t| {
            e_unchecked(i, t) * e_over_weight_unchecked(j, t)
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_eval(0, 0.3), 1.0);
        for k in 0..30 {
            assert_abs_diff_eq!(legendre_eval(k, 1.0), 1.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(legendre_eval(2, 0.5), -0.125, epsilon = 1e-16);
    }

    #[test]
    fn legendre_derivative_matches_closed_forms() {
        let x = 0.37;
        assert_abs_diff_eq!(legendre_with_derivative(2, x).1, 3.0 * x, epsilon = 1e-15);
        assert_abs_diff_eq!(
            legendre_with_derivative(3, x).1,
            (15.0 * x * x - 3.0) / 2.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn jacobi_base_cases_and_k4() {
        assert_eq!(jacobi_m1m1_coeffs(2).unwrap(), vec![-0.25, 0.0, 0.25]);
        assert_eq!(jacobi_m1m1_coeffs(3).unwrap(), vec![0.0, -0.5, 0.0, 0.5]);
        let p4 = jacobi_m1m1_coeffs(4).unwrap();
        let expected = [3.0 / 16.0, 0.0, -18.0 / 16.0, 0.0, 15.0 / 16.0];
        for (a, b) in p4.iter().zip(expected) {
            assert_abs_diff_eq!(*a, b, epsilon = 1e-15);
        }
        // (3/14)(Q_4 - Q_2) cross-check.
        for &x in &[-0.9, -0.2, 0.0, 0.4, 1.0] {
            let via_legendre = 3.0 / 14.0 * (legendre_eval(4, x) - legendre_eval(2, x));
            assert_abs_diff_eq!(horner(&p4, x), via_legendre, epsilon = 1e-15);
        }
    }

    #[test]
    fn jacobi_degree_errors() {
        assert!(matches!(
            jacobi_m1m1_coeffs(1),
            Err(Error::DegreeOutOfRange { degree: 1, .. })
        ));
        assert!(jacobi_m1m1_eval_legendre(0, 0.1).is_err());
        assert!(jacobi_m1m1_eval_recurrence(65, 0.1).is_err());
    }

    #[test]
    fn jacobi_legendre_examples() {
        assert_abs_diff_eq!(jacobi_m1m1_eval_legendre(2, 1.0).unwrap(), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(jacobi_m1m1_eval_legendre(2, -1.0).unwrap(), 0.0, epsilon = 1e-16);
        assert_abs_diff_eq!(jacobi_m1m1_eval_legendre(4, 0.0).unwrap(), 3.0 / 16.0, epsilon = 1e-16);
        assert_abs_diff_eq!(jacobi_m1m1_eval_legendre(3, 0.5).unwrap(), -0.1875, epsilon = 1e-16);
    }

    #[test]
    fn coefficient_route_matches_legendre_route_at_moderate_degree() {
        // Monomial coefficients are only trustworthy while their magnitudes stay small;
        // up to degree 12 they agree with the Legendre route to 1e-11 of the sup norm.
        for k in 2..=12 {
            let c = jacobi_m1m1_coeffs(k).unwrap();
            let xs: Vec<f64> = (0..200).map(|i| -1.0 + 2.0 * i as f64 / 199.0).collect();
            let sup = xs
                .iter()
                .map(|&x| jacobi_m1m1_eval_legendre(k, x).unwrap().abs())
                .fold(0.0, f64::max);
            for &x in &xs {
                let diff = (horner(&c, x) - jacobi_m1m1_eval_legendre(k, x).unwrap()).abs();
                assert!(diff <= 1e-11 * sup, "k={k} x={x} diff={diff:e}");
            }
        }
    }

    #[test]
    fn jacobi_roots_and_degree() {
        let basis = PolyBasis::new(30).unwrap();
        for k in 2..=30 {
            let c = basis.jacobi_coeffs(k).unwrap();
            assert_eq!(c.len(), k + 1);
            assert!(c[k] != 0.0);
            assert_abs_diff_eq!(jacobi_m1m1_eval_legendre(k, 1.0).unwrap(), 0.0, epsilon = 1e-14);
            assert_abs_diff_eq!(jacobi_m1m1_eval_legendre(k, -1.0).unwrap(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn synthetic_division_recovers_quotient() {
        // (x² - 1)(2x³ + x - 5)
        let q = [-5.0, 1.0, 0.0, 2.0];
        let p = [5.0, -1.0, -5.0, -1.0, 0.0, 2.0];
        assert_eq!(divide_by_x2_minus_1(&p), q.to_vec());
        let basis = PolyBasis::new(12).unwrap();
        for k in 2..=12 {
            let quotient = divide_by_x2_minus_1(basis.jacobi_coeffs(k).unwrap());
            assert_eq!(quotient.len(), k - 1);
            for &x in &[-0.7, 0.1, 0.55] {
                // Q_{k-1}'(x) / (2k) is the same quotient.
                let expected = legendre_with_derivative(k - 1, x).1 / (2.0 * k as f64);
                assert_abs_diff_eq!(horner(&quotient, x), expected, epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn e_examples() {
        // Positive leading coefficient makes e_1(t) = -√6 t(1-t).
        assert_abs_diff_eq!(basis_e_eval(1, 0.5).unwrap(), -(6f64).sqrt() / 4.0, epsilon = 1e-15);
        for k in 1..20 {
            assert_eq!(basis_e_eval(k, 0.0).unwrap().abs(), 0.0);
            assert_abs_diff_eq!(basis_e_eval(k, 1.0).unwrap(), 0.0, epsilon = 1e-14);
        }
        assert_abs_diff_eq!(basis_e_eval(2, 0.5).unwrap(), 0.0, epsilon = 1e-16);
        assert!(basis_e_eval(0, 0.5).is_err());
        assert!(basis_e_eval(64, 0.5).is_err());
        assert!(basis_e_eval(3, 1.5).is_err());
    }

    #[test]
    fn e_coefficients_have_positive_leading_term_and_roots() {
        let basis = PolyBasis::new(16).unwrap();
        for k in 1..16 {
            let c = basis.e_coeffs(k).unwrap();
            assert_eq!(c.len(), k + 2);
            assert!(c[k + 1] > 0.0, "k={k}");
            assert_abs_diff_eq!(c[0], 0.0, epsilon = 1e-9);
            let scale: f64 = c.iter().map(|v| v.abs()).sum();
            assert!(horner(c, 1.0).abs() <= 1e-13 * scale);
            for &t in &[0.1, 0.33, 0.8] {
                // Composing with 2t - 1 inflates the coefficients by roughly 4^k.
                let tol = 1e-15 * 4f64.powi(k as i32 + 1);
                assert_abs_diff_eq!(horner(c, t), basis.e(k, t).unwrap(), epsilon = tol);
            }
        }
        assert!(basis.e_coeffs(16).is_err());
    }

    #[test]
    fn e_over_weight_is_desingularised_ratio() {
        for k in 1..25 {
            for &t in &[0.05, 0.3, 0.5, 0.71, 0.97] {
                let ratio = basis_e_eval(k, t).unwrap() / (t * (1.0 - t));
                assert_abs_diff_eq!(basis_e_over_weight(k, t).unwrap(), ratio, epsilon = 1e-10);
            }
        }
    }

    #[test]
    fn eigenvalues() {
        assert_eq!(eigenvalue(1).unwrap(), 0.5);
        assert_abs_diff_eq!(eigenvalue(2).unwrap(), 1.0 / 6.0, epsilon = 1e-17);
        assert_abs_diff_eq!(eigenvalue(10).unwrap(), 1.0 / 110.0, epsilon = 1e-17);
        assert!(eigenvalue(0).is_err());
    }

    #[test]
    fn gauss_legendre_closed_forms() {
        let r1 = gauss_legendre(1).unwrap();
        assert_eq!(r1.nodes, vec![0.0]);
        assert_eq!(r1.weights, vec![2.0]);

        let r2 = gauss_legendre(2).unwrap();
        let a = 1.0 / 3f64.sqrt();
        assert_abs_diff_eq!(r2.nodes[0], -a, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.nodes[1], a, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.weights[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.integrate(|x| x * x), 2.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r2.integrate(|x| x * x * x), 0.0, epsilon = 1e-15);

        let r3 = gauss_legendre(3).unwrap();
        let b = (0.6f64).sqrt();
        assert_abs_diff_eq!(r3.nodes[0], -b, epsilon = 1e-15);
        assert_eq!(r3.nodes[1], 0.0);
        assert_abs_diff_eq!(r3.nodes[2], b, epsilon = 1e-15);
        assert_abs_diff_eq!(r3.weights[0], 5.0 / 9.0, epsilon = 1e-15);
        assert_abs_diff_eq!(r3.weights[1], 8.0 / 9.0, epsilon = 1e-15);
        for p in 0..=5 {
            let exact = if p % 2 == 0 { 2.0 / (p as f64 + 1.0) } else { 0.0 };
            assert_abs_diff_eq!(r3.integrate(|x| x.powi(p)), exact, epsilon = 1e-15);
        }
    }

    #[test]
    fn gauss_legendre_exactness_and_weights() {
        for n in 1..=MAX_NODES {
            let rule = gauss_legendre(n).unwrap();
            assert_eq!(rule.len(), n);
            let total: f64 = rule.weights.iter().sum();
            assert_abs_diff_eq!(total, 2.0, epsilon = 1e-14);
            assert!(rule.weights.iter().all(|&w| w > 0.0));
            assert!(rule.nodes.windows(2).all(|w| w[0] < w[1]));
            // Degree 2n-1 exactness, checked on Legendre polynomials (∫ Q_k = 0, k >= 1).
            for k in 1..2 * n {
                let v = rule.integrate(|x| legendre_eval(k, x));
                assert!(v.abs() < 1e-13, "n={n} k={k} v={v:e}");
            }
        }
        assert!(matches!(gauss_legendre(0), Err(Error::UnsupportedNodeCount(0))));
        assert!(gauss_legendre(65).is_err());
    }

    #[test]
    fn orthonormality_small() {
        let basis = PolyBasis::new(8).unwrap();
        assert_abs_diff_eq!(basis.inner_product_mu(1, 1).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(basis.inner_product_mu(1, 2).unwrap(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(basis.inner_product_mu(3, 3).unwrap(), 1.0, epsilon = 1e-14);
        assert!(basis.inner_product_mu(0, 1).is_err());
        assert!(basis.inner_product_mu(1, 8).is_err());
    }

    #[test]
    fn basis_construction_bounds() {
        assert!(PolyBasis::new(1).is_err());
        assert!(PolyBasis::new(65).is_err());
        let b = PolyBasis::new(64).unwrap();
        assert_eq!(b.max_index(), 63);
        assert!(b.e(63, 0.4).is_ok());
    }
}
