//! Quick invariant suites, a few seconds in total, run by `polybm check`.

use rand::Rng;

use crate::brownian::{self, IncrementPair};
use crate::error::Result;
use crate::harness::{self, ExperimentConfig, Metric};
use crate::igbm::{self, IgbmParams, SchemeKind};
use crate::levy;
use crate::orthopoly::{self, PolyBasis};
use crate::rng::stream;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub suite: &'static str,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    fn new(suite: &'static str, name: &'static str, passed: bool, detail: String) -> Self {
        Self { suite, name, passed, detail }
    }
}

/// `max |<e_i, e_j>_μ - δ_ij|` over `1 ≤ i, j ≤ kmax`.
pub fn orthonormality_defect(kmax: usize) -> Result<f64> {
    let basis = PolyBasis::new(kmax + 1)?;
    let mut worst = 0.0f64;
    for i in 1..=kmax {
        for j in 1..=kmax {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((basis.inner_product_mu(i, j)? - target).abs());
        }
    }
    Ok(worst)
}

/// Largest disagreement between the three-term recurrence and the Legendre
/// difference for the (-1,-1)-Jacobi polynomials `P_2..=P_kmax`, on `points`
/// equispaced points of `[-1, 1]`, relative to the largest `|P_k|` on the grid.
pub fn jacobi_route_defect(kmax: usize, points: usize) -> Result<f64> {
    let grid: Vec<f64> = (0..points)
        .map(|i| -1.0 + 2.0 * i as f64 / (points - 1) as f64)
        .collect();
    let mut worst = 0.0f64;
    for k in 2..=kmax {
        let mut scale = 0.0f64;
        let mut diff = 0.0f64;
        for &x in &grid {
            let a = orthopoly::jacobi_m1m1_eval_recurrence(k, x)?;
            let b = orthopoly::jacobi_m1m1_eval_legendre(k, x)?;
            scale = scale.max(a.abs());
            diff = diff.max((a - b).abs());
        }
        worst = worst.max(diff / scale);
    }
    Ok(worst)
}

/// `Σ_{k ≤ terms} λ_k e_k(s) e_k(t)`, which tends to `min(s,t) - st`.
pub fn mercer_partial_sum(s: f64, t: f64, terms: usize) -> f64 {
    (1..=terms)
        .map(|k| orthopoly::e_unchecked(k, s) * orthopoly::e_unchecked(k, t) / (k * (k + 1)) as f64)
        .sum()
}

fn suite_orthopoly() -> Result<Vec<CheckResult>> {
    let ortho = orthonormality_defect(20)?;
    let routes = jacobi_route_defect(50, 200)?;
    let rule = orthopoly::gauss_legendre(32)?;
    let weight_sum: f64 = rule.weights.iter().sum();
    Ok(vec![
        CheckResult::new("orthopoly", "orthonormality k<=20", ortho < 1e-10, format!("max defect {ortho:.3e}")),
        CheckResult::new("orthopoly", "recurrence vs legendre k<=50", routes < 1e-10, format!("max rel {routes:.3e}")),
        CheckResult::new(
            "orthopoly",
            "gauss-legendre weights",
            (weight_sum - 2.0).abs() < 1e-13,
            format!("sum {weight_sum:.16}"),
        ),
    ])
}

fn suite_brownian(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = stream(seed, 1);
    let mut assoc = 0.0f64;
    for _ in 0..1000 {
        let mut q = [IncrementPair { w: 0.0, h_area: 0.0, length: 0.25 }; 4];
        brownian::sample_pairs(0.25, &mut rng, &mut q)?;
        let direct = brownian::coarsen(&q)?;
        let nested = brownian::coarsen(&[brownian::coarsen(&q[..2])?, brownian::coarsen(&q[2..])?])?;
        assoc = assoc.max((direct.h_area - nested.h_area).abs()).max((direct.w - nested.w).abs());
    }

    let n = 100_000;
    let (mut sw, mut sh, mut swh) = (0.0, 0.0, 0.0);
    for _ in 0..n {
        let p = brownian::sample_pair(1.0, &mut rng)?;
        sw += p.w * p.w;
        sh += p.h_area * p.h_area;
        swh += p.w * p.h_area;
    }
    let (vw, vh) = (sw / n as f64, sh / n as f64);
    let corr = swh / n as f64 / (vw * vh).sqrt();
    let tol = 4.0 * (2.0 / n as f64).sqrt();
    let law_ok = (vw - 1.0).abs() < tol && (vh * 12.0 - 1.0).abs() < tol && corr.abs() < 4.0 / (n as f64).sqrt();

    let (s, t) = (0.3, 0.7);
    let mercer = mercer_partial_sum(s, t, 200);
    let mercer_err = (mercer - 0.09).abs();

    Ok(vec![
        CheckResult::new("brownian", "coarsen associativity", assoc < 1e-14, format!("max diff {assoc:.3e}")),
        CheckResult::new(
            "brownian",
            "increment pair law",
            law_ok,
            format!("var(W) {vw:.4}, 12 var(H) {:.4}, corr {corr:.4}", 12.0 * vh),
        ),
        CheckResult::new(
            "brownian",
            "mercer partial sum at (0.3, 0.7)",
            mercer_err < 1e-3,
            format!("200 terms, |sum - 0.09| = {mercer_err:.3e}"),
        ),
    ])
}

fn suite_levy(seed: u64) -> Result<Vec<CheckResult>> {
    let mut rng = stream(seed, 2);
    let mut alg = 0.0f64;
    let mut var_form = 0.0f64;
    for _ in 0..100 {
        let w: f64 = rng.random_range(-3.0..3.0);
        let hh: f64 = rng.random_range(-1.0..1.0);
        let l: f64 = rng.random_range(-0.5..0.5);
        let h: f64 = rng.random_range(0.01..2.0);
        let t = levy::triple_integrals_from_whl(w, hh, l, h)?;
        alg = alg
            .max((t.i_wwt + t.i_wtw + t.i_tww - 0.5 * h * w * w).abs())
            .max((t.i_wwt - 2.0 * t.i_wtw + t.i_tww - 6.0 * l).abs());
        let v = levy::cond_var_l(&IncrementPair { w, h_area: hh, length: 1.0 })?;
        var_form = var_form.max((4.0 * v - (11.0 / 6300.0 + w * w / 180.0 + hh * hh / 175.0)).abs());
    }
    Ok(vec![
        CheckResult::new("levy", "triple integral identities", alg < 1e-14, format!("max defect {alg:.3e}")),
        CheckResult::new("levy", "conditional variance form", var_form < 1e-14, format!("max defect {var_form:.3e}")),
    ])
}

fn suite_igbm(seed: u64) -> Result<Vec<CheckResult>> {
    let p = IgbmParams::reference();
    let n = 100;
    let h = p.horizon / n as f64;
    let mut pairs = vec![IncrementPair { w: 0.0, h_area: 0.0, length: h }; n];
    let mut min = f64::INFINITY;
    for path in 0..1000 {
        brownian::sample_pairs(h, &mut stream(seed ^ 0x5eed, path), &mut pairs)?;
        for k in SchemeKind::ALL {
            let traj = igbm::simulate_trajectory(k, &p, &pairs)?;
            min = traj.iter().copied().fold(min, f64::min);
        }
    }
    let mut mono = true;
    let mut x = -20.0;
    while x < 20.0 {
        mono &= igbm::phi(x + 1e-3) >= igbm::phi(x);
        x += 1e-3;
    }
    let d = 1e-6;
    let fd = |f: &dyn Fn(f64) -> f64, y: f64| (f(y + d) - f(y - d)) / (2.0 * d);
    let bracket = |y: f64| fd(&|v| p.drift(v), y) * p.diffusion(y) - fd(&|v| p.diffusion(v), y) * p.drift(y);
    let bracket_err = (0..20)
        .map(|i| (bracket(0.05 * i as f64) - p.bracket_10()).abs())
        .fold(0.0, f64::max);
    Ok(vec![
        CheckResult::new("igbm", "non-negativity", min >= 0.0, format!("min over 1000 paths x 5 schemes {min:.3e}")),
        CheckResult::new("igbm", "phi monotone", mono, "on [-20, 20]".into()),
        CheckResult::new(
            "igbm",
            "lie bracket constants",
            bracket_err < 1e-8 && p.bracket_10() == -p.ab() * p.sigma,
            format!("[f1,f0] = {:.3e}, finite-difference defect {bracket_err:.1e}", p.bracket_10()),
        ),
    ])
}

fn suite_harness(seed: u64) -> Result<Vec<CheckResult>> {
    let config = ExperimentConfig {
        num_paths: 1500,
        step_counts: vec![10, 20, 40],
        seed,
        ..ExperimentConfig::reference()
    };
    let a = harness::run_experiment(&config)?;
    let b = harness::run_experiment(&ExperimentConfig { workers: 4, ..config })?;
    let same = a.errors_csv(Metric::Strong) == b.errors_csv(Metric::Strong)
        && a.errors_csv(Metric::Weak) == b.errors_csv(Metric::Weak);
    let log_ode = a.get(Metric::Strong, SchemeKind::LogOde, 40).map(|e| e.error);
    let euler = a.get(Metric::Strong, SchemeKind::EulerMaruyama, 40).map(|e| e.error);
    let ordered = matches!((log_ode, euler), (Some(l), Some(e)) if l < e);
    Ok(vec![
        CheckResult::new("harness", "worker invariance", same, "1 vs 4 workers".into()),
        CheckResult::new(
            "harness",
            "log-ode beats euler",
            ordered,
            format!("S_40 log-ode {:?}, euler {:?}", log_ode, euler),
        ),
    ])
}

type Suite = Box<dyn Fn() -> Result<Vec<CheckResult>>>;

/// Runs every suite; an `Err` is reported as a failed check of its suite.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    let suites: [(&'static str, Suite); 5] = [
        ("orthopoly", Box::new(suite_orthopoly)),
        ("brownian", Box::new(move || suite_brownian(seed))),
        ("levy", Box::new(move || suite_levy(seed))),
        ("igbm", Box::new(move || suite_igbm(seed))),
        ("harness", Box::new(move || suite_harness(seed))),
    ];
    suites
        .iter()
        .flat_map(|(name, suite)| match suite() {
            Ok(results) => results,
            Err(e) => vec![CheckResult::new(name, "suite error", false, e.to_string())],
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_checks_pass() {
        for r in run_all(1) {
            assert!(r.passed, "{}: {} ({})", r.suite, r.name, r.detail);
        }
    }
}
