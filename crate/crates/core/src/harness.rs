//! Monte Carlo strong and weak error estimation for the IGBM schemes.
//!
//! Every path is sampled once on a shared base grid of `(W, H)` pairs and
//! coarsened exactly to each level it is needed at. A log-ODE solution with
//! `max(10, ceil(1000/N))` substeps per coarse step is the reference for `N`
//! coarse steps, so coarse and reference solutions see the same Brownian path.
//!
//! Path `i` draws from stream `i` of the seed, and paths are reduced in fixed
//! blocks whose statistics are merged in order. Results therefore do not
//! depend on the number of worker threads.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::brownian::{coarsen_into, sample_pair_unchecked, IncrementPair};
use crate::error::{Error, Result};
use crate::igbm::{log_ode_unchecked, simulate_unchecked, IgbmParams, SchemeKind};
use crate::rng;

/// Paths per reduction block.
pub const BLOCK_PATHS: usize = 1024;
/// Smallest accepted path count.
pub const MIN_PATHS: usize = 100;
/// Largest accepted base grid (steps per path).
pub const MAX_BASE_STEPS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub params: IgbmParams,
    pub schemes: Vec<SchemeKind>,
    /// Coarse step counts `N`, strictly increasing.
    pub step_counts: Vec<usize>,
    pub num_paths: usize,
    pub seed: u64,
    /// Worker threads; does not affect results.
    pub workers: usize,
}

impl ExperimentConfig {
    /// Reference parameters, all five schemes, `N ∈ {25, 50, 100, 200, 400}`, 10⁴ paths.
    pub fn reference() -> Self {
        Self {
            params: IgbmParams::reference(),
            schemes: SchemeKind::ALL.to_vec(),
            step_counts: vec![25, 50, 100, 200, 400],
            num_paths: 10_000,
            seed: 42,
            workers: 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.schemes.is_empty() {
            return bad("no schemes selected".into());
        }
        let mut seen = self.schemes.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.schemes.len() {
            return bad("duplicate scheme".into());
        }
        if self.step_counts.is_empty() {
            return bad("no step counts given".into());
        }
        if self.step_counts.contains(&0) {
            return bad("step counts must be positive".into());
        }
        if !self.step_counts.windows(2).all(|w| w[0] < w[1]) {
            return bad("step counts must be strictly increasing".into());
        }
        if self.num_paths < MIN_PATHS {
            return bad(format!("need at least {MIN_PATHS} paths, got {}", self.num_paths));
        }
        if self.workers == 0 {
            return bad("workers must be positive".into());
        }
        base_steps(&self.step_counts)?;
        Ok(())
    }
}

/// Reference substeps per coarse step: `max(10, ceil(1000/N))`, so the
/// reference step is at most `min(h/10, T/1000)`.
pub fn fine_substeps(n: usize) -> usize {
    10usize.max(1000usize.div_ceil(n.max(1)))
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Size of the shared base grid: the lcm of the reference grid sizes.
pub fn base_steps(step_counts: &[usize]) -> Result<usize> {
    let mut acc = 1usize;
    for &n in step_counts {
        let fine = n
            .checked_mul(fine_substeps(n))
            .ok_or_else(|| Error::InvalidConfig(format!("step count {n} too large")))?;
        acc = (acc / gcd(acc, fine))
            .checked_mul(fine)
            .filter(|&v| v <= MAX_BASE_STEPS)
            .ok_or_else(|| {
                Error::InvalidConfig(format!(
                    "step counts {step_counts:?} need a base grid above {MAX_BASE_STEPS} steps"
                ))
            })?;
    }
    Ok(acc)
}

/// Estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorEstimate {
    pub error: f64,
    pub std_err: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    Strong,
    Weak,
}

impl Metric {
    pub fn name(self) -> &'static str {
        match self {
            Metric::Strong => "strong",
            Metric::Weak => "weak",
        }
    }
}

/// Least-squares fit of `log(error) = intercept + slope · log(h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope: from residuals in [`fit_slope`], from the
    /// Monte Carlo errors of the points in [`fit_slope_mc`].
    pub slope_stderr: f64,
}

/// One `(scheme, N)` cell of the report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub scheme: SchemeKind,
    pub steps: usize,
    pub h: f64,
    pub estimate: ErrorEstimate,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlopeRow {
    pub scheme: SchemeKind,
    pub metric: Metric,
    /// `None` when fewer than three positive errors are available.
    pub fit: Option<SlopeFit>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConvergenceReport {
    pub config: ExperimentConfig,
    pub strong: Vec<ErrorRow>,
    pub weak: Vec<ErrorRow>,
    pub slopes: Vec<SlopeRow>,
}

impl ConvergenceReport {
    pub fn rows(&self, metric: Metric) -> &[ErrorRow] {
        match metric {
            Metric::Strong => &self.strong,
            Metric::Weak => &self.weak,
        }
    }

    pub fn get(&self, metric: Metric, scheme: SchemeKind, steps: usize) -> Option<ErrorEstimate> {
        self.rows(metric)
            .iter()
            .find(|r| r.scheme == scheme && r.steps == steps)
            .map(|r| r.estimate)
    }

    pub fn slope(&self, metric: Metric, scheme: SchemeKind) -> Option<SlopeFit> {
        self.slopes
            .iter()
            .find(|r| r.scheme == scheme && r.metric == metric)
            .and_then(|r| r.fit)
    }

    /// `scheme,N,h,error,std_err` for the given metric.
    pub fn errors_csv(&self, metric: Metric) -> String {
        let mut out = String::from("scheme,N,h,error,std_err\n");
        for r in self.rows(metric) {
            let _ = writeln!(
                out,
                "{},{},{},{},{}",
                r.scheme,
                r.steps,
                fmt_f64(r.h),
                fmt_f64(r.estimate.error),
                fmt_f64(r.estimate.std_err)
            );
        }
        out
    }

    /// `scheme,metric,slope,slope_stderr`; unfittable slopes are written as `NaN`.
    pub fn slopes_csv(&self) -> String {
        let mut out = String::from("scheme,metric,slope,slope_stderr\n");
        for r in &self.slopes {
            let (s, se) = r
                .fit
                .map_or((f64::NAN, f64::NAN), |f| (f.slope, f.slope_stderr));
            let _ = writeln!(out, "{},{},{},{}", r.scheme, r.metric.name(), fmt_f64(s), fmt_f64(se));
        }
        out
    }
}

/// 17 significant digits in scientific notation, independent of locale.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

// ---------------------------------------------------------------------------
// Slope fits
// ---------------------------------------------------------------------------

fn log_points(points: &[(f64, f64)]) -> Result<Vec<(f64, f64)>> {
    if points.len() < 3 {
        return Err(Error::InvalidParameter(format!(
            "slope fit needs at least 3 points, got {}",
            points.len()
        )));
    }
    points
        .iter()
        .map(|&(h, e)| {
            if h > 0.0 && e > 0.0 && h.is_finite() && e.is_finite() {
                Ok((h.ln(), e.ln()))
            } else {
                Err(Error::InvalidParameter(format!(
                    "slope fit needs positive finite points, got ({h}, {e})"
                )))
            }
        })
        .collect()
}

struct Ols {
    slope: f64,
    intercept: f64,
    xbar: f64,
    sxx: f64,
}

fn ols(xy: &[(f64, f64)]) -> Result<Ols> {
    let n = xy.len() as f64;
    let xbar = xy.iter().map(|p| p.0).sum::<f64>() / n;
    let ybar = xy.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = xy.iter().map(|p| (p.0 - xbar).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("slope fit needs distinct h values".into()));
    }
    let sxy: f64 = xy.iter().map(|p| (p.0 - xbar) * (p.1 - ybar)).sum();
    let slope = sxy / sxx;
    Ok(Ols {
        slope,
        intercept: ybar - slope * xbar,
        xbar,
        sxx,
    })
}

/// Ordinary least squares on `(log h, log error)`; the standard error comes from the residuals.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    let xy = log_points(points)?;
    let fit = ols(&xy)?;
    let rss: f64 = xy
        .iter()
        .map(|&(x, y)| (y - fit.intercept - fit.slope * x).powi(2))
        .sum();
    Ok(SlopeFit {
        slope: fit.slope,
        intercept: fit.intercept,
        slope_stderr: (rss / (xy.len() as f64 - 2.0) / fit.sxx).sqrt(),
    })
}

/// As [`fit_slope`], with the standard error propagated from independent
/// Monte Carlo errors: `Var(slope) ≈ Σ cᵢ² (seᵢ/eᵢ)²`, `cᵢ = (xᵢ - x̄)/Sxx`.
pub fn fit_slope_mc(points: &[(f64, ErrorEstimate)]) -> Result<SlopeFit> {
    let k = points.len();
    let mut log_cov = vec![0.0; k * k];
    for (i, (_, e)) in points.iter().enumerate() {
        log_cov[i * k + i] = (e.std_err / e.error).powi(2);
    }
    let plain: Vec<(f64, f64)> = points.iter().map(|(h, e)| (*h, e.error)).collect();
    fit_slope_cov(&plain, &log_cov)
}

/// As [`fit_slope`], with `Var(slope) = cᵀ Σ c` for a given covariance `Σ`
/// (row-major, `k × k`) of the `log(error)` values.
pub fn fit_slope_cov(points: &[(f64, f64)], log_cov: &[f64]) -> Result<SlopeFit> {
    let xy = log_points(points)?;
    let k = xy.len();
    if log_cov.len() != k * k {
        return Err(Error::InvalidParameter(format!(
            "covariance has {} entries, expected {}",
            log_cov.len(),
            k * k
        )));
    }
    let fit = ols(&xy)?;
    let c: Vec<f64> = xy.iter().map(|&(x, _)| (x - fit.xbar) / fit.sxx).collect();
    let mut var = 0.0;
    for i in 0..k {
        for j in 0..k {
            var += c[i] * c[j] * log_cov[i * k + j];
        }
    }
    Ok(SlopeFit {
        slope: fit.slope,
        intercept: fit.intercept,
        slope_stderr: var.max(0.0).sqrt(),
    })
}

// ---------------------------------------------------------------------------
// Monte Carlo
// ---------------------------------------------------------------------------

/// Running means and co-moment matrix of a vector-valued sample.
#[derive(Debug, Clone, PartialEq)]
struct CoMoments {
    n: u64,
    mean: Vec<f64>,
    /// Row-major sums of `(xᵢ - x̄ᵢ)(xⱼ - x̄ⱼ)`.
    c: Vec<f64>,
}

impl CoMoments {
    fn new(dim: usize) -> Self {
        Self {
            n: 0,
            mean: vec![0.0; dim],
            c: vec![0.0; dim * dim],
        }
    }

    fn dim(&self) -> usize {
        self.mean.len()
    }

    fn push(&mut self, x: &[f64], scratch: &mut [f64]) {
        let k = self.dim();
        self.n += 1;
        let nf = self.n as f64;
        for ((d, &xi), m) in scratch.iter_mut().zip(x).zip(self.mean.iter_mut()) {
            *d = xi - *m;
            *m += *d / nf;
        }
        for (row, &d) in self.c.chunks_exact_mut(k).zip(scratch.iter()) {
            for ((c, &xj), &mj) in row.iter_mut().zip(x).zip(&self.mean) {
                *c += d * (xj - mj);
            }
        }
    }

    fn merge(&mut self, other: &CoMoments) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = other.clone();
            return;
        }
        let k = self.dim();
        let n = self.n + other.n;
        let (na, nb) = (self.n as f64, other.n as f64);
        let delta: Vec<f64> = (0..k).map(|i| other.mean[i] - self.mean[i]).collect();
        for i in 0..k {
            self.mean[i] += delta[i] * nb / n as f64;
            for j in 0..k {
                self.c[i * k + j] += other.c[i * k + j] + delta[i] * delta[j] * na * nb / n as f64;
            }
        }
        self.n = n;
    }

    /// Covariance of the sample means of components `i` and `j`.
    fn mean_cov(&self, i: usize, j: usize) -> f64 {
        if self.n < 2 {
            return f64::NAN;
        }
        let n = self.n as f64;
        self.c[i * self.dim() + j] / (n - 1.0) / n
    }

    fn std_err(&self, i: usize) -> f64 {
        self.mean_cov(i, i).max(0.0).sqrt()
    }
}

/// Grid levels needed for one experiment.
struct Plan {
    base: usize,
    /// Distinct levels (coarse and reference), descending.
    levels: Vec<usize>,
    /// `(N, reference level)` per step count.
    coarse: Vec<(usize, usize)>,
}

impl Plan {
    fn new(step_counts: &[usize]) -> Result<Self> {
        let base = base_steps(step_counts)?;
        let coarse: Vec<(usize, usize)> = step_counts
            .iter()
            .map(|&n| (n, n * fine_substeps(n)))
            .collect();
        let mut levels: Vec<usize> = coarse.iter().flat_map(|&(n, f)| [n, f]).collect();
        levels.sort_unstable_by(|a, b| b.cmp(a));
        levels.dedup();
        Ok(Self { base, levels, coarse })
    }
}

/// Per-path scratch space.
struct Workspace {
    base: Vec<IncrementPair>,
    levels: BTreeMap<usize, Vec<IncrementPair>>,
    references: BTreeMap<usize, f64>,
}

impl Workspace {
    fn new(plan: &Plan) -> Self {
        Self {
            base: Vec::with_capacity(plan.base),
            levels: plan
                .levels
                .iter()
                .map(|&k| (k, Vec::with_capacity(k)))
                .collect(),
            references: BTreeMap::new(),
        }
    }

    fn fill(&mut self, plan: &Plan, params: &IgbmParams, seed: u64, path: u64) {
        let mut rng = rng::stream(seed, path);
        let dt = params.horizon / plan.base as f64;
        self.base.clear();
        self.base
            .extend((0..plan.base).map(|_| sample_pair_unchecked(dt, &mut rng)));
        for (&k, out) in self.levels.iter_mut() {
            coarsen_into(&self.base, plan.base / k, out);
        }
        self.references.clear();
        for &(_, f) in &plan.coarse {
            let pairs = &self.levels[&f];
            self.references.entry(f).or_insert_with(|| {
                pairs
                    .iter()
                    .fold(params.y0, |y, p| log_ode_unchecked(y, params, p))
            });
        }
    }
}

/// Terminal values of `scheme` on `coarse` steps and of the log-ODE reference on
/// `fine` steps, both driven by the same base path of `base` pairs.
///
/// `coarse` and `fine` must divide `base_pairs.len()`.
pub fn coupled_terminal_values(
    scheme: SchemeKind,
    params: &IgbmParams,
    base_pairs: &[IncrementPair],
    coarse: usize,
    fine: usize,
) -> Result<(f64, f64)> {
    let base = base_pairs.len();
    if base == 0 {
        return Err(Error::Empty("no base pairs"));
    }
    for k in [coarse, fine] {
        if k == 0 || !base.is_multiple_of(k) {
            return Err(Error::InvalidConfig(format!(
                "{k} steps do not divide the base grid of {base}"
            )));
        }
    }
    crate::brownian::coarsen(base_pairs)?;
    let mut c = Vec::new();
    let mut f = Vec::new();
    coarsen_into(base_pairs, base / coarse, &mut c);
    coarsen_into(base_pairs, base / fine, &mut f);
    Ok((
        simulate_unchecked(scheme, params, &c),
        simulate_unchecked(SchemeKind::LogOde, params, &f),
    ))
}

fn payoff(y: f64, strike: f64) -> f64 {
    (y - strike).max(0.0)
}

/// Accumulators for one block: per scheme, the vectors over step counts of
/// squared differences and of payoff differences.
#[derive(Clone)]
struct BlockStats {
    sq: Vec<CoMoments>,
    payoff: Vec<CoMoments>,
}

impl BlockStats {
    fn new(schemes: usize, steps: usize) -> Self {
        Self {
            sq: vec![CoMoments::new(steps); schemes],
            payoff: vec![CoMoments::new(steps); schemes],
        }
    }
}

fn run_block(config: &ExperimentConfig, plan: &Plan, block: usize) -> BlockStats {
    let k = plan.coarse.len();
    let mut stats = BlockStats::new(config.schemes.len(), k);
    let mut ws = Workspace::new(plan);
    let (mut sq, mut pay, mut scratch) = (vec![0.0; k], vec![0.0; k], vec![0.0; k]);
    let p = &config.params;
    let start = block * BLOCK_PATHS;
    let end = (start + BLOCK_PATHS).min(config.num_paths);
    for path in start..end {
        ws.fill(plan, p, config.seed, path as u64);
        for (s, &scheme) in config.schemes.iter().enumerate() {
            for (j, &(n, f)) in plan.coarse.iter().enumerate() {
                let y = simulate_unchecked(scheme, p, &ws.levels[&n]);
                let y_ref = ws.references[&f];
                let d = y - y_ref;
                sq[j] = d * d;
                pay[j] = payoff(y, p.b) - payoff(y_ref, p.b);
            }
            stats.sq[s].push(&sq, &mut scratch);
            stats.payoff[s].push(&pay, &mut scratch);
        }
    }
    stats
}

/// Strong and weak errors for every `(scheme, N)` with log-log slope fits.
///
/// Slope standard errors account for the correlation between step counts,
/// which share their Brownian paths.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ConvergenceReport> {
    config.validate()?;
    let plan = Plan::new(&config.step_counts)?;
    let blocks = config.num_paths.div_ceil(BLOCK_PATHS);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.workers)
        .build()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    let per_block: Vec<BlockStats> = pool.install(|| {
        (0..blocks)
            .into_par_iter()
            .map(|b| run_block(config, &plan, b))
            .collect()
    });

    let k = plan.coarse.len();
    let mut total = BlockStats::new(config.schemes.len(), k);
    for b in &per_block {
        for s in 0..config.schemes.len() {
            total.sq[s].merge(&b.sq[s]);
            total.payoff[s].merge(&b.payoff[s]);
        }
    }

    let mut strong = Vec::new();
    let mut weak = Vec::new();
    let mut slopes = Vec::new();
    let hs: Vec<f64> = plan
        .coarse
        .iter()
        .map(|&(n, _)| config.params.horizon / n as f64)
        .collect();
    for (s, &scheme) in config.schemes.iter().enumerate() {
        let sq = &total.sq[s];
        let pay = &total.payoff[s];
        for (j, &(n, _)) in plan.coarse.iter().enumerate() {
            strong.push(ErrorRow {
                scheme,
                steps: n,
                h: hs[j],
                estimate: strong_estimate(sq.mean[j], sq.std_err(j)),
            });
            weak.push(ErrorRow {
                scheme,
                steps: n,
                h: hs[j],
                estimate: ErrorEstimate {
                    error: pay.mean[j].abs(),
                    std_err: pay.std_err(j),
                },
            });
        }
        // log S = ½ log m  and  log |x̄|, linearised around the sample means.
        let strong_cov: Vec<f64> = (0..k * k)
            .map(|ij| {
                let (i, j) = (ij / k, ij % k);
                0.25 * sq.mean_cov(i, j) / (sq.mean[i] * sq.mean[j])
            })
            .collect();
        let weak_cov: Vec<f64> = (0..k * k)
            .map(|ij| {
                let (i, j) = (ij / k, ij % k);
                pay.mean_cov(i, j) / (pay.mean[i] * pay.mean[j])
            })
            .collect();
        let strong_pts: Vec<(f64, f64)> = hs.iter().zip(&sq.mean).map(|(&h, &m)| (h, m.max(0.0).sqrt())).collect();
        let weak_pts: Vec<(f64, f64)> = hs.iter().zip(&pay.mean).map(|(&h, &m)| (h, m.abs())).collect();
        slopes.push((scheme, Metric::Strong, fit_slope_cov(&strong_pts, &strong_cov).ok()));
        slopes.push((scheme, Metric::Weak, fit_slope_cov(&weak_pts, &weak_cov).ok()));
    }
    slopes.sort_by_key(|&(scheme, metric, _)| (metric, config.schemes.iter().position(|&s| s == scheme)));
    let slopes = slopes
        .into_iter()
        .map(|(scheme, metric, fit)| SlopeRow { scheme, metric, fit })
        .collect();

    Ok(ConvergenceReport {
        config: config.clone(),
        strong,
        weak,
        slopes,
    })
}

/// `S = sqrt(mean d²)` with delta-method standard error `se(mean d²) / (2S)`.
fn strong_estimate(mean_sq: f64, se_mean_sq: f64) -> ErrorEstimate {
    let s = mean_sq.max(0.0).sqrt();
    let std_err = if s > 0.0 { se_mean_sq / (2.0 * s) } else { 0.0 };
    ErrorEstimate { error: s, std_err }
}

fn single_cell(config: &ExperimentConfig, scheme: SchemeKind, n: usize) -> Result<ExperimentConfig> {
    if !config.step_counts.contains(&n) {
        return Err(Error::InvalidConfig(format!(
            "N = {n} is not among the configured step counts {:?}",
            config.step_counts
        )));
    }
    Ok(ExperimentConfig {
        schemes: vec![scheme],
        ..config.clone()
    })
}

/// `S_N = sqrt(E[(Y_N - Y_ref)²])` for one scheme.
///
/// Uses the base grid of the full configuration, so the value equals the
/// corresponding cell of [`run_experiment`].
pub fn strong_error(config: &ExperimentConfig, scheme: SchemeKind, n: usize) -> Result<ErrorEstimate> {
    let cfg = single_cell(config, scheme, n)?;
    let report = run_experiment(&cfg)?;
    Ok(report.get(Metric::Strong, scheme, n).expect("cell present"))
}

/// `E_N = |E[(Y_N - b)⁺ - (Y_ref - b)⁺]|` for one scheme.
pub fn weak_error(config: &ExperimentConfig, scheme: SchemeKind, n: usize) -> Result<ErrorEstimate> {
    let cfg = single_cell(config, scheme, n)?;
    let report = run_experiment(&cfg)?;
    Ok(report.get(Metric::Weak, scheme, n).expect("cell present"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::brownian::sample_pairs;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn small_config() -> ExperimentConfig {
        ExperimentConfig {
            num_paths: 200,
            step_counts: vec![10, 20, 40],
            ..ExperimentConfig::reference()
        }
    }

    #[test]
    fn substep_rule() {
        assert_eq!(fine_substeps(25), 40);
        assert_eq!(fine_substeps(100), 10);
        assert_eq!(fine_substeps(400), 10);
        assert_eq!(fine_substeps(300), 10);
        assert_eq!(fine_substeps(30), 34);
        for n in 1..2000 {
            let k = fine_substeps(n);
            let h = 5.0 / n as f64;
            assert!(h / k as f64 <= (h / 10.0).min(5.0 / 1000.0) * (1.0 + 1e-12));
        }
    }

    #[test]
    fn base_grid_is_shared_multiple() {
        assert_eq!(base_steps(&[25, 50, 100, 200, 400]).unwrap(), 4000);
        assert_eq!(base_steps(&[100]).unwrap(), 1000);
        assert!(base_steps(&[997, 991, 983]).is_err());
    }

    #[test]
    fn config_validation() {
        assert!(ExperimentConfig::reference().validate().is_ok());
        let bad = [
            ExperimentConfig { num_paths: 99, ..small_config() },
            ExperimentConfig { step_counts: vec![], ..small_config() },
            ExperimentConfig { step_counts: vec![0, 10], ..small_config() },
            ExperimentConfig { step_counts: vec![20, 10], ..small_config() },
            ExperimentConfig { schemes: vec![], ..small_config() },
            ExperimentConfig {
                schemes: vec![SchemeKind::LogOde, SchemeKind::LogOde],
                ..small_config()
            },
            ExperimentConfig { workers: 0, ..small_config() },
        ];
        for c in bad {
            assert!(run_experiment(&c).is_err(), "{c:?}");
        }
    }

    #[test]
    fn fit_slope_examples() {
        let hs = [0.1, 0.05, 0.025, 0.0125];
        let lin: Vec<_> = hs.iter().map(|&h| (h, 3.0 * h)).collect();
        let fit = fit_slope(&lin).unwrap();
        assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(fit.intercept, 3f64.ln(), epsilon = 1e-12);
        let p15: Vec<_> = hs.iter().map(|&h| (h, 0.2 * h.powf(1.5))).collect();
        assert_abs_diff_eq!(fit_slope(&p15).unwrap().slope, 1.5, epsilon = 1e-12);
        assert!(fit_slope(&lin[..2]).is_err());
        assert!(fit_slope(&[(0.1, 1.0), (0.2, 0.0), (0.3, 1.0)]).is_err());
        assert!(fit_slope(&[(0.1, 1.0), (-0.2, 1.0), (0.3, 1.0)]).is_err());
    }

    #[test]
    fn fit_slope_on_noisy_decade_data() {
        // Errors falling 10³-fold as h goes from 0.1 to 0.005, with ±5% noise.
        let hs: Vec<f64> = (0..6).map(|i| 0.1 * (0.005f64 / 0.1).powf(i as f64 / 5.0)).collect();
        let noise = [1.03, 0.96, 1.05, 0.98, 1.02, 0.95];
        let pts: Vec<_> = hs
            .iter()
            .zip(noise)
            .map(|(&h, z)| (h, 0.5 * h.powf(1.5) * z))
            .collect();
        let fit = fit_slope(&pts).unwrap();
        assert!((fit.slope - 1.5).abs() < 0.15);
    }

    #[test]
    fn mc_slope_stderr_propagates_relative_errors() {
        let pts: Vec<_> = [0.1, 0.05, 0.025]
            .iter()
            .map(|&h| (h, ErrorEstimate { error: h, std_err: 0.1 * h }))
            .collect();
        let fit = fit_slope_mc(&pts).unwrap();
        assert_abs_diff_eq!(fit.slope, 1.0, epsilon = 1e-12);
        // c = (x - x̄)/Sxx with x spaced by ln 2: c = ∓1/(2 ln 2), 0.
        let expected = 0.1 * (2.0f64).sqrt() / (2.0 * 2f64.ln());
        assert_abs_diff_eq!(fit.slope_stderr, expected, epsilon = 1e-12);
    }

    #[test]
    fn comoments_merge_matches_sequential() {
        let xs: Vec<[f64; 2]> = (0..1000)
            .map(|i| {
                let u = ((i * 37) % 101) as f64 * 0.01 - 0.3;
                [u, u * u - 0.5 * ((i * 13) % 7) as f64]
            })
            .collect();
        let mut scratch = [0.0; 2];
        let mut all = CoMoments::new(2);
        xs.iter().for_each(|x| all.push(x, &mut scratch));
        let mut a = CoMoments::new(2);
        let mut b = CoMoments::new(2);
        xs[..313].iter().for_each(|x| a.push(x, &mut scratch));
        xs[313..].iter().for_each(|x| b.push(x, &mut scratch));
        a.merge(&b);
        assert_eq!(a.n, all.n);
        for i in 0..2 {
            assert_abs_diff_eq!(a.mean[i], all.mean[i], epsilon = 1e-14);
        }
        for ij in 0..4 {
            assert_abs_diff_eq!(a.c[ij], all.c[ij], epsilon = 1e-9);
        }
        // Direct two-pass covariance.
        let n = xs.len() as f64;
        let m: Vec<f64> = (0..2).map(|i| xs.iter().map(|x| x[i]).sum::<f64>() / n).collect();
        let c01: f64 = xs.iter().map(|x| (x[0] - m[0]) * (x[1] - m[1])).sum();
        assert_abs_diff_eq!(all.c[1], c01, epsilon = 1e-9);
        assert_abs_diff_eq!(all.c[2], c01, epsilon = 1e-9);
    }

    #[test]
    fn covariance_fit_reduces_to_independent_case() {
        let pts = [(0.1, 0.2), (0.05, 0.09), (0.025, 0.05), (0.0125, 0.026)];
        let ses = [0.01, 0.004, 0.003, 0.001];
        let mc: Vec<_> = pts
            .iter()
            .zip(ses)
            .map(|(&(h, e), se)| (h, ErrorEstimate { error: e, std_err: se }))
            .collect();
        let mut diag = vec![0.0; 16];
        for i in 0..4 {
            diag[i * 5] = (ses[i] / pts[i].1).powi(2);
        }
        let a = fit_slope_mc(&mc).unwrap();
        let b = fit_slope_cov(&pts, &diag).unwrap();
        assert_eq!(a, b);
        // Perfectly correlated relative errors move all points together: no slope error.
        let full = vec![0.01; 16];
        assert!(fit_slope_cov(&pts, &full).unwrap().slope_stderr < 1e-9);
        assert!(fit_slope_cov(&pts, &full[..15]).is_err());
    }

    #[test]
    fn coupled_reference_against_itself_is_exact() {
        let p = IgbmParams::reference();
        let mut pairs = vec![IncrementPair { w: 0.0, h_area: 0.0, length: 1.0 }; 400];
        sample_pairs(p.horizon / 400.0, &mut rng::stream(50, 0), &mut pairs).unwrap();
        let (y, y_ref) = coupled_terminal_values(SchemeKind::LogOde, &p, &pairs, 100, 100).unwrap();
        assert_eq!(y, y_ref);
        let (y, y_ref) = coupled_terminal_values(SchemeKind::EulerMaruyama, &p, &pairs, 40, 400).unwrap();
        assert_ne!(y, y_ref);
        assert!(coupled_terminal_values(SchemeKind::LogOde, &p, &pairs, 30, 400).is_err());
    }

    #[test]
    fn deterministic_case_has_zero_std_err() {
        let mut c = small_config();
        c.params.sigma = 0.0;
        let r = run_experiment(&c).unwrap();
        for row in r.strong.iter().chain(&r.weak) {
            assert_eq!(row.estimate.std_err, 0.0, "{row:?}");
        }
        let first = r.get(Metric::Strong, SchemeKind::EulerMaruyama, 10).unwrap();
        assert!(first.error > 0.0);
    }

    #[test]
    fn report_is_deterministic_and_worker_invariant() {
        let c = ExperimentConfig { num_paths: 2100, ..small_config() };
        let a = run_experiment(&c).unwrap();
        let b = run_experiment(&ExperimentConfig { workers: 3, ..c.clone() }).unwrap();
        assert_eq!(a.errors_csv(Metric::Strong), b.errors_csv(Metric::Strong));
        assert_eq!(a.errors_csv(Metric::Weak), b.errors_csv(Metric::Weak));
        assert_eq!(a.slopes_csv(), b.slopes_csv());
        let c2 = ExperimentConfig { seed: 7, ..c };
        assert_ne!(run_experiment(&c2).unwrap().errors_csv(Metric::Strong), a.errors_csv(Metric::Strong));
    }

    #[test]
    fn single_cell_helpers_match_report() {
        let c = small_config();
        let r = run_experiment(&c).unwrap();
        let s = strong_error(&c, SchemeKind::Milstein, 20).unwrap();
        assert_eq!(Some(s), r.get(Metric::Strong, SchemeKind::Milstein, 20));
        let w = weak_error(&c, SchemeKind::PiecewiseLinear, 40).unwrap();
        assert_eq!(Some(w), r.get(Metric::Weak, SchemeKind::PiecewiseLinear, 40));
        assert!(strong_error(&c, SchemeKind::Milstein, 30).is_err());
    }

    #[test]
    fn csv_layout() {
        let r = run_experiment(&small_config()).unwrap();
        let strong = r.errors_csv(Metric::Strong);
        let mut lines = strong.lines();
        assert_eq!(lines.next(), Some("scheme,N,h,error,std_err"));
        let first: Vec<&str> = lines.next().unwrap().split(',').collect();
        assert_eq!(first[0], "log-ode");
        assert_eq!(first[1], "10");
        assert_eq!(first[2], "5.0000000000000000e-1");
        assert_eq!(strong.lines().count(), 1 + 5 * 3);
        let slopes = r.slopes_csv();
        assert!(slopes.starts_with("scheme,metric,slope,slope_stderr\n"));
        assert_eq!(slopes.lines().count(), 1 + 10);
        assert_eq!(fmt_f64(f64::NAN), "NaN");
    }

    proptest! {
        #[test]
        fn fmt_round_trips(x in proptest::num::f64::NORMAL) {
            prop_assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
