//! `polybm`: CSV generators and convergence experiments.

mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use polybm::brownian::{self, IncrementPair};
use polybm::harness::{self, fmt_f64, ExperimentConfig, Metric};
use polybm::rng::stream;
use polybm::{igbm, IgbmParams, PolyBasis, SchemeKind};

use config::{FileConfig, Resolver};

#[derive(Parser)]
#[command(name = "polybm", version, about = "Polynomial Brownian paths and IGBM convergence experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Orthonormal bridge basis e_k on a grid of [0, 1].
    Basis {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        max_k: Option<usize>,
        /// Number of grid intervals.
        #[arg(long)]
        grid: Option<usize>,
    },
    /// Polynomial approximations of Brownian sample paths and their coefficients.
    Paths {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        degree: Option<usize>,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long)]
        paths: Option<usize>,
    },
    /// IGBM trajectories of one scheme.
    IgbmPaths {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        model: Model,
        #[arg(long)]
        scheme: Option<String>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        paths: Option<usize>,
    },
    /// Strong convergence experiment.
    Strong {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        exp: Experiment,
    },
    /// Weak convergence experiment.
    Weak {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        exp: Experiment,
    },
    /// Run the quick invariant suites.
    Check {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    workers: Option<usize>,
    /// `key = value` file; flags take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args)]
struct Model {
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    b: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y0: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    horizon: Option<f64>,
}

#[derive(Args)]
struct Experiment {
    #[command(flatten)]
    model: Model,
    /// Comma-separated coarse step counts.
    #[arg(long)]
    steps: Option<String>,
    /// Comma-separated scheme names.
    #[arg(long)]
    schemes: Option<String>,
    #[arg(long)]
    paths: Option<usize>,
}

struct Run {
    resolver: Resolver,
    seed: u64,
    out: PathBuf,
    workers: usize,
}

impl Run {
    fn start(common: Common) -> Result<Self> {
        let file = match &common.config {
            Some(path) => FileConfig::load(path)?,
            None => FileConfig::default(),
        };
        let mut resolver = Resolver::new(file);
        let seed = resolver.pick("seed", common.seed, 42)?;
        let out: String = resolver.pick("out", common.out.map(|p| p.display().to_string()), ".".into())?;
        let workers = resolver.pick("workers", common.workers, 1)?;
        if workers == 0 {
            bail!("--workers must be at least 1");
        }
        Ok(Self { resolver, seed, out: PathBuf::from(out), workers })
    }

    fn params(&mut self, m: Model) -> Result<IgbmParams> {
        let d = IgbmParams::reference();
        let r = &mut self.resolver;
        let p = IgbmParams::new(
            r.pick("a", m.a, d.a)?,
            r.pick("b", m.b, d.b)?,
            r.pick("sigma", m.sigma, d.sigma)?,
            r.pick("y0", m.y0, d.y0)?,
            r.pick("horizon", m.horizon, d.horizon)?,
        )?;
        Ok(p)
    }

    fn write(&self, name: &str, contents: &str) -> Result<()> {
        fs::create_dir_all(&self.out)
            .with_context(|| format!("cannot create {}", self.out.display()))?;
        let path = self.out.join(name);
        fs::write(&path, contents).with_context(|| format!("cannot write {}", path.display()))?;
        eprintln!("wrote {}", path.display());
        Ok(())
    }

    fn finish(&self, command: &str) -> Result<()> {
        self.write("manifest.txt", &self.resolver.manifest(command))
    }
}

fn positive(name: &str, v: usize) -> Result<usize> {
    if v == 0 {
        bail!("--{name} must be positive");
    }
    Ok(v)
}

fn cmd_basis(common: Common, max_k: Option<usize>, grid: Option<usize>) -> Result<()> {
    let mut run = Run::start(common)?;
    let max_k = positive("max-k", run.resolver.pick("max_k", max_k, 6)?)?;
    let grid = positive("grid", run.resolver.pick("grid", grid, 200)?)?;
    let basis = PolyBasis::new(max_k + 1)?;
    let mut csv = String::from("k,t,e_k(t)\n");
    for k in 1..=max_k {
        for i in 0..=grid {
            let t = i as f64 / grid as f64;
            writeln!(csv, "{k},{},{}", fmt_f64(t), fmt_f64(basis.e(k, t)?))?;
        }
    }
    run.write("basis.csv", &csv)?;
    run.finish("basis")
}

fn cmd_paths(common: Common, degree: Option<usize>, grid: Option<usize>, paths: Option<usize>) -> Result<()> {
    let mut run = Run::start(common)?;
    let degree = positive("degree", run.resolver.pick("degree", degree, 8)?)?;
    let grid = positive("grid", run.resolver.pick("grid", grid, 200)?)?;
    let paths = positive("paths", run.resolver.pick("paths", paths, 5)?)?;
    let basis = PolyBasis::new(degree)?;
    let mut values = String::from("path_id,t,kl_value\n");
    let mut coeffs = String::from("path_id,k,I_k\n");
    for id in 0..paths {
        let poly = brownian::sample_kl_coefficients(&basis, degree, &mut stream(run.seed, id as u64))?;
        writeln!(coeffs, "{id},0,{}", fmt_f64(poly.w1()))?;
        for (k, c) in poly.coeffs().iter().enumerate() {
            writeln!(coeffs, "{id},{},{}", k + 1, fmt_f64(*c))?;
        }
        for i in 0..=grid {
            let t = i as f64 / grid as f64;
            writeln!(values, "{id},{},{}", fmt_f64(t), fmt_f64(poly.eval(t)?))?;
        }
    }
    run.write("paths.csv", &values)?;
    run.write("coefficients.csv", &coeffs)?;
    run.finish("paths")
}

fn cmd_igbm_paths(
    common: Common,
    model: Model,
    scheme: Option<String>,
    steps: Option<usize>,
    paths: Option<usize>,
) -> Result<()> {
    let mut run = Run::start(common)?;
    let params = run.params(model)?;
    let scheme: SchemeKind = run
        .resolver
        .pick::<String>("scheme", scheme, "log-ode".into())?
        .parse()?;
    let steps = positive("steps", run.resolver.pick("steps", steps, 500)?)?;
    let paths = positive("paths", run.resolver.pick("paths", paths, 10)?)?;
    let h = params.horizon / steps as f64;
    let mut pairs = vec![IncrementPair { w: 0.0, h_area: 0.0, length: h }; steps];
    let mut csv = String::from("path_id,t,y\n");
    for id in 0..paths {
        brownian::sample_pairs(h, &mut stream(run.seed, id as u64), &mut pairs)?;
        for (i, y) in igbm::simulate_trajectory(scheme, &params, &pairs)?.iter().enumerate() {
            writeln!(csv, "{id},{},{}", fmt_f64(i as f64 * h), fmt_f64(*y))?;
        }
    }
    run.write("igbm_paths.csv", &csv)?;
    run.finish("igbm-paths")
}

fn cmd_experiment(common: Common, exp: Experiment, metric: Metric) -> Result<()> {
    let mut run = Run::start(common)?;
    let params = run.params(exp.model)?;
    let step_counts: Vec<usize> = run.resolver.pick_list("steps", exp.steps, "25,50,100,200,400")?;
    let schemes: Vec<SchemeKind> =
        run.resolver.pick_list("schemes", exp.schemes, "log-ode,parabola,linear,milstein,euler")?;
    let default_paths = match metric {
        Metric::Strong => 10_000,
        Metric::Weak => 100_000,
    };
    let num_paths = run.resolver.pick("paths", exp.paths, default_paths)?;
    let config = ExperimentConfig {
        params,
        schemes,
        step_counts,
        num_paths,
        seed: run.seed,
        workers: run.workers,
    };
    let report = harness::run_experiment(&config)?;
    let name = metric.name();
    run.write(&format!("{name}.csv"), &report.errors_csv(metric))?;
    let slopes = report.slopes_csv();
    let mut lines = slopes.lines();
    let mut filtered = format!("{}\n", lines.next().unwrap_or_default());
    for line in lines.filter(|l| l.split(',').nth(1) == Some(name)) {
        filtered.push_str(line);
        filtered.push('\n');
    }
    run.write("slopes.csv", &filtered)?;
    for &scheme in &config.schemes {
        match report.slope(metric, scheme) {
            Some(fit) => println!("{name:<6} {scheme:<9} slope {:.3} ± {:.3}", fit.slope, fit.slope_stderr),
            None => println!("{name:<6} {scheme:<9} slope n/a"),
        }
    }
    run.finish(name)
}

fn cmd_check(common: Common) -> Result<bool> {
    let run = Run::start(common)?;
    let results = polybm::check::run_all(run.seed);
    for r in &results {
        let verdict = if r.passed { "ok  " } else { "FAIL" };
        println!("{verdict} {:<9} {:<36} {}", r.suite, r.name, r.detail);
    }
    let failed = results.iter().filter(|r| !r.passed).count();
    println!("{} checks, {failed} failed", results.len());
    Ok(failed == 0)
}

fn dispatch(command: Command) -> Result<bool> {
    match command {
        Command::Basis { common, max_k, grid } => cmd_basis(common, max_k, grid)?,
        Command::Paths { common, degree, grid, paths } => cmd_paths(common, degree, grid, paths)?,
        Command::IgbmPaths { common, model, scheme, steps, paths } => {
            cmd_igbm_paths(common, model, scheme, steps, paths)?
        }
        Command::Strong { common, exp } => cmd_experiment(common, exp, Metric::Strong)?,
        Command::Weak { common, exp } => cmd_experiment(common, exp, Metric::Weak)?,
        Command::Check { common } => return cmd_check(common),
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if !e.use_stderr() => e.exit(),
        Err(e) => {
            let text = e.render().to_string();
            eprintln!("{}", text.lines().next().unwrap_or("error: bad arguments"));
            return ExitCode::from(2);
        }
    };
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
