//! Command-line front end: parse a config, run one pipeline, write CSV
//! artifacts and a summary.

use std::path::PathBuf;

use clap::{Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::config::{load_config, ConfigError, RunConfig};
use crate::doubling::{DoubledTest, DoublingError};
use crate::geometry::{probe_injectivity, GeometryReport, MetricFamily};
use crate::harness::{
    run_extension_cauchy, run_first_order_comparison, run_second_order_comparison, HarnessError,
    StabilityReport,
};
use crate::output::{emit_summary, exit_status, Check, OutDir};
use crate::solver::{
    flat_apriori_modulus, isaacs_condition_check, solve, IsaacsCheck, SolverError,
};

pub const OUT_ENV: &str = "PATHVISC_OUT";
const DEFAULT_OUT: &str = "pathvisc-out";

#[derive(Parser, Debug)]
#[command(
    name = "pathvisc",
    version,
    about = "Pathwise viscosity solutions: checks and experiments"
)]
pub struct Cli {
    #[command(subcommand)]
    pub verb: Verb,
    /// Experiment configuration (INI).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; defaults to `[run] out`, then $PATHVISC_OUT, then ./pathvisc-out.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Override the run seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(short, long, global = true)]
    pub verbose: bool,
}

#[derive(Subcommand, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verb {
    /// Certify the shooting radius and fit the geometric constants.
    GeometryCheck,
    /// Check the doubled test function against its equation and bounds.
    PhiCheck,
    /// Solve from `u0` driven by `[signal.a]`.
    Solve,
    /// First-order stability comparison.
    Compare1,
    /// Second-order stability comparison.
    Compare2,
    /// Cauchy experiment over dyadic Brownian approximations.
    Extend,
    /// Sampled structure-condition check on `F`.
    IsaacsCheck,
}

impl Verb {
    pub fn name(&self) -> &'static str {
        match self {
            Verb::GeometryCheck => "geometry-check",
            Verb::PhiCheck => "phi-check",
            Verb::Solve => "solve",
            Verb::Compare1 => "compare1",
            Verb::Compare2 => "compare2",
            Verb::Extend => "extend",
            Verb::IsaacsCheck => "isaacs-check",
        }
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Run(String),
    #[error("cannot write output: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            _ => 1,
        }
    }
}

impl From<HarnessError> for CliError {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Invalid(m) => CliError::Config(ConfigError::Syntax(m)),
            other => CliError::Run(other.to_string()),
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::InvalidSpec(_)
            | SolverError::InvalidGrid(_)
            | SolverError::DimensionMismatch { .. } => {
                CliError::Config(ConfigError::Syntax(e.to_string()))
            }
            other => CliError::Run(other.to_string()),
        }
    }
}

fn run_err(e: impl std::fmt::Display) -> CliError {
    CliError::Run(e.to_string())
}

/// Output of one run: checks plus the files written.
#[derive(Debug)]
pub struct Outcome {
    pub checks: Vec<Check>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        exit_status(&self.checks)
    }
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    out: OutDir,
    files: Vec<PathBuf>,
    verbose: bool,
}

impl Ctx<'_> {
    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let p = self.out.write(name, contents)?;
        self.log(&format!("wrote {}", p.display()));
        self.files.push(p);
        Ok(())
    }

    fn log(&self, msg: &str) {
        if self.verbose {
            eprintln!("{msg}");
        }
    }
}

fn resolve_out(flag: Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    flag.or_else(|| cfg.out_dir.clone())
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

/// Run `verb` on a parsed config, writing artifacts into `out`.
pub fn dispatch(
    verb: Verb,
    cfg: &RunConfig,
    out: OutDir,
    verbose: bool,
) -> Result<Outcome, CliError> {
    let mut ctx = Ctx {
        cfg,
        out,
        files: Vec::new(),
        verbose,
    };
    ctx.log(&format!("{} on '{}'", verb.name(), cfg.experiment.name));
    let checks = match verb {
        Verb::GeometryCheck => geometry_check(&mut ctx)?,
        Verb::PhiCheck => phi_check(&mut ctx)?,
        Verb::Solve => solve_run(&mut ctx)?,
        Verb::Compare1 => compare(&mut ctx, run_first_order_comparison(&cfg.experiment)?)?,
        Verb::Compare2 => compare(&mut ctx, run_second_order_comparison(&cfg.experiment)?)?,
        Verb::Extend => extend(&mut ctx)?,
        Verb::IsaacsCheck => isaacs(&mut ctx)?,
    };
    ctx.write("summary.csv", &emit_summary(&checks))?;
    Ok(Outcome {
        checks,
        files: ctx.files,
    })
}

fn geometry_csv(r: &GeometryReport) -> String {
    format!("{}\n{}\n", GeometryReport::CSV_HEADER, r.csv_row())
}

fn pairs_csv(r: &GeometryReport) -> String {
    let join = |v: &[f64]| {
        v.iter()
            .map(|c| format!("{c:?}"))
            .collect::<Vec<_>>()
            .join(" ")
    };
    let mut s = String::from(
        "x,y,euclid,converged,energy,gradient_sum,hamiltonian_drift,eikonal_x,eikonal_y\n",
    );
    for p in &r.pairs {
        s.push_str(&format!(
            "{},{},{:?},{},{:?},{:?},{:?},{:?},{:?}\n",
            join(&p.x),
            join(&p.y),
            p.euclid,
            p.converged,
            p.energy,
            p.gradient_sum(),
            p.hamiltonian_drift,
            p.eikonal.0,
            p.eikonal.1
        ));
    }
    s
}

fn geometry_check(ctx: &mut Ctx) -> Result<Vec<Check>, CliError> {
    let e = &ctx.cfg.experiment;
    let r = probe_injectivity(&e.metric, &e.probe);
    ctx.write("geometry.csv", &geometry_csv(&r))?;
    ctx.write("geometry_pairs.csv", &pairs_csv(&r))?;
    let slack = |a: f64| a * (1.0 + 1e-9) + 1e-12;
    let mut radius = Check::at_least("certified radius", r.upsilon_estimate, 0.0)
        .note(format!("{} of {} pairs converged", r.converged, r.samples));
    radius.pass = r.upsilon_estimate > 0.0;
    Ok(vec![
        radius,
        Check::at_most("eikonal residual", r.max_eikonal_residual, 1e-6),
        Check::at_most("mixed hessian block error", r.mixed_block_error, 1e-6),
        Check::at_most(
            "gradient-sum constant",
            r.gradsum_bound_l,
            slack(r.gradsum_bound_l_apriori),
        ),
        Check::at_most(
            "hessian constant",
            r.hessian_bound_l,
            slack(r.hessian_bound_l_apriori),
        ),
    ])
}

fn phi_check(ctx: &mut Ctx) -> Result<Vec<Check>, CliError> {
    let cfg = ctx.cfg;
    let e = &cfg.experiment;
    let xi = e.xi.build(e.horizon, e.seed).map_err(run_err)?;
    let zeta = e.zeta.build(e.horizon, e.seed).map_err(run_err)?;
    let report = probe_injectivity(&e.metric, &e.probe);
    let pairs: Vec<(Vec<f64>, Vec<f64>)> = report
        .certified_pairs()
        .take(cfg.phi.samples)
        .map(|p| (p.x.clone(), p.y.clone()))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(e.seed);
    let horizon = xi.horizon().min(zeta.horizon()).min(e.horizon);
    let times: Vec<f64> = pairs
        .iter()
        .map(|_| loop {
            let t = rng.random_range(0.0..horizon);
            if xi.slope(t).is_some() && zeta.slope(t).is_some() {
                break t;
            }
        })
        .collect();
    let mut checks = vec![Check::at_least("certified pairs", pairs.len() as f64, 1.0)];
    let mut csv =
        String::from("gamma,lambda,delta_plus,delta_minus,pairs,max_pde_residual,sandwich\n");
    for &gamma in &cfg.phi.gammas {
        let test = DoubledTest::with_options(
            &e.metric,
            &xi,
            &zeta,
            cfg.phi.lambda,
            gamma,
            e.probe.shooting,
        )
        .map_err(|err| match err {
            DoublingError::Geometry(_) | DoublingError::Signal(_) => run_err(err),
            other => CliError::Config(ConfigError::Field {
                section: "phi".into(),
                field: "lambda".into(),
                message: other.to_string(),
            }),
        })?;
        let mut worst: f64 = 0.0;
        for ((x, y), &t) in pairs.iter().zip(&times) {
            let phi = test.phi_eval(x, y, t).map_err(run_err)?;
            let r = test.phi_pde_residual(x, y, t).map_err(run_err)?;
            worst = worst.max(r / (1.0 + phi));
        }
        checks.push(Check::at_most(
            format!("pde residual gamma={gamma}"),
            worst,
            1e-6,
        ));
        let sandwich = if gamma == 0.0 {
            let samples: Vec<_> = pairs
                .iter()
                .zip(&times)
                .map(|((x, y), &t)| (x.clone(), y.clone(), t))
                .collect();
            let s = test.phi_sandwich_check(&samples).map_err(run_err)?;
            checks.push(Check::at_most("sandwich", s, 1e-12));
            s
        } else {
            f64::NAN
        };
        let (dp, dm) = test.deltas();
        csv.push_str(&format!(
            "{gamma:?},{:?},{dp:?},{dm:?},{},{worst:?},{sandwich:?}\n",
            cfg.phi.lambda,
            pairs.len()
        ));
    }
    ctx.write("phi.csv", &csv)?;
    Ok(checks)
}

fn solve_run(ctx: &mut Ctx) -> Result<Vec<Check>, CliError> {
    let e = &ctx.cfg.experiment;
    let xi = e.xi.build(e.horizon, e.seed).map_err(run_err)?;
    let u0 = e.u0.sample(&e.grid);
    let tr = solve(&u0, &e.metric, &e.f, &xi, e.horizon, &e.solve_options())?;
    let mut csv = String::from(if e.grid.dim() == 1 {
        "t,x,u\n"
    } else {
        "t,x,y,u\n"
    });
    for snap in &tr.snapshots {
        for line in snap.to_csv().lines().skip(1) {
            csv.push_str(&format!("{:?},{line}\n", snap.time));
        }
    }
    ctx.write("solution.csv", &csv)?;
    ctx.write("diagnostics.csv", &tr.diagnostics_csv())?;
    ctx.write("signal.csv", &xi.to_csv())?;
    let sup = tr
        .snapshots
        .iter()
        .map(|s| s.sup_norm())
        .fold(0.0, f64::max);
    let bound = u0.sup_norm() + e.horizon * e.f.f_sup();
    let finite = tr
        .snapshots
        .iter()
        .all(|s| s.values.iter().all(|v| v.is_finite()));
    let mut finite_check = Check::at_least("finite values", f64::from(u8::from(finite)), 1.0);
    finite_check.pass = finite;
    Ok(vec![
        finite_check,
        Check::at_most("sup-norm bound", sup, bound * (1.0 + 1e-12) + 1e-12),
    ])
}

fn compare(ctx: &mut Ctx, r: StabilityReport) -> Result<Vec<Check>, CliError> {
    ctx.write(
        "report.csv",
        &format!("{}\n{}\n", StabilityReport::CSV_HEADER, r.csv_row()),
    )?;
    let mut c =
        Check::with_margin(&r.name, r.measured_sup_gap, r.bound, r.scheme_margin).note(&r.note);
    c.pass = r.pass;
    Ok(vec![c])
}

fn extend(ctx: &mut Ctx) -> Result<Vec<Check>, CliError> {
    let t = run_extension_cauchy(&ctx.cfg.experiment)?;
    ctx.write("extension.csv", &t.to_csv())?;
    let mut checks: Vec<Check> = t
        .rows
        .iter()
        .filter_map(|r| {
            r.bound
                .map(|b| Check::with_margin(format!("D({};{})", r.n, r.m), r.d, b, r.margin))
        })
        .collect();
    let from = ctx.cfg.monotone_from;
    let tail: Vec<f64> = t
        .consecutive()
        .into_iter()
        .filter(|(n, _)| *n >= from)
        .map(|(_, d)| d)
        .collect();
    let rise = tail.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max);
    checks.push(Check::at_most(
        format!("consecutive gaps nonincreasing from level {from}"),
        rise,
        0.0,
    ));
    Ok(checks)
}

fn isaacs(ctx: &mut Ctx) -> Result<Vec<Check>, CliError> {
    let cfg = ctx.cfg;
    let e = &cfg.experiment;
    let s = &cfg.isaacs;
    let n = e.metric.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
    let w = e.probe.box_half_width;
    let samples: Vec<(Vec<f64>, Vec<f64>)> = (0..s.samples)
        .map(|_| {
            let x: Vec<f64> = (0..n).map(|_| rng.random_range(-w..w)).collect();
            let y: Vec<f64> = x
                .iter()
                .map(|v| v + rng.random_range(-s.spread..=s.spread))
                .collect();
            (x, y)
        })
        .collect();
    let mut opts = s.options.clone();
    opts.upsilon = e.upsilon();
    let chk: IsaacsCheck = isaacs_condition_check(&e.f, &e.metric, &samples, &opts)?;
    ctx.write("isaacs.csv", &chk.to_csv())?;
    let declared = e.f.f_modulus();
    let mut checks = vec![
        Check::at_least("evaluated pairs", chk.records.len() as f64, 1.0)
            .note(format!("{} skipped", chk.skipped)),
        Check::at_most(
            "declared modulus excess",
            chk.excess_against(&declared),
            1e-9,
        )
        .note(format!(
            "fitted slope {:?} cap {:?}",
            chk.fitted.slope(),
            chk.fitted.cap()
        )),
    ];
    if matches!(e.metric.family(), MetricFamily::Identity) {
        let dmax = chk.records.iter().map(|r| r.distance).fold(0.0, f64::max);
        let apriori = flat_apriori_modulus(&e.f, n, dmax, opts.r_bound)?;
        checks.push(Check::at_most(
            "a priori modulus excess",
            chk.excess_against(&apriori),
            1e-9,
        ));
    }
    Ok(checks)
}

/// Parse arguments, run, print the summary; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
        }
    };
    let Some(path) = cli.config.as_ref() else {
        eprintln!("error: --config is required");
        return 2;
    };
    let mut cfg = match load_config(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Some(seed) = cli.seed {
        cfg.experiment.seed = seed;
    }
    let out = OutDir::new(resolve_out(cli.out.clone(), &cfg));
    match dispatch(cli.verb, &cfg, out, cli.verbose) {
        Ok(o) => {
            print!("{}", emit_summary(&o.checks));
            o.exit_code()
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
