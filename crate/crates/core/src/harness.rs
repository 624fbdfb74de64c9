//! End-to-end experiments: solver output against the comparison bounds, the
//! Cauchy behaviour along dyadic Brownian approximations, and the spatial
//! modulus across oscillating signals.

use std::fmt::Write;

use rayon::prelude::*;
use thiserror::Error;

use crate::doubling::{
    default_gamma_grid, first_order_bound, second_order_bound, DoublingError, KConstant,
};
use crate::geometry::{probe_injectivity, GeometryError, MetricField, ProbeOptions};
use crate::signals::{
    delta_pm, sample_brownian, sup_distance, theta, Modulus, PathSignal, SignalError,
};
use crate::solver::{solve, FSpec, Grid, GridFunction, SolveOptions, SolverError};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid experiment: {0}")]
    Invalid(String),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error(transparent)]
    Doubling(#[from] DoublingError),
    #[error(transparent)]
    Signal(#[from] SignalError),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Initial datum profile; `offset` is added to every kind.
#[derive(Clone, Debug, PartialEq)]
pub enum DataKind {
    Constant,
    /// `amplitude * sin(frequency * x[axis])`
    Sine {
        amplitude: f64,
        frequency: f64,
        axis: usize,
    },
    /// `-slope * |x[axis]|` on the periodic box, which adds a kink at the edge.
    NegAbs {
        slope: f64,
        axis: usize,
    },
}

#[derive(Clone, Debug, PartialEq)]
pub struct DataSpec {
    pub kind: DataKind,
    pub offset: f64,
}

impl DataSpec {
    pub fn constant(c: f64) -> Self {
        Self {
            kind: DataKind::Constant,
            offset: c,
        }
    }

    pub fn sine(amplitude: f64, frequency: f64) -> Self {
        Self {
            kind: DataKind::Sine {
                amplitude,
                frequency,
                axis: 0,
            },
            offset: 0.0,
        }
    }

    pub fn neg_abs(slope: f64) -> Self {
        Self {
            kind: DataKind::NegAbs { slope, axis: 0 },
            offset: 0.0,
        }
    }

    pub fn with_offset(mut self, offset: f64) -> Self {
        self.offset = offset;
        self
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.offset
            + match self.kind {
                DataKind::Constant => 0.0,
                DataKind::Sine {
                    amplitude,
                    frequency,
                    axis,
                } => amplitude * (frequency * x[axis]).sin(),
                DataKind::NegAbs { slope, axis } => -slope * x[axis].abs(),
            }
    }

    pub fn sample(&self, grid: &Grid) -> GridFunction {
        GridFunction::from_fn(grid, |x| self.eval(x))
    }

    /// Euclidean Lipschitz constant.
    pub fn lipschitz(&self) -> f64 {
        match self.kind {
            DataKind::Constant => 0.0,
            DataKind::Sine {
                amplitude,
                frequency,
                ..
            } => (amplitude * frequency).abs(),
            DataKind::NegAbs { slope, .. } => slope.abs(),
        }
    }

    /// `(min, max)` over the box of the given period.
    pub fn range(&self, length: f64) -> (f64, f64) {
        let (lo, hi) = match self.kind {
            DataKind::Constant => (0.0, 0.0),
            DataKind::Sine { amplitude, .. } => (-amplitude.abs(), amplitude.abs()),
            DataKind::NegAbs { slope, .. } => {
                let e = -slope * length / 2.0;
                (e.min(0.0), e.max(0.0))
            }
        };
        (lo + self.offset, hi + self.offset)
    }

    pub fn sup_norm(&self, length: f64) -> f64 {
        let (lo, hi) = self.range(length);
        lo.abs().max(hi.abs())
    }

    /// Modulus in `d_g`: Lipschitz part converted with the ellipticity
    /// constant, capped by the oscillation.
    pub fn modulus(&self, length: f64, ellipticity_c: f64) -> Result<Modulus, SignalError> {
        let l = self.lipschitz();
        if l == 0.0 {
            return Ok(Modulus::zero());
        }
        let (lo, hi) = self.range(length);
        Ok(Modulus::new(l, hi - lo)?.euclidean_to_metric(ellipticity_c))
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum SignalSpec {
    Zero,
    Linear {
        slope: f64,
    },
    Zigzag {
        amplitude: f64,
        periods: usize,
    },
    /// Dyadic piecewise-linear Brownian approximation; `seed` falls back to the run seed.
    Brownian {
        level: u32,
        seed: Option<u64>,
    },
    /// A fixed path, e.g. read from CSV; it must cover the horizon.
    Sampled(PathSignal),
}

impl SignalSpec {
    pub fn build(&self, horizon: f64, seed: u64) -> Result<PathSignal, SignalError> {
        match self {
            SignalSpec::Zero => PathSignal::zero(horizon),
            SignalSpec::Linear { slope } => PathSignal::linear(*slope, horizon),
            SignalSpec::Zigzag { amplitude, periods } => {
                PathSignal::zigzag(*amplitude, *periods, horizon)
            }
            SignalSpec::Brownian { level, seed: s } => {
                Ok(sample_brownian(horizon, *level, s.unwrap_or(seed)))
            }
            SignalSpec::Sampled(p) if p.horizon() + 1e-12 < horizon => {
                Err(SignalError::HorizonMismatch {
                    requested: horizon,
                    available: p.horizon(),
                })
            }
            SignalSpec::Sampled(p) => Ok(p.clone()),
        }
    }
}

/// Everything an experiment needs; parsed from the config file by the CLI.
#[derive(Clone, Debug)]
pub struct ExperimentConfig {
    pub name: String,
    pub metric: MetricField,
    pub grid: Grid,
    pub u0: DataSpec,
    pub v0: DataSpec,
    pub xi: SignalSpec,
    pub zeta: SignalSpec,
    pub f: FSpec,
    pub horizon: f64,
    pub dt_max: f64,
    /// Snapshot stride for the sup over time; `None` uses the final time only.
    pub observe_stride: Option<f64>,
    /// Injectivity radius; `None` certifies it with the probe.
    pub upsilon: Option<f64>,
    pub probe: ProbeOptions,
    /// Scheme margin is this factor times the refinement difference.
    pub margin_factor: f64,
    pub gamma_grid: Vec<f64>,
    /// Dyadic levels for the Cauchy experiment.
    pub levels: (u32, u32),
    /// Zigzag family `(amplitude, periods)` for the modulus probe.
    pub family: Vec<(f64, usize)>,
    pub seed: u64,
}

impl ExperimentConfig {
    /// Flat 1-D defaults on `[-pi, pi)` with `u_0 = v_0 = sin(x) / 2`.
    pub fn new(name: &str) -> Self {
        Self {
            name: name.to_string(),
            metric: MetricField::identity(1),
            grid: Grid::new(1, 200, 2.0 * std::f64::consts::PI).expect("valid grid"),
            u0: DataSpec::sine(0.5, 1.0),
            v0: DataSpec::sine(0.5, 1.0),
            xi: SignalSpec::Zero,
            zeta: SignalSpec::Zero,
            f: FSpec::zero(),
            horizon: 1.0,
            dt_max: 0.01,
            observe_stride: Some(0.05),
            upsilon: None,
            probe: ProbeOptions::default(),
            margin_factor: 2.0,
            gamma_grid: default_gamma_grid(),
            levels: (3, 9),
            family: vec![(0.05, 8), (0.025, 16), (0.0125, 32)],
            seed: 42,
        }
    }

    fn validate(&self) -> Result<(), HarnessError> {
        if self.metric.dim() != self.grid.dim() {
            return Err(HarnessError::Invalid(format!(
                "metric dimension {} differs from grid dimension {}",
                self.metric.dim(),
                self.grid.dim()
            )));
        }
        if !(self.margin_factor > 0.0) {
            return Err(HarnessError::Invalid(
                "margin factor must be positive".into(),
            ));
        }
        if !(self.horizon > 0.0 && self.dt_max > 0.0) {
            return Err(HarnessError::Invalid(
                "horizon and dt_max must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn solve_options(&self) -> SolveOptions {
        let o = SolveOptions::new(self.dt_max);
        match self.observe_stride {
            Some(s) if s > 0.0 => o.with_stride(s, self.horizon),
            _ => o,
        }
    }

    /// Configured radius; otherwise infinite for constant metrics, whose
    /// geodesics are straight lines, and the certified probe estimate else.
    pub fn upsilon(&self) -> f64 {
        self.upsilon.unwrap_or_else(|| {
            if self.metric.is_constant() {
                f64::INFINITY
            } else {
                probe_injectivity(&self.metric, &self.probe).upsilon_estimate
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub name: String,
    /// `max` over grid and snapshot times of `u - v`.
    pub measured_sup_gap: f64,
    pub bound: f64,
    pub scheme_margin: f64,
    pub pass: bool,
    pub delta_plus: f64,
    pub delta_minus: f64,
    /// `gamma` of the minimizing grid point (0 for the first-order bound).
    pub gamma: f64,
    pub upsilon: f64,
    /// Why the bound is unavailable, if it is.
    pub note: String,
}

impl StabilityReport {
    pub const CSV_HEADER: &'static str =
        "name,measured_sup_gap,bound,scheme_margin,pass,delta_plus,delta_minus,gamma,upsilon,note";

    fn new(name: &str, measured: f64, bound: f64, margin: f64) -> Self {
        Self {
            name: name.to_string(),
            measured_sup_gap: measured,
            bound,
            scheme_margin: margin,
            pass: measured <= bound + margin,
            delta_plus: f64::NAN,
            delta_minus: f64::NAN,
            gamma: 0.0,
            upsilon: f64::NAN,
            note: String::new(),
        }
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{:?},{:?},{},{:?},{:?},{:?},{:?},{}",
            self.name,
            self.measured_sup_gap,
            self.bound,
            self.scheme_margin,
            self.pass,
            self.delta_plus,
            self.delta_minus,
            self.gamma,
            self.upsilon,
            self.note.replace(',', ";")
        )
    }
}

/// Pair of solves on one grid: `max (u - v)` over snapshots and the
/// nodewise differences at each snapshot.
fn gap_run(
    cfg: &ExperimentConfig,
    grid: &Grid,
    f: &FSpec,
    xi: &PathSignal,
    zeta: &PathSignal,
) -> Result<Vec<GridFunction>, HarnessError> {
    let opts = cfg.solve_options();
    let (a, b) = rayon::join(
        || solve(&cfg.u0.sample(grid), &cfg.metric, f, xi, cfg.horizon, &opts),
        || {
            solve(
                &cfg.v0.sample(grid),
                &cfg.metric,
                f,
                zeta,
                cfg.horizon,
                &opts,
            )
        },
    );
    let (a, b) = (a?, b?);
    a.snapshots
        .iter()
        .zip(&b.snapshots)
        .map(|(u, v)| {
            Ok(GridFunction {
                grid: grid.clone(),
                values: u.difference(v)?,
                time: u.time,
            })
        })
        .collect()
}

fn max_of(fs: &[GridFunction]) -> f64 {
    fs.iter().map(|f| f.max()).fold(f64::NEG_INFINITY, f64::max)
}

/// `sup |coarse - restrict(fine)|` over matching snapshots.
fn refinement_gap(coarse: &[GridFunction], fine: &[GridFunction]) -> Result<f64, HarnessError> {
    let mut m: f64 = 0.0;
    for (c, f) in coarse.iter().zip(fine) {
        let r = GridFunction::restrict_from(f, &c.grid)?;
        m = m.max(c.difference(&r)?.iter().fold(0.0, |a, v| a.max(v.abs())));
    }
    Ok(m)
}

/// Measured gap and refinement-based scheme margin for `f`.
fn measure(
    cfg: &ExperimentConfig,
    f: &FSpec,
    xi: &PathSignal,
    zeta: &PathSignal,
) -> Result<(f64, f64), HarnessError> {
    let fine_grid = cfg.grid.refined();
    let (coarse, fine) = rayon::join(
        || gap_run(cfg, &cfg.grid, f, xi, zeta),
        || gap_run(cfg, &fine_grid, f, xi, zeta),
    );
    let (coarse, fine) = (coarse?, fine?);
    Ok((
        max_of(&coarse),
        cfg.margin_factor * refinement_gap(&coarse, &fine)?,
    ))
}

fn initial_gap(cfg: &ExperimentConfig) -> f64 {
    let u = cfg.u0.sample(&cfg.grid);
    let v = cfg.v0.sample(&cfg.grid);
    u.values
        .iter()
        .zip(&v.values)
        .map(|(a, b)| a - b)
        .fold(f64::NEG_INFINITY, f64::max)
}

fn unavailable(
    name: &str,
    measured: f64,
    margin: f64,
    upsilon: f64,
    err: &DoublingError,
) -> StabilityReport {
    let mut r = StabilityReport::new(name, measured, f64::NAN, margin);
    r.pass = false;
    r.upsilon = upsilon;
    r.note = err.to_string();
    r
}

/// First-order comparison (`F = 0`): measured `sup (u - v)` against
/// `sup (u_0 - v_0) + theta(omega_u ^ omega_v, 1 / Delta^+)`.
pub fn run_first_order_comparison(cfg: &ExperimentConfig) -> Result<StabilityReport, HarnessError> {
    cfg.validate()?;
    if !cfg.f.is_zero() {
        return Err(HarnessError::Invalid(
            "the first-order comparison needs F = 0".into(),
        ));
    }
    let xi = cfg.xi.build(cfg.horizon, cfg.seed)?;
    let zeta = cfg.zeta.build(cfg.horizon, cfg.seed)?;
    let upsilon = cfg.upsilon();
    let len = cfg.grid.length();
    let c = cfg.metric.ellipticity_c();
    let (measured, margin) = measure(cfg, &FSpec::zero(), &xi, &zeta)?;
    let bound = first_order_bound(
        &cfg.u0.modulus(len, c)?,
        &cfg.v0.modulus(len, c)?,
        initial_gap(cfg),
        cfg.u0.sup_norm(len),
        cfg.v0.sup_norm(len),
        &xi,
        &zeta,
        cfg.horizon,
        upsilon,
    );
    let b = match bound {
        Ok(b) => b,
        Err(e @ DoublingError::SmallnessViolated { .. }) => {
            return Ok(unavailable(&cfg.name, measured, margin, upsilon, &e))
        }
        Err(e) => return Err(e.into()),
    };
    let mut r = StabilityReport::new(&cfg.name, measured, b.value, margin);
    r.delta_plus = b.delta_plus;
    r.delta_minus = b.delta_minus;
    r.upsilon = upsilon;
    if !b.strict_smallness_holds {
        r.note = "stricter smallness variant fails".into();
    }
    Ok(r)
}

/// Second-order comparison with `F` active: measured gap against the
/// minimized bound over the `gamma` grid.
pub fn run_second_order_comparison(
    cfg: &ExperimentConfig,
) -> Result<StabilityReport, HarnessError> {
    cfg.validate()?;
    let rho = cfg.f.rho();
    if !(rho > 0.0) {
        return Err(HarnessError::Invalid(
            "the second-order comparison needs rho > 0".into(),
        ));
    }
    let xi = cfg.xi.build(cfg.horizon, cfg.seed)?;
    let zeta = cfg.zeta.build(cfg.horizon, cfg.seed)?;
    let upsilon = cfg.upsilon();
    let len = cfg.grid.length();
    let c = cfg.metric.ellipticity_c();
    let (measured, margin) = measure(cfg, &cfg.f, &xi, &zeta)?;
    let k = KConstant {
        rho,
        f_sup: cfg.f.f_sup(),
        u0_norm: cfg.u0.sup_norm(len),
        v0_norm: cfg.v0.sup_norm(len),
    };
    let bound = second_order_bound(
        &k,
        &cfg.u0.modulus(len, c)?,
        &cfg.v0.modulus(len, c)?,
        initial_gap(cfg),
        &cfg.f.f_modulus(),
        &xi,
        &zeta,
        cfg.horizon,
        upsilon,
        &cfg.gamma_grid,
    );
    let b = match bound {
        Ok(b) => b,
        Err(e @ DoublingError::EmptyGamma) => {
            return Ok(unavailable(&cfg.name, measured, margin, upsilon, &e))
        }
        Err(e) => return Err(e.into()),
    };
    let mut r = StabilityReport::new(&cfg.name, measured, b.value, margin);
    r.delta_plus = b.delta_plus;
    r.delta_minus = b.delta_minus;
    r.gamma = b.gamma;
    r.upsilon = upsilon;
    if b.boundary {
        r.note = "minimizing gamma at the grid boundary".into();
    }
    Ok(r)
}

/// One pair of dyadic levels in the Cauchy experiment.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtensionRow {
    pub n: u32,
    pub m: u32,
    /// `sup |u^n - u^m|` over grid and snapshots.
    pub d: f64,
    /// `sup |xi^n - xi^m|`.
    pub s: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    /// `theta(omega_u, 1 / max(Delta^+, Delta^-))`; `None` when the pairwise
    /// smallness condition fails.
    pub bound: Option<f64>,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct ExtensionTable {
    pub seed: u64,
    pub rows: Vec<ExtensionRow>,
}

impl ExtensionTable {
    pub const CSV_HEADER: &'static str = "n,m,d,s,delta_plus,delta_minus,bound,margin,pass";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{:?},{:?},{:?},{:?},{},{:?},{}",
                r.n,
                r.m,
                r.d,
                r.s,
                r.delta_plus,
                r.delta_minus,
                r.bound.map_or("inf".to_string(), |b| format!("{b:?}")),
                r.margin,
                r.pass
            )
            .unwrap();
        }
        s
    }

    /// `D_{n,n+1}` in increasing `n`.
    pub fn consecutive(&self) -> Vec<(u32, f64)> {
        self.rows
            .iter()
            .filter(|r| r.m == r.n + 1)
            .map(|r| (r.n, r.d))
            .collect()
    }

    /// Whether `D_{n,n+1}` is nonincreasing for `n >= from`.
    pub fn nonincreasing_from(&self, from: u32) -> bool {
        let c: Vec<f64> = self
            .consecutive()
            .into_iter()
            .filter(|(n, _)| *n >= from)
            .map(|(_, d)| d)
            .collect();
        c.windows(2).all(|w| w[1] <= w[0])
    }

    /// Every pair with an available bound satisfies it.
    pub fn all_bounded_pass(&self) -> bool {
        self.rows.iter().all(|r| r.pass)
    }
}

/// Solve with each dyadic level of one Brownian sample and compare all pairs.
pub fn run_extension_cauchy(cfg: &ExperimentConfig) -> Result<ExtensionTable, HarnessError> {
    cfg.validate()?;
    let (n0, n1) = cfg.levels;
    if n0 > n1 {
        return Err(HarnessError::Invalid("level range is empty".into()));
    }
    let upsilon = cfg.upsilon();
    let len = cfg.grid.length();
    let omega = cfg.u0.modulus(len, cfg.metric.ellipticity_c())?;
    let norm = 2.0 * cfg.u0.sup_norm(len);
    let smallness = if norm > 0.0 {
        upsilon * upsilon / (2.0 * norm)
    } else {
        f64::INFINITY
    };
    let levels: Vec<u32> = (n0..=n1).collect();
    let signals: Vec<PathSignal> = levels
        .iter()
        .map(|&n| sample_brownian(cfg.horizon, n, cfg.seed))
        .collect();
    let opts = cfg.solve_options();
    let fine_grid = cfg.grid.refined();
    let runs: Vec<(Vec<GridFunction>, Vec<GridFunction>)> = signals
        .par_iter()
        .map(|xi| -> Result<_, HarnessError> {
            let c = solve(
                &cfg.u0.sample(&cfg.grid),
                &cfg.metric,
                &cfg.f,
                xi,
                cfg.horizon,
                &opts,
            )?;
            let f = solve(
                &cfg.u0.sample(&fine_grid),
                &cfg.metric,
                &cfg.f,
                xi,
                cfg.horizon,
                &opts,
            )?;
            Ok((c.snapshots, f.snapshots))
        })
        .collect::<Result<_, _>>()?;
    let diff =
        |a: &[GridFunction], b: &[GridFunction]| -> Result<Vec<GridFunction>, HarnessError> {
            a.iter()
                .zip(b)
                .map(|(u, v)| {
                    Ok(GridFunction {
                        grid: u.grid.clone(),
                        values: u.difference(v)?,
                        time: u.time,
                    })
                })
                .collect()
        };
    let mut rows = Vec::new();
    for i in 0..levels.len() {
        for j in i + 1..levels.len() {
            let dc = diff(&runs[i].0, &runs[j].0)?;
            let df = diff(&runs[i].1, &runs[j].1)?;
            let d = dc.iter().map(|f| f.sup_norm()).fold(0.0, f64::max);
            let margin = cfg.margin_factor * refinement_gap(&dc, &df)?;
            let (dp, dm) = delta_pm(&signals[i], &signals[j], cfg.horizon)?;
            let s = sup_distance(&signals[i], &signals[j], cfg.horizon)?;
            let worst = dp.max(dm);
            let bound = if dp + dm < smallness {
                Some(if worst > 0.0 {
                    theta(&omega, 1.0 / worst)
                } else {
                    0.0
                })
            } else {
                None
            };
            rows.push(ExtensionRow {
                n: levels[i],
                m: levels[j],
                d,
                s,
                delta_plus: dp,
                delta_minus: dm,
                bound,
                margin,
                pass: bound.is_none_or(|b| d <= b + margin),
            });
        }
    }
    Ok(ExtensionTable {
        seed: cfg.seed,
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ModulusRow {
    pub amplitude: f64,
    pub periods: usize,
    /// Lipschitz estimate of `u(., T)`.
    pub lipschitz: f64,
    /// Largest Lipschitz estimate over the snapshots with `t > 0`.
    pub lipschitz_max: f64,
}

#[derive(Clone, Debug)]
pub struct ModulusTable {
    pub initial_lipschitz: f64,
    pub rows: Vec<ModulusRow>,
}

impl ModulusTable {
    pub const CSV_HEADER: &'static str = "amplitude,periods,lipschitz,lipschitz_max";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            writeln!(
                s,
                "{:?},{},{:?},{:?}",
                r.amplitude, r.periods, r.lipschitz, r.lipschitz_max
            )
            .unwrap();
        }
        s
    }

    pub fn mean(&self) -> f64 {
        self.rows.iter().map(|r| r.lipschitz).sum::<f64>() / self.rows.len() as f64
    }

    /// `(max - min) / mean` of the Lipschitz estimates.
    pub fn relative_spread(&self) -> f64 {
        let max = self
            .rows
            .iter()
            .map(|r| r.lipschitz)
            .fold(f64::NEG_INFINITY, f64::max);
        let min = self
            .rows
            .iter()
            .map(|r| r.lipschitz)
            .fold(f64::INFINITY, f64::min);
        (max - min) / self.mean()
    }
}

/// Lipschitz estimates of `u(., t)` across the configured zigzag family.
pub fn modulus_uniformity_probe(cfg: &ExperimentConfig) -> Result<ModulusTable, HarnessError> {
    cfg.validate()?;
    if cfg.family.is_empty() {
        return Err(HarnessError::Invalid("signal family is empty".into()));
    }
    let u0 = cfg.u0.sample(&cfg.grid);
    let opts = cfg.solve_options();
    let rows = cfg
        .family
        .par_iter()
        .map(|&(amplitude, periods)| -> Result<_, HarnessError> {
            let xi = PathSignal::zigzag(amplitude, periods, cfg.horizon)?;
            let tr = solve(&u0, &cfg.metric, &cfg.f, &xi, cfg.horizon, &opts)?;
            let lipschitz_max = tr.snapshots[1..]
                .iter()
                .map(|s| s.lipschitz())
                .fold(0.0, f64::max);
            Ok(ModulusRow {
                amplitude,
                periods,
                lipschitz: tr.final_state().lipschitz(),
                lipschitz_max,
            })
        })
        .collect::<Result<_, _>>()?;
    Ok(ModulusTable {
        initial_lipschitz: u0.lipschitz(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::hopf_lax_flat;
    use nalgebra::DMatrix;

    fn small(name: &str) -> ExperimentConfig {
        let mut c = ExperimentConfig::new(name);
        c.grid = Grid::new(1, 64, 2.0 * std::f64::consts::PI).unwrap();
        c.dt_max = 0.02;
        c.observe_stride = Some(0.25);
        c.upsilon = Some(1.0);
        c
    }

    #[test]
    fn data_ranges_and_moduli() {
        let d = DataSpec::neg_abs(1.0).with_offset(0.5);
        assert_eq!(d.range(2.0), (-0.5, 0.5));
        assert_eq!(d.sup_norm(2.0), 0.5);
        let s = DataSpec::sine(0.5, 1.0);
        let m = s.modulus(6.0, 1.0).unwrap();
        assert_eq!((m.slope(), m.cap()), (1.0, 1.0));
        assert_eq!(
            DataSpec::constant(3.0).modulus(1.0, 2.0).unwrap(),
            Modulus::zero()
        );
    }

    #[test]
    fn identical_runs_pass_with_zero_gap() {
        let mut c = small("same");
        c.xi = SignalSpec::Zigzag {
            amplitude: 0.1,
            periods: 2,
        };
        c.zeta = c.xi.clone();
        let r = run_first_order_comparison(&c).unwrap();
        assert_eq!(r.measured_sup_gap, 0.0);
        assert_eq!(r.bound, 0.0);
        assert!(r.pass);
    }

    #[test]
    fn translated_data_gap_is_offset() {
        let mut c = small("shift");
        c.u0 = DataSpec::sine(0.5, 1.0).with_offset(0.1);
        c.xi = SignalSpec::Zigzag {
            amplitude: 0.05,
            periods: 2,
        };
        c.zeta = c.xi.clone();
        let r = run_first_order_comparison(&c).unwrap();
        assert!((r.measured_sup_gap - 0.1).abs() < 1e-12);
        assert!((r.bound - 0.1).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn zigzag_against_zero_is_within_bound() {
        let mut c = small("zigzag");
        c.xi = SignalSpec::Zigzag {
            amplitude: 0.05,
            periods: 4,
        };
        let r = run_first_order_comparison(&c).unwrap();
        assert!((r.bound - 0.025).abs() < 1e-12);
        assert!(r.measured_sup_gap > 0.0);
        assert!(r.pass, "{r:?}");
        assert!(r.csv_row().starts_with("zigzag,"));
    }

    #[test]
    fn smallness_failure_is_reported() {
        let mut c = small("big");
        c.xi = SignalSpec::Zigzag {
            amplitude: 2.0,
            periods: 1,
        };
        c.upsilon = Some(0.5);
        let r = run_first_order_comparison(&c).unwrap();
        assert!(!r.pass);
        assert!(r.bound.is_nan());
        assert!(r.note.contains("smallness"));
    }

    #[test]
    fn diffusion_comparison_and_empty_gamma() {
        let mut c = small("diffusion");
        c.f = FSpec::linear_diffusion(DMatrix::identity(1, 1) * 0.1, 1.0, 1.0).unwrap();
        c.xi = SignalSpec::Zigzag {
            amplitude: 0.05,
            periods: 4,
        };
        let r = run_second_order_comparison(&c).unwrap();
        assert!(r.bound.is_finite());
        assert!(r.pass, "{r:?}");
        c.upsilon = Some(1e-3);
        let r = run_second_order_comparison(&c).unwrap();
        assert!(!r.pass);
        assert!(r.note.contains("no admissible gamma"), "{}", r.note);
    }

    #[test]
    fn cauchy_same_level_is_zero_and_table_is_complete() {
        let mut c = small("ext");
        c.levels = (2, 4);
        let t = run_extension_cauchy(&c).unwrap();
        assert_eq!(t.rows.len(), 3);
        assert_eq!(t.consecutive().len(), 2);
        assert!(t.all_bounded_pass(), "{}", t.to_csv());
        c.levels = (3, 3);
        assert!(run_extension_cauchy(&c).unwrap().rows.is_empty());
    }

    #[test]
    fn zero_signal_keeps_initial_lipschitz() {
        let mut c = small("mod");
        c.family = vec![(0.0, 1)];
        let t = modulus_uniformity_probe(&c).unwrap();
        assert_eq!(t.rows[0].lipschitz, t.initial_lipschitz);
        assert_eq!(t.relative_spread(), 0.0);
    }

    #[test]
    fn hopf_lax_does_not_increase_lipschitz() {
        let c = small("hl");
        let u0 = c.u0.sample(&c.grid);
        assert!(hopf_lax_flat(&u0, 0.5).lipschitz() <= u0.lipschitz());
    }
}
