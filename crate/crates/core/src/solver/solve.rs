//! Lie splitting over slices on which the signal is linear.

use std::fmt::Write;

use crate::geometry::MetricField;
use crate::signals::PathSignal;

use super::fspec::FSpec;
use super::grid::GridFunction;
use super::schemes::{FOperator, HamiltonianOperator, DEFAULT_CFL, DEFAULT_MAX_SUBSTEPS};
use super::SolverError;

#[derive(Clone, Debug, PartialEq)]
pub struct SolveOptions {
    /// Upper bound on the slice length.
    pub dt_max: f64,
    /// Times at which snapshots are recorded, besides `0` and `T`.
    pub observe_times: Vec<f64>,
    pub cfl: f64,
    pub max_substeps: usize,
}

impl SolveOptions {
    pub fn new(dt_max: f64) -> Self {
        Self {
            dt_max,
            observe_times: Vec::new(),
            cfl: DEFAULT_CFL,
            max_substeps: DEFAULT_MAX_SUBSTEPS,
        }
    }

    /// Snapshots at `stride, 2 stride, ...` up to `horizon`.
    pub fn with_stride(mut self, stride: f64, horizon: f64) -> Self {
        let n = (horizon / stride).floor() as usize;
        self.observe_times = (1..=n)
            .map(|k| k as f64 * stride)
            .filter(|t| *t < horizon)
            .collect();
        self
    }
}

/// Per-slice diagnostics.
#[derive(Clone, Debug, PartialEq)]
pub struct SliceDiag {
    pub t_start: f64,
    pub t_end: f64,
    pub xi_dot: f64,
    pub sup_norm: f64,
    pub lipschitz: f64,
    pub f_substeps: usize,
    pub h_substeps: usize,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    /// Snapshots at `0`, each observe time in `(0, T)`, and `T`.
    pub snapshots: Vec<GridFunction>,
    pub diagnostics: Vec<SliceDiag>,
}

impl Trajectory {
    pub fn final_state(&self) -> &GridFunction {
        self.snapshots.last().unwrap()
    }

    pub const DIAG_HEADER: &'static str =
        "t_start,t_end,xi_dot,sup_norm,lipschitz,f_substeps,h_substeps";

    pub fn diagnostics_csv(&self) -> String {
        let mut s = String::from(Self::DIAG_HEADER);
        s.push('\n');
        for d in &self.diagnostics {
            writeln!(
                s,
                "{:?},{:?},{:?},{:?},{:?},{},{}",
                d.t_start, d.t_end, d.xi_dot, d.sup_norm, d.lipschitz, d.f_substeps, d.h_substeps
            )
            .unwrap();
        }
        s
    }
}

/// Solve up to `horizon` from `u0`: on each slice, an `F` step followed by a
/// Hamiltonian step with the slice's constant `xi'`.
pub fn solve(
    u0: &GridFunction,
    metric: &MetricField,
    f: &FSpec,
    xi: &PathSignal,
    horizon: f64,
    opts: &SolveOptions,
) -> Result<Trajectory, SolverError> {
    if horizon > xi.horizon() * (1.0 + 1e-12) {
        return Err(crate::signals::SignalError::HorizonMismatch {
            requested: horizon,
            available: xi.horizon(),
        }
        .into());
    }
    if !(opts.dt_max > 0.0) {
        return Err(SolverError::InvalidSpec("dt_max must be positive".into()));
    }
    let ham = HamiltonianOperator::new(metric, &u0.grid)?;
    let fop = FOperator::new(f, &u0.grid)?;

    let mut knots: Vec<f64> = xi
        .times()
        .iter()
        .chain(&opts.observe_times)
        .copied()
        .filter(|t| *t > 0.0 && *t < horizon)
        .collect();
    knots.push(0.0);
    knots.push(horizon);
    knots.sort_by(f64::total_cmp);
    knots.dedup();
    let observe = |t: f64| t == horizon || opts.observe_times.contains(&t);

    let mut u = GridFunction {
        time: 0.0,
        ..u0.clone()
    };
    let mut snapshots = vec![u.clone()];
    let mut diagnostics = Vec::new();
    for w in knots.windows(2) {
        let (a, b) = (w[0], w[1]);
        let pieces = ((b - a) / opts.dt_max).ceil().max(1.0) as usize;
        let xi_dot = xi.segment_slope(xi.segment_index(0.5 * (a + b)));
        for i in 0..pieces {
            let t0 = a + (b - a) * i as f64 / pieces as f64;
            let t1 = if i + 1 == pieces {
                b
            } else {
                a + (b - a) * (i + 1) as f64 / pieces as f64
            };
            let dt = t1 - t0;
            let (v, nf) = fop.step(&u, dt, opts.cfl, opts.max_substeps)?;
            let (v, nh) = ham.step(&v, xi_dot, dt, opts.cfl, opts.max_substeps)?;
            u = GridFunction { time: t1, ..v };
            diagnostics.push(SliceDiag {
                t_start: t0,
                t_end: t1,
                xi_dot,
                sup_norm: u.sup_norm(),
                lipschitz: u.lipschitz(),
                f_substeps: nf,
                h_substeps: nh,
            });
        }
        if observe(b) {
            snapshots.push(u.clone());
        }
    }
    Ok(Trajectory {
        snapshots,
        diagnostics,
    })
}
