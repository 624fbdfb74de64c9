use std::path::PathBuf;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use pathvisc::cli::{dispatch, Verb};
use pathvisc::config::load_config;
use pathvisc::geometry::{probe_injectivity, MetricField, ProbeOptions, ScalarField, Shooter};
use pathvisc::output::{emit_summary, OutDir};
use pathvisc::signals::{self, Modulus, PathSignal};
use pathvisc::solver::{self, FSpec, Grid, GridFunction, SolveOptions};

fn err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn matrix(rows: &[Vec<f64>]) -> PyResult<nalgebra::DMatrix<f64>> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(PyValueError::new_err("expected a nonempty square matrix"));
    }
    Ok(nalgebra::DMatrix::from_fn(n, n, |i, j| rows[i][j]))
}

fn rows(m: &nalgebra::DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| m.row(i).iter().copied().collect())
        .collect()
}

/// Riemannian metric on R^N.
#[pyclass(frozen, name = "Metric")]
struct PyMetric(MetricField);

#[pymethods]
impl PyMetric {
    #[staticmethod]
    fn identity(dim: usize) -> Self {
        Self(MetricField::identity(dim))
    }

    #[staticmethod]
    fn constant(a: Vec<Vec<f64>>) -> PyResult<Self> {
        MetricField::constant(matrix(&a)?).map(Self).map_err(err)
    }

    /// `g = exp(2 amplitude sin(frequency x_axis)) I`.
    #[staticmethod]
    #[pyo3(signature = (dim, amplitude, frequency=1.0, axis=0))]
    fn conformal(dim: usize, amplitude: f64, frequency: f64, axis: usize) -> PyResult<Self> {
        MetricField::conformal(ScalarField::sine(axis, amplitude, frequency), dim)
            .map(Self)
            .map_err(err)
    }

    #[getter]
    fn dim(&self) -> usize {
        self.0.dim()
    }

    fn ellipticity(&self) -> f64 {
        self.0.ellipticity_c()
    }

    fn g(&self, x: Vec<f64>) -> Vec<Vec<f64>> {
        rows(&self.0.g(&x))
    }

    fn energy(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        Shooter::new(&self.0).energy(&x, &y).map_err(err)
    }

    fn distance(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<f64> {
        Shooter::new(&self.0).distance(&x, &y).map_err(err)
    }

    /// `(D_x e, D_y e)`.
    fn grad_energy(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<(Vec<f64>, Vec<f64>)> {
        let (_, gx, gy) = Shooter::new(&self.0).energy_and_grad(&x, &y).map_err(err)?;
        Ok((gx.iter().copied().collect(), gy.iter().copied().collect()))
    }

    /// Full `2N x 2N` Hessian of the energy.
    fn hessian_energy(&self, x: Vec<f64>, y: Vec<f64>) -> PyResult<Vec<Vec<f64>>> {
        let h = Shooter::new(&self.0).hessian_energy(&x, &y).map_err(err)?;
        Ok(rows(&h.matrix))
    }

    /// Certify the shooting radius; returns the headline numbers.
    #[pyo3(signature = (samples=200, seed=7))]
    fn probe(&self, samples: usize, seed: u64) -> (f64, f64, f64, usize) {
        let opts = ProbeOptions {
            samples,
            seed,
            ..Default::default()
        };
        let r = probe_injectivity(&self.0, &opts);
        (
            r.upsilon_estimate,
            r.gradsum_bound_l,
            r.hessian_bound_l,
            r.converged,
        )
    }

    fn __repr__(&self) -> String {
        format!("Metric({}, dim={})", self.0.family().tag(), self.0.dim())
    }
}

/// Piecewise-linear scalar driving signal.
#[pyclass(frozen, name = "Signal")]
struct PySignal(PathSignal);

#[pymethods]
impl PySignal {
    #[new]
    fn new(times: Vec<f64>, values: Vec<f64>) -> PyResult<Self> {
        PathSignal::new(times, values).map(Self).map_err(err)
    }

    #[staticmethod]
    fn linear(slope: f64, horizon: f64) -> PyResult<Self> {
        PathSignal::linear(slope, horizon).map(Self).map_err(err)
    }

    #[staticmethod]
    fn zigzag(amplitude: f64, periods: usize, horizon: f64) -> PyResult<Self> {
        PathSignal::zigzag(amplitude, periods, horizon)
            .map(Self)
            .map_err(err)
    }

    #[staticmethod]
    fn brownian(horizon: f64, level: u32, seed: u64) -> Self {
        Self(signals::sample_brownian(horizon, level, seed))
    }

    #[staticmethod]
    fn from_csv(text: &str) -> PyResult<Self> {
        PathSignal::from_csv(text).map(Self).map_err(err)
    }

    fn to_csv(&self) -> String {
        self.0.to_csv()
    }

    #[getter]
    fn times(&self) -> Vec<f64> {
        self.0.times().to_vec()
    }

    #[getter]
    fn values(&self) -> Vec<f64> {
        self.0.values().to_vec()
    }

    #[getter]
    fn horizon(&self) -> f64 {
        self.0.horizon()
    }

    fn slope(&self, t: f64) -> Option<f64> {
        self.0.slope(t)
    }

    fn total_variation(&self) -> f64 {
        self.0.total_variation()
    }

    fn __len__(&self) -> usize {
        self.0.times().len()
    }
}

/// Second-order operator `F`.
#[pyclass(frozen, name = "Operator")]
struct PyOperator(FSpec);

#[pymethods]
impl PyOperator {
    #[staticmethod]
    fn zero() -> Self {
        Self(FSpec::zero())
    }

    /// `F(M, p, r, x) = nu tr(a M) - decay r`.
    #[staticmethod]
    #[pyo3(signature = (a, nu=1.0, decay=1.0))]
    fn linear_diffusion(a: Vec<Vec<f64>>, nu: f64, decay: f64) -> PyResult<Self> {
        FSpec::linear_diffusion(matrix(&a)?, nu, decay)
            .map(Self)
            .map_err(err)
    }
}

/// `(Delta^+, Delta^-)` of two signals on `[0, horizon]`.
#[pyfunction]
fn delta_pm(xi: &PySignal, zeta: &PySignal, horizon: f64) -> PyResult<(f64, f64)> {
    signals::delta_pm(&xi.0, &zeta.0, horizon).map_err(err)
}

/// `sup_r (omega(r) - lambda r^2 / 2)` for `omega(r) = min(lipschitz r, cap)`.
#[pyfunction]
#[pyo3(signature = (lipschitz, lam, cap=f64::INFINITY))]
fn theta(lipschitz: f64, lam: f64, cap: f64) -> PyResult<f64> {
    Ok(signals::theta(
        &Modulus::new(lipschitz, cap).map_err(err)?,
        lam,
    ))
}

fn grid_function(values: Vec<f64>, dim: usize, length: f64) -> PyResult<GridFunction> {
    let points = match dim {
        1 => values.len(),
        2 => (values.len() as f64).sqrt().round() as usize,
        _ => return Err(PyValueError::new_err("dimension must be 1 or 2")),
    };
    let grid = Grid::new(dim, points, length).map_err(err)?;
    GridFunction::new(grid, values, 0.0).map_err(err)
}

/// Solve on the periodic box `[-length/2, length/2)^N` from nodal `values`;
/// returns `(times, states)` at the snapshot times.
#[pyfunction]
#[pyo3(signature = (values, length, metric, xi, horizon, dt_max=0.01, operator=None, observe_stride=None))]
#[allow(clippy::too_many_arguments)]
fn solve(
    values: Vec<f64>,
    length: f64,
    metric: &PyMetric,
    xi: &PySignal,
    horizon: f64,
    dt_max: f64,
    operator: Option<&PyOperator>,
    observe_stride: Option<f64>,
) -> PyResult<(Vec<f64>, Vec<Vec<f64>>)> {
    let u0 = grid_function(values, metric.0.dim(), length)?;
    let f = operator.map_or_else(FSpec::zero, |o| o.0.clone());
    let mut opts = SolveOptions::new(dt_max);
    if let Some(s) = observe_stride {
        opts = opts.with_stride(s, horizon);
    }
    let tr = solver::solve(&u0, &metric.0, &f, &xi.0, horizon, &opts).map_err(err)?;
    Ok(tr.snapshots.into_iter().map(|s| (s.time, s.values)).unzip())
}

/// Exact flat solution `sup_y (u0(y) - |x - y|^2 / (4 s))` on the same box.
#[pyfunction]
fn hopf_lax_flat(values: Vec<f64>, length: f64, dim: usize, s: f64) -> PyResult<Vec<f64>> {
    if s.is_nan() || s < 0.0 {
        return Err(PyValueError::new_err("s must be nonnegative"));
    }
    Ok(solver::hopf_lax_flat(&grid_function(values, dim, length)?, s).values)
}

/// Run one CLI verb on a config file; returns `(exit_code, summary)`.
#[pyfunction]
#[pyo3(signature = (verb, config, out, seed=None))]
fn run(verb: &str, config: PathBuf, out: PathBuf, seed: Option<u64>) -> PyResult<(i32, String)> {
    let verb = match verb {
        "geometry-check" => Verb::GeometryCheck,
        "phi-check" => Verb::PhiCheck,
        "solve" => Verb::Solve,
        "compare1" => Verb::Compare1,
        "compare2" => Verb::Compare2,
        "extend" => Verb::Extend,
        "isaacs-check" => Verb::IsaacsCheck,
        other => return Err(PyValueError::new_err(format!("unknown verb '{other}'"))),
    };
    let mut cfg = load_config(&config).map_err(err)?;
    if let Some(s) = seed {
        cfg.experiment.seed = s;
    }
    let o = dispatch(verb, &cfg, OutDir::new(out), false).map_err(err)?;
    Ok((o.exit_code(), emit_summary(&o.checks)))
}

#[pymodule]
fn pathvisc_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyMetric>()?;
    m.add_class::<PySignal>()?;
    m.add_class::<PyOperator>()?;
    m.add_function(wrap_pyfunction!(delta_pm, m)?)?;
    m.add_function(wrap_pyfunction!(theta, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(hopf_lax_flat, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    Ok(())
}
