//! Hamiltonian characteristics `X' = 2 g^{-1}(X) P`, `P' = -(D g^{-1}(X) P, P)`
//! on `[0, 1]`, optionally carrying the tangent flow `(alpha, beta) = D_p (X, P)`.

use nalgebra::{DMatrix, DVector};

use super::metric::MetricField;
use super::GeometryError;

/// Default number of RK4 steps on `[0, 1]`.
pub const DEFAULT_STEPS: usize = 256;
/// Drift budget is `DRIFT_SCALE * (1 + |p|^2)`.
pub const DRIFT_SCALE: f64 = 1e-8;

/// Integrated characteristic through `(x, p)`.
#[derive(Clone, Debug)]
pub struct Flow {
    pub x_traj: Vec<DVector<f64>>,
    pub p_traj: Vec<DVector<f64>>,
    /// `D_p X_1`, present when the tangent flow was integrated.
    pub alpha1: Option<DMatrix<f64>>,
    /// `D_p P_1`, present when the tangent flow was integrated.
    pub beta1: Option<DMatrix<f64>>,
    /// `H(X_0, P_0)`.
    pub hamiltonian0: f64,
    /// `max_t |H(X_t, P_t) - H(X_0, P_0)|` over the step grid.
    pub hamiltonian_drift: f64,
}

impl Flow {
    pub fn endpoint(&self) -> &DVector<f64> {
        self.x_traj.last().expect("trajectory is never empty")
    }

    pub fn end_covector(&self) -> &DVector<f64> {
        self.p_traj.last().expect("trajectory is never empty")
    }
}

fn h_value(ginv: &DMatrix<f64>, p: &DVector<f64>) -> f64 {
    (ginv * p).dot(p)
}

struct Rhs<'a> {
    metric: &'a MetricField,
    n: usize,
    tangent: bool,
}

impl Rhs<'_> {
    fn len(&self) -> usize {
        if self.tangent {
            2 * self.n + 2 * self.n * self.n
        } else {
            2 * self.n
        }
    }

    fn eval(&self, s: &DVector<f64>) -> DVector<f64> {
        let n = self.n;
        let x = s.rows(0, n);
        let p = s.rows(n, n).into_owned();
        let jet = self.metric.inverse_jet(x.as_slice(), self.tangent);
        let mut out = DVector::zeros(self.len());
        out.rows_mut(0, n).copy_from(&(&jet.ginv * &p * 2.0));
        let dp: Vec<DVector<f64>> = jet.d.iter().map(|dk| dk * &p).collect();
        for k in 0..n {
            out[n + k] = -dp[k].dot(&p);
        }
        if self.tangent {
            let nn = n * n;
            let alpha = DMatrix::from_column_slice(n, n, s.rows(2 * n, nn).as_slice());
            let beta = DMatrix::from_column_slice(n, n, s.rows(2 * n + nn, nn).as_slice());
            // a[(i, j)] = (d_j g^{-1} P)_i
            let a = DMatrix::from_fn(n, n, |i, j| dp[j][i]);
            // b[(k, j)] = (d_k d_j g^{-1} P, P)
            let b = DMatrix::from_fn(n, n, |k, j| (&jet.dd[k * n + j] * &p).dot(&p));
            let alpha_dot = (&a * &alpha + &jet.ginv * &beta) * 2.0;
            let beta_dot = -(&b * &alpha) - (a.transpose() * &beta) * 2.0;
            out.rows_mut(2 * n, nn)
                .copy_from_slice(alpha_dot.as_slice());
            out.rows_mut(2 * n + nn, nn)
                .copy_from_slice(beta_dot.as_slice());
        }
        out
    }
}

fn integrate_unchecked(
    metric: &MetricField,
    x: &[f64],
    p: &[f64],
    steps: usize,
    tangent: bool,
) -> Result<Flow, GeometryError> {
    let n = metric.dim();
    if x.len() != n || p.len() != n {
        return Err(GeometryError::DimensionMismatch {
            expected: n,
            got: x.len().max(p.len()),
        });
    }
    if steps == 0 {
        return Err(GeometryError::InvalidSteps);
    }
    let rhs = Rhs { metric, n, tangent };
    let mut state = DVector::zeros(rhs.len());
    state.rows_mut(0, n).copy_from_slice(x);
    state.rows_mut(n, n).copy_from_slice(p);
    if tangent {
        // alpha_0 = 0, beta_0 = I
        let nn = n * n;
        for i in 0..n {
            state[2 * n + nn + i * n + i] = 1.0;
        }
    }
    let h = 1.0 / steps as f64;
    let p0 = DVector::from_column_slice(p);
    let h0 = h_value(&metric.g_inv(x), &p0);
    let mut drift: f64 = 0.0;
    let mut x_traj = Vec::with_capacity(steps + 1);
    let mut p_traj = Vec::with_capacity(steps + 1);
    x_traj.push(DVector::from_column_slice(x));
    p_traj.push(p0.clone());
    for _ in 0..steps {
        let k1 = rhs.eval(&state);
        let k2 = rhs.eval(&(&state + &k1 * (0.5 * h)));
        let k3 = rhs.eval(&(&state + &k2 * (0.5 * h)));
        let k4 = rhs.eval(&(&state + &k3 * h));
        state += (k1 + k2 * 2.0 + k3 * 2.0 + k4) * (h / 6.0);
        let xs = state.rows(0, n).into_owned();
        let ps = state.rows(n, n).into_owned();
        let ht = h_value(&metric.g_inv(xs.as_slice()), &ps);
        drift = drift.max((ht - h0).abs());
        x_traj.push(xs);
        p_traj.push(ps);
    }
    let (alpha1, beta1) = if tangent {
        let nn = n * n;
        (
            Some(DMatrix::from_column_slice(
                n,
                n,
                state.rows(2 * n, nn).as_slice(),
            )),
            Some(DMatrix::from_column_slice(
                n,
                n,
                state.rows(2 * n + nn, nn).as_slice(),
            )),
        )
    } else {
        (None, None)
    };
    Ok(Flow {
        x_traj,
        p_traj,
        alpha1,
        beta1,
        hamiltonian0: h0,
        hamiltonian_drift: drift,
    })
}

fn integrate(
    metric: &MetricField,
    x: &[f64],
    p: &[f64],
    steps: usize,
    tangent: bool,
) -> Result<Flow, GeometryError> {
    let flow = integrate_unchecked(metric, x, p, steps, tangent)?;
    let budget = DRIFT_SCALE * (1.0 + p.iter().map(|v| v * v).sum::<f64>());
    if flow.hamiltonian_drift > budget {
        return Err(GeometryError::DriftExceeded {
            drift: flow.hamiltonian_drift,
            budget,
        });
    }
    Ok(flow)
}

/// Integrate the characteristics from `(x, p)` over `[0, 1]` with `steps` RK4 steps.
pub fn geodesic_flow(
    metric: &MetricField,
    x: &[f64],
    p: &[f64],
    steps: usize,
) -> Result<Flow, GeometryError> {
    integrate(metric, x, p, steps, false)
}

/// Same as [`geodesic_flow`] but also integrates the tangent flow.
pub fn geodesic_flow_with_tangent(
    metric: &MetricField,
    x: &[f64],
    p: &[f64],
    steps: usize,
) -> Result<Flow, GeometryError> {
    integrate(metric, x, p, steps, true)
}

/// `(alpha_1, beta_1) = (D_p X_1, D_p P_1)`.
pub fn tangent_flow(
    metric: &MetricField,
    x: &[f64],
    p: &[f64],
    steps: usize,
) -> Result<(DMatrix<f64>, DMatrix<f64>), GeometryError> {
    let f = integrate(metric, x, p, steps, true)?;
    Ok((f.alpha1.unwrap(), f.beta1.unwrap()))
}

/// Projected end-point map `E_x(p) = X_1(x, p)`.
pub fn endpoint_map(
    metric: &MetricField,
    x: &[f64],
    p: &[f64],
    steps: usize,
) -> Result<DVector<f64>, GeometryError> {
    Ok(geodesic_flow(metric, x, p, steps)?.endpoint().clone())
}
