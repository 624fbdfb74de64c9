//! Energy `e_g`, distance `d_g` and their derivatives by Newton shooting on
//! the end-point map.

use nalgebra::{DMatrix, DVector};

use super::flow::{geodesic_flow_with_tangent, Flow, DEFAULT_STEPS};
use super::metric::{hamiltonian, MetricField};
use super::GeometryError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ShootingOptions {
    pub steps: usize,
    pub max_iterations: usize,
    /// Newton tolerance is `newton_tol_scale * (1 + |x - y|)`.
    pub newton_tol_scale: f64,
    /// Finite-difference step for the Hessian is `hess_step_scale * (1 + |x - y|)`.
    pub hess_step_scale: f64,
    /// Number of step halvings tried when a Newton update increases the residual.
    pub max_halvings: usize,
}

impl Default for ShootingOptions {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            max_iterations: 50,
            newton_tol_scale: 1e-10,
            hess_step_scale: 1e-4,
            max_halvings: 30,
        }
    }
}

/// Solution of the two-point boundary problem `E_x(p0) = y`.
#[derive(Clone, Debug)]
pub struct ShootingResult {
    pub p0: DVector<f64>,
    pub x_traj: Vec<DVector<f64>>,
    pub p_traj: Vec<DVector<f64>>,
    pub alpha1: DMatrix<f64>,
    pub beta1: DMatrix<f64>,
    pub energy: f64,
    pub hamiltonian_drift: f64,
    pub iterations: usize,
    pub residual: f64,
}

impl ShootingResult {
    /// `P_1`, which equals `D_y e_g(x, y)`.
    pub fn p1(&self) -> &DVector<f64> {
        self.p_traj.last().unwrap()
    }

    fn from_flow(p0: DVector<f64>, flow: Flow, iterations: usize, residual: f64) -> Self {
        Self {
            p0,
            energy: flow.hamiltonian0,
            hamiltonian_drift: flow.hamiltonian_drift,
            alpha1: flow.alpha1.unwrap(),
            beta1: flow.beta1.unwrap(),
            x_traj: flow.x_traj,
            p_traj: flow.p_traj,
            iterations,
            residual,
        }
    }
}

/// Full second derivative of `e_g` in `(x, y)` plus the mixed-block cross-check.
#[derive(Clone, Debug)]
pub struct EnergyHessian {
    /// `[[D_xx, D_xy], [D_yx, D_yy]]`, symmetrized.
    pub matrix: DMatrix<f64>,
    /// `max |D_xy e + alpha_1^{-1}|`; zero for the `x = y` shortcut.
    pub mixed_block_error: f64,
}

/// Newton shooting on one metric with fixed numerical options.
#[derive(Clone, Debug)]
pub struct Shooter<'m> {
    metric: &'m MetricField,
    opts: ShootingOptions,
}

fn as_vec(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

impl<'m> Shooter<'m> {
    pub fn new(metric: &'m MetricField) -> Self {
        Self::with_options(metric, ShootingOptions::default())
    }

    pub fn with_options(metric: &'m MetricField, opts: ShootingOptions) -> Self {
        Self { metric, opts }
    }

    pub fn metric(&self) -> &'m MetricField {
        self.metric
    }

    pub fn options(&self) -> &ShootingOptions {
        &self.opts
    }

    fn check_dims(&self, x: &[f64], y: &[f64]) -> Result<(), GeometryError> {
        let n = self.metric.dim();
        for v in [x, y] {
            if v.len() != n {
                return Err(GeometryError::DimensionMismatch {
                    expected: n,
                    got: v.len(),
                });
            }
        }
        Ok(())
    }

    pub fn newton_tol(&self, x: &[f64], y: &[f64]) -> f64 {
        self.opts.newton_tol_scale * (1.0 + (as_vec(x) - as_vec(y)).norm())
    }

    /// Solve `E_x(p) = y` by damped Newton iteration from `p = g(x)(y - x) / 2`.
    pub fn invert_endpoint(&self, x: &[f64], y: &[f64]) -> Result<ShootingResult, GeometryError> {
        self.check_dims(x, y)?;
        let target = as_vec(y);
        let tol = self.newton_tol(x, y);
        let steps = self.opts.steps;
        let mut p = self.metric.g(x) * (&target - as_vec(x)) * 0.5;
        let mut flow = geodesic_flow_with_tangent(self.metric, x, p.as_slice(), steps)?;
        let mut res_vec = flow.endpoint() - &target;
        let mut res = res_vec.norm();
        let mut iterations = 0;
        while res > tol {
            if iterations >= self.opts.max_iterations {
                return Err(GeometryError::NoConvergence {
                    iterations,
                    residual: res,
                });
            }
            iterations += 1;
            let jac = flow.alpha1.as_ref().unwrap();
            let delta = jac
                .clone()
                .lu()
                .solve(&res_vec)
                .ok_or(GeometryError::NoConvergence {
                    iterations,
                    residual: res,
                })?;
            let mut scale = 1.0;
            let mut accepted = false;
            for _ in 0..=self.opts.max_halvings {
                let trial = &p - &delta * scale;
                match geodesic_flow_with_tangent(self.metric, x, trial.as_slice(), steps) {
                    Ok(f) => {
                        let rv = f.endpoint() - &target;
                        let r = rv.norm();
                        if r < res || r <= tol {
                            p = trial;
                            flow = f;
                            res_vec = rv;
                            res = r;
                            accepted = true;
                            break;
                        }
                    }
                    Err(GeometryError::DriftExceeded { .. }) => {}
                    Err(e) => return Err(e),
                }
                scale *= 0.5;
            }
            if !accepted {
                return Err(GeometryError::NoConvergence {
                    iterations,
                    residual: res,
                });
            }
        }
        Ok(ShootingResult::from_flow(p, flow, iterations, res))
    }

    /// `e_g(x, y) = H(x, E_x^{-1}(y))`.
    pub fn energy(&self, x: &[f64], y: &[f64]) -> Result<f64, GeometryError> {
        self.check_dims(x, y)?;
        if x == y {
            return Ok(0.0);
        }
        Ok(self.invert_endpoint(x, y)?.energy)
    }

    /// `d_g = sqrt(e_g)`.
    pub fn distance(&self, x: &[f64], y: &[f64]) -> Result<f64, GeometryError> {
        Ok(self.energy(x, y)?.sqrt())
    }

    /// `(D_x e_g, D_y e_g) = (-p_0, P_1)`.
    pub fn grad_energy(
        &self,
        x: &[f64],
        y: &[f64],
    ) -> Result<(DVector<f64>, DVector<f64>), GeometryError> {
        self.check_dims(x, y)?;
        let n = self.metric.dim();
        if x == y {
            return Ok((DVector::zeros(n), DVector::zeros(n)));
        }
        let s = self.invert_endpoint(x, y)?;
        Ok((-&s.p0, s.p1().clone()))
    }

    /// Energy and both gradients from a single shooting solve.
    pub fn energy_and_grad(
        &self,
        x: &[f64],
        y: &[f64],
    ) -> Result<(f64, DVector<f64>, DVector<f64>), GeometryError> {
        self.check_dims(x, y)?;
        let n = self.metric.dim();
        if x == y {
            return Ok((0.0, DVector::zeros(n), DVector::zeros(n)));
        }
        let s = self.invert_endpoint(x, y)?;
        Ok((s.energy, -&s.p0, s.p1().clone()))
    }

    /// `D^2 e_g` by central differences of the shooting gradients.
    pub fn hessian_energy(&self, x: &[f64], y: &[f64]) -> Result<EnergyHessian, GeometryError> {
        self.check_dims(x, y)?;
        let n = self.metric.dim();
        if x == y {
            // p -> 0 limit: D_p E_x = 2 g^{-1}(x), so D_xy e = -g(x)/2.
            let g = self.metric.g(x) * 0.5;
            let mut m = DMatrix::zeros(2 * n, 2 * n);
            m.view_mut((0, 0), (n, n)).copy_from(&g);
            m.view_mut((n, n), (n, n)).copy_from(&g);
            m.view_mut((0, n), (n, n)).copy_from(&(-&g));
            m.view_mut((n, 0), (n, n)).copy_from(&(-&g));
            return Ok(EnergyHessian {
                matrix: m,
                mixed_block_error: 0.0,
            });
        }
        let base = self.invert_endpoint(x, y)?;
        let h = self.opts.hess_step_scale * (1.0 + (as_vec(x) - as_vec(y)).norm());
        let mut m = DMatrix::zeros(2 * n, 2 * n);
        let grad = |xx: &[f64], yy: &[f64]| -> Result<DVector<f64>, GeometryError> {
            let (gx, gy) = self.grad_energy(xx, yy)?;
            let mut g = DVector::zeros(2 * n);
            g.rows_mut(0, n).copy_from(&gx);
            g.rows_mut(n, n).copy_from(&gy);
            Ok(g)
        };
        for j in 0..2 * n {
            let mut xp = x.to_vec();
            let mut yp = y.to_vec();
            let mut xm = x.to_vec();
            let mut ym = y.to_vec();
            if j < n {
                xp[j] += h;
                xm[j] -= h;
            } else {
                yp[j - n] += h;
                ym[j - n] -= h;
            }
            let col = (grad(&xp, &yp)? - grad(&xm, &ym)?) / (2.0 * h);
            m.set_column(j, &col);
        }
        let m = (&m + m.transpose()) * 0.5;
        let inv = base
            .alpha1
            .clone()
            .try_inverse()
            .ok_or(GeometryError::SingularTangent)?;
        let mixed = m.view((0, n), (n, n)).into_owned();
        let mixed_block_error = (mixed + inv).amax();
        Ok(EnergyHessian {
            matrix: m,
            mixed_block_error,
        })
    }

    /// Eikonal residuals `(|(g^{-1}(x) D_x e, D_x e) - e|, |(g^{-1}(y) D_y e, D_y e) - e|)`.
    pub fn verify_eikonal(&self, x: &[f64], y: &[f64]) -> Result<(f64, f64), GeometryError> {
        let (e, gx, gy) = self.energy_and_grad(x, y)?;
        let hx = hamiltonian(self.metric, x, gx.as_slice());
        let hy = hamiltonian(self.metric, y, gy.as_slice());
        Ok(((hx - e).abs(), (hy - e).abs()))
    }
}
