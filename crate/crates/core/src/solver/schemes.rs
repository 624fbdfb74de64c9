//! Explicit monotone steps for the two parts of the split dynamics.

use crate::geometry::MetricField;

use super::fspec::FSpec;
use super::grid::{Grid, GridFunction};
use super::SolverError;

pub const DEFAULT_CFL: f64 = 0.9;
pub const DEFAULT_MAX_SUBSTEPS: usize = 1_000_000;

/// `g^{-1}` sampled at the nodes, for the Lax-Friedrichs Hamiltonian step.
#[derive(Clone, Debug)]
pub struct HamiltonianOperator {
    grid: Grid,
    /// `(a11, a12, a22)` per node; 1-D grids use `a11` only.
    ginv: Vec<[f64; 3]>,
    ginv_norm: f64,
}

impl HamiltonianOperator {
    pub fn new(metric: &MetricField, grid: &Grid) -> Result<Self, SolverError> {
        if metric.dim() != grid.dim() {
            return Err(SolverError::DimensionMismatch {
                expected: grid.dim(),
                got: metric.dim(),
            });
        }
        let mut norm: f64 = 0.0;
        let ginv = (0..grid.len())
            .map(|k| {
                let m = metric.g_inv(&grid.node(k));
                norm = norm.max(m.clone().symmetric_eigenvalues().amax());
                if grid.dim() == 1 {
                    [m[(0, 0)], 0.0, 0.0]
                } else {
                    [m[(0, 0)], m[(0, 1)], m[(1, 1)]]
                }
            })
            .collect();
        Ok(Self {
            grid: grid.clone(),
            ginv,
            ginv_norm: norm,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Dissipation coefficient bounding `|xi' dH/dp_k|` over centred gradients
    /// of a function with the given Lipschitz estimate.
    pub fn sigma(&self, xi_dot: f64, lipschitz: f64) -> f64 {
        xi_dot.abs() * 2.0 * self.ginv_norm * (self.grid.dim() as f64).sqrt() * lipschitz
    }

    /// Largest stable step for dissipation `sigma`.
    pub fn max_dt(&self, sigma: f64, cfl: f64) -> f64 {
        if sigma == 0.0 {
            f64::INFINITY
        } else {
            cfl * self.grid.spacing() / (self.grid.dim() as f64 * sigma)
        }
    }

    /// One forward-Euler Lax-Friedrichs step with a fixed dissipation `sigma`.
    pub fn update(&self, u: &[f64], xi_dot: f64, sigma: f64, dt: f64) -> Vec<f64> {
        let g = &self.grid;
        let h = g.spacing();
        (0..u.len())
            .map(|k| {
                let mut p = [0.0; 2];
                let mut lap = 0.0;
                for (a, pa) in p.iter_mut().enumerate().take(g.dim()) {
                    let up = u[g.shift(k, a, 1)];
                    let um = u[g.shift(k, a, -1)];
                    *pa = (up - um) / (2.0 * h);
                    lap += (up - 2.0 * u[k] + um) / h;
                }
                let m = &self.ginv[k];
                let ham = m[0] * p[0] * p[0] + 2.0 * m[1] * p[0] * p[1] + m[2] * p[1] * p[1];
                u[k] + dt * (xi_dot * ham + 0.5 * sigma * lap)
            })
            .collect()
    }

    /// Advance `u_t = xi' (g^{-1} Du, Du)` by `dt`, sub-stepping under the CFL
    /// bound with the dissipation recomputed from the current Lipschitz estimate.
    /// Returns the new state and the number of substeps.
    pub fn step(
        &self,
        u: &GridFunction,
        xi_dot: f64,
        dt: f64,
        cfl: f64,
        max_substeps: usize,
    ) -> Result<(GridFunction, usize), SolverError> {
        let mut vals = u.values.clone();
        if xi_dot == 0.0 || dt <= 0.0 {
            return Ok((
                GridFunction {
                    time: u.time + dt.max(0.0),
                    ..u.clone()
                },
                0,
            ));
        }
        let mut remaining = dt;
        let mut count = 0;
        while remaining > 0.0 {
            if count >= max_substeps {
                return Err(SolverError::CflFailure { substeps: count });
            }
            let cur = GridFunction {
                grid: self.grid.clone(),
                values: vals,
                time: 0.0,
            };
            let sigma = self.sigma(xi_dot, cur.lipschitz());
            vals = cur.values;
            if sigma == 0.0 {
                // Constant state: the centred Hamiltonian vanishes.
                break;
            }
            let mut h = self.max_dt(sigma, cfl);
            if h >= remaining {
                h = remaining;
            } else {
                // Equalize the remaining substeps to avoid a tiny last one.
                let k = (remaining / h).ceil();
                h = remaining / k;
            }
            vals = self.update(&vals, xi_dot, sigma, h);
            remaining -= h;
            if remaining < 1e-15 * dt {
                remaining = 0.0;
            }
            count += 1;
        }
        Ok((
            GridFunction {
                grid: self.grid.clone(),
                values: vals,
                time: u.time + dt,
            },
            count,
        ))
    }
}

#[derive(Clone, Debug)]
struct NodeCoeffs {
    a: [f64; 3],
    drift: [f64; 2],
    source: f64,
    c: f64,
}

/// Nodal coefficients of every `(alpha, beta)` term of an operator `F`.
#[derive(Clone, Debug)]
pub struct FOperator {
    grid: Grid,
    /// `terms[alpha][beta][node]`
    terms: Vec<Vec<Vec<NodeCoeffs>>>,
    /// All terms share `c(x)`, which is then integrated exactly.
    shared_c: Option<Vec<f64>>,
    weight: f64,
}

impl FOperator {
    pub fn new(f: &FSpec, grid: &Grid) -> Result<Self, SolverError> {
        let n = grid.dim();
        let entries = f.entries(n);
        let h = grid.spacing();
        let mut terms = Vec::with_capacity(entries.len());
        let mut weight: f64 = 0.0;
        let first_c = entries.first().and_then(|r| r.first()).map(|e| e.c);
        let shared = entries.iter().flatten().all(|e| Some(e.c) == first_c);
        for row in &entries {
            let mut trow = Vec::with_capacity(row.len());
            for e in row {
                if e.sigma.sigma(&vec![0.0; n]).nrows() != n {
                    return Err(SolverError::DimensionMismatch {
                        expected: n,
                        got: e.sigma.sigma(&vec![0.0; n]).nrows(),
                    });
                }
                let mut coeffs = Vec::with_capacity(grid.len());
                for k in 0..grid.len() {
                    let x = grid.node(k);
                    let a = e.diffusion(&x);
                    let a = if n == 1 {
                        [a[(0, 0)], 0.0, 0.0]
                    } else {
                        [a[(0, 0)], a[(0, 1)], a[(1, 1)]]
                    };
                    if n == 2 && (a[0] < a[1].abs() - 1e-14 || a[2] < a[1].abs() - 1e-14) {
                        return Err(SolverError::NonMonotoneStencil(format!(
                            "diffusion matrix at {x:?} is not diagonally dominant"
                        )));
                    }
                    let drift = [e.b.drift[0], if n == 2 { e.b.drift[1] } else { 0.0 }];
                    let c = e.c.eval(&x);
                    let diag = if n == 1 {
                        2.0 * a[0] / (h * h)
                    } else {
                        (2.0 * a[0] + 2.0 * a[2] - 2.0 * a[1].abs()) / (h * h)
                    };
                    let w = diag
                        + (drift[0].abs() + drift[1].abs()) / h
                        + if shared { 0.0 } else { c.max(0.0) };
                    weight = weight.max(w);
                    coeffs.push(NodeCoeffs {
                        a,
                        drift,
                        source: e.b.source.map_or(0.0, |s| s.eval(&x)),
                        c,
                    });
                }
                trow.push(coeffs);
            }
            terms.push(trow);
        }
        let shared_c = if shared && !terms.is_empty() {
            Some(terms[0][0].iter().map(|c| c.c).collect())
        } else {
            None
        };
        Ok(Self {
            grid: grid.clone(),
            terms,
            shared_c,
            weight,
        })
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest stable explicit step.
    pub fn max_dt(&self, cfl: f64) -> f64 {
        if self.weight == 0.0 {
            f64::INFINITY
        } else {
            cfl / self.weight
        }
    }

    fn term(&self, t: &NodeCoeffs, u: &[f64], k: usize, explicit_c: bool) -> f64 {
        let g = &self.grid;
        let h = g.spacing();
        let h2 = h * h;
        let u0 = u[k];
        let xp = u[g.shift(k, 0, 1)];
        let xm = u[g.shift(k, 0, -1)];
        let mut v = t.a[0] * (xp - 2.0 * u0 + xm) / h2;
        v += if t.drift[0] >= 0.0 {
            t.drift[0] * (xp - u0) / h
        } else {
            t.drift[0] * (u0 - xm) / h
        };
        if g.dim() == 2 {
            let yp = u[g.shift(k, 1, 1)];
            let ym = u[g.shift(k, 1, -1)];
            v += t.a[2] * (yp - 2.0 * u0 + ym) / h2;
            v += if t.drift[1] >= 0.0 {
                t.drift[1] * (yp - u0) / h
            } else {
                t.drift[1] * (u0 - ym) / h
            };
            let a12 = t.a[1];
            if a12 != 0.0 {
                let pp = u[g.shift(g.shift(k, 0, 1), 1, 1)];
                let mm = u[g.shift(g.shift(k, 0, -1), 1, -1)];
                let pm = u[g.shift(g.shift(k, 0, 1), 1, -1)];
                let mp = u[g.shift(g.shift(k, 0, -1), 1, 1)];
                let axes = xp + xm + yp + ym;
                // Seven-point cross difference, monotone under diagonal dominance.
                let uxy = if a12 > 0.0 {
                    (2.0 * u0 + pp + mm - axes) / (2.0 * h2)
                } else {
                    -(2.0 * u0 + pm + mp - axes) / (2.0 * h2)
                };
                v += 2.0 * a12 * uxy;
            }
        }
        v += t.source;
        if explicit_c {
            v -= t.c * u0;
        }
        v
    }

    /// Discrete `F(D^2 u, Du, u, x)` at every node; the zeroth-order term is
    /// omitted when it is integrated exactly.
    fn apply(&self, u: &[f64]) -> Vec<f64> {
        let explicit_c = self.shared_c.is_none();
        (0..u.len())
            .map(|k| {
                self.terms
                    .iter()
                    .map(|row| {
                        row.iter()
                            .map(|t| self.term(&t[k], u, k, explicit_c))
                            .fold(f64::NEG_INFINITY, f64::max)
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .collect()
    }

    /// Advance `u_t = F(D^2 u, Du, u, x)` by `dt`; returns the state and substep count.
    pub fn step(
        &self,
        u: &GridFunction,
        dt: f64,
        cfl: f64,
        max_substeps: usize,
    ) -> Result<(GridFunction, usize), SolverError> {
        if self.is_zero() || dt <= 0.0 {
            return Ok((
                GridFunction {
                    time: u.time + dt.max(0.0),
                    ..u.clone()
                },
                0,
            ));
        }
        let limit = self.max_dt(cfl);
        let count = if limit.is_finite() {
            (dt / limit).ceil().max(1.0)
        } else {
            1.0
        };
        if count > max_substeps as f64 {
            return Err(SolverError::CflFailure {
                substeps: count as usize,
            });
        }
        let count = count as usize;
        let h = dt / count as f64;
        let decay: Option<Vec<f64>> = self
            .shared_c
            .as_ref()
            .map(|c| c.iter().map(|c| (-c * h).exp()).collect());
        let mut vals = u.values.clone();
        for _ in 0..count {
            let rhs = self.apply(&vals);
            for (v, r) in vals.iter_mut().zip(&rhs) {
                *v += h * r;
            }
            if let Some(d) = &decay {
                for (v, f) in vals.iter_mut().zip(d) {
                    *v *= f;
                }
            }
        }
        Ok((
            GridFunction {
                grid: self.grid.clone(),
                values: vals,
                time: u.time + dt,
            },
            count,
        ))
    }
}

/// One Hamiltonian step `u_t = xi' (g^{-1}(x) Du, Du)` of length `dt`.
pub fn step_hamiltonian(
    u: &GridFunction,
    metric: &MetricField,
    xi_dot: f64,
    dt: f64,
) -> Result<GridFunction, SolverError> {
    let op = HamiltonianOperator::new(metric, &u.grid)?;
    Ok(op.step(u, xi_dot, dt, DEFAULT_CFL, DEFAULT_MAX_SUBSTEPS)?.0)
}

/// One step `u_t = F(D^2 u, Du, u, x, t)` of length `dt`; `F` does not depend on `t`.
pub fn step_f(u: &GridFunction, f: &FSpec, _t: f64, dt: f64) -> Result<GridFunction, SolverError> {
    let op = FOperator::new(f, &u.grid)?;
    Ok(op.step(u, dt, DEFAULT_CFL, DEFAULT_MAX_SUBSTEPS)?.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ScalarField;
    use crate::solver::fspec::{BModel, CModel, IsaacsEntry, SigmaModel};
    use nalgebra::DMatrix;
    use proptest::prelude::*;

    fn grid1(n: usize) -> Grid {
        Grid::new(1, n, 2.0).unwrap()
    }

    #[test]
    fn zero_signal_and_constants_are_fixed() {
        let g = grid1(32);
        let m = MetricField::identity(1);
        let u = GridFunction::from_fn(&g, |x| x[0].sin());
        assert_eq!(step_hamiltonian(&u, &m, 0.0, 0.1).unwrap().values, u.values);
        let c = GridFunction::constant(&g, 2.5);
        for xd in [-3.0, 1.0, 7.0] {
            assert_eq!(step_hamiltonian(&c, &m, xd, 0.1).unwrap().values, c.values);
        }
        let cm = MetricField::conformal(ScalarField::sine(0, 0.3, 2.0), 2).unwrap();
        let g2 = Grid::new(2, 12, 3.0).unwrap();
        let c2 = GridFunction::constant(&g2, -1.0);
        assert_eq!(
            step_hamiltonian(&c2, &cm, 2.0, 0.3).unwrap().values,
            c2.values
        );
    }

    #[test]
    fn zero_f_is_identity() {
        let g = grid1(16);
        let u = GridFunction::from_fn(&g, |x| x[0] * x[0]);
        assert_eq!(
            step_f(&u, &FSpec::zero(), 0.0, 1.0).unwrap().values,
            u.values
        );
    }

    #[test]
    fn isaacs_decay_ode() {
        let g = Grid::new(2, 8, 1.0).unwrap();
        let entry = IsaacsEntry {
            sigma: SigmaModel::Constant(DMatrix::identity(2, 2) * 0.2),
            b: BModel::zero(2),
            c: CModel::constant(1.0),
        };
        let f = FSpec::isaacs(vec![vec![entry]]).unwrap();
        let u = GridFunction::constant(&g, 1.0);
        let v = step_f(&u, &f, 0.0, 1.0).unwrap();
        for x in v.values {
            assert!((x - (-1.0f64).exp()).abs() < 1e-14);
        }
    }

    #[test]
    fn explicit_decay_when_c_differs() {
        let g = grid1(8);
        let e = |c: f64| IsaacsEntry {
            sigma: SigmaModel::Constant(DMatrix::zeros(1, 1)),
            b: BModel::zero(1),
            c: CModel::constant(c),
        };
        // sup over {-u, -2u} is -u for u > 0: forward Euler on u' = -u with
        // substeps bounded by cfl / max c.
        let f = FSpec::isaacs(vec![vec![e(1.0), e(2.0)]]).unwrap();
        let op = FOperator::new(&f, &g).unwrap();
        let (v, k) = op
            .step(&GridFunction::constant(&g, 1.0), 1.0, DEFAULT_CFL, 100)
            .unwrap();
        assert_eq!(k, 3);
        let euler = (1.0 - 1.0 / 3.0f64).powi(3);
        for x in &v.values {
            assert!((x - euler).abs() < 1e-15);
        }
        let (v, k) = op
            .step(&GridFunction::constant(&g, 1.0), 1.0, 0.001, 10_000)
            .unwrap();
        assert_eq!(k, 2000);
        assert!((v.values[0] - (-1.0f64).exp()).abs() < 1e-3);
    }

    /// Explicit reference: many small forward-Euler steps of the standard
    /// 3-point heat stencil on a 4x finer grid.
    fn heat_reference(n: usize, t: f64) -> Vec<f64> {
        let fine = grid1(4 * n);
        let h = fine.spacing();
        let mut u: Vec<f64> = (0..fine.len()).map(|k| bump(fine.coordinate(k))).collect();
        let steps = (t / (0.2 * h * h)).ceil() as usize;
        let dt = t / steps as f64;
        for _ in 0..steps {
            let prev = u.clone();
            for k in 0..u.len() {
                let l = prev[fine.shift(k, 0, -1)];
                let r = prev[fine.shift(k, 0, 1)];
                u[k] = prev[k] + dt * (l - 2.0 * prev[k] + r) / (h * h);
            }
        }
        (0..n).map(|i| u[4 * i]).collect()
    }

    fn bump(x: f64) -> f64 {
        (-(8.0 * (std::f64::consts::PI * x / 2.0).sin()).powi(2)).exp()
    }

    #[test]
    fn heat_step_matches_refined_reference() {
        let n = 32;
        let g = grid1(n);
        let t = 0.02;
        let f = FSpec::linear_diffusion(DMatrix::identity(1, 1), 1.0, 0.0).unwrap();
        let u0 = GridFunction::from_fn(&g, |x| bump(x[0]));
        let u = step_f(&u0, &f, 0.0, t).unwrap();
        let r = heat_reference(n, t);
        let err = u
            .values
            .iter()
            .zip(&r)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        // Truncation estimate of the coarse 3-point stencil: t h^2/12 sup|u_xxxx|,
        // with sup|u_xxxx| bounded by the fourth difference of the data.
        let h = g.spacing();
        let d4 = (0..n)
            .map(|k| {
                let v = |o: isize| u0.values[g.shift(k, 0, o)];
                ((v(2) - 4.0 * v(1) + 6.0 * v(0) - 4.0 * v(-1) + v(-2)) / h.powi(4)).abs()
            })
            .fold(0.0, f64::max);
        let trunc = t * h * h / 12.0 * d4;
        assert!(err <= 4.0 * trunc, "err {err} trunc {trunc}");
        assert!(err > 0.0);
    }

    #[test]
    fn cross_diffusion_stencil_is_consistent() {
        let g = Grid::new(2, 64, 2.0 * std::f64::consts::PI).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0]);
        let f = FSpec::linear_diffusion(a, 1.0, 0.0).unwrap();
        let op = FOperator::new(&f, &g).unwrap();
        let u = GridFunction::from_fn(&g, |x| (x[0] + x[1]).sin());
        let lu = op.apply(&u.values);
        // tr(a D^2 u) = -(1 + 1 + 2 * 0.5) sin(x + y); each second difference
        // of sin has relative error at most h^2/12.
        let h = g.spacing();
        for (k, l) in lu.iter().enumerate() {
            let x = g.node(k);
            assert!((l + 3.0 * (x[0] + x[1]).sin()).abs() < 3.0 * h * h / 12.0 * 4.0);
        }
        let bad = FSpec::linear_diffusion(
            DMatrix::from_row_slice(2, 2, &[1.0, 0.6, 0.6, 0.5]),
            1.0,
            0.0,
        )
        .unwrap();
        assert!(matches!(
            FOperator::new(&bad, &g),
            Err(SolverError::NonMonotoneStencil(_))
        ));
    }

    #[test]
    fn f_step_is_monotone_and_contracts() {
        let g = Grid::new(2, 10, 1.0).unwrap();
        let a = DMatrix::from_row_slice(2, 2, &[1.0, -0.4, -0.4, 0.8]);
        let f = FSpec::linear_diffusion(a, 0.05, 0.5).unwrap();
        let u = GridFunction::from_fn(&g, |x| (6.0 * x[0]).sin() * (4.0 * x[1]).cos());
        let mut v = u.clone();
        v.values
            .iter_mut()
            .enumerate()
            .for_each(|(i, x)| *x += 0.01 * (i % 3) as f64);
        let su = step_f(&u, &f, 0.0, 0.05).unwrap();
        let sv = step_f(&v, &f, 0.0, 0.05).unwrap();
        assert!(su.values.iter().zip(&sv.values).all(|(a, b)| a <= b));
        assert!(su.sup_norm() <= u.sup_norm());
    }

    proptest! {
        #[test]
        fn lax_friedrichs_is_monotone(
            base in prop::collection::vec(-1.0f64..1.0, 24),
            bump in prop::collection::vec(0.0f64..0.5, 24),
            xi_dot in -5.0f64..5.0,
        ) {
            let g = grid1(24);
            let m = MetricField::conformal(ScalarField::sine(0, 0.3, 3.0), 1).unwrap();
            let op = HamiltonianOperator::new(&m, &g).unwrap();
            let u = GridFunction::new(g.clone(), base.clone(), 0.0).unwrap();
            let v = GridFunction::new(g.clone(), base.iter().zip(&bump).map(|(a, b)| a + b).collect(), 0.0).unwrap();
            let sigma = op.sigma(xi_dot, u.lipschitz().max(v.lipschitz()));
            prop_assume!(sigma > 0.0);
            let dt = op.max_dt(sigma, 1.0);
            let su = op.update(&u.values, xi_dot, sigma, dt);
            let sv = op.update(&v.values, xi_dot, sigma, dt);
            for (a, b) in su.iter().zip(&sv) {
                prop_assert!(a <= &(b + 1e-12));
            }
        }
    }
}
