//! Doubled test functions `Phi^{lambda,gamma}`, the admissible range of
//! `lambda`, and the right-hand sides of the two stability bounds.

use crate::geometry::{hamiltonian, GeometryError, MetricField, Shooter, ShootingOptions};
use crate::signals::{
    delta_gamma_pm, delta_pm, theta, theta_tilde, weighted_gap, Modulus, PathSignal, SignalError,
};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum DoublingError {
    #[error("denominator 1 - lambda * I(t) = {value:e} is not positive at t = {t}")]
    DenominatorVanishing { t: f64, value: f64 },
    #[error("t = {0} is a breakpoint of one of the signals")]
    BreakpointTime(f64),
    #[error("empty lambda window: lower {lower} >= upper {upper}")]
    EmptyWindow { lower: f64, upper: f64 },
    #[error("smallness condition fails: {lhs} >= {rhs}")]
    SmallnessViolated { lhs: f64, rhs: f64 },
    #[error("no admissible gamma on the supplied grid")]
    EmptyGamma,
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Signal(#[from] SignalError),
}

/// `Phi(x, y, t) = lambda e^{gamma t} e_g(x, y) / (1 - lambda int_0^t e^{gamma s}(xi' - zeta') ds)`.
#[derive(Clone, Debug)]
pub struct DoubledTest<'a> {
    shooter: Shooter<'a>,
    xi: &'a PathSignal,
    zeta: &'a PathSignal,
    lambda: f64,
    gamma: f64,
    horizon: f64,
    delta_plus: f64,
    delta_minus: f64,
}

impl<'a> DoubledTest<'a> {
    pub fn new(
        metric: &'a MetricField,
        xi: &'a PathSignal,
        zeta: &'a PathSignal,
        lambda: f64,
        gamma: f64,
    ) -> Result<Self, DoublingError> {
        Self::with_options(metric, xi, zeta, lambda, gamma, ShootingOptions::default())
    }

    pub fn with_options(
        metric: &'a MetricField,
        xi: &'a PathSignal,
        zeta: &'a PathSignal,
        lambda: f64,
        gamma: f64,
        opts: ShootingOptions,
    ) -> Result<Self, DoublingError> {
        if !(lambda > 0.0) {
            return Err(DoublingError::InvalidArgument(format!(
                "lambda must be positive, got {lambda}"
            )));
        }
        if !(gamma >= 0.0) {
            return Err(DoublingError::InvalidArgument(format!(
                "gamma must be nonnegative, got {gamma}"
            )));
        }
        let horizon = xi.horizon().min(zeta.horizon());
        let (delta_plus, delta_minus) = delta_gamma_pm(xi, zeta, gamma, horizon)?;
        if lambda * delta_plus >= 1.0 {
            return Err(DoublingError::DenominatorVanishing {
                t: horizon,
                value: 1.0 - lambda * delta_plus,
            });
        }
        Ok(Self {
            shooter: Shooter::with_options(metric, opts),
            xi,
            zeta,
            lambda,
            gamma,
            horizon,
            delta_plus,
            delta_minus,
        })
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `(Delta^{gamma,+}_T, Delta^{gamma,-}_T)`.
    pub fn deltas(&self) -> (f64, f64) {
        (self.delta_plus, self.delta_minus)
    }

    /// Scalar factor `a(t)` with `Phi = a(t) e_g`.
    pub fn prefactor(&self, t: f64) -> Result<f64, DoublingError> {
        let den = 1.0 - self.lambda * weighted_gap(self.xi, self.zeta, self.gamma, t)?;
        if !(den > 0.0) {
            return Err(DoublingError::DenominatorVanishing { t, value: den });
        }
        Ok(self.lambda * (self.gamma * t).exp() / den)
    }

    pub fn phi_eval(&self, x: &[f64], y: &[f64], t: f64) -> Result<f64, DoublingError> {
        Ok(self.prefactor(t)? * self.shooter.energy(x, y)?)
    }

    /// Worst value of `max(lower - Phi, Phi - upper) / (1 + Phi)` over the
    /// samples, for `lambda e / (1 + lambda Delta^-) <= Phi <= lambda e / (1 - lambda Delta^+)`.
    /// Nonpositive means both inequalities hold.
    pub fn phi_sandwich_check(
        &self,
        samples: &[(Vec<f64>, Vec<f64>, f64)],
    ) -> Result<f64, DoublingError> {
        if self.gamma != 0.0 {
            return Err(DoublingError::InvalidArgument(
                "sandwich bounds need gamma = 0".into(),
            ));
        }
        let mut worst = f64::NEG_INFINITY;
        for (x, y, t) in samples {
            let e = self.shooter.energy(x, y)?;
            let phi = self.prefactor(*t)? * e;
            let lower = self.lambda * e / (1.0 + self.lambda * self.delta_minus);
            let upper = self.lambda * e / (1.0 - self.lambda * self.delta_plus);
            worst = worst.max((lower - phi).max(phi - upper) / (1.0 + phi));
        }
        Ok(worst)
    }

    /// `|w_t - gamma w - (g^{-1}(x) D_x w, D_x w) xi' + (g^{-1}(y) D_y w, D_y w) zeta'|`
    /// for `w = Phi`, with `w_t` from the closed-form derivative of the prefactor.
    pub fn phi_pde_residual(&self, x: &[f64], y: &[f64], t: f64) -> Result<f64, DoublingError> {
        let (xd, zd) = match (self.xi.slope(t), self.zeta.slope(t)) {
            (Some(a), Some(b)) => (a, b),
            _ => return Err(DoublingError::BreakpointTime(t)),
        };
        let a = self.prefactor(t)?;
        let a_t = self.gamma * a + a * a * (xd - zd);
        let (e, gx, gy) = self.shooter.energy_and_grad(x, y)?;
        let metric = self.shooter.metric();
        let w = a * e;
        let w_t = a_t * e;
        let hx = hamiltonian(metric, x, (gx * a).as_slice());
        let hy = hamiltonian(metric, y, (gy * a).as_slice());
        Ok((w_t - self.gamma * w - hx * xd + hy * zd).abs())
    }
}

/// `K = (2 / rho) sup F(0, 0, 0, x, t) + ||u_0|| + ||v_0||`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KConstant {
    pub rho: f64,
    pub f_sup: f64,
    pub u0_norm: f64,
    pub v0_norm: f64,
}

impl KConstant {
    pub fn value(&self) -> f64 {
        2.0 / self.rho * self.f_sup + self.u0_norm + self.v0_norm
    }
}

/// Which reading of the lower end of the `lambda` window is used:
/// `4K / (Upsilon - 4K Delta^-)` or `4K / (Upsilon^2 - 4K Delta^-)`.
/// Only the squared form makes the window nonempty exactly on the `gamma` set
/// `Delta^+ + Delta^- < Upsilon^2 / (4K)`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum LambdaReading {
    Linear,
    #[default]
    Squared,
}

impl LambdaReading {
    pub fn name(&self) -> &'static str {
        match self {
            LambdaReading::Linear => "linear",
            LambdaReading::Squared => "squared",
        }
    }
}

impl std::str::FromStr for LambdaReading {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "linear" => Ok(LambdaReading::Linear),
            "squared" => Ok(LambdaReading::Squared),
            other => Err(format!(
                "unknown lambda reading '{other}' (expected linear or squared)"
            )),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LambdaWindow {
    pub lower: f64,
    pub upper: f64,
    pub reading: LambdaReading,
}

pub fn admissible_lambda_window(
    k: &KConstant,
    xi: &PathSignal,
    zeta: &PathSignal,
    gamma: f64,
    horizon: f64,
    upsilon: f64,
    reading: LambdaReading,
) -> Result<LambdaWindow, DoublingError> {
    let (dp, dm) = delta_gamma_pm(xi, zeta, gamma, horizon)?;
    let upper = if dp > 0.0 { 1.0 / dp } else { f64::INFINITY };
    let kv = k.value();
    let scale = match reading {
        LambdaReading::Linear => upsilon,
        LambdaReading::Squared => upsilon * upsilon,
    };
    let den = scale - 4.0 * kv * dm;
    let lower = if kv == 0.0 {
        0.0
    } else if den > 0.0 {
        4.0 * kv / den
    } else {
        f64::INFINITY
    };
    if lower >= upper {
        return Err(DoublingError::EmptyWindow { lower, upper });
    }
    Ok(LambdaWindow {
        lower,
        upper,
        reading,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct FirstOrderBound {
    pub value: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    /// `Upsilon^2 / (2 (||u_0|| + ||v_0||))`.
    pub smallness_rhs: f64,
    /// Whether the stricter `Upsilon^2 / (4 (||u_0|| + ||v_0||))` also holds.
    pub strict_smallness_holds: bool,
}

/// `sup_gap + theta(omega_u ^ omega_v, 1 / Delta^+)`; moduli are in `d_g`.
#[allow(clippy::too_many_arguments)]
pub fn first_order_bound(
    u0_mod: &Modulus,
    v0_mod: &Modulus,
    sup_gap: f64,
    u0_norm: f64,
    v0_norm: f64,
    xi: &PathSignal,
    zeta: &PathSignal,
    horizon: f64,
    upsilon: f64,
) -> Result<FirstOrderBound, DoublingError> {
    let (dp, dm) = delta_pm(xi, zeta, horizon)?;
    let norms = u0_norm + v0_norm;
    let smallness_rhs = if norms > 0.0 {
        upsilon * upsilon / (2.0 * norms)
    } else {
        f64::INFINITY
    };
    if dp + dm >= smallness_rhs {
        return Err(DoublingError::SmallnessViolated {
            lhs: dp + dm,
            rhs: smallness_rhs,
        });
    }
    let theta_term = if dp > 0.0 {
        theta(&u0_mod.meet(v0_mod), 1.0 / dp)
    } else {
        0.0
    };
    Ok(FirstOrderBound {
        value: sup_gap + theta_term,
        delta_plus: dp,
        delta_minus: dm,
        smallness_rhs,
        strict_smallness_holds: dp + dm < 0.5 * smallness_rhs,
    })
}

/// `{2^k : k = -6..=12}`.
pub fn default_gamma_grid() -> Vec<f64> {
    (-6..=12).map(|k| 2f64.powi(k)).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SecondOrderBound {
    pub value: f64,
    pub gamma: f64,
    pub theta_term: f64,
    pub theta_tilde_term: f64,
    pub modulus_term: f64,
    pub delta_plus: f64,
    pub delta_minus: f64,
    /// Number of grid points in the admissible set.
    pub admissible: usize,
    /// The minimizer sits at an end of the supplied grid.
    pub boundary: bool,
}

/// `sup(u_0 - v_0)_+ + inf_gamma [theta(omega_u ^ omega_v, 1 / Delta^{gamma,+})
///   + theta~(omega_F; gamma) / rho + omega_F(2 (K (Delta^{gamma,+} + Delta^{gamma,-}))^{1/2}) / rho]`
/// over the grid points with `Delta^{gamma,+} + Delta^{gamma,-} < Upsilon^2 / (4K)` and `Delta^{gamma,-} < 1`.
#[allow(clippy::too_many_arguments)]
pub fn second_order_bound(
    k: &KConstant,
    u0_mod: &Modulus,
    v0_mod: &Modulus,
    sup_gap_plus: f64,
    f_mod: &Modulus,
    xi: &PathSignal,
    zeta: &PathSignal,
    horizon: f64,
    upsilon: f64,
    gamma_grid: &[f64],
) -> Result<SecondOrderBound, DoublingError> {
    let kv = k.value();
    let limit = if kv > 0.0 {
        upsilon * upsilon / (4.0 * kv)
    } else {
        f64::INFINITY
    };
    let meet = u0_mod.meet(v0_mod);
    let mut grid: Vec<f64> = gamma_grid.iter().copied().filter(|g| *g > 0.0).collect();
    grid.sort_by(f64::total_cmp);
    let mut best: Option<(usize, SecondOrderBound)> = None;
    let mut admissible = 0;
    for (i, &gamma) in grid.iter().enumerate() {
        let (dp, dm) = delta_gamma_pm(xi, zeta, gamma, horizon)?;
        if !(dp + dm < limit && dm < 1.0) {
            continue;
        }
        admissible += 1;
        let tt = match theta_tilde(f_mod, gamma) {
            Ok(v) => v,
            Err(SignalError::ThetaTildeInfinite { .. }) => continue,
            Err(e) => return Err(e.into()),
        };
        let theta_term = if dp > 0.0 {
            theta(&meet, 1.0 / dp)
        } else {
            0.0
        };
        let theta_tilde_term = tt / k.rho;
        let modulus_term = f_mod.eval(2.0 * (kv * (dp + dm)).sqrt()) / k.rho;
        let total = theta_term + theta_tilde_term + modulus_term;
        if best.as_ref().is_none_or(|(_, b)| total < b.value) {
            best = Some((
                i,
                SecondOrderBound {
                    value: total,
                    gamma,
                    theta_term,
                    theta_tilde_term,
                    modulus_term,
                    delta_plus: dp,
                    delta_minus: dm,
                    admissible: 0,
                    boundary: false,
                },
            ));
        }
    }
    let (i, mut b) = best.ok_or(DoublingError::EmptyGamma)?;
    b.value += sup_gap_plus.max(0.0);
    b.admissible = admissible;
    b.boundary = i == 0 || i + 1 == grid.len();
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::ScalarField;

    fn conformal() -> MetricField {
        MetricField::conformal(ScalarField::sine(0, 0.2, 1.0), 2).unwrap()
    }

    #[test]
    fn phi_at_zero_is_lambda_energy() {
        let m = conformal();
        let xi = PathSignal::zigzag(0.1, 3, 1.0).unwrap();
        let zeta = PathSignal::linear(-0.05, 1.0).unwrap();
        let test = DoubledTest::new(&m, &xi, &zeta, 2.0, 1.0).unwrap();
        let (x, y) = ([0.1, 0.2], [0.5, -0.1]);
        let e = Shooter::new(&m).energy(&x, &y).unwrap();
        assert_eq!(test.phi_eval(&x, &y, 0.0).unwrap(), 2.0 * e);
    }

    #[test]
    fn equal_signals_give_constant_phi() {
        let m = MetricField::identity(2);
        let xi = PathSignal::zigzag(0.3, 2, 1.0).unwrap();
        let test = DoubledTest::new(&m, &xi, &xi, 3.0, 0.0).unwrap();
        let (x, y) = ([0.0, 0.0], [1.0, 1.0]);
        for t in [0.0, 0.3, 0.9] {
            assert_eq!(test.phi_eval(&x, &y, t).unwrap(), 3.0 * 0.5);
            assert_eq!(test.phi_pde_residual(&x, &y, t + 0.01).unwrap(), 0.0);
        }
    }

    #[test]
    fn flat_linear_closed_form() {
        let m = MetricField::identity(1);
        let xi = PathSignal::linear(1.0, 1.0).unwrap();
        let zeta = PathSignal::zero(1.0).unwrap();
        let lambda = 0.5;
        let test = DoubledTest::new(&m, &xi, &zeta, lambda, 0.0).unwrap();
        for t in [0.1, 0.5, 0.9] {
            let phi = test.phi_eval(&[0.2], &[1.0], t).unwrap();
            let expect = lambda * 0.64 / (4.0 * (1.0 - lambda * t));
            assert!((phi - expect).abs() < 1e-15);
            assert!(test.phi_pde_residual(&[0.2], &[1.0], t).unwrap() < 1e-15);
        }
        assert!(matches!(
            DoubledTest::new(&m, &xi, &zeta, 1.0, 0.0),
            Err(DoublingError::DenominatorVanishing { .. })
        ));
    }

    #[test]
    fn time_derivative_matches_finite_differences() {
        let m = conformal();
        let xi = PathSignal::new(vec![0.0, 0.3, 1.0], vec![0.0, 0.2, -0.1]).unwrap();
        let zeta = PathSignal::linear(0.1, 1.0).unwrap();
        let test = DoubledTest::new(&m, &xi, &zeta, 1.5, 1.0).unwrap();
        let t = 0.6;
        let h = 1e-5;
        let fd = (test.prefactor(t + h).unwrap() - test.prefactor(t - h).unwrap()) / (2.0 * h);
        let a = test.prefactor(t).unwrap();
        let exact = a + a * a * (xi.slope(t).unwrap() - zeta.slope(t).unwrap());
        assert!((fd - exact).abs() < 1e-8);
    }

    #[test]
    fn conformal_residual_is_small_and_breakpoint_rejected() {
        let m = conformal();
        let xi = PathSignal::zigzag(0.1, 2, 1.0).unwrap();
        let zeta = PathSignal::zero(1.0).unwrap();
        for gamma in [0.0, 1.0] {
            let test = DoubledTest::new(&m, &xi, &zeta, 2.0, gamma).unwrap();
            let phi = test.phi_eval(&[0.1, 0.2], &[0.6, 0.4], 0.3).unwrap();
            let r = test
                .phi_pde_residual(&[0.1, 0.2], &[0.6, 0.4], 0.3)
                .unwrap();
            assert!(r <= 1e-6 * (1.0 + phi), "{r}");
            assert_eq!(
                test.phi_pde_residual(&[0.1, 0.2], &[0.6, 0.4], 0.25),
                Err(DoublingError::BreakpointTime(0.25))
            );
        }
    }

    #[test]
    fn residual_shrinks_with_tighter_geometry() {
        let m = MetricField::conformal(ScalarField::sine(0, 0.4, 1.5), 2).unwrap();
        // The x-side eikonal term cancels by construction (e = H(x, p_0)), so
        // the residual is driven by the zeta-weighted y-side term.
        let xi = PathSignal::linear(0.5, 1.0).unwrap();
        let zeta = PathSignal::linear(-0.4, 1.0).unwrap();
        let probes = [([0.0, 0.0], [0.9, 0.5]), ([0.4, -0.3], [-0.4, 0.6])];
        let mut prev = f64::INFINITY;
        for (steps, tol) in [(64, 1e-6), (128, 1e-8), (256, 1e-10)] {
            let opts = ShootingOptions {
                steps,
                newton_tol_scale: tol,
                ..Default::default()
            };
            let test = DoubledTest::with_options(&m, &xi, &zeta, 1.0, 0.0, opts);
            let Ok(test) = test else { continue };
            let r = probes
                .iter()
                .map(|(x, y)| test.phi_pde_residual(x, y, 0.4).unwrap_or(f64::INFINITY))
                .fold(0.0, f64::max);
            assert!(r < prev, "{r} !< {prev}");
            prev = r;
        }
        assert!(prev < 1e-8);
    }

    #[test]
    fn sandwich_examples() {
        let m = MetricField::identity(2);
        let xi = PathSignal::linear(1.0, 1.0).unwrap();
        let zeta = PathSignal::zero(1.0).unwrap();
        let test = DoubledTest::new(&m, &xi, &zeta, 0.5, 0.0).unwrap();
        let samples: Vec<_> = (0..=10)
            .map(|k| (vec![0.0, 0.1], vec![0.7, -0.3], k as f64 / 10.0))
            .collect();
        assert!(test.phi_sandwich_check(&samples).unwrap() <= 0.0);
        let same = DoubledTest::new(&m, &xi, &xi, 0.5, 0.0).unwrap();
        assert_eq!(same.phi_sandwich_check(&samples).unwrap(), 0.0);
        let g = DoubledTest::new(&m, &xi, &zeta, 0.5, 1.0).unwrap();
        assert!(g.phi_sandwich_check(&samples).is_err());
    }

    #[test]
    fn lambda_window_examples() {
        let xi = PathSignal::linear(1.0, 1.0).unwrap();
        let zeta = PathSignal::zero(1.0).unwrap();
        let k = KConstant {
            rho: 1.0,
            f_sup: 0.0,
            u0_norm: 0.0,
            v0_norm: 0.0,
        };
        let w = admissible_lambda_window(&k, &xi, &zeta, 0.0, 1.0, 1.0, LambdaReading::Squared)
            .unwrap();
        assert_eq!(w.upper, 1.0);
        let w =
            admissible_lambda_window(&k, &xi, &xi, 0.0, 1.0, 1.0, LambdaReading::Squared).unwrap();
        assert_eq!(w.upper, f64::INFINITY);
        // 4 K Delta^- >= Upsilon with Upsilon < 1 empties both readings.
        let big = KConstant {
            rho: 1.0,
            f_sup: 0.0,
            u0_norm: 1.0,
            v0_norm: 1.0,
        };
        let upsilon = 0.5;
        for reading in [LambdaReading::Linear, LambdaReading::Squared] {
            let r = admissible_lambda_window(&big, &zeta, &xi, 0.0, 1.0, upsilon, reading);
            assert!(matches!(r, Err(DoublingError::EmptyWindow { .. })));
        }
    }

    #[test]
    fn squared_window_is_nonempty_exactly_on_gamma_set() {
        let xi = PathSignal::zigzag(0.05, 4, 1.0).unwrap();
        let zeta = PathSignal::linear(-0.02, 1.0).unwrap();
        let k = KConstant {
            rho: 1.0,
            f_sup: 0.1,
            u0_norm: 0.5,
            v0_norm: 0.5,
        };
        for upsilon in [0.2, 0.4, 0.6, 0.8, 1.0, 1.5] {
            let (dp, dm) = delta_pm(&xi, &zeta, 1.0).unwrap();
            let in_gamma = dp + dm < upsilon * upsilon / (4.0 * k.value());
            let w =
                admissible_lambda_window(&k, &xi, &zeta, 0.0, 1.0, upsilon, LambdaReading::Squared);
            assert_eq!(in_gamma, w.is_ok(), "upsilon {upsilon}");
        }
    }

    #[test]
    fn first_order_bound_examples() {
        let z = PathSignal::zero(1.0).unwrap();
        let w = Modulus::lipschitz(1.0).unwrap();
        let b = first_order_bound(&w, &w, 0.0, 1.0, 1.0, &z, &z, 1.0, 1.0).unwrap();
        assert_eq!(b.value, 0.0);
        let eps = 0.05;
        let xi = PathSignal::zigzag(eps, 8, 1.0).unwrap();
        let b = first_order_bound(&w, &w, 0.0, 1.0, 1.0, &xi, &z, 1.0, 1.0).unwrap();
        assert!((b.value - eps / 2.0).abs() < 1e-15);
        let b = first_order_bound(&w, &w, 0.1, 1.0, 1.0, &z, &z, 1.0, 1.0).unwrap();
        assert_eq!(b.value, 0.1);
        let r = first_order_bound(&w, &w, 0.0, 1.0, 1.0, &xi, &z, 1.0, 0.1);
        assert!(matches!(r, Err(DoublingError::SmallnessViolated { .. })));
    }

    #[test]
    fn first_order_bound_monotone_in_gap() {
        let z = PathSignal::zero(1.0).unwrap();
        let w = Modulus::new(1.0, 0.5).unwrap();
        let mut prev = f64::INFINITY;
        for eps in [0.4f64, 0.2, 0.1, 0.05, 0.0] {
            let xi = if eps == 0.0 {
                z.clone()
            } else {
                PathSignal::zigzag(eps, 2, 1.0).unwrap()
            };
            let b = first_order_bound(&w, &w, 0.2, 0.5, 0.5, &xi, &z, 1.0, 2.0).unwrap();
            assert!(b.value <= prev);
            prev = b.value;
        }
        assert_eq!(prev, 0.2);
    }

    #[test]
    fn second_order_bound_examples() {
        let z = PathSignal::zero(1.0).unwrap();
        let k = KConstant {
            rho: 1.0,
            f_sup: 0.0,
            u0_norm: 0.5,
            v0_norm: 0.5,
        };
        let w = Modulus::new(1.0, 1.0).unwrap();
        let grid = default_gamma_grid();
        let b = second_order_bound(&k, &w, &w, 0.0, &w, &z, &z, 1.0, 1.0, &grid).unwrap();
        // Only theta~ survives and it vanishes once gamma >= 2L.
        assert_eq!(b.value, 0.0);
        assert_eq!(b.theta_tilde_term, 0.0);
        let xi = PathSignal::zigzag(0.05, 8, 1.0).unwrap();
        assert!(matches!(
            second_order_bound(&k, &w, &w, 0.0, &w, &xi, &z, 1.0, 1e-3, &grid),
            Err(DoublingError::EmptyGamma)
        ));
    }

    #[test]
    fn second_order_plug_in_arithmetic() {
        // Signals with Delta^{1,+} = Delta^{1,-} = 0.01 at gamma = 1:
        // xi rises then falls with int_0^t e^s xi' ds peaking at 0.01 and ending at -0.01.
        let a = (1.0f64 + 0.01).ln();
        let b = (1.0f64 + 0.03).ln();
        let s1 = 0.01 / (a.exp() - 1.0);
        let s2 = -0.02 / (b.exp() - a.exp());
        let xi =
            PathSignal::new(vec![0.0, a, b], vec![0.0, s1 * a, s1 * a + s2 * (b - a)]).unwrap();
        let z = PathSignal::zero(b).unwrap();
        let (dp, dm) = delta_gamma_pm(&xi, &z, 1.0, b).unwrap();
        assert!((dp - 0.01).abs() < 1e-14 && (dm - 0.01).abs() < 1e-14);
        let k = KConstant {
            rho: 1.0,
            f_sup: 0.0,
            u0_norm: 0.5,
            v0_norm: 0.5,
        };
        let w = Modulus::new(1.0, 1.0).unwrap();
        let r = second_order_bound(&k, &w, &w, 0.0, &w, &xi, &z, b, 1.0, &[1.0]).unwrap();
        // theta(min(r,1), 100) = 1/200; theta~(.,1) = 1/2; omega(2 sqrt(0.02)) = 2 sqrt(0.02).
        let expect = 0.005 + 0.5 + 2.0 * 0.02f64.sqrt();
        assert!((r.value - expect).abs() < 1e-12);
        assert!(r.boundary);
    }
}
