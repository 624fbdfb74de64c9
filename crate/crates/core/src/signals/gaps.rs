use super::path::PathSignal;
use super::SignalError;

fn check_horizon(xi: &PathSignal, zeta: &PathSignal, horizon: f64) -> Result<(), SignalError> {
    let available = xi.horizon().min(zeta.horizon());
    if !(horizon >= 0.0) || horizon > available * (1.0 + 1e-12) {
        return Err(SignalError::HorizonMismatch {
            requested: horizon,
            available,
        });
    }
    Ok(())
}

/// `(max_{s<=T} (xi_s - zeta_s), max_{s<=T} (zeta_s - xi_s))`.
pub fn delta_pm(
    xi: &PathSignal,
    zeta: &PathSignal,
    horizon: f64,
) -> Result<(f64, f64), SignalError> {
    check_horizon(xi, zeta, horizon)?;
    let mut plus: f64 = 0.0;
    let mut minus: f64 = 0.0;
    for t in xi.merged_breakpoints(zeta, horizon) {
        let d = xi.eval(t) - zeta.eval(t);
        plus = plus.max(d);
        minus = minus.max(-d);
    }
    Ok((plus, minus))
}

/// `sup_{s<=T} |xi_s - zeta_s|`.
pub fn sup_distance(xi: &PathSignal, zeta: &PathSignal, horizon: f64) -> Result<f64, SignalError> {
    let (p, m) = delta_pm(xi, zeta, horizon)?;
    Ok(p.max(m))
}

fn segment_integral(d: f64, gamma: f64, a: f64, b: f64) -> f64 {
    if gamma == 0.0 {
        d * (b - a)
    } else {
        d * (gamma * a).exp() * (gamma * (b - a)).exp_m1() / gamma
    }
}

/// `int_0^t e^{gamma s} (xi'_s - zeta'_s) ds`, exact on each linear piece.
pub fn weighted_gap(
    xi: &PathSignal,
    zeta: &PathSignal,
    gamma: f64,
    t: f64,
) -> Result<f64, SignalError> {
    check_horizon(xi, zeta, t)?;
    if gamma == 0.0 {
        return Ok(xi.eval(t) - zeta.eval(t));
    }
    let ts = xi.merged_breakpoints(zeta, t);
    let mut acc = 0.0;
    for w in ts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let d =
            xi.segment_slope(xi.segment_index(mid)) - zeta.segment_slope(zeta.segment_index(mid));
        acc += segment_integral(d, gamma, w[0], w[1]);
    }
    Ok(acc)
}

/// Weighted gaps `(sup_t I_gamma(t), sup_t -I_gamma(t))` with
/// `I_gamma(t) = int_0^t e^{gamma s} (xi' - zeta') ds`.
///
/// On each merged segment the integrand has constant sign, so the extrema are
/// attained at breakpoints. `gamma = 0` reduces to [`delta_pm`].
pub fn delta_gamma_pm(
    xi: &PathSignal,
    zeta: &PathSignal,
    gamma: f64,
    horizon: f64,
) -> Result<(f64, f64), SignalError> {
    if gamma == 0.0 {
        return delta_pm(xi, zeta, horizon);
    }
    check_horizon(xi, zeta, horizon)?;
    let ts = xi.merged_breakpoints(zeta, horizon);
    let mut acc = 0.0;
    let mut plus: f64 = 0.0;
    let mut minus: f64 = 0.0;
    for w in ts.windows(2) {
        let mid = 0.5 * (w[0] + w[1]);
        let d =
            xi.segment_slope(xi.segment_index(mid)) - zeta.segment_slope(zeta.segment_index(mid));
        acc += segment_integral(d, gamma, w[0], w[1]);
        plus = plus.max(acc);
        minus = minus.max(-acc);
    }
    Ok((plus, minus))
}
