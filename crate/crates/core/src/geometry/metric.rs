//! Parametric Riemannian metrics on R^N with closed-form derivatives.
//!
//! Every family is either constant or diagonal with entries of the form
//! `exp(2 phi_i(x))`, where each `phi_i` is a sum of univariate terms. This
//! keeps `g`, `g^{-1}` and their first two derivatives analytic, which is all
//! the geodesic shooting and the Christoffel symbols need.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::GeometryError;

/// One univariate contribution to a scalar field, acting on a single axis.
#[derive(Clone, Debug, PartialEq)]
pub enum Term {
    Constant(f64),
    /// `sum_j coeffs[j] * x_axis^j`
    Polynomial {
        axis: usize,
        coeffs: Vec<f64>,
    },
    /// `amplitude * sin(frequency * x_axis + phase)`
    Sine {
        axis: usize,
        amplitude: f64,
        frequency: f64,
        phase: f64,
    },
}

impl Term {
    fn axis(&self) -> Option<usize> {
        match self {
            Term::Constant(_) => None,
            Term::Polynomial { axis, .. } | Term::Sine { axis, .. } => Some(*axis),
        }
    }

    /// Value and first two derivatives with respect to the term's own axis.
    fn jet(&self, x: &[f64]) -> (f64, f64, f64) {
        match self {
            Term::Constant(c) => (*c, 0.0, 0.0),
            Term::Polynomial { axis, coeffs } => {
                let t = x[*axis];
                let (mut v, mut d1, mut d2) = (0.0, 0.0, 0.0);
                for &c in coeffs.iter().rev() {
                    d2 = d2 * t + 2.0 * d1;
                    d1 = d1 * t + v;
                    v = v * t + c;
                }
                (v, d1, d2)
            }
            Term::Sine {
                axis,
                amplitude,
                frequency,
                phase,
            } => {
                let arg = frequency * x[*axis] + phase;
                let (s, c) = arg.sin_cos();
                (
                    amplitude * s,
                    amplitude * frequency * c,
                    -amplitude * frequency * frequency * s,
                )
            }
        }
    }

    /// Upper bounds on (|f|, |f'|, |f''|) over |x_axis| <= radius.
    fn bounds(&self, radius: f64) -> (f64, f64, f64) {
        match self {
            Term::Constant(c) => (c.abs(), 0.0, 0.0),
            Term::Polynomial { coeffs, .. } => {
                let mut b = [0.0f64; 3];
                for (k, bk) in b.iter_mut().enumerate() {
                    for (j, &c) in coeffs.iter().enumerate().skip(k) {
                        let falling: f64 = (0..k).map(|i| (j - i) as f64).product();
                        *bk += c.abs() * falling * radius.powi((j - k) as i32);
                    }
                }
                (b[0], b[1], b[2])
            }
            Term::Sine {
                amplitude,
                frequency,
                ..
            } => {
                let a = amplitude.abs();
                let w = frequency.abs();
                (a, a * w, a * w * w)
            }
        }
    }
}

/// A smooth scalar field `phi: R^N -> R` built from univariate terms.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct ScalarField {
    pub terms: Vec<Term>,
}

impl ScalarField {
    pub fn new(terms: Vec<Term>) -> Self {
        Self { terms }
    }

    pub fn sine(axis: usize, amplitude: f64, frequency: f64) -> Self {
        Self::new(vec![Term::Sine {
            axis,
            amplitude,
            frequency,
            phase: 0.0,
        }])
    }

    pub fn linear(axis: usize, slope: f64) -> Self {
        Self::new(vec![Term::Polynomial {
            axis,
            coeffs: vec![0.0, slope],
        }])
    }

    fn max_axis(&self) -> Option<usize> {
        self.terms.iter().filter_map(Term::axis).max()
    }

    pub fn value(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|t| t.jet(x).0).sum()
    }

    /// Value, gradient and Hessian. The Hessian is diagonal because every
    /// term depends on a single coordinate.
    pub fn jet(&self, x: &[f64]) -> (f64, DVector<f64>, DVector<f64>) {
        let n = x.len();
        let mut v = 0.0;
        let mut grad = DVector::zeros(n);
        let mut hess_diag = DVector::zeros(n);
        for t in &self.terms {
            let (f, d1, d2) = t.jet(x);
            v += f;
            if let Some(a) = t.axis() {
                grad[a] += d1;
                hess_diag[a] += d2;
            }
        }
        (v, grad, hess_diag)
    }

    /// Bounds on (sup|phi|, sup|D phi|, sup|D^2 phi|) over the cube of the
    /// given radius, via the triangle inequality over terms.
    pub fn bounds(&self, radius: f64) -> (f64, f64, f64) {
        self.terms.iter().fold((0.0, 0.0, 0.0), |acc, t| {
            let b = t.bounds(radius);
            (acc.0 + b.0, acc.1 + b.1, acc.2 + b.2)
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum MetricFamily {
    Identity,
    /// Constant symmetric positive definite matrix.
    Constant(DMatrix<f64>),
    /// `g = exp(2 phi) I`.
    Conformal(ScalarField),
    /// `g = diag(exp(2 phi_1), ..., exp(2 phi_N))`.
    Diagonal(Vec<ScalarField>),
}

impl MetricFamily {
    pub fn tag(&self) -> &'static str {
        match self {
            MetricFamily::Identity => "identity",
            MetricFamily::Constant(_) => "constant",
            MetricFamily::Conformal(_) => "conformal",
            MetricFamily::Diagonal(_) => "diagonal",
        }
    }
}

/// Operator-norm bounds on `g`, `g^{-1}` and their first two derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MetricBounds {
    pub g0: f64,
    pub g1: f64,
    pub g2: f64,
    pub ginv0: f64,
    pub ginv1: f64,
    pub ginv2: f64,
}

/// `g^{-1}` at a point with its first and (optionally) second derivatives.
#[derive(Clone, Debug)]
pub struct InverseJet {
    pub ginv: DMatrix<f64>,
    /// `d[k] = d/dx_k g^{-1}`
    pub d: Vec<DMatrix<f64>>,
    /// `dd[k * N + l] = d^2/(dx_k dx_l) g^{-1}`; empty unless requested.
    pub dd: Vec<DMatrix<f64>>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricField {
    family: MetricFamily,
    dim: usize,
    ellipticity_c: f64,
    c2_bound: f64,
    bounds: MetricBounds,
    domain_radius: f64,
}

/// Radius used for polynomial derivative bounds unless told otherwise.
pub const DEFAULT_DOMAIN_RADIUS: f64 = 2.0 * std::f64::consts::PI;

impl MetricField {
    pub fn new(family: MetricFamily, dim: usize) -> Result<Self, GeometryError> {
        Self::with_domain_radius(family, dim, DEFAULT_DOMAIN_RADIUS)
    }

    pub fn with_domain_radius(
        family: MetricFamily,
        dim: usize,
        domain_radius: f64,
    ) -> Result<Self, GeometryError> {
        if dim == 0 {
            return Err(GeometryError::InvalidMetric(
                "dimension must be positive".into(),
            ));
        }
        let check_axes = |f: &ScalarField| -> Result<(), GeometryError> {
            match f.max_axis() {
                Some(a) if a >= dim => Err(GeometryError::InvalidMetric(format!(
                    "term acts on axis {a} but dimension is {dim}"
                ))),
                _ => Ok(()),
            }
        };
        let (c_sq, bounds) = match &family {
            MetricFamily::Identity => (
                1.0,
                MetricBounds {
                    g0: 1.0,
                    g1: 0.0,
                    g2: 0.0,
                    ginv0: 1.0,
                    ginv1: 0.0,
                    ginv2: 0.0,
                },
            ),
            MetricFamily::Constant(a) => {
                if a.nrows() != dim || a.ncols() != dim {
                    return Err(GeometryError::InvalidMetric(format!(
                        "constant metric is {}x{}, expected {dim}x{dim}",
                        a.nrows(),
                        a.ncols()
                    )));
                }
                if (a - a.transpose()).amax() > 1e-12 * (1.0 + a.amax()) {
                    return Err(GeometryError::InvalidMetric(
                        "constant metric is not symmetric".into(),
                    ));
                }
                let eig = SymmetricEigen::new(a.clone());
                let lo = eig.eigenvalues.min();
                let hi = eig.eigenvalues.max();
                if lo <= 0.0 {
                    return Err(GeometryError::InvalidMetric(
                        "constant metric is not positive definite".into(),
                    ));
                }
                (
                    hi.max(1.0 / lo),
                    MetricBounds {
                        g0: hi,
                        g1: 0.0,
                        g2: 0.0,
                        ginv0: 1.0 / lo,
                        ginv1: 0.0,
                        ginv2: 0.0,
                    },
                )
            }
            MetricFamily::Conformal(phi) => {
                check_axes(phi)?;
                exp_family_bounds(std::slice::from_ref(phi), domain_radius)
            }
            MetricFamily::Diagonal(phis) => {
                if phis.len() != dim {
                    return Err(GeometryError::InvalidMetric(format!(
                        "diagonal metric has {} entries, expected {dim}",
                        phis.len()
                    )));
                }
                for p in phis {
                    check_axes(p)?;
                }
                exp_family_bounds(phis, domain_radius)
            }
        };
        let c2_bound =
            1.0 + bounds.g0 + bounds.g1 + bounds.g2 + bounds.ginv0 + bounds.ginv1 + bounds.ginv2;
        Ok(Self {
            family,
            dim,
            ellipticity_c: c_sq.sqrt(),
            c2_bound,
            bounds,
            domain_radius,
        })
    }

    pub fn identity(dim: usize) -> Self {
        Self::new(MetricFamily::Identity, dim).expect("identity metric is always valid")
    }

    pub fn constant(a: DMatrix<f64>) -> Result<Self, GeometryError> {
        let n = a.nrows();
        Self::new(MetricFamily::Constant(a), n)
    }

    pub fn conformal(phi: ScalarField, dim: usize) -> Result<Self, GeometryError> {
        Self::new(MetricFamily::Conformal(phi), dim)
    }

    pub fn diagonal(phis: Vec<ScalarField>) -> Result<Self, GeometryError> {
        let n = phis.len();
        Self::new(MetricFamily::Diagonal(phis), n)
    }

    pub fn family(&self) -> &MetricFamily {
        &self.family
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// The constant `c` with `|w|^2 / c^2 <= (g w, w) <= c^2 |w|^2`.
    pub fn ellipticity_c(&self) -> f64 {
        self.ellipticity_c
    }

    /// `1 + ||g||_{C^2} + ||g^{-1}||_{C^2}`.
    pub fn c2_bound(&self) -> f64 {
        self.c2_bound
    }

    pub fn bounds(&self) -> MetricBounds {
        self.bounds
    }

    pub fn domain_radius(&self) -> f64 {
        self.domain_radius
    }

    /// True when `g` does not depend on `x`.
    pub fn is_constant(&self) -> bool {
        matches!(
            self.family,
            MetricFamily::Identity | MetricFamily::Constant(_)
        )
    }

    /// Diagonal exponents `phi_i(x)` for the exponential families.
    fn exponents(&self, x: &[f64]) -> Vec<(f64, DVector<f64>, DVector<f64>)> {
        match &self.family {
            MetricFamily::Conformal(phi) => {
                let j = phi.jet(x);
                vec![j; self.dim]
            }
            MetricFamily::Diagonal(phis) => phis.iter().map(|p| p.jet(x)).collect(),
            _ => unreachable!("exponents only exist for exponential families"),
        }
    }

    pub fn g(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.family {
            MetricFamily::Identity => DMatrix::identity(self.dim, self.dim),
            MetricFamily::Constant(a) => a.clone(),
            MetricFamily::Conformal(phi) => {
                DMatrix::identity(self.dim, self.dim) * (2.0 * phi.value(x)).exp()
            }
            MetricFamily::Diagonal(phis) => DMatrix::from_diagonal(&DVector::from_iterator(
                self.dim,
                phis.iter().map(|p| (2.0 * p.value(x)).exp()),
            )),
        }
    }

    pub fn g_inv(&self, x: &[f64]) -> DMatrix<f64> {
        match &self.family {
            MetricFamily::Identity => DMatrix::identity(self.dim, self.dim),
            MetricFamily::Constant(a) => a
                .clone()
                .try_inverse()
                .expect("positive definite matrix is invertible"),
            MetricFamily::Conformal(phi) => {
                DMatrix::identity(self.dim, self.dim) * (-2.0 * phi.value(x)).exp()
            }
            MetricFamily::Diagonal(phis) => DMatrix::from_diagonal(&DVector::from_iterator(
                self.dim,
                phis.iter().map(|p| (-2.0 * p.value(x)).exp()),
            )),
        }
    }

    /// `dg[k] = d/dx_k g(x)`.
    pub fn dg(&self, x: &[f64]) -> Vec<DMatrix<f64>> {
        let n = self.dim;
        if self.is_constant() {
            return vec![DMatrix::zeros(n, n); n];
        }
        let ex = self.exponents(x);
        (0..n)
            .map(|k| {
                DMatrix::from_diagonal(&DVector::from_iterator(
                    n,
                    ex.iter().map(|(v, gr, _)| 2.0 * gr[k] * (2.0 * v).exp()),
                ))
            })
            .collect()
    }

    /// `g^{-1}` and its derivatives; second derivatives only when asked for.
    pub fn inverse_jet(&self, x: &[f64], second: bool) -> InverseJet {
        let n = self.dim;
        if self.is_constant() {
            return InverseJet {
                ginv: self.g_inv(x),
                d: vec![DMatrix::zeros(n, n); n],
                dd: if second {
                    vec![DMatrix::zeros(n, n); n * n]
                } else {
                    Vec::new()
                },
            };
        }
        let ex = self.exponents(x);
        let s: Vec<f64> = ex.iter().map(|(v, _, _)| (-2.0 * v).exp()).collect();
        let ginv = DMatrix::from_diagonal(&DVector::from_vec(s.clone()));
        let d = (0..n)
            .map(|k| {
                DMatrix::from_diagonal(&DVector::from_iterator(
                    n,
                    ex.iter().zip(&s).map(|((_, gr, _), si)| -2.0 * gr[k] * si),
                ))
            })
            .collect();
        let mut dd = Vec::new();
        if second {
            dd.reserve(n * n);
            for k in 0..n {
                for l in 0..n {
                    dd.push(DMatrix::from_diagonal(&DVector::from_iterator(
                        n,
                        ex.iter().zip(&s).map(|((_, gr, hd), si)| {
                            let hkl = if k == l { hd[k] } else { 0.0 };
                            (4.0 * gr[k] * gr[l] - 2.0 * hkl) * si
                        }),
                    )));
                }
            }
        }
        InverseJet { ginv, d, dd }
    }
}

fn exp_family_bounds(phis: &[ScalarField], radius: f64) -> (f64, MetricBounds) {
    let mut c_sq: f64 = 1.0;
    let mut b = MetricBounds {
        g0: 0.0,
        g1: 0.0,
        g2: 0.0,
        ginv0: 0.0,
        ginv1: 0.0,
        ginv2: 0.0,
    };
    for phi in phis {
        let (p0, p1, p2) = phi.bounds(radius);
        let e = (2.0 * p0).exp();
        c_sq = c_sq.max(e);
        // exp(+-2 phi) share the same derivative bounds.
        let d1 = 2.0 * p1 * e;
        let d2 = (4.0 * p1 * p1 + 2.0 * p2) * e;
        b.g0 = b.g0.max(e);
        b.g1 = b.g1.max(d1);
        b.g2 = b.g2.max(d2);
        b.ginv0 = b.ginv0.max(e);
        b.ginv1 = b.ginv1.max(d1);
        b.ginv2 = b.ginv2.max(d2);
    }
    (c_sq, b)
}

/// The quadratic Hamiltonian `(g^{-1}(x) p, p)`.
pub fn hamiltonian(metric: &MetricField, x: &[f64], p: &[f64]) -> f64 {
    let ginv = metric.g_inv(x);
    let p = DVector::from_column_slice(p);
    (&ginv * &p).dot(&p)
}

/// Christoffel-type symbols `Gamma[k][i][j] = g^{kl} (d_i g_{lj} + d_j g_{li} - d_l g_{ij})`.
///
/// Note the normalization: there is no factor 1/2, so these are twice the
/// Levi-Civita symbols and geodesics satisfy `x'' + (1/2) Gamma(x', x') = 0`.
pub fn christoffel(metric: &MetricField, x: &[f64]) -> Vec<Vec<Vec<f64>>> {
    let n = metric.dim();
    let ginv = metric.g_inv(x);
    let dg = metric.dg(x);
    let mut out = vec![vec![vec![0.0; n]; n]; n];
    for (k, gk) in out.iter_mut().enumerate() {
        for i in 0..n {
            for j in 0..n {
                gk[i][j] = (0..n)
                    .map(|l| ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]))
                    .sum();
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn conformal_sine() -> MetricField {
        MetricField::conformal(ScalarField::sine(0, 0.2, 1.0), 2).unwrap()
    }

    #[test]
    fn polynomial_jet_matches_direct_evaluation() {
        let t = Term::Polynomial {
            axis: 0,
            coeffs: vec![1.0, -2.0, 0.5, 3.0],
        };
        let x = [0.7];
        let (v, d1, d2) = t.jet(&x);
        let s = 0.7f64;
        assert_relative_eq!(
            v,
            1.0 - 2.0 * s + 0.5 * s * s + 3.0 * s.powi(3),
            epsilon = 1e-14
        );
        assert_relative_eq!(d1, -2.0 + s + 9.0 * s * s, epsilon = 1e-14);
        assert_relative_eq!(d2, 1.0 + 18.0 * s, epsilon = 1e-14);
    }

    #[test]
    fn ellipticity_holds_on_samples() {
        let m = MetricField::diagonal(vec![
            ScalarField::sine(0, 0.3, 2.0),
            ScalarField::sine(1, -0.1, 1.0),
        ])
        .unwrap();
        let c2 = m.ellipticity_c().powi(2);
        for i in 0..50 {
            let x = [0.37 * i as f64, -0.21 * i as f64];
            let g = m.g(&x);
            let w = DVector::from_vec(vec![(i as f64).cos(), (i as f64 * 0.5).sin()]);
            let q = (&g * &w).dot(&w);
            let w2 = w.norm_squared();
            assert!(q >= w2 / c2 - 1e-14 && q <= c2 * w2 + 1e-14);
            let prod = &g * m.g_inv(&x);
            assert!((prod - DMatrix::<f64>::identity(2, 2)).amax() <= 1e-12);
        }
    }

    #[test]
    fn constant_metric_rejects_indefinite() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(MetricField::constant(a).is_err());
    }

    #[test]
    fn axis_out_of_range_rejected() {
        assert!(MetricField::conformal(ScalarField::sine(2, 0.1, 1.0), 2).is_err());
    }

    #[test]
    fn hamiltonian_examples() {
        let id = MetricField::identity(2);
        assert_eq!(hamiltonian(&id, &[0.3, 0.1], &[1.0, 0.0]), 1.0);
        assert_eq!(hamiltonian(&id, &[0.3, 0.1], &[0.0, 0.0]), 0.0);
        let m = MetricField::constant(DMatrix::from_element(1, 1, 4.0)).unwrap();
        assert_eq!(hamiltonian(&m, &[0.0], &[2.0]), 1.0);
    }

    #[test]
    fn inverse_jet_matches_finite_differences() {
        let m = conformal_sine();
        let x = [0.4, -1.1];
        let h = 1e-5;
        let jet = m.inverse_jet(&x, true);
        for k in 0..2 {
            let mut xp = x;
            let mut xm = x;
            xp[k] += h;
            xm[k] -= h;
            let fd = (m.g_inv(&xp) - m.g_inv(&xm)) / (2.0 * h);
            assert!((fd - &jet.d[k]).amax() < 1e-9);
            let jp = m.inverse_jet(&xp, false);
            let jm = m.inverse_jet(&xm, false);
            for l in 0..2 {
                let fd2 = (&jp.d[l] - &jm.d[l]) / (2.0 * h);
                assert!((fd2 - &jet.dd[k * 2 + l]).amax() < 1e-8);
            }
        }
    }

    #[test]
    fn christoffel_vanishes_for_constant_metrics() {
        let a = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        for m in [MetricField::identity(2), MetricField::constant(a).unwrap()] {
            let gam = christoffel(&m, &[0.3, -0.8]);
            assert!(gam.iter().flatten().flatten().all(|v| *v == 0.0));
        }
    }

    #[test]
    fn christoffel_matches_finite_difference_oracle() {
        // g = exp(2 x_1) I in two dimensions.
        let m = MetricField::conformal(ScalarField::linear(0, 1.0), 2).unwrap();
        let x = [0.3, 0.2];
        let h = 1e-5;
        let n = 2;
        // Oracle: differentiate the metric entries numerically.
        let dg: Vec<DMatrix<f64>> = (0..n)
            .map(|k| {
                let mut xp = x;
                let mut xm = x;
                xp[k] += h;
                xm[k] -= h;
                (m.g(&xp) - m.g(&xm)) / (2.0 * h)
            })
            .collect();
        let ginv = m.g_inv(&x);
        let gam = christoffel(&m, &x);
        let mut nonzero = 0;
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let oracle: f64 = (0..n)
                        .map(|l| ginv[(k, l)] * (dg[i][(l, j)] + dg[j][(l, i)] - dg[l][(i, j)]))
                        .sum();
                    assert!((gam[k][i][j] - oracle).abs() < 1e-6);
                    assert_eq!(gam[k][i][j], gam[k][j][i]);
                    if oracle.abs() > 1e-3 {
                        nonzero += 1;
                    }
                }
            }
        }
        assert!(nonzero > 0);
    }

    #[test]
    fn c2_bound_dominates_sampled_norms() {
        let m = conformal_sine();
        let b = m.bounds();
        for i in 0..40 {
            let x = [0.17 * i as f64, 0.0];
            assert!(m.g(&x).amax() <= b.g0 + 1e-12);
            for d in m.dg(&x) {
                assert!(d.amax() <= b.g1 + 1e-12);
            }
        }
        assert!(m.c2_bound() > 1.0);
    }
}
