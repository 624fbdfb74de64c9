//! Sampled check of the structure condition on `F` across the doubled
//! variables, with `(X, Y)` built from the Hessian of `e_g = d_g^2`.

use nalgebra::DMatrix;

use crate::geometry::{MetricField, Shooter, ShootingOptions};
use crate::signals::Modulus;

use super::fspec::{FKind, FSpec};
use super::SolverError;

#[derive(Clone, Debug, PartialEq)]
pub struct IsaacsOptions {
    pub alpha: f64,
    pub eps: f64,
    /// Bound `R` on `|r|`; the check uses `r in {-R, 0, R}`.
    pub r_bound: f64,
    /// Only pairs with `d_g < upsilon` are used.
    pub upsilon: f64,
    pub shooting: ShootingOptions,
}

impl Default for IsaacsOptions {
    fn default() -> Self {
        Self {
            alpha: 10.0,
            eps: 0.1,
            r_bound: 1.0,
            upsilon: f64::INFINITY,
            shooting: ShootingOptions::default(),
        }
    }
}

/// Worst value of `F(X, p, r, x) - F(Y, q, r, y)` for one pair over all
/// admissible `(X, Y, r)` tried.
#[derive(Clone, Debug, PartialEq)]
pub struct IsaacsRecord {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub distance: f64,
    /// `alpha d^2 + d + eps`.
    pub argument: f64,
    pub value: f64,
    pub candidates: usize,
}

#[derive(Clone, Debug)]
pub struct IsaacsCheck {
    pub records: Vec<IsaacsRecord>,
    /// Smallest capped-linear `omega` dominating all records.
    pub fitted: Modulus,
    pub max_value: f64,
    /// Pairs discarded because `d_g >= upsilon`.
    pub skipped: usize,
}

impl IsaacsCheck {
    /// `max(value - omega(argument))` over the records; `-inf` when empty.
    pub fn excess_against(&self, omega: &Modulus) -> f64 {
        self.records
            .iter()
            .map(|r| r.value - omega.eval(r.argument))
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub const CSV_HEADER: &'static str = "x,y,distance,argument,value,candidates";

    pub fn to_csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        let join = |v: &[f64]| {
            v.iter()
                .map(|c| format!("{c:?}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        for r in &self.records {
            s.push_str(&format!(
                "{},{},{:?},{:?},{:?},{}\n",
                join(&r.x),
                join(&r.y),
                r.distance,
                r.argument,
                r.value,
                r.candidates
            ));
        }
        s
    }
}

fn min_eig(m: &DMatrix<f64>) -> f64 {
    m.clone().symmetric_eigenvalues().min()
}

/// Evaluate the condition on each sample pair. `X` and `Y` are taken on the
/// boundary of the admissible set: with `B = alpha A + eps A^2`,
/// `X = B_xx - s I`, `Y = -B_yy + B_yx B_xy / s` for `s` in a geometric
/// family around `|B_xy|`, so that `diag(X, -Y) <= B`; candidates violating
/// the lower bound `-(alpha^2/eps + |A|) I` are discarded.
pub fn isaacs_condition_check(
    f: &FSpec,
    metric: &MetricField,
    samples: &[(Vec<f64>, Vec<f64>)],
    opts: &IsaacsOptions,
) -> Result<IsaacsCheck, SolverError> {
    if !matches!(f.kind(), FKind::Isaacs(_) | FKind::LinearDiffusion { .. }) {
        return Err(SolverError::InvalidSpec(
            "isaacs check needs a second-order operator".into(),
        ));
    }
    if !(opts.alpha > 0.0 && opts.eps > 0.0) {
        return Err(SolverError::InvalidSpec(
            "alpha and eps must be positive".into(),
        ));
    }
    let n = metric.dim();
    let shooter = Shooter::with_options(metric, opts.shooting);
    let mut records = Vec::new();
    let mut skipped = 0;
    for (x, y) in samples {
        let (e, gx, gy) = shooter.energy_and_grad(x, y)?;
        let d = e.sqrt();
        if d >= opts.upsilon {
            skipped += 1;
            continue;
        }
        let a = shooter.hessian_energy(x, y)?.matrix;
        let b = &a * opts.alpha + &a * &a * opts.eps;
        let bxx = b.view((0, 0), (n, n)).into_owned();
        let bxy = b.view((0, n), (n, n)).into_owned();
        let byy = b.view((n, n), (n, n)).into_owned();
        let lower =
            -(opts.alpha * opts.alpha / opts.eps + a.clone().symmetric_eigenvalues().amax());
        let mu = bxy.clone().svd(false, false).singular_values.max();
        let base = if mu > 0.0 { mu } else { 1.0 };
        let p: Vec<f64> = (&gx * opts.alpha).iter().copied().collect();
        let q: Vec<f64> = (&gy * -opts.alpha).iter().copied().collect();
        let mut worst = f64::NEG_INFINITY;
        let mut candidates = 0;
        for s in [0.25, 0.5, 1.0, 2.0, 4.0].map(|k| k * base) {
            let xm = &bxx - DMatrix::identity(n, n) * s;
            let ym = -&byy + bxy.transpose() * &bxy / s;
            if min_eig(&xm) < lower || min_eig(&(-&ym)) < lower {
                continue;
            }
            candidates += 1;
            for r in [-opts.r_bound, 0.0, opts.r_bound] {
                let v = f.eval(&xm, &p, r, x) - f.eval(&ym, &q, r, y);
                worst = worst.max(v);
            }
        }
        if candidates == 0 {
            continue;
        }
        records.push(IsaacsRecord {
            x: x.clone(),
            y: y.clone(),
            distance: d,
            argument: opts.alpha * e + d + opts.eps,
            value: worst,
            candidates,
        });
    }
    let max_value = records
        .iter()
        .map(|r| r.value)
        .fold(f64::NEG_INFINITY, f64::max);
    let slope = records
        .iter()
        .map(|r| r.value.max(0.0) / r.argument)
        .fold(0.0, f64::max);
    let cap = max_value.max(0.0);
    let fitted = if slope == 0.0 {
        Modulus::zero()
    } else {
        Modulus::new(slope, cap)?
    };
    Ok(IsaacsCheck {
        records,
        fitted,
        max_value,
        skipped,
    })
}

/// A priori linear modulus for a flat metric: `K t` with
/// `K = 2 max(1, d_max^2) Lip_sigma^2 + 2 Lip_source + 2 R Lip_c`, where the
/// Lipschitz constants are Euclidean and maximized over the control family.
pub fn flat_apriori_modulus(
    f: &FSpec,
    dim: usize,
    d_max: f64,
    r_bound: f64,
) -> Result<Modulus, SolverError> {
    let entries = f.entries(dim);
    let ls = entries
        .iter()
        .flatten()
        .map(|e| e.sigma.lipschitz())
        .fold(0.0, f64::max);
    let lb = entries
        .iter()
        .flatten()
        .map(|e| e.b.source.map_or(0.0, |w| w.lipschitz()))
        .fold(0.0, f64::max);
    let lc = entries
        .iter()
        .flatten()
        .map(|e| e.c.wave.map_or(0.0, |w| w.lipschitz()))
        .fold(0.0, f64::max);
    let k = 2.0 * d_max.powi(2).max(1.0) * ls * ls + 2.0 * lb + 2.0 * r_bound * lc;
    Ok(Modulus::lipschitz(k)?)
}
