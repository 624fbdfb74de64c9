//! Empirical certification of the shooting radius and fitted constants for
//! the gradient-sum and Hessian bounds.

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use super::metric::MetricField;
use super::shooting::{Shooter, ShootingOptions};

#[derive(Clone, Debug)]
pub struct ProbeOptions {
    pub samples: usize,
    /// Candidate radii in `d_g`, sorted ascending.
    pub radius_grid: Vec<f64>,
    /// Number of certified pairs used for the Hessian fit (0 disables it).
    pub hessian_samples: usize,
    /// Random `(p, q)` directions per Hessian pair.
    pub directions: usize,
    /// Base points are drawn uniformly from `[-box_half_width, box_half_width]^N`.
    pub box_half_width: f64,
    pub seed: u64,
    pub shooting: ShootingOptions,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        Self {
            samples: 200,
            radius_grid: (1..=10).map(|k| 0.1 * k as f64).collect(),
            hessian_samples: 200,
            directions: 50,
            box_half_width: std::f64::consts::PI,
            seed: 7,
            shooting: ShootingOptions::default(),
        }
    }
}

/// One sampled pair and what shooting produced for it.
#[derive(Clone, Debug)]
pub struct ProbePair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub euclid: f64,
    pub converged: bool,
    pub energy: f64,
    pub grad_x: Vec<f64>,
    pub grad_y: Vec<f64>,
    pub hamiltonian_drift: f64,
    pub eikonal: (f64, f64),
}

impl ProbePair {
    pub fn distance(&self) -> f64 {
        self.energy.sqrt()
    }

    /// `|D_x e + D_y e|`.
    pub fn gradient_sum(&self) -> f64 {
        self.grad_x
            .iter()
            .zip(&self.grad_y)
            .map(|(a, b)| (a + b) * (a + b))
            .sum::<f64>()
            .sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct GeometryReport {
    pub family: &'static str,
    pub upsilon_estimate: f64,
    pub gradsum_bound_l: f64,
    pub hessian_bound_l: f64,
    /// `L` from the a-priori estimate via `||Dg^{-1}||`, `||g||` and `c`.
    pub gradsum_bound_l_apriori: f64,
    pub hessian_bound_l_apriori: f64,
    /// `M^{-4} / c`, the unscaled radius from the qualitative construction.
    pub delta_formula: f64,
    pub samples: usize,
    pub converged: usize,
    pub max_drift: f64,
    pub max_eikonal_residual: f64,
    pub mixed_block_error: f64,
    pub pairs: Vec<ProbePair>,
}

impl GeometryReport {
    pub const CSV_HEADER: &'static str = "family,upsilon,gradsum_L,hessian_L,gradsum_L_apriori,hessian_L_apriori,delta_formula,samples,converged,max_drift,max_eikonal_residual,mixed_block_error";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:?},{:?},{:?},{:?},{:?},{:?},{},{},{:?},{:?},{:?}",
            self.family,
            self.upsilon_estimate,
            self.gradsum_bound_l,
            self.hessian_bound_l,
            self.gradsum_bound_l_apriori,
            self.hessian_bound_l_apriori,
            self.delta_formula,
            self.samples,
            self.converged,
            self.max_drift,
            self.max_eikonal_residual,
            self.mixed_block_error
        )
    }

    /// Converged pairs with `d_g` strictly below the certified radius.
    pub fn certified_pairs(&self) -> impl Iterator<Item = &ProbePair> {
        let r = self.upsilon_estimate;
        self.pairs
            .iter()
            .filter(move |p| p.converged && p.distance() < r)
    }
}

fn random_unit(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|a| a / norm).collect();
        }
    }
}

/// Draw pairs with Euclidean separation uniform in `[0, 2 c r_max]`, so that
/// every pair with `d_g <= r_max` is represented, and certify the largest grid
/// radius `r` for which all pairs with `|x - y| <= 2 c r` converged.
pub fn probe_injectivity(metric: &MetricField, opts: &ProbeOptions) -> GeometryReport {
    let n = metric.dim();
    let c = metric.ellipticity_c();
    let r_max = opts.radius_grid.iter().cloned().fold(0.0, f64::max);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let raw: Vec<(Vec<f64>, Vec<f64>)> = (0..opts.samples)
        .map(|_| {
            let x: Vec<f64> = (0..n)
                .map(|_| rng.random_range(-opts.box_half_width..=opts.box_half_width))
                .collect();
            let dir = random_unit(&mut rng, n);
            let s = rng.random_range(0.0..=1.0) * 2.0 * c * r_max;
            let y = x.iter().zip(&dir).map(|(a, d)| a + s * d).collect();
            (x, y)
        })
        .collect();
    let shooter = Shooter::with_options(metric, opts.shooting);
    let pairs: Vec<ProbePair> = raw
        .into_par_iter()
        .map(|(x, y)| {
            let euclid = x
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - b) * (a - b))
                .sum::<f64>()
                .sqrt();
            let mut pair = ProbePair {
                x: x.clone(),
                y: y.clone(),
                euclid,
                converged: false,
                energy: f64::NAN,
                grad_x: vec![f64::NAN; n],
                grad_y: vec![f64::NAN; n],
                hamiltonian_drift: f64::NAN,
                eikonal: (f64::NAN, f64::NAN),
            };
            if x == y {
                pair.converged = true;
                pair.energy = 0.0;
                pair.grad_x = vec![0.0; n];
                pair.grad_y = vec![0.0; n];
                pair.hamiltonian_drift = 0.0;
                pair.eikonal = (0.0, 0.0);
                return pair;
            }
            if let Ok(s) = shooter.invert_endpoint(&x, &y) {
                let gx = -&s.p0;
                let gy = s.p1().clone();
                let e = s.energy;
                let hx = super::metric::hamiltonian(metric, &x, gx.as_slice());
                let hy = super::metric::hamiltonian(metric, &y, gy.as_slice());
                pair.converged = true;
                pair.energy = e;
                pair.grad_x = gx.as_slice().to_vec();
                pair.grad_y = gy.as_slice().to_vec();
                pair.hamiltonian_drift = s.hamiltonian_drift;
                pair.eikonal = ((hx - e).abs(), (hy - e).abs());
            }
            pair
        })
        .collect();

    let mut upsilon = 0.0;
    for &r in &opts.radius_grid {
        let ok = pairs
            .iter()
            .filter(|p| p.euclid <= 2.0 * c * r)
            .all(|p| p.converged);
        if ok {
            upsilon = r;
        } else {
            break;
        }
    }

    let certified: Vec<&ProbePair> = pairs
        .iter()
        .filter(|p| p.converged && p.distance() < upsilon)
        .collect();
    let converged = pairs.iter().filter(|p| p.converged).count();
    let mut gradsum_l: f64 = 0.0;
    let mut max_drift: f64 = 0.0;
    let mut max_eik: f64 = 0.0;
    for p in &certified {
        if p.euclid > 0.0 {
            gradsum_l = gradsum_l.max(p.gradient_sum() / (p.euclid * p.euclid));
        }
        max_drift = max_drift.max(p.hamiltonian_drift);
        max_eik = max_eik.max(p.eikonal.0.max(p.eikonal.1) / (1.0 + p.energy));
    }

    // Directions are drawn up front so the fit does not depend on scheduling.
    let hess_pairs: Vec<&ProbePair> = certified
        .iter()
        .copied()
        .take(opts.hessian_samples)
        .collect();
    let dirs: Vec<Vec<DVector<f64>>> = hess_pairs
        .iter()
        .map(|_| {
            (0..opts.directions)
                .map(|_| DVector::from_fn(2 * n, |_, _| rng.sample(StandardNormal)))
                .collect()
        })
        .collect();
    let fits: Vec<(f64, f64)> = hess_pairs
        .par_iter()
        .zip(dirs.par_iter())
        .filter_map(|(p, ds)| {
            let h = shooter.hessian_energy(&p.x, &p.y).ok()?;
            Some((
                hessian_ratio(&h.matrix, p.euclid, ds, n),
                h.mixed_block_error,
            ))
        })
        .collect();
    let hessian_l = fits.iter().fold(0.0f64, |a, f| a.max(f.0));
    let mixed = fits.iter().fold(0.0f64, |a, f| a.max(f.1));

    let b = metric.bounds();
    let c_sq = c * c;
    let m = metric.c2_bound();
    GeometryReport {
        family: metric.family().tag(),
        upsilon_estimate: upsilon,
        gradsum_bound_l: gradsum_l,
        hessian_bound_l: hessian_l,
        gradsum_bound_l_apriori: b.ginv1 * b.g0 * c_sq / 4.0,
        hessian_bound_l_apriori: (0.5 * b.g0 + 0.5 * c_sq * b.g1)
            .max(c_sq * b.g1 + c_sq * c_sq / 4.0 * b.g2),
        delta_formula: m.powi(-4) / c,
        samples: pairs.len(),
        converged,
        max_drift,
        max_eikonal_residual: max_eik,
        mixed_block_error: mixed,
        pairs,
    }
}

/// Largest `Q(p, q) / (|p - q|^2 + |x - y|^2 (|p|^2 + |q|^2))` over the given
/// directions, where `Q` is the quadratic form of the Hessian.
pub(crate) fn hessian_ratio(
    hess: &nalgebra::DMatrix<f64>,
    euclid: f64,
    dirs: &[DVector<f64>],
    n: usize,
) -> f64 {
    dirs.iter().fold(0.0f64, |acc, v| {
        let q = (hess * v).dot(v);
        let p = v.rows(0, n);
        let qq = v.rows(n, n);
        let denom =
            (p - qq).norm_squared() + euclid * euclid * (p.norm_squared() + qq.norm_squared());
        if denom > 0.0 {
            acc.max(q / denom)
        } else {
            acc
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::metric::ScalarField;

    fn small_opts(samples: usize) -> ProbeOptions {
        ProbeOptions {
            samples,
            hessian_samples: 10,
            directions: 20,
            ..Default::default()
        }
    }

    #[test]
    fn identity_certifies_full_grid_and_zero_gradient_sum() {
        let m = MetricField::identity(2);
        let r = probe_injectivity(&m, &small_opts(50));
        assert_eq!(r.upsilon_estimate, 1.0);
        assert!(r.gradsum_bound_l <= 1e-10);
        assert_eq!(r.converged, 50);
        assert!(r.hessian_bound_l > 0.0 && r.hessian_bound_l <= 0.5 + 1e-8);
    }

    #[test]
    fn conformal_fit_is_finite_and_bounds_samples() {
        let m = MetricField::conformal(ScalarField::sine(0, 0.2, 1.0), 2).unwrap();
        let r = probe_injectivity(&m, &small_opts(60));
        assert!(r.upsilon_estimate > 0.0);
        assert!(r.gradsum_bound_l.is_finite() && r.gradsum_bound_l > 0.0);
        for p in r.certified_pairs() {
            assert!(p.gradient_sum() <= r.gradsum_bound_l * p.euclid * p.euclid + 1e-15);
        }
        assert!(r.gradsum_bound_l <= r.gradsum_bound_l_apriori);
        assert!(r.hessian_bound_l.is_finite());
        assert!(r.delta_formula > 0.0 && r.delta_formula < r.upsilon_estimate);
    }

    #[test]
    fn probe_is_deterministic() {
        let m = MetricField::conformal(ScalarField::sine(1, 0.1, 2.0), 2).unwrap();
        let a = probe_injectivity(&m, &small_opts(20));
        let b = probe_injectivity(&m, &small_opts(20));
        assert_eq!(a.csv_row(), b.csv_row());
    }

    #[test]
    fn csv_row_matches_header_width() {
        let m = MetricField::identity(1);
        let r = probe_injectivity(&m, &small_opts(5));
        assert_eq!(
            r.csv_row().split(',').count(),
            GeometryReport::CSV_HEADER.split(',').count()
        );
    }

    #[test]
    fn total_failure_reports_zero_radius() {
        let m = MetricField::conformal(ScalarField::sine(0, 1.5, 6.0), 1).unwrap();
        let opts = ProbeOptions {
            samples: 40,
            radius_grid: vec![50.0],
            hessian_samples: 0,
            shooting: ShootingOptions {
                max_iterations: 2,
                ..Default::default()
            },
            ..Default::default()
        };
        let r = probe_injectivity(&m, &opts);
        assert_eq!(r.upsilon_estimate, 0.0);
    }
}
