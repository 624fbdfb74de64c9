//! Second-order operators `F(M, p, r, x)` of linear-diffusion or
//! Hamilton-Jacobi-Isaacs type over finite control sets.

use nalgebra::DMatrix;

use crate::signals::Modulus;

use super::SolverError;

/// `amplitude * sin(frequency * x[axis])`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Wave {
    pub amplitude: f64,
    pub axis: usize,
    pub frequency: f64,
}

impl Wave {
    pub fn eval(&self, x: &[f64]) -> f64 {
        self.amplitude * (self.frequency * x[self.axis]).sin()
    }

    pub fn lipschitz(&self) -> f64 {
        (self.amplitude * self.frequency).abs()
    }
}

/// Diffusion coefficient `sigma(x)`.
#[derive(Clone, Debug, PartialEq)]
pub enum SigmaModel {
    Constant(DMatrix<f64>),
    /// `sigma(x) = (1 + wave(x)) base`.
    Modulated {
        base: DMatrix<f64>,
        wave: Wave,
    },
}

impl SigmaModel {
    pub fn sigma(&self, x: &[f64]) -> DMatrix<f64> {
        match self {
            SigmaModel::Constant(s) => s.clone(),
            SigmaModel::Modulated { base, wave } => base * (1.0 + wave.eval(x)),
        }
    }

    /// Lipschitz constant of `x -> sigma(x)` in the Frobenius norm.
    pub fn lipschitz(&self) -> f64 {
        match self {
            SigmaModel::Constant(_) => 0.0,
            SigmaModel::Modulated { base, wave } => base.norm() * wave.lipschitz(),
        }
    }

    fn dim(&self) -> usize {
        match self {
            SigmaModel::Constant(s) => s.nrows(),
            SigmaModel::Modulated { base, .. } => base.nrows(),
        }
    }
}

/// Zeroth-order coefficient `c(x) = mean + wave(x)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CModel {
    pub mean: f64,
    pub wave: Option<Wave>,
}

impl CModel {
    pub fn constant(c: f64) -> Self {
        Self {
            mean: c,
            wave: None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        self.mean + self.wave.map_or(0.0, |w| w.eval(x))
    }

    pub fn min(&self) -> f64 {
        self.mean - self.wave.map_or(0.0, |w| w.amplitude.abs())
    }

    pub fn max(&self) -> f64 {
        self.mean + self.wave.map_or(0.0, |w| w.amplitude.abs())
    }
}

/// First-order part `b(p, x) = drift . p + source(x)`.
#[derive(Clone, Debug, PartialEq)]
pub struct BModel {
    pub drift: Vec<f64>,
    pub source: Option<Wave>,
}

impl BModel {
    pub fn zero(dim: usize) -> Self {
        Self {
            drift: vec![0.0; dim],
            source: None,
        }
    }

    pub fn eval(&self, p: &[f64], x: &[f64]) -> f64 {
        let d: f64 = self.drift.iter().zip(p).map(|(a, b)| a * b).sum();
        d + self.source.map_or(0.0, |w| w.eval(x))
    }
}

/// One `(alpha, beta)` term `tr(sigma sigma^T M) + b(p, x) - c(x) r`.
#[derive(Clone, Debug, PartialEq)]
pub struct IsaacsEntry {
    pub sigma: SigmaModel,
    pub b: BModel,
    pub c: CModel,
}

impl IsaacsEntry {
    pub fn diffusion(&self, x: &[f64]) -> DMatrix<f64> {
        let s = self.sigma.sigma(x);
        &s * s.transpose()
    }

    pub fn eval(&self, m: &DMatrix<f64>, p: &[f64], r: f64, x: &[f64]) -> f64 {
        (self.diffusion(x) * m).trace() + self.b.eval(p, x) - self.c.eval(x) * r
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum FKind {
    Zero,
    /// `nu tr(a D^2 u) - decay u` with a constant symmetric positive semidefinite `a`.
    LinearDiffusion {
        a: DMatrix<f64>,
        nu: f64,
        decay: f64,
    },
    /// `inf_alpha sup_beta` over `entries[alpha][beta]`.
    Isaacs(Vec<Vec<IsaacsEntry>>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct FSpec {
    kind: FKind,
    f_modulus: Modulus,
}

impl FSpec {
    pub fn zero() -> Self {
        Self {
            kind: FKind::Zero,
            f_modulus: Modulus::zero(),
        }
    }

    pub fn linear_diffusion(a: DMatrix<f64>, nu: f64, decay: f64) -> Result<Self, SolverError> {
        if a.nrows() != a.ncols() || a.nrows() == 0 {
            return Err(SolverError::InvalidSpec(
                "diffusion matrix must be square".into(),
            ));
        }
        if (&a - a.transpose()).amax() > 1e-12 * (1.0 + a.amax()) {
            return Err(SolverError::InvalidSpec(
                "diffusion matrix must be symmetric".into(),
            ));
        }
        if a.clone().symmetric_eigenvalues().min() < -1e-12 {
            return Err(SolverError::InvalidSpec(
                "diffusion matrix must be positive semidefinite".into(),
            ));
        }
        if !(nu >= 0.0) || !(decay >= 0.0) {
            return Err(SolverError::InvalidSpec(
                "nu and decay must be nonnegative".into(),
            ));
        }
        Ok(Self {
            kind: FKind::LinearDiffusion { a, nu, decay },
            f_modulus: Modulus::zero(),
        })
    }

    pub fn isaacs(entries: Vec<Vec<IsaacsEntry>>) -> Result<Self, SolverError> {
        let first = entries
            .first()
            .and_then(|row| row.first())
            .ok_or_else(|| SolverError::InvalidSpec("isaacs family is empty".into()))?;
        let n = first.sigma.dim();
        for row in &entries {
            if row.is_empty() {
                return Err(SolverError::InvalidSpec(
                    "isaacs family has an empty row".into(),
                ));
            }
            for e in row {
                if e.sigma.dim() != n || e.b.drift.len() != n {
                    return Err(SolverError::InvalidSpec(
                        "inconsistent dimensions in isaacs family".into(),
                    ));
                }
            }
        }
        Ok(Self {
            kind: FKind::Isaacs(entries),
            f_modulus: Modulus::zero(),
        })
    }

    /// Attach the modulus used in the second stability bound.
    pub fn with_modulus(mut self, m: Modulus) -> Self {
        self.f_modulus = m;
        self
    }

    pub fn kind(&self) -> &FKind {
        &self.kind
    }

    pub fn f_modulus(&self) -> Modulus {
        self.f_modulus
    }

    pub fn is_zero(&self) -> bool {
        matches!(self.kind, FKind::Zero)
    }

    /// The operator as an `inf sup` family; `Zero` gives an empty list.
    pub fn entries(&self, dim: usize) -> Vec<Vec<IsaacsEntry>> {
        match &self.kind {
            FKind::Zero => Vec::new(),
            FKind::LinearDiffusion { a, nu, decay } => {
                let s = (a * *nu).cholesky().map(|c| c.l()).unwrap_or_else(|| {
                    let eig = (a * *nu).symmetric_eigen();
                    let d = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
                    &eig.eigenvectors * DMatrix::from_diagonal(&d)
                });
                vec![vec![IsaacsEntry {
                    sigma: SigmaModel::Constant(s),
                    b: BModel::zero(dim),
                    c: CModel::constant(*decay),
                }]]
            }
            FKind::Isaacs(e) => e.clone(),
        }
    }

    /// Monotonicity constant: `F(.., r) - F(.., s) >= rho (s - r)` for `s >= r`.
    pub fn rho(&self) -> f64 {
        match &self.kind {
            FKind::Zero => 0.0,
            FKind::LinearDiffusion { decay, .. } => *decay,
            FKind::Isaacs(e) => e
                .iter()
                .flatten()
                .map(|x| x.c.min())
                .fold(f64::INFINITY, f64::min)
                .max(0.0),
        }
    }

    /// Lipschitz constant in `r`.
    pub fn lip(&self) -> f64 {
        match &self.kind {
            FKind::Zero => 0.0,
            FKind::LinearDiffusion { decay, .. } => *decay,
            FKind::Isaacs(e) => e
                .iter()
                .flatten()
                .map(|x| x.c.min().abs().max(x.c.max().abs()))
                .fold(0.0, f64::max),
        }
    }

    /// An upper bound for `sup_x |F(0, 0, 0, x)|`.
    pub fn f_sup(&self) -> f64 {
        match &self.kind {
            FKind::Isaacs(e) => e
                .iter()
                .flatten()
                .map(|x| x.b.source.map_or(0.0, |w| w.amplitude.abs()))
                .fold(0.0, f64::max),
            _ => 0.0,
        }
    }

    /// `F(M, p, r, x)`.
    pub fn eval(&self, m: &DMatrix<f64>, p: &[f64], r: f64, x: &[f64]) -> f64 {
        match &self.kind {
            FKind::Zero => 0.0,
            FKind::LinearDiffusion { a, nu, decay } => *nu * (a * m).trace() - decay * r,
            FKind::Isaacs(e) => e
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|t| t.eval(m, p, r, x))
                        .fold(f64::NEG_INFINITY, f64::max)
                })
                .fold(f64::INFINITY, f64::min),
        }
    }
}
