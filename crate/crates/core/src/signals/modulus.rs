use super::SignalError;

/// Capped-linear modulus `omega(r) = min(L r, M)`; `M` may be infinite.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Modulus {
    lipschitz: f64,
    cap: f64,
}

impl Modulus {
    pub fn new(lipschitz: f64, cap: f64) -> Result<Self, SignalError> {
        if !(lipschitz >= 0.0) || !lipschitz.is_finite() {
            return Err(SignalError::InvalidModulus(format!(
                "lipschitz constant must be finite and nonnegative, got {lipschitz}"
            )));
        }
        if !(cap > 0.0) {
            return Err(SignalError::InvalidModulus(format!(
                "cap must be positive, got {cap}"
            )));
        }
        Ok(Self { lipschitz, cap })
    }

    pub fn lipschitz(lipschitz: f64) -> Result<Self, SignalError> {
        Self::new(lipschitz, f64::INFINITY)
    }

    pub fn zero() -> Self {
        Self {
            lipschitz: 0.0,
            cap: f64::INFINITY,
        }
    }

    pub fn slope(&self) -> f64 {
        self.lipschitz
    }

    pub fn cap(&self) -> f64 {
        self.cap
    }

    pub fn is_bounded(&self) -> bool {
        self.cap.is_finite() || self.lipschitz == 0.0
    }

    pub fn eval(&self, r: f64) -> f64 {
        if self.lipschitz == 0.0 {
            return 0.0;
        }
        (self.lipschitz * r).min(self.cap)
    }

    /// Parameterwise minimum; an upper bound for the pointwise minimum.
    pub fn meet(&self, other: &Modulus) -> Modulus {
        Modulus {
            lipschitz: self.lipschitz.min(other.lipschitz),
            cap: self.cap.min(other.cap),
        }
    }

    /// Convert a modulus in Euclidean distance into one in `d_g`, using
    /// `|x - y| <= 2 c d_g(x, y)`.
    pub fn euclidean_to_metric(&self, ellipticity_c: f64) -> Modulus {
        Modulus {
            lipschitz: 2.0 * ellipticity_c * self.lipschitz,
            cap: self.cap,
        }
    }
}

/// `sup_{r>=0} (omega(r) - lambda r^2 / 2)`.
pub fn theta(omega: &Modulus, lambda: f64) -> f64 {
    let l = omega.lipschitz;
    let m = omega.cap;
    if l == 0.0 {
        return 0.0;
    }
    if lambda * m >= l * l {
        l * l / (2.0 * lambda)
    } else {
        m - lambda * m * m / (2.0 * l * l)
    }
}

/// `sup_{r>=0} (omega(r) - gamma r / 2)`.
pub fn theta_tilde(omega: &Modulus, gamma: f64) -> Result<f64, SignalError> {
    let l = omega.lipschitz;
    if l == 0.0 || gamma / 2.0 >= l {
        return Ok(0.0);
    }
    if !omega.cap.is_finite() {
        return Err(SignalError::ThetaTildeInfinite {
            lipschitz: l,
            half_gamma: gamma / 2.0,
        });
    }
    Ok(omega.cap * (1.0 - gamma / (2.0 * l)))
}
