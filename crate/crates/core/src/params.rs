use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters `(eps, b)` of the equation together with the sector label
/// `eps2`, defined by `eps*b = |eps*b| exp(i pi eps2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquationParams {
    pub eps: i8,
    pub b: f64,
    pub eps2: i8,
}

impl EquationParams {
    /// Builds parameters, choosing `eps2 = +1` when `eps*b < 0`.
    pub fn new(eps: i8, b: f64) -> Result<Self> {
        let eps2 = if f64::from(eps) * b > 0.0 { 0 } else { 1 };
        Self::with_sector(eps, b, eps2)
    }

    pub fn with_sector(eps: i8, b: f64, eps2: i8) -> Result<Self> {
        if eps != 1 && eps != -1 {
            return Err(Error::InvalidParameters(format!("eps must be +1 or -1, got {eps}")));
        }
        if !b.is_finite() || b == 0.0 {
            return Err(Error::InvalidParameters(format!("b must be finite and nonzero, got {b}")));
        }
        let positive = f64::from(eps) * b > 0.0;
        let ok = match eps2 {
            0 => positive,
            1 | -1 => !positive,
            _ => false,
        };
        if !ok {
            return Err(Error::InvalidParameters(format!(
                "eps2 = {eps2} is inconsistent with eps*b = {}",
                f64::from(eps) * b
            )));
        }
        Ok(Self { eps, b, eps2 })
    }

    pub fn eps_f(&self) -> f64 {
        f64::from(self.eps)
    }

    /// The coupling `eps*b`.
    pub fn eb(&self) -> f64 {
        self.eps_f() * self.b
    }

    /// `(-1)^eps2`.
    pub fn sigma(&self) -> f64 {
        if self.eps2 == 0 {
            1.0
        } else {
            -1.0
        }
    }

    /// `(eps*b)^{2/3}` with the real cube root, so the result is positive
    /// for either sign of the coupling.
    pub fn eb_two_thirds(&self) -> f64 {
        let c = self.eb().cbrt();
        c * c
    }
}

/// Real cube root with `x^{1/3} = -|x|^{1/3}` for negative `x`.
pub fn real_cbrt(x: f64) -> f64 {
    x.cbrt()
}
