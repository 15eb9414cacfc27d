use serde::{Deserialize, Serialize};

use crate::{QslError, Result};

/// Unit convention for all time/energy formulas.
///
/// Everything in the crate is written in terms of the Planck constant `h`,
/// with `hbar = h / (2 pi)` derived. The default fixes `h = 1`, so times come
/// out in units of `h / E-scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitConvention {
    pub h: f64,
}

impl UnitConvention {
    pub fn new(h: f64) -> Result<Self> {
        if !(h.is_finite() && h > 0.0) {
            return Err(QslError::InvalidConfig(format!(
                "Planck constant must be a positive finite number, got {h}"
            )));
        }
        Ok(Self { h })
    }

    pub fn hbar(&self) -> f64 {
        self.h / std::f64::consts::TAU
    }
}

impl Default for UnitConvention {
    fn default() -> Self {
        Self { h: 1.0 }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hbar_is_h_over_two_pi() {
        let u = UnitConvention::default();
        assert!((u.hbar() - 1.0 / std::f64::consts::TAU).abs() < 1e-15);
        let u2 = UnitConvention::new(2.0).unwrap();
        assert!((u2.hbar() - 1.0 / std::f64::consts::PI).abs() < 1e-15);
    }

    #[test]
    fn rejects_nonpositive_h() {
        assert!(UnitConvention::new(0.0).is_err());
        assert!(UnitConvention::new(-1.0).is_err());
        assert!(UnitConvention::new(f64::NAN).is_err());
    }
}
