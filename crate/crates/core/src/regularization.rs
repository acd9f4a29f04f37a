//! Entropy density `F(s) = s(log s − 1) + 1`, its quadratic continuation above a
//! cut-off level `L`, and the matching clamps `Q^L`, `Q₀^L`.

use crate::error::{Error, Result};

fn check_nonneg(s: f64) -> Result<()> {
    if s < 0.0 || s.is_nan() {
        Err(Error::Domain(format!("entropy evaluated at negative argument {s}")))
    } else {
        Ok(())
    }
}

/// `F(s)`, continuous at zero with `F(0) = 1`.
pub fn entropy(s: f64) -> Result<f64> {
    check_nonneg(s)?;
    Ok(entropy_unchecked(s))
}

#[inline]
pub(crate) fn entropy_unchecked(s: f64) -> f64 {
    if s == 0.0 {
        1.0
    } else {
        s * (s.ln() - 1.0) + 1.0
    }
}

/// `F''(s) = 1/s`.
pub fn entropy_d2(s: f64) -> Result<f64> {
    check_nonneg(s)?;
    Ok(1.0 / s)
}

/// Cut-off level `L > 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    level: f64,
}

impl Cutoff {
    pub fn new(level: f64) -> Result<Self> {
        if level > 1.0 && level.is_finite() {
            Ok(Cutoff { level })
        } else {
            Err(Error::Config(format!("cut-off level must satisfy L > 1, got {level}")))
        }
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    /// `F^L(s)`.
    pub fn entropy(&self, s: f64) -> Result<f64> {
        check_nonneg(s)?;
        let l = self.level;
        Ok(if s <= l {
            entropy_unchecked(s)
        } else {
            (s * s - l * l) / (2.0 * l) + s * (l.ln() - 1.0) + 1.0
        })
    }

    /// `(F^L)'(s)`; `−∞` at zero.
    pub fn entropy_d1(&self, s: f64) -> Result<f64> {
        check_nonneg(s)?;
        let l = self.level;
        Ok(if s <= l { s.ln() } else { s / l + l.ln() - 1.0 })
    }

    /// `(F^L)''(s) = 1 / Q^L(s)`.
    pub fn entropy_d2(&self, s: f64) -> Result<f64> {
        check_nonneg(s)?;
        Ok(if s <= self.level { 1.0 / s } else { 1.0 / self.level })
    }

    /// `Q^L(s) = min(s, L)`.
    #[inline]
    pub fn q(&self, s: f64) -> f64 {
        s.min(self.level)
    }

    /// `Q₀^L(s) = clamp(s, 0, L)`.
    #[inline]
    pub fn q0(&self, s: f64) -> f64 {
        s.clamp(0.0, self.level)
    }
}
