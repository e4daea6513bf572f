//! Power-sum nonlinearities `φ(t) = Σ c_k t^{p_k}`.
//!
//! These stand in for the drift coefficient `f`, the singular forcing `g`
//! and the bifurcation nonlinearity `G`. Negative or fractional powers make
//! the function singular at `t = 0` and restrict it to `t > 0`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PowerTerm {
    pub coef: f64,
    pub power: f64,
}

impl PowerTerm {
    pub fn new(coef: f64, power: f64) -> Self {
        Self { coef, power }
    }

    fn is_integer_power(&self) -> bool {
        self.power.fract() == 0.0 && self.power.abs() < i32::MAX as f64
    }

    fn eval(&self, t: f64) -> f64 {
        if self.power == 0.0 {
            self.coef
        } else if self.is_integer_power() {
            self.coef * t.powi(self.power as i32)
        } else {
            self.coef * t.powf(self.power)
        }
    }
}

/// A finite sum of signed power terms.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Nonlinearity {
    pub terms: Vec<PowerTerm>,
}

impl Nonlinearity {
    pub fn new(terms: Vec<PowerTerm>) -> Result<Self> {
        for term in &terms {
            if !term.coef.is_finite() || !term.power.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "non-finite power term {}·t^{}",
                    term.coef, term.power
                )));
            }
        }
        Ok(Self { terms })
    }

    /// Builds from `(coef, power)` pairs.
    pub fn from_pairs(pairs: &[(f64, f64)]) -> Self {
        Self::new(pairs.iter().map(|&(c, p)| PowerTerm::new(c, p)).collect()).expect("finite power terms")
    }

    pub fn zero() -> Self {
        Self::default()
    }

    pub fn constant(value: f64) -> Self {
        Self::from_pairs(&[(value, 0.0)])
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coef == 0.0)
    }

    /// True when some term is only defined for `t > 0`.
    pub fn requires_positive(&self) -> bool {
        self.terms.iter().any(|t| t.coef != 0.0 && (t.power < 0.0 || !t.is_integer_power()))
    }

    pub fn eval(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.eval(t)).sum()
    }

    /// Evaluates after checking the domain.
    pub fn eval_checked(&self, t: f64) -> Result<f64> {
        if self.requires_positive() && !(t > 0.0) {
            return Err(Error::DomainViolation(format!("argument {t:e} is not positive")));
        }
        Ok(self.eval(t))
    }

    pub fn derivative(&self) -> Nonlinearity {
        Nonlinearity {
            terms: self
                .terms
                .iter()
                .filter(|t| t.power != 0.0 && t.coef != 0.0)
                .map(|t| PowerTerm::new(t.coef * t.power, t.power - 1.0))
                .collect(),
        }
    }

    /// Adds a linear term `coef·t`.
    pub fn plus_linear(&self, coef: f64) -> Nonlinearity {
        let mut terms = self.terms.clone();
        terms.push(PowerTerm::new(coef, 1.0));
        Nonlinearity { terms }
    }

    pub fn scaled(&self, factor: f64) -> Nonlinearity {
        Nonlinearity { terms: self.terms.iter().map(|t| PowerTerm::new(t.coef * factor, t.power)).collect() }
    }
}
