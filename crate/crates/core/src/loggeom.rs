//! Log-coordinate geometry: mean-zero projection, conservation, defect and
//! the coercive certificate value.

use serde::{Deserialize, Serialize};

use crate::cost::cost_log;
use crate::error::{CertError, Result};
use crate::scalar::{compensated_norm, pairwise_sum, Real};

/// A finite real vector in log coordinates, `n >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct LogVector<F>(Vec<F>);

impl<F: Real> LogVector<F> {
    pub fn new(entries: Vec<F>) -> Result<Self> {
        if entries.is_empty() {
            return Err(CertError::Domain("log vector must have at least one entry".into()));
        }
        if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
            return Err(CertError::Domain(format!("non-finite log entry at index {i}")));
        }
        Ok(LogVector(entries))
    }

    pub fn as_slice(&self) -> &[F] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn into_inner(self) -> Vec<F> {
        self.0
    }

    /// Adds `t` to every entry (a global rescaling `x -> e^t x`).
    pub fn shifted(&self, t: F) -> Result<Self> {
        LogVector::new(self.0.iter().map(|&v| v + t).collect())
    }

    pub fn mean(&self) -> F {
        pairwise_sum(&self.0) / F::from_usize(self.0.len()).unwrap_or_else(F::one)
    }
}

/// A configuration of strictly positive finite reals, `n >= 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PositiveConfig<F>(Vec<F>);

impl<F: Real> PositiveConfig<F> {
    pub fn new(entries: Vec<F>) -> Result<Self> {
        if entries.is_empty() {
            return Err(CertError::Domain("configuration must have at least one entry".into()));
        }
        if let Some(i) = entries.iter().position(|v| !(v.is_finite() && *v > F::zero())) {
            return Err(CertError::Domain(format!("entry {i} is not positive and finite")));
        }
        Ok(PositiveConfig(entries))
    }

    pub fn as_slice(&self) -> &[F] {
        &self.0
    }

    pub fn log(&self) -> LogVector<F> {
        LogVector(self.0.iter().map(|v| v.ln()).collect())
    }
}

/// `P(y) = y - mean(y) 1`.
pub fn project_mean_zero<F: Real>(y: &LogVector<F>) -> LogVector<F> {
    let mean = y.mean();
    LogVector(y.0.iter().map(|&v| v - mean).collect())
}

/// `sigma(x) = sum_i log x_i`.
pub fn conservation<F: Real>(x: &PositiveConfig<F>) -> F {
    pairwise_sum(x.log().as_slice())
}

/// `Def(x) = ||P(log x)||_2`.
pub fn defect<F: Real>(x: &PositiveConfig<F>) -> F {
    compensated_norm(project_mean_zero(&x.log()).as_slice())
}

/// `B(u) = sum_i J(e^{u_i}) = sum_i (cosh u_i - 1)`.
pub fn certificate_value<F: Real>(u: &LogVector<F>) -> F {
    let terms: Vec<F> = u
        .as_slice()
        .iter()
        .map(|&t| cost_log(t).expect("LogVector entries are finite"))
        .collect();
    pairwise_sum(&terms)
}
