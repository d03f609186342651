//! The canonical reciprocal cost `J(x) = (x + 1/x)/2 - 1`, its log form
//! `cosh(t) - 1`, and the scalar bounds built on them.

use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::scalar::Real;

/// Below this distance from 1 the cost is evaluated as `(x-1)^2 / (2x)`.
const NEAR_ONE: f64 = 1e-4;

/// A known band `[lower, upper]` of positive ratios.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatioBand<F> {
    lower: F,
    upper: F,
}

impl<F: Real> RatioBand<F> {
    pub fn new(lower: F, upper: F) -> Result<Self> {
        if !(lower.is_finite() && upper.is_finite()) || lower <= F::zero() || lower > upper {
            return Err(CertError::Domain(format!(
                "ratio band needs 0 < lower <= upper < inf, got [{lower}, {upper}]"
            )));
        }
        Ok(RatioBand { lower, upper })
    }

    pub fn lower(&self) -> F {
        self.lower
    }

    pub fn upper(&self) -> F {
        self.upper
    }

    pub fn contains(&self, x: F) -> bool {
        self.lower <= x && x <= self.upper
    }
}

fn positive<F: Real>(x: F) -> Result<F> {
    if x.is_finite() && x > F::zero() {
        Ok(x)
    } else {
        Err(CertError::Domain(format!("cost needs a positive finite argument, got {x}")))
    }
}

fn finite<F: Real>(t: F) -> Result<F> {
    if t.is_finite() {
        Ok(t)
    } else {
        Err(CertError::Domain(format!("expected a finite value, got {t}")))
    }
}

/// `J(x) = (x + 1/x)/2 - 1` for `x > 0`.
pub fn cost<F: Real>(x: F) -> Result<F> {
    let x = positive(x)?;
    let half = F::lit(0.5);
    let dx = x - F::one();
    if dx.abs() < F::lit(NEAR_ONE) {
        Ok(dx * dx / (x + x))
    } else {
        Ok(half * (x + x.recip()) - F::one())
    }
}

/// `cosh(t) - 1`, evaluated as `2 sinh(t/2)^2` so small `t` keeps full precision.
pub fn cost_log<F: Real>(t: F) -> Result<F> {
    let t = finite(t)?;
    let s = (t * F::lit(0.5)).sinh();
    Ok((s + s) * s)
}

/// `sum_i J(x_i)`; zero for an empty vector.
pub fn separable_cost<F: Real>(x: &[F]) -> Result<F> {
    x.iter().try_fold(F::zero(), |acc, &v| Ok(acc + cost(v)?))
}

/// Lipschitz constant `(1 + a^-2)/2` of `J` on the band `[a, b]`.
pub fn lipschitz_constant<F: Real>(band: &RatioBand<F>) -> F {
    let a = band.lower();
    F::lit(0.5) * (F::one() + (a * a).recip())
}

/// Cost tolerance `L(a) * delta * b` induced by relative ratio error `delta`.
pub fn tolerance_epsilon<F: Real>(band: &RatioBand<F>, delta: F) -> Result<F> {
    if !delta.is_finite() || delta < F::zero() {
        return Err(CertError::Domain(format!("delta must be nonnegative, got {delta}")));
    }
    Ok(lipschitz_constant(band) * delta * band.upper())
}

/// Terms of the composition law `J(xy) + J(x/y) = 2J(x) + 2J(y) + 2J(x)J(y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RclResidual<F> {
    /// Left side minus right side.
    pub residual: F,
    /// Largest magnitude among the individual terms.
    pub largest_term: F,
}

/// Residual of the composition law at `(x, y)`; zero up to roundoff for `J`.
pub fn rcl_residual<F: Real>(x: F, y: F) -> Result<RclResidual<F>> {
    let jxy = cost(positive(x)? * positive(y)?)?;
    let jq = cost(x / y)?;
    let jx = cost(x)?;
    let jy = cost(y)?;
    let two = F::lit(2.0);
    let terms = [jxy, jq, two * jx, two * jy, two * jx * jy];
    let largest_term = terms.iter().fold(F::zero(), |m, v| m.max(v.abs()));
    let residual = (jxy + jq) - (two * jx + two * jy + two * jx * jy);
    Ok(RclResidual {
        residual,
        largest_term,
    })
}

/// Upper bound `e^|t| t^2 / 2` on `cosh(t) - 1`.
pub fn quadratic_upper_bound<F: Real>(t: F) -> Result<F> {
    let t = finite(t)?;
    Ok(F::lit(0.5) * t.abs().exp() * t * t)
}
