//! Scalar abstractions.
//!
//! Floating-point code is written against [`Real`] (f32 or f64). Code that
//! must also run bit-exactly over the integers or over a prime field is
//! written against an [`Arithmetic`] context, whose operations are fallible
//! so that integer overflow surfaces as an error instead of wrapping.

use std::fmt::{Debug, Display};
use std::marker::PhantomData;

use num_traits::{CheckedAdd, CheckedMul, CheckedNeg, Float, FloatConst, FromPrimitive, PrimInt, Signed};

use crate::error::{CertError, Result};

/// Floating point: f32 or f64.
pub trait Real:
    Float + FloatConst + FromPrimitive + Debug + Display + Default + Send + Sync + 'static
{
    /// Converts an f64 literal; every literal used in this crate is representable.
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("literal representable in the target float type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A ring in which the recurrence, window and derivative computations run.
pub trait Arithmetic {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn neg(&self, a: &Self::Elem) -> Result<Self::Elem>;

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem> {
        self.add(a, &self.neg(b)?)
    }

    fn sum<'a, I>(&self, items: I) -> Result<Self::Elem>
    where
        I: IntoIterator<Item = &'a Self::Elem>,
        Self::Elem: 'a,
    {
        items
            .into_iter()
            .try_fold(self.zero(), |acc, v| self.add(&acc, v))
    }
}

/// Overflow-checked machine integers (exact mode).
#[derive(Debug, Clone, Copy)]
pub struct Checked<T>(PhantomData<T>);

impl<T> Default for Checked<T> {
    fn default() -> Self {
        Checked(PhantomData)
    }
}

impl<T> Arithmetic for Checked<T>
where
    T: PrimInt + Signed + CheckedAdd + CheckedMul + CheckedNeg + Debug + Display,
{
    type Elem = T;

    fn zero(&self) -> T {
        T::zero()
    }

    fn one(&self) -> T {
        T::one()
    }

    fn add(&self, a: &T, b: &T) -> Result<T> {
        a.checked_add(b)
            .ok_or_else(|| CertError::Overflow(format!("{a} + {b}")))
    }

    fn mul(&self, a: &T, b: &T) -> Result<T> {
        a.checked_mul(b)
            .ok_or_else(|| CertError::Overflow(format!("{a} * {b}")))
    }

    fn neg(&self, a: &T) -> Result<T> {
        a.checked_neg()
            .ok_or_else(|| CertError::Overflow(format!("-({a})")))
    }
}

/// IEEE floating point (float mode). A non-finite result is reported as overflow.
#[derive(Debug, Clone, Copy)]
pub struct Floating<F>(PhantomData<F>);

impl<F> Default for Floating<F> {
    fn default() -> Self {
        Floating(PhantomData)
    }
}

impl<F: Real> Floating<F> {
    fn finite(v: F, what: &str) -> Result<F> {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(CertError::Overflow(format!("non-finite value in {what}")))
        }
    }
}

impl<F: Real> Arithmetic for Floating<F> {
    type Elem = F;

    fn zero(&self) -> F {
        F::zero()
    }

    fn one(&self) -> F {
        F::one()
    }

    fn add(&self, a: &F, b: &F) -> Result<F> {
        Self::finite(*a + *b, "addition")
    }

    fn mul(&self, a: &F, b: &F) -> Result<F> {
        Self::finite(*a * *b, "multiplication")
    }

    fn neg(&self, a: &F) -> Result<F> {
        Ok(-*a)
    }
}

/// Scalar types with a canonical, parameter-free arithmetic context.
pub trait Scalar: Clone + PartialEq + Debug {
    type Ctx: Arithmetic<Elem = Self> + Default;
}

impl Scalar for i64 {
    type Ctx = Checked<i64>;
}

impl Scalar for i128 {
    type Ctx = Checked<i128>;
}

impl Scalar for f32 {
    type Ctx = Floating<f32>;
}

impl Scalar for f64 {
    type Ctx = Floating<f64>;
}

/// Pairwise (cascade) summation; error grows like O(log n) instead of O(n).
pub fn pairwise_sum<F: Real>(values: &[F]) -> F {
    const BLOCK: usize = 16;
    if values.len() <= BLOCK {
        values.iter().fold(F::zero(), |acc, &v| acc + v)
    } else {
        let mid = values.len() / 2;
        pairwise_sum(&values[..mid]) + pairwise_sum(&values[mid..])
    }
}

/// Euclidean norm with scaling against overflow and Kahan-compensated accumulation.
pub fn compensated_norm<F: Real>(values: &[F]) -> F {
    let scale = values.iter().fold(F::zero(), |m, v| m.max(v.abs()));
    if scale == F::zero() {
        return F::zero();
    }
    let mut sum = F::zero();
    let mut carry = F::zero();
    for v in values {
        let r = *v / scale;
        let term = r * r - carry;
        let next = sum + term;
        carry = (next - sum) - term;
        sum = next;
    }
    scale * sum.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn checked_overflow_is_reported() {
        let ctx = Checked::<i64>::default();
        assert!(matches!(ctx.mul(&i64::MAX, &2), Err(CertError::Overflow(_))));
        assert!(matches!(ctx.neg(&i64::MIN), Err(CertError::Overflow(_))));
        assert_eq!(ctx.add(&2, &3).unwrap(), 5);
    }

    #[test]
    fn floating_rejects_infinity() {
        let ctx = Floating::<f64>::default();
        assert!(ctx.mul(&1e200, &1e200).is_err());
        assert_eq!(ctx.sub(&3.0, &1.0).unwrap(), 2.0);
    }

    #[test]
    fn pairwise_sum_matches_naive_on_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
    }

    #[test]
    fn norm_handles_huge_entries() {
        let n = compensated_norm(&[3e200_f64, 4e200]);
        assert!((n / 5e200 - 1.0).abs() < 1e-15);
        assert_eq!(compensated_norm::<f32>(&[]), 0.0);
    }
}
