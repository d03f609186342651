//! The rational signal class: recurrence-driven generation, W-block window
//! sums, the truncated window map, and exponential-mixture generators.
//!
//! Sign convention: the stored recurrence `(q_1..q_d)` generates
//! `y_n = -(q_1 y_{n-1} + ... + q_d y_{n-d})` for `n >= d + 1`. The monic
//! characteristic coefficients used by [`crate::prony`] are a different
//! object (they describe the window-sum process, not `y`).

use num_traits::Num;
use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::scalar::{Arithmetic, Scalar};

/// Parameter vector `(y_0..y_d, q_1..q_d)` of a degree-`d` rational signal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RationalParams<T> {
    initial: Vec<T>,
    recurrence: Vec<T>,
}

impl<T: Clone> RationalParams<T> {
    pub fn new(initial: Vec<T>, recurrence: Vec<T>) -> Result<Self> {
        let d = recurrence.len();
        if d == 0 {
            return Err(CertError::Argument("degree d must be at least 1".into()));
        }
        if initial.len() != d + 1 {
            return Err(CertError::Argument(format!(
                "degree {d} needs {} initial values, got {}",
                d + 1,
                initial.len()
            )));
        }
        Ok(RationalParams { initial, recurrence })
    }

    /// Splits a flat `(y_0..y_d, q_1..q_d)` vector of length `2d + 1`.
    pub fn from_flat(pi: &[T]) -> Result<Self> {
        if pi.len() < 3 || pi.len().is_multiple_of(2) {
            return Err(CertError::Argument(format!(
                "parameter vector must have odd length 2d+1 >= 3, got {}",
                pi.len()
            )));
        }
        let d = (pi.len() - 1) / 2;
        Self::new(pi[..=d].to_vec(), pi[d + 1..].to_vec())
    }

    pub fn degree(&self) -> usize {
        self.recurrence.len()
    }

    pub fn initial(&self) -> &[T] {
        &self.initial
    }

    pub fn recurrence(&self) -> &[T] {
        &self.recurrence
    }

    /// `(y_0..y_d, q_1..q_d)`, the column order of every Jacobian.
    pub fn flat(&self) -> Vec<T> {
        self.initial.iter().chain(&self.recurrence).cloned().collect()
    }

    pub fn map<U: Clone>(&self, mut f: impl FnMut(&T) -> U) -> RationalParams<U> {
        RationalParams {
            initial: self.initial.iter().map(&mut f).collect(),
            recurrence: self.recurrence.iter().map(&mut f).collect(),
        }
    }

    pub fn to_f64(&self) -> RationalParams<f64>
    where
        T: Into<IntoF64>,
    {
        self.map(|v| v.clone().into().0)
    }
}

/// Conversion shim so integer parameter points can be lifted to float mode.
pub struct IntoF64(pub f64);

impl From<i128> for IntoF64 {
    fn from(v: i128) -> Self {
        IntoF64(v as f64)
    }
}

impl From<i64> for IntoF64 {
    fn from(v: i64) -> Self {
        IntoF64(v as f64)
    }
}

impl From<f64> for IntoF64 {
    fn from(v: f64) -> Self {
        IntoF64(v)
    }
}

/// Values whose finiteness can be checked (always true for integers).
pub trait Finite {
    fn is_finite_value(&self) -> bool;
}

macro_rules! finite_int {
    ($($t:ty),*) => {$(impl Finite for $t { fn is_finite_value(&self) -> bool { true } })*};
}
finite_int!(i64, i128, u64);

impl Finite for f64 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

impl Finite for f32 {
    fn is_finite_value(&self) -> bool {
        self.is_finite()
    }
}

/// `K` window sums at block length `W`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    try_from = "WindowRecord<T>",
    into = "WindowRecord<T>",
    bound(serialize = "T: Clone + Serialize", deserialize = "T: Finite + Deserialize<'de>")
)]
pub struct WindowData<T> {
    block_length: usize,
    sums: Vec<T>,
}

/// Wire shape `{"W": int, "K": int, "sums": [...]}`.
#[allow(non_snake_case)]
#[derive(Serialize, Deserialize)]
struct WindowRecord<T> {
    W: usize,
    K: usize,
    sums: Vec<T>,
}

impl<T: Finite> TryFrom<WindowRecord<T>> for WindowData<T> {
    type Error = CertError;

    fn try_from(r: WindowRecord<T>) -> Result<Self> {
        if r.K != r.sums.len() {
            return Err(CertError::Parse(format!(
                "K = {} but {} sums supplied",
                r.K,
                r.sums.len()
            )));
        }
        WindowData::new(r.W, r.sums)
    }
}

impl<T> From<WindowData<T>> for WindowRecord<T> {
    fn from(w: WindowData<T>) -> Self {
        WindowRecord {
            W: w.block_length,
            K: w.sums.len(),
            sums: w.sums,
        }
    }
}

impl<T: Finite> WindowData<T> {
    pub fn new(block_length: usize, sums: Vec<T>) -> Result<Self> {
        if block_length == 0 {
            return Err(CertError::Argument("block length W must be at least 1".into()));
        }
        if sums.is_empty() {
            return Err(CertError::Argument("window data needs at least one sum".into()));
        }
        if let Some(i) = sums.iter().position(|v| !v.is_finite_value()) {
            return Err(CertError::Domain(format!("window sum {i} is not finite")));
        }
        Ok(WindowData { block_length, sums })
    }
}

impl<T> WindowData<T> {
    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn count(&self) -> usize {
        self.sums.len()
    }

    pub fn sums(&self) -> &[T] {
        &self.sums
    }

    pub fn into_sums(self) -> Vec<T> {
        self.sums
    }
}

/// Iterates the recurrence in the given arithmetic, returning `y_0..=y_{n_max}`.
pub fn generate_sequence_with<A: Arithmetic>(
    ctx: &A,
    params: &RationalParams<A::Elem>,
    n_max: usize,
) -> Result<Vec<A::Elem>> {
    let d = params.degree();
    if n_max < d {
        return Err(CertError::Argument(format!("n_max = {n_max} is below the degree {d}")));
    }
    let mut y = Vec::with_capacity(n_max + 1);
    y.extend_from_slice(params.initial());
    for n in d + 1..=n_max {
        let mut acc = ctx.zero();
        for (m, q) in params.recurrence().iter().enumerate() {
            acc = ctx.add(&acc, &ctx.mul(q, &y[n - 1 - m])?)?;
        }
        y.push(ctx.neg(&acc)?);
    }
    Ok(y)
}

pub fn generate_sequence<T: Scalar>(params: &RationalParams<T>, n_max: usize) -> Result<Vec<T>> {
    generate_sequence_with(&T::Ctx::default(), params, n_max)
}

/// `S_k = sum_{j<W} y_{Wk+j}` for `k < K`, zero-based throughout.
pub fn window_sums_with<A>(ctx: &A, sequence: &[A::Elem], w: usize, k: usize) -> Result<WindowData<A::Elem>>
where
    A: Arithmetic,
    A::Elem: Finite,
{
    if w == 0 || k == 0 {
        return Err(CertError::Argument(format!("need W >= 1 and K >= 1, got W={w}, K={k}")));
    }
    let needed = w * k;
    if sequence.len() < needed {
        return Err(CertError::Argument(format!(
            "sequence of length {} is too short for {k} windows of length {w}",
            sequence.len()
        )));
    }
    let sums = sequence[..needed]
        .chunks(w)
        .map(|block| ctx.sum(block))
        .collect::<Result<Vec<_>>>()?;
    WindowData::new(w, sums)
}

pub fn window_sums<T: Scalar + Finite>(sequence: &[T], w: usize, k: usize) -> Result<WindowData<T>> {
    window_sums_with(&T::Ctx::default(), sequence, w, k)
}

/// `F_{d,W}(pi)`: the first `2d + 1` window sums of the generated signal.
pub fn window_map_with<A>(ctx: &A, params: &RationalParams<A::Elem>, w: usize) -> Result<Vec<A::Elem>>
where
    A: Arithmetic,
    A::Elem: Finite,
{
    if w == 0 {
        return Err(CertError::Argument("block length W must be at least 1".into()));
    }
    let k = 2 * params.degree() + 1;
    let y = generate_sequence_with(ctx, params, w * k - 1)?;
    Ok(window_sums_with(ctx, &y, w, k)?.into_sums())
}

pub fn window_map<T: Scalar + Finite>(params: &RationalParams<T>, w: usize) -> Result<Vec<T>> {
    window_map_with(&T::Ctx::default(), params, w)
}

/// `y_n = sum_j w_j a_j^n` with rates in (0, 1) and positive weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExponentialMixture<T> {
    rates: Vec<T>,
    weights: Vec<T>,
}

impl<T: Num + Clone + PartialOrd> ExponentialMixture<T> {
    pub fn new(rates: Vec<T>, weights: Vec<T>) -> Result<Self> {
        if rates.is_empty() || rates.len() != weights.len() {
            return Err(CertError::Argument(format!(
                "mixture needs matching nonempty rates and weights, got {} and {}",
                rates.len(),
                weights.len()
            )));
        }
        for (i, a) in rates.iter().enumerate() {
            if a.is_one() {
                return Err(CertError::SingularRate(i));
            }
            if !(*a > T::zero() && *a < T::one()) {
                return Err(CertError::Argument(format!("rate {i} is outside (0, 1)")));
            }
            if rates[..i].iter().any(|b| b == a) {
                return Err(CertError::Argument(format!("rate {i} repeats an earlier rate")));
            }
        }
        if let Some(i) = weights.iter().position(|w| !(*w > T::zero())) {
            return Err(CertError::Argument(format!("weight {i} is not positive")));
        }
        Ok(ExponentialMixture { rates, weights })
    }

    pub fn rates(&self) -> &[T] {
        &self.rates
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.rates.len()
    }
}

/// `y_0..=y_{n_max}` of the mixture.
pub fn mixture_sequence<T: Num + Clone + PartialOrd>(mix: &ExponentialMixture<T>, n_max: usize) -> Vec<T> {
    let mut powers: Vec<T> = mix.weights.clone();
    let mut out = Vec::with_capacity(n_max + 1);
    for _ in 0..=n_max {
        out.push(powers.iter().cloned().fold(T::zero(), |acc, v| acc + v));
        for (p, a) in powers.iter_mut().zip(&mix.rates) {
            *p = p.clone() * a.clone();
        }
    }
    out
}

/// Node/amplitude pairs of the window-sum process of a mixture:
/// `mu_i = a_i^W`, `B_i = w_i (1 - a_i^W)/(1 - a_i)`, evaluated as the finite
/// geometric sum `w_i (1 + a_i + ... + a_i^{W-1})`.
pub fn mixture_window_params<T: Num + Clone + PartialOrd>(
    mix: &ExponentialMixture<T>,
    w: usize,
) -> Result<(Vec<T>, Vec<T>)> {
    if w == 0 {
        return Err(CertError::Argument("block length W must be at least 1".into()));
    }
    if let Some(i) = mix.rates.iter().position(|a| a.is_one()) {
        return Err(CertError::SingularRate(i));
    }
    let mut nodes = Vec::with_capacity(mix.order());
    let mut amps = Vec::with_capacity(mix.order());
    for (a, wt) in mix.rates.iter().zip(&mix.weights) {
        let mut power = T::one();
        let mut geometric = T::zero();
        for _ in 0..w {
            geometric = geometric + power.clone();
            power = power * a.clone();
        }
        nodes.push(power);
        amps.push(wt.clone() * geometric);
    }
    Ok((nodes, amps))
}

/// `S_k = sum_i B_i mu_i^k` for `k < count`.
pub fn exponential_sums<T: Num + Clone>(nodes: &[T], amplitudes: &[T], count: usize) -> Vec<T> {
    let mut powers: Vec<T> = amplitudes.to_vec();
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        out.push(powers.iter().cloned().fold(T::zero(), |acc, v| acc + v));
        for (p, mu) in powers.iter_mut().zip(nodes) {
            *p = p.clone() * mu.clone();
        }
    }
    out
}
