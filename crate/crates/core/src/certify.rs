//! The decision layer: reconstruct, project, evaluate the coercive
//! certificate value and compare it against an ε-tolerant threshold; plus
//! meaning sets and candidate ranking under noisy ratios.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::cost::{cost, tolerance_epsilon, RatioBand};
use crate::error::{CertError, Result};
use crate::linalg::{inverse, singular_values, Matrix, JACOBI_SWEEPS};
use crate::loggeom::{certificate_value, project_mean_zero, LogVector};
use crate::prony::{prony_reconstruct_with, Flag, PronyConfig, PronyModel};
use crate::rank_cert::jacobian;
use crate::scalar::{compensated_norm, Real};
use crate::signal::{RationalParams, WindowData};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Decision {
    Zero,
    Nonzero,
    Inconclusive,
}

impl Decision {
    pub fn name(self) -> &'static str {
        match self {
            Decision::Zero => "zero",
            Decision::Nonzero => "nonzero",
            Decision::Inconclusive => "inconclusive",
        }
    }
}

/// Outcome of [`pipeline`]. Quantities that were never reached (for example
/// everything after a degenerate reconstruction) are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertReport {
    pub decision: Decision,
    pub certificate_value: Option<f64>,
    pub defect: Option<f64>,
    pub threshold: Option<f64>,
    pub eps_bound: Option<f64>,
    #[serde(rename = "L")]
    pub lipschitz: Option<f64>,
    pub flags: BTreeSet<Flag>,
    pub model: Option<PronyModel>,
    /// Log of the reconstructed configuration, before projection.
    #[serde(skip)]
    pub log_config: Option<LogVector<f64>>,
}

impl CertReport {
    fn inconclusive(flags: BTreeSet<Flag>, model: Option<PronyModel>) -> Self {
        CertReport {
            decision: Decision::Inconclusive,
            certificate_value: None,
            defect: None,
            threshold: None,
            eps_bound: None,
            lipschitz: None,
            flags,
            model,
            log_config: None,
        }
    }
}

/// `(1/2) exp(L sqrt(K) eps0) L^2 K eps^2`, valid for `eps <= eps0`.
pub fn eps_bound(l: f64, k: usize, eps0: f64, eps: f64) -> Result<f64> {
    if !(l.is_finite() && l >= 0.0) || !(eps0.is_finite() && eps0 > 0.0) || !(eps >= 0.0) {
        return Err(CertError::Domain(format!(
            "eps_bound needs L >= 0, eps0 > 0, eps >= 0; got L={l}, eps0={eps0}, eps={eps}"
        )));
    }
    if eps > eps0 {
        return Err(CertError::OutOfRegime { eps, eps0 });
    }
    if eps == 0.0 {
        return Ok(0.0);
    }
    let k = k as f64;
    Ok(0.5 * (l * k.sqrt() * eps0).exp() * l * l * k * eps * eps)
}

/// `||M^{-1}||_2`, as the largest singular value of the pivoted-LU inverse.
///
/// Window-map Jacobians are strongly row-graded; inverting first keeps the
/// small singular values of `M` accurate where a direct SVD loses them.
pub fn inverse_operator_norm(m: &Matrix<f64>) -> Result<f64> {
    if !m.is_square() || m.rows() == 0 {
        return Err(CertError::Argument("inverse norm needs a nonempty square matrix".into()));
    }
    let inv = inverse(m)?;
    let norm = singular_values(&inv, JACOBI_SWEEPS)[0];
    if !norm.is_finite() {
        return Err(CertError::Degenerate("Jacobian is singular to working precision".into()));
    }
    Ok(norm)
}

/// Operator norm of the inverse window-map Jacobian at `params`.
pub fn estimate_lipschitz(params: &RationalParams<f64>, w: usize) -> Result<f64> {
    inverse_operator_norm(&jacobian(params, w)?)
}

/// Zero iff `B(u) <= threshold`; never inconclusive at this layer.
pub fn decide_certificate<F: Real>(u: &LogVector<F>, threshold: F) -> Decision {
    if certificate_value(u) <= threshold {
        Decision::Zero
    } else {
        Decision::Nonzero
    }
}

/// Projects a log configuration and decides; blind to global shifts.
pub fn decide_configuration<F: Real>(log_config: &LogVector<F>, threshold: F) -> Decision {
    decide_certificate(&project_mean_zero(log_config), threshold)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CertifyConfig {
    pub eps0: f64,
    pub prony: PronyConfig,
    /// Relative step of the central differences behind the Lipschitz estimate.
    pub lipschitz_step: f64,
    /// Added to the threshold to absorb floating-point roundoff.
    pub roundoff_floor: f64,
    /// Relative slack of the neutral-consistency test.
    pub neutral_slack: f64,
}

impl Default for CertifyConfig {
    fn default() -> Self {
        CertifyConfig {
            eps0: 1e-2,
            prony: PronyConfig::default(),
            lipschitz_step: 1e-6,
            roundoff_floor: 1e-20,
            neutral_slack: 1e-9,
        }
    }
}

/// Per-sample values `y_n = sum_i w_i a_i^n`, `n < horizon`, of the model with
/// `a_i = mu_i^{1/W}`. `None` unless every node is real and positive and
/// every sample is positive.
pub fn positive_realization(model: &PronyModel, w: usize, horizon: usize) -> Option<Vec<f64>> {
    if model.nodes.is_empty() || model.nodes.iter().any(|z| z.im != 0.0 || !(z.re > 0.0)) {
        return None;
    }
    let mut terms = Vec::with_capacity(model.nodes.len());
    for (mu, amp) in model.nodes.iter().zip(&model.amplitudes) {
        let a = mu.re.powf(1.0 / w as f64);
        let block: f64 = (0..w).map(|j| a.powi(j as i32)).sum();
        terms.push((a, amp.re / block));
    }
    let mut y = Vec::with_capacity(horizon);
    for n in 0..horizon {
        let v: f64 = terms.iter().map(|&(a, wt)| wt * a.powi(n as i32)).sum();
        if !(v.is_finite() && v > 0.0) {
            return None;
        }
        y.push(v);
    }
    Some(y)
}

enum Realized {
    Log(LogVector<f64>, PronyModel),
    Failed(BTreeSet<Flag>, PronyModel),
}

fn realize(sums: &[f64], d: usize, w: usize, horizon: usize, cfg: &CertifyConfig) -> Result<Realized> {
    let model = prony_reconstruct_with(sums, d, &cfg.prony)?;
    if model.is_degenerate() {
        return Ok(Realized::Failed(model.flags.clone(), model));
    }
    match positive_realization(&model, w, horizon) {
        Some(y) => {
            let log = LogVector::new(y.iter().map(|v| v.ln()).collect())?;
            Ok(Realized::Log(log, model))
        }
        None => {
            let mut flags = model.flags.clone();
            flags.insert(Flag::NonPositive);
            Ok(Realized::Failed(flags, model))
        }
    }
}

/// Largest singular value of the central-difference Jacobian of
/// `(S_0..S_{2d-1}) -> P(log y_hat)`; `None` if a perturbed input leaves the
/// nondegenerate positive locus.
fn realized_lipschitz(sums: &[f64], d: usize, w: usize, horizon: usize, cfg: &CertifyConfig) -> Result<Option<f64>> {
    let used = &sums[..2 * d];
    let scale = used.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    let mut columns = Vec::with_capacity(2 * d);
    for j in 0..2 * d {
        let h = cfg.lipschitz_step * if used[j] != 0.0 { used[j].abs() } else { scale };
        let eval = |sign: f64| -> Result<Option<Vec<f64>>> {
            let mut s = used.to_vec();
            s[j] += sign * h;
            Ok(match realize(&s, d, w, horizon, cfg)? {
                Realized::Log(l, _) => Some(project_mean_zero(&l).into_inner()),
                Realized::Failed(..) => None,
            })
        };
        let (Some(plus), Some(minus)) = (eval(1.0)?, eval(-1.0)?) else {
            return Ok(None);
        };
        columns.push(plus.iter().zip(&minus).map(|(p, m)| (p - m) / (2.0 * h)).collect::<Vec<f64>>());
    }
    let jac = Matrix::from_fn(horizon, 2 * d, |r, c| columns[c][r]);
    Ok(singular_values(&jac, JACOBI_SWEEPS).first().copied())
}

/// `A`, then `P`, then `B` over window data with declared sup-norm noise
/// `noise_eps` on the windows.
pub fn pipeline(windows: &WindowData<f64>, d: usize, noise_eps: f64, cfg: &CertifyConfig) -> Result<CertReport> {
    // reject out-of-regime noise before doing any work
    eps_bound(0.0, 1, cfg.eps0, noise_eps)?;
    let sums = windows.sums();
    let w = windows.block_length();
    let k = windows.count();
    let horizon = w * k;

    let (log_config, model) = match realize(sums, d, w, horizon, cfg)? {
        Realized::Log(l, m) => (l, m),
        Realized::Failed(flags, m) => return Ok(CertReport::inconclusive(flags, Some(m))),
    };
    let mut flags = model.flags.clone();
    let u = project_mean_zero(&log_config);
    let value = certificate_value(&u);
    let defect = compensated_norm(u.as_slice());

    let Some(l) = realized_lipschitz(sums, d, w, horizon, cfg)? else {
        flags.insert(Flag::NonPositive);
        return Ok(CertReport::inconclusive(flags, Some(model)));
    };
    let bound = eps_bound(l, k, cfg.eps0, noise_eps)?;
    let threshold = bound + cfg.roundoff_floor;

    let decision = if value > threshold {
        Decision::Nonzero
    } else {
        let model_sums = model.window_sums(k);
        let hi = model_sums.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let lo = model_sums.iter().copied().fold(f64::INFINITY, f64::min);
        let size = hi.abs().max(lo.abs());
        if (hi - lo) / 2.0 <= noise_eps + cfg.neutral_slack * size {
            Decision::Zero
        } else {
            flags.insert(Flag::NeutralInconsistent);
            Decision::Inconclusive
        }
    };
    Ok(CertReport {
        decision,
        certificate_value: Some(value),
        defect: Some(defect),
        threshold: Some(threshold),
        eps_bound: Some(bound),
        lipschitz: Some(l),
        flags,
        model: Some(model),
        log_config: Some(log_config),
    })
}

fn check_costs(costs: &[f64]) -> Result<f64> {
    if costs.is_empty() {
        return Err(CertError::Argument("candidate list is empty".into()));
    }
    if let Some(i) = costs.iter().position(|c| !(c.is_finite() && *c >= 0.0)) {
        return Err(CertError::Domain(format!("cost {i} is not a finite nonnegative number")));
    }
    Ok(costs.iter().copied().fold(f64::INFINITY, f64::min))
}

fn one_ulp(v: f64) -> f64 {
    if v == 0.0 {
        0.0
    } else {
        f64::from_bits(v.to_bits() + 1) - v
    }
}

/// Indices attaining the minimum cost (ties within one ulp included).
pub fn meaning_set(costs: &[f64]) -> Result<Vec<usize>> {
    eps_meaning_set(costs, 0.0)
}

/// `{o : c(o) <= min c + eps}`.
pub fn eps_meaning_set(costs: &[f64], eps: f64) -> Result<Vec<usize>> {
    let min = check_costs(costs)?;
    if !(eps >= 0.0) {
        return Err(CertError::Domain(format!("eps must be nonnegative, got {eps}")));
    }
    let cut = min + eps + one_ulp(min);
    Ok((0..costs.len()).filter(|&i| costs[i] <= cut).collect())
}

/// A state scale, candidate scales, and the band their ratios live in.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostedCandidates {
    state_scale: f64,
    candidate_scales: Vec<f64>,
    band: RatioBand<f64>,
}

impl CostedCandidates {
    pub fn new(state_scale: f64, candidate_scales: Vec<f64>, band: RatioBand<f64>) -> Result<Self> {
        if !(state_scale.is_finite() && state_scale > 0.0) {
            return Err(CertError::Domain("state scale must be positive".into()));
        }
        if candidate_scales.is_empty() {
            return Err(CertError::Argument("candidate list is empty".into()));
        }
        for (index, &o) in candidate_scales.iter().enumerate() {
            if !(o.is_finite() && o > 0.0) {
                return Err(CertError::Domain(format!("candidate scale {index} must be positive")));
            }
            let ratio = state_scale / o;
            if !band.contains(ratio) {
                return Err(CertError::BandViolation {
                    index,
                    ratio,
                    lower: band.lower(),
                    upper: band.upper(),
                });
            }
        }
        Ok(CostedCandidates {
            state_scale,
            candidate_scales,
            band,
        })
    }

    pub fn band(&self) -> &RatioBand<f64> {
        &self.band
    }

    pub fn len(&self) -> usize {
        self.candidate_scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidate_scales.is_empty()
    }

    pub fn ratios(&self) -> Vec<f64> {
        self.candidate_scales.iter().map(|o| self.state_scale / o).collect()
    }

    /// `c(s, o) = J(iota_S(s) / iota_O(o))`.
    pub fn costs(&self) -> Vec<f64> {
        self.ratios().into_iter().map(|r| cost(r).expect("ratios are positive")).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ranking {
    pub best: usize,
    pub guarantee_eps: f64,
}

/// Picks the candidate with the smallest cost of its observed ratio. When
/// every observed ratio is within relative `delta` of the truth, the pick's
/// true cost is within `2 guarantee_eps` of the true minimum.
///
/// Observed ratios may leave the band only by the declared relative error.
pub fn rank_candidates(cands: &CostedCandidates, observed: &[f64], delta: f64) -> Result<Ranking> {
    if observed.len() != cands.len() {
        return Err(CertError::Argument(format!(
            "{} observed ratios for {} candidates",
            observed.len(),
            cands.len()
        )));
    }
    let guarantee_eps = tolerance_epsilon(&cands.band, delta)?;
    let lower = cands.band.lower() * (1.0 - delta).max(0.0);
    let upper = cands.band.upper() * (1.0 + delta);
    let mut best = 0;
    let mut best_cost = f64::INFINITY;
    for (index, &r) in observed.iter().enumerate() {
        if !(r > 0.0 && r >= lower && r <= upper) {
            return Err(CertError::BandViolation { index, ratio: r, lower, upper });
        }
        let c = cost(r)?;
        if c < best_cost {
            best = index;
            best_cost = c;
        }
    }
    Ok(Ranking { best, guarantee_eps })
}
