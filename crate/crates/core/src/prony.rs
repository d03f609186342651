//! Reconstruction of an exponential sum `S_k = sum_i A_i mu_i^k` from its
//! first `2d` values: Hankel solve for the characteristic polynomial, roots,
//! then a Vandermonde solve for the amplitudes.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::linalg::{condition_number, realify, singular_values, solve, Matrix};
use crate::signal::WindowData;

/// Diagnostics attached to reconstructions and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Flag {
    HankelSingular,
    RepeatedNodes,
    ZeroNode,
    ZeroAmplitude,
    /// Some node has a non-negligible imaginary part. Reported, not degenerate.
    ComplexNodes,
    /// A reconstructed sample needed under a logarithm is not positive.
    NonPositive,
    /// The model's windows do not match a constant realization within tolerance.
    NeutralInconsistent,
}

impl Flag {
    /// Flags that place the input on the degenerate locus of the reconstruction.
    pub fn is_degenerate(self) -> bool {
        matches!(
            self,
            Flag::HankelSingular | Flag::RepeatedNodes | Flag::ZeroNode | Flag::ZeroAmplitude
        )
    }

    pub fn name(self) -> &'static str {
        match self {
            Flag::HankelSingular => "hankel_singular",
            Flag::RepeatedNodes => "repeated_nodes",
            Flag::ZeroNode => "zero_node",
            Flag::ZeroAmplitude => "zero_amplitude",
            Flag::ComplexNodes => "complex_nodes",
            Flag::NonPositive => "non_positive",
            Flag::NeutralInconsistent => "neutral_inconsistent",
        }
    }
}

/// Numerical thresholds; all relative to the largest magnitude involved.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PronyConfig {
    pub hankel_pivot: f64,
    pub node_separation: f64,
    pub zero_node: f64,
    pub zero_amplitude: f64,
    pub imaginary: f64,
    pub newton_iterations: usize,
}

impl Default for PronyConfig {
    fn default() -> Self {
        PronyConfig {
            hankel_pivot: 1e-12,
            node_separation: 1e-8,
            zero_node: 1e-12,
            zero_amplitude: 1e-10,
            imaginary: 1e-8,
            newton_iterations: 2,
        }
    }
}

/// Serializes non-finite floats as `null` and reads `null` back as +inf.
pub(crate) mod finite_or_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_none()
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::INFINITY))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PronyModel {
    /// Sorted by descending modulus, then real part, then imaginary part.
    pub nodes: Vec<Complex64>,
    pub amplitudes: Vec<Complex64>,
    /// `a_1..a_d` of the monic `t^d + a_1 t^{d-1} + ... + a_d`.
    pub char_coeffs: Vec<f64>,
    #[serde(with = "finite_or_null")]
    pub hankel_condition: f64,
    #[serde(with = "finite_or_null")]
    pub vandermonde_condition: f64,
    pub flags: BTreeSet<Flag>,
}

impl PronyModel {
    pub fn degree(&self) -> usize {
        self.char_coeffs.len()
    }

    pub fn is_degenerate(&self) -> bool {
        self.flags.iter().any(|f| f.is_degenerate())
    }

    pub fn has_real_nodes(&self) -> bool {
        !self.flags.contains(&Flag::ComplexNodes)
    }

    /// `sum_i A_i mu_i^k` for `k < count` (real part).
    pub fn window_sums(&self, count: usize) -> Vec<f64> {
        let mut powers = self.amplitudes.clone();
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            out.push(powers.iter().map(|z| z.re).sum());
            for (p, mu) in powers.iter_mut().zip(&self.nodes) {
                *p *= mu;
            }
        }
        out
    }
}

/// Result of the Hankel step.
#[derive(Debug, Clone, PartialEq)]
pub struct RecurrenceFit {
    pub coeffs: Vec<f64>,
    pub hankel_condition: f64,
    pub singular: bool,
}

fn require_windows(sums: &[f64], d: usize) -> Result<()> {
    if d == 0 {
        return Err(CertError::Argument("model order d must be at least 1".into()));
    }
    if sums.len() < 2 * d {
        return Err(CertError::InsufficientData {
            needed: 2 * d,
            got: sums.len(),
        });
    }
    Ok(())
}

/// Solves `sum_m a_m S_{k+d-m} = -S_{k+d}` for `k < d`.
pub fn solve_recurrence_coeffs(sums: &[f64], d: usize, cfg: &PronyConfig) -> Result<RecurrenceFit> {
    require_windows(sums, d)?;
    let hankel = Matrix::from_fn(d, d, |i, j| sums[i + j]);
    let hankel_condition = condition_number(&hankel);
    let system = Matrix::from_fn(d, d, |k, m| sums[k + d - (m + 1)]);
    let rhs: Vec<f64> = (0..d).map(|k| -sums[k + d]).collect();
    let (coeffs, singular) = match solve(&system, &rhs) {
        Ok(s) => {
            let singular = s.pivot_ratio() < cfg.hankel_pivot || s.solution.iter().any(|v| !v.is_finite());
            (s.solution, singular)
        }
        Err(CertError::Degenerate(_)) => (vec![0.0; d], true),
        Err(e) => return Err(e),
    };
    Ok(RecurrenceFit {
        coeffs,
        hankel_condition,
        singular,
    })
}

fn horner(coeffs: &[f64], z: Complex64) -> (Complex64, Complex64) {
    let mut p = Complex64::new(1.0, 0.0);
    let mut dp = Complex64::new(0.0, 0.0);
    for &a in coeffs {
        dp = dp * z + p;
        p = p * z + a;
    }
    (p, dp)
}

fn node_order(a: &Complex64, b: &Complex64) -> Ordering {
    b.norm()
        .total_cmp(&a.norm())
        .then(b.re.total_cmp(&a.re))
        .then(b.im.total_cmp(&a.im))
}

fn min_separation(nodes: &[Complex64]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..nodes.len() {
        for j in i + 1..nodes.len() {
            best = best.min((nodes[i] - nodes[j]).norm());
        }
    }
    best
}

fn max_modulus(values: &[Complex64]) -> f64 {
    values.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Roots of `t^d + a_1 t^{d-1} + ... + a_d` via the companion matrix, each
/// polished by Newton steps, in canonical order, with node diagnostics.
pub fn char_roots(coeffs: &[f64], cfg: &PronyConfig) -> Result<(Vec<Complex64>, BTreeSet<Flag>)> {
    let d = coeffs.len();
    if d == 0 {
        return Err(CertError::Argument("characteristic polynomial of degree 0".into()));
    }
    if coeffs.iter().any(|a| !a.is_finite()) {
        return Err(CertError::Domain("characteristic coefficients must be finite".into()));
    }
    let companion = DMatrix::from_fn(d, d, |r, c| {
        if r == 0 {
            -coeffs[c]
        } else if r == c + 1 {
            1.0
        } else {
            0.0
        }
    });
    let mut roots: Vec<Complex64> = companion.complex_eigenvalues().iter().copied().collect();
    for z in roots.iter_mut() {
        for _ in 0..cfg.newton_iterations {
            let (p, dp) = horner(coeffs, *z);
            if dp.norm() == 0.0 || !dp.is_finite() {
                break;
            }
            let next = *z - p / dp;
            if next.is_finite() && horner(coeffs, next).0.norm() <= p.norm() {
                *z = next;
            } else {
                break;
            }
        }
    }
    let mut flags = BTreeSet::new();
    for z in roots.iter_mut() {
        if z.im.abs() <= cfg.imaginary * z.norm() {
            z.im = 0.0;
        } else {
            flags.insert(Flag::ComplexNodes);
        }
    }
    roots.sort_by(node_order);
    let scale = max_modulus(&roots);
    if d > 1 && min_separation(&roots) < cfg.node_separation * scale {
        flags.insert(Flag::RepeatedNodes);
    }
    let smallest = roots.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if scale == 0.0 || smallest < cfg.zero_node * scale {
        flags.insert(Flag::ZeroNode);
    }
    Ok((roots, flags))
}

/// Amplitudes from `S_k = sum_i A_i mu_i^k`, `k < d`, plus the Vandermonde condition number.
pub fn solve_amplitudes(
    sums: &[f64],
    nodes: &[Complex64],
    cfg: &PronyConfig,
) -> Result<(Vec<Complex64>, f64, BTreeSet<Flag>)> {
    let d = nodes.len();
    if d == 0 {
        return Err(CertError::Argument("no nodes supplied".into()));
    }
    if sums.len() < d {
        return Err(CertError::InsufficientData { needed: d, got: sums.len() });
    }
    if d > 1 && min_separation(nodes) < cfg.node_separation * max_modulus(nodes) {
        return Err(CertError::Degenerate("repeated nodes make the Vandermonde system singular".into()));
    }
    let vander = Matrix::from_fn(d, d, |k, i| nodes[i].powu(k as u32));
    let rhs: Vec<Complex64> = sums[..d].iter().map(|&s| Complex64::new(s, 0.0)).collect();
    let mut amps = solve(&vander, &rhs)?.solution;
    let real_nodes = nodes.iter().all(|z| z.im == 0.0);
    for a in amps.iter_mut() {
        if real_nodes || a.im.abs() <= cfg.imaginary * a.norm() {
            a.im = 0.0;
        }
    }
    let sv = singular_values(&realify(&vander), crate::linalg::JACOBI_SWEEPS);
    let cond = match (sv.first(), sv.last()) {
        (Some(&hi), Some(&lo)) if lo > 0.0 => hi / lo,
        _ => f64::INFINITY,
    };
    let mut flags = BTreeSet::new();
    let top = max_modulus(&amps);
    let bottom = amps.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if top == 0.0 || bottom < cfg.zero_amplitude * top {
        flags.insert(Flag::ZeroAmplitude);
    }
    Ok((amps, cond, flags))
}

pub fn prony_reconstruct(windows: &WindowData<f64>, d: usize) -> Result<PronyModel> {
    prony_reconstruct_with(windows.sums(), d, &PronyConfig::default())
}

/// Full reconstruction from `S_0..S_{2d-1}`; later sums are ignored.
/// Degeneracy is reported through flags, never as an error.
pub fn prony_reconstruct_with(sums: &[f64], d: usize, cfg: &PronyConfig) -> Result<PronyModel> {
    require_windows(sums, d)?;
    let sums = &sums[..2 * d];
    let fit = solve_recurrence_coeffs(sums, d, cfg)?;
    let mut model = PronyModel {
        nodes: Vec::new(),
        amplitudes: Vec::new(),
        char_coeffs: fit.coeffs,
        hankel_condition: fit.hankel_condition,
        vandermonde_condition: f64::INFINITY,
        flags: BTreeSet::new(),
    };
    if fit.singular {
        model.flags.insert(Flag::HankelSingular);
        return Ok(model);
    }
    let (nodes, flags) = char_roots(&model.char_coeffs, cfg)?;
    model.flags.extend(flags);
    model.nodes = nodes;
    if model.flags.contains(&Flag::RepeatedNodes) {
        return Ok(model);
    }
    let (amps, cond, flags) = solve_amplitudes(sums, &model.nodes, cfg)?;
    model.amplitudes = amps;
    model.vandermonde_condition = cond;
    model.flags.extend(flags);
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signal::{exponential_sums, mixture_window_params, ExponentialMixture};
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const RATES: [f64; 3] = [0.831127, 0.872789, 0.853477];
    const WEIGHTS: [f64; 3] = [0.522164, 0.195934, 0.281902];

    fn cfg() -> PronyConfig {
        PronyConfig::default()
    }

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    /// Coefficients of prod (t - r_i), highest power first, leading 1 dropped.
    fn expand(roots: &[f64]) -> Vec<f64> {
        let mut poly = vec![1.0];
        for &r in roots {
            let mut next = vec![0.0; poly.len() + 1];
            for (i, &c) in poly.iter().enumerate() {
                next[i] += c;
                next[i + 1] -= r * c;
            }
            poly = next;
        }
        poly[1..].to_vec()
    }

    fn case_a_windows(k: usize) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let mix = ExponentialMixture::new(RATES.to_vec(), WEIGHTS.to_vec()).unwrap();
        let (mu, b) = mixture_window_params(&mix, 8).unwrap();
        (exponential_sums(&mu, &b, k), mu, b)
    }

    #[test]
    fn geometric_first_order() {
        let sums: Vec<f64> = (0..6).map(|k| 2f64.powi(k)).collect();
        let fit = solve_recurrence_coeffs(&sums, 1, &cfg()).unwrap();
        assert_eq!(fit.coeffs, vec![-2.0]);
        let m = prony_reconstruct_with(&[3.0, 1.5, 0.75, 0.375], 1, &cfg()).unwrap();
        assert_eq!(m.nodes, vec![Complex64::new(0.5, 0.0)]);
        assert_eq!(m.amplitudes, vec![Complex64::new(3.0, 0.0)]);
        assert!(m.flags.is_empty());
    }

    #[test]
    fn case_a_characteristic_polynomial() {
        let (sums, mu, _) = case_a_windows(6);
        let fit = solve_recurrence_coeffs(&sums, 3, &cfg()).unwrap();
        for (got, want) in fit.coeffs.iter().zip(expand(&mu)) {
            assert!(rel(*got, want) < 1e-6, "{got} vs {want}");
        }
    }

    #[test]
    fn zero_and_rank_deficient_windows_are_singular() {
        let fit = solve_recurrence_coeffs(&[0.0; 4], 2, &cfg()).unwrap();
        assert!(fit.singular);
        let m = prony_reconstruct_with(&[1.0, 2.0, 4.0, 8.0], 2, &cfg()).unwrap();
        assert!(m.flags.contains(&Flag::HankelSingular));
        assert!(m.is_degenerate());
    }

    #[test]
    fn insufficient_windows() {
        assert_eq!(
            solve_recurrence_coeffs(&[1.0; 5], 3, &cfg()),
            Err(CertError::InsufficientData { needed: 6, got: 5 })
        );
    }

    #[test]
    fn root_examples() {
        let (r, f) = char_roots(&[-2.0], &cfg()).unwrap();
        assert_eq!(r, vec![Complex64::new(2.0, 0.0)]);
        assert!(f.is_empty());
        let (r, _) = char_roots(&[-5.0, 6.0], &cfg()).unwrap();
        assert!((r[0].re - 3.0).abs() < 1e-14 && (r[1].re - 2.0).abs() < 1e-14);
        assert!(char_roots(&[], &cfg()).is_err());
        let (_, f) = char_roots(&[-2.0, 1.0], &cfg()).unwrap();
        assert!(f.contains(&Flag::RepeatedNodes));
        let (_, f) = char_roots(&[-1.0, 0.0], &cfg()).unwrap();
        assert!(f.contains(&Flag::ZeroNode));
        let (r, f) = char_roots(&[0.0, 1.0], &cfg()).unwrap();
        assert!(f.contains(&Flag::ComplexNodes));
        assert_eq!(r[0].im, 1.0);
    }

    #[test]
    fn roots_reproduce_the_polynomial() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        for _ in 0..200 {
            let d = rng.random_range(1..=6);
            let coeffs: Vec<f64> = (0..d).map(|_| rng.random_range(-2.0..2.0)).collect();
            let (roots, _) = char_roots(&coeffs, &cfg()).unwrap();
            let mut poly = vec![Complex64::new(1.0, 0.0)];
            for r in &roots {
                let mut next = vec![Complex64::new(0.0, 0.0); poly.len() + 1];
                for (i, c) in poly.iter().enumerate() {
                    next[i] += c;
                    next[i + 1] -= r * c;
                }
                poly = next;
            }
            let scale = coeffs.iter().fold(1.0_f64, |m, a| m.max(a.abs()));
            for (got, want) in poly[1..].iter().zip(&coeffs) {
                assert!((got - want).norm() <= 1e-8 * scale, "{got} vs {want}");
            }
        }
    }

    #[test]
    fn case_a_roots_are_rate_powers() {
        let (sums, mu, _) = case_a_windows(6);
        let fit = solve_recurrence_coeffs(&sums, 3, &cfg()).unwrap();
        let (roots, flags) = char_roots(&fit.coeffs, &cfg()).unwrap();
        assert!(flags.is_empty());
        let mut expect = mu.clone();
        expect.sort_by(|a, b| b.total_cmp(a));
        for (r, e) in roots.iter().zip(&expect) {
            assert!(rel(r.re, *e) < 1e-6);
        }
    }

    #[test]
    fn amplitude_examples() {
        let one = [Complex64::new(2.0, 0.0)];
        let (a, _, _) = solve_amplitudes(&[1.0, 2.0, 4.0], &one, &cfg()).unwrap();
        assert_eq!(a, vec![Complex64::new(1.0, 0.0)]);
        let two = [Complex64::new(2.0, 0.0), Complex64::new(1.0, 0.0)];
        let (a, _, _) = solve_amplitudes(&[5.0, 8.0], &two, &cfg()).unwrap();
        assert!((a[0].re - 3.0).abs() < 1e-14 && (a[1].re - 2.0).abs() < 1e-14);
        let same = [Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0)];
        assert!(matches!(solve_amplitudes(&[1.0, 1.0], &same, &cfg()), Err(CertError::Degenerate(_))));
        let (_, _, f) = solve_amplitudes(&[1.0, 2.0], &two, &cfg()).unwrap();
        assert!(f.contains(&Flag::ZeroAmplitude));
    }

    #[test]
    fn case_a_noiseless_reconstruction() {
        let (sums, mu, b) = case_a_windows(12);
        let m = prony_reconstruct_with(&sums, 3, &cfg()).unwrap();
        assert!(m.flags.is_empty(), "{:?}", m.flags);
        let mut pairs: Vec<(f64, f64)> = mu.into_iter().zip(b).collect();
        pairs.sort_by(|x, y| y.0.total_cmp(&x.0));
        for (i, (node, amp)) in pairs.iter().enumerate() {
            assert!(rel(m.nodes[i].re, *node) < 1e-8, "node {i}");
            assert!(rel(m.amplitudes[i].re, *amp) < 1e-8, "amp {i}");
        }
        for (got, want) in m.window_sums(12).iter().zip(&sums) {
            assert!(rel(*got, *want) < 1e-6);
        }
    }

    #[test]
    fn extra_windows_do_not_change_the_model() {
        let (sums, _, _) = case_a_windows(12);
        let short = prony_reconstruct_with(&sums[..6], 3, &cfg()).unwrap();
        let long = prony_reconstruct_with(&sums, 3, &cfg()).unwrap();
        assert_eq!(short, long);
    }

    #[test]
    fn hankel_determinant_factorization() {
        let (sums, mu, b) = case_a_windows(6);
        let h = Matrix::from_fn(3, 3, |i, j| sums[i + j]);
        let det = crate::linalg::determinant(&h).unwrap();
        let mut v = 1.0;
        for i in 0..3 {
            for j in i + 1..3 {
                v *= mu[j] - mu[i];
            }
        }
        let formula = v * v * b.iter().product::<f64>();
        assert!(rel(det, formula) < 1e-6, "{det} vs {formula}");
    }

    fn random_instance(rng: &mut ChaCha8Rng, d: usize) -> (Vec<f64>, Vec<f64>) {
        let nodes = loop {
            let mu: Vec<f64> = (0..d)
                .map(|_| rng.random_range(0.1..0.9) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
                .collect();
            let ok = (0..d).all(|i| (i + 1..d).all(|j| (mu[i] - mu[j]).abs() >= 0.05));
            if ok {
                break mu;
            }
        };
        let amps = (0..d)
            .map(|_| rng.random_range(0.5..2.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 })
            .collect();
        (nodes, amps)
    }

    #[test]
    fn random_round_trips() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for trial in 0..1000 {
            let d = 1 + trial % 3;
            let (mu, a) = random_instance(&mut rng, d);
            let sums = exponential_sums(&mu, &a, 2 * d);
            let m = prony_reconstruct_with(&sums, d, &cfg()).unwrap();
            assert!(!m.is_degenerate(), "trial {trial}: {:?}", m.flags);
            let mut pairs: Vec<(f64, f64)> = mu.iter().copied().zip(a.iter().copied()).collect();
            pairs.sort_by(|x, y| y.0.abs().total_cmp(&x.0.abs()).then(y.0.total_cmp(&x.0)));
            for (i, (node, amp)) in pairs.iter().enumerate() {
                assert!(rel(m.nodes[i].re, *node) < 1e-6, "trial {trial} node {i}");
                assert!(rel(m.amplitudes[i].re, *amp) < 1e-6, "trial {trial} amp {i}");
            }
        }
    }

    #[test]
    fn permuted_inputs_give_identical_models() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..50 {
            let (mu, a) = random_instance(&mut rng, 3);
            let reference = prony_reconstruct_with(&exponential_sums(&mu, &a, 6), 3, &cfg()).unwrap();
            let mut idx: Vec<usize> = (0..3).collect();
            idx.shuffle(&mut rng);
            let pm: Vec<f64> = idx.iter().map(|&i| mu[i]).collect();
            let pa: Vec<f64> = idx.iter().map(|&i| a[i]).collect();
            let permuted = prony_reconstruct_with(&exponential_sums(&pm, &pa, 6), 3, &cfg()).unwrap();
            assert_eq!(permuted.nodes.len(), reference.nodes.len());
            for (x, y) in permuted.nodes.iter().zip(&reference.nodes) {
                assert!((x - y).norm() <= 1e-12 * x.norm().max(1.0));
            }
        }
    }

    #[test]
    fn model_json_has_snake_case_flags() {
        let m = prony_reconstruct_with(&[0.0; 4], 2, &cfg()).unwrap();
        let v = serde_json::to_value(&m).unwrap();
        assert_eq!(v["flags"][0], "hankel_singular");
        assert!(v["vandermonde_condition"].is_null());
        let back: PronyModel = serde_json::from_value(v).unwrap();
        assert_eq!(back.flags, m.flags);
    }
}
