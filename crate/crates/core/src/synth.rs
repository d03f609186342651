//! Case-study fixtures, noise injection and the collision construction.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::signal::{
    exponential_sums, generate_sequence, mixture_sequence, mixture_window_params, ExponentialMixture,
    RationalParams, WindowData,
};

/// A published case study: the generating mixture plus its printed window columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyFixture {
    pub label: String,
    pub d: usize,
    #[serde(rename = "W")]
    pub block_length: usize,
    pub mixture: ExponentialMixture<f64>,
    /// Noise-free windows: the printed column where one exists, else recomputed.
    pub true_windows: Vec<f64>,
    /// Printed noisy windows, stored verbatim.
    pub observed_windows: Vec<f64>,
    /// Standard deviation of the multiplicative noise.
    pub noise_level: f64,
}

impl CaseStudyFixture {
    /// Noise-free windows evaluated from the mixture via the block-sum identity.
    pub fn recomputed_windows(&self) -> Vec<f64> {
        let (mu, b) = mixture_window_params(&self.mixture, self.block_length)
            .expect("fixture mixtures have rates below 1 and W >= 1");
        exponential_sums(&mu, &b, self.observed_windows.len())
    }

    pub fn observed(&self) -> WindowData<f64> {
        WindowData::new(self.block_length, self.observed_windows.clone()).expect("fixture windows are finite")
    }

    pub fn noiseless(&self) -> WindowData<f64> {
        WindowData::new(self.block_length, self.recomputed_windows()).expect("fixture windows are finite")
    }
}

pub fn case_a_fixture() -> CaseStudyFixture {
    CaseStudyFixture {
        label: "case-a".into(),
        d: 3,
        block_length: 8,
        mixture: ExponentialMixture::new(vec![0.831127, 0.872789, 0.853477], vec![0.522164, 0.195934, 0.281902])
            .expect("valid mixture"),
        true_windows: vec![
            4.791914, 1.276888, 0.349197, 0.098038, 0.028236, 0.008329, 0.002510, 7.71e-04, 2.41e-04, 7.61e-05,
            2.44e-05, 7.87e-06,
        ],
        observed_windows: vec![
            4.754830, 1.303021, 0.351327, 0.097663, 0.028026, 0.008326, 0.002474, 7.69e-04, 2.41e-04, 7.78e-05,
            2.42e-05, 7.93e-06,
        ],
        noise_level: 0.01,
    }
}

pub fn case_b_fixture() -> CaseStudyFixture {
    let mut f = CaseStudyFixture {
        label: "case-b".into(),
        d: 2,
        block_length: 6,
        mixture: ExponentialMixture::new(vec![0.904182, 0.877627], vec![0.801912, 0.198088]).expect("valid mixture"),
        true_windows: Vec::new(),
        observed_windows: vec![4.578368, 2.433641, 1.304007, 0.686328, 0.380817, 0.197523, 0.104636, 0.060241],
        noise_level: 0.02,
    };
    f.true_windows = f.recomputed_windows();
    f
}

/// Shape-only preset for the third case study; no published numbers exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CasePreset {
    pub d: usize,
    #[serde(rename = "W")]
    pub block_length: usize,
}

pub const CASE_C: CasePreset = CasePreset { d: 3, block_length: 10 };

/// `out_k = S_k (1 + level g_k)`, with `g_k` standard normal from ChaCha8
/// seeded by `seed`, via the Box–Muller transform (one pair per two outputs).
pub fn add_multiplicative_noise(sums: &[f64], level: f64, seed: u64) -> Result<Vec<f64>> {
    if !(level.is_finite() && level >= 0.0) {
        return Err(CertError::Domain(format!("noise level must be nonnegative, got {level}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut spare: Option<f64> = None;
    let mut normal = move || {
        if let Some(z) = spare.take() {
            return z;
        }
        // u1 in (0, 1] keeps the logarithm finite
        let u1 = 1.0 - rng.random::<f64>();
        let u2 = rng.random::<f64>();
        let r = (-2.0 * u1.ln()).sqrt();
        let theta = std::f64::consts::TAU * u2;
        spare = Some(r * theta.sin());
        r * theta.cos()
    };
    Ok(sums.iter().map(|&s| s * (1.0 + level * normal())).collect())
}

/// Two sequences with identical first `K + 1` windows; `y_out` adds 1 at
/// indices `N + m^2`, `m >= 1`, where `N = W(K+1) - 1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollisionPair {
    pub y_in: Vec<f64>,
    pub y_out: Vec<f64>,
    #[serde(rename = "N")]
    pub last_observed: usize,
}

impl CollisionPair {
    pub fn bump_indices(&self) -> Vec<usize> {
        (1..)
            .map(|m: usize| self.last_observed + m * m)
            .take_while(|&i| i < self.y_out.len())
            .collect()
    }
}

/// Prefix length used for a degree-`d` collision: enough squares that
/// consecutive bumps are more than `d` apart.
fn collision_length(n: usize, d: usize) -> usize {
    n + (d + 4) * (d + 4) + 1
}

fn collide(y_in: Vec<f64>, n: usize) -> Result<CollisionPair> {
    if let Some(i) = y_in.iter().position(|v| !(*v >= 0.0)) {
        return Err(CertError::AmbientClass(i));
    }
    let mut y_out = y_in.clone();
    let mut m = 1;
    while n + m * m < y_out.len() {
        y_out[n + m * m] += 1.0;
        m += 1;
    }
    Ok(CollisionPair {
        y_in,
        y_out,
        last_observed: n,
    })
}

fn last_observed(w: usize, k: usize) -> Result<usize> {
    if w == 0 {
        return Err(CertError::Argument("block length W must be at least 1".into()));
    }
    Ok(w * (k + 1) - 1)
}

pub fn collision_pair(base: &ExponentialMixture<f64>, d: usize, w: usize, k: usize) -> Result<CollisionPair> {
    let n = last_observed(w, k)?;
    collide(mixture_sequence(base, collision_length(n, d) - 1), n)
}

pub fn collision_pair_from_params(base: &RationalParams<f64>, w: usize, k: usize) -> Result<CollisionPair> {
    let n = last_observed(w, k)?;
    let len = collision_length(n, base.degree()).max(base.degree() + 1);
    collide(generate_sequence(base, len - 1)?, n)
}

/// Euclidean residual of the least-squares fit `y_n + sum_{m<=d} q_m y_{n-m} ~ 0`
/// over `n` in `[start, len)`.
pub fn recurrence_fit_residual(y: &[f64], d: usize, start: usize) -> Result<f64> {
    if d == 0 || start < d || start >= y.len() {
        return Err(CertError::Argument(format!(
            "fit needs 1 <= d <= start < len, got d={d}, start={start}, len={}",
            y.len()
        )));
    }
    let rows = y.len() - start;
    let a = DMatrix::from_fn(rows, d, |r, c| y[start + r - (c + 1)]);
    let b = DVector::from_fn(rows, |r, _| -y[start + r]);
    let svd = a.clone().svd(true, true);
    let q = svd
        .solve(&b, 1e-14)
        .map_err(|e| CertError::Degenerate(format!("least-squares solve failed: {e}")))?;
    Ok((a * q - b).norm())
}
