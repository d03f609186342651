//! Zero-defect certification from W-block window sums.
//!
//! Given finite window aggregates of a positive signal, decide whether the
//! underlying configuration is neutral, provably not neutral, or cannot be
//! resolved. The building blocks:
//!
//! - [`cost`] and [`loggeom`]: the reciprocal cost `J`, its log form and the
//!   coercive certificate value of a mean-zero log vector;
//! - [`signal`]: recurrence-driven signals, window sums and mixtures;
//! - [`rank_cert`] and [`modular`]: exact and F_p Jacobian certificates that
//!   the window map is locally injective;
//! - [`prony`]: node/amplitude recovery from window sums;
//! - [`certify`]: the end-to-end decision with an ε-tolerant threshold;
//! - [`synth`] and [`io`]: fixtures, noise, collisions and file formats.
//!
//! Floating-point code is generic over `f32`/`f64`; sequence, window and
//! Jacobian code additionally runs over overflow-checked integers and prime
//! fields.

pub mod certify;
pub mod cost;
pub mod error;
pub mod io;
pub mod linalg;
pub mod loggeom;
pub mod modular;
pub mod prony;
pub mod rank_cert;
pub mod scalar;
pub mod signal;
pub mod synth;

pub use certify::{
    decide_certificate, decide_configuration, eps_bound, eps_meaning_set, estimate_lipschitz, meaning_set,
    pipeline, rank_candidates, CertReport, CertifyConfig, CostedCandidates, Decision, Ranking,
};
pub use cost::{cost, cost_log, lipschitz_constant, separable_cost, tolerance_epsilon, RatioBand};
pub use error::{CertError, Result};
pub use linalg::Matrix;
pub use loggeom::{certificate_value, defect, project_mean_zero, LogVector, PositiveConfig};
pub use modular::{is_prime, PrimeField, DEFAULT_PRIME};
pub use prony::{prony_reconstruct, Flag, PronyConfig, PronyModel};
pub use rank_cert::{
    certify_witness, certify_witness_modular, det_mod, hankel_witness_det, jacobian, jacobian_mod, search_witness, RankCertificate,
    WITNESS_3_8,
};
pub use scalar::{Arithmetic, Checked, Floating, Real, Scalar};
pub use signal::{
    generate_sequence, mixture_sequence, mixture_window_params, window_map, window_sums, ExponentialMixture,
    RationalParams, WindowData,
};

/// Integer parameter point, evaluated exactly.
pub type ExactParams = RationalParams<i128>;
/// Real parameter point, evaluated in double precision.
pub type RealParams = RationalParams<f64>;
pub type IntegerMatrix = Matrix<i128>;
pub type RealMatrix = Matrix<f64>;
pub type ExactWindows = WindowData<i128>;
pub type RealWindows = WindowData<f64>;
pub type Mixture = ExponentialMixture<f64>;
pub type Band = RatioBand<f64>;
pub type LogVec = LogVector<f64>;
