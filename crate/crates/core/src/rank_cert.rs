//! Identifiability certificates: the Jacobian of the truncated window map by
//! forward derivative propagation, its determinant over F_p, and witness
//! search.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{CertError, Result};
use crate::linalg::{determinant, Matrix};
use crate::modular::PrimeField;
use crate::scalar::{Arithmetic, Checked, Scalar};
use crate::signal::{generate_sequence_with, window_map_with, window_sums_with, Finite, RationalParams};

/// The integer point `(y_0..y_3, q_1..q_3)` certifying full rank at `(d, W) = (3, 8)`.
pub const WITNESS_3_8: [i128; 7] = [1, 1, 5, 1, 2, 2, -2];

/// `DF_{d,W}(params)`: row `k` is the gradient of window sum `k`, columns are
/// ordered `(y_0..y_d, q_1..q_d)`.
///
/// Each column propagates `u^(a)_n = d y_n / d pi_a` through the same
/// recurrence as `y`, with source term `-y_{n-m}` in the column of `q_m`.
pub fn jacobian_with<A>(ctx: &A, params: &RationalParams<A::Elem>, w: usize) -> Result<Matrix<A::Elem>>
where
    A: Arithmetic,
    A::Elem: Finite,
{
    if w == 0 {
        return Err(CertError::Argument("block length W must be at least 1".into()));
    }
    let d = params.degree();
    let n = 2 * d + 1;
    let n_max = w * n - 1;
    let y = generate_sequence_with(ctx, params, n_max)?;
    let q = params.recurrence();

    let mut columns = Vec::with_capacity(n);
    for alpha in 0..n {
        let mut u = vec![ctx.zero(); n_max + 1];
        if alpha <= d {
            u[alpha] = ctx.one();
        }
        let source = alpha.checked_sub(d).filter(|&m| m >= 1);
        for t in d + 1..=n_max {
            let mut acc = ctx.zero();
            for (m, qm) in q.iter().enumerate() {
                acc = ctx.add(&acc, &ctx.mul(qm, &u[t - 1 - m])?)?;
            }
            if let Some(m) = source {
                acc = ctx.add(&acc, &y[t - m])?;
            }
            u[t] = ctx.neg(&acc)?;
        }
        columns.push(window_sums_with(ctx, &u, w, n)?.into_sums());
    }
    Ok(Matrix::from_fn(n, n, |r, c| columns[c][r].clone()))
}

pub fn jacobian<T: Scalar + Finite>(params: &RationalParams<T>, w: usize) -> Result<Matrix<T>> {
    jacobian_with(&T::Ctx::default(), params, w)
}

/// The Jacobian at an integer point with every operation carried out in F_p.
pub fn jacobian_mod(params: &RationalParams<i128>, w: usize, p: u64) -> Result<Matrix<u64>> {
    let field = PrimeField::new(p)?;
    jacobian_with(&field, &params.map(|&v| field.reduce(v)), w)
}

/// Determinant residue in `[0, p)`.
pub fn det_mod(m: &Matrix<u64>, p: u64) -> Result<u64> {
    PrimeField::new(p)?.determinant(m)
}

/// A replayable full-rank certificate for one integer parameter point.
///
/// When exact integer arithmetic overflows, `exact` is false and
/// `window_sums`/`jacobian` hold residues modulo `p` instead of integers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(into = "CertificateRecord", try_from = "CertificateRecord")]
pub struct RankCertificate {
    params: RationalParams<i128>,
    block_length: usize,
    prime: u64,
    window_sums: Vec<i128>,
    jacobian: Matrix<i128>,
    det_residue: u64,
    exact: bool,
}

impl RankCertificate {
    pub fn params(&self) -> &RationalParams<i128> {
        &self.params
    }

    pub fn degree(&self) -> usize {
        self.params.degree()
    }

    pub fn block_length(&self) -> usize {
        self.block_length
    }

    pub fn prime(&self) -> u64 {
        self.prime
    }

    pub fn window_sums(&self) -> &[i128] {
        &self.window_sums
    }

    pub fn jacobian(&self) -> &Matrix<i128> {
        &self.jacobian
    }

    pub fn det_residue(&self) -> u64 {
        self.det_residue
    }

    /// A nonzero residue proves the integer determinant, hence the real one, is nonzero.
    pub fn nonzero(&self) -> bool {
        self.det_residue != 0
    }

    pub fn exact(&self) -> bool {
        self.exact
    }
}

#[allow(non_snake_case)]
#[derive(Serialize, Deserialize)]
struct CertificateRecord {
    d: usize,
    W: usize,
    p: u64,
    pi0: Vec<i128>,
    window_sums: Vec<String>,
    jacobian: Vec<Vec<String>>,
    det_mod_p: u64,
    nonzero: bool,
    exact: bool,
}

impl From<RankCertificate> for CertificateRecord {
    fn from(c: RankCertificate) -> Self {
        CertificateRecord {
            d: c.degree(),
            W: c.block_length,
            p: c.prime,
            pi0: c.params.flat(),
            window_sums: c.window_sums.iter().map(i128::to_string).collect(),
            jacobian: c
                .jacobian
                .to_rows()
                .into_iter()
                .map(|r| r.iter().map(i128::to_string).collect())
                .collect(),
            det_mod_p: c.det_residue,
            nonzero: c.det_residue != 0,
            exact: c.exact,
        }
    }
}

fn parse_int(s: &str) -> Result<i128> {
    s.parse()
        .map_err(|_| CertError::Parse(format!("expected a decimal integer, got {s:?}")))
}

impl TryFrom<CertificateRecord> for RankCertificate {
    type Error = CertError;

    fn try_from(r: CertificateRecord) -> Result<Self> {
        let params = RationalParams::from_flat(&r.pi0)?;
        let n = 2 * params.degree() + 1;
        if params.degree() != r.d {
            return Err(CertError::Parse(format!("d = {} but pi0 has degree {}", r.d, params.degree())));
        }
        let window_sums = r.window_sums.iter().map(|s| parse_int(s)).collect::<Result<Vec<_>>>()?;
        let rows = r
            .jacobian
            .iter()
            .map(|row| row.iter().map(|s| parse_int(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        let jacobian = Matrix::from_rows(rows)?;
        if window_sums.len() != n || jacobian.rows() != n || jacobian.cols() != n {
            return Err(CertError::Parse(format!("certificate shapes do not match 2d+1 = {n}")));
        }
        if r.nonzero != (r.det_mod_p != 0) || r.det_mod_p >= r.p {
            return Err(CertError::Parse("inconsistent determinant residue".into()));
        }
        Ok(RankCertificate {
            params,
            block_length: r.W,
            prime: r.p,
            window_sums,
            jacobian,
            det_residue: r.det_mod_p,
            exact: r.exact,
        })
    }
}

/// Certifies `params` at block length `w`: exact integers first, F_p-only on overflow.
pub fn certify_witness(params: &RationalParams<i128>, w: usize, p: u64) -> Result<RankCertificate> {
    let field = PrimeField::new(p)?;
    let exact_ctx = Checked::<i128>::default();
    let exact = window_map_with(&exact_ctx, params, w)
        .and_then(|s| Ok((s, jacobian_with(&exact_ctx, params, w)?)));
    match exact {
        Ok((window_sums, jacobian)) => {
            let det_residue = field.determinant(&field.reduce_matrix(&jacobian))?;
            Ok(RankCertificate {
                params: params.clone(),
                block_length: w,
                prime: p,
                window_sums,
                jacobian,
                det_residue,
                exact: true,
            })
        }
        Err(CertError::Overflow(_)) => modular_certificate(&field, params, w),
        Err(e) => Err(e),
    }
}

/// Like [`certify_witness`] but skips exact arithmetic entirely.
pub fn certify_witness_modular(params: &RationalParams<i128>, w: usize, p: u64) -> Result<RankCertificate> {
    modular_certificate(&PrimeField::new(p)?, params, w)
}

fn modular_certificate(field: &PrimeField, params: &RationalParams<i128>, w: usize) -> Result<RankCertificate> {
    let reduced = params.map(|&v| field.reduce(v));
    let window_sums = window_map_with(field, &reduced, w)?;
    let jacobian = jacobian_with(field, &reduced, w)?;
    Ok(RankCertificate {
        params: params.clone(),
        block_length: w,
        prime: field.modulus(),
        window_sums: window_sums.into_iter().map(i128::from).collect(),
        det_residue: field.determinant(&jacobian)?,
        jacobian: jacobian.map(|&v| i128::from(v)),
        exact: false,
    })
}

/// Seeded random search over integer points with coordinates in
/// `[-bound, bound]` (recurrence not all zero). Returns the first trial whose
/// determinant residue is nonzero, or `None` after `max_trials` failures.
pub fn search_witness(
    d: usize,
    w: usize,
    bound: i64,
    p: u64,
    seed: u64,
    max_trials: usize,
) -> Result<Option<RankCertificate>> {
    if d == 0 || w == 0 {
        return Err(CertError::Argument(format!("need d >= 1 and W >= 1, got d={d}, W={w}")));
    }
    if bound < 1 {
        return Err(CertError::Argument(format!("coordinate bound must be at least 1, got {bound}")));
    }
    PrimeField::new(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..max_trials {
        let initial: Vec<i128> = (0..=d).map(|_| rng.random_range(-bound..=bound) as i128).collect();
        let recurrence = loop {
            let q: Vec<i128> = (0..d).map(|_| rng.random_range(-bound..=bound) as i128).collect();
            if q.iter().any(|&v| v != 0) {
                break q;
            }
        };
        let cert = certify_witness(&RationalParams::new(initial, recurrence)?, w, p)?;
        if cert.nonzero() {
            return Ok(Some(cert));
        }
    }
    Ok(None)
}

/// Exact determinant of the `d x d` Hankel matrix of window sums for the
/// mixture with rates `1/2, 1/3, ..., 1/(d+1)` and unit weights.
pub fn hankel_witness_det_exact(d: usize, w: usize) -> Result<BigRational> {
    if d == 0 || w == 0 {
        return Err(CertError::Argument(format!("need d >= 1 and W >= 1, got d={d}, W={w}")));
    }
    let one = BigRational::one();
    let mut nodes = Vec::with_capacity(d);
    let mut amps = Vec::with_capacity(d);
    for i in 0..d {
        let alpha = BigRational::new(BigInt::one(), BigInt::from(i + 2));
        let mut power = one.clone();
        let mut geometric = BigRational::zero();
        for _ in 0..w {
            geometric += &power;
            power *= &alpha;
        }
        nodes.push(power);
        amps.push(geometric);
    }
    let sums = crate::signal::exponential_sums(&nodes, &amps, 2 * d - 1);
    let h = Matrix::from_fn(d, d, |r, c| sums[r + c].clone());
    determinant(&h)
}

/// [`hankel_witness_det_exact`] rounded to f64; strictly positive.
pub fn hankel_witness_det(d: usize, w: usize) -> Result<f64> {
    let det = hankel_witness_det_exact(d, w)?;
    det.to_f64()
        .ok_or_else(|| CertError::Overflow("Hankel determinant is not representable as f64".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modular::DEFAULT_PRIME;
    use crate::signal::window_map;
    use rand::Rng;

    fn witness_matrix() -> Matrix<i128> {
        Matrix::from_rows(vec![
            vec![1, 7, -3, -9, 69, -54, 3],
            vec![0, 1008, -956, -1388, 25920, -20844, 5568],
            vec![0, 175456, -190016, -200544, 5088848, -4927712, 1787216],
            vec![0, 28857344, -34167296, -27911296, 755009920, -959230336, 430318144],
            vec![0, 4538167296, -5754321920, -3726310400, 82750894080, -165775961088, 89416058880],
            vec![0, 686488772608, -922559823872, -473024225280, 3615042621440, -26067531849728, 16866417889280],
            vec![
                0,
                100127404457984,
                -141965037535232,
                -56107543330816,
                -1341867460689920,
                -3737714520064000,
                2956546669428736,
            ],
        ])
        .unwrap()
    }

    #[test]
    fn witness_jacobian_matches_reference() {
        let p = RationalParams::from_flat(&WITNESS_3_8).unwrap();
        assert_eq!(jacobian(&p, 8).unwrap(), witness_matrix());
    }

    #[test]
    fn witness_jacobian_mod_is_reduction() {
        let p = RationalParams::from_flat(&WITNESS_3_8).unwrap();
        let field = PrimeField::new(DEFAULT_PRIME).unwrap();
        let expect = field.reduce_matrix(&witness_matrix());
        assert_eq!(jacobian_mod(&p, 8, DEFAULT_PRIME).unwrap(), expect);
        assert_eq!(det_mod(&expect, DEFAULT_PRIME).unwrap(), 972226939);
    }

    #[test]
    fn first_order_unit_block_by_hand() {
        let (y0, y1, q1) = (4i128, -3, 7);
        let p = RationalParams::new(vec![y0, y1], vec![q1]).unwrap();
        let expect = Matrix::from_rows(vec![vec![1, 0, 0], vec![0, 1, 0], vec![0, -q1, -y1]]).unwrap();
        assert_eq!(jacobian(&p, 1).unwrap(), expect);
    }

    #[test]
    fn zero_initial_values_zero_q_columns() {
        let p = RationalParams::new(vec![0i128; 4], vec![3, -1, 2]).unwrap();
        let j = jacobian(&p, 5).unwrap();
        for c in 4..7 {
            assert!(j.column(c).iter().all(|&v| v == 0));
        }
    }

    #[test]
    fn modular_matches_exact_on_random_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let field = PrimeField::new(DEFAULT_PRIME).unwrap();
        for _ in 0..40 {
            let d = rng.random_range(1..=3);
            let w = rng.random_range(1..=4);
            let pi: Vec<i128> = (0..2 * d + 1).map(|_| rng.random_range(-4..=4)).collect();
            let p = RationalParams::from_flat(&pi).unwrap();
            let exact = jacobian(&p, w).unwrap();
            assert_eq!(jacobian_mod(&p, w, DEFAULT_PRIME).unwrap(), field.reduce_matrix(&exact));
        }
    }

    #[test]
    fn float_jacobian_matches_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..20 {
            let d = rng.random_range(1..=3);
            let w = rng.random_range(1..=4);
            let pi: Vec<f64> = (0..2 * d + 1).map(|_| rng.random_range(-1.0..1.0)).collect();
            let p = RationalParams::from_flat(&pi).unwrap();
            let j = jacobian(&p, w).unwrap();
            let h = 1e-6;
            for c in 0..pi.len() {
                let mut plus = pi.clone();
                let mut minus = pi.clone();
                plus[c] += h;
                minus[c] -= h;
                let fp = window_map(&RationalParams::from_flat(&plus).unwrap(), w).unwrap();
                let fm = window_map(&RationalParams::from_flat(&minus).unwrap(), w).unwrap();
                let scale = j.as_slice().iter().fold(1.0_f64, |m, v| m.max(v.abs()));
                for r in 0..pi.len() {
                    let fd = (fp[r] - fm[r]) / (2.0 * h);
                    let err = (fd - j[(r, c)]).abs();
                    assert!(err <= 1e-4 * j[(r, c)].abs().max(1e-3 * scale), "({r},{c}): {fd} vs {}", j[(r, c)]);
                }
            }
        }
    }

    #[test]
    fn certify_reference_witness() {
        let p = RationalParams::from_flat(&WITNESS_3_8).unwrap();
        let c = certify_witness(&p, 8, DEFAULT_PRIME).unwrap();
        assert!(c.exact());
        assert!(c.nonzero());
        assert_eq!(c.det_residue(), 972226939);
        assert_eq!(
            c.window_sums(),
            &[-16, -5160, -975168, -169890432, -27959752704, -4399334572032, -665805326548992]
        );
        assert_eq!(c.jacobian(), &witness_matrix());
    }

    #[test]
    fn certify_small_cases() {
        let zero = RationalParams::new(vec![0i128; 4], vec![0; 3]).unwrap();
        assert!(!certify_witness(&zero, 8, DEFAULT_PRIME).unwrap().nonzero());
        let p = RationalParams::new(vec![1i128, 1], vec![-2]).unwrap();
        let c = certify_witness(&p, 1, DEFAULT_PRIME).unwrap();
        assert!(c.nonzero());
        assert_eq!(c.det_residue(), DEFAULT_PRIME - 1);
        assert!(matches!(certify_witness(&p, 1, 12), Err(CertError::NotPrime(12))));
    }

    #[test]
    fn overflow_downgrades_to_modular() {
        let p = RationalParams::new(vec![1i128, 1, 1], vec![-100, 99]).unwrap();
        let c = certify_witness(&p, 30, DEFAULT_PRIME).unwrap();
        assert!(!c.exact());
        let direct = det_mod(&jacobian_mod(&p, 30, DEFAULT_PRIME).unwrap(), DEFAULT_PRIME).unwrap();
        assert_eq!(c.det_residue(), direct);
        assert!(c.window_sums().iter().all(|&v| (0..DEFAULT_PRIME as i128).contains(&v)));
    }

    #[test]
    fn modular_only_certificate_agrees() {
        let p = RationalParams::from_flat(&WITNESS_3_8).unwrap();
        let c = certify_witness_modular(&p, 8, DEFAULT_PRIME).unwrap();
        assert!(!c.exact());
        assert_eq!(c.det_residue(), 972226939);
        let field = PrimeField::new(DEFAULT_PRIME).unwrap();
        assert_eq!(c.jacobian(), &field.reduce_matrix(&witness_matrix()).map(|&v| v as i128));
    }

    #[test]
    fn search_finds_witnesses() {
        let c = search_witness(3, 8, 5, DEFAULT_PRIME, 1, 100).unwrap().unwrap();
        assert!(c.nonzero());
        let again = search_witness(3, 8, 5, DEFAULT_PRIME, 1, 100).unwrap().unwrap();
        assert_eq!(c, again);
        let small = search_witness(1, 1, 2, DEFAULT_PRIME, 9, 100).unwrap().unwrap();
        assert!(small.nonzero());
        assert_eq!(search_witness(3, 8, 5, DEFAULT_PRIME, 1, 0).unwrap(), None);
        assert!(search_witness(3, 8, 0, DEFAULT_PRIME, 1, 10).is_err());
    }

    #[test]
    fn certificate_json_round_trip() {
        let p = RationalParams::from_flat(&WITNESS_3_8).unwrap();
        let c = certify_witness(&p, 8, DEFAULT_PRIME).unwrap();
        let v = serde_json::to_value(&c).unwrap();
        assert_eq!(v["det_mod_p"], 972226939);
        assert_eq!(v["W"], 8);
        assert_eq!(v["jacobian"][6][6], "2956546669428736");
        assert_eq!(v["window_sums"][6], "-665805326548992");
        let back: RankCertificate = serde_json::from_value(v).unwrap();
        assert_eq!(back, c);
    }

    /// `(prod_{i<j} (mu_j - mu_i))^2 prod B_i` in exact rationals.
    fn vandermonde_oracle(d: usize, w: usize) -> BigRational {
        let alpha: Vec<BigRational> =
            (0..d).map(|i| BigRational::new(BigInt::one(), BigInt::from(i + 2))).collect();
        let pow = |a: &BigRational, k: usize| (0..k).fold(BigRational::one(), |acc, _| acc * a);
        let mu: Vec<BigRational> = alpha.iter().map(|a| pow(a, w)).collect();
        let b: Vec<BigRational> =
            alpha.iter().map(|a| (0..w).fold(BigRational::zero(), |acc, j| acc + pow(a, j))).collect();
        let mut v = BigRational::one();
        for i in 0..d {
            for j in i + 1..d {
                v *= &mu[j] - &mu[i];
            }
        }
        b.iter().fold(&v * &v, |acc, bi| acc * bi)
    }

    #[test]
    fn hankel_witness_examples() {
        assert_eq!(hankel_witness_det(1, 1).unwrap(), 1.0);
        assert!((hankel_witness_det(2, 1).unwrap() - 1.0 / 36.0).abs() < 1e-16);
        for (d, w) in [(3, 8), (2, 5), (4, 3), (5, 2)] {
            let exact = hankel_witness_det_exact(d, w).unwrap();
            assert_eq!(exact, vandermonde_oracle(d, w));
            assert!(hankel_witness_det(d, w).unwrap() > 0.0);
        }
    }
}
