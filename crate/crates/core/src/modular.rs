//! Arithmetic in the prime field F_p.

use crate::error::{CertError, Result};
use crate::linalg::Matrix;
use crate::scalar::Arithmetic;

/// The default certification prime, 10^9 + 7.
pub const DEFAULT_PRIME: u64 = 1_000_000_007;

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

/// Deterministic Miller–Rabin; the first twelve prime bases are exact for all u64.
pub fn is_prime(n: u64) -> bool {
    const BASES: [u64; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];
    if n < 2 {
        return false;
    }
    for &b in &BASES {
        if n.is_multiple_of(b) {
            return n == b;
        }
    }
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for &a in &BASES {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// F_p with elements stored as canonical residues in `[0, p)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PrimeField {
    p: u64,
}

impl PrimeField {
    pub fn new(p: u64) -> Result<Self> {
        if is_prime(p) {
            Ok(PrimeField { p })
        } else {
            Err(CertError::NotPrime(p))
        }
    }

    pub fn modulus(&self) -> u64 {
        self.p
    }

    pub fn reduce(&self, v: i128) -> u64 {
        v.rem_euclid(self.p as i128) as u64
    }

    pub fn reduce_matrix(&self, m: &Matrix<i128>) -> Matrix<u64> {
        m.map(|&v| self.reduce(v))
    }

    pub fn pow(&self, base: u64, exp: u64) -> u64 {
        pow_mod(base, exp, self.p)
    }

    /// Inverse by Fermat: `a^(p-2)`.
    pub fn inv(&self, a: u64) -> Result<u64> {
        if a.is_multiple_of(self.p) {
            return Err(CertError::Domain("zero has no inverse modulo p".into()));
        }
        Ok(self.pow(a, self.p - 2))
    }

    /// Determinant by Gaussian elimination over F_p.
    pub fn determinant(&self, m: &Matrix<u64>) -> Result<u64> {
        if !m.is_square() {
            return Err(CertError::Argument("determinant of a non-square matrix".into()));
        }
        let p = self.p;
        let n = m.rows();
        let mut a = m.map(|&v| v % p);
        let mut det = 1 % p;
        for col in 0..n {
            let Some(piv) = (col..n).find(|&r| a[(r, col)] != 0) else {
                return Ok(0);
            };
            if piv != col {
                for c in 0..n {
                    let tmp = a[(col, c)];
                    a[(col, c)] = a[(piv, c)];
                    a[(piv, c)] = tmp;
                }
                det = (p - det) % p;
            }
            let pv = a[(col, col)];
            det = mul_mod(det, pv, p);
            let inv = self.inv(pv)?;
            for r in col + 1..n {
                let factor = mul_mod(a[(r, col)], inv, p);
                if factor == 0 {
                    continue;
                }
                for c in col..n {
                    let sub = mul_mod(factor, a[(col, c)], p);
                    a[(r, c)] = (a[(r, c)] + p - sub) % p;
                }
            }
        }
        Ok(det)
    }
}

impl Arithmetic for PrimeField {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }

    fn one(&self) -> u64 {
        1 % self.p
    }

    fn add(&self, a: &u64, b: &u64) -> Result<u64> {
        Ok(((*a as u128 + *b as u128) % self.p as u128) as u64)
    }

    fn mul(&self, a: &u64, b: &u64) -> Result<u64> {
        Ok(mul_mod(*a, *b, self.p))
    }

    fn neg(&self, a: &u64) -> Result<u64> {
        Ok((self.p - a % self.p) % self.p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn trial_division(n: u64) -> bool {
        n >= 2 && (2..).take_while(|d| d * d <= n).all(|d| !n.is_multiple_of(d))
    }

    #[test]
    fn primality_agrees_with_trial_division() {
        for n in 0..5000 {
            assert_eq!(is_prime(n), trial_division(n), "n = {n}");
        }
        assert!(is_prime(DEFAULT_PRIME));
        assert!(is_prime(998_244_353));
        assert!(!is_prime(1_000_000_007 * 3));
        // strong pseudoprime to bases 2, 3, 5, 7
        assert!(!is_prime(3_215_031_751));
        assert!(is_prime(18_446_744_073_709_551_557));
    }

    #[test]
    fn composite_modulus_rejected() {
        assert_eq!(PrimeField::new(10), Err(CertError::NotPrime(10)));
        assert!(PrimeField::new(1).is_err());
    }

    #[test]
    fn reduction_of_negatives() {
        let f = PrimeField::new(7).unwrap();
        assert_eq!(f.reduce(-1), 6);
        assert_eq!(f.reduce(-14), 0);
        assert_eq!(f.reduce(i128::MIN), (i128::MIN).rem_euclid(7) as u64);
    }

    #[test]
    fn inverses() {
        let f = PrimeField::new(DEFAULT_PRIME).unwrap();
        for a in [1u64, 2, 12345, DEFAULT_PRIME - 1] {
            assert_eq!(mul_mod(a, f.inv(a).unwrap(), DEFAULT_PRIME), 1);
        }
        assert!(f.inv(0).is_err());
    }

    #[test]
    fn small_determinants() {
        let f = PrimeField::new(7).unwrap();
        let m = Matrix::from_rows(vec![vec![2, 3], vec![4, 5]]).unwrap();
        assert_eq!(f.determinant(&m).unwrap(), 5);
        let g = PrimeField::new(DEFAULT_PRIME).unwrap();
        assert_eq!(g.determinant(&Matrix::<u64>::identity(7)).unwrap(), 1);
        let nonsq = Matrix::filled(2, 3, 1u64);
        assert!(matches!(g.determinant(&nonsq), Err(CertError::Argument(_))));
        let singular = Matrix::from_rows(vec![vec![1, 2], vec![2, 4]]).unwrap();
        assert_eq!(g.determinant(&singular).unwrap(), 0);
    }

    #[test]
    fn determinant_matches_exact_integer_determinant() {
        let f = PrimeField::new(DEFAULT_PRIME).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..50 {
            let m = Matrix::from_fn(4, 4, |_, _| rng.random_range(-50i128..=50));
            let exact = crate::linalg::determinant(&m.map(|&v| {
                num_rational::BigRational::from_integer(num_bigint::BigInt::from(v))
            }))
            .unwrap();
            let exact = exact.to_integer();
            let expect = {
                let p = num_bigint::BigInt::from(DEFAULT_PRIME);
                let r = ((exact % &p) + &p) % &p;
                u64::try_from(r).unwrap()
            };
            assert_eq!(f.determinant(&f.reduce_matrix(&m)).unwrap(), expect);
        }
    }

    #[test]
    fn determinant_is_multiplicative() {
        let f = PrimeField::new(DEFAULT_PRIME).unwrap();
        let p = DEFAULT_PRIME;
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..20 {
            let a = Matrix::from_fn(5, 5, |_, _| rng.random_range(0..p));
            let b = Matrix::from_fn(5, 5, |_, _| rng.random_range(0..p));
            let ab = Matrix::from_fn(5, 5, |r, c| {
                (0..5).fold(0u64, |acc, k| (acc + mul_mod(a[(r, k)], b[(k, c)], p)) % p)
            });
            let lhs = f.determinant(&ab).unwrap();
            let rhs = mul_mod(f.determinant(&a).unwrap(), f.determinant(&b).unwrap(), p);
            assert_eq!(lhs, rhs);
        }
    }
}
