//! Matrix exponential and logarithm on I + 𝐩·M_ℓ(Zp).
//!
//! Both series are summed at a raised internal precision so that every
//! division by i! (resp. i) is an exact division of integers.

use num_bigint::BigUint;
use num_traits::One;

use super::bold_p_valuation;
use crate::error::{Error, Result};
use crate::zp::{factorial_valuation, PadicMatrix, Zp};

fn check_domain(m: &PadicMatrix, s: u32) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("exp/log of a non-square matrix".into()));
    }
    let ring = m.ring();
    for (index, x) in m.residues().iter().enumerate() {
        let v = ring.valuation(x);
        if v < s {
            return Err(Error::ValuationTooLow {
                index,
                valuation: v,
                required: s,
            });
        }
    }
    Ok(())
}

fn int_valuation(mut n: u64, p: u64) -> u32 {
    let mut v = 0;
    while n > 0 && n % p == 0 {
        n /= p;
        v += 1;
    }
    v
}

/// Largest i whose term bound `i·s − loss(i)` is below k. Beyond `stop`
/// (where the monotone minorant `i·s − (i−1)/(p−1)` reaches k) every term
/// vanishes mod p^k.
fn truncation_order(k: u32, p: u64, s: u32, loss: impl Fn(u64) -> u32) -> u64 {
    let (k, s) = (u64::from(k), u64::from(s));
    let mut last = 0;
    let mut i = 1u64;
    while i * s * (p - 1) < k * (p - 1) + (i - 1) {
        if i * s < k + u64::from(loss(i)) {
            last = i;
        }
        i += 1;
    }
    last
}

/// Divides every entry of `m` (at precision k') by the integer `n`, landing at
/// precision k. Requires v_p(entry) ≥ v_p(n) and k' ≥ k + v_p(n).
fn divide_entries(m: &PadicMatrix, n: &BigUint, target: &Zp) -> PadicMatrix {
    let p = target.prime();
    let v = crate::zp::valuation_of_int(n, p).expect("nonzero divisor");
    let shift = m.ring().prime_power(v);
    let unit = n / &shift;
    let unit_inv = target.inv(&target.reduce(&unit)).expect("unit part");
    PadicMatrix::from_fn(target, m.rows(), m.cols(), |i, j| {
        let x = m.raw(i, j);
        debug_assert!((x % &shift) == BigUint::from(0u32));
        target.mul(&target.reduce(&(x / &shift)), &unit_inv)
    })
}

/// exp(A) = Σ A^i/i!, for A with entries in 𝐩·Zp.
pub fn mat_exp(a: &PadicMatrix) -> Result<PadicMatrix> {
    let ring = a.ring();
    let (p, k) = (ring.prime(), ring.precision());
    let s = bold_p_valuation(p);
    check_domain(a, s)?;
    let order = truncation_order(k, p, s, |i| factorial_valuation(i, p));
    let guard = factorial_valuation(order, p);
    let lifted = a.with_precision(k + guard);
    let n = a.rows();
    let mut sum = PadicMatrix::identity(ring, n);
    let mut power = PadicMatrix::identity(lifted.ring(), n);
    let mut factorial = BigUint::one();
    for i in 1..=order {
        power = power.try_mul(&lifted)?;
        factorial *= i;
        sum = sum.try_add(&divide_entries(&power, &factorial, ring))?;
    }
    Ok(sum)
}

/// log(B) = Σ (−1)^{i+1}(B − I)^i/i, for B ∈ I + 𝐩·M_ℓ(Zp).
pub fn mat_log(b: &PadicMatrix) -> Result<PadicMatrix> {
    let ring = b.ring();
    let (p, k) = (ring.prime(), ring.precision());
    let s = bold_p_valuation(p);
    if !b.is_square() {
        return Err(Error::DimensionMismatch("log of a non-square matrix".into()));
    }
    let x = b.try_sub(&PadicMatrix::identity(ring, b.rows()))?;
    check_domain(&x, s)?;
    let order = truncation_order(k, p, s, |i| int_valuation(i, p));
    let guard = (1..=order).map(|i| int_valuation(i, p)).max().unwrap_or(0);
    let lifted = x.with_precision(k + guard);
    let n = b.rows();
    let mut sum = PadicMatrix::zeros(ring, n, n);
    let mut power = PadicMatrix::identity(lifted.ring(), n);
    for i in 1..=order {
        power = power.try_mul(&lifted)?;
        let term = divide_entries(&power, &BigUint::from(i), ring);
        sum = if i % 2 == 1 {
            sum.try_add(&term)?
        } else {
            sum.try_sub(&term)?
        };
    }
    Ok(sum)
}

/// log(exp(A)·exp(B)).
pub fn bch(a: &PadicMatrix, b: &PadicMatrix) -> Result<PadicMatrix> {
    mat_log(&mat_exp(a)?.try_mul(&mat_exp(b)?)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    fn m(p: u64, k: u32, rows: &[Vec<i64>]) -> PadicMatrix {
        PadicMatrix::from_i64(&Zp::new(p, k).unwrap(), rows).unwrap()
    }

    /// Oracle: Σ_{i≤40} x^i/i! summed over the rationals, then reduced mod p^k.
    fn rational_exp(x: i64, p: u64, k: u32) -> BigInt {
        let modulus = BigInt::from(p).pow(k);
        let (mut num, mut den) = (BigInt::from(0), BigInt::from(1));
        let mut term_num = BigInt::from(1);
        let mut term_den = BigInt::from(1);
        for i in 0..40u32 {
            if i > 0 {
                term_num *= x;
                term_den *= i;
            }
            num = &num * &term_den + &term_num * &den;
            den *= &term_den;
            let g = num_integer::Integer::gcd(&num, &den);
            num /= &g;
            den /= &g;
        }
        let den_inv = den.modinv(&modulus).expect("unit denominator");
        (num * den_inv).mod_floor(&modulus)
    }
    use num_integer::Integer;

    #[test]
    fn scalar_fixtures() {
        assert_eq!(mat_exp(&m(3, 3, &[vec![3]])).unwrap(), m(3, 3, &[vec![13]]));
        assert_eq!(mat_log(&m(3, 3, &[vec![13]])).unwrap(), m(3, 3, &[vec![3]]));
        assert_eq!(rational_exp(3, 3, 3), BigInt::from(13));
    }

    #[test]
    fn nilpotent_argument_terminates() {
        let a = m(3, 3, &[vec![0, 3], vec![0, 0]]);
        assert_eq!(mat_exp(&a).unwrap(), m(3, 3, &[vec![1, 3], vec![0, 1]]));
        let zero = PadicMatrix::zeros(a.ring(), 2, 2);
        assert!(mat_exp(&zero).unwrap().is_identity());
    }

    #[test]
    fn bch_fixture() {
        let r = Zp::new(3, 3).unwrap();
        let a = PadicMatrix::unit(&r, 3, 0, 1).scale(&BigUint::from(3u32));
        let b = PadicMatrix::unit(&r, 3, 1, 2).scale(&BigUint::from(3u32));
        let expected = m(3, 3, &[vec![0, 3, -9], vec![0, 0, 3], vec![0, 0, 0]]);
        assert_eq!(bch(&a, &b).unwrap(), expected);
        assert_eq!(bch(&a, &PadicMatrix::zeros(&r, 3, 3)).unwrap(), a);
    }

    #[test]
    fn domain_errors() {
        assert!(matches!(mat_exp(&m(3, 3, &[vec![1]])), Err(Error::ValuationTooLow { .. })));
        assert!(matches!(mat_exp(&m(2, 5, &[vec![2]])), Err(Error::ValuationTooLow { .. })));
        assert!(mat_exp(&m(2, 5, &[vec![4]])).is_ok());
        assert!(matches!(mat_log(&m(3, 3, &[vec![2]])), Err(Error::ValuationTooLow { .. })));
    }

    #[test]
    fn truncation_is_sufficient() {
        for (p, k) in [(2u64, 8u32), (3, 8), (5, 8), (3, 20), (7, 12)] {
            let s = bold_p_valuation(p);
            let order = truncation_order(k, p, s, |i| factorial_valuation(i, p));
            for i in order + 1..order + 200 {
                assert!(i * u64::from(s) >= u64::from(k + factorial_valuation(i, p)));
            }
        }
    }

    proptest! {
        #[test]
        fn scalar_exp_matches_rational_series(c in -50i64..50, p in prop::sample::select(vec![3u64, 5, 7])) {
            let k = 6;
            let x = c * p as i64;
            let got = mat_exp(&m(p, k, &[vec![x]])).unwrap();
            let expected = rational_exp(x, p, k);
            prop_assert_eq!(BigInt::from(got.raw(0, 0).clone()), expected);
        }
    }
}
