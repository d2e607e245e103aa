//! Arithmetic in Zp at a fixed working precision p^k.
//!
//! Every value is a residue class mod p^k. Equality means congruence mod
//! p^k, so a verified inequality is a true inequality in Zp while a verified
//! equality only holds "to precision".

mod howell;
mod matrix;

pub use howell::{howell_form, howell_kernel, is_injective_at_precision};
pub use matrix::PadicMatrix;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Trial-division primality check; p is expected to be small.
pub fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut d = 2u64;
    while d * d <= p {
        if p % d == 0 {
            return false;
        }
        d += 1;
    }
    true
}

/// p-adic valuation of a nonzero integer. Returns `None` for zero.
pub fn valuation_of_int(x: &BigUint, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let pb = BigUint::from(p);
    let mut v = 0;
    let mut y = x.clone();
    loop {
        let (q, r) = y.div_rem(&pb);
        if !r.is_zero() {
            return Some(v);
        }
        v += 1;
        y = q;
    }
}

/// p-adic valuation of n! (Legendre's formula).
pub fn factorial_valuation(n: u64, p: u64) -> u32 {
    let mut v = 0u64;
    let mut q = n / p;
    while q > 0 {
        v += q;
        q /= p;
    }
    v as u32
}

#[derive(Debug)]
struct ZpInner {
    prime: u64,
    precision: u32,
    modulus: BigUint,
}

/// The residue ring Z/p^k, shared by every value computed at that precision.
#[derive(Clone)]
pub struct Zp(Arc<ZpInner>);

impl fmt::Debug for Zp {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.0.prime, self.0.precision)
    }
}

impl PartialEq for Zp {
    fn eq(&self, other: &Self) -> bool {
        self.0.prime == other.0.prime && self.0.precision == other.0.precision
    }
}
impl Eq for Zp {}

impl Zp {
    pub fn new(prime: u64, precision: u32) -> Result<Self> {
        if !is_prime(prime) {
            return Err(Error::InvalidPrime(prime));
        }
        if precision == 0 {
            return Err(Error::InvalidPrecision(precision));
        }
        let modulus = BigUint::from(prime).pow(precision);
        Ok(Zp(Arc::new(ZpInner {
            prime,
            precision,
            modulus,
        })))
    }

    pub fn prime(&self) -> u64 {
        self.0.prime
    }

    pub fn precision(&self) -> u32 {
        self.0.precision
    }

    pub fn modulus(&self) -> &BigUint {
        &self.0.modulus
    }

    /// The same prime at another precision.
    pub fn with_precision(&self, precision: u32) -> Self {
        if precision == self.precision() {
            return self.clone();
        }
        Zp::new(self.prime(), precision).expect("prime already validated")
    }

    pub fn check_same(&self, other: &Zp) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::ModulusMismatch(format!("{self:?} vs {other:?}")))
        }
    }

    /// p^e as an integer.
    pub fn prime_power(&self, e: u32) -> BigUint {
        BigUint::from(self.prime()).pow(e)
    }

    pub fn reduce(&self, x: &BigUint) -> BigUint {
        if x < self.modulus() {
            x.clone()
        } else {
            x % self.modulus()
        }
    }

    pub fn reduce_signed(&self, x: &BigInt) -> BigUint {
        let m = BigInt::from_biguint(Sign::Plus, self.modulus().clone());
        x.mod_floor(&m).to_biguint().expect("mod_floor is nonnegative")
    }

    pub fn from_i64(&self, x: i64) -> BigUint {
        self.reduce_signed(&BigInt::from(x))
    }

    pub fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        let s = a + b;
        if &s >= self.modulus() {
            s - self.modulus()
        } else {
            s
        }
    }

    pub fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            self.modulus() - (b - a)
        }
    }

    pub fn neg(&self, a: &BigUint) -> BigUint {
        if a.is_zero() {
            BigUint::zero()
        } else {
            self.modulus() - a
        }
    }

    pub fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % self.modulus()
    }

    /// Valuation capped at the precision; zero has valuation k.
    pub fn valuation(&self, a: &BigUint) -> u32 {
        valuation_of_int(a, self.prime()).map_or(self.precision(), |v| v.min(self.precision()))
    }

    pub fn inv(&self, a: &BigUint) -> Result<BigUint> {
        let v = self.valuation(a);
        if v > 0 {
            return Err(Error::NotAUnit { valuation: v });
        }
        let m = BigInt::from_biguint(Sign::Plus, self.modulus().clone());
        let x = BigInt::from_biguint(Sign::Plus, a.clone());
        let g = x.extended_gcd(&m);
        debug_assert!(g.gcd.is_one());
        Ok(self.reduce_signed(&g.x))
    }

    /// Symmetric representative in (-p^k/2, p^k/2].
    pub fn signed(&self, a: &BigUint) -> BigInt {
        let half = self.modulus() >> 1;
        if a > &half {
            BigInt::from_biguint(Sign::Minus, self.modulus() - a)
        } else {
            BigInt::from_biguint(Sign::Plus, a.clone())
        }
    }

    pub fn scalar(&self, residue: BigUint) -> PadicScalar {
        PadicScalar {
            ring: self.clone(),
            residue: self.reduce(&residue),
        }
    }

    pub fn int(&self, x: i64) -> PadicScalar {
        PadicScalar {
            ring: self.clone(),
            residue: self.from_i64(x),
        }
    }

    pub fn zero(&self) -> PadicScalar {
        self.int(0)
    }

    pub fn one(&self) -> PadicScalar {
        self.int(1)
    }
}

/// An element of Zp known modulo p^k.
#[derive(Clone)]
pub struct PadicScalar {
    ring: Zp,
    residue: BigUint,
}

impl PadicScalar {
    pub fn new(prime: u64, precision: u32, value: impl Into<BigInt>) -> Result<Self> {
        let ring = Zp::new(prime, precision)?;
        let residue = ring.reduce_signed(&value.into());
        Ok(PadicScalar { ring, residue })
    }

    pub fn ring(&self) -> &Zp {
        &self.ring
    }

    pub fn prime(&self) -> u64 {
        self.ring.prime()
    }

    pub fn precision(&self) -> u32 {
        self.ring.precision()
    }

    pub fn residue(&self) -> &BigUint {
        &self.residue
    }

    pub fn signed(&self) -> BigInt {
        self.ring.signed(&self.residue)
    }

    pub fn to_i64(&self) -> Option<i64> {
        self.signed().to_i64()
    }

    /// min(v_p(residue), k); zero reports k.
    pub fn valuation(&self) -> u32 {
        self.ring.valuation(&self.residue)
    }

    pub fn is_zero(&self) -> bool {
        self.residue.is_zero()
    }

    pub fn is_unit(&self) -> bool {
        self.valuation() == 0
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.ring.check_same(&other.ring)?;
        Ok(self.with_residue(self.ring.add(&self.residue, &other.residue)))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.ring.check_same(&other.ring)?;
        Ok(self.with_residue(self.ring.sub(&self.residue, &other.residue)))
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.ring.check_same(&other.ring)?;
        Ok(self.with_residue(self.ring.mul(&self.residue, &other.residue)))
    }

    pub fn inv(&self) -> Result<Self> {
        Ok(self.with_residue(self.ring.inv(&self.residue)?))
    }

    /// Divides `self` by `divisor`. The quotient is only determined modulo
    /// p^(k - v(divisor)), and the returned value carries that precision.
    pub fn exact_div(&self, divisor: &Self) -> Result<Self> {
        self.ring.check_same(&divisor.ring)?;
        if divisor.is_zero() {
            return Err(Error::DivisionByZero);
        }
        let vy = divisor.valuation();
        let vx = self.valuation();
        if vx < vy {
            return Err(Error::InexactDivision {
                numerator: vx,
                denominator: vy,
            });
        }
        let shift = self.ring.prime_power(vy);
        let ring = self.ring.with_precision(self.precision() - vy);
        let num = ring.reduce(&(&self.residue / &shift));
        let unit = ring.reduce(&(&divisor.residue / &shift));
        let residue = ring.mul(&num, &ring.inv(&unit)?);
        Ok(PadicScalar { ring, residue })
    }

    /// Reduces to a lower precision, or lifts canonically to a higher one.
    pub fn with_precision(&self, precision: u32) -> Self {
        let ring = self.ring.with_precision(precision);
        let residue = ring.reduce(&self.residue);
        PadicScalar { ring, residue }
    }

    pub fn pow(&self, e: u64) -> Self {
        let residue = self.residue.modpow(&BigUint::from(e), self.ring.modulus());
        self.with_residue(residue)
    }

    /// Congruence mod p^min(k, k').
    pub fn congruent(&self, other: &Self) -> bool {
        if self.prime() != other.prime() {
            return false;
        }
        let k = self.precision().min(other.precision());
        let ring = self.ring.with_precision(k);
        ring.reduce(&self.residue) == ring.reduce(&other.residue)
    }

    fn with_residue(&self, residue: BigUint) -> Self {
        PadicScalar {
            ring: self.ring.clone(),
            residue,
        }
    }
}

impl PartialEq for PadicScalar {
    fn eq(&self, other: &Self) -> bool {
        self.ring == other.ring && self.residue == other.residue
    }
}
impl Eq for PadicScalar {}

impl fmt::Debug for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.residue, self.prime(), self.precision())
    }
}

impl fmt::Display for PadicScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.signed())
    }
}

// Operator forms panic on mismatched moduli; use the `try_` methods when the
// operands come from untrusted input.
macro_rules! binop {
    ($tr:ident, $method:ident, $checked:ident) => {
        impl $tr<&PadicScalar> for &PadicScalar {
            type Output = PadicScalar;
            fn $method(self, rhs: &PadicScalar) -> PadicScalar {
                self.$checked(rhs).expect("operands share prime and precision")
            }
        }
        impl $tr<PadicScalar> for PadicScalar {
            type Output = PadicScalar;
            fn $method(self, rhs: PadicScalar) -> PadicScalar {
                (&self).$method(&rhs)
            }
        }
    };
}

binop!(Add, add, try_add);
binop!(Sub, sub, try_sub);
binop!(Mul, mul, try_mul);

impl Neg for &PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        self.with_residue(self.ring.neg(&self.residue))
    }
}

impl Neg for PadicScalar {
    type Output = PadicScalar;
    fn neg(self) -> PadicScalar {
        -&self
    }
}
