//! Truncated multivariate power series over Zp[[t1..tm]].
//!
//! Truncation is by total degree: X-degree ≤ D and t-degree ≤ D. Each value
//! carries an `exact` flag that is cleared as soon as the cutoff discards a
//! nonzero term; exact values are honest polynomials, so evaluating them
//! loses no precision beyond p^k.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::zp::{PadicScalar, Zp};

/// The coefficient ring Zp[[t1..tm]] at precision p^k with degree cutoff D.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingDescriptor {
    zp: Zp,
    param_vars: usize,
    degree_cutoff: u32,
}

impl RingDescriptor {
    pub fn new(prime: u64, precision: u32, param_vars: usize, degree_cutoff: u32) -> Result<Self> {
        if degree_cutoff < 2 {
            return Err(Error::InvalidInput(format!(
                "degree cutoff {degree_cutoff} < 2"
            )));
        }
        Ok(RingDescriptor {
            zp: Zp::new(prime, precision)?,
            param_vars,
            degree_cutoff,
        })
    }

    pub fn zp(&self) -> &Zp {
        &self.zp
    }

    pub fn prime(&self) -> u64 {
        self.zp.prime()
    }

    pub fn precision(&self) -> u32 {
        self.zp.precision()
    }

    pub fn param_vars(&self) -> usize {
        self.param_vars
    }

    pub fn degree_cutoff(&self) -> u32 {
        self.degree_cutoff
    }

    pub fn with_precision(&self, precision: u32) -> Self {
        RingDescriptor {
            zp: self.zp.with_precision(precision),
            ..self.clone()
        }
    }

    pub fn with_cutoff(&self, degree_cutoff: u32) -> Self {
        RingDescriptor {
            degree_cutoff,
            ..self.clone()
        }
    }

    /// Same prime, precision and cutoff with no t-variables.
    pub fn over_zp(&self) -> Self {
        RingDescriptor {
            param_vars: 0,
            ..self.clone()
        }
    }

    /// Sentinel ideal order of zero: k + D.
    pub fn zero_order(&self) -> u32 {
        self.precision() + self.degree_cutoff
    }

    pub fn check_same(&self, other: &Self) -> Result<()> {
        if self == other {
            Ok(())
        } else {
            Err(Error::DescriptorMismatch(format!(
                "p={} k={} m={} D={} vs p={} k={} m={} D={}",
                self.prime(),
                self.precision(),
                self.param_vars,
                self.degree_cutoff,
                other.prime(),
                other.precision(),
                other.param_vars,
                other.degree_cutoff
            )))
        }
    }
}

/// A value together with the p-adic precision it is guaranteed to.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Evaluation {
    pub value: PadicScalar,
    pub guarantee: u32,
}

type Terms = BTreeMap<Vec<u32>, BigUint>;

fn degree(e: &[u32]) -> u32 {
    e.iter().sum()
}

/// Shared sparse storage: keys are X-exponents (first `nx`) then t-exponents.
#[derive(Clone, PartialEq, Eq)]
struct Poly {
    nx: usize,
    terms: Terms,
    exact: bool,
}

impl Poly {
    fn zero(nx: usize) -> Self {
        Poly {
            nx,
            terms: Terms::new(),
            exact: true,
        }
    }

    fn insert_add(&mut self, zp: &Zp, key: Vec<u32>, c: &BigUint) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(key) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = zp.add(o.get(), c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn within(&self, key: &[u32], cutoff: u32) -> bool {
        degree(&key[..self.nx]) <= cutoff && degree(&key[self.nx..]) <= cutoff
    }

    fn add(&self, other: &Poly, zp: &Zp) -> Poly {
        let mut out = self.clone();
        out.exact = self.exact && other.exact;
        for (k, c) in &other.terms {
            out.insert_add(zp, k.clone(), c);
        }
        out
    }

    fn neg(&self, zp: &Zp) -> Poly {
        Poly {
            nx: self.nx,
            terms: self.terms.iter().map(|(k, c)| (k.clone(), zp.neg(c))).collect(),
            exact: self.exact,
        }
    }

    fn scale(&self, zp: &Zp, c: &BigUint) -> Poly {
        let mut out = Poly::zero(self.nx);
        out.exact = self.exact;
        for (k, x) in &self.terms {
            out.insert_add(zp, k.clone(), &zp.mul(x, c));
        }
        out
    }

    fn mul(&self, other: &Poly, zp: &Zp, cutoff: u32) -> Poly {
        let mut out = Poly::zero(self.nx);
        out.exact = self.exact && other.exact;
        for (ka, ca) in &self.terms {
            for (kb, cb) in &other.terms {
                let key: Vec<u32> = ka.iter().zip(kb).map(|(a, b)| a + b).collect();
                let c = zp.mul(ca, cb);
                if c.is_zero() {
                    continue;
                }
                if out.within(&key, cutoff) {
                    out.insert_add(zp, key, &c);
                } else {
                    out.exact = false;
                }
            }
        }
        out
    }

    fn with_zp(&self, to: &Zp) -> Poly {
        let mut out = Poly::zero(self.nx);
        out.exact = self.exact;
        for (k, c) in &self.terms {
            out.insert_add(to, k.clone(), &to.reduce(c));
        }
        out
    }
}

/// An element of Zp[[t1..tm]] truncated at t-degree D, coefficients mod p^k.
#[derive(Clone)]
pub struct RingElement {
    desc: RingDescriptor,
    poly: Poly,
}

impl PartialEq for RingElement {
    fn eq(&self, other: &Self) -> bool {
        self.desc == other.desc && self.poly.terms == other.poly.terms
    }
}
impl Eq for RingElement {}

impl RingElement {
    pub fn zero(desc: &RingDescriptor) -> Self {
        RingElement {
            desc: desc.clone(),
            poly: Poly::zero(0),
        }
    }

    pub fn constant(desc: &RingDescriptor, c: &BigUint) -> Self {
        let mut r = Self::zero(desc);
        let c = desc.zp().reduce(c);
        r.poly.insert_add(desc.zp(), vec![0; desc.param_vars()], &c);
        r
    }

    pub fn int(desc: &RingDescriptor, c: i64) -> Self {
        Self::constant(desc, &desc.zp().from_i64(c))
    }

    pub fn from_scalar(desc: &RingDescriptor, c: &PadicScalar) -> Self {
        Self::constant(desc, c.residue())
    }

    pub fn one(desc: &RingDescriptor) -> Self {
        Self::int(desc, 1)
    }

    /// The variable t_i (0-based).
    pub fn t(desc: &RingDescriptor, i: usize) -> Result<Self> {
        if i >= desc.param_vars() {
            return Err(Error::InvalidInput(format!(
                "t-variable {i} out of range ({} declared)",
                desc.param_vars()
            )));
        }
        let mut e = vec![0; desc.param_vars()];
        e[i] = 1;
        Self::from_terms(desc, [(e, BigInt::one())])
    }

    /// Builds an element from (t-exponent, coefficient) pairs. Terms beyond the
    /// degree cutoff are discarded and clear the exact flag.
    pub fn from_terms(
        desc: &RingDescriptor,
        terms: impl IntoIterator<Item = (Vec<u32>, BigInt)>,
    ) -> Result<Self> {
        let zp = desc.zp();
        let mut poly = Poly::zero(0);
        for (e, c) in terms {
            if e.len() != desc.param_vars() {
                return Err(Error::InvalidInput(format!(
                    "t-exponent of length {} for {} t-variables",
                    e.len(),
                    desc.param_vars()
                )));
            }
            let c = zp.reduce_signed(&c);
            if degree(&e) > desc.degree_cutoff() {
                if !c.is_zero() {
                    poly.exact = false;
                }
                continue;
            }
            poly.insert_add(zp, e, &c);
        }
        Ok(RingElement {
            desc: desc.clone(),
            poly,
        })
    }

    pub fn descriptor(&self) -> &RingDescriptor {
        &self.desc
    }

    pub fn is_exact(&self) -> bool {
        self.poly.exact
    }

    pub fn is_zero(&self) -> bool {
        self.poly.terms.is_empty()
    }

    /// (t-exponent, residue) pairs in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &BigUint)> {
        self.poly.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.poly.terms.len()
    }

    pub fn constant_term(&self) -> PadicScalar {
        let key = vec![0; self.desc.param_vars()];
        self.desc
            .zp()
            .scalar(self.poly.terms.get(&key).cloned().unwrap_or_default())
    }

    pub fn is_unit(&self) -> bool {
        self.constant_term().is_unit()
    }

    /// min over terms of valuation(coeff) + t-degree; k + D for zero.
    pub fn ideal_order(&self) -> u32 {
        let zp = self.desc.zp();
        self.poly
            .terms
            .iter()
            .map(|(e, c)| zp.valuation(c) + degree(e))
            .min()
            .unwrap_or_else(|| self.desc.zero_order())
    }

    fn wrap(&self, poly: Poly) -> Self {
        RingElement {
            desc: self.desc.clone(),
            poly,
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.desc.check_same(&other.desc)?;
        Ok(self.wrap(self.poly.add(&other.poly, self.desc.zp())))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.desc.check_same(&other.desc)?;
        Ok(self.wrap(
            self.poly
                .mul(&other.poly, self.desc.zp(), self.desc.degree_cutoff()),
        ))
    }

    pub fn neg(&self) -> Self {
        self.wrap(self.poly.neg(self.desc.zp()))
    }

    pub fn scale(&self, c: &BigUint) -> Self {
        self.wrap(self.poly.scale(self.desc.zp(), c))
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = RingElement::one(&self.desc);
        for _ in 0..e {
            acc = acc.try_mul(self).expect("same descriptor");
        }
        acc
    }

    /// Reinterprets at another descriptor with the same prime and t-count
    /// (precision change truncates or lifts the residues canonically).
    pub fn with_descriptor(&self, desc: &RingDescriptor) -> Self {
        debug_assert_eq!(desc.param_vars(), self.desc.param_vars());
        let mut poly = self.poly.with_zp(desc.zp());
        let cutoff = desc.degree_cutoff();
        let before = poly.terms.len();
        poly.terms.retain(|e, _| degree(e) <= cutoff);
        if poly.terms.len() != before {
            poly.exact = false;
        }
        RingElement {
            desc: desc.clone(),
            poly,
        }
    }

    /// Equality modulo ideal order ≥ `order` (p^a t^b with a + b ≥ order).
    pub fn congruent(&self, other: &Self, order: u32) -> bool {
        match self.try_sub(other) {
            Ok(d) => d.ideal_order() >= order,
            Err(_) => false,
        }
    }

    /// Evaluation t ↦ a. The guarantee accounts for tail terms of degree > D
    /// that the cutoff discarded.
    pub fn evaluate(&self, point: &[PadicScalar]) -> Result<Evaluation> {
        let zp = self.desc.zp();
        check_point(zp, point, self.desc.param_vars())?;
        let vmin = point.iter().map(PadicScalar::valuation).min();
        let powers = power_table(zp, point, self.desc.degree_cutoff());
        let mut acc = BigUint::zero();
        for (e, c) in &self.poly.terms {
            acc = zp.add(&acc, &zp.mul(c, &monomial(zp, &powers, e)));
        }
        let guarantee = truncation_guarantee(
            zp.precision(),
            self.poly.exact,
            self.desc.degree_cutoff(),
            vmin,
        );
        Ok(Evaluation {
            value: zp.scalar(acc),
            guarantee,
        })
    }
}

impl fmt::Debug for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for RingElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_terms(f, self.desc.zp(), &self.poly, &[])
    }
}

fn check_point(zp: &Zp, point: &[PadicScalar], expected: usize) -> Result<()> {
    if point.len() != expected {
        return Err(Error::DimensionMismatch(format!(
            "{} point coordinates for {expected} variables",
            point.len()
        )));
    }
    for (index, a) in point.iter().enumerate() {
        zp.check_same(a.ring())?;
        if a.valuation() == 0 {
            return Err(Error::ValuationTooLow {
                index,
                valuation: 0,
                required: 1,
            });
        }
    }
    Ok(())
}

fn power_table(zp: &Zp, point: &[PadicScalar], max: u32) -> Vec<Vec<BigUint>> {
    point
        .iter()
        .map(|a| {
            let mut row = Vec::with_capacity(max as usize + 1);
            row.push(BigUint::one());
            for i in 1..=max as usize {
                let next = zp.mul(&row[i - 1], a.residue());
                row.push(next);
            }
            row
        })
        .collect()
}

fn monomial(zp: &Zp, powers: &[Vec<BigUint>], e: &[u32]) -> BigUint {
    let mut acc = BigUint::one();
    for (row, &k) in powers.iter().zip(e) {
        if k > 0 {
            acc = zp.mul(&acc, &row[k as usize]);
        }
    }
    acc
}

fn truncation_guarantee(k: u32, exact: bool, cutoff: u32, vmin: Option<u32>) -> u32 {
    if exact {
        return k;
    }
    match vmin {
        Some(v) => k.min((cutoff + 1).saturating_mul(v)),
        None => k,
    }
}

/// A truncated series in `num_vars` variables X1..Xn over Zp[[t1..tm]].
#[derive(Clone)]
pub struct MultiSeries {
    desc: RingDescriptor,
    poly: Poly,
}

impl PartialEq for MultiSeries {
    fn eq(&self, other: &Self) -> bool {
        self.desc == other.desc && self.poly.nx == other.poly.nx && self.poly.terms == other.poly.terms
    }
}
impl Eq for MultiSeries {}

impl MultiSeries {
    pub fn zero(desc: &RingDescriptor, num_vars: usize) -> Self {
        MultiSeries {
            desc: desc.clone(),
            poly: Poly::zero(num_vars),
        }
    }

    /// The variable X_i (0-based).
    pub fn var(desc: &RingDescriptor, num_vars: usize, i: usize) -> Self {
        let mut s = Self::zero(desc, num_vars);
        let mut key = vec![0; num_vars + desc.param_vars()];
        key[i] = 1;
        s.poly.insert_add(desc.zp(), key, &BigUint::one());
        s
    }

    pub fn constant(num_vars: usize, c: &RingElement) -> Self {
        let mut s = Self::zero(&c.desc, num_vars);
        s.poly.exact = c.poly.exact;
        for (e, x) in &c.poly.terms {
            let mut key = vec![0; num_vars];
            key.extend_from_slice(e);
            s.poly.insert_add(c.desc.zp(), key, x);
        }
        s
    }

    /// Builds a series from (X-exponent, t-exponent, coefficient) triples.
    pub fn from_terms(
        desc: &RingDescriptor,
        num_vars: usize,
        terms: impl IntoIterator<Item = (Vec<u32>, Vec<u32>, BigInt)>,
    ) -> Result<Self> {
        let zp = desc.zp();
        let mut poly = Poly::zero(num_vars);
        for (x, t, c) in terms {
            if x.len() != num_vars || t.len() != desc.param_vars() {
                return Err(Error::InvalidInput(format!(
                    "term exponents of lengths {}/{} for {num_vars} X- and {} t-variables",
                    x.len(),
                    t.len(),
                    desc.param_vars()
                )));
            }
            let c = zp.reduce_signed(&c);
            let mut key = x;
            key.extend(t);
            if !poly.within(&key, desc.degree_cutoff()) {
                if !c.is_zero() {
                    poly.exact = false;
                }
                continue;
            }
            poly.insert_add(zp, key, &c);
        }
        Ok(MultiSeries {
            desc: desc.clone(),
            poly,
        })
    }

    pub fn descriptor(&self) -> &RingDescriptor {
        &self.desc
    }

    pub fn num_vars(&self) -> usize {
        self.poly.nx
    }

    pub fn is_exact(&self) -> bool {
        self.poly.exact
    }

    /// Marks the series as an honest polynomial (no discarded tail).
    pub fn assume_exact(mut self, exact: bool) -> Self {
        self.poly.exact = exact;
        self
    }

    pub fn is_zero(&self) -> bool {
        self.poly.terms.is_empty()
    }

    /// (X-exponent, t-exponent, residue) triples in canonical order.
    pub fn terms(&self) -> impl Iterator<Item = (&[u32], &[u32], &BigUint)> {
        let nx = self.poly.nx;
        self.poly
            .terms
            .iter()
            .map(move |(k, c)| (&k[..nx], &k[nx..], c))
    }

    pub fn num_terms(&self) -> usize {
        self.poly.terms.len()
    }

    /// Highest total X-degree present.
    pub fn x_degree(&self) -> u32 {
        self.terms().map(|(x, _, _)| degree(x)).max().unwrap_or(0)
    }

    /// The coefficient of X^xexp as an element of Zp[[t]].
    pub fn coefficient(&self, xexp: &[u32]) -> RingElement {
        let mut r = RingElement::zero(&self.desc);
        r.poly.exact = self.poly.exact;
        for (x, t, c) in self.terms() {
            if x == xexp {
                r.poly.insert_add(self.desc.zp(), t.to_vec(), c);
            }
        }
        r
    }

    /// First term where `self` and `other` differ, as (X-exp, t-exp, difference).
    pub fn first_difference(&self, other: &Self) -> Option<(Vec<u32>, Vec<u32>, PadicScalar)> {
        let diff = self.try_sub(other).ok()?;
        let first = diff
            .terms()
            .next()
            .map(|(x, t, c)| (x.to_vec(), t.to_vec(), self.desc.zp().scalar(c.clone())));
        first
    }

    fn wrap(&self, poly: Poly) -> Self {
        MultiSeries {
            desc: self.desc.clone(),
            poly,
        }
    }

    fn check_compatible(&self, other: &Self) -> Result<()> {
        self.desc.check_same(&other.desc)?;
        if self.poly.nx != other.poly.nx {
            return Err(Error::DescriptorMismatch(format!(
                "{} vs {} variables",
                self.poly.nx, other.poly.nx
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.wrap(self.poly.add(&other.poly, self.desc.zp())))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.try_add(&other.neg())
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.check_compatible(other)?;
        Ok(self.wrap(
            self.poly
                .mul(&other.poly, self.desc.zp(), self.desc.degree_cutoff()),
        ))
    }

    pub fn neg(&self) -> Self {
        self.wrap(self.poly.neg(self.desc.zp()))
    }

    pub fn scale(&self, c: &BigUint) -> Self {
        self.wrap(self.poly.scale(self.desc.zp(), c))
    }

    /// Part of X-degree 0.
    pub fn constant_part(&self) -> RingElement {
        self.coefficient(&vec![0; self.poly.nx])
    }

    /// Replaces X_i by `images[i]`. Images must have no X-degree-0 part so
    /// that the composite is well defined under truncation.
    pub fn substitute(&self, images: &[MultiSeries]) -> Result<MultiSeries> {
        if images.len() != self.poly.nx {
            return Err(Error::DimensionMismatch(format!(
                "{} images for {} variables",
                images.len(),
                self.poly.nx
            )));
        }
        let Some(first) = images.first() else {
            return Ok(self.clone());
        };
        let target_vars = first.num_vars();
        for (var, img) in images.iter().enumerate() {
            self.desc.check_same(&img.desc)?;
            if img.num_vars() != target_vars {
                return Err(Error::DimensionMismatch("images differ in variable count".into()));
            }
            if !img.constant_part().is_zero() {
                return Err(Error::NonzeroConstantTerm { var });
            }
        }
        let zp = self.desc.zp();
        let mut powers: Vec<Vec<MultiSeries>> = images
            .iter()
            .map(|img| {
                let mut one = MultiSeries::zero(&self.desc, target_vars);
                one.poly.insert_add(
                    zp,
                    vec![0; target_vars + self.desc.param_vars()],
                    &BigUint::one(),
                );
                vec![one, img.clone()]
            })
            .collect();
        let mut out = Poly::zero(target_vars);
        out.exact = self.poly.exact && images.iter().all(|i| i.poly.exact);
        for (x, t, c) in self.terms() {
            let mut term = MultiSeries::zero(&self.desc, target_vars);
            let mut key = vec![0; target_vars];
            key.extend_from_slice(t);
            term.poly.insert_add(zp, key, c);
            for (i, &e) in x.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i]
                        .last()
                        .expect("nonempty")
                        .try_mul(&images[i])?;
                    powers[i].push(next);
                }
                term = term.try_mul(&powers[i][e as usize])?;
            }
            out.exact &= term.poly.exact;
            for (k, v) in &term.poly.terms {
                out.insert_add(zp, k.clone(), v);
            }
        }
        Ok(MultiSeries {
            desc: self.desc.clone(),
            poly: out,
        })
    }

    /// Evaluation at Zp points: X ↦ x, t ↦ a. All coordinates need
    /// valuation ≥ 1.
    pub fn evaluate(&self, x: &[PadicScalar], t: &[PadicScalar]) -> Result<Evaluation> {
        let zp = self.desc.zp();
        check_point(zp, x, self.poly.nx)?;
        check_point(zp, t, self.desc.param_vars())?;
        let cutoff = self.desc.degree_cutoff();
        let px = power_table(zp, x, cutoff);
        let pt = power_table(zp, t, cutoff);
        let mut acc = BigUint::zero();
        for (ex, et, c) in self.terms() {
            let m = zp.mul(&monomial(zp, &px, ex), &monomial(zp, &pt, et));
            acc = zp.add(&acc, &zp.mul(c, &m));
        }
        let vmin = x.iter().chain(t).map(PadicScalar::valuation).min();
        Ok(Evaluation {
            value: zp.scalar(acc),
            guarantee: truncation_guarantee(zp.precision(), self.poly.exact, cutoff, vmin),
        })
    }

    /// Substitutes ring elements (each in the maximal ideal) for the X
    /// variables. Returns the value and the ideal order up to which it is
    /// guaranteed.
    pub fn eval_ring(&self, x: &[RingElement]) -> Result<(RingElement, u32)> {
        if x.len() != self.poly.nx {
            return Err(Error::DimensionMismatch(format!(
                "{} values for {} variables",
                x.len(),
                self.poly.nx
            )));
        }
        let zp = self.desc.zp();
        let cutoff = self.desc.degree_cutoff();
        let mut ordmin = None::<u32>;
        for (index, xi) in x.iter().enumerate() {
            self.desc.check_same(&xi.desc)?;
            let o = xi.ideal_order();
            if o == 0 {
                return Err(Error::ValuationTooLow {
                    index,
                    valuation: 0,
                    required: 1,
                });
            }
            ordmin = Some(ordmin.map_or(o, |m| m.min(o)));
        }
        let mut powers: Vec<Vec<RingElement>> = x
            .iter()
            .map(|xi| vec![RingElement::one(&self.desc), xi.clone()])
            .collect();
        let mut acc = RingElement::zero(&self.desc);
        for (ex, et, c) in self.terms() {
            let mut term = RingElement::zero(&self.desc);
            term.poly.insert_add(zp, et.to_vec(), c);
            for (i, &e) in ex.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                while powers[i].len() <= e as usize {
                    let next = powers[i].last().expect("nonempty").try_mul(&x[i])?;
                    powers[i].push(next);
                }
                term = term.try_mul(&powers[i][e as usize])?;
            }
            acc = acc.try_add(&term)?;
        }
        let mut guarantee = truncation_guarantee(zp.precision(), self.poly.exact, cutoff, ordmin);
        let inputs_exact = x.iter().all(RingElement::is_exact);
        if !acc.is_exact() || !inputs_exact {
            guarantee = guarantee.min(cutoff + 1);
        }
        acc.poly.exact = true;
        Ok((acc, guarantee))
    }

    /// Evaluates the t-variables at `a`, giving a series over Zp. Returns the
    /// specialized series and the p-adic precision of its coefficients.
    pub fn specialize_t(&self, a: &[PadicScalar]) -> Result<(MultiSeries, u32)> {
        let zp = self.desc.zp();
        check_point(zp, a, self.desc.param_vars())?;
        let cutoff = self.desc.degree_cutoff();
        let pt = power_table(zp, a, cutoff);
        let desc = self.desc.over_zp();
        let mut poly = Poly::zero(self.poly.nx);
        poly.exact = self.poly.exact;
        for (ex, et, c) in self.terms() {
            poly.insert_add(zp, ex.to_vec(), &zp.mul(c, &monomial(zp, &pt, et)));
        }
        let vmin = a.iter().map(PadicScalar::valuation).min();
        let guarantee = truncation_guarantee(zp.precision(), self.poly.exact, cutoff, vmin);
        Ok((MultiSeries { desc, poly }, guarantee))
    }

    /// Reinterprets the coefficients at another precision (same prime,
    /// variables and cutoff).
    pub fn with_descriptor(&self, desc: &RingDescriptor) -> Self {
        debug_assert_eq!(desc.param_vars(), self.desc.param_vars());
        let mut poly = self.poly.with_zp(desc.zp());
        let before = poly.terms.len();
        let cutoff = desc.degree_cutoff();
        let nx = poly.nx;
        poly.terms
            .retain(|k, _| degree(&k[..nx]) <= cutoff && degree(&k[nx..]) <= cutoff);
        if before != poly.terms.len() {
            poly.exact = false;
        }
        MultiSeries {
            desc: desc.clone(),
            poly,
        }
    }

    /// Keeps only the terms of X-degree exactly `deg`.
    pub fn homogeneous_part(&self, deg: u32) -> MultiSeries {
        let mut out = self.clone();
        let nx = out.poly.nx;
        out.poly.terms.retain(|k, _| degree(&k[..nx]) == deg);
        out
    }

    /// Embeds into a series ring with more variables, placing variable i at
    /// position `offset + i`.
    pub fn embed(&self, total_vars: usize, offset: usize) -> MultiSeries {
        let nx = self.poly.nx;
        let mut poly = Poly::zero(total_vars);
        poly.exact = self.poly.exact;
        for (k, c) in &self.poly.terms {
            let mut key = vec![0; total_vars];
            key[offset..offset + nx].copy_from_slice(&k[..nx]);
            key.extend_from_slice(&k[nx..]);
            poly.terms.insert(key, c.clone());
        }
        MultiSeries {
            desc: self.desc.clone(),
            poly,
        }
    }
}

impl fmt::Debug for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for MultiSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = (1..=self.poly.nx).map(|i| format!("X{i}")).collect();
        write_terms(f, self.desc.zp(), &self.poly, &names)
    }
}

/// Formats a monomial such as `X1*X2^2*t1`; variable names beyond `xnames`
/// are the t-variables.
pub fn monomial_name(xexp: &[u32], texp: &[u32], xnames: &[String]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in xexp.iter().enumerate() {
        let name = xnames.get(i).cloned().unwrap_or_else(|| format!("X{}", i + 1));
        match e {
            0 => {}
            1 => parts.push(name),
            _ => parts.push(format!("{name}^{e}")),
        }
    }
    for (i, &e) in texp.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(format!("t{}", i + 1)),
            _ => parts.push(format!("t{}^{e}", i + 1)),
        }
    }
    if parts.is_empty() {
        "1".to_string()
    } else {
        parts.join("*")
    }
}

fn write_terms(f: &mut fmt::Formatter<'_>, zp: &Zp, poly: &Poly, xnames: &[String]) -> fmt::Result {
    if poly.terms.is_empty() {
        return write!(f, "0");
    }
    let mut first = true;
    // graded order reads more naturally than the lexicographic key order
    let mut terms: Vec<_> = poly.terms.iter().collect();
    terms.sort_by_key(|(k, _)| (degree(&k[..poly.nx]), degree(&k[poly.nx..]), std::cmp::Reverse((*k).clone())));
    for (k, c) in terms {
        let c = zp.signed(c);
        let mono = monomial_name(&k[..poly.nx], &k[poly.nx..], xnames);
        let neg = c < BigInt::zero();
        let mag = if neg { -c.clone() } else { c.clone() };
        if first {
            if neg {
                write!(f, "-")?;
            }
        } else {
            write!(f, " {} ", if neg { "-" } else { "+" })?;
        }
        first = false;
        if mono == "1" {
            write!(f, "{mag}")?;
        } else if mag.is_one() {
            write!(f, "{mono}")?;
        } else {
            write!(f, "{mag}*{mono}")?;
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn desc(p: u64, k: u32, m: usize, d: u32) -> RingDescriptor {
        RingDescriptor::new(p, k, m, d).unwrap()
    }

    fn ring(d: &RingDescriptor, terms: &[(&[u32], i64)]) -> RingElement {
        RingElement::from_terms(d, terms.iter().map(|(e, c)| (e.to_vec(), BigInt::from(*c)))).unwrap()
    }

    fn series(d: &RingDescriptor, n: usize, terms: &[(&[u32], &[u32], i64)]) -> MultiSeries {
        MultiSeries::from_terms(
            d,
            n,
            terms.iter().map(|(x, t, c)| (x.to_vec(), t.to_vec(), BigInt::from(*c))),
        )
        .unwrap()
    }

    fn sc(d: &RingDescriptor, x: i64) -> PadicScalar {
        d.zp().int(x)
    }

    #[test]
    fn one_plus_t_times_one_minus_t() {
        let d = desc(3, 4, 1, 4);
        let a = ring(&d, &[(&[0], 1), (&[1], 1)]);
        let b = ring(&d, &[(&[0], 1), (&[1], -1)]);
        assert_eq!(a.try_mul(&b).unwrap(), ring(&d, &[(&[0], 1), (&[2], -1)]));
    }

    #[test]
    fn cutoff_drops_high_degree() {
        let d = desc(3, 4, 0, 2);
        let f = series(&d, 1, &[(&[1], &[], 1), (&[2], &[], 1)]);
        let sq = f.try_mul(&f).unwrap();
        assert_eq!(sq, series(&d, 1, &[(&[2], &[], 1)]));
        assert!(!sq.is_exact());
    }

    #[test]
    fn substitute_square() {
        let d = desc(5, 4, 0, 4);
        let f = series(&d, 1, &[(&[2], &[], 1)]);
        let xy = series(&d, 2, &[(&[1, 0], &[], 1), (&[0, 1], &[], 1)]);
        let got = f.substitute(&[xy]).unwrap();
        assert_eq!(
            got,
            series(&d, 2, &[(&[2, 0], &[], 1), (&[1, 1], &[], 2), (&[0, 2], &[], 1)])
        );
    }

    #[test]
    fn substitute_identity_axiom_instance() {
        let d = desc(5, 4, 0, 4);
        let f = series(&d, 2, &[(&[1, 0], &[], 1), (&[0, 1], &[], 1), (&[1, 1], &[], 1)]);
        let x = MultiSeries::var(&d, 1, 0);
        let zero = MultiSeries::zero(&d, 1);
        assert_eq!(f.substitute(&[x.clone(), zero]).unwrap(), x);
    }

    #[test]
    fn additive_law_is_associative() {
        let d = desc(5, 4, 0, 4);
        let f = series(&d, 2, &[(&[1, 0], &[], 1), (&[0, 1], &[], 1)]);
        let v = |i| MultiSeries::var(&d, 3, i);
        let fxy = f.substitute(&[v(0), v(1)]).unwrap();
        let fyz = f.substitute(&[v(1), v(2)]).unwrap();
        let left = f.substitute(&[fxy, v(2)]).unwrap();
        let right = f.substitute(&[v(0), fyz]).unwrap();
        assert_eq!(left, right);
    }

    #[test]
    fn substitute_rejects_constant_image() {
        let d = desc(5, 4, 1, 4);
        let f = series(&d, 1, &[(&[1], &[0], 1)]);
        let img = series(&d, 1, &[(&[0], &[1], 1)]);
        assert_eq!(f.substitute(&[img]).unwrap_err(), Error::NonzeroConstantTerm { var: 0 });
    }

    #[test]
    fn evaluate_fixtures() {
        let d = desc(3, 3, 1, 4);
        let one_plus_t = ring(&d, &[(&[0], 1), (&[1], 1)]);
        assert_eq!(one_plus_t.evaluate(&[sc(&d, 3)]).unwrap().value, sc(&d, 4));

        let geo = ring(&d, &[(&[0], 1), (&[1], 1), (&[2], 1), (&[3], 1), (&[4], 1)]);
        let ev = geo.evaluate(&[sc(&d, 3)]).unwrap();
        assert_eq!(ev.value, sc(&d, 13));
        // 13 = -1/2 mod 27
        assert!((&ev.value * &sc(&d, 2) + sc(&d, 1)).is_zero());

        let f = ring(&d, &[(&[1], 3), (&[2], -1)]);
        assert_eq!(f.evaluate(&[sc(&d, 6)]).unwrap().value, sc(&d, 9));

        assert!(matches!(
            one_plus_t.evaluate(&[sc(&d, 1)]),
            Err(Error::ValuationTooLow { .. })
        ));
    }

    #[test]
    fn ideal_orders() {
        let d = desc(3, 6, 1, 4);
        assert_eq!(ring(&d, &[(&[1], 3)]).ideal_order(), 2);
        assert_eq!(RingElement::one(&d).ideal_order(), 0);
        assert_eq!(ring(&d, &[(&[2], 3), (&[0], 27)]).ideal_order(), 3);
        assert_eq!(RingElement::zero(&d).ideal_order(), 10);
    }

    #[test]
    fn geometric_series_consistency() {
        for p in [3u64, 5] {
            for k in 1..=6u32 {
                let d = desc(p, k, 1, k.max(2));
                let geo = ring(&d, &(0..=d.degree_cutoff()).map(|i| (vec![i], 1i64)).collect::<Vec<_>>()
                    .iter().map(|(e, c)| (e.as_slice(), *c)).collect::<Vec<_>>());
                let ev = geo.evaluate(&[sc(&d, p as i64)]).unwrap();
                let inv = sc(&d, 1 - p as i64).inv().unwrap();
                assert!(ev.value.congruent(&inv.with_precision(ev.guarantee)));
                assert!(ev.value.with_precision(ev.guarantee).congruent(&inv));
            }
        }
    }

    #[test]
    fn specialize_twisted_law() {
        let d = desc(3, 6, 1, 6);
        let f = series(&d, 2, &[(&[1, 0], &[0], 1), (&[0, 1], &[0], 1), (&[1, 1], &[1], 1)]);
        let (g, prec) = f.specialize_t(&[sc(&d, 6)]).unwrap();
        let z = d.over_zp();
        assert_eq!(g, series(&z, 2, &[(&[1, 0], &[], 1), (&[0, 1], &[], 1), (&[1, 1], &[], 6)]));
        assert_eq!(prec, 6);
    }

    fn arb_ring(d: RingDescriptor) -> impl Strategy<Value = RingElement> {
        proptest::collection::vec((0u32..3, -30i64..30), 0..4).prop_map(move |ts| {
            RingElement::from_terms(&d, ts.into_iter().map(|(e, c)| (vec![e], BigInt::from(c)))).unwrap()
        })
    }

    fn arb_series(d: RingDescriptor) -> impl Strategy<Value = MultiSeries> {
        proptest::collection::vec((0u32..3, 0u32..3, 0u32..2, -30i64..30), 0..5).prop_map(move |ts| {
            MultiSeries::from_terms(
                &d,
                2,
                ts.into_iter().map(|(a, b, t, c)| (vec![a, b], vec![t], BigInt::from(c))),
            )
            .unwrap()
        })
    }

    fn arb_image(d: RingDescriptor) -> impl Strategy<Value = MultiSeries> {
        proptest::collection::vec((0u32..3, 0u32..3, 0u32..2, -30i64..30), 1..4).prop_map(move |ts| {
            MultiSeries::from_terms(
                &d,
                2,
                ts.into_iter()
                    .filter(|(a, b, _, _)| a + b > 0)
                    .map(|(a, b, t, c)| (vec![a, b], vec![t], BigInt::from(c))),
            )
            .unwrap()
        })
    }

    proptest! {
        #[test]
        fn substitution_is_multiplicative(
            f in arb_series(desc(3, 5, 1, 4)),
            g in arb_series(desc(3, 5, 1, 4)),
            i1 in arb_image(desc(3, 5, 1, 4)),
            i2 in arb_image(desc(3, 5, 1, 4)),
        ) {
            let imgs = [i1, i2];
            let lhs = f.try_mul(&g).unwrap().substitute(&imgs).unwrap();
            let rhs = f.substitute(&imgs).unwrap().try_mul(&g.substitute(&imgs).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn evaluation_is_a_ring_map(
            f in arb_ring(desc(5, 6, 1, 3)),
            g in arb_ring(desc(5, 6, 1, 3)),
            a in 1i64..200,
        ) {
            let d = desc(5, 6, 1, 3);
            let pt = [sc(&d, 5 * a)];
            let fg = f.try_mul(&g).unwrap().evaluate(&pt).unwrap();
            let ef = f.evaluate(&pt).unwrap();
            let eg = g.evaluate(&pt).unwrap();
            let prod = &ef.value * &eg.value;
            let prec = fg.guarantee.min(ef.guarantee).min(eg.guarantee);
            prop_assert!(fg.value.with_precision(prec).congruent(&prod.with_precision(prec)));
        }

        #[test]
        fn ideal_order_is_superadditive(
            f in arb_ring(desc(3, 6, 1, 3)),
            g in arb_ring(desc(3, 6, 1, 3)),
        ) {
            let d = desc(3, 6, 1, 3);
            let cap = d.zero_order();
            let bound = (f.ideal_order() + g.ideal_order()).min(cap);
            let prod = f.try_mul(&g).unwrap();
            prop_assert!(prod.ideal_order() >= bound);
        }
    }
}
