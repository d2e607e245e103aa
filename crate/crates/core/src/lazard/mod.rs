//! The Lazard correspondence for a Zp-standard group G of level N.
//!
//! The Lie lattice 𝓛(G) has the same underlying set as G with
//! x + y = lim (x^{p^n} y^{p^n})^{p^{-n}} and
//! [x, y] = lim comm(x^{p^n}, y^{p^n})^{p^{-2n}}.
//!
//! Limits are evaluated on a copy of the law lifted to a working precision
//! K = 3(k + N) + 4, so that the p^n-th roots taken along the way still leave
//! k correct digits. Inputs are treated as exact integer data.

pub mod embed;
pub mod expm;
pub mod rep;

pub use embed::{coset_transversal, uniform_embedding, GroupHomCertificate, InducedImage, SampleCheck, UniformEmbedding};
pub use expm::{bch, mat_exp, mat_log};
pub use rep::{build_rep, MatrixRep, RepStrategy};

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;

use crate::error::{Error, Result};
use crate::fgl::{FormalGroupLaw, StandardPoint};
use crate::zp::{PadicMatrix, PadicScalar, Zp};

/// 𝐩: p for odd p, 4 for p = 2.
pub fn bold_p(p: u64) -> u64 {
    if p == 2 {
        4
    } else {
        p
    }
}

/// v_p(𝐩).
pub fn bold_p_valuation(p: u64) -> u32 {
    if p == 2 {
        2
    } else {
        1
    }
}

/// A point obtained as a stabilized limit, with the index n of the first
/// iterate that agreed with its predecessor.
#[derive(Clone, Debug)]
pub struct LimitValue {
    pub point: StandardPoint,
    pub index: u32,
}

fn over_zp(law: &FormalGroupLaw) -> Result<()> {
    if law.is_over_zp() {
        Ok(())
    } else {
        Err(Error::NotOverZp(law.descriptor().param_vars()))
    }
}

fn min_valuation(zp: &Zp, residues: &[BigUint]) -> u32 {
    residues
        .iter()
        .map(|r| zp.valuation(r))
        .min()
        .unwrap_or(zp.precision())
}

/// Coordinate-wise integer division by p^e of the residues (which must be
/// divisible), as an exact point of `law`.
fn divide_point(law: &FormalGroupLaw, residues: &[BigUint], e: u32) -> Result<StandardPoint> {
    let shift = law.zp().prime_power(e);
    let q: Vec<BigUint> = residues.iter().map(|r| r / &shift).collect();
    law.point_from_residues(&q, law.zp().precision())
}

/// The p^e-th root of P in G. The result Q satisfies Q^{p^e} ≡ P and is
/// determined to e fewer digits than P.
///
/// Starting from the chart quotient P/p^e, each round multiplies by the
/// correction (Q^{-p^e}·P)/p^e, which gains at least N digits.
pub fn p_root(law: &FormalGroupLaw, target: &StandardPoint, e: u32) -> Result<StandardPoint> {
    over_zp(law)?;
    if e == 0 {
        return Ok(target.clone());
    }
    let zp = law.zp();
    let k = zp.precision();
    let prec = target.precision();
    if prec <= e {
        return Err(Error::PrecisionExhausted(format!(
            "p^{e}-th root of a point known to {prec} digits"
        )));
    }
    let need = law.level() + e;
    let residues = target.residues();
    if min_valuation(zp, &residues) < need.min(prec) {
        return Err(Error::NotAPower { exponent: e });
    }
    let pe = BigInt::from(zp.prime()).pow(e);
    let mut root = divide_point(law, &residues, e)?;
    for _ in 0..=k {
        let power = law.gpow(&root, &pe)?;
        let defect = law.gmul(&law.ginv(&power)?, target)?;
        let dres = defect.residues();
        let dval = min_valuation(zp, &dres);
        if dval >= defect.precision() {
            if defect.precision() < prec {
                return Err(Error::PrecisionExhausted(format!(
                    "root defect known to {} of {prec} digits",
                    defect.precision()
                )));
            }
            return Ok(root.with_precision_cap(prec - e));
        }
        if dval < need {
            return Err(Error::NotAPower { exponent: e });
        }
        let correction = divide_point(law, &dres, e)?;
        root = law.gmul(&root, &correction)?.with_precision_cap(k);
        root = law.point_from_residues(&root.residues(), k)?;
    }
    Err(Error::NotAPower { exponent: e })
}

/// Lazard operations for a fixed Zp-law.
pub struct Lazard {
    law: FormalGroupLaw,
    work: FormalGroupLaw,
    log_inverse: OnceLock<std::result::Result<PadicMatrix, Error>>,
}

impl fmt::Debug for Lazard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lazard")
            .field("precision", &self.precision())
            .field("working_precision", &self.working_precision())
            .field("law", &self.law)
            .finish()
    }
}

impl Clone for Lazard {
    fn clone(&self) -> Self {
        Lazard {
            law: self.law.clone(),
            work: self.work.clone(),
            log_inverse: OnceLock::new(),
        }
    }
}

pub fn working_precision(k: u32, level: u32) -> u32 {
    3 * (k + level) + 4
}

impl Lazard {
    /// Sets up the correspondence for a law over Zp whose coefficients are
    /// exact integers; the working copy is its canonical lift.
    pub fn new(law: &FormalGroupLaw) -> Result<Self> {
        let work = law.with_precision(working_precision(law.zp().precision(), law.level()));
        Self::with_working_law(law, work)
    }

    /// As [`Lazard::new`] with an explicitly supplied working copy of the law
    /// (same law, higher precision).
    pub fn with_working_law(law: &FormalGroupLaw, work: FormalGroupLaw) -> Result<Self> {
        over_zp(law)?;
        over_zp(&work)?;
        if !law.level_ok() {
            return Err(Error::LevelConstraint {
                prime: law.descriptor().prime(),
                level: law.level(),
            });
        }
        if work.dim() != law.dim()
            || work.level() != law.level()
            || work.descriptor().prime() != law.descriptor().prime()
            || work.zp().precision() < working_precision(law.zp().precision(), law.level())
        {
            return Err(Error::InvalidInput(
                "working law does not match the law it lifts".into(),
            ));
        }
        Ok(Lazard {
            law: law.clone(),
            work,
            log_inverse: OnceLock::new(),
        })
    }

    pub fn law(&self) -> &FormalGroupLaw {
        &self.law
    }

    pub fn working_law(&self) -> &FormalGroupLaw {
        &self.work
    }

    pub fn precision(&self) -> u32 {
        self.law.zp().precision()
    }

    pub fn working_precision(&self) -> u32 {
        self.work.zp().precision()
    }

    pub fn prime(&self) -> u64 {
        self.law.descriptor().prime()
    }

    pub fn dim(&self) -> usize {
        self.law.dim()
    }

    pub fn level(&self) -> u32 {
        self.law.level()
    }

    /// Lifts a point to the working law (exact integer data).
    pub fn lift(&self, p: &StandardPoint) -> Result<StandardPoint> {
        self.work.transfer_point(p)
    }

    /// Reduces a working point to the output precision.
    pub fn reduce(&self, p: &StandardPoint) -> Result<StandardPoint> {
        self.reduce_to(p, self.precision())
    }

    fn reduce_to(&self, p: &StandardPoint, digits: u32) -> Result<StandardPoint> {
        if p.precision() < digits {
            return Err(Error::PrecisionExhausted(format!(
                "value known to {} digits, {digits} required",
                p.precision()
            )));
        }
        let zp = self.law.zp().with_precision(digits);
        let res: Vec<BigUint> = p.residues().iter().map(|r| zp.reduce(r)).collect();
        self.law.point_from_residues(&res, digits)
    }

    fn agree(&self, a: &StandardPoint, b: &StandardPoint, digits: u32) -> bool {
        let zp = self.work.zp().with_precision(digits);
        a.residues()
            .iter()
            .zip(b.residues())
            .all(|(x, y)| zp.reduce(x) == zp.reduce(&y))
    }

    /// The working-precision basis point p^N·δ_i.
    pub fn basis_point(&self, i: usize) -> StandardPoint {
        self.work.basis_point(i)
    }

    pub fn basis(&self) -> Vec<StandardPoint> {
        (0..self.dim()).map(|i| self.law.basis_point(i)).collect()
    }

    /// Runs `step(n)` for n = 0, 1, … until two successive values agree in
    /// `digits` digits, with at most `digits` iterations.
    fn stabilize(
        &self,
        digits: u32,
        mut step: impl FnMut(u32) -> Result<StandardPoint>,
    ) -> Result<(StandardPoint, u32)> {
        let mut prev = step(0)?;
        for n in 1..=digits {
            let cur = step(n)?;
            if cur.precision() < digits {
                return Err(Error::PrecisionExhausted(format!(
                    "limit iterate {n} known to {} digits, {digits} required",
                    cur.precision()
                )));
            }
            if self.agree(&cur, &prev, digits) {
                return Ok((cur, n));
            }
            prev = cur;
        }
        Err(Error::NoStabilization { iterations: digits })
    }

    /// Lazard sum of working points, stabilized in `digits` digits.
    pub fn lazard_sum_work(&self, points: &[StandardPoint], digits: u32) -> Result<(StandardPoint, u32)> {
        let p = BigInt::from(self.prime());
        let mut powers = points.to_vec();
        self.stabilize(digits, |n| {
            if n > 0 {
                for x in powers.iter_mut() {
                    *x = self.work.gpow(x, &p)?;
                }
            }
            let mut prod = self.work.identity();
            for x in &powers {
                prod = self.work.gmul(&prod, x)?;
            }
            p_root(&self.work, &prod, n)
        })
    }

    /// Lazard bracket of working points, stabilized in `digits` digits.
    pub fn lazard_bracket_work(
        &self,
        x: &StandardPoint,
        y: &StandardPoint,
        digits: u32,
    ) -> Result<(StandardPoint, u32)> {
        let p = BigInt::from(self.prime());
        let (mut xp, mut yp) = (x.clone(), y.clone());
        self.stabilize(digits, |n| {
            if n > 0 {
                xp = self.work.gpow(&xp, &p)?;
                yp = self.work.gpow(&yp, &p)?;
            }
            let c = self.work.gcomm(&xp, &yp)?;
            p_root(&self.work, &c, 2 * n)
        })
    }

    /// x +_L y at the output precision.
    pub fn lazard_add(&self, x: &StandardPoint, y: &StandardPoint) -> Result<LimitValue> {
        let (v, index) = self.lazard_sum_work(&[self.lift(x)?, self.lift(y)?], self.precision())?;
        Ok(LimitValue {
            point: self.reduce(&v)?,
            index,
        })
    }

    /// [x, y]_L at the output precision.
    pub fn lazard_bracket(&self, x: &StandardPoint, y: &StandardPoint) -> Result<LimitValue> {
        let (v, index) = self.lazard_bracket_work(&self.lift(x)?, &self.lift(y)?, self.precision())?;
        Ok(LimitValue {
            point: self.reduce(&v)?,
            index,
        })
    }

    /// Exponent used for the logarithm limit log(x) = lim chart(x^{p^n})/p^n.
    fn log_index(&self) -> u32 {
        self.precision() + self.level() + 1
    }

    /// Digits to which log vectors (divided by p^N) are computed.
    fn log_digits(&self) -> u32 {
        self.precision() + self.level()
    }

    /// chart(x^{p^n})/p^{n+N} for a working point x: the formal logarithm of
    /// x divided by p^N, as a vector mod p^{k+N}.
    fn scaled_log(&self, x: &StandardPoint) -> Result<Vec<BigUint>> {
        let n = self.log_index();
        let zp = self.work.zp();
        let e = BigInt::from(zp.prime()).pow(n);
        let y = self.work.gpow(x, &e)?;
        let shift = n + self.level();
        let digits = self.log_digits();
        if y.precision() < shift + digits {
            return Err(Error::PrecisionExhausted(format!(
                "logarithm needs {} digits, power known to {}",
                shift + digits,
                y.precision()
            )));
        }
        let out_ring = zp.with_precision(digits);
        let div = zp.prime_power(shift);
        y.residues()
            .iter()
            .map(|r| {
                if zp.valuation(r) < shift {
                    Err(Error::PrecisionExhausted(format!(
                        "power of a point outside the level-{} subgroup",
                        self.level()
                    )))
                } else {
                    Ok(out_ring.reduce(&(r / &div)))
                }
            })
            .collect()
    }

    /// B⁻¹ where column i of B is the scaled logarithm of e_i.
    fn log_inverse(&self) -> Result<&PadicMatrix> {
        let r = self.log_inverse.get_or_init(|| {
            let d = self.dim();
            let ring = self.work.zp().with_precision(self.log_digits());
            let cols = (0..d)
                .map(|i| self.scaled_log(&self.basis_point(i)))
                .collect::<Result<Vec<_>>>()?;
            PadicMatrix::from_fn(&ring, d, d, |r, c| cols[c][r].clone()).inverse()
        });
        r.as_ref().map_err(Clone::clone)
    }

    /// Coordinates λ of a working point in the basis e_i of 𝓛(G), mod p^k.
    pub fn lie_coordinates_work(&self, x: &StandardPoint) -> Result<Vec<PadicScalar>> {
        let binv = self.log_inverse()?;
        let v = self.scaled_log(x)?;
        let col = PadicMatrix::from_residues(binv.ring(), v.len(), 1, v)?;
        let lambda = binv.try_mul(&col)?;
        let out = self.law.zp();
        Ok((0..self.dim())
            .map(|i| out.scalar(out.reduce(lambda.raw(i, 0))))
            .collect())
    }

    /// λ with Σ_L λ_i·e_i = P, mod p^k.
    pub fn lie_coordinates(&self, p: &StandardPoint) -> Result<Vec<PadicScalar>> {
        self.lie_coordinates_work(&self.lift(p)?)
    }

    /// Σ_L λ_i·e_i as a working point, correct in k + N digits.
    pub fn combination_work(&self, lambda: &[BigInt]) -> Result<StandardPoint> {
        if lambda.len() != self.dim() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for rank {}",
                lambda.len(),
                self.dim()
            )));
        }
        let terms = lambda
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| self.work.gpow(&self.basis_point(i), c))
            .collect::<Result<Vec<_>>>()?;
        match terms.len() {
            0 => Ok(self.work.identity()),
            1 => Ok(terms.into_iter().next().expect("one term")),
            _ => Ok(self.lazard_sum_work(&terms, self.log_digits())?.0),
        }
    }

    /// Σ_L λ_i·e_i at the output precision.
    pub fn combination(&self, lambda: &[PadicScalar]) -> Result<StandardPoint> {
        let ints: Vec<BigInt> = lambda.iter().map(|x| BigInt::from(x.residue().clone())).collect();
        self.reduce(&self.combination_work(&ints)?)
    }

    /// Structure constants of 𝓛(G) in the basis e_i = p^N·δ_i.
    pub fn lie_lattice(&self) -> Result<LieLattice> {
        let d = self.dim();
        let zp = self.law.zp().clone();
        let mut c = vec![vec![vec![BigUint::zero(); d]; d]; d];
        for i in 0..d {
            for j in i + 1..d {
                let (b, _) = self.lazard_bracket_work(
                    &self.basis_point(i),
                    &self.basis_point(j),
                    self.log_digits(),
                )?;
                let lambda = self.lie_coordinates_work(&b)?;
                for (l, x) in lambda.iter().enumerate() {
                    c[i][j][l] = x.residue().clone();
                    c[j][i][l] = zp.neg(x.residue());
                }
            }
        }
        let lattice = LieLattice::new(&zp, c)?;
        if !lattice.is_powerful() {
            return Err(Error::NotPowerful(format!(
                "some structure constant has valuation below {}",
                bold_p_valuation(zp.prime())
            )));
        }
        Ok(lattice)
    }
}

/// The Lie lattice of a law over Zp, together with its basis points.
pub fn lie_lattice_of(law: &FormalGroupLaw) -> Result<(LieLattice, Vec<StandardPoint>)> {
    let lazard = Lazard::new(law)?;
    Ok((lazard.lie_lattice()?, lazard.basis()))
}

/// A free Zp-Lie algebra of rank d given by structure constants
/// [e_i, e_j] = Σ_l c_ij^l e_l, mod p^k.
#[derive(Clone, PartialEq, Eq)]
pub struct LieLattice {
    zp: Zp,
    constants: Vec<Vec<Vec<BigUint>>>,
}

impl fmt::Debug for LieLattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LieLattice(rank {}, {:?}", self.rank(), self.zp)?;
        for (i, j, l, c) in self.nonzero_constants() {
            write!(f, ", c_{}{}^{} = {}", i + 1, j + 1, l + 1, c)?;
        }
        write!(f, ")")
    }
}

impl LieLattice {
    /// Validates antisymmetry and the Jacobi identity mod p^k.
    pub fn new(zp: &Zp, constants: Vec<Vec<Vec<BigUint>>>) -> Result<Self> {
        let d = constants.len();
        if constants.iter().any(|r| r.len() != d || r.iter().any(|c| c.len() != d)) {
            return Err(Error::DimensionMismatch("structure constants must be d×d×d".into()));
        }
        let constants = constants
            .into_iter()
            .map(|a| a.into_iter().map(|b| b.iter().map(|x| zp.reduce(x)).collect()).collect())
            .collect();
        let lattice = LieLattice {
            zp: zp.clone(),
            constants,
        };
        lattice.check()?;
        Ok(lattice)
    }

    /// Builds a lattice from the constants c_ij^l for i < j (the rest follow
    /// by antisymmetry).
    pub fn from_brackets(zp: &Zp, rank: usize, brackets: &[(usize, usize, usize, i64)]) -> Result<Self> {
        let mut c = vec![vec![vec![BigUint::zero(); rank]; rank]; rank];
        for &(i, j, l, v) in brackets {
            if i >= rank || j >= rank || l >= rank || i == j {
                return Err(Error::InvalidLattice(format!("bad bracket index ({i}, {j}, {l})")));
            }
            c[i][j][l] = zp.from_i64(v);
            c[j][i][l] = zp.from_i64(-v);
        }
        Self::new(zp, c)
    }

    pub fn zp(&self) -> &Zp {
        &self.zp
    }

    pub fn rank(&self) -> usize {
        self.constants.len()
    }

    pub fn constant(&self, i: usize, j: usize, l: usize) -> PadicScalar {
        self.zp.scalar(self.constants[i][j][l].clone())
    }

    pub fn raw_constant(&self, i: usize, j: usize, l: usize) -> &BigUint {
        &self.constants[i][j][l]
    }

    /// (i, j, l, c) for i < j and nonzero c.
    pub fn nonzero_constants(&self) -> Vec<(usize, usize, usize, BigInt)> {
        let d = self.rank();
        let mut out = Vec::new();
        for i in 0..d {
            for j in i + 1..d {
                for l in 0..d {
                    let c = &self.constants[i][j][l];
                    if !c.is_zero() {
                        out.push((i, j, l, self.zp.signed(c)));
                    }
                }
            }
        }
        out
    }

    /// [x, y] for coordinate vectors.
    pub fn bracket(&self, x: &[BigUint], y: &[BigUint]) -> Vec<BigUint> {
        let d = self.rank();
        let mut out = vec![BigUint::zero(); d];
        for i in 0..d {
            if x[i].is_zero() {
                continue;
            }
            for j in 0..d {
                if y[j].is_zero() {
                    continue;
                }
                let xy = self.zp.mul(&x[i], &y[j]);
                for (l, o) in out.iter_mut().enumerate() {
                    let c = &self.constants[i][j][l];
                    if !c.is_zero() {
                        *o = self.zp.add(o, &self.zp.mul(&xy, c));
                    }
                }
            }
        }
        out
    }

    fn unit_vector(&self, i: usize) -> Vec<BigUint> {
        let mut v = vec![BigUint::zero(); self.rank()];
        v[i] = BigUint::from(1u32);
        v
    }

    pub fn check(&self) -> Result<()> {
        let d = self.rank();
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    let sum = self.zp.add(&self.constants[i][j][l], &self.constants[j][i][l]);
                    if !sum.is_zero() {
                        return Err(Error::InvalidLattice(format!(
                            "c_{}{}^{} + c_{}{}^{} is nonzero",
                            i + 1,
                            j + 1,
                            l + 1,
                            j + 1,
                            i + 1,
                            l + 1
                        )));
                    }
                }
            }
        }
        for i in 0..d {
            for j in i + 1..d {
                for k in j + 1..d {
                    let (a, b, c) = (self.unit_vector(i), self.unit_vector(j), self.unit_vector(k));
                    let t1 = self.bracket(&self.bracket(&a, &b), &c);
                    let t2 = self.bracket(&self.bracket(&b, &c), &a);
                    let t3 = self.bracket(&self.bracket(&c, &a), &b);
                    let ok = (0..d).all(|l| {
                        self.zp
                            .add(&self.zp.add(&t1[l], &t2[l]), &t3[l])
                            .is_zero()
                    });
                    if !ok {
                        return Err(Error::InvalidLattice(format!(
                            "Jacobi identity fails for (e{}, e{}, e{})",
                            i + 1,
                            j + 1,
                            k + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn is_abelian(&self) -> bool {
        self.constants.iter().flatten().flatten().all(Zero::is_zero)
    }

    /// [𝔏, 𝔏] ⊆ 𝐩𝔏.
    pub fn is_powerful(&self) -> bool {
        let s = bold_p_valuation(self.zp.prime());
        self.constants
            .iter()
            .flatten()
            .flatten()
            .all(|c| self.zp.valuation(c) >= s)
    }

    /// Whether the lower central series reaches zero mod p^k.
    pub fn is_nilpotent(&self) -> bool {
        let d = self.rank();
        // span of the current term, kept as generators
        let mut term: Vec<Vec<BigUint>> = (0..d).map(|i| self.unit_vector(i)).collect();
        for _ in 0..=d {
            let mut next = Vec::new();
            for x in &term {
                for i in 0..d {
                    let b = self.bracket(&self.unit_vector(i), x);
                    if b.iter().any(|c| !c.is_zero()) {
                        next.push(b);
                    }
                }
            }
            if next.is_empty() {
                return true;
            }
            term = crate::zp::howell_form(&self.zp, &next);
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::RingDescriptor;

    fn desc(p: u64, k: u32) -> RingDescriptor {
        RingDescriptor::new(p, k, 0, 6).unwrap()
    }

    fn ints(p: &StandardPoint) -> Vec<i64> {
        p.coords()
            .iter()
            .map(|c| c.constant_term().to_i64().unwrap())
            .collect()
    }

    #[test]
    fn root_fixtures() {
        let add = FormalGroupLaw::additive(&desc(3, 4), 1, 1).unwrap();
        let r = p_root(&add, &add.point_from_ints(&[9]).unwrap(), 1).unwrap();
        assert_eq!(ints(&r), vec![3]);
        assert_eq!(r.precision(), 3);

        let mult = FormalGroupLaw::multiplicative(&desc(3, 3), 1).unwrap();
        let r = p_root(&mult, &mult.point_from_ints(&[9]).unwrap(), 1).unwrap();
        assert_eq!(r.precision(), 2);
        let residue = r.residues()[0].clone() % 9u32;
        assert_eq!(residue, BigUint::from(3u32));
        // oracle: the cubes of all residues mod 27 that hit 9 are ≡ 3 mod 9
        for x in 0..27u32 {
            if (1 + x).pow(3) % 27 == 10 {
                assert_eq!(x % 9, 3);
            }
        }
        let id = p_root(&mult, &mult.identity(), 2).unwrap();
        assert!(id.is_identity());
        assert_eq!(
            p_root(&mult, &mult.point_from_ints(&[3]).unwrap(), 1).unwrap_err(),
            Error::NotAPower { exponent: 1 }
        );
    }

    #[test]
    fn roots_invert_powers() {
        let h = FormalGroupLaw::heisenberg(&desc(3, 12), 1).unwrap();
        let x = h.point_from_ints(&[3, 6, -9]).unwrap();
        for e in 1..4 {
            let y = h.gpow(&x, &BigInt::from(3).pow(e)).unwrap();
            let r = p_root(&h, &y, e).unwrap();
            assert_eq!(r.precision(), 12 - e);
            let back = h.gpow(&r, &BigInt::from(3).pow(e)).unwrap();
            assert!(back.congruent(&y));
        }
    }

    #[test]
    fn abelian_limits() {
        let law = FormalGroupLaw::multiplicative(&desc(3, 3), 1).unwrap();
        let lz = Lazard::new(&law).unwrap();
        let three = law.point_from_ints(&[3]).unwrap();
        let s = lz.lazard_add(&three, &three).unwrap();
        assert_eq!(ints(&s.point), vec![15 - 27]);
        assert!(lz.lazard_bracket(&three, &three).unwrap().point.is_identity());
    }

    #[test]
    fn heisenberg_bracket() {
        let law = FormalGroupLaw::heisenberg(&desc(3, 6), 1).unwrap();
        let lz = Lazard::new(&law).unwrap();
        let a = law.point_from_ints(&[3, 0, 0]).unwrap();
        let b = law.point_from_ints(&[0, 3, 0]).unwrap();
        let br = lz.lazard_bracket(&a, &b).unwrap();
        assert_eq!(ints(&br.point), vec![0, 0, 9]);
        let lattice = lz.lie_lattice().unwrap();
        assert_eq!(lattice.nonzero_constants(), vec![(0, 1, 2, BigInt::from(3))]);
        assert!(lattice.is_powerful());
        assert!(lattice.is_nilpotent());
    }

    #[test]
    fn coordinates() {
        let law = FormalGroupLaw::heisenberg(&desc(3, 6), 1).unwrap();
        let lz = Lazard::new(&law).unwrap();
        let e2 = law.basis_point(1);
        let lam: Vec<i64> = lz.lie_coordinates(&e2).unwrap().iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(lam, vec![0, 1, 0]);
        let p5 = law.gpow_i64(&law.basis_point(0), 5).unwrap();
        let lam: Vec<i64> = lz.lie_coordinates(&p5).unwrap().iter().map(|x| x.to_i64().unwrap()).collect();
        assert_eq!(lam, vec![5, 0, 0]);
    }

    #[test]
    fn lazard_sum_is_linear_in_coordinates() {
        for law in [
            FormalGroupLaw::heisenberg(&desc(3, 5), 1).unwrap(),
            FormalGroupLaw::multiplicative(&desc(5, 5), 1).unwrap(),
            FormalGroupLaw::multiplicative(&desc(2, 6), 2).unwrap(),
        ] {
            let lz = Lazard::new(&law).unwrap();
            let n = law.dim();
            let q = law.zp().prime_power(law.level());
            let q = num_traits::ToPrimitive::to_i64(&q).unwrap();
            let x = law.point_from_ints(&(0..n).map(|i| q * (i as i64 + 2)).collect::<Vec<_>>()).unwrap();
            let y = law.point_from_ints(&(0..n).map(|i| q * (7 - i as i64)).collect::<Vec<_>>()).unwrap();
            let lx = lz.lie_coordinates(&x).unwrap();
            let ly = lz.lie_coordinates(&y).unwrap();
            let s = lz.lazard_add(&x, &y).unwrap().point;
            let ls = lz.lie_coordinates(&s).unwrap();
            // s is only known mod p^k, so its coordinates are known mod p^(k-N)
            for i in 0..n {
                let sum = lx[i].try_add(&ly[i]).unwrap();
                let k = law.zp().precision() - law.level();
                assert!(sum.with_precision(k).congruent(&ls[i].with_precision(k)), "{law:?}");
            }
        }
    }

    #[test]
    fn combination_roundtrip() {
        let law = FormalGroupLaw::heisenberg(&desc(3, 5), 1).unwrap();
        let lz = Lazard::new(&law).unwrap();
        let zp = law.zp();
        for lam in [[1i64, 2, 3], [-4, 0, 7], [13, -11, 5]] {
            let ints: Vec<BigInt> = lam.iter().map(|&c| BigInt::from(c)).collect();
            let p = lz.combination_work(&ints).unwrap();
            let back = lz.lie_coordinates_work(&p).unwrap();
            let expected: Vec<PadicScalar> = lam.iter().map(|&c| zp.int(c)).collect();
            assert_eq!(back, expected);
        }
    }

    #[test]
    fn p2_requires_level_two() {
        let d = desc(2, 6);
        let law = FormalGroupLaw::multiplicative(&d, 1).unwrap();
        assert!(matches!(Lazard::new(&law), Err(Error::LevelConstraint { .. })));
        let law = FormalGroupLaw::multiplicative(&d, 2).unwrap();
        let lz = Lazard::new(&law).unwrap();
        let lattice = lz.lie_lattice().unwrap();
        assert!(lattice.is_abelian());
    }

    #[test]
    fn lattice_checks() {
        let zp = Zp::new(3, 4).unwrap();
        let sl2 = LieLattice::from_brackets(&zp, 3, &[(0, 1, 1, 2), (0, 2, 2, -2), (1, 2, 0, 1)]).unwrap();
        assert!(!sl2.is_nilpotent());
        assert!(!sl2.is_powerful());
        let bad = vec![
            vec![vec![BigUint::zero(); 2], vec![BigUint::from(1u32), BigUint::zero()]],
            vec![vec![BigUint::zero(); 2], vec![BigUint::zero(); 2]],
        ];
        assert!(matches!(LieLattice::new(&zp, bad), Err(Error::InvalidLattice(_))));
    }
}
