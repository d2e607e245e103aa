//! Matrix representations of Lie lattices.
//!
//! Every representation returned here has passed both checks: the bracket
//! relations [M_i, M_j] = Σ_l c_ij^l M_l mod p^k, and injectivity of
//! λ ↦ Σ λ_i M_i certified by the Howell kernel.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigUint;
use num_traits::Zero;

use super::LieLattice;
use crate::error::{Error, Result};
use crate::zp::{is_injective_at_precision, PadicMatrix, Zp};

#[derive(Clone, Debug)]
pub enum RepStrategy {
    /// Abelian, adjoint, nilpotent, then the supplied images if any.
    Auto(Option<Vec<PadicMatrix>>),
    Abelian,
    Adjoint,
    Nilpotent,
    Supplied(Vec<PadicMatrix>),
}

impl RepStrategy {
    pub fn auto() -> Self {
        RepStrategy::Auto(None)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixRep {
    strategy: &'static str,
    images: Vec<PadicMatrix>,
}

impl MatrixRep {
    /// Checks both invariants against `lattice`.
    pub fn new(lattice: &LieLattice, strategy: &'static str, images: Vec<PadicMatrix>) -> Result<Self> {
        check_relations(lattice, &images)?;
        check_faithful(lattice, &images)?;
        Ok(MatrixRep { strategy, images })
    }

    pub fn strategy(&self) -> &'static str {
        self.strategy
    }

    pub fn degree(&self) -> usize {
        self.images.first().map_or(0, PadicMatrix::rows)
    }

    pub fn images(&self) -> &[PadicMatrix] {
        &self.images
    }

    /// Σ λ_i M_i.
    pub fn apply(&self, lambda: &[BigUint]) -> Result<PadicMatrix> {
        let ring = self.images[0].ring();
        let n = self.degree();
        let mut acc = PadicMatrix::zeros(ring, n, n);
        for (l, m) in lambda.iter().zip(&self.images) {
            if !l.is_zero() {
                acc = acc.try_add(&m.scale(l))?;
            }
        }
        Ok(acc)
    }
}

fn check_relations(lattice: &LieLattice, images: &[PadicMatrix]) -> Result<()> {
    let d = lattice.rank();
    if images.len() != d {
        return Err(Error::DimensionMismatch(format!(
            "{} images for a lattice of rank {d}",
            images.len()
        )));
    }
    let n = images[0].rows();
    for m in images {
        lattice.zp().check_same(m.ring())?;
        if m.rows() != n || m.cols() != n {
            return Err(Error::DimensionMismatch("images must be square of equal size".into()));
        }
    }
    for i in 0..d {
        for j in i + 1..d {
            let lhs = images[i].commutator(&images[j])?;
            let mut rhs = PadicMatrix::zeros(lattice.zp(), n, n);
            for (l, m) in images.iter().enumerate() {
                let c = lattice.raw_constant(i, j, l);
                if !c.is_zero() {
                    rhs = rhs.try_add(&m.scale(c))?;
                }
            }
            if lhs != rhs {
                return Err(Error::RepRelationsFailed(format!(
                    "[M{}, M{}] differs from its prescribed value",
                    i + 1,
                    j + 1
                )));
            }
        }
    }
    Ok(())
}

fn check_faithful(lattice: &LieLattice, images: &[PadicMatrix]) -> Result<()> {
    let n = images[0].rows();
    let flat = PadicMatrix::from_fn(lattice.zp(), images.len(), n * n, |i, c| {
        images[i].raw(c / n, c % n).clone()
    });
    if is_injective_at_precision(&flat) {
        Ok(())
    } else {
        Err(Error::UnfaithfulRep(
            "λ ↦ Σ λ_i M_i has a kernel vector that is a unit mod p".into(),
        ))
    }
}

/// Builds a verified representation with the requested strategy.
pub fn build_rep(lattice: &LieLattice, strategy: RepStrategy) -> Result<MatrixRep> {
    match strategy {
        RepStrategy::Abelian => abelian(lattice),
        RepStrategy::Adjoint => adjoint(lattice),
        RepStrategy::Nilpotent => nilpotent(lattice),
        RepStrategy::Supplied(images) => MatrixRep::new(lattice, "supplied", images),
        RepStrategy::Auto(supplied) => {
            if lattice.is_abelian() {
                return abelian(lattice);
            }
            if let Ok(rep) = adjoint(lattice) {
                return Ok(rep);
            }
            if let Ok(rep) = nilpotent(lattice) {
                return Ok(rep);
            }
            match supplied {
                Some(images) => MatrixRep::new(lattice, "supplied", images),
                None => Err(Error::NoStrategyApplies),
            }
        }
    }
}

/// M_i = E_ii.
fn abelian(lattice: &LieLattice) -> Result<MatrixRep> {
    let d = lattice.rank();
    let images = (0..d).map(|i| PadicMatrix::unit(lattice.zp(), d, i, i)).collect();
    MatrixRep::new(lattice, "abelian", images)
}

/// (ad e_i)_{lj} = c_ij^l; faithful iff the center is trivial.
fn adjoint(lattice: &LieLattice) -> Result<MatrixRep> {
    let d = lattice.rank();
    let images = (0..d)
        .map(|i| PadicMatrix::from_fn(lattice.zp(), d, d, |l, j| lattice.raw_constant(i, j, l).clone()))
        .collect();
    MatrixRep::new(lattice, "adjoint", images)
}

/// Weights with w_l ≥ w_i + w_j whenever c_ij^l ≠ 0, or `None` when the
/// bracket graph has a cycle.
fn filtration_weights(lattice: &LieLattice) -> Option<Vec<u32>> {
    let d = lattice.rank();
    let mut w = vec![1u32; d];
    for _ in 0..=d {
        let mut changed = false;
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    if !lattice.raw_constant(i, j, l).is_zero() && w[l] < w[i] + w[j] {
                        w[l] = w[i] + w[j];
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            return Some(w);
        }
    }
    None
}

type Element = BTreeMap<Vec<u32>, BigUint>;

/// Left multiplication on the enveloping algebra modulo the ideal of PBW
/// monomials of weight > W.
struct Envelope<'a> {
    lattice: &'a LieLattice,
    zp: &'a Zp,
    weights: Vec<u32>,
    max_weight: u32,
    memo: HashMap<(usize, Vec<u32>), Element>,
}

impl Envelope<'_> {
    fn weight(&self, m: &[u32]) -> u32 {
        m.iter().zip(&self.weights).map(|(a, w)| a * w).sum()
    }

    fn add_into(&self, acc: &mut Element, m: Vec<u32>, c: &BigUint) {
        let e = acc.entry(m).or_default();
        *e = self.zp.add(e, c);
    }

    /// e_i · m, rewritten in the ordered PBW basis.
    fn left_mul(&mut self, i: usize, m: &[u32]) -> Element {
        if self.weight(m) + self.weights[i] > self.max_weight {
            return Element::new();
        }
        let key = (i, m.to_vec());
        if let Some(r) = self.memo.get(&key) {
            return r.clone();
        }
        let first = m.iter().position(|&a| a > 0);
        let mut out = Element::new();
        match first {
            Some(j) if j < i => {
                // e_i e_j r = e_j (e_i r) + [e_i, e_j] r
                let mut rest = m.to_vec();
                rest[j] -= 1;
                for (m1, c1) in self.left_mul(i, &rest) {
                    for (m2, c2) in self.left_mul(j, &m1) {
                        self.add_into(&mut out, m2, &self.zp.mul(&c1, &c2));
                    }
                }
                for l in 0..self.weights.len() {
                    let c = self.lattice.raw_constant(i, j, l).clone();
                    if c.is_zero() {
                        continue;
                    }
                    for (m2, c2) in self.left_mul(l, &rest) {
                        self.add_into(&mut out, m2, &self.zp.mul(&c, &c2));
                    }
                }
            }
            _ => {
                let mut up = m.to_vec();
                up[i] += 1;
                out.insert(up, BigUint::from(1u32));
            }
        }
        out.retain(|_, c| !c.is_zero());
        self.memo.insert(key, out.clone());
        out
    }
}

fn monomials(weights: &[u32], max_weight: u32) -> Vec<Vec<u32>> {
    fn go(weights: &[u32], budget: u32, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if prefix.len() == weights.len() {
            out.push(prefix.clone());
            return;
        }
        let w = weights[prefix.len()];
        for a in 0..=budget / w {
            prefix.push(a);
            go(weights, budget - a * w, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    go(weights, max_weight, &mut Vec::new(), &mut out);
    out.sort_by_key(|m| (m.iter().zip(weights).map(|(a, w)| a * w).sum::<u32>(), std::cmp::Reverse(m.clone())));
    out
}

/// Left-regular action on U(𝔏)/U_{>W}, where U_{>W} is spanned by PBW
/// monomials of weight above W = max w_i.
fn nilpotent(lattice: &LieLattice) -> Result<MatrixRep> {
    let weights = filtration_weights(lattice).ok_or(Error::NoStrategyApplies)?;
    let max_weight = weights.iter().copied().max().unwrap_or(1);
    let basis = monomials(&weights, max_weight);
    let index: HashMap<&Vec<u32>, usize> = basis.iter().enumerate().map(|(i, m)| (m, i)).collect();
    let zp = lattice.zp();
    let mut env = Envelope {
        lattice,
        zp,
        weights,
        max_weight,
        memo: HashMap::new(),
    };
    let n = basis.len();
    let mut images = Vec::with_capacity(lattice.rank());
    for i in 0..lattice.rank() {
        let mut m = PadicMatrix::zeros(zp, n, n);
        for (col, b) in basis.iter().enumerate() {
            for (mono, c) in env.left_mul(i, b) {
                let row = index[&mono];
                m.set(row, col, &c);
            }
        }
        images.push(m);
    }
    MatrixRep::new(lattice, "nilpotent", images)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zp(p: u64, k: u32) -> Zp {
        Zp::new(p, k).unwrap()
    }

    #[test]
    fn abelian_rank_two() {
        let l = LieLattice::from_brackets(&zp(3, 4), 2, &[]).unwrap();
        let rep = build_rep(&l, RepStrategy::auto()).unwrap();
        assert_eq!(rep.strategy(), "abelian");
        assert_eq!(rep.images()[0], PadicMatrix::unit(l.zp(), 2, 0, 0));
        assert_eq!(rep.images()[1], PadicMatrix::unit(l.zp(), 2, 1, 1));
    }

    #[test]
    fn sl2_uses_adjoint() {
        let l = LieLattice::from_brackets(&zp(3, 4), 3, &[(0, 1, 1, 2), (0, 2, 2, -2), (1, 2, 0, 1)]).unwrap();
        let rep = build_rep(&l, RepStrategy::auto()).unwrap();
        assert_eq!(rep.strategy(), "adjoint");
        assert_eq!(rep.degree(), 3);
        // ad h = diag(0, 2, -2)
        let h = PadicMatrix::from_i64(l.zp(), &[vec![0, 0, 0], vec![0, 2, 0], vec![0, 0, -2]]).unwrap();
        assert_eq!(rep.images()[0], h);
    }

    #[test]
    fn heisenberg_nilpotent_and_supplied() {
        let r = zp(3, 6);
        let l = LieLattice::from_brackets(&r, 3, &[(0, 1, 2, 3)]).unwrap();
        assert!(matches!(build_rep(&l, RepStrategy::Adjoint), Err(Error::UnfaithfulRep(_))));
        let rep = build_rep(&l, RepStrategy::auto()).unwrap();
        assert_eq!(rep.strategy(), "nilpotent");
        assert_eq!(rep.degree(), 7);
        let m = rep.images();
        assert_eq!(m[0].commutator(&m[1]).unwrap(), m[2].scale(&BigUint::from(3u32)));

        let hand = vec![
            PadicMatrix::unit(&r, 3, 0, 1),
            PadicMatrix::unit(&r, 3, 1, 2).scale(&BigUint::from(3u32)),
            PadicMatrix::unit(&r, 3, 0, 2),
        ];
        let rep = build_rep(&l, RepStrategy::Supplied(hand.clone())).unwrap();
        assert_eq!(rep.degree(), 3);
        let wrong = vec![hand[0].clone(), hand[1].clone(), hand[1].clone()];
        assert!(matches!(
            build_rep(&l, RepStrategy::Supplied(wrong)),
            Err(Error::RepRelationsFailed(_))
        ));
    }

    #[test]
    fn centered_non_nilpotent_has_no_strategy() {
        // sl2 ⊕ center
        let l = LieLattice::from_brackets(&zp(3, 4), 4, &[(0, 1, 1, 2), (0, 2, 2, -2), (1, 2, 0, 1)]).unwrap();
        assert_eq!(build_rep(&l, RepStrategy::auto()).unwrap_err(), Error::NoStrategyApplies);
    }

    #[test]
    fn filiform_nilpotent() {
        // [e1, e2] = 5e3 and [e1, e3] = 5e4, nilpotent of class 3
        let l = LieLattice::from_brackets(&zp(5, 5), 4, &[(0, 1, 2, 5), (0, 2, 3, 5)]).unwrap();
        let rep = build_rep(&l, RepStrategy::Nilpotent).unwrap();
        assert!(rep.degree() > 4);
    }
}
