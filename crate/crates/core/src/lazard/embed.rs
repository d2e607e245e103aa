//! The monomorphism G ↪ GL_n(Zp) for a uniform Zp-standard group G.
//!
//! On the open subgroup G^𝐩 = 𝐩·𝓛(G) the map h ↦ exp(Σ λ_i(h) M_i) is a
//! homomorphism. It is induced up to G along a transversal of G^𝐩, giving
//! block-monomial matrices of degree n = 𝐩^d·ℓ.

use std::collections::HashMap;
use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{bold_p, bold_p_valuation, build_rep, mat_exp, p_root, Lazard, LieLattice, MatrixRep, RepStrategy};
use crate::error::{Error, Result};
use crate::fgl::{FormalGroupLaw, StandardPoint};
use crate::zp::{PadicMatrix, Zp};

/// A block-monomial matrix: column block i is sent to row block `perm[i]`
/// through `blocks[i]`.
#[derive(Clone, PartialEq, Eq)]
pub struct InducedImage {
    perm: Vec<usize>,
    blocks: Vec<PadicMatrix>,
}

impl fmt::Debug for InducedImage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InducedImage")
            .field("perm", &self.perm)
            .field("blocks", &self.blocks)
            .finish()
    }
}

impl InducedImage {
    pub fn identity(zp: &Zp, index: usize, ell: usize) -> Self {
        InducedImage {
            perm: (0..index).collect(),
            blocks: vec![PadicMatrix::identity(zp, ell); index],
        }
    }

    pub fn perm(&self) -> &[usize] {
        &self.perm
    }

    pub fn blocks(&self) -> &[PadicMatrix] {
        &self.blocks
    }

    pub fn block_size(&self) -> usize {
        self.blocks.first().map_or(0, PadicMatrix::rows)
    }

    pub fn degree(&self) -> usize {
        self.perm.len() * self.block_size()
    }

    pub fn is_identity(&self) -> bool {
        self.perm.iter().enumerate().all(|(i, &j)| i == j) && self.blocks.iter().all(PadicMatrix::is_identity)
    }

    /// Product computed block-wise.
    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        if self.perm.len() != other.perm.len() {
            return Err(Error::DimensionMismatch("induced images of different index".into()));
        }
        let perm = other.perm.iter().map(|&j| self.perm[j]).collect();
        let blocks = other
            .perm
            .iter()
            .zip(&other.blocks)
            .map(|(&j, b)| self.blocks[j].try_mul(b))
            .collect::<Result<_>>()?;
        Ok(InducedImage { perm, blocks })
    }

    /// Inverse: block `perm[i]` of the result is `blocks[i]⁻¹`, sent back to i.
    pub fn inverse(&self) -> Result<Self> {
        let n = self.perm.len();
        let mut perm = vec![0; n];
        let mut blocks = vec![None; n];
        for (i, (&j, b)) in self.perm.iter().zip(&self.blocks).enumerate() {
            perm[j] = i;
            blocks[j] = Some(b.inverse()?);
        }
        let blocks = blocks
            .into_iter()
            .map(|b| b.ok_or_else(|| Error::InvalidInput("block permutation is not a bijection".into())))
            .collect::<Result<_>>()?;
        Ok(InducedImage { perm, blocks })
    }

    pub fn to_dense(&self) -> PadicMatrix {
        let ell = self.block_size();
        let ring = self.blocks[0].ring();
        let n = self.degree();
        let mut m = PadicMatrix::zeros(ring, n, n);
        for (i, (&j, b)) in self.perm.iter().zip(&self.blocks).enumerate() {
            for r in 0..ell {
                for c in 0..ell {
                    m.set(j * ell + r, i * ell + c, b.raw(r, c));
                }
            }
        }
        m
    }
}

/// Outcome of a batch of sampled checks.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct SampleCheck {
    pub checked: usize,
    pub passed: usize,
    pub failures: Vec<String>,
}

impl SampleCheck {
    pub fn ok(&self) -> bool {
        self.checked == self.passed
    }

    pub fn record(&mut self, passed: bool, describe: impl FnOnce() -> String) {
        self.checked += 1;
        if passed {
            self.passed += 1;
        } else if self.failures.len() < 10 {
            self.failures.push(describe());
        }
    }
}

#[derive(Clone, Debug)]
pub struct GroupHomCertificate {
    pub prime: u64,
    pub precision: u32,
    pub level: u32,
    pub dim: usize,
    pub lattice: LieLattice,
    pub rep: MatrixRep,
    pub index: usize,
    pub ell: usize,
    pub degree: usize,
    pub degree_bound: BigUint,
    pub transversal: Vec<StandardPoint>,
    pub samples: Vec<(StandardPoint, InducedImage)>,
    pub multiplicativity: SampleCheck,
    pub injectivity: SampleCheck,
}

impl GroupHomCertificate {
    /// Valid only if every recorded check passed.
    pub fn is_valid(&self) -> bool {
        self.multiplicativity.ok()
            && self.injectivity.ok()
            && BigUint::from(self.degree) <= self.degree_bound
            && self.degree == self.index * self.ell
    }
}

/// The embedding data: Lazard context, lattice, representation, transversal.
#[derive(Clone)]
pub struct UniformEmbedding {
    lazard: Lazard,
    lattice: LieLattice,
    rep: MatrixRep,
    transversal: Vec<StandardPoint>,
    transversal_inv: Vec<StandardPoint>,
    keys: HashMap<Vec<BigUint>, usize>,
}

impl fmt::Debug for UniformEmbedding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UniformEmbedding")
            .field("lattice", &self.lattice)
            .field("rep", &self.rep.strategy())
            .field("degree", &self.degree())
            .finish()
    }
}

/// Digit vectors {0..𝐩−1}^d in lexicographic order.
fn digit_vectors(base: u64, d: usize) -> Vec<Vec<u64>> {
    let mut out = vec![vec![]];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|v| {
                (0..base).map(move |c| {
                    let mut w = v.clone();
                    w.push(c);
                    w
                })
            })
            .collect();
    }
    out
}

/// Working-precision transversal {Σ_L v_i e_i : v ∈ {0..𝐩−1}^d} of G^𝐩 in G,
/// verified pairwise: t_i⁻¹t_j has no 𝐩-th root for i ≠ j.
pub fn coset_transversal(lazard: &Lazard) -> Result<Vec<StandardPoint>> {
    let p = lazard.prime();
    let e = bold_p_valuation(p);
    let work = lazard.working_law();
    let points = digit_vectors(bold_p(p), lazard.dim())
        .into_iter()
        .map(|v| lazard.combination_work(&v.into_iter().map(BigInt::from).collect::<Vec<_>>()))
        .collect::<Result<Vec<_>>>()?;
    let inverses = points.iter().map(|t| work.ginv(t)).collect::<Result<Vec<_>>>()?;
    for i in 0..points.len() {
        for j in 0..points.len() {
            if i == j {
                continue;
            }
            let q = work.gmul(&inverses[i], &points[j])?;
            match p_root(work, &q, e) {
                Err(Error::NotAPower { .. }) => {}
                Ok(_) => {
                    return Err(Error::TransversalVerificationFailed(format!(
                        "transversal elements {i} and {j} lie in the same coset"
                    )))
                }
                Err(other) => return Err(other),
            }
        }
    }
    Ok(points)
}

impl UniformEmbedding {
    pub fn new(lazard: Lazard, lattice: LieLattice, rep: MatrixRep) -> Result<Self> {
        if lattice.rank() != lazard.dim() || rep.images().len() != lazard.dim() {
            return Err(Error::DimensionMismatch("lattice, rep and law ranks differ".into()));
        }
        let transversal = coset_transversal(&lazard)?;
        let work = lazard.working_law();
        let transversal_inv = transversal.iter().map(|t| work.ginv(t)).collect::<Result<Vec<_>>>()?;
        let mut emb = UniformEmbedding {
            lazard,
            lattice,
            rep,
            transversal,
            transversal_inv,
            keys: HashMap::new(),
        };
        for i in 0..emb.transversal.len() {
            let key = emb.coset_key(&emb.transversal[i])?;
            if emb.keys.insert(key, i).is_some() {
                return Err(Error::TransversalVerificationFailed(
                    "two transversal elements share a coordinate key".into(),
                ));
            }
        }
        Ok(emb)
    }

    pub fn lazard(&self) -> &Lazard {
        &self.lazard
    }

    pub fn lattice(&self) -> &LieLattice {
        &self.lattice
    }

    pub fn rep(&self) -> &MatrixRep {
        &self.rep
    }

    /// [G : G^𝐩] = 𝐩^d.
    pub fn index(&self) -> usize {
        self.transversal.len()
    }

    pub fn ell(&self) -> usize {
        self.rep.degree()
    }

    pub fn degree(&self) -> usize {
        self.index() * self.ell()
    }

    /// p^{Nd}·𝐩^d·ℓ.
    pub fn degree_bound(&self) -> BigUint {
        let p = BigUint::from(self.lazard.prime());
        let nd = self.lazard.level() * self.lazard.dim() as u32;
        p.pow(nd) * BigUint::from(self.index()) * BigUint::from(self.ell())
    }

    /// The transversal at output precision.
    pub fn transversal(&self) -> Result<Vec<StandardPoint>> {
        self.transversal.iter().map(|t| self.lazard.reduce(t)).collect()
    }

    pub fn transversal_work(&self) -> &[StandardPoint] {
        &self.transversal
    }

    fn coset_key(&self, x: &StandardPoint) -> Result<Vec<BigUint>> {
        let m = BigUint::from(bold_p(self.lazard.prime()));
        Ok(self
            .lazard
            .lie_coordinates_work(x)?
            .iter()
            .map(|l| l.residue() % &m)
            .collect())
    }

    /// λ(h) when h ∈ G^𝐩.
    fn subgroup_coordinates(&self, h: &StandardPoint) -> Result<Option<Vec<BigUint>>> {
        let s = bold_p_valuation(self.lazard.prime());
        let lambda = self.lazard.lie_coordinates_work(h)?;
        if lambda.iter().all(|l| l.valuation() >= s) {
            Ok(Some(lambda.into_iter().map(|l| l.residue().clone()).collect()))
        } else {
            Ok(None)
        }
    }

    fn exp_rep(&self, lambda: &[BigUint]) -> Result<PadicMatrix> {
        mat_exp(&self.rep.apply(lambda)?)
    }

    /// m_1(h) = exp(Σ λ_i(h) M_i) for a point h of G^𝐩.
    pub fn subgroup_image(&self, h: &StandardPoint) -> Result<PadicMatrix> {
        let lifted = self.lazard.lift(h)?;
        match self.subgroup_coordinates(&lifted)? {
            Some(l) => self.exp_rep(&l),
            None => Err(Error::InvalidInput("point does not lie in G^𝐩".into())),
        }
    }

    /// Image of a working-precision point.
    pub fn image_work(&self, g: &StandardPoint) -> Result<InducedImage> {
        let work = self.lazard.working_law();
        let mut perm = Vec::with_capacity(self.index());
        let mut blocks = Vec::with_capacity(self.index());
        for t in &self.transversal {
            let u = work.gmul(g, t)?;
            let guess = self.keys.get(&self.coset_key(&u)?).copied();
            let candidates = guess.into_iter().chain((0..self.index()).filter(|&j| Some(j) != guess));
            let mut found = None;
            for j in candidates {
                let h = work.gmul(&self.transversal_inv[j], &u)?;
                if let Some(lambda) = self.subgroup_coordinates(&h)? {
                    found = Some((j, lambda));
                    break;
                }
            }
            let (j, lambda) = found.ok_or_else(|| {
                Error::TransversalVerificationFailed("no transversal element matches a coset".into())
            })?;
            perm.push(j);
            blocks.push(self.exp_rep(&lambda)?);
        }
        Ok(InducedImage { perm, blocks })
    }

    /// Image of a point given as exact integer data.
    pub fn image(&self, g: &StandardPoint) -> Result<InducedImage> {
        self.image_work(&self.lazard.lift(g)?)
    }

    /// A random working point p^N·(c_1..c_d) with 0 ≤ c_i < p^k.
    pub fn random_point(&self, rng: &mut impl Rng) -> Result<StandardPoint> {
        random_point(self.lazard.working_law(), self.lazard.precision(), rng)
    }

    /// Checks multiplicativity on `pairs` random pairs and injectivity on the
    /// transversal plus `samples`.
    pub fn certify(&self, samples: &[StandardPoint], pairs: usize, seed: u64) -> Result<GroupHomCertificate> {
        let work = self.lazard.working_law();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut multiplicativity = SampleCheck::default();
        for n in 0..pairs {
            let x = self.random_point(&mut rng)?;
            let y = self.random_point(&mut rng)?;
            let lhs = self.image_work(&work.gmul(&x, &y)?)?;
            let rhs = self.image_work(&x)?.try_mul(&self.image_work(&y)?)?;
            multiplicativity.record(lhs == rhs, || format!("random pair {n}: {x} and {y}"));
        }
        let mut points = self.transversal.clone();
        for s in samples {
            points.push(self.lazard.lift(s)?);
        }
        let images = points.iter().map(|p| self.image_work(p)).collect::<Result<Vec<_>>>()?;
        let mut injectivity = SampleCheck::default();
        for i in 0..points.len() {
            for j in i + 1..points.len() {
                let same_point = points[i].residues() == points[j].residues();
                if same_point {
                    continue;
                }
                injectivity.record(images[i] != images[j], || {
                    format!("{} and {} have equal images", points[i], points[j])
                });
            }
        }
        let reduced = points
            .iter()
            .skip(self.index())
            .map(|p| self.lazard.reduce(p))
            .collect::<Result<Vec<_>>>()?;
        Ok(GroupHomCertificate {
            prime: self.lazard.prime(),
            precision: self.lazard.precision(),
            level: self.lazard.level(),
            dim: self.lazard.dim(),
            lattice: self.lattice.clone(),
            rep: self.rep.clone(),
            index: self.index(),
            ell: self.ell(),
            degree: self.degree(),
            degree_bound: self.degree_bound(),
            transversal: self.transversal()?,
            samples: reduced.into_iter().zip(images.into_iter().skip(self.index())).collect(),
            multiplicativity,
            injectivity,
        })
    }
}

pub(crate) fn random_point(law: &FormalGroupLaw, digits: u32, rng: &mut impl Rng) -> Result<StandardPoint> {
    let zp = law.zp();
    let scale = zp.prime_power(law.level());
    let bound = zp.prime_power(digits);
    let coords: Vec<BigUint> = (0..law.dim())
        .map(|_| {
            let c = random_below(&bound, rng);
            zp.reduce(&(c * &scale))
        })
        .collect();
    law.point_from_residues(&coords, zp.precision())
}

pub(crate) fn random_below(bound: &BigUint, rng: &mut impl Rng) -> BigUint {
    if bound.is_zero() {
        return BigUint::zero();
    }
    let bytes = (bound.bits() as usize).div_ceil(8) + 8;
    let buf: Vec<u8> = (0..bytes).map(|_| rng.gen()).collect();
    BigUint::from_bytes_le(&buf) % bound
}

/// Lie lattice, representation and embedding for a law over Zp.
pub fn uniform_embedding(law: &FormalGroupLaw, strategy: RepStrategy) -> Result<UniformEmbedding> {
    let lazard = Lazard::new(law)?;
    let lattice = lazard.lie_lattice()?;
    let rep = build_rep(&lattice, strategy)?;
    UniformEmbedding::new(lazard, lattice, rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::RingDescriptor;

    fn desc(p: u64, k: u32) -> RingDescriptor {
        RingDescriptor::new(p, k, 0, 6).unwrap()
    }

    #[test]
    fn additive_fixture() {
        let law = FormalGroupLaw::additive(&desc(3, 3), 1, 1).unwrap();
        let emb = uniform_embedding(&law, RepStrategy::auto()).unwrap();
        assert_eq!(emb.ell(), 1);
        assert_eq!(emb.degree(), 3);
        let ts: Vec<i64> = emb
            .transversal()
            .unwrap()
            .iter()
            .map(|t| t.coords()[0].constant_term().to_i64().unwrap())
            .collect();
        assert_eq!(ts, vec![0, 3, 6]);
        let m = emb.subgroup_image(&law.point_from_ints(&[9]).unwrap()).unwrap();
        assert_eq!(m.raw(0, 0), &BigUint::from(13u32));
        assert!(emb.image(&law.identity()).unwrap().is_identity());
    }

    #[test]
    fn heisenberg_certificate() {
        let law = FormalGroupLaw::heisenberg(&desc(3, 4), 1).unwrap();
        let emb = uniform_embedding(&law, RepStrategy::auto()).unwrap();
        assert_eq!(emb.index(), 27);
        let cert = emb.certify(&[], 10, 7).unwrap();
        assert!(cert.multiplicativity.ok(), "{:?}", cert.multiplicativity);
        assert!(cert.injectivity.ok());
        assert_eq!(cert.injectivity.checked, 27 * 26 / 2);
        assert!(cert.is_valid());
    }

    #[test]
    fn block_products_match_dense_products() {
        let law = FormalGroupLaw::multiplicative(&desc(5, 3), 1).unwrap();
        let emb = uniform_embedding(&law, RepStrategy::auto()).unwrap();
        let a = emb.image(&law.point_from_ints(&[5]).unwrap()).unwrap();
        let b = emb.image(&law.point_from_ints(&[15]).unwrap()).unwrap();
        let prod = a.try_mul(&b).unwrap();
        assert_eq!(prod.to_dense(), a.to_dense().try_mul(&b.to_dense()).unwrap());
        assert!(a.try_mul(&a.inverse().unwrap()).unwrap().is_identity());
        assert!(prod.inverse().unwrap().try_mul(&prod).unwrap().is_identity());
    }
}
