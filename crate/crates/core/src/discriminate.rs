//! Discrimination of finite subsets of a standard group over Zp[[t1..tm]].
//!
//! A finite set S of points is separated by an evaluation t ↦ a, which
//! specializes the law to a law over Zp; composing with the Lazard embedding
//! of the specialized group gives a homomorphism into GL_n(Zp) that is
//! injective on S.

use num_bigint::BigUint;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::fgl::{FormalGroupLaw, StandardPoint};
use crate::lazard::embed::random_below;
use crate::lazard::{
    build_rep, working_precision, InducedImage, Lazard, LieLattice, MatrixRep, RepStrategy, SampleCheck,
    UniformEmbedding,
};
use crate::series::{Evaluation, RingDescriptor, RingElement};
use crate::zp::PadicScalar;

/// r = ∏_{i<j} (r_i − r_j) over a list of ring elements.
pub fn pairwise_separator(desc: &RingDescriptor, elements: &[RingElement]) -> Result<RingElement> {
    let mut r = RingElement::one(desc);
    for i in 0..elements.len() {
        for j in i + 1..elements.len() {
            let diff = elements[i].try_sub(&elements[j])?;
            if diff.is_zero() {
                return Err(Error::IndistinguishableAtPrecision { first: i, second: j });
            }
            r = r.try_mul(&diff)?;
        }
    }
    Ok(r)
}

/// One factor of an optimized separator: the difference of coordinate
/// `coordinate` of points `first` and `second`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SeparatorFactor {
    pub first: usize,
    pub second: usize,
    pub coordinate: usize,
    pub difference: RingElement,
}

/// Separator for a list of points. Pairs that differ by a nonzero constant
/// in some coordinate are separated by every evaluation and contribute no
/// factor.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PointSeparator {
    pub factors: Vec<SeparatorFactor>,
    pub constant_pairs: usize,
    pub product: RingElement,
}

fn is_t_free(x: &RingElement) -> bool {
    x.terms().all(|(e, _)| e.iter().all(|&k| k == 0))
}

/// The optimized separator of a point list.
pub fn point_separator(desc: &RingDescriptor, points: &[StandardPoint]) -> Result<PointSeparator> {
    let mut factors = Vec::new();
    let mut constant_pairs = 0;
    let mut product = RingElement::one(desc);
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            let prec = points[i].precision().min(points[j].precision());
            let mut best: Option<(usize, RingElement)> = None;
            let mut constant = false;
            for (c, (a, b)) in points[i].coords().iter().zip(points[j].coords()).enumerate() {
                let diff = a.try_sub(b)?;
                let order = diff.ideal_order();
                if order >= prec {
                    continue;
                }
                if is_t_free(&diff) {
                    constant = true;
                    break;
                }
                if best.as_ref().map_or(true, |(_, d)| order < d.ideal_order()) {
                    best = Some((c, diff));
                }
            }
            if constant {
                constant_pairs += 1;
                continue;
            }
            let (coordinate, difference) =
                best.ok_or(Error::IndistinguishableAtPrecision { first: i, second: j })?;
            product = product.try_mul(&difference)?;
            factors.push(SeparatorFactor {
                first: i,
                second: j,
                coordinate,
                difference,
            });
        }
    }
    Ok(PointSeparator {
        factors,
        constant_pairs,
        product,
    })
}

/// A certified nonvanishing evaluation of a separator.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EvaluationPoint {
    pub point: Vec<PadicScalar>,
    pub value: Evaluation,
    pub candidates_tried: usize,
}

/// First a = (p·c_1, …, p·c_m), c ∈ {0..B−1}^m in lexicographic order, with
/// v_p(r(a)) below the evaluation guarantee.
pub fn find_evaluation_point(r: &RingElement, budget: u64) -> Result<EvaluationPoint> {
    let desc = r.descriptor();
    let zp = desc.zp();
    let m = desc.param_vars();
    if r.is_zero() {
        return Err(Error::PrecisionExhausted("separator vanishes at precision".into()));
    }
    let p = zp.prime();
    let mut cores = vec![0u64; m];
    let mut tried = 0;
    if budget == 0 && m > 0 {
        return Err(Error::PrecisionExhausted("empty search budget".into()));
    }
    loop {
        let point: Vec<PadicScalar> = cores
            .iter()
            .map(|&c| zp.scalar(zp.reduce(&(BigUint::from(c) * p))))
            .collect();
        tried += 1;
        let value = r.evaluate(&point)?;
        if value.value.valuation() < value.guarantee {
            return Ok(EvaluationPoint {
                point,
                value,
                candidates_tried: tried,
            });
        }
        // Lexicographic successor with the last coordinate varying fastest.
        let mut pos = m;
        loop {
            if pos == 0 {
                return Err(Error::PrecisionExhausted(format!(
                    "no evaluation point among {tried} candidates certifies the separator nonzero"
                )));
            }
            pos -= 1;
            cores[pos] += 1;
            if cores[pos] < budget {
                break;
            }
            cores[pos] = 0;
        }
    }
}

/// The evaluation epimorphism t ↦ a applied to a law and its points.
#[derive(Clone, Debug)]
pub struct Specialization {
    source: FormalGroupLaw,
    source_work: FormalGroupLaw,
    point: Vec<PadicScalar>,
    point_work: Vec<PadicScalar>,
    law: FormalGroupLaw,
    work: FormalGroupLaw,
    precision: u32,
}

/// Specializes a law at `a` and validates the result. Coefficients and `a`
/// are treated as exact integers, so the working copy is specialized from
/// the lifted law.
pub fn specialize(law: &FormalGroupLaw, a: &[PadicScalar]) -> Result<Specialization> {
    let (spec, precision) = law.specialize(a)?;
    let report = spec.validate();
    if !report.passed() {
        let failed: Vec<String> = report.failures().map(|c| c.axiom.clone()).collect();
        return Err(Error::SpecializedLawInvalid(failed.join("; ")));
    }
    let k = law.zp().precision();
    let big = working_precision(k, law.level());
    let source_work = law.with_precision(big);
    let wzp = source_work.zp();
    let point_work: Vec<PadicScalar> = a
        .iter()
        .map(|x| wzp.scalar(wzp.reduce(x.residue())))
        .collect();
    let (work, _) = source_work.specialize(&point_work)?;
    Ok(Specialization {
        source: law.clone(),
        source_work,
        point: a.to_vec(),
        point_work,
        law: spec,
        work,
        precision,
    })
}

fn map_with(target: &FormalGroupLaw, source: &FormalGroupLaw, a: &[PadicScalar], p: &StandardPoint) -> Result<StandardPoint> {
    let p = source.transfer_point(p)?;
    let mut values = Vec::with_capacity(p.dim());
    let mut guarantee = p.precision();
    for c in p.coords() {
        let e = c.evaluate(a)?;
        guarantee = guarantee.min(e.guarantee);
        values.push(e.value.residue().clone());
    }
    target.point_from_residues(&values, guarantee)
}

impl Specialization {
    pub fn source(&self) -> &FormalGroupLaw {
        &self.source
    }

    pub fn point(&self) -> &[PadicScalar] {
        &self.point
    }

    /// The specialized law over Zp.
    pub fn law(&self) -> &FormalGroupLaw {
        &self.law
    }

    pub fn working_law(&self) -> &FormalGroupLaw {
        &self.work
    }

    /// p-adic precision of the specialized coefficients.
    pub fn precision(&self) -> u32 {
        self.precision
    }

    /// π^d(P): every coordinate evaluated at a.
    pub fn map_point(&self, p: &StandardPoint) -> Result<StandardPoint> {
        map_with(&self.law, &self.source, &self.point, p)
    }

    /// π^d(P) for exact integer data P, at working precision.
    pub fn map_point_work(&self, p: &StandardPoint) -> Result<StandardPoint> {
        map_with(&self.work, &self.source_work, &self.point_work, p)
    }

    pub fn lazard(&self) -> Result<Lazard> {
        Lazard::with_working_law(&self.law, self.work.clone())
    }
}

/// m ∘ π^d: G → GL_n(Zp).
#[derive(Clone, Debug)]
pub struct Homomorphism {
    specialization: Specialization,
    embedding: UniformEmbedding,
}

impl Homomorphism {
    /// Specializes at `a` and embeds the specialized group. Errors carry the
    /// stage at which they occurred.
    pub fn new(law: &FormalGroupLaw, a: &[PadicScalar], strategy: RepStrategy) -> Result<Self> {
        let specialization = specialize(law, a).map_err(|e| e.at_stage("specialize"))?;
        Self::from_specialization(specialization, strategy)
    }

    pub fn from_specialization(specialization: Specialization, strategy: RepStrategy) -> Result<Self> {
        let lazard = specialization.lazard().map_err(|e| e.at_stage("lattice"))?;
        let lattice = lazard.lie_lattice().map_err(|e| e.at_stage("lattice"))?;
        let rep = build_rep(&lattice, strategy).map_err(|e| e.at_stage("represent"))?;
        let embedding = UniformEmbedding::new(lazard, lattice, rep).map_err(|e| e.at_stage("embed"))?;
        Ok(Homomorphism {
            specialization,
            embedding,
        })
    }

    pub fn specialization(&self) -> &Specialization {
        &self.specialization
    }

    pub fn embedding(&self) -> &UniformEmbedding {
        &self.embedding
    }

    pub fn degree(&self) -> usize {
        self.embedding.degree()
    }

    /// Image of a point given as exact integer data.
    pub fn image(&self, p: &StandardPoint) -> Result<InducedImage> {
        self.embedding
            .image_work(&self.specialization.map_point_work(p)?)
    }

    /// Image of gmul(P, Q), with the product formed at working precision.
    pub fn image_of_product(&self, p: &StandardPoint, q: &StandardPoint) -> Result<InducedImage> {
        let x = self.specialization.map_point_work(p)?;
        let y = self.specialization.map_point_work(q)?;
        let work = self.specialization.working_law();
        self.embedding.image_work(&work.gmul(&x, &y)?)
    }
}

#[derive(Clone, Debug)]
pub struct PipelineOptions {
    pub budget: u64,
    pub strategy: RepStrategy,
    pub random_pairs: usize,
    pub seed: u64,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            budget: 8,
            strategy: RepStrategy::auto(),
            random_pairs: 50,
            seed: 0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DiscriminationCertificate {
    pub law: FormalGroupLaw,
    pub points: Vec<StandardPoint>,
    /// S′: the distinct coordinates of the points of S.
    pub coordinates: Vec<RingElement>,
    pub separator: PointSeparator,
    pub evaluation: EvaluationPoint,
    pub specialized_points: Vec<StandardPoint>,
    pub homomorphism: Homomorphism,
    pub lattice: LieLattice,
    pub rep: MatrixRep,
    pub index: usize,
    pub ell: usize,
    pub degree: usize,
    pub degree_bound: BigUint,
    pub images: Vec<InducedImage>,
    pub distinctness: SampleCheck,
    pub multiplicativity: SampleCheck,
    pub specialization_hom: SampleCheck,
}

impl DiscriminationCertificate {
    /// Valid only if every check passed and r(a) is certified nonzero.
    pub fn is_valid(&self) -> bool {
        self.distinctness.ok()
            && self.multiplicativity.ok()
            && self.specialization_hom.ok()
            && self.evaluation.value.value.valuation() < self.evaluation.value.guarantee
            && BigUint::from(self.degree) <= self.degree_bound
    }

    pub fn specialized_law(&self) -> &FormalGroupLaw {
        self.homomorphism.specialization().law()
    }

    pub fn evaluation_point(&self) -> &[PadicScalar] {
        &self.evaluation.point
    }
}

fn distinct_coordinates(points: &[StandardPoint]) -> Vec<RingElement> {
    let mut out: Vec<RingElement> = Vec::new();
    for p in points {
        for c in p.coords() {
            if !out.iter().any(|o| o == c) {
                out.push(c.clone());
            }
        }
    }
    out
}

/// A random point of (𝔪^{*N})^d with polynomial coordinates of t-degree ≤ 2.
pub fn random_point(law: &FormalGroupLaw, rng: &mut impl Rng) -> Result<StandardPoint> {
    let desc = law.descriptor();
    let zp = desc.zp();
    let m = desc.param_vars();
    let n = law.level();
    let bound = zp.prime_power(zp.precision());
    let mut monomials = vec![vec![0u32; m]];
    for i in 0..m {
        for e in 1..=2u32.min(desc.degree_cutoff()) {
            let mut v = vec![0; m];
            v[i] = e;
            monomials.push(v);
        }
    }
    let coords = (0..law.dim())
        .map(|_| {
            let terms = monomials.iter().map(|e| {
                let deg: u32 = e.iter().sum();
                let scale = zp.prime_power(n.saturating_sub(deg));
                let c = random_below(&bound, rng) * scale;
                (e.clone(), num_bigint::BigInt::from(c))
            });
            RingElement::from_terms(desc, terms)
        })
        .collect::<Result<Vec<_>>>()?;
    law.point(coords)
}

/// The full pipeline with default options and the given search budget.
pub fn discriminate_pipeline(law: &FormalGroupLaw, points: &[StandardPoint], budget: u64) -> Result<DiscriminationCertificate> {
    discriminate_with(
        law,
        points,
        &PipelineOptions {
            budget,
            ..PipelineOptions::default()
        },
    )
}

pub fn discriminate_with(
    law: &FormalGroupLaw,
    points: &[StandardPoint],
    options: &PipelineOptions,
) -> Result<DiscriminationCertificate> {
    let desc = law.descriptor();
    let points = points
        .iter()
        .map(|p| law.transfer_point(p))
        .collect::<Result<Vec<_>>>()
        .map_err(|e| e.at_stage("input"))?;
    let coordinates = distinct_coordinates(&points);
    let separator = point_separator(desc, &points).map_err(|e| e.at_stage("separate"))?;
    let evaluation =
        find_evaluation_point(&separator.product, options.budget).map_err(|e| e.at_stage("search"))?;
    let homomorphism = Homomorphism::new(law, &evaluation.point, options.strategy.clone())?;
    let spec = homomorphism.specialization();
    let emb = homomorphism.embedding();

    let verify = |e: Error| e.at_stage("verify");
    let specialized_points = points
        .iter()
        .map(|p| spec.map_point(p))
        .collect::<Result<Vec<_>>>()
        .map_err(verify)?;
    let images = points
        .iter()
        .map(|p| homomorphism.image(p))
        .collect::<Result<Vec<_>>>()
        .map_err(verify)?;

    let mut distinctness = SampleCheck::default();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            distinctness.record(images[i] != images[j], || format!("points {i} and {j} have equal images"));
        }
    }

    let mut multiplicativity = SampleCheck::default();
    for i in 0..points.len() {
        for j in 0..points.len() {
            let lhs = homomorphism.image_of_product(&points[i], &points[j]).map_err(verify)?;
            let rhs = images[i].try_mul(&images[j]).map_err(verify)?;
            multiplicativity.record(lhs == rhs, || format!("image of the product of points {i} and {j}"));
        }
    }

    let mut specialization_hom = SampleCheck::default();
    let mut check_pi = |x: &StandardPoint, y: &StandardPoint, label: String| -> Result<()> {
        let lhs = spec.map_point(&law.gmul(x, y)?)?;
        let rhs = spec.law().gmul(&spec.map_point(x)?, &spec.map_point(y)?)?;
        specialization_hom.record(lhs.congruent(&rhs), || label);
        Ok(())
    };
    for i in 0..points.len() {
        for j in 0..points.len() {
            check_pi(&points[i], &points[j], format!("pair ({i}, {j}) from S")).map_err(verify)?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    for n in 0..options.random_pairs {
        let x = random_point(law, &mut rng).map_err(verify)?;
        let y = random_point(law, &mut rng).map_err(verify)?;
        check_pi(&x, &y, format!("random pair {n}")).map_err(verify)?;
    }

    Ok(DiscriminationCertificate {
        law: law.clone(),
        points,
        coordinates,
        separator,
        evaluation,
        specialized_points,
        lattice: emb.lattice().clone(),
        rep: emb.rep().clone(),
        index: emb.index(),
        ell: emb.ell(),
        degree: emb.degree(),
        degree_bound: emb.degree_bound(),
        images,
        distinctness,
        multiplicativity,
        specialization_hom,
        homomorphism,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;

    fn desc(p: u64, k: u32, m: usize) -> RingDescriptor {
        RingDescriptor::new(p, k, m, 6).unwrap()
    }

    /// Element Σ c·t^e from (exponent, coefficient) pairs in one variable.
    fn poly(d: &RingDescriptor, terms: &[(u32, i64)]) -> RingElement {
        RingElement::from_terms(d, terms.iter().map(|&(e, c)| (vec![e], BigInt::from(c)))).unwrap()
    }

    #[test]
    fn separator_fixtures() {
        let d = desc(3, 6, 1);
        let three = poly(&d, &[(0, 3)]);
        let t = poly(&d, &[(1, 1)]);
        let t2 = poly(&d, &[(2, 1)]);
        assert_eq!(pairwise_separator(&d, &[three.clone(), t.clone()]).unwrap(), poly(&d, &[(0, 3), (1, -1)]));
        assert_eq!(pairwise_separator(&d, &[t.clone(), t2]).unwrap(), poly(&d, &[(1, 1), (2, -1)]));
        let zero = RingElement::zero(&d);
        let r = pairwise_separator(&d, &[zero, three.clone(), t.clone()]).unwrap();
        // (0 − 3)(0 − t)(3 − t) = 9t − 3t²
        assert_eq!(r, poly(&d, &[(1, 9), (2, -3)]));
        assert_eq!(
            pairwise_separator(&d, &[t.clone(), three, t]),
            Err(Error::IndistinguishableAtPrecision { first: 0, second: 2 })
        );
    }

    #[test]
    fn evaluation_point_fixtures() {
        let d = desc(3, 3, 1);
        let r = poly(&d, &[(0, 3), (1, -1)]);
        let a = find_evaluation_point(&r, 4).unwrap();
        assert_eq!(a.point[0].to_i64(), Some(0));
        let t = poly(&d, &[(1, 1)]);
        assert_eq!(find_evaluation_point(&t, 4).unwrap().point[0].to_i64(), Some(3));
        assert!(matches!(find_evaluation_point(&t, 1), Err(Error::PrecisionExhausted(_))));
        let r = poly(&d, &[(1, 3), (2, -1)]);
        let a = find_evaluation_point(&r, 4).unwrap();
        assert_eq!(a.point[0].residue(), &BigUint::from(6u32));
        assert_eq!(a.value.value.residue(), &BigUint::from(9u32));
        assert_eq!(a.candidates_tried, 3);
    }

    #[test]
    fn specialization_fixtures() {
        let d = desc(3, 6, 1);
        let law = FormalGroupLaw::twisted_multiplicative(&d, 1).unwrap();
        let a = vec![d.zp().int(6)];
        let s = specialize(&law, &a).unwrap();
        let expected = FormalGroupLaw::multiplicative(&d.over_zp(), 1).unwrap();
        assert_ne!(s.law(), &expected);
        let x = s.law().point_from_ints(&[3]).unwrap();
        let y = s.law().point_from_ints(&[3]).unwrap();
        // 3 + 3 + 6·9 = 60
        assert_eq!(s.law().gmul(&x, &y).unwrap(), s.law().point_from_ints(&[60]).unwrap());
        let t = law.point(vec![poly(&d, &[(1, 1)])]).unwrap();
        assert_eq!(s.map_point(&t).unwrap(), s.law().point_from_ints(&[6]).unwrap());
        let plain = FormalGroupLaw::additive(&d, 1, 1).unwrap();
        let s = specialize(&plain, &a).unwrap();
        assert_eq!(s.law(), &FormalGroupLaw::additive(&d.over_zp(), 1, 1).unwrap());
    }

    #[test]
    fn pipeline_fixture() {
        let d = desc(3, 6, 1);
        let law = FormalGroupLaw::twisted_multiplicative(&d, 1).unwrap();
        let s = vec![
            law.point(vec![poly(&d, &[(0, 3)])]).unwrap(),
            law.point(vec![poly(&d, &[(1, 1)])]).unwrap(),
        ];
        let cert = discriminate_pipeline(&law, &s, 4).unwrap();
        assert_eq!(cert.evaluation.point[0].to_i64(), Some(0));
        assert_eq!(cert.degree, 3);
        assert!(cert.is_valid(), "{cert:?}");
        assert_ne!(cert.images[0], cert.images[1]);
    }

    #[test]
    fn pipeline_edge_cases() {
        let d = desc(3, 4, 1);
        let law = FormalGroupLaw::twisted_multiplicative(&d, 1).unwrap();
        let t = law.point(vec![poly(&d, &[(1, 1)])]).unwrap();
        let cert = discriminate_pipeline(&law, std::slice::from_ref(&t), 1).unwrap();
        assert!(cert.is_valid());
        assert_eq!(cert.evaluation.candidates_tried, 1);
        let err = discriminate_pipeline(&law, &[t.clone(), t], 4).unwrap_err();
        assert_eq!(err.root(), &Error::IndistinguishableAtPrecision { first: 0, second: 1 });
        assert!(matches!(err, Error::Stage { stage: "separate", .. }));
    }
}
