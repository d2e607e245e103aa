//! File formats: laws, point lists, representation images and
//! certificates, plus the JSON encodings of reports.

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use serde_json::{json, Value};

use crate::discriminate::DiscriminationCertificate;
use crate::error::{Error, Result};
use crate::fgl::{FormalGroupLaw, StandardPoint, ValidationReport};
use crate::lazard::{GroupHomCertificate, InducedImage, LieLattice, MatrixRep, SampleCheck};
use crate::series::{MultiSeries, RingDescriptor, RingElement};
use crate::sentences::TransferReport;
use crate::zp::{PadicMatrix, PadicScalar, Zp};

/// An integer written either as a JSON number or as a decimal string.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Coeff(pub BigInt);

impl Serialize for Coeff {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0.to_i64() {
            Some(v) => s.serialize_i64(v),
            None => s.serialize_str(&self.0.to_string()),
        }
    }
}

impl<'de> Deserialize<'de> for Coeff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        match Value::deserialize(d)? {
            Value::Number(n) => {
                if let Some(v) = n.as_i64() {
                    Ok(Coeff(BigInt::from(v)))
                } else if let Some(v) = n.as_u64() {
                    Ok(Coeff(BigInt::from(v)))
                } else {
                    Err(de::Error::custom("coefficients must be integers"))
                }
            }
            Value::String(s) => s
                .trim()
                .parse()
                .map(Coeff)
                .map_err(|_| de::Error::custom(format!("invalid integer {s:?}"))),
            other => Err(de::Error::custom(format!("expected an integer, found {other}"))),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct LawTerm {
    pub xexp: Vec<u32>,
    pub texp: Vec<u32>,
    pub coeff: Coeff,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct LawFile {
    pub prime: u64,
    pub precision: u32,
    pub param_vars: usize,
    pub degree_cutoff: u32,
    pub dim: usize,
    pub level: u32,
    pub components: Vec<Vec<LawTerm>>,
    /// Whether the components are complete polynomials (default) rather
    /// than truncations of infinite series.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact: Option<bool>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct CoordTerm {
    pub texp: Vec<u32>,
    pub coeff: Coeff,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct PointsFile {
    pub points: Vec<Vec<Vec<CoordTerm>>>,
    /// Points resolving g0, g1, … in sentences.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Vec<Vec<Vec<CoordTerm>>>>,
}

#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct RepFile {
    pub images: Vec<Vec<Vec<Coeff>>>,
}

/// Overrides applied on top of file values.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub precision: Option<u32>,
    pub cutoff: Option<u32>,
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::InvalidInput(format!("{what}: {e}")))
}

impl LawFile {
    pub fn to_law(&self, ov: Overrides) -> Result<FormalGroupLaw> {
        let desc = RingDescriptor::new(
            self.prime,
            ov.precision.unwrap_or(self.precision),
            self.param_vars,
            ov.cutoff.unwrap_or(self.degree_cutoff),
        )?;
        let exact = self.exact.unwrap_or(true);
        let components = self
            .components
            .iter()
            .map(|terms| {
                let s = MultiSeries::from_terms(
                    &desc,
                    2 * self.dim,
                    terms
                        .iter()
                        .map(|t| (t.xexp.clone(), t.texp.clone(), t.coeff.0.clone())),
                )?;
                // Terms dropped by the cutoff already clear the flag.
                Ok(if exact { s } else { s.assume_exact(false) })
            })
            .collect::<Result<Vec<_>>>()?;
        FormalGroupLaw::new(desc, self.dim, self.level, components)
    }

    pub fn from_law(law: &FormalGroupLaw) -> Self {
        let desc = law.descriptor();
        let zp = desc.zp();
        LawFile {
            prime: desc.prime(),
            precision: desc.precision(),
            param_vars: desc.param_vars(),
            degree_cutoff: desc.degree_cutoff(),
            dim: law.dim(),
            level: law.level(),
            components: law
                .components()
                .iter()
                .map(|c| {
                    c.terms()
                        .map(|(x, t, v)| LawTerm {
                            xexp: x.to_vec(),
                            texp: t.to_vec(),
                            coeff: Coeff(zp.signed(v)),
                        })
                        .collect()
                })
                .collect(),
            exact: (!law.is_exact()).then_some(false),
        }
    }
}

pub fn coord_to_element(desc: &RingDescriptor, terms: &[CoordTerm]) -> Result<RingElement> {
    RingElement::from_terms(desc, terms.iter().map(|t| (t.texp.clone(), t.coeff.0.clone())))
}

pub fn points_from(law: &FormalGroupLaw, raw: &[Vec<Vec<CoordTerm>>]) -> Result<Vec<StandardPoint>> {
    raw.iter()
        .map(|p| {
            let coords = p
                .iter()
                .map(|c| coord_to_element(law.descriptor(), c))
                .collect::<Result<Vec<_>>>()?;
            law.point(coords)
        })
        .collect()
}

pub fn element_terms(x: &RingElement) -> Vec<CoordTerm> {
    let zp = x.descriptor().zp();
    x.terms()
        .map(|(e, c)| CoordTerm {
            texp: e.clone(),
            coeff: Coeff(zp.signed(c)),
        })
        .collect()
}

pub fn point_terms(p: &StandardPoint) -> Vec<Vec<CoordTerm>> {
    p.coords().iter().map(element_terms).collect()
}

fn int(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(v) => json!(v),
        None => json!(x.to_string()),
    }
}

pub fn scalar(x: &PadicScalar) -> Value {
    int(&x.signed())
}

fn residue(zp: &Zp, x: &BigUint) -> Value {
    int(&zp.signed(x))
}

pub fn point(p: &StandardPoint) -> Value {
    json!({
        "coords": serde_json::to_value(point_terms(p)).expect("serializable"),
        "text": p.to_string(),
        "precision": p.precision(),
    })
}

pub fn matrix(m: &PadicMatrix) -> Value {
    Value::Array(
        (0..m.rows())
            .map(|i| Value::Array((0..m.cols()).map(|j| residue(m.ring(), m.raw(i, j))).collect()))
            .collect(),
    )
}

pub fn matrix_from(zp: &Zp, rows: &[Vec<Coeff>]) -> Result<PadicMatrix> {
    let n = rows.len();
    let cols = rows.first().map_or(0, Vec::len);
    if rows.iter().any(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch("ragged matrix rows".into()));
    }
    let data = rows
        .iter()
        .flat_map(|r| r.iter().map(|c| zp.reduce_signed(&c.0)))
        .collect();
    PadicMatrix::from_residues(zp, n, cols, data)
}

pub fn validation(report: &ValidationReport) -> Value {
    json!({
        "passed": report.passed(),
        "checks": report.checks.iter().map(|c| json!({
            "axiom": c.axiom,
            "passed": c.passed,
            "witness": c.witness,
            "detail": c.detail,
        })).collect::<Vec<_>>(),
    })
}

pub fn lattice(l: &LieLattice) -> Value {
    json!({
        "rank": l.rank(),
        "powerful": l.is_powerful(),
        "abelian": l.is_abelian(),
        "nilpotent": l.is_nilpotent(),
        "brackets": l.nonzero_constants().iter().map(|(i, j, k, c)| json!({
            "i": i + 1, "j": j + 1, "l": k + 1, "c": int(c),
        })).collect::<Vec<_>>(),
    })
}

pub fn rep(r: &MatrixRep) -> Value {
    json!({
        "strategy": r.strategy(),
        "degree": r.degree(),
        "images": r.images().iter().map(matrix).collect::<Vec<_>>(),
    })
}

pub fn image(m: &InducedImage) -> Value {
    json!({
        "perm": m.perm(),
        "blocks": m.blocks().iter().map(matrix).collect::<Vec<_>>(),
    })
}

pub fn check(c: &SampleCheck) -> Value {
    json!({
        "checked": c.checked,
        "passed": c.passed,
        "ok": c.ok(),
        "failures": c.failures,
    })
}

pub fn embedding_certificate(c: &GroupHomCertificate) -> Value {
    json!({
        "valid": c.is_valid(),
        "prime": c.prime,
        "precision": c.precision,
        "level": c.level,
        "dim": c.dim,
        "lattice": lattice(&c.lattice),
        "rep": rep(&c.rep),
        "index": c.index,
        "ell": c.ell,
        "degree": c.degree,
        "degree_bound": c.degree_bound.to_string(),
        "transversal": c.transversal.iter().map(point).collect::<Vec<_>>(),
        "multiplicativity": check(&c.multiplicativity),
        "injectivity": check(&c.injectivity),
    })
}

pub fn discrimination_certificate(c: &DiscriminationCertificate) -> Value {
    let spec = c.homomorphism.specialization();
    json!({
        "valid": c.is_valid(),
        "prime": c.law.descriptor().prime(),
        "precision": c.law.descriptor().precision(),
        "law": serde_json::to_value(LawFile::from_law(&c.law)).expect("serializable"),
        "points": c.points.iter().map(point_terms).collect::<Vec<_>>(),
        "coordinates": c.coordinates.iter().map(|x| x.to_string()).collect::<Vec<_>>(),
        "separator": {
            "product": c.separator.product.to_string(),
            "factors": c.separator.factors.iter().map(|f| json!({
                "pair": [f.first, f.second],
                "coordinate": f.coordinate,
                "difference": f.difference.to_string(),
            })).collect::<Vec<_>>(),
            "constant_pairs": c.separator.constant_pairs,
        },
        "evaluation_point": c.evaluation.point.iter().map(scalar).collect::<Vec<_>>(),
        "separator_value": {
            "value": scalar(&c.evaluation.value.value),
            "valuation": c.evaluation.value.value.valuation(),
            "guarantee": c.evaluation.value.guarantee,
        },
        "candidates_tried": c.evaluation.candidates_tried,
        "specialized_law": serde_json::to_value(LawFile::from_law(spec.law())).expect("serializable"),
        "specialized_precision": spec.precision(),
        "specialized_points": c.specialized_points.iter().map(point).collect::<Vec<_>>(),
        "lattice": lattice(&c.lattice),
        "rep": rep(&c.rep),
        "index": c.index,
        "ell": c.ell,
        "degree": c.degree,
        "degree_bound": c.degree_bound.to_string(),
        "images": c.images.iter().map(image).collect::<Vec<_>>(),
        "distinctness": check(&c.distinctness),
        "multiplicativity": check(&c.multiplicativity),
        "specialization_homomorphism": check(&c.specialization_hom),
    })
}

/// The parts of a certificate needed to rebuild its homomorphism.
#[derive(Clone, Debug, Deserialize)]
pub struct CertificateFile {
    pub prime: u64,
    pub precision: u32,
    pub evaluation_point: Vec<Coeff>,
    pub rep: RepFile,
    #[serde(default)]
    pub points: Vec<Vec<Vec<CoordTerm>>>,
}

pub fn transfer(r: &TransferReport) -> Value {
    json!({
        "sentence": r.sentence,
        "holds_in_group": r.holds_in_group,
        "holds_in_image": r.holds_in_image,
        "transferred": r.transferred(),
        "verdict": r.verdict(),
        "atoms": r.atoms.iter().map(|a| json!({
            "atom": a.atom,
            "in_group": a.in_group,
            "group_marking": a.group_marking.to_string(),
            "in_image": a.in_image,
            "image_marking": a.image_marking.to_string(),
        })).collect::<Vec<_>>(),
    })
}
