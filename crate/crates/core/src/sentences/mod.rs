//! Group words, existential sentences, and transfer of witnesses through a
//! discrimination homomorphism.

mod parse;

use std::collections::HashMap;
use std::fmt;

use crate::discriminate::Homomorphism;
use crate::error::{Error, Result};
use crate::fgl::{FormalGroupLaw, StandardPoint};
use crate::lazard::InducedImage;
use crate::zp::PadicMatrix;

pub use parse::{parse_sentence, parse_word};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Word {
    Var(String),
    /// g_i, indexing a declared point list.
    Const(usize),
    Pow(Box<Word>, i64),
    /// [a, b] = a⁻¹b⁻¹ab.
    Comm(Box<Word>, Box<Word>),
    /// Product of factors; the empty product is the identity.
    Product(Vec<Word>),
}

impl Word {
    pub fn identity() -> Self {
        Word::Product(Vec::new())
    }

    pub fn var(name: &str) -> Self {
        Word::Var(name.to_string())
    }

    pub fn inverse(self) -> Self {
        Word::Pow(Box::new(self), -1)
    }

    pub fn comm(a: Word, b: Word) -> Self {
        Word::Comm(Box::new(a), Box::new(b))
    }

    fn needs_parens_as_factor(&self) -> bool {
        matches!(self, Word::Product(f) if f.len() > 1)
    }

    fn write_factor(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.needs_parens_as_factor() {
            write!(f, "({self})")
        } else {
            write!(f, "{self}")
        }
    }

    /// Variables occurring in the word, in order of first occurrence.
    pub fn variables(&self) -> Vec<&str> {
        let mut out = Vec::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars<'a>(&'a self, out: &mut Vec<&'a str>) {
        match self {
            Word::Var(v) => {
                if !out.contains(&v.as_str()) {
                    out.push(v);
                }
            }
            Word::Const(_) => {}
            Word::Pow(b, _) => b.collect_vars(out),
            Word::Comm(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
            Word::Product(fs) => fs.iter().for_each(|w| w.collect_vars(out)),
        }
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Word::Var(v) => write!(f, "{v}"),
            Word::Const(i) => write!(f, "g{i}"),
            Word::Pow(b, e) => {
                if matches!(**b, Word::Pow(..)) || b.needs_parens_as_factor() {
                    write!(f, "({b})^{e}")
                } else {
                    write!(f, "{b}^{e}")
                }
            }
            Word::Comm(a, b) => write!(f, "[{a}, {b}]"),
            Word::Product(fs) if fs.is_empty() => write!(f, "1"),
            Word::Product(fs) => {
                for (i, w) in fs.iter().enumerate() {
                    if i > 0 {
                        write!(f, "*")?;
                    }
                    w.write_factor(f)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Atom {
    Eq(Word),
    Ne(Word),
    Group(Vec<Vec<Atom>>),
}

fn write_disj(f: &mut fmt::Formatter<'_>, d: &[Vec<Atom>]) -> fmt::Result {
    for (i, conj) in d.iter().enumerate() {
        if i > 0 {
            write!(f, " | ")?;
        }
        for (j, a) in conj.iter().enumerate() {
            if j > 0 {
                write!(f, " & ")?;
            }
            write!(f, "{a}")?;
        }
    }
    Ok(())
}

impl fmt::Display for Atom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Atom::Eq(w) => write!(f, "{w} = 1"),
            Atom::Ne(w) => write!(f, "{w} != 1"),
            Atom::Group(d) => {
                write!(f, "( ")?;
                write_disj(f, d)?;
                write!(f, " )")
            }
        }
    }
}

/// ∃ vars : body, with body a disjunction of conjunctions of atoms.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExistentialSentence {
    pub vars: Vec<String>,
    pub body: Vec<Vec<Atom>>,
}

impl fmt::Display for ExistentialSentence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "E {} : ", self.vars.join(" "))?;
        write_disj(f, &self.body)
    }
}

impl ExistentialSentence {
    /// The word atoms (equations and inequations) in reading order.
    pub fn atoms(&self) -> Vec<&Atom> {
        fn walk<'a>(d: &'a [Vec<Atom>], out: &mut Vec<&'a Atom>) {
            for conj in d {
                for a in conj {
                    match a {
                        Atom::Group(inner) => walk(inner, out),
                        a => out.push(a),
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(&self.body, &mut out);
        out
    }
}

/// A group in which words can be evaluated.
pub trait GroupBackend {
    type Elem: Clone;
    fn identity(&self) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Result<Self::Elem>;
    fn inv(&self, a: &Self::Elem) -> Result<Self::Elem>;
    /// Identity at precision.
    fn is_identity(&self, a: &Self::Elem) -> bool;

    fn pow(&self, a: &Self::Elem, n: i64) -> Result<Self::Elem> {
        let mut base = if n < 0 { self.inv(a)? } else { a.clone() };
        let mut e = n.unsigned_abs();
        let mut acc = self.identity();
        while e > 0 {
            if e & 1 == 1 {
                acc = self.mul(&acc, &base)?;
            }
            e >>= 1;
            if e > 0 {
                base = self.mul(&base, &base)?;
            }
        }
        Ok(acc)
    }
}

/// The standard group of a law.
pub struct LawGroup<'a>(pub &'a FormalGroupLaw);

impl GroupBackend for LawGroup<'_> {
    type Elem = StandardPoint;

    fn identity(&self) -> StandardPoint {
        self.0.identity()
    }

    fn mul(&self, a: &StandardPoint, b: &StandardPoint) -> Result<StandardPoint> {
        self.0.gmul(a, b)
    }

    fn inv(&self, a: &StandardPoint) -> Result<StandardPoint> {
        self.0.ginv(a)
    }

    fn is_identity(&self, a: &StandardPoint) -> bool {
        a.is_identity()
    }
}

/// GL_n(Zp) with dense matrices.
pub struct MatrixGroup {
    pub ring: crate::zp::Zp,
    pub degree: usize,
}

impl GroupBackend for MatrixGroup {
    type Elem = PadicMatrix;

    fn identity(&self) -> PadicMatrix {
        PadicMatrix::identity(&self.ring, self.degree)
    }

    fn mul(&self, a: &PadicMatrix, b: &PadicMatrix) -> Result<PadicMatrix> {
        a.try_mul(b)
    }

    fn inv(&self, a: &PadicMatrix) -> Result<PadicMatrix> {
        a.inverse()
    }

    fn is_identity(&self, a: &PadicMatrix) -> bool {
        a.is_identity()
    }
}

/// GL_n(Zp) restricted to block-monomial matrices of a fixed shape.
pub struct InducedGroup {
    pub ring: crate::zp::Zp,
    pub index: usize,
    pub block: usize,
}

impl GroupBackend for InducedGroup {
    type Elem = InducedImage;

    fn identity(&self) -> InducedImage {
        InducedImage::identity(&self.ring, self.index, self.block)
    }

    fn mul(&self, a: &InducedImage, b: &InducedImage) -> Result<InducedImage> {
        a.try_mul(b)
    }

    fn inv(&self, a: &InducedImage) -> Result<InducedImage> {
        a.inverse()
    }

    fn is_identity(&self, a: &InducedImage) -> bool {
        a.is_identity()
    }
}

/// Values for variables and the constants g0, g1, ….
pub struct Assignment<'a, E> {
    pub vars: &'a HashMap<String, E>,
    pub constants: &'a [E],
}

pub fn eval_word<G: GroupBackend>(w: &Word, env: &Assignment<'_, G::Elem>, backend: &G) -> Result<G::Elem> {
    match w {
        Word::Var(v) => env
            .vars
            .get(v)
            .cloned()
            .ok_or_else(|| Error::UnboundVariable(v.clone())),
        Word::Const(i) => env.constants.get(*i).cloned().ok_or(Error::UnknownConstant(*i)),
        Word::Pow(b, n) => backend.pow(&eval_word(b, env, backend)?, *n),
        Word::Comm(a, b) => {
            let x = eval_word(a, env, backend)?;
            let y = eval_word(b, env, backend)?;
            let xy = backend.mul(&x, &y)?;
            let yx = backend.mul(&y, &x)?;
            backend.mul(&backend.inv(&yx)?, &xy)
        }
        Word::Product(fs) => {
            let mut acc = backend.identity();
            for f in fs {
                acc = backend.mul(&acc, &eval_word(f, env, backend)?)?;
            }
            Ok(acc)
        }
    }
}

/// How far a verified truth value can be trusted.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Marking {
    /// Established by a nonzero difference at precision, hence true in Zp.
    Sound,
    /// Established by agreement mod p^k only.
    ToPrecision,
}

impl fmt::Display for Marking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Marking::Sound => "SOUND",
            Marking::ToPrecision => "TO-PRECISION",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomReport {
    pub atom: String,
    pub in_group: bool,
    pub group_marking: Marking,
    pub in_image: bool,
    pub image_marking: Marking,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransferReport {
    pub sentence: String,
    pub atoms: Vec<AtomReport>,
    pub holds_in_group: bool,
    pub holds_in_image: bool,
}

impl TransferReport {
    /// The sentence holds in G and its witness transfers to the image.
    pub fn transferred(&self) -> bool {
        self.holds_in_group && self.holds_in_image
    }

    pub fn verdict(&self) -> &'static str {
        match (self.holds_in_group, self.holds_in_image) {
            (false, _) => "fails in G; no transfer claim",
            (true, true) => "holds in G and in the image",
            (true, false) => "holds in G but not in the image",
        }
    }
}

/// Truth of one atom: w = 1 iff the element is the identity at precision;
/// a non-identity element is a sound witness of w ≠ 1.
fn atom_truth<G: GroupBackend>(w: &Word, equation: bool, env: &Assignment<'_, G::Elem>, g: &G) -> Result<(bool, Marking)> {
    let trivial = g.is_identity(&eval_word(w, env, g)?);
    let marking = if trivial { Marking::ToPrecision } else { Marking::Sound };
    Ok((trivial == equation, marking))
}

fn eval_body(
    body: &[Vec<Atom>],
    truth: &mut impl FnMut(&Word, bool) -> Result<bool>,
) -> Result<bool> {
    let mut any = false;
    for conj in body {
        let mut all = true;
        for a in conj {
            // Every atom is evaluated so the report lists each one.
            let t = match a {
                Atom::Eq(w) => truth(w, true)?,
                Atom::Ne(w) => truth(w, false)?,
                Atom::Group(d) => eval_body(d, truth)?,
            };
            all &= t;
        }
        any |= all;
    }
    Ok(any)
}

/// Checks a witness in G and its image under the homomorphism of a
/// discrimination certificate. `witness` assigns the bound variables in
/// order; `constants` resolves g0, g1, ….
pub fn check_transfer(
    sentence: &ExistentialSentence,
    witness: &[StandardPoint],
    constants: &[StandardPoint],
    hom: &Homomorphism,
) -> Result<TransferReport> {
    if witness.len() != sentence.vars.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} witness points for {} bound variables",
            witness.len(),
            sentence.vars.len()
        )));
    }
    let law = hom.specialization().source();
    let g = LawGroup(law);
    let witness = witness
        .iter()
        .map(|p| law.transfer_point(p))
        .collect::<Result<Vec<_>>>()?;
    let constants = constants
        .iter()
        .map(|p| law.transfer_point(p))
        .collect::<Result<Vec<_>>>()?;
    let vars: HashMap<String, StandardPoint> = sentence.vars.iter().cloned().zip(witness.iter().cloned()).collect();
    let env = Assignment {
        vars: &vars,
        constants: &constants,
    };

    let emb = hom.embedding();
    let ig = InducedGroup {
        ring: emb.lattice().zp().clone(),
        index: emb.index(),
        block: emb.ell(),
    };
    let image_vars: HashMap<String, InducedImage> = sentence
        .vars
        .iter()
        .cloned()
        .zip(witness.iter().map(|p| hom.image(p)).collect::<Result<Vec<_>>>()?)
        .collect();
    let image_consts = constants.iter().map(|p| hom.image(p)).collect::<Result<Vec<_>>>()?;
    let image_env = Assignment {
        vars: &image_vars,
        constants: &image_consts,
    };

    let mut atoms = Vec::new();
    let mut results: HashMap<usize, (bool, Marking, bool, Marking)> = HashMap::new();
    for (n, a) in sentence.atoms().into_iter().enumerate() {
        let (w, equation) = match a {
            Atom::Eq(w) => (w, true),
            Atom::Ne(w) => (w, false),
            Atom::Group(_) => unreachable!("atoms() flattens groups"),
        };
        let (in_group, gm) = atom_truth(w, equation, &env, &g)?;
        let (in_image, im) = atom_truth(w, equation, &image_env, &ig)?;
        results.insert(n, (in_group, gm, in_image, im));
        atoms.push(AtomReport {
            atom: a.to_string(),
            in_group,
            group_marking: gm,
            in_image,
            image_marking: im,
        });
    }
    let mut counter = 0;
    let holds_in_group = eval_body(&sentence.body, &mut |_, _| {
        counter += 1;
        Ok(results[&(counter - 1)].0)
    })?;
    let mut counter = 0;
    let holds_in_image = eval_body(&sentence.body, &mut |_, _| {
        counter += 1;
        Ok(results[&(counter - 1)].2)
    })?;
    Ok(TransferReport {
        sentence: sentence.to_string(),
        atoms,
        holds_in_group,
        holds_in_image,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::discriminate::Homomorphism;
    use crate::lazard::RepStrategy;
    use crate::series::RingDescriptor;

    #[test]
    fn parse_fixtures() {
        let s = parse_sentence("E x y : [x,y] != 1").unwrap();
        assert_eq!(s.vars, vec!["x", "y"]);
        assert_eq!(s.body, vec![vec![Atom::Ne(Word::comm(Word::var("x"), Word::var("y")))]]);
        let s = parse_sentence("E x : x = 1").unwrap();
        assert_eq!(s.body, vec![vec![Atom::Eq(Word::var("x"))]]);
        let s = parse_sentence("E x : ( x^3 = 1 & x != 1 )").unwrap();
        let cube = Word::Pow(Box::new(Word::var("x")), 3);
        assert_eq!(
            s.body,
            vec![vec![Atom::Group(vec![vec![Atom::Eq(cube), Atom::Ne(Word::var("x"))]])]]
        );
    }

    #[test]
    fn parse_words() {
        let w = parse_word("x y^-2 (g0*[x, y])^3").unwrap();
        assert_eq!(w.to_string(), "x*y^-2*(g0*[x, y])^3");
        assert_eq!(parse_word(&w.to_string()).unwrap(), w);
        assert_eq!(parse_word("1").unwrap(), Word::identity());
        assert_eq!(parse_word("(x^2)^3").unwrap().to_string(), "(x^2)^3");
        let s = parse_sentence("E x : (x) = 1 | (x*x = 1)").unwrap();
        assert_eq!(s.body.len(), 2);
    }

    #[test]
    fn syntax_errors_have_positions() {
        for (text, pos) in [("E : x = 1", 2), ("E x : x = 2", 10), ("E x : x ! 1", 8), ("x = 1", 0), ("E x : x = 1 )", 12)] {
            match parse_sentence(text) {
                Err(Error::Syntax { position, .. }) => assert_eq!(position, pos, "{text}"),
                other => panic!("{text}: {other:?}"),
            }
        }
        assert!(parse_sentence("E g0 : g0 = 1").is_err());
        assert!(parse_sentence("E x : E y = 1").is_err());
    }

    fn heisenberg() -> FormalGroupLaw {
        FormalGroupLaw::heisenberg(&RingDescriptor::new(3, 6, 0, 6).unwrap(), 1).unwrap()
    }

    #[test]
    fn eval_word_fixtures() {
        let law = heisenberg();
        let g = LawGroup(&law);
        let mut vars = HashMap::new();
        vars.insert("x".to_string(), law.point_from_ints(&[3, 0, 0]).unwrap());
        vars.insert("y".to_string(), law.point_from_ints(&[0, 3, 0]).unwrap());
        let env = Assignment { vars: &vars, constants: &[] };
        let c = eval_word(&parse_word("[x, y]").unwrap(), &env, &g).unwrap();
        assert_eq!(c, law.point_from_ints(&[0, 0, 9]).unwrap());
        assert!(eval_word(&Word::identity(), &env, &g).unwrap().is_identity());
        assert!(eval_word(&parse_word("x x^-1").unwrap(), &env, &g).unwrap().is_identity());
        assert_eq!(
            eval_word(&parse_word("z").unwrap(), &env, &g).unwrap_err(),
            Error::UnboundVariable("z".into())
        );
        assert_eq!(eval_word(&parse_word("g2").unwrap(), &env, &g).unwrap_err(), Error::UnknownConstant(2));
    }

    #[test]
    fn heisenberg_transfer() {
        let law = heisenberg();
        let hom = Homomorphism::new(&law, &[], RepStrategy::auto()).unwrap();
        let e1 = law.basis_point(0);
        let e2 = law.basis_point(1);
        let s = parse_sentence("E x y : [x,y] != 1").unwrap();
        let r = check_transfer(&s, &[e1.clone(), e2.clone()], &[], &hom).unwrap();
        assert!(r.transferred(), "{r:?}");
        assert_eq!(r.atoms[0].group_marking, Marking::Sound);
        assert_eq!(r.atoms[0].image_marking, Marking::Sound);

        let r = check_transfer(&s, &[e1.clone(), e1.clone()], &[], &hom).unwrap();
        assert!(!r.holds_in_group);
        assert_eq!(r.verdict(), "fails in G; no transfer claim");

        let s = parse_sentence("E x : x = 1").unwrap();
        let r = check_transfer(&s, &[law.identity()], &[], &hom).unwrap();
        assert!(r.transferred());
        assert_eq!(r.atoms[0].group_marking, Marking::ToPrecision);

        let s = parse_sentence("E x : x g0^-1 = 1 | x^3 != 1").unwrap();
        let r = check_transfer(&s, &[e2], &[e1], &hom).unwrap();
        assert!(r.transferred());
        assert!(!r.atoms[0].in_group);
        assert_eq!(r.atoms[0].group_marking, Marking::Sound);
    }
}
