use std::collections::HashMap;

use num_bigint::BigInt;
use proptest::prelude::*;

use padic_linear::discriminate::{discriminate_with, PipelineOptions};
use padic_linear::fgl::{FormalGroupLaw, StandardPoint};
use padic_linear::lazard::{build_rep, uniform_embedding, Lazard, LieLattice, RepStrategy};
use padic_linear::sentences::{
    check_transfer, eval_word, parse_sentence, parse_word, Assignment, Atom, ExistentialSentence,
    InducedGroup, LawGroup, Marking, Word,
};
use padic_linear::series::{RingDescriptor, RingElement};
use padic_linear::zp::{PadicMatrix, Zp};
use padic_linear::Error;

fn word_strategy(vars: Vec<&'static str>, constants: usize) -> impl Strategy<Value = Word> {
    let mut leaves: Vec<BoxedStrategy<Word>> = vec![
        proptest::sample::select(vars).prop_map(Word::var).boxed(),
        Just(Word::identity()).boxed(),
    ];
    if constants > 0 {
        leaves.push((0..constants).prop_map(Word::Const).boxed());
    }
    proptest::strategy::Union::new(leaves).prop_recursive(3, 12, 3, |inner| {
        prop_oneof![
            (inner.clone(), -3i64..4).prop_map(|(w, n)| Word::Pow(Box::new(w), n)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Word::comm(a, b)),
            proptest::collection::vec(inner, 2..4).prop_map(Word::Product),
        ]
    })
}

fn atom_strategy() -> impl Strategy<Value = Atom> {
    let leaf = (word_strategy(vec!["x", "y", "z"], 2), any::<bool>())
        .prop_map(|(w, eq)| if eq { Atom::Eq(w) } else { Atom::Ne(w) });
    leaf.prop_recursive(2, 8, 2, |inner| {
        proptest::collection::vec(proptest::collection::vec(inner, 1..3), 1..3).prop_map(Atom::Group)
    })
}

fn sentence_strategy() -> impl Strategy<Value = ExistentialSentence> {
    proptest::collection::vec(proptest::collection::vec(atom_strategy(), 1..3), 1..3).prop_map(|body| {
        ExistentialSentence {
            vars: vec!["x".into(), "y".into(), "z".into()],
            body,
        }
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn parser_round_trip(s in sentence_strategy()) {
        let printed = s.to_string();
        let once = parse_sentence(&printed).unwrap();
        let twice = parse_sentence(&once.to_string()).unwrap();
        prop_assert_eq!(&once, &twice);
        prop_assert_eq!(once.to_string(), printed);
    }

    #[test]
    fn word_round_trip(w in word_strategy(vec!["a", "b"], 3)) {
        let once = parse_word(&w.to_string()).unwrap();
        prop_assert_eq!(parse_word(&once.to_string()).unwrap(), once);
    }
}

fn heisenberg() -> FormalGroupLaw {
    FormalGroupLaw::heisenberg(&RingDescriptor::new(3, 5, 0, 6).unwrap(), 1).unwrap()
}

fn level_point(law: &FormalGroupLaw, c: &[i64]) -> StandardPoint {
    let scaled: Vec<i64> = c.iter().map(|x| 3 * x).collect();
    law.point_from_ints(&scaled).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    /// Evaluating a word and then mapping equals mapping and then evaluating.
    #[test]
    fn homomorphism_coherence(
        w in word_strategy(vec!["x", "y"], 0),
        a in proptest::collection::vec(-20i64..20, 3),
        b in proptest::collection::vec(-20i64..20, 3),
    ) {
        let law = heisenberg();
        let emb = uniform_embedding(&law, RepStrategy::auto()).unwrap();
        let lz = emb.lazard();
        let work = lz.working_law();
        let (x, y) = (lz.lift(&level_point(&law, &a)).unwrap(), lz.lift(&level_point(&law, &b)).unwrap());

        let mut vars = HashMap::new();
        vars.insert("x".to_string(), x.clone());
        vars.insert("y".to_string(), y.clone());
        let in_group = eval_word(&w, &Assignment { vars: &vars, constants: &[] }, &LawGroup(work)).unwrap();

        let backend = InducedGroup { ring: law.zp().clone(), index: emb.index(), block: emb.ell() };
        let mut images = HashMap::new();
        images.insert("x".to_string(), emb.image_work(&x).unwrap());
        images.insert("y".to_string(), emb.image_work(&y).unwrap());
        let in_image = eval_word(&w, &Assignment { vars: &images, constants: &[] }, &backend).unwrap();

        prop_assert_eq!(emb.image_work(&in_group).unwrap().to_dense(), in_image.to_dense());
    }

    /// A SOUND inequation between exact integer points is a true inequality.
    #[test]
    fn sound_inequations_are_true(
        a in proptest::collection::vec(-5i64..5, 3),
        b in proptest::collection::vec(-5i64..5, 3),
    ) {
        let law = heisenberg();
        let hom = padic_linear::discriminate::Homomorphism::new(&law, &[], RepStrategy::auto()).unwrap();
        let s = parse_sentence("E x y : x y^-1 != 1").unwrap();
        let r = check_transfer(&s, &[level_point(&law, &a), level_point(&law, &b)], &[], &hom).unwrap();
        let atom = &r.atoms[0];
        if atom.in_group && atom.group_marking == Marking::Sound {
            prop_assert_ne!(&a, &b);
        }
        if a != b {
            prop_assert!(r.holds_in_group && r.holds_in_image);
        } else {
            prop_assert!(!r.holds_in_group);
        }
    }
}

fn t_point(law: &FormalGroupLaw, c0: i64, c1: i64) -> StandardPoint {
    let desc = law.descriptor();
    let x = RingElement::from_terms(desc, [(vec![0], BigInt::from(3 * c0)), (vec![1], BigInt::from(c1))]).unwrap();
    law.point(vec![x]).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    /// Success with budget B stays success with budget 2B and at higher precision.
    #[test]
    fn discrimination_is_monotone(
        raw in proptest::collection::btree_set((-3i64..4, 0i64..3), 2..4),
    ) {
        let run = |k: u32, budget: u64| {
            let law = FormalGroupLaw::twisted_multiplicative(&RingDescriptor::new(3, k, 1, 6).unwrap(), 1).unwrap();
            let pts: Vec<_> = raw.iter().map(|&(c0, c1)| t_point(&law, c0, c1)).collect();
            let options = PipelineOptions { budget, random_pairs: 5, ..PipelineOptions::default() };
            discriminate_with(&law, &pts, &options)
        };
        if let Ok(cert) = run(5, 4) {
            prop_assert!(cert.is_valid());
            let wider = run(5, 8).unwrap();
            prop_assert!(wider.is_valid());
            prop_assert_eq!(wider.evaluation.point[0].signed(), cert.evaluation.point[0].signed());
            prop_assert!(run(6, 4).unwrap().is_valid());
        }
    }

    /// Pipeline certificates separate every pair and respect products on S.
    #[test]
    fn discrimination_certificates_hold(
        raw in proptest::collection::btree_set((-3i64..4, 0i64..3), 2..4),
    ) {
        let law = FormalGroupLaw::twisted_multiplicative(&RingDescriptor::new(3, 6, 1, 6).unwrap(), 1).unwrap();
        let pts: Vec<_> = raw.iter().map(|&(c0, c1)| t_point(&law, c0, c1)).collect();
        let options = PipelineOptions { random_pairs: 5, ..PipelineOptions::default() };
        match discriminate_with(&law, &pts, &options) {
            Ok(cert) => {
                prop_assert!(cert.is_valid());
                prop_assert!(cert.evaluation.value.value.valuation() < cert.evaluation.value.guarantee);
                let dense: Vec<PadicMatrix> = cert.images.iter().map(|m| m.to_dense()).collect();
                for i in 0..dense.len() {
                    for j in 0..i {
                        prop_assert_ne!(&dense[i], &dense[j]);
                    }
                }
            }
            Err(e) => prop_assert!(
                matches!(e.root(), Error::PrecisionExhausted(_)),
                "unexpected failure {e}"
            ),
        }
    }

    /// Lazard sums at precision k are the reductions of those at k + 1.
    #[test]
    fn lazard_sum_is_stable_under_precision(
        a in proptest::collection::vec(-9i64..9, 3),
        b in proptest::collection::vec(-9i64..9, 3),
    ) {
        let lo = heisenberg();
        let hi = lo.with_precision(6);
        let (lz_lo, lz_hi) = (Lazard::new(&lo).unwrap(), Lazard::new(&hi).unwrap());
        let s_lo = lz_lo.lazard_add(&level_point(&lo, &a), &level_point(&lo, &b)).unwrap();
        let s_hi = lz_hi.lazard_add(&level_point(&hi, &a), &level_point(&hi, &b)).unwrap();
        let m = lo.zp();
        let reduced: Vec<_> = s_hi.point.residues().iter().map(|r| m.reduce(r)).collect();
        prop_assert_eq!(s_lo.point.residues(), reduced);
    }
}

fn lattice_bracket_holds(lattice: &LieLattice, images: &[PadicMatrix]) -> bool {
    let d = lattice.rank();
    for i in 0..d {
        for j in 0..d {
            let lhs = images[i].commutator(&images[j]).unwrap();
            let mut rhs = PadicMatrix::zeros(lattice.zp(), lhs.rows(), lhs.cols());
            for l in 0..d {
                rhs = rhs.try_add(&images[l].scale(lattice.raw_constant(i, j, l))).unwrap();
            }
            if lhs != rhs {
                return false;
            }
        }
    }
    true
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(20))]

    /// build_rep returns a representation satisfying the bracket relations or a named refusal.
    #[test]
    fn build_rep_is_honest(c in 0i64..4, e in 0i64..4, scale in 1i64..3) {
        let zp = Zp::new(3, 4).unwrap();
        let s = 3i64.pow(scale as u32);
        // Nilpotent of class at most 3: [x0,x1] = c x2, [x0,x2] = e x3.
        let brackets = [(0, 1, 2, s * c), (0, 2, 3, s * e)];
        let lattice = LieLattice::from_brackets(&zp, 4, &brackets).unwrap();
        match build_rep(&lattice, RepStrategy::auto()) {
            Ok(rep) => prop_assert!(lattice_bracket_holds(&lattice, rep.images())),
            Err(err) => prop_assert!(matches!(err, Error::NoStrategyApplies | Error::UnfaithfulRep(_)), "{err}"),
        }
    }
}
