//! Built-in acceptance suite, run by `padic-linear selftest`.
//!
//! Each criterion is checked against an independent oracle: unitriangular
//! matrices for the Heisenberg law, rational series for exp/log, quadratic
//! parts for Lazard brackets, and modular inverses for evaluations.

use std::time::Instant;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::discriminate::{discriminate_pipeline, find_evaluation_point, Homomorphism};
use crate::error::{Error, Result};
use crate::fgl::{FormalGroupLaw, StandardPoint};
use crate::lazard::{bch, bold_p, build_rep, mat_exp, mat_log, uniform_embedding, Lazard, LieLattice, RepStrategy};
use crate::sentences::{check_transfer, parse_sentence};
use crate::series::{RingDescriptor, RingElement};
use crate::zp::{PadicMatrix, Zp};

#[derive(Clone, Debug, PartialEq)]
pub struct CriterionOutcome {
    pub number: u32,
    pub title: &'static str,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

type Check = Result<std::result::Result<String, String>>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// The 3×3 unitriangular matrix of a Heisenberg point.
fn unitriangular(zp: &Zp, p: &StandardPoint) -> PadicMatrix {
    let r = p.residues();
    let mut m = PadicMatrix::identity(zp, 3);
    m.set(0, 1, &r[0]);
    m.set(1, 2, &r[1]);
    m.set(0, 2, &r[2]);
    m
}

fn random_level_point(law: &FormalGroupLaw, rng: &mut impl Rng) -> Result<StandardPoint> {
    let zp = law.zp();
    let scale = zp.prime_power(law.level());
    let coords: Vec<_> = (0..law.dim())
        .map(|_| zp.reduce(&(crate::lazard::embed::random_below(zp.modulus(), rng) * &scale)))
        .collect();
    law.point_from_residues(&coords, zp.precision())
}

/// Heisenberg group operations against unitriangular matrices, p = 3, k = 8.
pub fn criterion_1() -> Check {
    let desc = RingDescriptor::new(3, 8, 0, 6)?;
    let law = FormalGroupLaw::heisenberg(&desc, 1)?;
    let zp = law.zp().clone();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let pairs = 200;
    for n in 0..pairs {
        let x = random_level_point(&law, &mut rng)?;
        let y = random_level_point(&law, &mut rng)?;
        let (mx, my) = (unitriangular(&zp, &x), unitriangular(&zp, &y));
        let prod = unitriangular(&zp, &law.gmul(&x, &y)?);
        let inv = unitriangular(&zp, &law.ginv(&x)?);
        let comm = unitriangular(&zp, &law.gcomm(&x, &y)?);
        let expected_comm = mx.inverse()?.try_mul(&my.inverse()?)?.try_mul(&mx)?.try_mul(&my)?;
        if prod != mx.try_mul(&my)? || inv != mx.inverse()? || comm != expected_comm {
            return Ok(Err(format!("pair {n} disagrees with the matrix oracle: {x}, {y}")));
        }
    }
    Ok(Ok(format!("{pairs} pairs agree mod 3^8")))
}

fn random_domain_matrix(zp: &Zp, n: usize, rng: &mut impl Rng) -> PadicMatrix {
    let s = BigInt::from(bold_p(zp.prime()));
    PadicMatrix::from_fn(zp, n, n, |_, _| zp.reduce_signed(&(BigInt::from(rng.gen_range(-40i64..40)) * &s)))
}

/// exp/log round trips and the BCH identity for p ∈ {2, 3, 5}, k = 8.
pub fn criterion_2() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let per_prime = 100;
    for p in [2u64, 3, 5] {
        let zp = Zp::new(p, 8)?;
        for n in 0..per_prime {
            let size = 1 + n % 3;
            let a = random_domain_matrix(&zp, size, &mut rng);
            let b = random_domain_matrix(&zp, size, &mut rng);
            let ea = mat_exp(&a)?;
            if mat_log(&ea)? != a {
                return Ok(Err(format!("log(exp(A)) != A at p = {p}, sample {n}")));
            }
            if ea.try_mul(&mat_exp(&b)?)? != mat_exp(&bch(&a, &b)?)? {
                return Ok(Err(format!("exp(A)exp(B) != exp(bch(A, B)) at p = {p}, sample {n}")));
            }
        }
    }
    let z = Zp::new(3, 3)?;
    let three = PadicMatrix::from_i64(&z, &[vec![3]])?;
    let thirteen = PadicMatrix::from_i64(&z, &[vec![13]])?;
    if mat_exp(&three)? != thirteen || mat_log(&thirteen)? != three {
        return Ok(Err("1x1 fixture exp(3) = 13 mod 27 not reproduced".into()));
    }
    Ok(Ok(format!("{} samples per prime, fixture exp(3) = 13 mod 27", per_prime)))
}

/// Lazard constants equal p^N times quadratic-part constants mod p^{k-2}.
pub fn criterion_3() -> Check {
    let desc = RingDescriptor::new(3, 6, 0, 6)?;
    let modulus = BigInt::from(3u32).pow(6 - 2);
    let laws = [
        ("additive", FormalGroupLaw::additive(&desc, 2, 1)?),
        ("multiplicative", FormalGroupLaw::multiplicative(&desc, 1)?),
        ("heisenberg", FormalGroupLaw::heisenberg(&desc, 1)?),
    ];
    for (name, law) in &laws {
        let lattice = Lazard::new(law)?.lie_lattice()?;
        let quad = law.extract_bracket();
        let scale = BigInt::from(3u32).pow(law.level());
        let d = law.dim();
        for i in 0..d {
            for j in 0..d {
                for l in 0..d {
                    let lhs = lattice.constant(i, j, l).signed();
                    let rhs = &scale * quad[i][j][l].constant_term().signed();
                    if !(lhs - rhs).mod_floor(&modulus).is_zero() {
                        return Ok(Err(format!("{name}: c_{i}{j}^{l} disagrees with the quadratic part")));
                    }
                }
            }
        }
        if *name != "heisenberg" && !lattice.is_abelian() {
            return Ok(Err(format!("{name}: abelian law with a nonzero bracket")));
        }
    }
    let heis = Lazard::new(&laws[2].1)?.lie_lattice()?;
    if heis.nonzero_constants() != vec![(0, 1, 2, BigInt::from(3))] {
        return Ok(Err(format!("heisenberg constants {:?}", heis.nonzero_constants())));
    }
    Ok(Ok("three laws consistent mod 3^4; heisenberg c_12^3 = 3".into()))
}

/// The built-in Zp-laws used by the embedding criterion.
pub fn builtin_zp_laws() -> Result<Vec<(&'static str, FormalGroupLaw)>> {
    let d3 = RingDescriptor::new(3, 6, 0, 6)?;
    let d2 = RingDescriptor::new(2, 6, 0, 6)?;
    Ok(vec![
        ("additive d=2, p=3", FormalGroupLaw::additive(&d3, 2, 1)?),
        ("multiplicative, p=3", FormalGroupLaw::multiplicative(&d3, 1)?),
        ("multiplicative, p=2, N=2", FormalGroupLaw::multiplicative(&d2, 2)?),
        ("heisenberg, p=3", FormalGroupLaw::heisenberg(&d3, 1)?),
    ])
}

/// Embedding certificates for the built-in laws.
pub fn criterion_4() -> Check {
    let mut notes = Vec::new();
    for (name, law) in builtin_zp_laws()? {
        let start = Instant::now();
        let emb = uniform_embedding(&law, RepStrategy::auto())?;
        let cert = emb.certify(&[], 100, 4)?;
        let p = law.zp().prime();
        let index = bold_p(p).pow(law.dim() as u32) as usize;
        let checks = [
            ensure(cert.multiplicativity.ok() && cert.multiplicativity.checked == 100, || {
                format!("{name}: multiplicativity {:?}", cert.multiplicativity)
            }),
            ensure(cert.injectivity.ok(), || format!("{name}: transversal not separated")),
            ensure(cert.index == index && cert.degree == index * cert.ell, || {
                format!("{name}: degree {} for index {index}", cert.degree)
            }),
            ensure(num_bigint::BigUint::from(cert.degree) <= cert.degree_bound, || {
                format!("{name}: degree above the bound")
            }),
            ensure(start.elapsed().as_secs_f64() < 60.0, || format!("{name}: over 60 s")),
        ];
        if let Some(Err(e)) = checks.into_iter().find(|c| c.is_err()) {
            return Ok(Err(e));
        }
        notes.push(format!("{name}: n = {}", cert.degree));
    }
    Ok(Ok(notes.join("; ")))
}

fn t_poly(desc: &RingDescriptor, terms: &[(u32, i64)]) -> Result<RingElement> {
    RingElement::from_terms(desc, terms.iter().map(|&(e, c)| (vec![e], BigInt::from(c))))
}

/// The four points used by the discrimination criterion: 3, t, 9, 3 + t.
pub fn discrimination_points(law: &FormalGroupLaw) -> Result<Vec<StandardPoint>> {
    let d = law.descriptor();
    [&[(0, 3)][..], &[(1, 1)], &[(0, 9)], &[(0, 3), (1, 1)]]
        .iter()
        .map(|terms| law.point(vec![t_poly(d, terms)?]))
        .collect()
}

/// Discrimination of four points for X + Y + tXY over Z3[[t]].
pub fn criterion_5() -> Check {
    let desc = RingDescriptor::new(3, 6, 1, 6)?;
    let law = FormalGroupLaw::twisted_multiplicative(&desc, 1)?;
    let s = discrimination_points(&law)?;
    let cert = discriminate_pipeline(&law, &s, 8)?;
    let val = cert.evaluation.value.value.valuation();
    let checks = [
        ensure(cert.is_valid(), || "certificate invalid".into()),
        ensure(cert.distinctness.ok() && cert.distinctness.checked == 6, || "images not pairwise distinct".into()),
        ensure(cert.multiplicativity.ok() && cert.multiplicativity.checked == 16, || {
            "multiplicativity fails on pairs from S".into()
        }),
        ensure(val < 6, || format!("r(a) has valuation {val}")),
    ];
    if let Some(Err(e)) = checks.into_iter().find(|c| c.is_err()) {
        return Ok(Err(e));
    }
    let small = RingDescriptor::new(3, 3, 1, 6)?;
    let r = t_poly(&small, &[(1, 3), (2, -1)])?;
    let a = find_evaluation_point(&r, 8)?;
    if a.point[0].to_i64() != Some(6) || a.value.value.to_i64() != Some(9) {
        return Ok(Err(format!("t(3 - t) selected a = {}", a.point[0])));
    }
    Ok(Ok(format!(
        "a = {}, v(r(a)) = {val}, n = {}; t(3 - t) selects a = 6 with r(a) = 9",
        cert.evaluation.point[0], cert.degree
    )))
}

/// The truncated geometric series at a = 3, k = 3.
pub fn criterion_6() -> Check {
    let desc = RingDescriptor::new(3, 3, 1, 6)?;
    let terms: Vec<(u32, i64)> = (0..=desc.degree_cutoff() + 1).map(|i| (i, 1)).collect();
    let geometric = t_poly(&desc, &terms)?;
    let e = geometric.evaluate(&[desc.zp().int(3)])?;
    let m = BigInt::from(27);
    // 2·x + 27·y = 1, so -1/2 = -x mod 27.
    let minus_half = (-BigInt::from(2).extended_gcd(&m).x).mod_floor(&m);
    if e.value.signed().mod_floor(&m) != minus_half || e.guarantee < 3 {
        return Ok(Err(format!("geometric series gave {} to {} digits", e.value, e.guarantee)));
    }
    Ok(Ok(format!("sum = {} = -1/2 mod 27", e.value)))
}

/// Existential transfer for the Heisenberg law.
pub fn criterion_7() -> Check {
    let desc = RingDescriptor::new(3, 6, 0, 6)?;
    let law = FormalGroupLaw::heisenberg(&desc, 1)?;
    let hom = Homomorphism::new(&law, &[], RepStrategy::auto())?;
    let s = parse_sentence("E x y : [x,y] != 1")?;
    let (e1, e2) = (law.basis_point(0), law.basis_point(1));
    let r = check_transfer(&s, &[e1.clone(), e2], &[], &hom)?;
    let sound = r.atoms.iter().all(|a| {
        a.group_marking == crate::sentences::Marking::Sound && a.image_marking == crate::sentences::Marking::Sound
    });
    if !r.transferred() || !sound {
        return Ok(Err(format!("witness (e1, e2): {}", r.verdict())));
    }
    let r = check_transfer(&s, &[e1.clone(), law.gpow_i64(&e1, 2)?], &[], &hom)?;
    if r.holds_in_group {
        return Ok(Err("commuting witness reported as satisfying".into()));
    }
    Ok(Ok("(e1, e2) transfers SOUND; commuting witness fails in G".into()))
}

/// Negative controls.
pub fn criterion_8() -> Check {
    let desc = RingDescriptor::new(3, 4, 0, 4)?;
    let comps = vec![crate::series::MultiSeries::from_terms(
        &desc,
        2,
        [
            (vec![1, 0], vec![], BigInt::from(1)),
            (vec![0, 1], vec![], BigInt::from(1)),
            (vec![2, 0], vec![], BigInt::from(1)),
        ],
    )?];
    let bad = FormalGroupLaw::new(desc, 1, 1, comps)?;
    let report = bad.validate();
    let witness = report.failures().next().and_then(|c| c.witness.clone());
    if report.passed() || witness.as_deref() != Some("X^2") {
        return Ok(Err(format!("mutated law: witness {witness:?}")));
    }

    let tdesc = RingDescriptor::new(3, 4, 1, 6)?;
    let law = FormalGroupLaw::twisted_multiplicative(&tdesc, 1)?;
    let t = law.point(vec![t_poly(&tdesc, &[(1, 1)])?])?;
    match discriminate_pipeline(&law, &[t.clone(), t], 4) {
        Err(e) if matches!(e.root(), Error::IndistinguishableAtPrecision { .. }) => {}
        other => return Ok(Err(format!("duplicated input gave {other:?}"))),
    }

    let zp = Zp::new(3, 4)?;
    let centered = LieLattice::from_brackets(&zp, 4, &[(0, 1, 1, 2), (0, 2, 2, -2), (1, 2, 0, 1)])?;
    match build_rep(&centered, RepStrategy::auto()) {
        Err(Error::NoStrategyApplies) => {}
        other => return Ok(Err(format!("centered lattice gave {other:?}"))),
    }
    Ok(Ok("X + Y + X^2 rejected with witness X^2; duplicate and centered inputs rejected".into()))
}

pub const TITLES: [&str; 8] = [
    "Heisenberg oracle equivalence",
    "exp/log suite",
    "Lazard consistency",
    "embedding certificates",
    "discrimination end-to-end",
    "evaluation fixture",
    "existential transfer",
    "negative controls",
];

pub fn run_criterion(number: u32) -> CriterionOutcome {
    let start = Instant::now();
    let result = match number {
        1 => criterion_1(),
        2 => criterion_2(),
        3 => criterion_3(),
        4 => criterion_4(),
        5 => criterion_5(),
        6 => criterion_6(),
        7 => criterion_7(),
        8 => criterion_8(),
        _ => Ok(Err(format!("no criterion {number}"))),
    };
    let seconds = start.elapsed().as_secs_f64();
    let (passed, detail) = match result {
        Ok(Ok(d)) => (true, d),
        Ok(Err(d)) => (false, d),
        Err(e) => (false, format!("error: {e}")),
    };
    let limit_ok = number != 1 || seconds < 10.0;
    CriterionOutcome {
        number,
        title: TITLES.get(number as usize - 1).copied().unwrap_or("unknown"),
        passed: passed && limit_ok,
        detail: if limit_ok {
            detail
        } else {
            format!("{detail}; took {seconds:.1} s, limit 10 s")
        },
        seconds,
    }
}

/// Criteria 1 to 8 in order.
pub fn run_all() -> Vec<CriterionOutcome> {
    (1..=8).map(run_criterion).collect()
}
