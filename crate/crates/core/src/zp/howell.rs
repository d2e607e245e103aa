//! Howell normal form over Z/p^k.
//!
//! Gaussian elimination over a field is unsound here because of zero
//! divisors. Pivots are chosen by minimal valuation and every pivot row of
//! valuation v contributes the extra row p^(k-v)·row, which restores the
//! Howell property: the rows with leading zeros in the first j columns span
//! every row-space vector with that many leading zeros.

use num_bigint::BigUint;
use num_traits::Zero;

use super::{PadicMatrix, PadicScalar, Zp};

/// Howell form of the row space spanned by `rows`. Zero rows are dropped.
pub fn howell_form(ring: &Zp, rows: &[Vec<BigUint>]) -> Vec<Vec<BigUint>> {
    let k = ring.precision();
    let ncols = rows.first().map_or(0, Vec::len);
    let mut work: Vec<Vec<BigUint>> = rows
        .iter()
        .map(|r| r.iter().map(|x| ring.reduce(x)).collect())
        .collect();
    let mut pivot_rows: Vec<(usize, u32)> = Vec::new();
    let mut next = 0;

    for col in 0..ncols {
        let best = (next..work.len())
            .map(|i| (i, ring.valuation(&work[i][col])))
            .filter(|&(_, v)| v < k)
            .min_by_key(|&(i, v)| (v, i));
        let Some((idx, v)) = best else { continue };
        work.swap(next, idx);

        // normalize the pivot to exactly p^v
        let shift = ring.prime_power(v);
        let unit = ring.with_precision(k - v).reduce(&(&work[next][col] / &shift));
        let unit_inv = ring
            .with_precision(k - v)
            .inv(&unit)
            .expect("unit part is invertible");
        for x in work[next].iter_mut() {
            *x = ring.mul(x, &unit_inv);
        }
        debug_assert_eq!(work[next][col], shift);

        // clear below
        for i in next + 1..work.len() {
            if work[i][col].is_zero() {
                continue;
            }
            let f = &work[i][col] / &shift;
            sub_multiple(ring, &mut work, i, next, &f);
        }
        // reduce above into [0, p^v)
        for &(prow, _) in &pivot_rows {
            let q = &work[prow][col] / &shift;
            if !q.is_zero() {
                sub_multiple(ring, &mut work, prow, next, &q);
            }
        }
        if v > 0 {
            let ann = ring.prime_power(k - v);
            let extra: Vec<BigUint> = work[next].iter().map(|x| ring.mul(x, &ann)).collect();
            if extra.iter().any(|x| !x.is_zero()) {
                work.push(extra);
            }
        }
        pivot_rows.push((next, v));
        next += 1;
    }

    work.truncate(next);
    work.retain(|r| r.iter().any(|x| !x.is_zero()));
    work
}

fn sub_multiple(ring: &Zp, work: &mut [Vec<BigUint>], target: usize, source: usize, f: &BigUint) {
    let src = work[source].clone();
    for (x, s) in work[target].iter_mut().zip(&src) {
        *x = ring.sub(x, &ring.mul(f, s));
    }
}

/// Generators of the left kernel {v : vM = 0 mod p^k}, in Howell form.
/// The result is empty iff the kernel is trivial mod p^k.
pub fn howell_kernel(m: &PadicMatrix) -> Vec<Vec<PadicScalar>> {
    let ring = m.ring();
    let (r, c) = (m.rows(), m.cols());
    let augmented: Vec<Vec<BigUint>> = (0..r)
        .map(|i| {
            let mut row = m.row_vec(i);
            row.extend((0..r).map(|j| if i == j { BigUint::from(1u32) } else { BigUint::zero() }));
            row
        })
        .collect();
    howell_form(ring, &augmented)
        .into_iter()
        .filter(|row| row[..c].iter().all(Zero::is_zero))
        .map(|row| row[c..].iter().map(|x| ring.scalar(x.clone())).collect())
        .collect()
}

/// Whether v ↦ vM is injective on Zp^rows, certified at precision: every
/// kernel element mod p^k lies in p·(Z/p^k)^rows, so no Smith invariant of M
/// vanishes mod p^k and M has full row rank over Qp.
pub fn is_injective_at_precision(m: &PadicMatrix) -> bool {
    howell_kernel(m)
        .iter()
        .all(|v| v.iter().all(|x| x.valuation() >= 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn mat(p: u64, k: u32, rows: &[Vec<i64>]) -> PadicMatrix {
        PadicMatrix::from_i64(&Zp::new(p, k).unwrap(), rows).unwrap()
    }

    fn residues(v: &[PadicScalar]) -> Vec<u64> {
        v.iter().map(|x| x.to_i64().unwrap().rem_euclid(1 << 40) as u64).collect()
    }

    #[test]
    fn identity_has_trivial_kernel() {
        assert!(howell_kernel(&mat(3, 2, &[vec![1, 0], vec![0, 1]])).is_empty());
    }

    #[test]
    fn three_mod_nine() {
        let ker = howell_kernel(&mat(3, 2, &[vec![3]]));
        assert_eq!(ker.len(), 1);
        assert_eq!(ker[0][0].residue(), &BigUint::from(3u32));
    }

    #[test]
    fn zero_matrix_kernel_is_everything() {
        let ker = howell_kernel(&mat(3, 2, &[vec![0, 0], vec![0, 0]]));
        let got: Vec<Vec<u64>> = ker.iter().map(|v| residues(v)).collect();
        assert_eq!(got, vec![vec![1, 0], vec![0, 1]]);
    }

    #[test]
    fn injectivity_certificate() {
        // λ ↦ (λ1, 3λ2, λ3) is injective over Zp but has kernel 3^(k-1)·e2 mod 3^k
        let m = mat(3, 4, &[vec![1, 0, 0], vec![0, 3, 0], vec![0, 0, 1]]);
        assert_eq!(howell_kernel(&m).len(), 1);
        assert!(is_injective_at_precision(&m));
        let degenerate = mat(3, 4, &[vec![1, 2], vec![2, 4]]);
        assert!(!is_injective_at_precision(&degenerate));
    }

    /// All v in (Z/9)^r with vM ≡ 0 (mod 9).
    fn brute_kernel(m: &[Vec<i64>]) -> Vec<Vec<i64>> {
        let r = m.len();
        let c = m[0].len();
        let mut out = Vec::new();
        let total = 9i64.pow(r as u32);
        for code in 0..total {
            let v: Vec<i64> = (0..r).map(|i| (code / 9i64.pow(i as u32)) % 9).collect();
            let ok = (0..c).all(|j| (0..r).map(|i| v[i] * m[i][j]).sum::<i64>() % 9 == 0);
            if ok {
                out.push(v);
            }
        }
        out
    }

    /// Z/9-span of the generators, enumerated.
    fn span(gens: &[Vec<i64>], r: usize) -> Vec<Vec<i64>> {
        let mut set = std::collections::BTreeSet::new();
        let total = 9i64.pow(gens.len() as u32);
        for code in 0..total {
            let mut v = vec![0i64; r];
            for (g, gen) in gens.iter().enumerate() {
                let coef = (code / 9i64.pow(g as u32)) % 9;
                for i in 0..r {
                    v[i] = (v[i] + coef * gen[i]).rem_euclid(9);
                }
            }
            set.insert(v);
        }
        set.into_iter().collect()
    }

    proptest! {
        #[test]
        fn kernel_matches_enumeration(
            r in 1usize..=2, c in 1usize..=2,
            entries in proptest::collection::vec(0i64..9, 4),
        ) {
            let m: Vec<Vec<i64>> = (0..r).map(|i| (0..c).map(|j| entries[i * 2 + j]).collect()).collect();
            let ker = howell_kernel(&mat(3, 2, &m));
            let gens: Vec<Vec<i64>> = ker.iter().map(|v| v.iter().map(|x| x.to_i64().unwrap().rem_euclid(9)).collect()).collect();
            for g in &gens {
                for j in 0..c {
                    prop_assert_eq!((0..r).map(|i| g[i] * m[i][j]).sum::<i64>().rem_euclid(9), 0);
                }
            }
            let mut expected = brute_kernel(&m);
            expected.sort();
            prop_assert_eq!(span(&gens, r), expected);
        }

        #[test]
        fn kernel_generators_annihilate(
            entries in proptest::collection::vec(-200i64..200, 12),
        ) {
            let m: Vec<Vec<i64>> = entries.chunks(4).map(|c| c.to_vec()).collect();
            let pm = mat(5, 3, &m);
            for v in howell_kernel(&pm) {
                let row = PadicMatrix::from_residues(pm.ring(), 1, 3, v.iter().map(|x| x.residue().clone()).collect()).unwrap();
                prop_assert!(row.try_mul(&pm).unwrap().is_zero());
            }
        }
    }
}
