//! Formal group laws and the standard groups they define.
//!
//! A standard group of dimension d and level N is the set (𝔪^{*N})^d with
//! multiplication given coordinate-wise by d power series F_j(X, Y). Points
//! are stored as their chart coordinates.

use std::fmt;
use std::sync::OnceLock;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::series::{monomial_name, MultiSeries, RingDescriptor, RingElement};
use crate::zp::Zp;

/// A point of (𝔪^{*N})^d, reliable up to ideal order `precision`.
#[derive(Clone)]
pub struct StandardPoint {
    coords: Vec<RingElement>,
    precision: u32,
}

impl StandardPoint {
    pub fn coords(&self) -> &[RingElement] {
        &self.coords
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_identity(&self) -> bool {
        self.coords.iter().all(|c| c.ideal_order() >= self.precision)
    }

    /// Coordinates as Zp residues (constant terms).
    pub fn residues(&self) -> Vec<BigUint> {
        self.coords
            .iter()
            .map(|c| c.constant_term().residue().clone())
            .collect()
    }

    /// Minimal ideal order over the coordinates.
    pub fn order(&self) -> u32 {
        self.coords
            .iter()
            .map(RingElement::ideal_order)
            .min()
            .unwrap_or(0)
    }

    /// Agreement up to the smaller of the two precisions.
    pub fn congruent(&self, other: &Self) -> bool {
        let prec = self.precision.min(other.precision);
        self.coords.len() == other.coords.len()
            && self
                .coords
                .iter()
                .zip(&other.coords)
                .all(|(a, b)| a.congruent(b, prec))
    }

    pub fn with_precision_cap(mut self, precision: u32) -> Self {
        self.precision = self.precision.min(precision);
        self
    }
}

impl PartialEq for StandardPoint {
    fn eq(&self, other: &Self) -> bool {
        self.coords == other.coords
    }
}
impl Eq for StandardPoint {}

impl fmt::Debug for StandardPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self} [prec {}]", self.precision)
    }
}

impl fmt::Display for StandardPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.coords.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(", "))
    }
}

/// One axiom check in a [`ValidationReport`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AxiomCheck {
    pub axiom: String,
    pub passed: bool,
    /// Monomial where the two sides first differ, with the component index.
    pub witness: Option<String>,
    pub detail: Option<String>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub checks: Vec<AxiomCheck>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &AxiomCheck> {
        self.checks.iter().filter(|c| !c.passed)
    }

    pub fn check(&self, axiom: &str) -> Option<&AxiomCheck> {
        self.checks.iter().find(|c| c.axiom == axiom)
    }
}

/// Flattened law over Zp for fast evaluation on residues.
struct CompiledTerms {
    comps: Vec<Vec<(Vec<u32>, BigUint)>>,
    max_pow: Vec<u32>,
}

impl CompiledTerms {
    fn new(series: &[MultiSeries], nvars: usize) -> Self {
        let mut max_pow = vec![0; nvars];
        let comps = series
            .iter()
            .map(|s| {
                s.terms()
                    .map(|(x, _, c)| {
                        for (m, &e) in max_pow.iter_mut().zip(x) {
                            *m = (*m).max(e);
                        }
                        (x.to_vec(), c.clone())
                    })
                    .collect()
            })
            .collect();
        CompiledTerms { comps, max_pow }
    }

    fn eval(&self, zp: &Zp, vals: &[&BigUint]) -> Vec<BigUint> {
        let powers: Vec<Vec<BigUint>> = vals
            .iter()
            .zip(&self.max_pow)
            .map(|(v, &m)| {
                let mut row = vec![BigUint::one()];
                for i in 1..=m as usize {
                    let next = zp.mul(&row[i - 1], v);
                    row.push(next);
                }
                row
            })
            .collect();
        self.comps
            .iter()
            .map(|terms| {
                let mut acc = BigUint::zero();
                for (e, c) in terms {
                    let mut t = c.clone();
                    for (row, &k) in powers.iter().zip(e) {
                        if k > 0 {
                            if row[k as usize].is_zero() {
                                t.set_zero();
                                break;
                            }
                            t = zp.mul(&t, &row[k as usize]);
                        }
                    }
                    acc += t;
                }
                zp.reduce(&acc)
            })
            .collect()
    }
}

struct FormalInverse {
    series: Vec<MultiSeries>,
}

/// A d-dimensional formal group law of level N over Zp[[t1..tm]].
pub struct FormalGroupLaw {
    desc: RingDescriptor,
    dim: usize,
    level: u32,
    components: Vec<MultiSeries>,
    compiled: OnceLock<CompiledTerms>,
    inverse: OnceLock<std::result::Result<FormalInverse, Error>>,
    compiled_inverse: OnceLock<CompiledTerms>,
}

impl Clone for FormalGroupLaw {
    fn clone(&self) -> Self {
        FormalGroupLaw::from_parts(self.desc.clone(), self.dim, self.level, self.components.clone())
    }
}

impl fmt::Debug for FormalGroupLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FormalGroupLaw")
            .field("desc", &self.desc)
            .field("dim", &self.dim)
            .field("level", &self.level)
            .field("components", &self.components)
            .finish()
    }
}

impl PartialEq for FormalGroupLaw {
    fn eq(&self, other: &Self) -> bool {
        self.desc == other.desc
            && self.dim == other.dim
            && self.level == other.level
            && self.components == other.components
    }
}

impl FormalGroupLaw {
    /// Builds a law from its components (each in 2d variables X1..Xd, Y1..Yd).
    /// Axioms are not checked here; see [`FormalGroupLaw::validate`].
    pub fn new(
        desc: RingDescriptor,
        dim: usize,
        level: u32,
        components: Vec<MultiSeries>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("dimension must be >= 1".into()));
        }
        if level == 0 {
            return Err(Error::InvalidInput("level must be >= 1".into()));
        }
        if components.len() != dim {
            return Err(Error::DimensionMismatch(format!(
                "{} components for dimension {dim}",
                components.len()
            )));
        }
        for c in &components {
            desc.check_same(c.descriptor())?;
            if c.num_vars() != 2 * dim {
                return Err(Error::DimensionMismatch(format!(
                    "component in {} variables, expected {}",
                    c.num_vars(),
                    2 * dim
                )));
            }
        }
        Ok(Self::from_parts(desc, dim, level, components))
    }

    fn from_parts(desc: RingDescriptor, dim: usize, level: u32, components: Vec<MultiSeries>) -> Self {
        FormalGroupLaw {
            desc,
            dim,
            level,
            components,
            compiled: OnceLock::new(),
            inverse: OnceLock::new(),
            compiled_inverse: OnceLock::new(),
        }
    }

    fn from_int_terms(
        desc: &RingDescriptor,
        dim: usize,
        level: u32,
        comps: Vec<Vec<(Vec<u32>, Vec<u32>, i64)>>,
    ) -> Result<Self> {
        let components = comps
            .into_iter()
            .map(|terms| {
                MultiSeries::from_terms(
                    desc,
                    2 * dim,
                    terms.into_iter().map(|(x, t, c)| (x, t, BigInt::from(c))),
                )
                .map(|s| s.assume_exact(true))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(desc.clone(), dim, level, components)
    }

    /// F_j = X_j + Y_j.
    pub fn additive(desc: &RingDescriptor, dim: usize, level: u32) -> Result<Self> {
        let m = desc.param_vars();
        let comps = (0..dim)
            .map(|j| {
                let mut x = vec![0; 2 * dim];
                x[j] = 1;
                let mut y = vec![0; 2 * dim];
                y[dim + j] = 1;
                vec![(x, vec![0; m], 1), (y, vec![0; m], 1)]
            })
            .collect();
        Self::from_int_terms(desc, dim, level, comps)
    }

    /// F = X + Y + XY, the law of 1 + 𝔪^{*N} under multiplication.
    pub fn multiplicative(desc: &RingDescriptor, level: u32) -> Result<Self> {
        let m = desc.param_vars();
        let z = vec![0; m];
        Self::from_int_terms(
            desc,
            1,
            level,
            vec![vec![
                (vec![1, 0], z.clone(), 1),
                (vec![0, 1], z.clone(), 1),
                (vec![1, 1], z, 1),
            ]],
        )
    }

    /// F = X + Y + t1·XY over Zp[[t1..tm]], m ≥ 1.
    pub fn twisted_multiplicative(desc: &RingDescriptor, level: u32) -> Result<Self> {
        let m = desc.param_vars();
        if m == 0 {
            return Err(Error::InvalidInput(
                "twisted multiplicative law needs a t-variable".into(),
            ));
        }
        let z = vec![0; m];
        let mut t = z.clone();
        t[0] = 1;
        Self::from_int_terms(
            desc,
            1,
            level,
            vec![vec![
                (vec![1, 0], z.clone(), 1),
                (vec![0, 1], z, 1),
                (vec![1, 1], t, 1),
            ]],
        )
    }

    /// The Heisenberg law (X1+Y1, X2+Y2, X3+Y3+X1·Y2), matching the product of
    /// unitriangular matrices [[1, x1, x3], [0, 1, x2], [0, 0, 1]].
    pub fn heisenberg(desc: &RingDescriptor, level: u32) -> Result<Self> {
        let m = desc.param_vars();
        let z = vec![0; m];
        let unit = |i: usize| {
            let mut e = vec![0; 6];
            e[i] = 1;
            e
        };
        Self::from_int_terms(
            desc,
            3,
            level,
            vec![
                vec![(unit(0), z.clone(), 1), (unit(3), z.clone(), 1)],
                vec![(unit(1), z.clone(), 1), (unit(4), z.clone(), 1)],
                vec![
                    (unit(2), z.clone(), 1),
                    (unit(5), z.clone(), 1),
                    (vec![1, 0, 0, 0, 1, 0], z, 1),
                ],
            ],
        )
    }

    pub fn descriptor(&self) -> &RingDescriptor {
        &self.desc
    }

    pub fn zp(&self) -> &Zp {
        self.desc.zp()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn components(&self) -> &[MultiSeries] {
        &self.components
    }

    pub fn is_exact(&self) -> bool {
        self.components.iter().all(MultiSeries::is_exact)
    }

    pub fn is_over_zp(&self) -> bool {
        self.desc.param_vars() == 0
    }

    /// The same law reinterpreted at another precision. Coefficients are
    /// treated as exact integers, so raising the precision is a canonical lift.
    pub fn with_precision(&self, precision: u32) -> Self {
        let desc = self.desc.with_precision(precision);
        let components = self
            .components
            .iter()
            .map(|c| c.with_descriptor(&desc))
            .collect();
        Self::from_parts(desc, self.dim, self.level, components)
    }

    pub fn with_cutoff(&self, cutoff: u32) -> Self {
        let desc = self.desc.with_cutoff(cutoff);
        let components = self
            .components
            .iter()
            .map(|c| c.with_descriptor(&desc))
            .collect();
        Self::from_parts(desc, self.dim, self.level, components)
    }

    /// The level required for uniformity: N ≥ 1 for odd p, N ≥ 2 for p = 2.
    pub fn level_ok(&self) -> bool {
        self.level >= if self.desc.prime() == 2 { 2 } else { 1 }
    }

    // ----- points -------------------------------------------------------

    /// Moves a point onto this law's descriptor. Raising the precision is a
    /// canonical lift and the point is then treated as exact integer data;
    /// lowering truncates.
    pub fn transfer_point(&self, p: &StandardPoint) -> Result<StandardPoint> {
        if p.coords.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "point of dimension {} for a law of dimension {}",
                p.coords.len(),
                self.dim
            )));
        }
        let k = self.desc.precision();
        let precision = if p.coords.first().map_or(0, |c| c.descriptor().precision()) < k {
            k
        } else {
            p.precision.min(k)
        };
        let coords = p
            .coords
            .iter()
            .map(|c| c.with_descriptor(&self.desc))
            .collect();
        Ok(StandardPoint { coords, precision })
    }

    pub fn identity(&self) -> StandardPoint {
        StandardPoint {
            coords: vec![RingElement::zero(&self.desc); self.dim],
            precision: self.desc.precision(),
        }
    }

    /// Builds a point, checking that each coordinate lies in 𝔪^{*N}.
    pub fn point(&self, coords: Vec<RingElement>) -> Result<StandardPoint> {
        if coords.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "{} coordinates for dimension {}",
                coords.len(),
                self.dim
            )));
        }
        for (index, c) in coords.iter().enumerate() {
            self.desc.check_same(c.descriptor())?;
            let order = c.ideal_order();
            if order < self.level {
                return Err(Error::NotAPoint {
                    index,
                    order,
                    level: self.level,
                });
            }
        }
        Ok(StandardPoint {
            coords,
            precision: self.desc.precision(),
        })
    }

    /// A point with constant (Zp) coordinates.
    pub fn point_from_ints(&self, coords: &[i64]) -> Result<StandardPoint> {
        self.point(coords.iter().map(|&c| RingElement::int(&self.desc, c)).collect())
    }

    pub fn point_from_residues(&self, coords: &[BigUint], precision: u32) -> Result<StandardPoint> {
        let mut p = self.point(
            coords
                .iter()
                .map(|c| RingElement::constant(&self.desc, c))
                .collect(),
        )?;
        p.precision = precision.min(self.desc.precision());
        Ok(p)
    }

    /// The basis point p^N·e_i.
    pub fn basis_point(&self, i: usize) -> StandardPoint {
        let mut coords = vec![RingElement::zero(&self.desc); self.dim];
        coords[i] = RingElement::constant(&self.desc, &self.zp().prime_power(self.level));
        StandardPoint {
            coords,
            precision: self.desc.precision(),
        }
    }

    fn check_point(&self, p: &StandardPoint) -> Result<()> {
        if p.coords.len() != self.dim {
            return Err(Error::DimensionMismatch(format!(
                "point of dimension {} for a law of dimension {}",
                p.coords.len(),
                self.dim
            )));
        }
        for c in &p.coords {
            self.desc.check_same(c.descriptor())?;
        }
        Ok(())
    }

    fn compiled(&self) -> &CompiledTerms {
        self.compiled
            .get_or_init(|| CompiledTerms::new(&self.components, 2 * self.dim))
    }

    fn truncation_guarantee(&self, exact: bool, vmin: u32) -> u32 {
        let k = self.desc.precision();
        if exact {
            k
        } else {
            k.min((self.desc.degree_cutoff() + 1).saturating_mul(vmin))
        }
    }

    fn check_order(&self, p: &StandardPoint) -> Result<()> {
        for (index, c) in p.coords.iter().enumerate() {
            let order = c.ideal_order();
            if order == 0 {
                return Err(Error::ValuationTooLow {
                    index,
                    valuation: 0,
                    required: 1,
                });
            }
        }
        Ok(())
    }

    /// Group product: coordinate-wise evaluation of F at (P, Q).
    pub fn gmul(&self, p: &StandardPoint, q: &StandardPoint) -> Result<StandardPoint> {
        self.check_point(p)?;
        self.check_point(q)?;
        self.check_order(p)?;
        self.check_order(q)?;
        let precision = p.precision.min(q.precision);
        if self.is_over_zp() {
            let zp = self.zp();
            let xs = p.residues();
            let ys = q.residues();
            let vals: Vec<&BigUint> = xs.iter().chain(&ys).collect();
            let vmin = vals.iter().map(|v| zp.valuation(v)).min().unwrap_or(0);
            let out = self.compiled().eval(zp, &vals);
            let guarantee = self.truncation_guarantee(self.is_exact(), vmin);
            return self.point_from_residues(&out, precision.min(guarantee));
        }
        let inputs: Vec<RingElement> = p.coords.iter().chain(&q.coords).cloned().collect();
        let mut coords = Vec::with_capacity(self.dim);
        let mut guarantee = precision;
        for f in &self.components {
            let (v, g) = f.eval_ring(&inputs)?;
            guarantee = guarantee.min(g);
            coords.push(v);
        }
        Ok(StandardPoint {
            coords,
            precision: guarantee,
        })
    }

    /// The formal inverse ι with F(X, ι(X)) = 0, solved degree by degree via
    /// ι ← ι − F(X, ι) starting from ι = −X.
    pub fn formal_inverse(&self) -> Result<&[MultiSeries]> {
        let inv = self.inverse.get_or_init(|| self.solve_inverse());
        match inv {
            Ok(f) => Ok(&f.series),
            Err(e) => Err(e.clone()),
        }
    }

    fn solve_inverse(&self) -> Result<FormalInverse> {
        let d = self.dim;
        let xs: Vec<MultiSeries> = (0..d).map(|i| MultiSeries::var(&self.desc, d, i)).collect();
        let mut iota: Vec<MultiSeries> = xs.iter().map(MultiSeries::neg).collect();
        let max_rounds = self.desc.degree_cutoff() + 2;
        for _ in 0..max_rounds {
            let images: Vec<MultiSeries> = xs.iter().chain(&iota).cloned().collect();
            let residual: Vec<MultiSeries> = self
                .components
                .iter()
                .map(|f| f.substitute(&images))
                .collect::<Result<_>>()?;
            if residual.iter().all(MultiSeries::is_zero) {
                // recheck with the converged ι to decide exactness
                let candidate: Vec<MultiSeries> =
                    iota.into_iter().map(|s| s.assume_exact(true)).collect();
                let images: Vec<MultiSeries> = xs.iter().chain(&candidate).cloned().collect();
                let check: Vec<MultiSeries> = self
                    .components
                    .iter()
                    .map(|f| f.substitute(&images))
                    .collect::<Result<_>>()?;
                let exact = check.iter().all(|c| c.is_zero() && c.is_exact());
                return Ok(FormalInverse {
                    series: candidate.into_iter().map(|s| s.assume_exact(exact)).collect(),
                });
            }
            iota = iota
                .iter()
                .zip(&residual)
                .map(|(i, r)| i.try_sub(r))
                .collect::<Result<_>>()?;
        }
        Err(Error::ConvergenceFailure(format!(
            "F(X, ι(X)) nonzero after {max_rounds} rounds; the law is not a valid group law"
        )))
    }

    /// Group inverse. The formal inverse gives a starting value that is then
    /// refined by Q ← Q − F(P, Q), which gains at least N digits per round.
    pub fn ginv(&self, p: &StandardPoint) -> Result<StandardPoint> {
        self.check_point(p)?;
        self.check_order(p)?;
        let target = p.precision;
        let mut q = if self.is_over_zp() {
            let zp = self.zp();
            self.formal_inverse()?;
            let comp = self.compiled_inverse.get_or_init(|| {
                CompiledTerms::new(self.formal_inverse().expect("solved above"), self.dim)
            });
            let xs = p.residues();
            let vals: Vec<&BigUint> = xs.iter().collect();
            let out = comp.eval(zp, &vals);
            self.point_from_residues(&out, target)?
        } else {
            let iota = self.formal_inverse()?;
            let coords = iota
                .iter()
                .map(|s| s.eval_ring(&p.coords).map(|(v, _)| v))
                .collect::<Result<Vec<_>>>()?;
            StandardPoint {
                coords,
                precision: target,
            }
        };
        let rounds = self.desc.precision() + self.desc.degree_cutoff();
        for _ in 0..=rounds {
            let r = self.gmul(p, &q)?;
            let residual_order = r.order().min(r.precision);
            if residual_order >= target || r.precision < target && residual_order >= r.precision {
                q.precision = target.min(residual_order);
                return Ok(q);
            }
            let coords = q
                .coords
                .iter()
                .zip(&r.coords)
                .map(|(a, b)| a.try_sub(b))
                .collect::<Result<Vec<_>>>()?;
            q = StandardPoint {
                coords,
                precision: target,
            };
        }
        Err(Error::ConvergenceFailure(
            "inverse refinement did not converge".into(),
        ))
    }

    /// P⁻¹Q⁻¹PQ.
    pub fn gcomm(&self, p: &StandardPoint, q: &StandardPoint) -> Result<StandardPoint> {
        let pi = self.ginv(p)?;
        let qi = self.ginv(q)?;
        let left = self.gmul(&pi, &qi)?;
        let right = self.gmul(p, q)?;
        self.gmul(&left, &right)
    }

    /// P^n by square-and-multiply; negative exponents go through the inverse.
    pub fn gpow(&self, p: &StandardPoint, n: &BigInt) -> Result<StandardPoint> {
        self.check_point(p)?;
        let base = if n.sign() == Sign::Minus {
            self.ginv(p)?
        } else {
            p.clone()
        };
        let mut e = n.abs().to_biguint().expect("nonnegative");
        let mut acc = self.identity().with_precision_cap(p.precision);
        let mut sq = base;
        while !e.is_zero() {
            if e.is_odd() {
                acc = self.gmul(&acc, &sq)?;
            }
            e >>= 1;
            if !e.is_zero() {
                sq = self.gmul(&sq, &sq)?;
            }
        }
        Ok(acc)
    }

    pub fn gpow_i64(&self, p: &StandardPoint, n: i64) -> Result<StandardPoint> {
        self.gpow(p, &BigInt::from(n))
    }

    /// Quadratic-part structure constants c[i][j][l] = coeff of X_iY_j in F_l
    /// minus coeff of X_jY_i in F_l.
    pub fn extract_bracket(&self) -> Vec<Vec<Vec<RingElement>>> {
        let d = self.dim;
        let coeff = |l: usize, i: usize, j: usize| {
            let mut e = vec![0; 2 * d];
            e[i] += 1;
            e[d + j] += 1;
            self.components[l].coefficient(&e)
        };
        (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| {
                        (0..d)
                            .map(|l| {
                                coeff(l, i, j)
                                    .try_sub(&coeff(l, j, i))
                                    .expect("same descriptor")
                            })
                            .collect()
                    })
                    .collect()
            })
            .collect()
    }

    /// Specializes t ↦ a, giving a law over Zp and the coefficient precision.
    pub fn specialize(&self, a: &[crate::zp::PadicScalar]) -> Result<(FormalGroupLaw, u32)> {
        let mut comps = Vec::with_capacity(self.dim);
        let mut prec = self.desc.precision();
        for c in &self.components {
            let (s, g) = c.specialize_t(a)?;
            prec = prec.min(g);
            comps.push(s);
        }
        let law = FormalGroupLaw::new(self.desc.over_zp(), self.dim, self.level, comps)?;
        Ok((law, prec))
    }

    // ----- validation ----------------------------------------------------

    fn var_names(&self, groups: &[&str]) -> Vec<String> {
        groups
            .iter()
            .flat_map(|g| {
                (1..=self.dim).map(move |i| {
                    if self.dim == 1 {
                        g.to_string()
                    } else {
                        format!("{g}{i}")
                    }
                })
            })
            .collect()
    }

    fn compare(
        &self,
        axiom: &str,
        lhs: &[MultiSeries],
        rhs: &[MultiSeries],
        names: &[String],
    ) -> AxiomCheck {
        for (j, (a, b)) in lhs.iter().zip(rhs).enumerate() {
            if let Some((x, t, c)) = a.first_difference(b) {
                let comp = if self.dim == 1 {
                    String::new()
                } else {
                    format!(" in component {}", j + 1)
                };
                return AxiomCheck {
                    axiom: axiom.to_string(),
                    passed: false,
                    witness: Some(monomial_name(&x, &t, names)),
                    detail: Some(format!("sides differ by {c} at this monomial{comp}")),
                };
            }
        }
        AxiomCheck {
            axiom: axiom.to_string(),
            passed: true,
            witness: None,
            detail: None,
        }
    }

    fn substitute_all(&self, images: &[MultiSeries]) -> Result<Vec<MultiSeries>> {
        self.components.iter().map(|f| f.substitute(images)).collect()
    }

    /// Checks F(X,0) = X, F(0,Y) = Y and associativity modulo (p^k, degree > D),
    /// plus the level constraint. Every failing axiom is reported.
    pub fn validate(&self) -> ValidationReport {
        let d = self.dim;
        let desc = &self.desc;
        let mut checks = Vec::new();

        let xs: Vec<MultiSeries> = (0..d).map(|i| MultiSeries::var(desc, d, i)).collect();
        let zeros = vec![MultiSeries::zero(desc, d); d];

        let left: Vec<MultiSeries> = xs.iter().chain(&zeros).cloned().collect();
        checks.push(match self.substitute_all(&left) {
            Ok(s) => self.compare("identity F(X,0) = X", &s, &xs, &self.var_names(&["X"])),
            Err(e) => error_check("identity F(X,0) = X", &e),
        });
        let right: Vec<MultiSeries> = zeros.iter().chain(&xs).cloned().collect();
        checks.push(match self.substitute_all(&right) {
            Ok(s) => self.compare("identity F(0,Y) = Y", &s, &xs, &self.var_names(&["Y"])),
            Err(e) => error_check("identity F(0,Y) = Y", &e),
        });

        checks.push(match self.associativity_sides() {
            Ok((l, r)) => self.compare(
                "associativity F(F(X,Y),Z) = F(X,F(Y,Z))",
                &l,
                &r,
                &self.var_names(&["X", "Y", "Z"]),
            ),
            Err(e) => error_check("associativity F(F(X,Y),Z) = F(X,F(Y,Z))", &e),
        });

        let min_level = if desc.prime() == 2 { 2 } else { 1 };
        checks.push(AxiomCheck {
            axiom: "level constraint".into(),
            passed: self.level >= min_level,
            witness: None,
            detail: (self.level < min_level).then(|| {
                format!(
                    "level {} below {min_level} required for p = {}",
                    self.level,
                    desc.prime()
                )
            }),
        });
        ValidationReport { checks }
    }

    /// Both sides of the associativity identity as series in 3d variables.
    pub fn associativity_sides(&self) -> Result<(Vec<MultiSeries>, Vec<MultiSeries>)> {
        let d = self.dim;
        let v = |i: usize| MultiSeries::var(&self.desc, 3 * d, i);
        let x: Vec<MultiSeries> = (0..d).map(v).collect();
        let y: Vec<MultiSeries> = (d..2 * d).map(v).collect();
        let z: Vec<MultiSeries> = (2 * d..3 * d).map(v).collect();
        let cat = |a: &[MultiSeries], b: &[MultiSeries]| -> Vec<MultiSeries> {
            a.iter().chain(b).cloned().collect()
        };
        let fxy = self.substitute_all(&cat(&x, &y))?;
        let fyz = self.substitute_all(&cat(&y, &z))?;
        let lhs = self.substitute_all(&cat(&fxy, &z))?;
        let rhs = self.substitute_all(&cat(&x, &fyz))?;
        Ok((lhs, rhs))
    }
}

fn error_check(axiom: &str, e: &Error) -> AxiomCheck {
    AxiomCheck {
        axiom: axiom.to_string(),
        passed: false,
        witness: None,
        detail: Some(e.to_string()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn zp_desc(p: u64, k: u32, d: u32) -> RingDescriptor {
        RingDescriptor::new(p, k, 0, d).unwrap()
    }

    /// Coordinates in the symmetric residue range.
    fn ints(p: &StandardPoint) -> Vec<i64> {
        p.coords()
            .iter()
            .map(|c| c.constant_term().to_i64().unwrap())
            .collect()
    }

    #[test]
    fn additive_law_is_valid() {
        let law = FormalGroupLaw::additive(&zp_desc(3, 4, 4), 2, 1).unwrap();
        assert!(law.validate().passed());
    }

    #[test]
    fn mutated_law_reports_witness() {
        let desc = zp_desc(3, 4, 4);
        let f = MultiSeries::from_terms(
            &desc,
            2,
            [
                (vec![1, 0], vec![], BigInt::from(1)),
                (vec![0, 1], vec![], BigInt::from(1)),
                (vec![2, 0], vec![], BigInt::from(1)),
            ],
        )
        .unwrap();
        let law = FormalGroupLaw::new(desc, 1, 1, vec![f]).unwrap();
        let report = law.validate();
        assert!(!report.passed());
        let left = report.check("identity F(X,0) = X").unwrap();
        assert!(!left.passed);
        assert_eq!(left.witness.as_deref(), Some("X^2"));
        assert!(report.check("identity F(0,Y) = Y").unwrap().passed);
        assert!(!report.check("associativity F(F(X,Y),Z) = F(X,F(Y,Z))").unwrap().passed);
    }

    #[test]
    fn twisted_law_associativity_expansion() {
        let desc = RingDescriptor::new(3, 6, 1, 6).unwrap();
        let law = FormalGroupLaw::twisted_multiplicative(&desc, 1).unwrap();
        assert!(law.validate().passed());
        let (lhs, rhs) = law.associativity_sides().unwrap();
        // X+Y+Z + t(XY+XZ+YZ) + t²XYZ
        let expected = MultiSeries::from_terms(
            &desc,
            3,
            [
                (vec![1, 0, 0], vec![0], 1),
                (vec![0, 1, 0], vec![0], 1),
                (vec![0, 0, 1], vec![0], 1),
                (vec![1, 1, 0], vec![1], 1),
                (vec![1, 0, 1], vec![1], 1),
                (vec![0, 1, 1], vec![1], 1),
                (vec![1, 1, 1], vec![2], 1),
            ]
            .map(|(x, t, c)| (x, t, BigInt::from(c))),
        )
        .unwrap();
        assert_eq!(lhs[0], expected);
        assert_eq!(rhs[0], expected);
    }

    #[test]
    fn level_constraint_for_p2() {
        let law = FormalGroupLaw::additive(&zp_desc(2, 8, 4), 1, 1).unwrap();
        let report = law.validate();
        assert!(!report.check("level constraint").unwrap().passed);
    }

    #[test]
    fn multiplicative_fixtures() {
        let law = FormalGroupLaw::multiplicative(&zp_desc(3, 3, 4), 1).unwrap();
        let three = law.point_from_ints(&[3]).unwrap();
        assert_eq!(ints(&law.gmul(&three, &three).unwrap()), vec![15 - 27]);
        let inv = law.ginv(&three).unwrap();
        assert_eq!(ints(&inv), vec![6]);
        assert!(law.gmul(&three, &inv).unwrap().is_identity());
        assert_eq!(ints(&law.gpow_i64(&three, 2).unwrap()), vec![15 - 27]);
        assert_eq!(ints(&law.gpow_i64(&three, 3).unwrap()), vec![9]);
        assert!(law.gpow_i64(&three, 0).unwrap().is_identity());
    }

    #[test]
    fn heisenberg_fixtures() {
        let law = FormalGroupLaw::heisenberg(&zp_desc(3, 6, 6), 1).unwrap();
        assert!(law.validate().passed());
        let a = law.point_from_ints(&[3, 0, 0]).unwrap();
        let b = law.point_from_ints(&[0, 3, 0]).unwrap();
        assert_eq!(ints(&law.gmul(&a, &b).unwrap()), vec![3, 3, 9]);
        assert_eq!(ints(&law.gcomm(&a, &b).unwrap()), vec![0, 0, 9]);
        assert!(law.gcomm(&a, &a).unwrap().is_identity());
        let x = law.point_from_ints(&[3, 6, 9]).unwrap();
        assert_eq!(ints(&law.ginv(&x).unwrap()), vec![-3, -6, -9 + 18]);
        // the formal inverse of this law is a polynomial
        assert!(law.formal_inverse().unwrap().iter().all(MultiSeries::is_exact));
    }

    #[test]
    fn brackets() {
        let desc = zp_desc(3, 6, 6);
        let add = FormalGroupLaw::additive(&desc, 2, 1).unwrap();
        assert!(add.extract_bracket().iter().flatten().flatten().all(RingElement::is_zero));
        let mult = FormalGroupLaw::multiplicative(&desc, 1).unwrap();
        assert!(mult.extract_bracket()[0][0][0].is_zero());
        let h = FormalGroupLaw::heisenberg(&desc, 1).unwrap();
        let c = h.extract_bracket();
        for i in 0..3 {
            for j in 0..3 {
                for l in 0..3 {
                    let expected = match (i, j, l) {
                        (0, 1, 2) => 1,
                        (1, 0, 2) => -1,
                        _ => 0,
                    };
                    assert_eq!(c[i][j][l], RingElement::int(&desc, expected), "c[{i}][{j}][{l}]");
                }
            }
        }
    }

    #[test]
    fn abelian_commutator_is_trivial() {
        let law = FormalGroupLaw::multiplicative(&zp_desc(5, 6, 6), 1).unwrap();
        let a = law.point_from_ints(&[5]).unwrap();
        let b = law.point_from_ints(&[35]).unwrap();
        assert!(law.gcomm(&a, &b).unwrap().is_identity());
    }

    #[test]
    fn points_must_lie_in_level() {
        let law = FormalGroupLaw::additive(&zp_desc(3, 4, 4), 1, 2).unwrap();
        assert!(matches!(law.point_from_ints(&[3]), Err(Error::NotAPoint { .. })));
        assert!(law.point_from_ints(&[9]).is_ok());
    }

    #[test]
    fn twisted_law_over_power_series_ring() {
        let desc = RingDescriptor::new(3, 5, 1, 5).unwrap();
        let law = FormalGroupLaw::twisted_multiplicative(&desc, 1).unwrap();
        let t = RingElement::t(&desc, 0).unwrap();
        let p = law.point(vec![t.clone()]).unwrap();
        let q = law.point_from_ints(&[3]).unwrap();
        let pq = law.gmul(&p, &q).unwrap();
        // t + 3 + 3t²
        let expected = RingElement::from_terms(
            &desc,
            [(vec![0], BigInt::from(3)), (vec![1], BigInt::from(1)), (vec![2], BigInt::from(3))],
        )
        .unwrap();
        assert_eq!(pq.coords()[0], expected);
        let inv = law.ginv(&p).unwrap();
        let id = law.gmul(&p, &inv).unwrap();
        assert!(id.is_identity(), "{id:?}");
    }

    fn heis_point(law: &FormalGroupLaw) -> impl Strategy<Value = StandardPoint> + '_ {
        proptest::collection::vec(-500i64..500, 3)
            .prop_map(move |v| law.point_from_ints(&[3 * v[0], 3 * v[1], 3 * v[2]]).unwrap())
    }

    proptest! {
        #[test]
        fn multiplicative_group_axioms(a in -2000i64..2000, b in -2000i64..2000, c in -2000i64..2000) {
            let law = FormalGroupLaw::multiplicative(&zp_desc(5, 8, 6), 1).unwrap();
            let (p, q, r) = (
                law.point_from_ints(&[5 * a]).unwrap(),
                law.point_from_ints(&[5 * b]).unwrap(),
                law.point_from_ints(&[5 * c]).unwrap(),
            );
            let l = law.gmul(&law.gmul(&p, &q).unwrap(), &r).unwrap();
            let rr = law.gmul(&p, &law.gmul(&q, &r).unwrap()).unwrap();
            prop_assert!(l.congruent(&rr));
            let inv = law.ginv(&p).unwrap();
            prop_assert_eq!(inv.precision(), 8);
            prop_assert!(law.gmul(&inv, &p).unwrap().is_identity());
        }
    }

    #[test]
    fn heisenberg_group_axioms() {
        let law = FormalGroupLaw::heisenberg(&zp_desc(3, 8, 6), 1).unwrap();
        let mut runner = proptest::test_runner::TestRunner::deterministic();
        runner
            .run(&(heis_point(&law), heis_point(&law), heis_point(&law)), |(p, q, r)| {
                let l = law.gmul(&law.gmul(&p, &q).unwrap(), &r).unwrap();
                let rr = law.gmul(&p, &law.gmul(&q, &r).unwrap()).unwrap();
                prop_assert_eq!(l, rr);
                prop_assert!(law.gmul(&law.ginv(&p).unwrap(), &p).unwrap().is_identity());
                Ok(())
            })
            .unwrap();
    }
}
