use std::fmt;

use num_bigint::BigUint;
use num_traits::{One, Zero};

use super::{PadicScalar, Zp};
use crate::error::{Error, Result};

/// Dense matrix over Z/p^k, stored row-major as residues.
#[derive(Clone, PartialEq, Eq)]
pub struct PadicMatrix {
    ring: Zp,
    rows: usize,
    cols: usize,
    data: Vec<BigUint>,
}

impl fmt::Debug for PadicMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{}x{} over {:?}", self.rows, self.cols, self.ring)?;
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| self.ring.signed(self.raw(i, j)).to_string())
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl PadicMatrix {
    pub fn zeros(ring: &Zp, rows: usize, cols: usize) -> Self {
        PadicMatrix {
            ring: ring.clone(),
            rows,
            cols,
            data: vec![BigUint::zero(); rows * cols],
        }
    }

    pub fn identity(ring: &Zp, n: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        for i in 0..n {
            m.data[i * n + i] = BigUint::one();
        }
        m
    }

    /// Matrix unit E_ij (1 in row i, column j).
    pub fn unit(ring: &Zp, n: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(ring, n, n);
        m.data[i * n + j] = BigUint::one();
        m
    }

    pub fn from_fn(
        ring: &Zp,
        rows: usize,
        cols: usize,
        mut f: impl FnMut(usize, usize) -> BigUint,
    ) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(ring.reduce(&f(i, j)));
            }
        }
        PadicMatrix {
            ring: ring.clone(),
            rows,
            cols,
            data,
        }
    }

    pub fn from_i64(ring: &Zp, rows: &[Vec<i64>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self::from_fn(ring, r, c, |i, j| ring.from_i64(rows[i][j])))
    }

    pub fn from_residues(ring: &Zp, rows: usize, cols: usize, data: Vec<BigUint>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        let data = data.iter().map(|x| ring.reduce(x)).collect();
        Ok(PadicMatrix {
            ring: ring.clone(),
            rows,
            cols,
            data,
        })
    }

    pub fn ring(&self) -> &Zp {
        &self.ring
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn raw(&self, i: usize, j: usize) -> &BigUint {
        &self.data[i * self.cols + j]
    }

    pub fn residues(&self) -> &[BigUint] {
        &self.data
    }

    pub fn get(&self, i: usize, j: usize) -> PadicScalar {
        self.ring.scalar(self.raw(i, j).clone())
    }

    pub fn set(&mut self, i: usize, j: usize, value: &BigUint) {
        self.data[i * self.cols + j] = self.ring.reduce(value);
    }

    pub fn row_vec(&self, i: usize) -> Vec<BigUint> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    /// Entries as signed integers in the symmetric range.
    pub fn to_signed_rows(&self) -> Vec<Vec<num_bigint::BigInt>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| self.ring.signed(self.raw(i, j))).collect())
            .collect()
    }

    fn check_shape(&self, other: &Self, op: &str) -> Result<()> {
        self.ring.check_same(&other.ring)?;
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::DimensionMismatch(format!(
                "{op}: {}x{} vs {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_shape(other, "add")?;
        Ok(self.zip_with(other, |r, a, b| r.add(a, b)))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_shape(other, "sub")?;
        Ok(self.zip_with(other, |r, a, b| r.sub(a, b)))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&Zp, &BigUint, &BigUint) -> BigUint) -> Self {
        let data = self
            .data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| f(&self.ring, a, b))
            .collect();
        PadicMatrix {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn try_mul(&self, other: &Self) -> Result<Self> {
        self.ring.check_same(&other.ring)?;
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch(format!(
                "mul: {}x{} by {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = vec![BigUint::zero(); self.rows * other.cols];
        for i in 0..self.rows {
            for l in 0..self.cols {
                let a = self.raw(i, l);
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = other.raw(l, j);
                    if !b.is_zero() {
                        out[i * other.cols + j] += a * b;
                    }
                }
            }
        }
        for x in out.iter_mut() {
            *x = self.ring.reduce(x);
        }
        Ok(PadicMatrix {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: other.cols,
            data: out,
        })
    }

    pub fn scale(&self, c: &BigUint) -> Self {
        let data = self.data.iter().map(|x| self.ring.mul(x, c)).collect();
        PadicMatrix {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn neg(&self) -> Self {
        let data = self.data.iter().map(|x| self.ring.neg(x)).collect();
        PadicMatrix {
            ring: self.ring.clone(),
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// AB - BA.
    pub fn commutator(&self, other: &Self) -> Result<Self> {
        self.try_mul(other)?.try_sub(&other.try_mul(self)?)
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(&self.ring, self.cols, self.rows, |i, j| self.raw(j, i).clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let x = self.raw(i, j);
                    if i == j {
                        x.is_one()
                    } else {
                        x.is_zero()
                    }
                })
            })
    }

    /// Minimum valuation over all entries (k for the zero matrix).
    pub fn min_valuation(&self) -> u32 {
        self.data
            .iter()
            .map(|x| self.ring.valuation(x))
            .min()
            .unwrap_or(self.ring.precision())
    }

    /// Reinterprets the residues at another precision: truncation when
    /// lowering, canonical lift when raising.
    pub fn with_precision(&self, precision: u32) -> Self {
        let ring = self.ring.with_precision(precision);
        let data = self.data.iter().map(|x| ring.reduce(x)).collect();
        PadicMatrix {
            ring,
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    /// Inverse over Z/p^k by Gauss-Jordan elimination with unit pivots.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::DimensionMismatch("inverse of non-square matrix".into()));
        }
        let n = self.rows;
        let r = &self.ring;
        let mut a = self.clone();
        let mut inv = Self::identity(r, n);
        for col in 0..n {
            let pivot = (col..n)
                .find(|&i| r.valuation(a.raw(i, col)) == 0)
                .ok_or(Error::NotInvertible)?;
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let u = r.inv(a.raw(col, col))?;
            a.scale_row(col, &u);
            inv.scale_row(col, &u);
            for i in 0..n {
                if i == col || a.raw(i, col).is_zero() {
                    continue;
                }
                let f = a.raw(i, col).clone();
                a.sub_row_multiple(i, col, &f);
                inv.sub_row_multiple(i, col, &f);
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i != j {
            for c in 0..self.cols {
                self.data.swap(i * self.cols + c, j * self.cols + c);
            }
        }
    }

    fn scale_row(&mut self, i: usize, u: &BigUint) {
        for c in 0..self.cols {
            let idx = i * self.cols + c;
            self.data[idx] = self.ring.mul(&self.data[idx], u);
        }
    }

    /// row_i -= f * row_j
    fn sub_row_multiple(&mut self, i: usize, j: usize, f: &BigUint) {
        for c in 0..self.cols {
            let t = self.ring.mul(f, &self.data[j * self.cols + c]);
            let idx = i * self.cols + c;
            self.data[idx] = self.ring.sub(&self.data[idx], &t);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverse_of_unitriangular() {
        let r = Zp::new(3, 4).unwrap();
        let m = PadicMatrix::from_i64(&r, &[vec![1, 3, 9], vec![0, 1, 6], vec![0, 0, 1]]).unwrap();
        let inv = m.inverse().unwrap();
        assert!(m.try_mul(&inv).unwrap().is_identity());
        assert!(inv.try_mul(&m).unwrap().is_identity());
    }

    #[test]
    fn singular_mod_p_is_not_invertible() {
        let r = Zp::new(3, 4).unwrap();
        let m = PadicMatrix::from_i64(&r, &[vec![3, 1], vec![0, 3]]).unwrap();
        assert_eq!(m.inverse().unwrap_err(), Error::NotInvertible);
    }

    #[test]
    fn commutator_of_matrix_units() {
        let r = Zp::new(5, 3).unwrap();
        let e12 = PadicMatrix::unit(&r, 3, 0, 1);
        let e23 = PadicMatrix::unit(&r, 3, 1, 2);
        assert_eq!(e12.commutator(&e23).unwrap(), PadicMatrix::unit(&r, 3, 0, 2));
    }

    #[test]
    fn shape_errors() {
        let r = Zp::new(5, 3).unwrap();
        let a = PadicMatrix::zeros(&r, 2, 3);
        assert!(matches!(a.try_mul(&a), Err(Error::DimensionMismatch(_))));
        let b = PadicMatrix::zeros(&Zp::new(5, 4).unwrap(), 2, 3);
        assert!(matches!(a.try_add(&b), Err(Error::ModulusMismatch(_))));
    }
}
