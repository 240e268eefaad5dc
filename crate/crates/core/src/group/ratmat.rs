//! Exact rational square matrices stored as an integer matrix over one
//! positive common denominator, kept in lowest terms so that equality and
//! hashing are structural.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct RatMatrix {
    dim: usize,
    num: Vec<BigInt>,
    den: BigInt,
}

impl fmt::Debug for RatMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RatMatrix{:?}", self.to_strings())
    }
}

impl RatMatrix {
    pub fn identity(dim: usize) -> Self {
        let mut num = vec![BigInt::zero(); dim * dim];
        for i in 0..dim {
            num[i * dim + i] = BigInt::one();
        }
        RatMatrix { dim, num, den: BigInt::one() }
    }

    pub fn zero(dim: usize) -> Self {
        RatMatrix { dim, num: vec![BigInt::zero(); dim * dim], den: BigInt::one() }
    }

    /// Builds from row-major rational entries. Fails unless the rows form a square.
    pub fn from_rows(rows: &[Vec<BigRational>]) -> Result<Self> {
        let dim = rows.len();
        if dim == 0 {
            return Err(Error::Config("matrix has no rows".into()));
        }
        for r in rows {
            if r.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: r.len() });
            }
        }
        let mut den = BigInt::one();
        for r in rows {
            for q in r {
                den = den.lcm(q.denom());
            }
        }
        let mut num = Vec::with_capacity(dim * dim);
        for r in rows {
            for q in r {
                num.push(q.numer() * (&den / q.denom()));
            }
        }
        let mut m = RatMatrix { dim, num, den };
        m.normalize();
        Ok(m)
    }

    pub fn from_integers(rows: &[&[i64]]) -> Self {
        let dim = rows.len();
        let mut num = Vec::with_capacity(dim * dim);
        for r in rows {
            assert_eq!(r.len(), dim, "matrix must be square");
            num.extend(r.iter().map(|&x| BigInt::from(x)));
        }
        RatMatrix { dim, num, den: BigInt::one() }
    }

    /// Parses entries written as `"p/q"` or `"p"`.
    pub fn parse(rows: &[Vec<String>]) -> Result<Self> {
        let mut out = Vec::with_capacity(rows.len());
        for r in rows {
            let mut row = Vec::with_capacity(r.len());
            for s in r {
                let q = BigRational::from_str(s.trim())
                    .map_err(|_| Error::Config(format!("bad rational entry `{s}`")))?;
                row.push(q);
            }
            out.push(row);
        }
        Self::from_rows(&out)
    }

    /// Exact copy of a float matrix (every finite double is a dyadic rational).
    pub fn from_f64(m: &DMatrix<f64>) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        let mut rows = Vec::with_capacity(m.nrows());
        for i in 0..m.nrows() {
            let mut row = Vec::with_capacity(m.ncols());
            for j in 0..m.ncols() {
                let q = BigRational::from_float(m[(i, j)])
                    .ok_or_else(|| Error::Config("non-finite matrix entry".into()))?;
                row.push(q);
            }
            rows.push(row);
        }
        Self::from_rows(&rows)
    }

    fn normalize(&mut self) {
        if self.den.is_negative() {
            self.den = -&self.den;
            for x in &mut self.num {
                *x = -&*x;
            }
        }
        let mut g = self.den.clone();
        for x in &self.num {
            if g.is_one() {
                break;
            }
            g = g.gcd(x);
        }
        if !g.is_one() && !g.is_zero() {
            self.den = &self.den / &g;
            for x in &mut self.num {
                *x = &*x / &g;
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn denominator(&self) -> &BigInt {
        &self.den
    }

    /// Integer numerator entry; the matrix equals `numerators / denominator`.
    pub fn numerator(&self, i: usize, j: usize) -> &BigInt {
        &self.num[i * self.dim + j]
    }

    pub fn get(&self, i: usize, j: usize) -> BigRational {
        BigRational::new(self.num[i * self.dim + j].clone(), self.den.clone())
    }

    pub fn is_integral(&self) -> bool {
        self.den.is_one()
    }

    pub fn is_identity(&self) -> bool {
        *self == Self::identity(self.dim)
    }

    pub fn mul(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.dim, other.dim, "dimension mismatch in product");
        let d = self.dim;
        let mut num = vec![BigInt::zero(); d * d];
        for i in 0..d {
            for k in 0..d {
                let a = &self.num[i * d + k];
                if a.is_zero() {
                    continue;
                }
                for j in 0..d {
                    let b = &other.num[k * d + j];
                    if !b.is_zero() {
                        num[i * d + j] += a * b;
                    }
                }
            }
        }
        let mut m = RatMatrix { dim: d, num, den: &self.den * &other.den };
        m.normalize();
        m
    }

    pub fn transpose(&self) -> RatMatrix {
        let d = self.dim;
        let mut num = Vec::with_capacity(d * d);
        for i in 0..d {
            for j in 0..d {
                num.push(self.num[j * d + i].clone());
            }
        }
        RatMatrix { dim: d, num, den: self.den.clone() }
    }

    pub fn scale(&self, q: &BigRational) -> RatMatrix {
        let mut m = RatMatrix {
            dim: self.dim,
            num: self.num.iter().map(|x| x * q.numer()).collect(),
            den: &self.den * q.denom(),
        };
        m.normalize();
        m
    }

    pub fn sub(&self, other: &RatMatrix) -> RatMatrix {
        assert_eq!(self.dim, other.dim);
        let num = self
            .num
            .iter()
            .zip(&other.num)
            .map(|(a, b)| a * &other.den - b * &self.den)
            .collect();
        let mut m = RatMatrix { dim: self.dim, num, den: &self.den * &other.den };
        m.normalize();
        m
    }

    fn rows_rational(&self) -> Vec<Vec<BigRational>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j)).collect())
            .collect()
    }

    /// Exact determinant by fraction-free elimination on the numerators.
    pub fn det(&self) -> BigRational {
        let d = self.dim;
        let mut a: Vec<Vec<BigInt>> = (0..d)
            .map(|i| self.num[i * d..(i + 1) * d].to_vec())
            .collect();
        let mut sign = BigInt::one();
        let mut prev = BigInt::one();
        for k in 0..d {
            if a[k][k].is_zero() {
                match (k + 1..d).find(|&r| !a[r][k].is_zero()) {
                    Some(r) => {
                        a.swap(k, r);
                        sign = -sign;
                    }
                    None => return BigRational::zero(),
                }
            }
            for i in k + 1..d {
                for j in k + 1..d {
                    let v = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                    a[i][j] = v / &prev;
                }
            }
            prev = a[k][k].clone();
        }
        let det_num = if d == 0 { BigInt::one() } else { sign * &a[d - 1][d - 1] };
        BigRational::new(det_num, num_traits::pow(self.den.clone(), d))
    }

    /// Exact rank by Gaussian elimination.
    pub fn rank(&self) -> usize {
        let d = self.dim;
        let mut a = self.rows_rational();
        let mut rank = 0;
        for col in 0..d {
            let Some(p) = (rank..d).find(|&r| !a[r][col].is_zero()) else {
                continue;
            };
            a.swap(rank, p);
            for r in rank + 1..d {
                if a[r][col].is_zero() {
                    continue;
                }
                let f = &a[r][col] / &a[rank][col];
                for c in col..d {
                    let v = &f * &a[rank][c];
                    a[r][c] -= v;
                }
            }
            rank += 1;
        }
        rank
    }

    /// Exact inverse by Gauss-Jordan elimination.
    pub fn inverse(&self) -> Result<RatMatrix> {
        let d = self.dim;
        let mut a = self.rows_rational();
        let mut inv: Vec<Vec<BigRational>> = (0..d)
            .map(|i| {
                (0..d)
                    .map(|j| if i == j { BigRational::one() } else { BigRational::zero() })
                    .collect()
            })
            .collect();
        for c in 0..d {
            let p = (c..d).find(|&r| !a[r][c].is_zero()).ok_or(Error::Singular)?;
            a.swap(c, p);
            inv.swap(c, p);
            let piv = a[c][c].clone();
            for j in 0..d {
                a[c][j] = &a[c][j] / &piv;
                inv[c][j] = &inv[c][j] / &piv;
            }
            for r in 0..d {
                if r == c || a[r][c].is_zero() {
                    continue;
                }
                let f = a[r][c].clone();
                for j in 0..d {
                    let t = &f * &a[c][j];
                    a[r][j] = &a[r][j] - t;
                    let t = &f * &inv[c][j];
                    inv[r][j] = &inv[r][j] - t;
                }
            }
        }
        RatMatrix::from_rows(&inv)
    }

    pub fn apply(&self, v: &[BigRational]) -> Vec<BigRational> {
        let d = self.dim;
        (0..d)
            .map(|i| {
                let mut s = BigRational::zero();
                for (j, vj) in v.iter().enumerate().take(d) {
                    s += BigRational::from_integer(self.num[i * d + j].clone()) * vj;
                }
                s / BigRational::from_integer(self.den.clone())
            })
            .collect()
    }

    /// Determinant of the submatrix on the given (sorted) rows and columns.
    pub fn minor(&self, rows: &[usize], cols: &[usize]) -> BigRational {
        let k = rows.len();
        let sub: Vec<Vec<BigRational>> = rows
            .iter()
            .map(|&i| cols.iter().map(|&j| BigRational::from_integer(self.num[i * self.dim + j].clone())).collect())
            .collect();
        if k == 0 {
            return BigRational::one();
        }
        let m = RatMatrix::from_rows(&sub).expect("square minor");
        m.det() / BigRational::from_integer(num_traits::pow(self.den.clone(), k))
    }

    pub fn direct_sum(&self, other: &RatMatrix) -> RatMatrix {
        let d = self.dim + other.dim;
        let mut rows = vec![vec![BigRational::zero(); d]; d];
        for i in 0..self.dim {
            for j in 0..self.dim {
                rows[i][j] = self.get(i, j);
            }
        }
        for i in 0..other.dim {
            for j in 0..other.dim {
                rows[self.dim + i][self.dim + j] = other.get(i, j);
            }
        }
        RatMatrix::from_rows(&rows).expect("square")
    }

    /// Nearest-double conversion; entries outside the double range saturate.
    pub fn to_f64(&self) -> DMatrix<f64> {
        let (m, ln_scale) = self.to_f64_scaled();
        if ln_scale == 0.0 {
            m
        } else {
            m * ln_scale.exp()
        }
    }

    /// Returns `(M, s)` with `self = e^s * M` and the largest entry of `M`
    /// of order one when the raw entries would leave the comfortable double range.
    pub fn to_f64_scaled(&self) -> (DMatrix<f64>, f64) {
        let d = self.dim;
        let den_bits = self.den.bits() as i64;
        let top = self
            .num
            .iter()
            .filter(|x| !x.is_zero())
            .map(|x| x.bits() as i64 - den_bits)
            .max()
            .unwrap_or(0);
        if top.abs() < 900 {
            let m = DMatrix::from_fn(d, d, |i, j| self.get(i, j).to_f64().unwrap_or(f64::NAN));
            return (m, 0.0);
        }
        let shift = top;
        let m = DMatrix::from_fn(d, d, |i, j| {
            let x = &self.num[i * d + j];
            let q = if shift > 0 {
                BigRational::new(x.clone(), &self.den << (shift as usize))
            } else {
                BigRational::new(x << ((-shift) as usize), self.den.clone())
            };
            q.to_f64().unwrap_or(f64::NAN)
        });
        (m, shift as f64 * std::f64::consts::LN_2)
    }

    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.dim)
            .map(|i| (0..self.dim).map(|j| self.get(i, j).to_string()).collect())
            .collect()
    }

    /// Largest absolute entry, as a natural logarithm estimate (bit-length based).
    pub fn log_max_entry(&self) -> f64 {
        let (m, s) = self.to_f64_scaled();
        m.amax().ln() + s
    }
}
