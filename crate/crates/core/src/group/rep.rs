use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use super::{Group, GroupElement, RatMatrix, Symbol};
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum RepKind {
    /// The group's own defining matrices.
    Identity,
    /// n-th symmetric power of a 2-dimensional defining representation.
    SymmetricPower(usize),
    /// Explicit exact images of the generators.
    Explicit,
}

/// A linear representation of a [`Group`], evaluated exactly.
///
/// Float views are taken in an orthonormal basis: the exact matrix `M`
/// (monomial basis for symmetric powers) is conjugated by `diag(basis_scale)`,
/// i.e. the float image is `S⁻¹ M S`.
#[derive(Clone, Debug)]
pub struct Representation {
    pub name: String,
    pub kind: RepKind,
    pub dim: usize,
    images: Vec<RatMatrix>,
    inverse_images: Vec<RatMatrix>,
    pub basis_scale: Vec<f64>,
}

fn binomial(n: usize, k: usize) -> f64 {
    let mut r = 1.0;
    for i in 0..k {
        r = r * (n - i) as f64 / (i + 1) as f64;
    }
    r
}

/// Exact `Sym^n` of a 2×2 matrix in the monomial basis `e₁^{n−i} e₂^i`.
pub fn sym_power_exact(m: &RatMatrix, n: usize) -> RatMatrix {
    assert_eq!(m.dim(), 2, "symmetric powers are taken of 2x2 matrices");
    let (p, q, r, s) = (m.get(0, 0), m.get(0, 1), m.get(1, 0), m.get(1, 1));
    // g e₁ = p e₁ + r e₂, g e₂ = q e₁ + s e₂; polynomials indexed by the e₂-degree.
    let mul = |a: &[BigRational], b: &[BigRational]| -> Vec<BigRational> {
        let mut out = vec![BigRational::zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            for (j, y) in b.iter().enumerate() {
                out[i + j] += x * y;
            }
        }
        out
    };
    let col1 = vec![p, r];
    let col2 = vec![q, s];
    let one = vec![BigRational::from_integer(BigInt::from(1))];
    let mut rows = vec![vec![BigRational::zero(); n + 1]; n + 1];
    for j in 0..=n {
        let mut poly = one.clone();
        for _ in 0..n - j {
            poly = mul(&poly, &col1);
        }
        for _ in 0..j {
            poly = mul(&poly, &col2);
        }
        for (i, c) in poly.into_iter().enumerate() {
            rows[i][j] = c;
        }
    }
    RatMatrix::from_rows(&rows).expect("square")
}

impl Representation {
    pub fn identity(group: &Group) -> Self {
        let images = group.matrices.clone();
        let inverse_images = images.iter().map(|m| m.inverse().expect("det 1")).collect();
        Representation {
            name: format!("{}:identity", group.name),
            kind: RepKind::Identity,
            dim: group.dim(),
            images,
            inverse_images,
            basis_scale: vec![1.0; group.dim()],
        }
    }

    pub fn symmetric_power(group: &Group, n: usize) -> Result<Self> {
        if group.dim() != 2 {
            return Err(Error::Unsupported("symmetric powers need a 2-dimensional group".into()));
        }
        if n == 0 {
            return Err(Error::Config("symmetric power must be at least 1".into()));
        }
        let images: Vec<RatMatrix> = group.matrices.iter().map(|m| sym_power_exact(m, n)).collect();
        let inverse_images = images.iter().map(|m| m.inverse().expect("det 1")).collect();
        Ok(Representation {
            name: format!("{}:sym{}", group.name, n),
            kind: RepKind::SymmetricPower(n),
            dim: n + 1,
            images,
            inverse_images,
            basis_scale: (0..=n).map(|i| binomial(n, i).sqrt()).collect(),
        })
    }

    pub fn explicit(name: impl Into<String>, group: &Group, images: Vec<RatMatrix>) -> Result<Self> {
        if images.len() != group.gens.rank() {
            return Err(Error::Config(format!(
                "{} generator images for a group of rank {}",
                images.len(),
                group.gens.rank()
            )));
        }
        let dim = images[0].dim();
        let mut inverse_images = Vec::new();
        for m in &images {
            if m.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: m.dim() });
            }
            inverse_images.push(m.inverse()?);
        }
        Ok(Representation {
            name: name.into(),
            kind: RepKind::Explicit,
            dim,
            images,
            inverse_images,
            basis_scale: vec![1.0; dim],
        })
    }

    /// Same dimension and basis scaling with new generator images.
    pub fn with_images(&self, name: impl Into<String>, group: &Group, images: Vec<RatMatrix>) -> Result<Self> {
        let mut rep = Self::explicit(name, group, images)?;
        if rep.dim != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: rep.dim });
        }
        rep.basis_scale = self.basis_scale.clone();
        Ok(rep)
    }

    pub fn generator_images(&self) -> &[RatMatrix] {
        &self.images
    }

    pub fn symbol_image(&self, s: Symbol) -> &RatMatrix {
        if s.is_inverse() {
            &self.inverse_images[s.generator()]
        } else {
            &self.images[s.generator()]
        }
    }

    pub fn image_word(&self, word: &[Symbol]) -> RatMatrix {
        let mut m = RatMatrix::identity(self.dim);
        for &s in word {
            m = m.mul(self.symbol_image(s));
        }
        m
    }

    /// Exact image of a group element in the working basis.
    pub fn image(&self, g: &GroupElement) -> RatMatrix {
        match self.kind {
            RepKind::Identity => g.matrix.clone(),
            RepKind::SymmetricPower(n) => sym_power_exact(&g.matrix, n),
            RepKind::Explicit => self.image_word(&g.word),
        }
    }

    /// `(F, s)` with the orthonormal-basis float image equal to `e^s F`.
    pub fn float_image_scaled(&self, exact: &RatMatrix) -> (DMatrix<f64>, f64) {
        let (mut m, s) = exact.to_f64_scaled();
        for i in 0..self.dim {
            for j in 0..self.dim {
                m[(i, j)] *= self.basis_scale[j] / self.basis_scale[i];
            }
        }
        (m, s)
    }

    pub fn float_image(&self, exact: &RatMatrix) -> DMatrix<f64> {
        let (m, s) = self.float_image_scaled(exact);
        if s == 0.0 {
            m
        } else {
            m * s.exp()
        }
    }

    /// Conjugates by `S` on the exterior power: the coordinate of
    /// `e_{i₁}∧…∧e_{iₗ}` is scaled by `Π s_{i}`.
    pub fn wedge_basis_scale(&self, subset: &[usize]) -> f64 {
        subset.iter().map(|&i| self.basis_scale[i]).product()
    }
}
