use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Bound on the condition numbers accepted by the pencil routines.
pub const PENCIL_CONDITION_LIMIT: f64 = 1e12;

/// A positive-definite Gram matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct InnerProduct {
    pub gram: DMatrix<f64>,
}

impl InnerProduct {
    pub fn new(gram: DMatrix<f64>) -> Result<Self> {
        if gram.nrows() != gram.ncols() {
            return Err(Error::DimensionMismatch { expected: gram.nrows(), got: gram.ncols() });
        }
        let scale = gram.amax().max(f64::MIN_POSITIVE);
        if (&gram - gram.transpose()).amax() > 1e-12 * scale {
            return Err(Error::Config("Gram matrix is not symmetric".into()));
        }
        if gram.clone().cholesky().is_none() {
            return Err(Error::Config("Gram matrix is not positive definite".into()));
        }
        Ok(InnerProduct { gram })
    }

    pub fn identity(d: usize) -> Self {
        InnerProduct { gram: DMatrix::identity(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn norm_sq(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.gram * v))
    }
}

struct Pencil {
    l: DMatrix<f64>,
    u: DMatrix<f64>,
    lambda: DVector<f64>,
}

fn condition(sym: &DMatrix<f64>) -> f64 {
    let ev = sym.clone().symmetric_eigenvalues();
    let (lo, hi) = ev.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if lo <= 0.0 {
        f64::INFINITY
    } else {
        hi / lo
    }
}

// Q₀ = L Lᵀ, L⁻¹ Q₁ L⁻ᵀ = U Λ Uᵀ.
fn pencil(q0: &InnerProduct, q1: &InnerProduct) -> Result<Pencil> {
    if q0.dim() != q1.dim() {
        return Err(Error::DimensionMismatch { expected: q0.dim(), got: q1.dim() });
    }
    let c0 = condition(&q0.gram);
    if !(c0 <= PENCIL_CONDITION_LIMIT) {
        return Err(Error::IllConditioned { cond: c0 });
    }
    let l = q0.gram.clone().cholesky().ok_or(Error::IllConditioned { cond: f64::INFINITY })?.l();
    let li = l.clone().try_inverse().ok_or(Error::Singular)?;
    let m = &li * &q1.gram * li.transpose();
    let m = (&m + m.transpose()) * 0.5;
    let eig = m.symmetric_eigen();
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    if !(lo > 0.0 && hi / lo <= PENCIL_CONDITION_LIMIT) {
        return Err(Error::IllConditioned { cond: if lo > 0.0 { hi / lo } else { f64::INFINITY } });
    }
    Ok(Pencil { l, u: eig.eigenvectors, lambda: eig.eigenvalues })
}

/// Columns orthonormal for `Q₀` and orthogonal for `Q₁`, plus the values `Q₁(v_j, v_j)`.
pub fn simultaneous_orthogonal_basis(q0: &InnerProduct, q1: &InnerProduct) -> Result<(DMatrix<f64>, DVector<f64>)> {
    let p = pencil(q0, q1)?;
    let lt_inv = p.l.transpose().try_inverse().ok_or(Error::Singular)?;
    Ok((lt_inv * &p.u, p.lambda))
}

/// The inner product with the same simultaneous orthogonal basis and diagonal
/// `Q₀(v_j,v_j)^{1−t} Q₁(v_j,v_j)^t`.
pub fn interpolate_inner_products(q0: &InnerProduct, q1: &InnerProduct, t: f64) -> Result<InnerProduct> {
    let p = pencil(q0, q1)?;
    let d = DMatrix::from_diagonal(&p.lambda.map(|x| x.powf(t)));
    let a = &p.l * &p.u;
    let g = &a * d * a.transpose();
    Ok(InnerProduct { gram: (&g + g.transpose()) * 0.5 })
}

/// Symmetric-space distance between inner products: `sqrt(Σ (½ log λ_j)²)`
/// over the eigenvalues of the pencil.
pub fn inner_product_distance(q0: &InnerProduct, q1: &InnerProduct) -> Result<f64> {
    let p = pencil(q0, q1)?;
    Ok(p.lambda.iter().map(|x| (0.5 * x.ln()).powi(2)).sum::<f64>().sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::symmetric_space_distance;

    fn diag(v: &[f64]) -> InnerProduct {
        InnerProduct::new(DMatrix::from_diagonal(&DVector::from_row_slice(v))).unwrap()
    }

    #[test]
    fn identity_pencil() {
        let (v, l) = simultaneous_orthogonal_basis(&InnerProduct::identity(3), &InnerProduct::identity(3)).unwrap();
        assert!((v.transpose() * &v - DMatrix::identity(3, 3)).amax() < 1e-14);
        assert!(l.iter().all(|&x| (x - 1.0).abs() < 1e-14));
    }

    #[test]
    fn diagonal_pencil() {
        let q1 = diag(&[4.0, 1.0]);
        let (v, l) = simultaneous_orthogonal_basis(&InnerProduct::identity(2), &q1).unwrap();
        let r = v.transpose() * &q1.gram * &v;
        assert!(r[(0, 1)].abs() < 1e-14);
        let mut l: Vec<f64> = l.iter().copied().collect();
        l.sort_by(f64::total_cmp);
        assert!((l[0] - 1.0).abs() < 1e-14 && (l[1] - 4.0).abs() < 1e-14);
        // columns are coordinate vectors up to sign and order
        for c in 0..2 {
            let col = v.column(c);
            assert!((col.amax() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn midpoint_and_endpoints() {
        let q0 = InnerProduct::identity(2);
        let q1 = diag(&[4.0, 1.0]);
        let mid = interpolate_inner_products(&q0, &q1, 0.5).unwrap();
        assert!((mid.gram - DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, 1.0]))).amax() < 1e-14);
        assert!((interpolate_inner_products(&q0, &q1, 0.0).unwrap().gram - &q0.gram).amax() < 1e-14);
        assert!((interpolate_inner_products(&q0, &q1, 1.0).unwrap().gram - &q1.gram).amax() < 1e-14);
    }

    #[test]
    fn distance_matches_matrix_formula() {
        // Q = AᵀA ↔ the matrix A⁻¹ in the symmetric-space distance.
        let a0 = DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 0.0, 1.0]);
        let a1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 3.0, 0.5]);
        let q0 = InnerProduct::new(a0.transpose() * &a0).unwrap();
        let q1 = InnerProduct::new(a1.transpose() * &a1).unwrap();
        let d = inner_product_distance(&q0, &q1).unwrap();
        let oracle = symmetric_space_distance(&a0.try_inverse().unwrap(), &a1.try_inverse().unwrap()).unwrap();
        assert!((d - oracle).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grams() {
        assert!(InnerProduct::new(DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 0.0, 1.0])).is_err());
        assert!(InnerProduct::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0])).is_err());
        let bad = diag(&[1.0, 1e-14]);
        assert!(matches!(
            interpolate_inner_products(&bad, &InnerProduct::identity(2), 0.5),
            Err(Error::IllConditioned { .. })
        ));
    }
}
