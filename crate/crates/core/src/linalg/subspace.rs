use nalgebra::{DMatrix, DVector};

use super::spectral::{check_k, sorted_svd};
use super::wedge::k_subsets;
use crate::error::{Error, Result};

/// Relative-gap tolerance below which `U_k` is reported as ill-defined.
pub const U_GAP_TOL: f64 = 1e-8;

/// A `k`-dimensional subspace of `R^d` with an orthonormal basis and its unit
/// Plücker vector (lexicographic `k`-subsets), the two kept consistent.
#[derive(Clone, Debug)]
pub struct Subspace {
    pub basis: DMatrix<f64>,
    pub pluecker: DVector<f64>,
}

fn pluecker_of(basis: &DMatrix<f64>) -> DVector<f64> {
    let (d, k) = basis.shape();
    let subs = k_subsets(d, k);
    let mut p = DVector::from_iterator(
        subs.len(),
        subs.iter().map(|rows| DMatrix::from_fn(k, k, |i, j| basis[(rows[i], j)]).determinant()),
    );
    let n = p.norm();
    if n > 0.0 {
        p /= n;
    }
    p
}

impl Subspace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    pub fn ambient(&self) -> usize {
        self.basis.nrows()
    }

    /// Span of the columns, which must be linearly independent.
    pub fn from_basis(cols: &DMatrix<f64>) -> Result<Self> {
        let (d, k) = cols.shape();
        if k == 0 || k > d {
            return Err(Error::DimensionMismatch { expected: d, got: k });
        }
        let s = sorted_svd(cols);
        if s.sigma[k - 1] <= s.sigma[0] * 1e-12 {
            return Err(Error::Singular);
        }
        let basis = s.u.columns(0, k).into_owned();
        let pluecker = pluecker_of(&basis);
        Ok(Subspace { basis, pluecker })
    }

    /// Recovers the subspace from a (nearly) decomposable Plücker vector by
    /// contracting against all `(k−1)`-covectors.
    pub fn from_pluecker(p: &DVector<f64>, d: usize, k: usize) -> Result<Self> {
        let subs = k_subsets(d, k);
        if p.len() != subs.len() {
            return Err(Error::DimensionMismatch { expected: subs.len(), got: p.len() });
        }
        if k == d {
            return Ok(Subspace { basis: DMatrix::identity(d, d), pluecker: DVector::from_element(1, 1.0) });
        }
        let lower = k_subsets(d, k - 1);
        let mut cols = DMatrix::zeros(d, lower.len());
        for (c, j) in lower.iter().enumerate() {
            for i in 0..d {
                if j.contains(&i) {
                    continue;
                }
                let mut idx = j.clone();
                let pos = idx.partition_point(|&x| x < i);
                idx.insert(pos, i);
                let r = subs.binary_search(&idx).expect("subset present");
                let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
                cols[(i, c)] = sign * p[r];
            }
        }
        let s = sorted_svd(&cols);
        let basis = s.u.columns(0, k).into_owned();
        let mut out = Subspace { pluecker: pluecker_of(&basis), basis };
        if out.pluecker.dot(p) < 0.0 {
            out.pluecker = -out.pluecker;
            let mut col = out.basis.column_mut(0);
            col *= -1.0;
        }
        Ok(out)
    }

    pub fn coordinate(d: usize, indices: &[usize]) -> Self {
        let mut b = DMatrix::zeros(d, indices.len());
        for (c, &i) in indices.iter().enumerate() {
            b[(i, c)] = 1.0;
        }
        Subspace::from_basis(&b).expect("coordinate subspace")
    }

    /// Image `g V`.
    pub fn image(&self, g: &DMatrix<f64>) -> Result<Self> {
        Subspace::from_basis(&(g * &self.basis))
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> DMatrix<f64> {
        &self.basis * self.basis.transpose()
    }

    pub fn orthogonal_complement(&self) -> Result<Self> {
        let (d, k) = self.basis.shape();
        if k == d {
            return Err(Error::DimensionMismatch { expected: d - 1, got: k });
        }
        let q = DMatrix::identity(d, d) - self.projector();
        let s = sorted_svd(&q);
        Subspace::from_basis(&s.u.columns(0, d - k).into_owned())
    }

    /// Intersection of two subspaces as the null space of the stacked
    /// complement constraints; `None` when the intersection is trivial.
    pub fn intersection(&self, other: &Subspace, tol: f64) -> Result<Option<Self>> {
        let d = self.ambient();
        let mut rows = Vec::new();
        for s in [self, other] {
            if s.dim() < d {
                let c = s.orthogonal_complement()?;
                rows.push(c.basis.transpose());
            }
        }
        if rows.is_empty() {
            return Ok(Some(Subspace::from_basis(&DMatrix::identity(d, d))?));
        }
        let nr: usize = rows.iter().map(|r| r.nrows()).sum();
        let mut stacked = DMatrix::zeros(nr.max(d), d);
        let mut off = 0;
        for r in &rows {
            stacked.view_mut((off, 0), r.shape()).copy_from(r);
            off += r.nrows();
        }
        let svd = sorted_svd(&stacked);
        let null: Vec<usize> = (0..d).filter(|&i| svd.sigma[i] <= tol).collect();
        if null.is_empty() {
            return Ok(None);
        }
        let v = svd.v_t.transpose();
        let cols = DMatrix::from_fn(d, null.len(), |r, c| v[(r, null[c])]);
        Ok(Some(Subspace::from_basis(&cols)?))
    }
}

/// Angle distance `arccos |⟨p, q⟩|` of unit Plücker vectors, in `[0, π/2]`.
///
/// Evaluated as `atan2(|p − c q|, |c|)` so that coincident subspaces give 0
/// to rounding rather than `sqrt(ε)`.
pub fn grassmannian_distance(v: &Subspace, w: &Subspace) -> Result<f64> {
    if v.dim() != w.dim() || v.ambient() != w.ambient() {
        return Err(Error::DimensionMismatch { expected: v.dim(), got: w.dim() });
    }
    let c = v.pluecker.dot(&w.pluecker);
    let s = (&v.pluecker - &w.pluecker * c).norm();
    Ok(s.atan2(c.abs()))
}

/// Largest principal angle; a cross-check metric only.
pub fn principal_angle_distance(v: &Subspace, w: &Subspace) -> Result<f64> {
    if v.dim() != w.dim() || v.ambient() != w.ambient() {
        return Err(Error::DimensionMismatch { expected: v.dim(), got: w.dim() });
    }
    let resid = &w.basis - v.projector() * &w.basis;
    let sin = resid.singular_values().max().min(1.0);
    Ok(sin.asin())
}

/// Span of the `k` leading left singular vectors of `g`.
pub fn u_subspace(g: &DMatrix<f64>, k: usize) -> Result<Subspace> {
    let d = g.nrows();
    check_k(k, d)?;
    let s = sorted_svd(g);
    let ratio = s.sigma[k - 1] / s.sigma[k];
    if !(ratio >= 1.0 + U_GAP_TOL) {
        return Err(Error::IllDefinedSubspace { k, gap: ratio });
    }
    Subspace::from_basis(&s.u.columns(0, k).into_owned())
}
