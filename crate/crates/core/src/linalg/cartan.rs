use nalgebra::{DMatrix, DVector};

use super::spectral::{check_k, sorted_svd};
use super::subspace::{Subspace, U_GAP_TOL};
use super::wedge::{k_subsets, wedge_power, wedge_power_exact, wedge_power_rect};
use crate::error::{Error, Result};
use crate::group::RatMatrix;

/// All exterior powers of a matrix, each stored as `e^{s_j} W_j` with `W_j`
/// of order one.
///
/// `log μ_j = log μ₁(∧^j g) − log μ₁(∧^{j−1} g)` then keeps full relative
/// precision for every singular value, including those far below `μ₁`,
/// and products of long words never form the raw matrix.
#[derive(Clone, Debug)]
pub struct CartanStack {
    d: usize,
    wedges: Vec<(DMatrix<f64>, f64)>,
    log_abs_det: f64,
}

fn renormalize(w: &mut DMatrix<f64>, s: &mut f64) {
    let m = w.amax();
    if m > 0.0 && m.is_finite() {
        *w /= m;
        *s += m.ln();
    }
}

impl CartanStack {
    pub fn identity(d: usize) -> Self {
        let wedges = (1..d)
            .map(|j| {
                let n = k_subsets(d, j).len();
                (DMatrix::identity(n, n), 0.0)
            })
            .collect();
        CartanStack { d, wedges, log_abs_det: 0.0 }
    }

    pub fn from_matrix(g: &DMatrix<f64>) -> Result<Self> {
        let d = g.nrows();
        if g.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, got: g.ncols() });
        }
        let det = g.determinant();
        if det == 0.0 || !det.is_finite() {
            return Err(Error::Singular);
        }
        let wedges = (1..d)
            .map(|j| {
                let mut w = wedge_power(g, j);
                let mut s = 0.0;
                renormalize(&mut w, &mut s);
                (w, s)
            })
            .collect();
        Ok(CartanStack { d, wedges, log_abs_det: det.abs().ln() })
    }

    /// Exact exterior powers converted once to floats, in the basis where the
    /// float image is `S⁻¹ M S`, `S = diag(basis_scale)`.
    pub fn from_exact(m: &RatMatrix, basis_scale: &[f64]) -> Result<Self> {
        let d = m.dim();
        let det = m.det();
        if num_traits::Zero::is_zero(&det) {
            return Err(Error::Singular);
        }
        let (det_f, det_s) = RatMatrix::from_rows(&[vec![det]]).expect("1x1").to_f64_scaled();
        let wedges = (1..d)
            .map(|j| {
                let subs = k_subsets(d, j);
                let scale: Vec<f64> = subs.iter().map(|s| s.iter().map(|&i| basis_scale[i]).product()).collect();
                let (mut w, mut s) = wedge_power_exact(m, j).to_f64_scaled();
                for r in 0..subs.len() {
                    for c in 0..subs.len() {
                        w[(r, c)] *= scale[c] / scale[r];
                    }
                }
                renormalize(&mut w, &mut s);
                (w, s)
            })
            .collect();
        Ok(CartanStack { d, wedges, log_abs_det: det_f[(0, 0)].abs().ln() + det_s })
    }

    pub fn dim(&self) -> usize {
        self.d
    }

    /// `self · other`, exterior power by exterior power.
    pub fn mul(&self, other: &CartanStack) -> CartanStack {
        assert_eq!(self.d, other.d, "dimension mismatch in product");
        let wedges = self
            .wedges
            .iter()
            .zip(&other.wedges)
            .map(|((a, sa), (b, sb))| {
                let mut w = a * b;
                let mut s = sa + sb;
                renormalize(&mut w, &mut s);
                (w, s)
            })
            .collect();
        CartanStack { d: self.d, wedges, log_abs_det: self.log_abs_det + other.log_abs_det }
    }

    pub fn mul_assign(&mut self, other: &CartanStack) {
        *self = self.mul(other);
    }

    /// `(W, s)` with `g = e^s W`.
    pub fn matrix_scaled(&self) -> (DMatrix<f64>, f64) {
        if self.d == 1 {
            return (DMatrix::from_element(1, 1, 1.0), self.log_abs_det);
        }
        self.wedges[0].clone()
    }

    /// `(W_j, s_j)` with `∧^j g = e^{s_j} W_j`, for `0 ≤ j < d`.
    pub fn wedge_scaled(&self, j: usize) -> (DMatrix<f64>, f64) {
        assert!(j < self.d, "wedge degree must be below the dimension");
        if j == 0 {
            (DMatrix::from_element(1, 1, 1.0), 0.0)
        } else {
            self.wedges[j - 1].clone()
        }
    }

    /// `log σ_min(L g S)` for a `d × d` matrix `L` and a `d × m` matrix `S`
    /// (`m < d`) spanning a subspace that `g` does not contract toward its
    /// bottom singular directions. Computed as
    /// `log ‖∧^m(L g S)‖ − log σ_max(∧^{m−1}(L g S))`, so only expanding
    /// directions of `g` are ever evaluated in floating point.
    pub fn log_min_singular_on(&self, left: &DMatrix<f64>, source: &DMatrix<f64>) -> Result<f64> {
        let m = source.ncols();
        if left.nrows() != self.d || left.ncols() != self.d || source.nrows() != self.d {
            return Err(Error::DimensionMismatch { expected: self.d, got: source.nrows() });
        }
        if m == 0 || m >= self.d {
            return Err(Error::DimensionMismatch { expected: self.d - 1, got: m });
        }
        let top = |j: usize| -> f64 {
            let (w, s) = self.wedge_scaled(j);
            let x = wedge_power(left, j) * w * wedge_power_rect(source, j);
            let v = if x.ncols() == 1 { x.norm() } else { x.singular_values().max() };
            v.ln() + s
        };
        let r = top(m) - top(m - 1);
        if r.is_finite() {
            Ok(r)
        } else {
            Err(Error::Singular)
        }
    }

    /// `log μ₁(∧^j g)` for `0 ≤ j ≤ d`.
    pub fn log_top(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else if j == self.d {
            self.log_abs_det
        } else {
            let (w, s) = &self.wedges[j - 1];
            w.clone().singular_values().max().ln() + s
        }
    }

    pub fn log_mu(&self) -> Vec<f64> {
        let tops: Vec<f64> = (0..=self.d).map(|j| self.log_top(j)).collect();
        tops.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn mu_gap(&self, k: usize) -> Result<f64> {
        check_k(k, self.d)?;
        Ok(2.0 * self.log_top(k) - self.log_top(k - 1) - self.log_top(k + 1))
    }

    /// `log μ₁/μ_d`.
    pub fn log_spread(&self) -> f64 {
        let l = self.log_mu();
        l[0] - l[self.d - 1]
    }

    /// Distance from the basepoint of the symmetric space: `sqrt(Σ log² μ_j)`.
    pub fn symmetric_norm(&self) -> f64 {
        self.log_mu().iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    fn log_rho(&self, j: usize) -> f64 {
        if j == 0 {
            0.0
        } else if j == self.d {
            self.log_abs_det
        } else {
            let (w, s) = &self.wedges[j - 1];
            let r = w.clone().complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0, f64::max);
            r.ln() + s
        }
    }

    /// Logarithms of eigenvalue moduli, nonincreasing.
    pub fn log_lambda(&self) -> Vec<f64> {
        let r: Vec<f64> = (0..=self.d).map(|j| self.log_rho(j)).collect();
        r.windows(2).map(|w| w[1] - w[0]).collect()
    }

    pub fn lambda_gap(&self, k: usize) -> Result<f64> {
        check_k(k, self.d)?;
        Ok(2.0 * self.log_rho(k) - self.log_rho(k - 1) - self.log_rho(k + 1))
    }

    /// `U_k(g)`, read off the top left singular vector of `∧^k g`.
    pub fn u_subspace(&self, k: usize) -> Result<Subspace> {
        check_k(k, self.d)?;
        let gap = self.mu_gap(k)?;
        if !(gap >= (1.0 + U_GAP_TOL).ln()) {
            return Err(Error::IllDefinedSubspace { k, gap: gap.exp() });
        }
        let (w, _) = &self.wedges[k - 1];
        let s = sorted_svd(w);
        let p: DVector<f64> = s.u.column(0).into_owned();
        Subspace::from_pluecker(&p, self.d, k)
    }

    /// `g V` computed on Plücker coordinates.
    pub fn apply(&self, v: &Subspace) -> Result<Subspace> {
        let k = v.dim();
        if k == self.d {
            return Ok(v.clone());
        }
        let (w, _) = &self.wedges[k - 1];
        let p = w * &v.pluecker;
        let n = p.norm();
        if !(n > 0.0) {
            return Err(Error::Singular);
        }
        Subspace::from_pluecker(&(p / n), self.d, k)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::spectral;
    use approx::assert_relative_eq;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::ToPrimitive;

    #[test]
    fn agrees_with_direct_spectral_data() {
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.3, -0.4, 1.5, 0.2, 0.1, 0.7, 0.9]);
        let st = CartanStack::from_matrix(&g).unwrap();
        let sp = spectral(&g).unwrap();
        for (a, b) in st.log_mu().iter().zip(&sp.log_mu) {
            assert_relative_eq!(a, b, epsilon = 1e-12);
        }
        for (a, b) in st.log_lambda().iter().zip(&sp.log_lambda) {
            assert_relative_eq!(a, b, epsilon = 1e-10);
        }
    }

    #[test]
    fn keeps_tiny_singular_values() {
        // diag(10^40, 1, 10^-40) conjugated by an integer matrix: float SVD of
        // the raw matrix loses the bottom two singular values entirely.
        let big = BigInt::from(10).pow(40);
        let r = |n: i64| BigRational::from_integer(BigInt::from(n));
        let d = RatMatrix::from_rows(&[
            vec![BigRational::from_integer(big.clone()), r(0), r(0)],
            vec![r(0), r(1), r(0)],
            vec![r(0), r(0), BigRational::new(BigInt::from(1), big)],
        ])
        .unwrap();
        let p = RatMatrix::from_integers(&[&[1, 1, 0], &[0, 1, 1], &[0, 0, 1]]);
        let m = p.mul(&d).mul(&p.inverse().unwrap());
        let st = CartanStack::from_exact(&m, &[1.0, 1.0, 1.0]).unwrap();
        let l = st.log_mu();
        let l40 = 40.0 * 10f64.ln();
        assert!((l[0] - l40).abs() < 2.0);
        assert!(l[1].abs() < 2.0);
        assert!((l[2] + l40).abs() < 2.0);
        assert_relative_eq!(l.iter().sum::<f64>(), 0.0, epsilon = 1e-9);
    }

    #[test]
    fn products_match_exact_products() {
        let a = RatMatrix::from_integers(&[&[1, 2], &[0, 1]]);
        let b = RatMatrix::from_integers(&[&[1, 0], &[2, 1]]);
        let sa = CartanStack::from_exact(&a, &[1.0, 1.0]).unwrap();
        let sb = CartanStack::from_exact(&b, &[1.0, 1.0]).unwrap();
        let mut acc = CartanStack::identity(2);
        let mut exact = RatMatrix::identity(2);
        for i in 0..200 {
            let (s, m) = if i % 3 == 0 { (&sb, &b) } else { (&sa, &a) };
            acc.mul_assign(s);
            exact = exact.mul(m);
        }
        let ex = CartanStack::from_exact(&exact, &[1.0, 1.0]).unwrap();
        assert_relative_eq!(acc.log_mu()[0], ex.log_mu()[0], epsilon = 1e-9);
        let entry = exact.numerator(0, 0).to_f64().unwrap().ln();
        assert!(acc.log_mu()[0] > entry - 1.0);
    }

    #[test]
    fn u_subspace_and_apply() {
        let g = DMatrix::from_row_slice(3, 3, &[5.0, 1.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.2]);
        let st = CartanStack::from_matrix(&g).unwrap();
        for k in 1..3 {
            let a = st.u_subspace(k).unwrap();
            let b = crate::linalg::u_subspace(&g, k).unwrap();
            assert!(crate::linalg::grassmannian_distance(&a, &b).unwrap() < 1e-12);
        }
        let v = Subspace::coordinate(3, &[1]);
        let img = st.apply(&v).unwrap();
        let direct = v.image(&g).unwrap();
        assert!(crate::linalg::grassmannian_distance(&img, &direct).unwrap() < 1e-12);
        assert!(CartanStack::identity(3).u_subspace(1).is_err());
    }

    #[test]
    fn min_singular_on_subspace_matches_direct() {
        let g = DMatrix::from_row_slice(3, 3, &[4.0, 1.0, 0.5, 0.3, 2.0, 0.0, 0.1, 0.7, 0.5]);
        let l = DMatrix::from_row_slice(3, 3, &[1.0, 0.2, 0.0, 0.0, 1.5, 0.3, 0.1, 0.0, 0.8]);
        let s = DMatrix::from_row_slice(3, 2, &[1.0, 0.0, 0.4, 1.0, -0.2, 0.3]);
        let st = CartanStack::from_matrix(&g).unwrap();
        let direct = (&l * &g * &s).singular_values().min().ln();
        assert_relative_eq!(st.log_min_singular_on(&l, &s).unwrap(), direct, epsilon = 1e-12);
        let v = s.columns(0, 1).into_owned();
        let direct = (&l * &g * &v).norm().ln();
        assert_relative_eq!(st.log_min_singular_on(&l, &v).unwrap(), direct, epsilon = 1e-12);
    }

    #[test]
    fn min_singular_on_survives_huge_products() {
        // ρ(a)^60 for a hyperbolic 2x2: the expanding line is resolved exactly
        let a = RatMatrix::from_integers(&[&[2, 1], &[1, 1]]);
        let sa = CartanStack::from_exact(&a, &[1.0, 1.0]).unwrap();
        let mut acc = CartanStack::identity(2);
        for _ in 0..60 {
            acc.mul_assign(&sa);
        }
        let phi: f64 = (1.0 + 5f64.sqrt()) / 2.0;
        let expanding = DMatrix::from_column_slice(2, 1, &[phi, 1.0]);
        let got = acc.log_min_singular_on(&DMatrix::identity(2, 2), &expanding).unwrap();
        let want = 120.0 * phi.ln() + (phi * phi + 1.0).sqrt().ln();
        assert_relative_eq!(got, want, epsilon = 1e-9);
    }
}
