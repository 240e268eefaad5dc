use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::error::{Error, Result};

/// Singular values and eigenvalue moduli, both nonincreasing.
#[derive(Clone, Debug, Serialize)]
pub struct SpectralData {
    pub mu: Vec<f64>,
    pub lambda: Vec<f64>,
    pub log_mu: Vec<f64>,
    pub log_lambda: Vec<f64>,
}

/// SVD with singular values sorted nonincreasing and vectors permuted to match.
pub struct SortedSvd {
    pub u: DMatrix<f64>,
    pub sigma: DVector<f64>,
    pub v_t: DMatrix<f64>,
}

pub fn sorted_svd(g: &DMatrix<f64>) -> SortedSvd {
    let svd = g.clone().svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested V^T");
    let out = sort_svd(u, svd.singular_values, v_t);
    if svd_residual(g, &out) <= 1e-10 * (1.0 + g.norm()) {
        return out;
    }
    // nalgebra's bidiagonal route mishandles some exactly singular 2×2
    // inputs (orthogonal projectors); one-sided Jacobi is slow but reliable.
    let (u, sigma, v_t) = if g.nrows() >= g.ncols() {
        jacobi_svd(g)
    } else {
        let (u, s, v_t) = jacobi_svd(&g.transpose());
        (v_t.transpose(), s, u.transpose())
    };
    sort_svd(u, sigma, v_t)
}

fn sort_svd(u: DMatrix<f64>, sv: DVector<f64>, v_t: DMatrix<f64>) -> SortedSvd {
    let mut order: Vec<usize> = (0..sv.len()).collect();
    order.sort_by(|&a, &b| sv[b].total_cmp(&sv[a]));
    let sigma = DVector::from_iterator(order.len(), order.iter().map(|&i| sv[i]));
    let u = DMatrix::from_fn(u.nrows(), order.len(), |r, c| u[(r, order[c])]);
    let v_t = DMatrix::from_fn(order.len(), v_t.ncols(), |r, c| v_t[(order[r], c)]);
    SortedSvd { u, sigma, v_t }
}

fn svd_residual(g: &DMatrix<f64>, s: &SortedSvd) -> f64 {
    let n = s.sigma.len();
    let recon = &s.u * DMatrix::from_diagonal(&s.sigma) * &s.v_t - g;
    let uo = s.u.transpose() * &s.u - DMatrix::identity(n, n);
    let vo = &s.v_t * s.v_t.transpose() - DMatrix::identity(n, n);
    if s.sigma.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return f64::INFINITY;
    }
    recon.norm().max(uo.norm()).max(vo.norm())
}

/// One-sided Jacobi SVD of a tall matrix: thin `U` (`m×n`), `σ`, `Vᵀ` (`n×n`).
fn jacobi_svd(g: &DMatrix<f64>) -> (DMatrix<f64>, DVector<f64>, DMatrix<f64>) {
    let (m, n) = g.shape();
    let mut a = g.clone();
    let mut v = DMatrix::<f64>::identity(n, n);
    for _sweep in 0..60 {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let alpha = a.column(p).norm_squared();
                let beta = a.column(q).norm_squared();
                let gamma = a.column(p).dot(&a.column(q));
                if gamma.abs() <= f64::EPSILON * (alpha * beta).sqrt() || gamma == 0.0 {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let t = if zeta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                for mat in [&mut a, &mut v] {
                    for r in 0..mat.nrows() {
                        let (x, y) = (mat[(r, p)], mat[(r, q)]);
                        mat[(r, p)] = c * x - s * y;
                        mat[(r, q)] = s * x + c * y;
                    }
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let sigma = DVector::from_fn(n, |j, _| a.column(j).norm());
    let scale = sigma.max().max(f64::MIN_POSITIVE);
    let mut u = DMatrix::zeros(m, n);
    let mut filled = vec![false; n];
    for j in 0..n {
        if sigma[j] > scale * 1e-300 {
            u.set_column(j, &(a.column(j) / sigma[j]));
            filled[j] = true;
        }
    }
    // complete the columns of zero singular values to an orthonormal set
    let mut e = 0;
    for j in 0..n {
        if filled[j] {
            continue;
        }
        while e < m {
            let mut x = DVector::zeros(m);
            x[e] = 1.0;
            e += 1;
            for c in (0..n).filter(|&c| filled[c]) {
                let proj = u.column(c).dot(&x);
                x -= u.column(c) * proj;
            }
            let nx = x.norm();
            if nx > 1e-8 {
                u.set_column(j, &(x / nx));
                filled[j] = true;
                break;
            }
        }
    }
    (u, sigma, v.transpose())
}

pub fn spectral(g: &DMatrix<f64>) -> Result<SpectralData> {
    if g.nrows() != g.ncols() {
        return Err(Error::DimensionMismatch { expected: g.nrows(), got: g.ncols() });
    }
    if g.iter().any(|x| !x.is_finite()) {
        return Err(Error::Config("matrix has non-finite entries".into()));
    }
    let mut mu: Vec<f64> = g.clone().singular_values().iter().copied().collect();
    mu.sort_by(|a, b| b.total_cmp(a));
    if mu.last().is_none_or(|&x| x <= 0.0) {
        return Err(Error::Singular);
    }
    let mut lambda: Vec<f64> = g.clone().complex_eigenvalues().iter().map(|z| z.norm()).collect();
    lambda.sort_by(|a, b| b.total_cmp(a));
    let log_mu = mu.iter().map(|x| x.ln()).collect();
    let log_lambda = lambda.iter().map(|x| x.ln()).collect();
    Ok(SpectralData { mu, lambda, log_mu, log_lambda })
}

/// `log μ_k − log μ_{k+1}` (1-based `k`).
pub fn mu_gap(g: &DMatrix<f64>, k: usize) -> Result<f64> {
    let s = spectral(g)?;
    check_k(k, s.mu.len())?;
    Ok(s.log_mu[k - 1] - s.log_mu[k])
}

/// `log λ_k − log λ_{k+1}` (1-based `k`).
pub fn lambda_gap(g: &DMatrix<f64>, k: usize) -> Result<f64> {
    let s = spectral(g)?;
    check_k(k, s.mu.len())?;
    Ok(s.log_lambda[k - 1] - s.log_lambda[k])
}

pub(crate) fn check_k(k: usize, d: usize) -> Result<()> {
    if k == 0 || k >= d {
        return Err(Error::Config(format!("k = {k} must satisfy 1 <= k < {d}")));
    }
    Ok(())
}

/// `sqrt(Σ_j log² μ_j(g⁻¹h))`.
pub fn symmetric_space_distance(g: &DMatrix<f64>, h: &DMatrix<f64>) -> Result<f64> {
    let gi = g.clone().try_inverse().ok_or(Error::Singular)?;
    let s = spectral(&(gi * h))?;
    Ok(s.log_mu.iter().map(|x| x * x).sum::<f64>().sqrt())
}
