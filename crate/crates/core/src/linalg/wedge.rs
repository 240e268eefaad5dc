use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Zero};

use crate::group::RatMatrix;

/// Sorted `k`-element subsets of `0..d`, in lexicographic order.
pub fn k_subsets(d: usize, k: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(k);
    fn rec(start: usize, d: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == k {
            out.push(cur.clone());
            return;
        }
        for i in start..d {
            if d - i < k - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, d, k, cur, out);
            cur.pop();
        }
    }
    rec(0, d, k, &mut cur, &mut out);
    out
}

fn minor_f64(g: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    match rows.len() {
        0 => 1.0,
        1 => g[(rows[0], cols[0])],
        2 => g[(rows[0], cols[0])] * g[(rows[1], cols[1])] - g[(rows[0], cols[1])] * g[(rows[1], cols[0])],
        k => DMatrix::from_fn(k, k, |i, j| g[(rows[i], cols[j])]).determinant(),
    }
}

/// Matrix of `∧^l g` in the basis `e_{i₁}∧…∧e_{iₗ}` (lexicographic subsets).
pub fn wedge_power(g: &DMatrix<f64>, l: usize) -> DMatrix<f64> {
    assert!(l <= g.nrows(), "wedge degree exceeds dimension");
    wedge_power_rect(g, l)
}

/// `∧^l` of a rectangular `n × m` matrix: a `C(n,l) × C(m,l)` matrix of minors.
pub fn wedge_power_rect(g: &DMatrix<f64>, l: usize) -> DMatrix<f64> {
    assert!(l <= g.nrows() && l <= g.ncols(), "wedge degree exceeds dimension");
    let rows = k_subsets(g.nrows(), l);
    let cols = k_subsets(g.ncols(), l);
    DMatrix::from_fn(rows.len(), cols.len(), |i, j| minor_f64(g, &rows[i], &cols[j]))
}

// Fraction-free (Bareiss) determinant of a small integer matrix.
fn det_bigint(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut sign = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    sign = !sign;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                a[i][j] = (&a[i][j] * &a[k][k] - &a[i][k] * &a[k][j]) / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if sign {
        -d
    } else {
        d
    }
}

/// Exact `∧^l` of a rational matrix.
pub fn wedge_power_exact(g: &RatMatrix, l: usize) -> RatMatrix {
    let d = g.dim();
    let subs = k_subsets(d, l);
    let den = num_traits::pow(g.denominator().clone(), l);
    let rows: Vec<Vec<num_rational::BigRational>> = subs
        .iter()
        .map(|r| {
            subs.iter()
                .map(|c| {
                    let sub = r
                        .iter()
                        .map(|&i| c.iter().map(|&j| g.numerator(i, j).clone()).collect())
                        .collect();
                    num_rational::BigRational::new(det_bigint(sub), den.clone())
                })
                .collect()
        })
        .collect();
    RatMatrix::from_rows(&rows).expect("square")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn subset_counts() {
        assert_eq!(k_subsets(4, 2).len(), 6);
        assert_eq!(k_subsets(6, 3).len(), 20);
        assert_eq!(k_subsets(3, 0), vec![Vec::<usize>::new()]);
        assert_eq!(k_subsets(3, 2), vec![vec![0, 1], vec![0, 2], vec![1, 2]]);
    }

    #[test]
    fn extreme_degrees() {
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        assert_eq!(wedge_power(&g, 1), g);
        let top = wedge_power(&g, 3);
        assert_eq!(top.shape(), (1, 1));
        assert!((top[(0, 0)] - g.determinant()).abs() < 1e-12);
    }

    #[test]
    fn wedge_is_multiplicative() {
        let g = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 3.0, 1.0, 0.0, 1.0, 4.0]);
        let h = DMatrix::from_row_slice(3, 3, &[1.0, -1.0, 2.0, 0.5, 1.0, 0.0, 3.0, 1.0, 1.0]);
        let lhs = wedge_power(&(&g * &h), 2);
        let rhs = wedge_power(&g, 2) * wedge_power(&h, 2);
        assert!((lhs - rhs).amax() < 1e-12);
    }

    #[test]
    fn exact_matches_float() {
        let g = RatMatrix::from_integers(&[&[2, 1, 0, 1], &[1, 3, 1, 0], &[0, 1, 4, 2], &[1, 0, 0, 1]]);
        for l in 1..=4 {
            let e = wedge_power_exact(&g, l).to_f64();
            let f = wedge_power(&g.to_f64(), l);
            assert!((e - f).amax() < 1e-10);
        }
        assert_eq!(wedge_power_exact(&g, 4).get(0, 0), g.det());
    }
}
