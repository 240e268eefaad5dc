use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::Serialize;

use crate::group::RatMatrix;

/// Coefficients, constant term first.
type Poly = Vec<BigInt>;

/// Characteristic polynomial `det(xI − A)` by Faddeev–LeVerrier, exactly.
pub fn char_poly_exact(a: &RatMatrix) -> Vec<BigRational> {
    let n = a.dim();
    let mut coeffs = vec![BigRational::zero(); n + 1];
    coeffs[n] = BigRational::one();
    let mut m = RatMatrix::zero(n);
    let id = RatMatrix::identity(n);
    for k in 1..=n {
        m = a.mul(&m).sub(&id.scale(&coeffs[n - k + 1]).scale(&-BigRational::one()));
        let am = a.mul(&m);
        let tr: BigRational = (0..n).map(|i| am.get(i, i)).fold(BigRational::zero(), |s, x| s + x);
        coeffs[n - k] = -tr / BigRational::from_integer(BigInt::from(k));
    }
    coeffs
}

fn trim(p: &mut Poly) {
    while p.len() > 1 && p.last().is_some_and(|c| c.is_zero()) {
        p.pop();
    }
}

/// Exact division by a monic polynomial; `None` if the remainder is nonzero.
fn div_monic(num: &Poly, den: &Poly) -> Option<Poly> {
    let mut r = num.clone();
    let (n, m) = (r.len(), den.len());
    if n < m {
        return None;
    }
    let mut q = vec![BigInt::zero(); n - m + 1];
    for i in (0..=n - m).rev() {
        let c = r[i + m - 1].clone();
        q[i] = c.clone();
        if !c.is_zero() {
            for (j, dj) in den.iter().enumerate() {
                r[i + j] -= &c * dj;
            }
        }
    }
    if r.iter().any(|c| !c.is_zero()) {
        return None;
    }
    trim(&mut q);
    Some(q)
}

fn cyclotomic(m: usize, cache: &mut Vec<Poly>) -> Poly {
    while cache.len() <= m {
        let k = cache.len();
        if k == 0 {
            cache.push(vec![BigInt::one()]);
            continue;
        }
        // x^k − 1 divided by Φ_d for proper divisors d.
        let mut p = vec![BigInt::zero(); k + 1];
        p[0] = -BigInt::one();
        p[k] = BigInt::one();
        for d in 1..k {
            if k % d == 0 {
                p = div_monic(&p, &cache[d]).expect("cyclotomic divisibility");
            }
        }
        cache.push(p);
    }
    cache[m].clone()
}

fn totient(mut m: usize) -> usize {
    let mut r = m;
    let mut p = 2;
    while p * p <= m {
        if m % p == 0 {
            while m % p == 0 {
                m /= p;
            }
            r -= r / p;
        }
        p += 1;
    }
    if m > 1 {
        r -= r / m;
    }
    r
}

/// Factorization of a characteristic polynomial into cyclotomic factors.
#[derive(Clone, Debug, Serialize, PartialEq)]
pub struct CyclotomicCertificate {
    /// `(m, multiplicity)` for each `Φ_m` dividing the polynomial.
    pub factors: Vec<(usize, usize)>,
}

/// For an integer matrix, `Some` iff the characteristic polynomial is a
/// product of cyclotomic polynomials, i.e. iff every eigenvalue has modulus 1
/// (Kronecker). `None` for non-integral input or any non-cyclotomic factor.
pub fn cyclotomic_certificate(a: &RatMatrix) -> Option<CyclotomicCertificate> {
    if !a.is_integral() {
        return None;
    }
    let n = a.dim();
    let mut p: Poly = char_poly_exact(a)
        .into_iter()
        .map(|c| {
            debug_assert!(c.is_integer());
            c.to_integer()
        })
        .collect();
    let mut cache = Vec::new();
    let mut factors = Vec::new();
    // φ(m) ≥ sqrt(m/2), so φ(m) ≤ n forces m ≤ 2n².
    for m in 1..=(2 * n * n).max(2) {
        if totient(m) > p.len() - 1 {
            continue;
        }
        let phi = cyclotomic(m, &mut cache);
        let mut mult = 0;
        while let Some(q) = div_monic(&p, &phi) {
            p = q;
            mult += 1;
        }
        if mult > 0 {
            factors.push((m, mult));
        }
    }
    if p.len() == 1 && p[0].abs().is_one() {
        Some(CyclotomicCertificate { factors })
    } else {
        None
    }
}
