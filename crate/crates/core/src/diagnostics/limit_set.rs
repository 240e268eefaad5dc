//! Attracting/repelling subspaces over a sphere of the group, and the
//! pairwise transversality of the sampled flags.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Ball, DisplayWord, Group, GroupElement, Representation, Symbol};
use crate::linalg::{sorted_svd, CartanStack, Subspace};

/// Angle distance below which two sampled flags count as the same point.
pub const FLAG_TOLERANCE: f64 = 1e-3;

#[derive(Clone, Debug)]
pub struct LimitSample {
    /// Position in the input list.
    pub index: usize,
    pub word: String,
    /// `U_k(ρ(γ))`.
    pub attracting: Subspace,
    /// `U_{d−k}(ρ(γ)⁻¹)`.
    pub repelling: Subspace,
    /// `U_k(ρ(γ)⁻¹)`, the `k`-plane of the backward endpoint.
    pub backward: Subspace,
    /// `log μ_k/μ_{k+1}(ρ(γ))`.
    pub gap: f64,
    /// `log μ_{d−k}/μ_{d−k+1}(ρ(γ)⁻¹)`.
    pub inverse_gap: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TransversalityReport {
    /// Smallest singular value of the stacked orthonormal bases `[V | W]`.
    pub minimum: f64,
    /// Sample indices `(i, j)`: `V` is the attracting plane of `i`, `W` the repelling plane of `j`.
    pub pair: (usize, usize),
    pub words: (String, String),
    pub pairs_checked: u64,
    pub exempt: u64,
    pub flag_tolerance: f64,
}

#[derive(Clone, Debug)]
pub struct LimitSetSample {
    pub k: usize,
    pub samples: Vec<LimitSample>,
    /// Elements whose gap at `k` or `d−k` was below the `U_k` tolerance.
    pub dropped: usize,
    pub transversality: Option<TransversalityReport>,
    pub diagnostic: Option<String>,
}

fn sample_of(group: &Group, rep: &Representation, index: usize, g: &GroupElement, k: usize) -> Result<LimitSample> {
    let fwd = CartanStack::from_exact(&rep.image(g), &rep.basis_scale)?;
    let inv = CartanStack::from_exact(&rep.image(&group.inverse(g)), &rep.basis_scale)?;
    sample_from_stacks(DisplayWord(&group.gens, &g.word).to_string(), index, &fwd, &inv, k)
}

fn sample_from_stacks(word: String, index: usize, fwd: &CartanStack, inv: &CartanStack, k: usize) -> Result<LimitSample> {
    let d = fwd.dim();
    Ok(LimitSample {
        index,
        word,
        attracting: fwd.u_subspace(k)?,
        repelling: inv.u_subspace(d - k)?,
        backward: inv.u_subspace(k)?,
        gap: fwd.mu_gap(k)?,
        inverse_gap: inv.mu_gap(d - k)?,
    })
}

/// Samples of the limit set from the given elements (typically a sphere of
/// the word metric), with the exhaustive transversality report.
pub fn limit_set_sample(group: &Group, rep: &Representation, elements: &[GroupElement], k: usize) -> Result<LimitSetSample> {
    if k == 0 || k >= rep.dim {
        return Err(Error::Config(format!("k = {k} must lie in 1..{}", rep.dim)));
    }
    let raw: Vec<Result<LimitSample>> = elements.par_iter().enumerate().map(|(i, g)| sample_of(group, rep, i, g, k)).collect();
    finish(raw, k, elements.len())
}

/// Same as [`limit_set_sample`] on the sphere of radius `l` of `ball`, with
/// each element's singular data accumulated in log domain along the ball's
/// parent pointers instead of from its exact image.
pub fn limit_set_sample_sphere(
    group: &Group,
    rep: &Representation,
    ball: &Ball,
    l: usize,
    k: usize,
) -> Result<LimitSetSample> {
    if k == 0 || k >= rep.dim {
        return Err(Error::Config(format!("k = {k} must lie in 1..{}", rep.dim)));
    }
    let gens: Vec<(Symbol, CartanStack, CartanStack)> = group
        .gens
        .symbols()
        .into_iter()
        .map(|s| {
            let f = CartanStack::from_exact(rep.symbol_image(s), &rep.basis_scale)?;
            let i = CartanStack::from_exact(rep.symbol_image(s.inverse()), &rep.basis_scale)?;
            Ok((s, f, i))
        })
        .collect::<Result<_>>()?;
    let gen = |s: Symbol| gens.iter().find(|g| g.0 == s).expect("symbol of the group");
    let end = ball.sphere_range(l.min(ball.radius)).end;
    let mut fwd: Vec<CartanStack> = Vec::with_capacity(end);
    let mut inv: Vec<CartanStack> = Vec::with_capacity(end);
    for i in 0..end {
        match ball.parent[i] {
            None => {
                fwd.push(CartanStack::identity(rep.dim));
                inv.push(CartanStack::identity(rep.dim));
            }
            Some((p, s)) => {
                let (_, f, gi) = gen(s);
                fwd.push(fwd[p].mul(f));
                inv.push(gi.mul(&inv[p]));
            }
        }
    }
    let range = ball.sphere_range(l);
    let start = range.start;
    let raw: Vec<Result<LimitSample>> = range
        .into_par_iter()
        .map(|i| {
            let word = DisplayWord(&group.gens, &ball.elements[i].word).to_string();
            sample_from_stacks(word, i - start, &fwd[i], &inv[i], k)
        })
        .collect();
    let n = raw.len();
    finish(raw, k, n)
}

fn finish(raw: Vec<Result<LimitSample>>, k: usize, total: usize) -> Result<LimitSetSample> {
    let raw: Vec<Option<LimitSample>> = raw
        .into_iter()
        .map(|r| match r {
            Ok(s) => Ok(Some(s)),
            Err(Error::IllDefinedSubspace { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let dropped = raw.iter().filter(|s| s.is_none()).count();
    let samples: Vec<LimitSample> = raw.into_iter().flatten().collect();
    let diagnostic = if samples.is_empty() {
        Some(format!("all {total} elements have gap at k = {k} below the subspace tolerance"))
    } else {
        None
    };
    let transversality = transversality_report(&samples, FLAG_TOLERANCE);
    Ok(LimitSetSample { k, samples, dropped, transversality, diagnostic })
}

/// Smallest singular value of `[V | W]` for complementary dimensions.
pub fn transversality(v: &Subspace, w: &Subspace) -> Result<f64> {
    let d = v.ambient();
    if w.ambient() != d || v.dim() + w.dim() != d {
        return Err(Error::DimensionMismatch { expected: d, got: v.dim() + w.dim() });
    }
    let mut m = DMatrix::zeros(d, d);
    m.view_mut((0, 0), (d, v.dim())).copy_from(&v.basis);
    m.view_mut((0, v.dim()), (d, w.dim())).copy_from(&w.basis);
    Ok(sorted_svd(&m).sigma[d - 1])
}

/// Smallest singular value of a `k×k` matrix stored row-major.
fn smallest_singular(m: &[f64], k: usize) -> f64 {
    match k {
        1 => m[0].abs(),
        2 => {
            let det = m[0] * m[3] - m[1] * m[2];
            let f: f64 = m.iter().map(|x| x * x).sum();
            let disc = (f * f - 4.0 * det * det).max(0.0).sqrt();
            if f + disc == 0.0 {
                0.0
            } else {
                (2.0 * det * det / (f + disc)).sqrt()
            }
        }
        _ => DMatrix::from_row_slice(k, k, m).singular_values().min(),
    }
}

/// Flat per-sample data for the pair loop.
///
/// With `r = min(k, d−k)`, `σ_min[V_i | W_j]` is a monotone function of
/// `s = σ_min(B_jᵀ A_i)` (`r×r`), where `A_i = V_i, B_j = W_j^⊥` when
/// `k ≤ d−k` and `A_i = V_i^⊥, B_j = W_j` otherwise.
struct PairData {
    d: usize,
    r: usize,
    p: usize,
    /// `d×r` column-major per sample.
    a: Vec<f64>,
    b: Vec<f64>,
    /// Plücker vectors of attracting and backward planes.
    pa: Vec<f64>,
    pb: Vec<f64>,
}

/// `sqrt(1 − sqrt(1 − s²))` without cancellation.
fn stacked_value(s: f64) -> f64 {
    let s = s.min(1.0);
    s / (1.0 + (1.0 - s * s).sqrt()).sqrt()
}

impl PairData {
    fn new(samples: &[LimitSample]) -> Result<Self> {
        let d = samples[0].attracting.ambient();
        let k = samples[0].attracting.dim();
        let p = samples[0].attracting.pluecker.len();
        let r = k.min(d - k);
        let mut out = PairData { d, r, p, a: vec![], b: vec![], pa: vec![], pb: vec![] };
        for s in samples {
            if k <= d - k {
                out.a.extend(s.attracting.basis.iter());
                out.b.extend(s.repelling.orthogonal_complement()?.basis.iter());
            } else {
                out.a.extend(s.attracting.orthogonal_complement()?.basis.iter());
                out.b.extend(s.repelling.basis.iter());
            }
            out.pa.extend(s.attracting.pluecker.iter());
            out.pb.extend(s.backward.pluecker.iter());
        }
        Ok(out)
    }

    /// `σ_min(B_jᵀ A_i)`.
    fn reduced(&self, i: usize, j: usize, scratch: &mut [f64]) -> f64 {
        let (d, r) = (self.d, self.r);
        let a = &self.a[i * d * r..(i + 1) * d * r];
        let b = &self.b[j * d * r..(j + 1) * d * r];
        for x in 0..r {
            for y in 0..r {
                let bx = &b[x * d..(x + 1) * d];
                let ay = &a[y * d..(y + 1) * d];
                scratch[x * r + y] = bx.iter().zip(ay).map(|(u, v)| u * v).sum();
            }
        }
        smallest_singular(&scratch[..r * r], r)
    }

    #[cfg(test)]
    fn value(&self, i: usize, j: usize, scratch: &mut [f64]) -> f64 {
        stacked_value(self.reduced(i, j, scratch))
    }

    fn coincide(&self, i: usize, j: usize, cos_tol: f64) -> bool {
        let p = self.p;
        let a = &self.pa[i * p..(i + 1) * p];
        let b = &self.pb[j * p..(j + 1) * p];
        a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>().abs() >= cos_tol
    }

    /// `(min s, argmin j, exempt count)` over the row `i`.
    fn row(&self, i: usize, cos_tol: f64) -> (f64, usize, u64) {
        if self.r == 1 {
            match self.d {
                2 => return self.row_line::<2>(i, cos_tol),
                3 => return self.row_line::<3>(i, cos_tol),
                4 => return self.row_line::<4>(i, cos_tol),
                5 => return self.row_line::<5>(i, cos_tol),
                6 => return self.row_line::<6>(i, cos_tol),
                _ => {}
            }
        }
        let mut scratch = vec![0.0; self.r * self.r];
        let (mut best, mut bj, mut exempt) = (f64::INFINITY, usize::MAX, 0u64);
        for j in 0..self.pb.len() / self.p {
            if self.coincide(i, j, cos_tol) {
                exempt += 1;
                continue;
            }
            let s = self.reduced(i, j, &mut scratch);
            if s < best {
                best = s;
                bj = j;
            }
        }
        (best, bj, exempt)
    }

    /// Row kernel for `r = 1`, where the Plücker vectors are the basis
    /// vectors themselves up to sign.
    fn row_line<const D: usize>(&self, i: usize, cos_tol: f64) -> (f64, usize, u64) {
        let a: [f64; D] = self.a[i * D..(i + 1) * D].try_into().expect("length D");
        let pa: [f64; D] = self.pa[i * D..(i + 1) * D].try_into().expect("length D");
        let (mut best, mut bj, mut exempt) = (f64::INFINITY, usize::MAX, 0u64);
        for (j, (b, pb)) in self.b.chunks_exact(D).zip(self.pb.chunks_exact(D)).enumerate() {
            let mut c = 0.0;
            let mut s = 0.0;
            for t in 0..D {
                c += pa[t] * pb[t];
                s += a[t] * b[t];
            }
            if c.abs() >= cos_tol {
                exempt += 1;
                continue;
            }
            let s = s.abs();
            if s < best {
                best = s;
                bj = j;
            }
        }
        (best, bj, exempt)
    }
}

/// Minimum over ordered pairs `(i, j)` whose forward point of `i` and
/// backward point of `j` are distinct (angle ≥ `flag_tol` between
/// `U_k(γ_i)` and `U_k(γ_j⁻¹)`) of `σ_min[U_k(γ_i) | U_{d−k}(γ_j⁻¹)]`.
pub fn transversality_report(samples: &[LimitSample], flag_tol: f64) -> Option<TransversalityReport> {
    if samples.is_empty() {
        return None;
    }
    let data = PairData::new(samples).ok()?;
    let m = samples.len();
    let cos_tol = flag_tol.cos();
    let per_row: Vec<(f64, usize, usize, u64)> = (0..m)
        .into_par_iter()
        .map(|i| {
            let (s, j, e) = data.row(i, cos_tol);
            (s, i, j, e)
        })
        .collect();
    let exempt = per_row.iter().map(|r| r.3).sum();
    let (s, i, j, _) = per_row
        .into_iter()
        .filter(|r| r.2 != usize::MAX)
        .min_by(|a, b| a.0.total_cmp(&b.0).then((a.1, a.2).cmp(&(b.1, b.2))))?;
    Some(TransversalityReport {
        minimum: stacked_value(s),
        pair: (i, j),
        words: (samples[i].word.clone(), samples[j].word.clone()),
        pairs_checked: (m as u64) * (m as u64),
        exempt,
        flag_tolerance: flag_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::builtin::{intro_family, pingpong_sym};
    use crate::group::{enumerate_ball, RatMatrix};
    use crate::linalg::grassmannian_distance;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};

    fn random_subspace(rng: &mut impl Rng, d: usize, k: usize) -> Subspace {
        let m = DMatrix::from_fn(d, k, |_, _| rng.random_range(-1.0..1.0));
        Subspace::from_basis(&m).unwrap()
    }

    #[test]
    fn fast_kernel_matches_svd() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for (d, k) in [(2, 1), (3, 1), (3, 2), (4, 2), (5, 2), (6, 3), (4, 1)] {
            for _ in 0..20 {
                let v = random_subspace(&mut rng, d, k);
                let w = random_subspace(&mut rng, d, d - k);
                let s = LimitSample {
                    index: 0,
                    word: String::new(),
                    attracting: v.clone(),
                    repelling: w.clone(),
                    backward: v.clone(),
                    gap: 1.0,
                    inverse_gap: 1.0,
                };
                let data = PairData::new(&[s]).unwrap();
                let mut scratch = vec![0.0; k * k];
                let fast = data.value(0, 0, &mut scratch);
                if data.r == 1 && d <= 6 {
                    let (s, _, _) = data.row(0, 2.0);
                    assert!((stacked_value(s) - fast).abs() < 1e-14);
                }
                let slow = transversality(&v, &w).unwrap();
                assert!((fast - slow).abs() < 1e-10, "d={d} k={k}: {fast} vs {slow}");
            }
        }
    }

    #[test]
    fn powers_of_loxodromic_converge() {
        let (g, rep) = pingpong_sym(2);
        let elems: Vec<GroupElement> = (1..=12).map(|n| g.power(&g.parse_element("a b").unwrap().word, n).unwrap()).collect();
        let ls = limit_set_sample(&g, &rep, &elems, 1).unwrap();
        assert_eq!(ls.samples.len(), 12);
        let steps: Vec<f64> = ls
            .samples
            .windows(2)
            .map(|w| grassmannian_distance(&w[0].attracting, &w[1].attracting).unwrap())
            .collect();
        assert!(steps.last().unwrap() < &1e-8, "{steps:?}");
        assert!(steps.windows(2).all(|w| w[1] <= w[0] + 1e-12));
    }

    #[test]
    fn unipotent_attracting_line_is_e1() {
        let g = Group::new("u", vec!["b".into()], vec![RatMatrix::from_integers(&[&[1, 1], &[0, 1]])], vec![], true, false).unwrap();
        let rep = Representation::identity(&g);
        let elems: Vec<GroupElement> = [10usize, 100, 1000].iter().map(|&n| g.power(&[crate::group::Symbol::new(0, false)], n).unwrap()).collect();
        let ls = limit_set_sample(&g, &rep, &elems, 1).unwrap();
        let e1 = Subspace::coordinate(2, &[0]);
        let dist: Vec<f64> = ls.samples.iter().map(|s| grassmannian_distance(&s.attracting, &e1).unwrap()).collect();
        assert!(dist[2] < 2e-3 && dist[0] > dist[1] && dist[1] > dist[2], "{dist:?}");
    }

    #[test]
    fn small_shell_is_transverse() {
        let (g, rep) = pingpong_sym(2);
        let ball = enumerate_ball(&g, 4, None).unwrap();
        let ls = limit_set_sample(&g, &rep, ball.sphere(4), 1).unwrap();
        assert_eq!(ls.dropped, 0);
        let t = ls.transversality.unwrap();
        assert!(t.minimum > 0.0, "{t:?}");
        assert!(t.exempt >= ls.samples.len() as u64, "each element's inverse is exempt");
        let (i, j) = t.pair;
        let direct = transversality(&ls.samples[i].attracting, &ls.samples[j].repelling).unwrap();
        assert!((direct - t.minimum).abs() < 1e-10);
        // brute-force recheck of the minimum
        let mut brute = f64::INFINITY;
        for a in &ls.samples {
            for b in &ls.samples {
                if grassmannian_distance(&a.attracting, &b.backward).unwrap() < FLAG_TOLERANCE {
                    continue;
                }
                brute = brute.min(transversality(&a.attracting, &b.repelling).unwrap());
            }
        }
        assert!((brute - t.minimum).abs() < 1e-10);
    }

    #[test]
    fn sphere_route_matches_exact_route() {
        let (g, rep) = pingpong_sym(3);
        let ball = enumerate_ball(&g, 5, None).unwrap();
        for k in [1, 2] {
            let exact = limit_set_sample(&g, &rep, ball.sphere(5), k).unwrap();
            let fast = limit_set_sample_sphere(&g, &rep, &ball, 5, k).unwrap();
            assert_eq!(exact.samples.len(), fast.samples.len());
            for (a, b) in exact.samples.iter().zip(&fast.samples) {
                assert_eq!(a.word, b.word);
                assert!(grassmannian_distance(&a.attracting, &b.attracting).unwrap() < 1e-9);
                assert!(grassmannian_distance(&a.repelling, &b.repelling).unwrap() < 1e-9);
                assert!((a.gap - b.gap).abs() < 1e-9);
            }
            let (te, tf) = (exact.transversality.unwrap(), fast.transversality.unwrap());
            assert!((te.minimum - tf.minimum).abs() <= 1e-6 * te.minimum, "{te:?} {tf:?}");
        }
    }

    #[test]
    fn gapless_elements_give_diagnostic() {
        let (g, rep) = intro_family(0);
        let e = g.identity();
        let ls = limit_set_sample(&g, &rep, &[e], 1).unwrap();
        assert!(ls.samples.is_empty() && ls.diagnostic.is_some() && ls.transversality.is_none());
        assert_eq!(ls.dropped, 1);
    }
}
