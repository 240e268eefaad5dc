//! Boundary flags along a path and the splitting frames they induce at thick
//! anchors.
//!
//! Everything is expressed in the local coordinates of a vertex `v`, i.e.
//! after applying `ρ(g_v)⁻¹` where `g_v` is the element vertex below `v`.
//! Transport from `v` to `w` is then `ρ(g_v⁻¹ g_w)`.

use nalgebra::DMatrix;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, RatMatrix, Representation};
use crate::linalg::{grassmannian_distance, sorted_svd, CartanStack, Subspace};

/// Exact image `ρ(g_i⁻¹ g_j)`.
pub fn local_transition(group: &Group, rep: &Representation, gi: &GroupElement, gj: &GroupElement) -> RatMatrix {
    rep.image(&group.multiply(&group.inverse(gi), gj))
}

/// `S⁻¹ M S v` for an exact `M` and the representation's basis scale `S`,
/// with the product `M (S v)` carried out in exact arithmetic.
pub fn exact_transport(m: &RatMatrix, scale: &[f64], v: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let d = m.dim();
    if v.nrows() != d {
        return Err(Error::DimensionMismatch { expected: d, got: v.nrows() });
    }
    let mut out = DMatrix::zeros(d, v.ncols());
    for c in 0..v.ncols() {
        let col: Vec<BigRational> = (0..d)
            .map(|i| BigRational::from_float(v[(i, c)] * scale[i]).ok_or_else(|| Error::Config("non-finite vector entry".into())))
            .collect::<Result<_>>()?;
        for (i, x) in m.apply(&col).iter().enumerate() {
            out[(i, c)] = x.to_f64().unwrap_or(f64::NAN) / scale[i];
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Toward {
    End,
    Start,
}

/// Limits of `U_k` and `U_{d−k}` of `ρ(g_a⁻¹ g_j)` as `j` runs to one end of
/// the path, in the local coordinates of the anchor `a`.
#[derive(Clone, Debug, Serialize)]
pub struct FlagEstimate {
    pub anchor: usize,
    pub toward: Toward,
    #[serde(skip)]
    pub small: Subspace,
    #[serde(skip)]
    pub large: Subspace,
    /// Grassmannian distance between consecutive estimates (max over the two).
    pub increments: Vec<f64>,
}

impl FlagEstimate {
    pub fn last_increment(&self) -> f64 {
        self.increments.last().copied().unwrap_or(f64::INFINITY)
    }
}

/// Estimates the flag at path index `anchor`; errors with the increment
/// history when the final increment exceeds `tol`.
pub fn estimate_flag(
    group: &Group,
    rep: &Representation,
    elements: &[GroupElement],
    anchor: usize,
    toward: Toward,
    k: usize,
    tol: f64,
) -> Result<FlagEstimate> {
    let d = rep.dim;
    if k == 0 || 2 * k > d {
        return Err(Error::Config(format!("flag index k = {k} needs 1 ≤ k ≤ d/2 (d = {d})")));
    }
    let order: Vec<usize> = match toward {
        Toward::End => (anchor + 1..elements.len()).collect(),
        Toward::Start => (0..anchor).rev().collect(),
    };
    let mut acc = CartanStack::identity(d);
    let mut prev = anchor;
    let mut last: Option<(Subspace, Subspace)> = None;
    let mut increments = Vec::new();
    for j in order {
        if elements[j] == elements[prev] {
            prev = j;
            continue;
        }
        let step = local_transition(group, rep, &elements[prev], &elements[j]);
        acc.mul_assign(&CartanStack::from_exact(&step, &rep.basis_scale)?);
        prev = j;
        let (Ok(small), Ok(large)) = (acc.u_subspace(k), acc.u_subspace(d - k)) else {
            continue;
        };
        if let Some((ps, pl)) = &last {
            increments.push(grassmannian_distance(ps, &small)?.max(grassmannian_distance(pl, &large)?));
        }
        last = Some((small, large));
    }
    let Some((small, large)) = last else {
        return Err(Error::NonConvergent { increments: vec![] });
    };
    let est = FlagEstimate { anchor, toward, small, large, increments };
    if !(est.last_increment() <= tol) {
        let tail = est.increments.len().saturating_sub(6);
        return Err(Error::NonConvergent { increments: est.increments[tail..].to_vec() });
    }
    Ok(est)
}

/// `E₁ ⊂ F₊` toward the end of the path and `E₃ ⊂ F₋` toward the start,
/// the first pair in the frame of the last anchor, the second in the frame
/// of the first anchor.
#[derive(Clone, Debug)]
pub struct BoundaryFlags {
    pub e1: Subspace,
    pub f_plus: Subspace,
    pub e3: Subspace,
    pub f_minus: Subspace,
}

impl BoundaryFlags {
    pub fn from_estimates(forward: &FlagEstimate, backward: &FlagEstimate) -> Self {
        BoundaryFlags {
            e1: forward.small.clone(),
            f_plus: forward.large.clone(),
            e3: backward.small.clone(),
            f_minus: backward.large.clone(),
        }
    }

    /// Images under a change of coordinates `c`.
    pub fn transport(&self, c: &DMatrix<f64>) -> Result<Self> {
        Ok(BoundaryFlags {
            e1: self.e1.image(c)?,
            f_plus: self.f_plus.image(c)?,
            e3: self.e3.image(c)?,
            f_minus: self.f_minus.image(c)?,
        })
    }
}

/// Orthonormal bases of `E₁ ⊕ E₂ ⊕ E₃ = R^d` at one anchor.
#[derive(Clone, Debug)]
pub struct Splitting {
    /// `[B₁ | B₂ | B₃]`.
    pub basis: DMatrix<f64>,
    pub inverse: DMatrix<f64>,
    pub dims: [usize; 3],
    /// `min(σ_min[E₁|F₋], σ_min[E₃|F₊])`.
    pub transversality: f64,
    /// Largest singular value discarded when cutting `F₊ ∩ F₋` down to `E₂`.
    pub e2_residual: f64,
}

fn stack_columns(parts: &[&DMatrix<f64>]) -> DMatrix<f64> {
    let d = parts[0].nrows();
    let n = parts.iter().map(|p| p.ncols()).sum();
    let mut m = DMatrix::zeros(d, n);
    let mut off = 0;
    for p in parts {
        m.view_mut((0, off), p.shape()).copy_from(p);
        off += p.ncols();
    }
    m
}

fn smallest_singular(parts: &[&DMatrix<f64>]) -> f64 {
    let m = stack_columns(parts);
    let s = sorted_svd(&m);
    s.sigma[s.sigma.len() - 1]
}

impl Splitting {
    pub fn from_flags(e1: &Subspace, f_plus: &Subspace, e3: &Subspace, f_minus: &Subspace, floor: f64, at: usize) -> Result<Self> {
        let d = e1.ambient();
        let k = e1.dim();
        let t1 = smallest_singular(&[&e1.basis, &f_minus.basis]);
        if !(t1 >= floor) {
            return Err(Error::Transversality { value: t1, floor, what: format!("E1 vs F- at path index {at}") });
        }
        let t3 = smallest_singular(&[&e3.basis, &f_plus.basis]);
        if !(t3 >= floor) {
            return Err(Error::Transversality { value: t3, floor, what: format!("E3 vs F+ at path index {at}") });
        }
        let m = d - 2 * k;
        let (b2, e2_residual) = if m == 0 {
            (DMatrix::zeros(d, 0), 0.0)
        } else {
            let cp = f_plus.orthogonal_complement()?;
            let cm = f_minus.orthogonal_complement()?;
            let mut stacked = DMatrix::zeros(d, d);
            stacked.view_mut((0, 0), (k, d)).copy_from(&cp.basis.transpose());
            stacked.view_mut((k, 0), (k, d)).copy_from(&cm.basis.transpose());
            let s = sorted_svd(&stacked);
            let v = s.v_t.transpose();
            (v.columns(d - m, m).into_owned(), s.sigma[d - m])
        };
        let mut sp = Self::from_blocks(&e1.basis, &b2, &e3.basis)?;
        sp.transversality = t1.min(t3);
        sp.e2_residual = e2_residual;
        Ok(sp)
    }

    /// Splitting spanned by arbitrary bases of the three pieces.
    pub fn from_blocks(b1: &DMatrix<f64>, b2: &DMatrix<f64>, b3: &DMatrix<f64>) -> Result<Self> {
        let d = b1.nrows();
        let ortho = |b: &DMatrix<f64>| -> Result<DMatrix<f64>> {
            if b.ncols() == 0 {
                Ok(DMatrix::zeros(d, 0))
            } else {
                Ok(Subspace::from_basis(b)?.basis)
            }
        };
        let (b1, b2, b3) = (ortho(b1)?, ortho(b2)?, ortho(b3)?);
        let dims = [b1.ncols(), b2.ncols(), b3.ncols()];
        if dims.iter().sum::<usize>() != d {
            return Err(Error::DimensionMismatch { expected: d, got: dims.iter().sum() });
        }
        let basis = stack_columns(&[&b1, &b2, &b3]);
        let inverse = basis.clone().try_inverse().ok_or(Error::Singular)?;
        let transversality = sorted_svd(&basis).sigma[d - 1];
        Ok(Splitting { basis, inverse, dims, transversality, e2_residual: 0.0 })
    }

    pub fn dim(&self) -> usize {
        self.basis.nrows()
    }

    fn offset(&self, j: usize) -> usize {
        self.dims[..j].iter().sum()
    }

    /// Orthonormal basis of the `j`-th piece (`j = 0, 1, 2`).
    pub fn block(&self, j: usize) -> DMatrix<f64> {
        self.basis.columns(self.offset(j), self.dims[j]).into_owned()
    }

    /// Rows of `P⁻¹` giving the coordinates in the `j`-th piece.
    pub fn coordinates(&self, j: usize) -> DMatrix<f64> {
        self.inverse.rows(self.offset(j), self.dims[j]).into_owned()
    }

    /// Projection onto the `j`-th piece along the other two.
    pub fn projection(&self, j: usize) -> DMatrix<f64> {
        self.block(j) * self.coordinates(j)
    }

    /// `max(‖Σπ_j − I‖, maxⱼ ‖π_j² − π_j‖)` in the max-entry norm.
    pub fn projection_defect(&self) -> f64 {
        let d = self.dim();
        let ps: Vec<_> = (0..3).map(|j| self.projection(j)).collect();
        let sum = ps.iter().fold(DMatrix::zeros(d, d), |a, p| a + p);
        let mut worst = (sum - DMatrix::<f64>::identity(d, d)).amax();
        for p in &ps {
            worst = worst.max((p * p - p).amax());
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusp::{CuspConfig, CuspedGraph, GeodesicPath};
    use crate::group::builtin::{pingpong_group, pingpong_sym};

    fn path_elements(graph: &CuspedGraph, path: &GeodesicPath) -> Vec<GroupElement> {
        path.vertices.iter().map(|&v| graph.element(graph.label(v).element).clone()).collect()
    }

    fn rep_of(g: &Group) -> Representation {
        Representation::identity(g)
    }

    #[test]
    fn exact_transport_matches_float_product() {
        let (g, rep) = pingpong_sym(2);
        let e = g.parse_element("a b a").unwrap();
        let m = rep.image(&e);
        let v = DMatrix::from_column_slice(3, 2, &[1.0, 0.5, -0.25, 0.0, 1.0, 2.0]);
        let got = exact_transport(&m, &rep.basis_scale, &v).unwrap();
        let want = rep.float_image(&m) * &v;
        assert!((&got - &want).amax() < 1e-12 * want.amax());
    }

    fn powers(g: &Group, word: &str, ns: impl Iterator<Item = usize>) -> Vec<GroupElement> {
        let w = g.parse_element(word).unwrap().word;
        ns.map(|n| g.power(&w, n).unwrap()).collect()
    }

    #[test]
    fn powers_of_a_converge_to_its_attracting_line() {
        let g = pingpong_group();
        let rep = rep_of(&g);
        let els = powers(&g, "a", 0..25);
        let f = estimate_flag(&g, &rep, &els, 0, Toward::End, 1, 1e-12).unwrap();
        // a has eigenvalues 5 and 1/5 with eigenvectors (1,1) and (1,-1)
        let attracting = Subspace::from_basis(&DMatrix::from_column_slice(2, 1, &[1.0, 1.0])).unwrap();
        assert!(grassmannian_distance(&f.small, &attracting).unwrap() < 1e-14);
        let b = estimate_flag(&g, &rep, &els, 24, Toward::Start, 1, 1e-12).unwrap();
        let repelling = Subspace::from_basis(&DMatrix::from_column_slice(2, 1, &[1.0, -1.0])).unwrap();
        assert!(grassmannian_distance(&b.small, &repelling).unwrap() < 1e-14);
    }

    #[test]
    fn unipotent_powers_converge_to_fixed_line() {
        let g = pingpong_group();
        let rep = rep_of(&g);
        let els = powers(&g, "b", std::iter::once(0).chain((0..13).map(|i| 1 << i)));
        let f = estimate_flag(&g, &rep, &els, 0, Toward::End, 1, 1e-3).unwrap();
        let e1 = Subspace::coordinate(2, &[0]);
        assert!(grassmannian_distance(&f.small, &e1).unwrap() < 1e-3);
        assert!(matches!(
            estimate_flag(&g, &rep, &els, 0, Toward::End, 1, 1e-9),
            Err(Error::NonConvergent { increments }) if !increments.is_empty()
        ));
    }

    #[test]
    fn reversal_swaps_the_two_estimates() {
        let (g, rep) = pingpong_sym(2);
        let graph = CuspedGraph::build(&g, CuspConfig::new(10, 8)).unwrap();
        let w = g.parse_element("a b a^2 b^-1 a b^2 a").unwrap();
        let path = GeodesicPath::new(graph.shortest_path(0, graph.vertex_of(&w).unwrap()));
        let n = path.length;
        let els = path_elements(&graph, &path);
        let rev = path_elements(&graph, &path.reversed());
        let fwd = estimate_flag(&g, &rep, &els, 2, Toward::End, 1, 1.0).unwrap();
        let bwd = estimate_flag(&g, &rep, &rev, n - 2, Toward::Start, 1, 1.0).unwrap();
        assert!(grassmannian_distance(&fwd.small, &bwd.small).unwrap() < 1e-12);
        assert!(grassmannian_distance(&fwd.large, &bwd.large).unwrap() < 1e-12);
    }

    fn random_split(d: usize, k: usize) -> (Subspace, Subspace, Subspace, Subspace) {
        let m = DMatrix::from_fn(d, d, |i, j| ((i * 7 + j * 3) as f64).sin() + if i == j { 2.0 } else { 0.0 });
        let cols = |r: std::ops::Range<usize>| Subspace::from_basis(&m.columns(r.start, r.len()).into_owned()).unwrap();
        (cols(0..k), cols(0..d - k), cols(d - k..d), cols(k..d))
    }

    #[test]
    fn projections_are_idempotent_and_sum_to_identity() {
        for (d, k) in [(2, 1), (3, 1), (4, 1), (4, 2), (5, 2)] {
            let (e1, fp, e3, fm) = random_split(d, k);
            let sp = Splitting::from_flags(&e1, &fp, &e3, &fm, 1e-8, 0).unwrap();
            assert_eq!(sp.dims, [k, d - 2 * k, k]);
            assert!(sp.projection_defect() < 1e-10, "{d} {k}");
            assert!(sp.e2_residual < 1e-12);
            // each projection fixes its own piece and kills the others
            for j in 0..3 {
                let p = sp.projection(j);
                for i in 0..3 {
                    let img = &p * sp.block(i);
                    let want = if i == j { sp.block(i) } else { DMatrix::zeros(d, sp.dims[i]) };
                    assert!((img - want).amax() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn two_dimensional_splitting_has_empty_middle() {
        let (e1, fp, e3, fm) = random_split(2, 1);
        let sp = Splitting::from_flags(&e1, &fp, &e3, &fm, 1e-8, 0).unwrap();
        assert_eq!(sp.dims[1], 0);
        assert_eq!(sp.projection(1), DMatrix::zeros(2, 2));
    }

    #[test]
    fn projections_do_not_depend_on_block_bases() {
        let (e1, fp, e3, fm) = random_split(5, 2);
        let sp = Splitting::from_flags(&e1, &fp, &e3, &fm, 1e-8, 0).unwrap();
        let mix = DMatrix::from_row_slice(2, 2, &[3.0, -1.0, 0.5, 2.0]);
        let other =
            Splitting::from_blocks(&(sp.block(0) * &mix), &(sp.block(1) * -7.0), &(sp.block(2) * mix.transpose())).unwrap();
        for j in 0..3 {
            assert!((sp.projection(j) - other.projection(j)).amax() < 1e-8);
        }
    }

    #[test]
    fn transversality_floor_names_the_pair() {
        let (e1, fp, e3, _) = random_split(3, 1);
        let bad = fp.clone();
        match Splitting::from_flags(&e1, &fp, &e3, &bad, 1e-8, 7) {
            Err(Error::Transversality { what, value, .. }) => {
                assert!(what.contains("E1 vs F-") && what.contains('7'));
                assert!(value < 1e-8);
            }
            other => panic!("{other:?}"),
        }
    }
}
