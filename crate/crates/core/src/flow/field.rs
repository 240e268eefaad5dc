//! The norm field along one path and the contraction ratio κ.
//!
//! Every time `τ` of the flow domain carries an inner product stored in the
//! splitting basis of one thick anchor: `Q(Y) = Σ_j c_jᵀ G_j c_j` where
//! `c = P⁻¹Y` is cut into the three pieces. Anchors use the base inner product
//! restricted to each piece; inside an excursion of duration `T` entered at `e`
//! and left at `x` the blocks are
//!
//! - `e^{α(j−2)τ} A_j^{(e)}` for `τ ≤ T/3` (ascent, frame `e`),
//! - `e^{α(2−j)(T−τ)} A_j^{(x)}` for `τ ≥ 2T/3` (descent, frame `x`),
//! - the blockwise geodesic interpolation in between, in frame `e`, from the
//!   ascent at `T/3` to the descent at `2T/3` transported back to `e`.

use nalgebra::DMatrix;
use serde::Serialize;

use super::flags::{estimate_flag, exact_transport, local_transition, BoundaryFlags, FlagEstimate, Splitting, Toward};
use super::segment::{segment_path, Phase, Segmentation};
use crate::cusp::{CuspedGraph, GeodesicPath};
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, Representation};
use crate::linalg::{interpolate_inner_products, CartanStack, InnerProduct};

/// Relative Gram jump accepted at the junctions `T/3` and `2T/3`.
pub const JUNCTION_TOL: f64 = 1e-9;

#[derive(Clone, Debug, Serialize)]
pub struct FlowConfig {
    pub k: usize,
    /// Exponent of the thin-part scaling.
    pub alpha: f64,
    /// Path vertices kept between each end and the flow domain, for the
    /// boundary flag estimates.
    pub margin: usize,
    pub flag_tol: f64,
    pub transversality_floor: f64,
}

impl FlowConfig {
    pub fn new(k: usize, alpha: f64) -> Self {
        FlowConfig { k, alpha, margin: 24, flag_tol: 1e-8, transversality_floor: 1e-8 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Piece {
    Anchor,
    Ascent,
    Middle,
    Descent,
}

/// Inner product at one time, as blocks over the splitting of `frame`.
#[derive(Clone, Debug)]
pub struct LocalNorm {
    /// Index into the anchor list.
    pub frame: usize,
    pub piece: Piece,
    pub blocks: [DMatrix<f64>; 3],
}

impl LocalNorm {
    /// Full Gram matrix `P⁻ᵀ diag(G_j) P⁻¹` in local coordinates of the frame.
    pub fn gram(&self, sp: &Splitting) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(sp.dim(), sp.dim());
        for j in 0..3 {
            let c = sp.coordinates(j);
            g += c.transpose() * &self.blocks[j] * c;
        }
        (&g + g.transpose()) * 0.5
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Junction {
    /// Domain times of the excursion's entry and exit.
    pub entry: usize,
    pub exit: usize,
    /// Relative Gram jumps at `T/3` and `2T/3`.
    pub at_third: f64,
    pub at_two_thirds: f64,
}

/// Per-time factors used by κ: `L = diag(R_j) P⁻¹` with `G_j = R_jᵀR_j`,
/// `S₁ = B₁R₁⁻¹` and `S_F = [B₂R₂⁻¹ | B₃R₃⁻¹]`.
#[derive(Clone, Debug)]
struct Factors {
    left: DMatrix<f64>,
    source_e1: DMatrix<f64>,
    source_f: DMatrix<f64>,
}

/// Serializable record of one path: labels, Gram matrices as decimal
/// strings and the table `kappa[s][t] = κ(s, t)`.
#[derive(Clone, Debug, Serialize)]
pub struct PathTrace {
    pub domain: (usize, usize),
    pub phases: Vec<Phase>,
    pub depths: Vec<u32>,
    pub pieces: Vec<Piece>,
    /// Path index of the anchor whose frame stores the inner product.
    pub frames: Vec<usize>,
    pub grams: Vec<Vec<Vec<String>>>,
    pub kappa: Vec<Vec<f64>>,
}

/// A path prepared for flow evaluation.
#[derive(Debug)]
pub struct FlowPath {
    pub config: FlowConfig,
    pub length: usize,
    pub segmentation: Segmentation,
    /// Path indices `[lo, hi]` of the flow domain; domain time `τ` is path
    /// index `lo + τ`.
    pub domain: (usize, usize),
    /// Path indices of the thick anchors in the domain.
    pub anchors: Vec<usize>,
    pub splittings: Vec<Splitting>,
    pub forward: Option<FlagEstimate>,
    pub backward: Option<FlagEstimate>,
    pub norms: Vec<LocalNorm>,
    pub junctions: Vec<Junction>,
    factors: Vec<Factors>,
    elements: Vec<GroupElement>,
    /// `forward[i][n]` transports anchor `i + n` to anchor `i`:
    /// `ρ(g_{a_i}⁻¹ g_{a_{i+n}})`; `backward[i][n]` the inverse.
    fwd: Vec<Vec<CartanStack>>,
    bwd: Vec<Vec<CartanStack>>,
}

/// Flow domain: first thick index ≥ margin to last thick index ≤ len − margin.
pub fn flow_domain(seg: &Segmentation, margin: usize) -> Result<(usize, usize)> {
    let len = seg.phases.len() - 1;
    let thick = seg.thick_indices();
    let lo = thick.iter().copied().find(|&i| i >= margin);
    let hi = thick.iter().copied().rev().find(|&i| i + margin <= len);
    match (lo, hi) {
        (Some(lo), Some(hi)) if lo < hi => Ok((lo, hi)),
        _ => Err(Error::Config(format!("path of length {len} leaves no thick flow domain inside margin {margin}"))),
    }
}

fn path_elements(graph: &CuspedGraph, path: &GeodesicPath) -> Vec<GroupElement> {
    path.vertices.iter().map(|&v| graph.element(graph.label(v).element).clone()).collect()
}

fn scaled_identity_blocks(base: &[DMatrix<f64>; 3], weights: [f64; 3]) -> [DMatrix<f64>; 3] {
    [&base[0] * weights[0], &base[1] * weights[1], &base[2] * weights[2]]
}

fn rel_jump(a: &[DMatrix<f64>; 3], b: &[DMatrix<f64>; 3]) -> f64 {
    (0..3)
        .filter(|&j| a[j].nrows() > 0)
        .map(|j| (&a[j] - &b[j]).norm() / b[j].norm())
        .fold(0.0, f64::max)
}

impl FlowPath {
    /// Estimates the boundary flags from the path itself and builds the field
    /// from the Euclidean base inner product.
    pub fn prepare(group: &Group, rep: &Representation, graph: &CuspedGraph, path: &GeodesicPath, config: &FlowConfig) -> Result<Self> {
        let seg = segment_path(graph, path);
        let (lo, hi) = flow_domain(&seg, config.margin)?;
        let elements = path_elements(graph, path);
        let fwd = estimate_flag(group, rep, &elements, hi, Toward::End, config.k, config.flag_tol)?;
        let bwd = estimate_flag(group, rep, &elements, lo, Toward::Start, config.k, config.flag_tol)?;
        let flags = BoundaryFlags::from_estimates(&fwd, &bwd);
        let base = DMatrix::identity(rep.dim, rep.dim);
        let mut fp = Self::with_flags(group, rep, graph, path, config, &flags, &base)?;
        fp.forward = Some(fwd);
        fp.backward = Some(bwd);
        Ok(fp)
    }

    /// Builds the field from given boundary flags (`E₁, F₊` at the last
    /// anchor, `E₃, F₋` at the first) and a base inner product `base` used
    /// at every anchor.
    pub fn with_flags(
        group: &Group,
        rep: &Representation,
        graph: &CuspedGraph,
        path: &GeodesicPath,
        config: &FlowConfig,
        flags: &BoundaryFlags,
        base: &DMatrix<f64>,
    ) -> Result<Self> {
        let d = rep.dim;
        let seg = segment_path(graph, path);
        let (lo, hi) = flow_domain(&seg, config.margin)?;
        let elements = path_elements(graph, path);
        let anchors: Vec<usize> = (lo..=hi).filter(|&i| seg.is_thick(i)).collect();
        let na = anchors.len();
        let exact_steps: Vec<_> = anchors
            .windows(2)
            .map(|w| local_transition(group, rep, &elements[w[0]], &elements[w[1]]))
            .collect();
        let steps: Vec<CartanStack> =
            exact_steps.iter().map(|m| CartanStack::from_exact(m, &rep.basis_scale)).collect::<Result<_>>()?;
        let back_steps: Vec<CartanStack> = exact_steps
            .iter()
            .map(|m| CartanStack::from_exact(&m.inverse()?, &rep.basis_scale))
            .collect::<Result<_>>()?;

        // Flags at every anchor, propagated from the ends along expanding maps.
        let mut e1 = vec![flags.e1.clone(); na];
        let mut fp = vec![flags.f_plus.clone(); na];
        for i in (0..na - 1).rev() {
            e1[i] = steps[i].apply(&e1[i + 1])?;
            fp[i] = steps[i].apply(&fp[i + 1])?;
        }
        let mut e3 = vec![flags.e3.clone(); na];
        let mut fm = vec![flags.f_minus.clone(); na];
        for i in 1..na {
            e3[i] = back_steps[i - 1].apply(&e3[i - 1])?;
            fm[i] = back_steps[i - 1].apply(&fm[i - 1])?;
        }
        let splittings: Vec<Splitting> = (0..na)
            .map(|i| Splitting::from_flags(&e1[i], &fp[i], &e3[i], &fm[i], config.transversality_floor, anchors[i]))
            .collect::<Result<_>>()?;
        let anchor_blocks: Vec<[DMatrix<f64>; 3]> = splittings
            .iter()
            .map(|sp| {
                let b = |j| {
                    let bj = sp.block(j);
                    let g = bj.transpose() * base * &bj;
                    (&g + g.transpose()) * 0.5
                };
                [b(0), b(1), b(2)]
            })
            .collect();

        let alpha = config.alpha;
        let frame_of = |i: usize| anchors.binary_search(&i).ok();
        let mut norms: Vec<Option<LocalNorm>> = vec![None; hi - lo + 1];
        for (f, &a) in anchors.iter().enumerate() {
            norms[a - lo] = Some(LocalNorm { frame: f, piece: Piece::Anchor, blocks: anchor_blocks[f].clone() });
        }
        let mut junctions = Vec::new();
        for ex in &seg.excursions {
            let (Some(entry), Some(exit)) = (ex.entry, ex.exit) else { continue };
            if entry < lo || exit > hi {
                continue;
            }
            let (fe, fx) = (frame_of(entry).expect("entry is thick"), frame_of(exit).expect("exit is thick"));
            let t_len = (exit - entry) as f64;
            let ascent = |tau: f64| scaled_identity_blocks(&anchor_blocks[fe], [(-alpha * tau).exp(), 1.0, (alpha * tau).exp()]);
            let descent = |tau: f64| {
                let r = t_len - tau;
                scaled_identity_blocks(&anchor_blocks[fx], [(alpha * r).exp(), 1.0, (-alpha * r).exp()])
            };
            // C = P_x⁻¹ ρ(g_x⁻¹ g_e) P_e, blockwise, with the group action exact.
            let m_xe = local_transition(group, rep, &elements[exit], &elements[entry]);
            let c: Vec<DMatrix<f64>> = (0..3)
                .map(|j| -> Result<DMatrix<f64>> {
                    let img = exact_transport(&m_xe, &rep.basis_scale, &splittings[fe].block(j))?;
                    Ok(splittings[fx].coordinates(j) * img)
                })
                .collect::<Result<_>>()?;
            let q0 = ascent(t_len / 3.0);
            let d1 = descent(2.0 * t_len / 3.0);
            let q1: [DMatrix<f64>; 3] = std::array::from_fn(|j| {
                let g = c[j].transpose() * &d1[j] * &c[j];
                (&g + g.transpose()) * 0.5
            });
            let middle = |u: f64| -> Result<[DMatrix<f64>; 3]> {
                let mut out: [DMatrix<f64>; 3] = std::array::from_fn(|j| DMatrix::zeros(q0[j].nrows(), q0[j].ncols()));
                for j in 0..3 {
                    if q0[j].nrows() > 0 {
                        let a = InnerProduct::new(q0[j].clone())?;
                        let b = InnerProduct::new(q1[j].clone())?;
                        out[j] = interpolate_inner_products(&a, &b, u)?.gram;
                    }
                }
                Ok(out)
            };
            junctions.push(Junction {
                entry: entry - lo,
                exit: exit - lo,
                at_third: rel_jump(&middle(0.0)?, &q0),
                at_two_thirds: rel_jump(&middle(1.0)?, &q1),
            });
            for i in entry + 1..exit {
                let tau = (i - entry) as f64;
                norms[i - lo] = Some(if 3.0 * tau <= t_len {
                    LocalNorm { frame: fe, piece: Piece::Ascent, blocks: ascent(tau) }
                } else if 3.0 * tau >= 2.0 * t_len {
                    LocalNorm { frame: fx, piece: Piece::Descent, blocks: descent(tau) }
                } else {
                    LocalNorm { frame: fe, piece: Piece::Middle, blocks: middle(3.0 * tau / t_len - 1.0)? }
                });
            }
        }
        let norms: Vec<LocalNorm> = norms
            .into_iter()
            .enumerate()
            .map(|(t, n)| n.ok_or_else(|| Error::MissingFrame(format!("no inner product at path index {}", lo + t))))
            .collect::<Result<_>>()?;

        let factors = norms.iter().map(|n| factors_of(n, &splittings[n.frame])).collect::<Result<_>>()?;

        let mut fwd = Vec::with_capacity(na);
        let mut bwd = Vec::with_capacity(na);
        for i in 0..na {
            let mut f = vec![CartanStack::identity(d)];
            let mut b = vec![CartanStack::identity(d)];
            for n in i..na - 1 {
                f.push(f[f.len() - 1].mul(&steps[n]));
                b.push(back_steps[n].mul(&b[b.len() - 1]));
            }
            fwd.push(f);
            bwd.push(b);
        }

        Ok(FlowPath {
            config: config.clone(),
            length: path.length,
            segmentation: seg,
            domain: (lo, hi),
            anchors,
            splittings,
            forward: None,
            backward: None,
            norms,
            junctions,
            factors,
            elements,
            fwd,
            bwd,
        })
    }

    /// Number of domain times minus one.
    pub fn horizon(&self) -> usize {
        self.domain.1 - self.domain.0
    }

    pub fn norm_at(&self, tau: usize) -> &LocalNorm {
        &self.norms[tau]
    }

    /// Gram matrix at domain time `τ` in the local coordinates of its frame.
    pub fn gram_at(&self, tau: usize) -> DMatrix<f64> {
        let n = &self.norms[tau];
        n.gram(&self.splittings[n.frame])
    }

    /// `κ(s, t)`: the norm of the flow on `E₁` over `[s, s+t]` divided by its
    /// conorm on `E₂ ⊕ E₃`.
    pub fn kappa(&self, s: usize, t: usize) -> Result<f64> {
        Ok(self.log_kappa(s, t)?.exp())
    }

    pub fn log_kappa(&self, s: usize, t: usize) -> Result<f64> {
        if s + t > self.horizon() {
            return Err(Error::Config(format!("time {} beyond the flow horizon {}", s + t, self.horizon())));
        }
        if t == 0 {
            return Ok(0.0);
        }
        let (fa, fb) = (self.norms[s].frame, self.norms[s + t].frame);
        let (xa, xb) = (&self.factors[s], &self.factors[s + t]);
        // fa ≤ fb since frames advance with time
        let m_ab = &self.fwd[fa][fb - fa];
        let m_ba = &self.bwd[fa][fb - fa];
        let expand_e1 = m_ab.log_min_singular_on(&xa.left, &xb.source_e1)?;
        let expand_f = m_ba.log_min_singular_on(&xb.left, &xa.source_f)?;
        Ok(-expand_e1 - expand_f)
    }

    /// Gram matrix at domain time `τ` in the local coordinates of the path
    /// vertex at that time.
    pub fn gram_at_vertex(&self, group: &Group, rep: &Representation, tau: usize) -> DMatrix<f64> {
        let frame_vertex = self.anchors[self.norms[tau].frame];
        let m = local_transition(group, rep, &self.elements[frame_vertex], &self.elements[self.domain.0 + tau]);
        let m = rep.float_image(&m);
        m.transpose() * self.gram_at(tau) * m
    }

    /// Trace over the whole domain, with κ tabulated for `t ≤ t_max`.
    pub fn trace(&self, t_max: usize) -> Result<PathTrace> {
        let (lo, hi) = self.domain;
        let h = self.horizon();
        let kappa = (0..=h)
            .map(|s| (0..=t_max.min(h - s)).map(|t| self.kappa(s, t)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()?;
        let grams = (0..=h)
            .map(|tau| {
                let g = self.gram_at(tau);
                (0..g.nrows()).map(|i| (0..g.ncols()).map(|j| g[(i, j)].to_string()).collect()).collect()
            })
            .collect();
        Ok(PathTrace {
            domain: self.domain,
            phases: self.segmentation.phases[lo..=hi].to_vec(),
            depths: self.segmentation.depths[lo..=hi].to_vec(),
            pieces: self.norms.iter().map(|n| n.piece).collect(),
            frames: self.norms.iter().map(|n| self.anchors[n.frame]).collect(),
            grams,
            kappa,
        })
    }

    pub fn max_junction_jump(&self) -> f64 {
        self.junctions.iter().map(|j| j.at_third.max(j.at_two_thirds)).fold(0.0, f64::max)
    }

    pub fn max_projection_defect(&self) -> f64 {
        self.splittings.iter().map(|s| s.projection_defect()).fold(0.0, f64::max)
    }
}

fn factors_of(n: &LocalNorm, sp: &Splitting) -> Result<Factors> {
    let d = sp.dim();
    let mut rs = Vec::with_capacity(3);
    for j in 0..3 {
        if n.blocks[j].nrows() == 0 {
            rs.push(DMatrix::zeros(0, 0));
            continue;
        }
        let chol = n.blocks[j]
            .clone()
            .cholesky()
            .ok_or_else(|| Error::Config(format!("norm block {j} is not positive definite")))?;
        rs.push(chol.l().transpose());
    }
    let mut diag = DMatrix::zeros(d, d);
    let mut off = 0;
    for r in &rs {
        diag.view_mut((off, off), r.shape()).copy_from(r);
        off += r.nrows();
    }
    let left = diag * &sp.inverse;
    let src = |j: usize| -> Result<DMatrix<f64>> {
        if rs[j].nrows() == 0 {
            return Ok(DMatrix::zeros(d, 0));
        }
        let inv = rs[j].clone().try_inverse().ok_or(Error::Singular)?;
        Ok(sp.block(j) * inv)
    };
    let source_e1 = src(0)?;
    let (s2, s3) = (src(1)?, src(2)?);
    let mut source_f = DMatrix::zeros(d, s2.ncols() + s3.ncols());
    source_f.view_mut((0, 0), s2.shape()).copy_from(&s2);
    source_f.view_mut((0, s2.ncols()), s3.shape()).copy_from(&s3);
    Ok(Factors { left, source_e1, source_f })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::tube::{tube_path, TubeConfig, TubePath};
    use crate::group::builtin::{pingpong_group, pingpong_sym};
    use crate::group::RatMatrix;

    fn tube(g: &Group, seed: u64) -> TubePath {
        tube_path(g, &TubeConfig { min_length: 110, max_log2_syllable: 8, seed }).unwrap()
    }

    fn sym2() -> (Group, Representation, TubePath, FlowPath) {
        let (g, rep) = pingpong_sym(2);
        let t = tube(&g, 11);
        let fp = FlowPath::prepare(&g, &rep, &t.graph, &t.path, &FlowConfig::new(1, 1.0)).unwrap();
        (g, rep, t, fp)
    }

    /// Excursions fully inside the domain, as domain times `(entry, exit)`.
    fn inner_excursions(fp: &FlowPath) -> Vec<(usize, usize)> {
        let (lo, hi) = fp.domain;
        fp.segmentation
            .excursions
            .iter()
            .filter_map(|e| Some((e.entry?, e.exit?)))
            .filter(|&(a, b)| a >= lo && b <= hi)
            .map(|(a, b)| (a - lo, b - lo))
            .collect()
    }

    #[test]
    fn trace_tabulates_kappa_and_grams() {
        let (_, _, _, fp) = sym2();
        let tr = fp.trace(5).unwrap();
        assert_eq!(tr.grams.len(), fp.horizon() + 1);
        assert_eq!(tr.kappa[0].len(), 6);
        assert_eq!(tr.kappa[fp.horizon()].len(), 1);
        assert_eq!(tr.kappa[3][2], fp.kappa(3, 2).unwrap());
        let g = fp.gram_at(4);
        assert_eq!(tr.grams[4][1][2].parse::<f64>().unwrap(), g[(1, 2)]);
    }

    #[test]
    fn kappa_at_time_zero_is_one() {
        let (_, _, _, fp) = sym2();
        for s in 0..=fp.horizon() {
            assert_eq!(fp.kappa(s, 0).unwrap(), 1.0);
        }
        assert!(fp.kappa(0, fp.horizon() + 1).is_err());
    }

    #[test]
    fn splittings_and_junctions_are_consistent() {
        let (_, _, _, fp) = sym2();
        assert!(fp.max_projection_defect() < 1e-10);
        assert!(!fp.junctions.is_empty());
        assert!(fp.max_junction_jump() <= JUNCTION_TOL, "{:?}", fp.junctions);
        assert!(fp.splittings.iter().all(|s| s.e2_residual < 1e-8 && s.dims == [1, 1, 1]));
    }

    #[test]
    fn excursion_pieces_follow_the_recipe() {
        let (_, _, _, fp) = sym2();
        let alpha = fp.config.alpha;
        for (e, x) in inner_excursions(&fp) {
            let t_len = (x - e) as f64;
            let anchor = fp.norm_at(e);
            assert_eq!(anchor.piece, Piece::Anchor);
            for tau in 1..x - e {
                let n = fp.norm_at(e + tau);
                let tf = tau as f64;
                let want = if 3.0 * tf <= t_len {
                    Piece::Ascent
                } else if 3.0 * tf >= 2.0 * t_len {
                    Piece::Descent
                } else {
                    Piece::Middle
                };
                assert_eq!(n.piece, want);
                if want == Piece::Ascent {
                    assert_eq!(n.frame, anchor.frame);
                    let r = &n.blocks[0] * (alpha * tf).exp() - &anchor.blocks[0];
                    assert!(r.amax() < 1e-12 * anchor.blocks[0].amax());
                    assert_eq!(n.blocks[1], anchor.blocks[1]);
                }
            }
        }
        // frames never move backwards in time
        assert!(fp.norms.windows(2).all(|w| w[0].frame <= w[1].frame));
    }

    #[test]
    fn ascent_contracts_at_half_rate_with_a_neutral_piece() {
        let (_, _, _, fp) = sym2();
        let alpha = fp.config.alpha;
        let mut checked = 0;
        for (e, x) in inner_excursions(&fp) {
            for t in 1..=(x - e) / 3 {
                let got = fp.log_kappa(e, t).unwrap();
                assert!((got + alpha * t as f64 / 2.0).abs() < 1e-9, "{got} at {t}");
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn ascent_contracts_at_full_rate_in_dimension_two() {
        let g = pingpong_group();
        let rep = Representation::identity(&g);
        let t = tube(&g, 5);
        let fp = FlowPath::prepare(&g, &rep, &t.graph, &t.path, &FlowConfig::new(1, 0.7)).unwrap();
        assert!(fp.splittings.iter().all(|s| s.dims == [1, 0, 1]));
        let mut checked = 0;
        for (e, x) in inner_excursions(&fp) {
            for t in 1..=(x - e) / 3 {
                let got = fp.log_kappa(e, t).unwrap();
                assert!((got + 0.7 * t as f64).abs() < 1e-9, "{got} at {t}");
                checked += 1;
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn kappa_is_submultiplicative() {
        let (_, _, _, fp) = sym2();
        let h = fp.horizon().min(30);
        for t in 1..h {
            let first = fp.log_kappa(0, t).unwrap();
            for u in 1..=h - t {
                let whole = fp.log_kappa(0, t + u).unwrap();
                let rest = fp.log_kappa(t, u).unwrap();
                assert!(whole <= first + rest + 1e-8, "t={t} u={u}: {whole} > {first} + {rest}");
            }
        }
    }

    #[test]
    fn kappa_is_invariant_under_conjugation() {
        let (g, rep, t, fp) = sym2();
        let q = |n: i64, d: i64| num_rational::BigRational::new(n.into(), d.into());
        let c = RatMatrix::from_rows(&[
            vec![q(1, 1), q(1, 3), q(0, 1)],
            vec![q(0, 1), q(1, 1), q(1, 2)],
            vec![q(1, 5), q(0, 1), q(1, 1)],
        ])
        .unwrap();
        let ci = c.inverse().unwrap();
        let images = rep.generator_images().iter().map(|m| c.mul(m).mul(&ci)).collect();
        let conj = rep.with_images("conjugated", &g, images).unwrap();
        let cf = conj.float_image(&c);
        let cfi = cf.clone().try_inverse().unwrap();
        let flags = BoundaryFlags::from_estimates(fp.forward.as_ref().unwrap(), fp.backward.as_ref().unwrap()).transport(&cf).unwrap();
        let base = cfi.transpose() * &cfi;
        let other = FlowPath::with_flags(&g, &conj, &t.graph, &t.path, &fp.config, &flags, &base).unwrap();
        for s in (0..fp.horizon()).step_by(7) {
            for t in 1..(fp.horizon() - s).min(25) {
                let (a, b) = (fp.kappa(s, t).unwrap(), other.kappa(s, t).unwrap());
                assert!((a - b).abs() <= 1e-8 * a.max(b), "κ({s},{t}): {a} vs {b}");
            }
        }
    }

    #[test]
    fn reversed_path_carries_the_same_norms() {
        let (g, rep, t, fp) = sym2();
        let rev = FlowPath::prepare(&g, &rep, &t.graph, &t.path.reversed(), &fp.config).unwrap();
        assert_eq!(rev.horizon(), fp.horizon());
        let h = fp.horizon();
        for tau in 0..=h {
            let a = fp.gram_at_vertex(&g, &rep, tau);
            let b = rev.gram_at_vertex(&g, &rep, h - tau);
            assert!((&a - &b).norm() <= 1e-8 * a.norm(), "τ = {tau}");
        }
    }
}
