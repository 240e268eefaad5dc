//! Gap growth along escaping sequences and the attraction of generic planes.

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;

use super::envelope::{fit_envelope, Direction, SlopeConstraint};
use super::limit_set::transversality;
use crate::error::{Error, Result};
use crate::group::{RatMatrix, Representation};
use crate::linalg::{grassmannian_distance, CartanStack, Subspace};

/// `m^n` by repeated squaring, exactly.
pub fn exact_power(m: &RatMatrix, n: u64) -> RatMatrix {
    let mut result = RatMatrix::identity(m.dim());
    let mut base = m.clone();
    let mut e = n;
    while e > 0 {
        if e & 1 == 1 {
            result = result.mul(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.mul(&base);
        }
    }
    result
}

/// `n = ⌊2^{j/per_octave}⌋` for `2^{j/per_octave} ≤ n_max`, deduplicated.
pub fn log_spaced(n_max: u64, per_octave: u32) -> Vec<u64> {
    let mut out = Vec::new();
    let mut j = 0u32;
    loop {
        let n = 2f64.powf(j as f64 / per_octave as f64).floor() as u64;
        if n > n_max {
            break;
        }
        if out.last() != Some(&n) {
            out.push(n);
        }
        j += 1;
    }
    out
}

/// Stacks of `ρ(g)^n` for each `n`, from exact powers.
pub fn power_stacks(rep: &Representation, image: &RatMatrix, ns: &[u64]) -> Result<Vec<CartanStack>> {
    ns.iter().map(|&n| CartanStack::from_exact(&exact_power(image, n), &rep.basis_scale)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DivergenceVerdict {
    Unbounded,
    Bounded,
    Inconclusive,
}

/// Far-range lower-envelope slope of the gap against `ln n` at or above
/// which the gap is reported unbounded.
pub const GROWTH_THRESHOLD: f64 = 0.25;
/// Largest rise of the running maximum over the far half of the range for
/// which the gap is reported bounded.
pub const BOUNDED_RISE: f64 = 0.05;

#[derive(Clone, Debug, Serialize)]
pub struct DivergenceReport {
    pub k: usize,
    pub n: Vec<u64>,
    pub gaps: Vec<f64>,
    pub verdict: DivergenceVerdict,
    /// Tested range of the escape parameter.
    pub range: [u64; 2],
    /// Lower-envelope slope of `gap` against `ln n` over the far half.
    pub growth: f64,
    /// Rise of the running maximum over the far half.
    pub far_rise: f64,
    /// Largest gap seen.
    pub cap: f64,
    pub growth_threshold: f64,
    pub bounded_rise: f64,
}

/// Verdict on `log μ_k/μ_{k+1}` along a sequence indexed by `n ≥ 1`.
/// The verdict only describes the tested range.
pub fn divergence_monitor(n: &[u64], stacks: &[CartanStack], k: usize) -> Result<DivergenceReport> {
    if n.len() != stacks.len() {
        return Err(Error::DimensionMismatch { expected: n.len(), got: stacks.len() });
    }
    if n.len() < 3 || n.contains(&0) {
        return Err(Error::DegenerateProfile("need at least three indices, all ≥ 1".into()));
    }
    let gaps: Vec<f64> = stacks.iter().map(|s| s.mu_gap(k)).collect::<Result<_>>()?;
    let x: Vec<f64> = n.iter().map(|&v| (v as f64).ln()).collect();
    let (lo, hi) = (x.iter().cloned().fold(f64::INFINITY, f64::min), x.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let mid = 0.5 * (lo + hi);
    let cap = gaps.iter().cloned().fold(0.0, f64::max);
    let near_max = x.iter().zip(&gaps).filter(|p| *p.0 < mid).map(|p| *p.1).fold(f64::NEG_INFINITY, f64::max);
    let far_rise = (cap - near_max).max(0.0);
    let (fx, fy): (Vec<f64>, Vec<f64>) = x.iter().zip(&gaps).filter(|p| *p.0 >= mid).map(|(&a, &b)| (a, b)).unzip();
    let growth = match fit_envelope(&fx, &fy, Direction::Lower, SlopeConstraint::NonNegative) {
        Ok(f) => f.alpha,
        Err(Error::DegenerateProfile(_)) => 0.0,
        Err(e) => return Err(e),
    };
    let verdict = if growth >= GROWTH_THRESHOLD {
        DivergenceVerdict::Unbounded
    } else if far_rise <= BOUNDED_RISE {
        DivergenceVerdict::Bounded
    } else {
        DivergenceVerdict::Inconclusive
    };
    Ok(DivergenceReport {
        k,
        range: [n.iter().copied().min().unwrap_or(0), n.iter().copied().max().unwrap_or(0)],
        n: n.to_vec(),
        gaps,
        verdict,
        growth,
        far_rise,
        cap,
        growth_threshold: GROWTH_THRESHOLD,
        bounded_rise: BOUNDED_RISE,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeConfig {
    /// Random planes to accept.
    pub trials: usize,
    /// Minimum transversality to the repelling estimate for a plane to be used.
    pub floor: f64,
    /// Final distance to the attracting limit below which the run is consistent.
    pub tolerance: f64,
    /// Largest last-step change of the limit estimates before abstaining.
    pub convergence_tol: f64,
    pub seed: u64,
}

impl Default for ProbeConfig {
    fn default() -> Self {
        ProbeConfig { trials: 32, floor: 0.05, tolerance: 1e-3, convergence_tol: 1e-3, seed: 0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ProbeVerdict {
    Consistent,
    Inconsistent,
    Abstain,
}

#[derive(Clone, Debug, Serialize)]
pub struct ProbeReport {
    pub k: usize,
    pub verdict: ProbeVerdict,
    pub config: ProbeConfig,
    /// Per step, the largest distance from `ρ(γ_n)V` to the attracting limit.
    pub distances: Vec<f64>,
    pub accepted: usize,
    pub excluded: usize,
    pub attracting_increment: f64,
    pub repelling_increment: f64,
    pub reason: Option<String>,
}

struct Limits {
    attracting: Subspace,
    repelling: Subspace,
    attracting_increment: f64,
    repelling_increment: f64,
}

fn limits(seq: &[CartanStack], inverses: &[CartanStack], k: usize) -> Result<Limits> {
    if seq.len() < 2 || seq.len() != inverses.len() {
        return Err(Error::DimensionMismatch { expected: seq.len().max(2), got: inverses.len() });
    }
    let d = seq[0].dim();
    let m = seq.len();
    let a0 = seq[m - 2].u_subspace(k)?;
    let a1 = seq[m - 1].u_subspace(k)?;
    let w0 = inverses[m - 2].u_subspace(d - k)?;
    let w1 = inverses[m - 1].u_subspace(d - k)?;
    Ok(Limits {
        attracting_increment: grassmannian_distance(&a0, &a1)?,
        repelling_increment: grassmannian_distance(&w0, &w1)?,
        attracting: a1,
        repelling: w1,
    })
}

fn abstain(k: usize, config: &ProbeConfig, reason: String, lim: Option<&Limits>) -> ProbeReport {
    ProbeReport {
        k,
        verdict: ProbeVerdict::Abstain,
        config: config.clone(),
        distances: vec![],
        accepted: 0,
        excluded: 0,
        attracting_increment: lim.map_or(f64::NAN, |l| l.attracting_increment),
        repelling_increment: lim.map_or(f64::NAN, |l| l.repelling_increment),
        reason: Some(reason),
    }
}

/// Attraction of the given `k`-planes by `ρ(γ_n)`. Planes closer to the
/// repelling estimate than `config.floor` are excluded.
pub fn strong_dynamics_probe_planes(
    seq: &[CartanStack],
    inverses: &[CartanStack],
    k: usize,
    planes: &[Subspace],
    config: &ProbeConfig,
) -> Result<ProbeReport> {
    let lim = match limits(seq, inverses, k) {
        Ok(l) => l,
        Err(Error::IllDefinedSubspace { k, gap }) => {
            return Ok(abstain(k, config, format!("U_{k} undefined at the tail (gap ratio {gap})"), None))
        }
        Err(e) => return Err(e),
    };
    if lim.repelling_increment > config.convergence_tol || lim.attracting_increment > config.convergence_tol {
        let reason = format!(
            "limit estimates not converged: attracting step {:.3e}, repelling step {:.3e}",
            lim.attracting_increment, lim.repelling_increment
        );
        return Ok(abstain(k, config, reason, Some(&lim)));
    }
    let mut accepted = Vec::new();
    let mut excluded = 0;
    for v in planes {
        if v.dim() != k {
            return Err(Error::DimensionMismatch { expected: k, got: v.dim() });
        }
        if transversality(v, &lim.repelling)? >= config.floor {
            accepted.push(v);
        } else {
            excluded += 1;
        }
    }
    if accepted.is_empty() {
        let mut r = abstain(k, config, "no plane passed the transversality floor".into(), Some(&lim));
        r.excluded = excluded;
        return Ok(r);
    }
    let mut distances = Vec::with_capacity(seq.len());
    for s in seq {
        let mut worst: f64 = 0.0;
        for v in &accepted {
            worst = worst.max(grassmannian_distance(&s.apply(v)?, &lim.attracting)?);
        }
        distances.push(worst);
    }
    let first = distances[0];
    let last = *distances.last().expect("nonempty");
    let verdict = if last <= config.tolerance && (last < first || first <= config.tolerance) {
        ProbeVerdict::Consistent
    } else {
        ProbeVerdict::Inconsistent
    };
    Ok(ProbeReport {
        k,
        verdict,
        config: config.clone(),
        distances,
        accepted: accepted.len(),
        excluded,
        attracting_increment: lim.attracting_increment,
        repelling_increment: lim.repelling_increment,
        reason: None,
    })
}

/// [`strong_dynamics_probe_planes`] on `config.trials` Gaussian random planes.
/// Rejected draws are redrawn, up to 100 draws per requested trial.
pub fn strong_dynamics_probe(seq: &[CartanStack], inverses: &[CartanStack], k: usize, config: &ProbeConfig) -> Result<ProbeReport> {
    let d = seq.first().map(|s| s.dim()).ok_or(Error::DimensionMismatch { expected: 2, got: 0 })?;
    let lim = match limits(seq, inverses, k) {
        Ok(l) => l,
        Err(_) => return strong_dynamics_probe_planes(seq, inverses, k, &[], config),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut planes = Vec::new();
    let mut drawn = 0;
    while planes.len() < config.trials && drawn < 100 * config.trials.max(1) {
        drawn += 1;
        let m = DMatrix::from_fn(d, k, |_, _| StandardNormal.sample(&mut rng));
        let Ok(v) = Subspace::from_basis(&m) else { continue };
        if transversality(&v, &lim.repelling)? >= config.floor {
            planes.push(v);
        }
    }
    let mut report = strong_dynamics_probe_planes(seq, inverses, k, &planes, config)?;
    report.excluded = drawn - planes.len();
    Ok(report)
}
