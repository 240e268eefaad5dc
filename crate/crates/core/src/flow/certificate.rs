//! Sampled contraction certificate: κ along many long paths, the checks every
//! field must pass, and an exponential upper envelope for `κ(0, t)`.

use rayon::prelude::*;
use serde::Serialize;

use super::field::{FlowConfig, FlowPath, PathTrace};
use super::tube::{tube_path, TubeConfig};
use crate::cusp::{graph_required_depth, CuspConfig, CuspedGraph};
use crate::diagnostics::{
    fit_envelope, fit_lower_envelope, profile_graph, Direction, FitResult, RowFilter, SlopeConstraint, FLAT_SLOPE_TOL,
};
use crate::error::{Error, Result};
use crate::group::{Group, Representation};

/// Slack on the multiplicative bounds checked against κ.
pub const KAPPA_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize)]
pub struct FlowRunConfig {
    pub k: usize,
    /// Thin-part exponent; fitted from the peripheral gaps when absent.
    pub alpha: Option<f64>,
    pub paths: usize,
    /// Largest flow time evaluated.
    pub t_max: usize,
    pub seed: u64,
    pub margin: usize,
    pub flag_tol: f64,
    pub transversality_floor: f64,
    /// Peripheral syllables of the sampled paths have length ≤ 2^this.
    pub max_log2_syllable: u32,
    /// Number of leading paths whose full trace is kept.
    pub traces: usize,
}

impl Default for FlowRunConfig {
    fn default() -> Self {
        FlowRunConfig {
            k: 1,
            alpha: None,
            paths: 16,
            t_max: 40,
            seed: 0,
            margin: 24,
            flag_tol: 1e-8,
            transversality_floor: 1e-8,
            max_log2_syllable: 9,
            traces: 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AlphaSource {
    PeripheralFit,
    User,
}

#[derive(Clone, Debug, Serialize)]
pub struct AlphaChoice {
    pub value: f64,
    pub source: AlphaSource,
    pub fit: Option<FitResult>,
}

/// Lower envelope of the peripheral gap profile, over peripheral elements
/// of length ≤ `max_syllable` in their own generators.
pub fn peripheral_alpha(group: &Group, rep: &Representation, k: usize, max_syllable: usize) -> Result<FitResult> {
    let depth = graph_required_depth(2 * max_syllable as u64);
    let graph = CuspedGraph::build(group, CuspConfig::new(1, depth).with_peripheral_radius(max_syllable))?;
    let profile = profile_graph(group, rep, &graph)?;
    fit_lower_envelope(&profile, k, RowFilter::Peripheral)
}

#[derive(Clone, Debug, Serialize)]
pub struct PathSummary {
    pub seed: u64,
    pub word: String,
    pub length: usize,
    pub horizon: Option<usize>,
    pub excursions: usize,
    pub deepest: u32,
    pub truncated_excursions: usize,
    pub min_transversality: Option<f64>,
    pub flag_increment: Option<f64>,
    /// `ln κ(0, t)` for `t = 0, 1, …`.
    pub log_kappa: Vec<f64>,
    /// The same along the reversed path.
    pub log_kappa_reversed: Vec<f64>,
    /// Why the path was dropped.
    pub error: Option<String>,
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct SubmultiplicativityCheck {
    pub pairs: usize,
    pub violations: usize,
    /// `max ln κ(0,t+u) − ln κ(0,t) − ln κ(t,u)`.
    pub worst_excess: f64,
}

/// `κ(e, t) ≤ e^{−αt}(1 + tol)` on the first third of every excursion.
#[derive(Clone, Debug, Default, Serialize)]
pub struct AscentCheck {
    pub points: usize,
    pub violations: usize,
    /// `max ln κ(e, t) + αt`.
    pub worst_excess: f64,
    /// `max |ln κ(e, t) − ln κ_closed(t)|` against the closed form of the
    /// recipe: `e^{−αt/2}` when the middle piece is nonzero, `e^{−αt}` otherwise.
    pub closed_form_error: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WorstPoint {
    pub path: usize,
    pub t: usize,
    pub log_kappa: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ContractionCertificate {
    /// `c` in `κ(0, t) ≤ C e^{−ct}`.
    pub rate: f64,
    pub constant: f64,
    pub fit: FitResult,
    /// Smallest sampled `T` with `κ(0, t) ≤ 1/2` for every sampled `t ≥ T`.
    pub half_time: Option<usize>,
    /// Largest `ln κ(0, t)` over the far half of the sampled times.
    pub worst: WorstPoint,
    pub contracting: bool,
}

/// Fits `ln κ(0, t) ≤ ln C − c t` over all series.
pub fn contraction_certificate(series: &[Vec<f64>]) -> Result<ContractionCertificate> {
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    let mut t_top = 0;
    for s in series {
        for (t, &y) in s.iter().enumerate() {
            xs.push(t as f64);
            ys.push(y);
            t_top = t_top.max(t);
        }
    }
    if xs.is_empty() {
        return Err(Error::DegenerateProfile("no κ samples".into()));
    }
    let fit = fit_envelope(&xs, &ys, Direction::Upper, SlopeConstraint::Free)?;
    let half = 0.5f64.ln();
    let mut half_time = Some(0);
    let mut worst = WorstPoint { path: 0, t: 0, log_kappa: f64::NEG_INFINITY };
    for (p, s) in series.iter().enumerate() {
        for (t, &y) in s.iter().enumerate() {
            if y > half {
                half_time = half_time.map(|h: usize| h.max(t + 1));
            }
            if 2 * t >= t_top && y > worst.log_kappa {
                worst = WorstPoint { path: p, t, log_kappa: y };
            }
        }
    }
    if half_time.is_some_and(|h| h > t_top) {
        half_time = None;
    }
    let rate = -fit.alpha;
    let contracting = rate > 0.0 && !fit.is_flat(FLAT_SLOPE_TOL);
    Ok(ContractionCertificate { rate, constant: fit.beta.exp(), fit, half_time, worst, contracting })
}

#[derive(Clone, Debug, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum FlowVerdict {
    Contracting,
    NotContracting { reason: String },
    Failed { reason: String },
}

#[derive(Clone, Debug, Serialize)]
pub struct FlowReport {
    pub config: FlowRunConfig,
    pub alpha: Option<AlphaChoice>,
    pub paths: Vec<PathSummary>,
    pub kappa_zero_exact: bool,
    pub submultiplicativity: SubmultiplicativityCheck,
    pub ascent: AscentCheck,
    pub max_junction_jump: f64,
    pub max_projection_defect: f64,
    pub certificate: Option<ContractionCertificate>,
    /// The certificate along the reversed paths (the dual flow).
    pub reversed: Option<ContractionCertificate>,
    pub verdict: FlowVerdict,
    /// `(seed, trace)` of the first `traces` successful paths.
    #[serde(skip)]
    pub traces: Vec<(u64, PathTrace)>,
}

struct PathOutcome {
    summary: PathSummary,
    zero_exact: bool,
    submult: SubmultiplicativityCheck,
    ascent: AscentCheck,
    junction: f64,
    projection: f64,
    trace: Option<PathTrace>,
}

fn kappa_series(fp: &FlowPath, t_max: usize) -> Result<Vec<f64>> {
    (0..=t_max.min(fp.horizon())).map(|t| fp.log_kappa(0, t)).collect()
}

fn analyse_path(
    group: &Group,
    rep: &Representation,
    cfg: &FlowRunConfig,
    flow: &FlowConfig,
    seed: u64,
    keep_trace: bool,
) -> Result<PathOutcome> {
    let min_length = cfg.t_max + 2 * cfg.margin + 8;
    let tube = tube_path(group, &TubeConfig { min_length, max_log2_syllable: cfg.max_log2_syllable, seed })?;
    let seg_excursions = |fp: &FlowPath| fp.segmentation.excursions.clone();
    let mut summary = PathSummary {
        seed,
        word: tube.word.clone(),
        length: tube.path.length,
        horizon: None,
        excursions: 0,
        deepest: 0,
        truncated_excursions: 0,
        min_transversality: None,
        flag_increment: None,
        log_kappa: vec![],
        log_kappa_reversed: vec![],
        error: None,
    };
    let fp = FlowPath::prepare(group, rep, &tube.graph, &tube.path, flow)?;
    let rev = FlowPath::prepare(group, rep, &tube.graph, &tube.path.reversed(), flow)?;
    let ex = seg_excursions(&fp);
    summary.horizon = Some(fp.horizon());
    summary.excursions = ex.len();
    summary.deepest = ex.iter().map(|e| e.max_depth).max().unwrap_or(0);
    summary.truncated_excursions = ex.iter().filter(|e| e.truncated()).count();
    summary.min_transversality = fp.splittings.iter().map(|s| s.transversality).reduce(f64::min);
    summary.flag_increment = match (&fp.forward, &fp.backward) {
        (Some(f), Some(b)) => Some(f.last_increment().max(b.last_increment())),
        _ => None,
    };
    summary.log_kappa = kappa_series(&fp, cfg.t_max)?;
    summary.log_kappa_reversed = kappa_series(&rev, cfg.t_max)?;

    let h = cfg.t_max.min(fp.horizon());
    let zero_exact = (0..=fp.horizon()).all(|s| fp.kappa(s, 0).is_ok_and(|k| k == 1.0));
    let mut submult = SubmultiplicativityCheck { worst_excess: f64::NEG_INFINITY, ..Default::default() };
    for t in 1..h {
        for u in 1..=h - t {
            let excess = summary.log_kappa[t + u] - summary.log_kappa[t] - fp.log_kappa(t, u)?;
            submult.pairs += 1;
            submult.worst_excess = submult.worst_excess.max(excess);
            if excess > KAPPA_TOL.ln_1p() {
                submult.violations += 1;
            }
        }
    }

    let alpha = flow.alpha;
    let neutral = fp.splittings.first().is_some_and(|s| s.dims[1] > 0);
    let closed_rate = if neutral { alpha / 2.0 } else { alpha };
    let mut ascent = AscentCheck { worst_excess: f64::NEG_INFINITY, ..Default::default() };
    let (lo, hi) = fp.domain;
    for e in &ex {
        let (Some(a), Some(b)) = (e.entry, e.exit) else { continue };
        if a < lo || b > hi {
            continue;
        }
        for t in 1..=(b - a) / 3 {
            let lk = fp.log_kappa(a - lo, t)?;
            let excess = lk + alpha * t as f64;
            ascent.points += 1;
            ascent.worst_excess = ascent.worst_excess.max(excess);
            if excess > KAPPA_TOL.ln_1p() {
                ascent.violations += 1;
            }
            ascent.closed_form_error = ascent.closed_form_error.max((lk + closed_rate * t as f64).abs());
        }
    }
    Ok(PathOutcome {
        summary,
        zero_exact,
        submult,
        ascent,
        junction: fp.max_junction_jump().max(rev.max_junction_jump()),
        projection: fp.max_projection_defect().max(rev.max_projection_defect()),
        trace: if keep_trace { Some(fp.trace(cfg.t_max)?) } else { None },
    })
}

fn failed(cfg: &FlowRunConfig, alpha: Option<AlphaChoice>, paths: Vec<PathSummary>, reason: String) -> FlowReport {
    FlowReport {
        config: cfg.clone(),
        alpha,
        paths,
        kappa_zero_exact: false,
        submultiplicativity: SubmultiplicativityCheck::default(),
        ascent: AscentCheck::default(),
        max_junction_jump: 0.0,
        max_projection_defect: 0.0,
        certificate: None,
        reversed: None,
        verdict: FlowVerdict::Failed { reason },
        traces: vec![],
    }
}

/// Samples `cfg.paths` tube geodesics, evaluates κ along each and its
/// reversal, and certifies exponential contraction. Problems with the input
/// (no positive α, boundary flags that do not converge or are not
/// transverse) produce a `Failed` report rather than an error.
pub fn run_flow(group: &Group, rep: &Representation, cfg: &FlowRunConfig) -> Result<FlowReport> {
    if cfg.paths == 0 || cfg.t_max == 0 {
        return Err(Error::Config("flow runs need at least one path and t_max ≥ 1".into()));
    }
    let alpha = match cfg.alpha {
        Some(a) => AlphaChoice { value: a, source: AlphaSource::User, fit: None },
        None => {
            let fit = peripheral_alpha(group, rep, cfg.k, 1 << cfg.max_log2_syllable)?;
            let flat = fit.is_flat(FLAT_SLOPE_TOL);
            let choice = AlphaChoice { value: fit.alpha, source: AlphaSource::PeripheralFit, fit: Some(fit) };
            if flat || !(choice.value > 0.0) {
                let reason = format!(
                    "peripheral gaps do not grow linearly in cusped distance (fitted α = {:.4}, far-range slope {:?}); no thin-part exponent",
                    choice.value,
                    choice.fit.as_ref().and_then(|f| f.far_alpha)
                );
                return Ok(failed(cfg, Some(choice), vec![], reason));
            }
            choice
        }
    };
    if !(alpha.value > 0.0) {
        return Ok(failed(cfg, Some(alpha.clone()), vec![], format!("α = {} is not positive", alpha.value)));
    }
    let flow = FlowConfig {
        k: cfg.k,
        alpha: alpha.value,
        margin: cfg.margin,
        flag_tol: cfg.flag_tol,
        transversality_floor: cfg.transversality_floor,
    };
    let outcomes: Vec<(u64, Result<PathOutcome>)> = (0..cfg.paths as u64)
        .into_par_iter()
        .map(|i| {
            let seed = cfg.seed.wrapping_add(i);
            (seed, analyse_path(group, rep, cfg, &flow, seed, (i as usize) < cfg.traces))
        })
        .collect();

    let mut paths = Vec::new();
    let mut ok: Vec<PathOutcome> = Vec::new();
    for (seed, o) in outcomes {
        match o {
            Ok(o) => {
                paths.push(o.summary.clone());
                ok.push(o);
            }
            Err(e @ (Error::Unsupported(_) | Error::Config(_) | Error::MemoryBudget(_))) => return Err(e),
            Err(e) => paths.push(PathSummary {
                seed,
                word: String::new(),
                length: 0,
                horizon: None,
                excursions: 0,
                deepest: 0,
                truncated_excursions: 0,
                min_transversality: None,
                flag_increment: None,
                log_kappa: vec![],
                log_kappa_reversed: vec![],
                error: Some(e.to_string()),
            }),
        }
    }
    if ok.is_empty() {
        let first = paths.iter().find_map(|p| p.error.clone()).unwrap_or_default();
        return Ok(failed(cfg, Some(alpha), paths, format!("every sampled path failed; first error: {first}")));
    }

    let mut submult = SubmultiplicativityCheck { worst_excess: f64::NEG_INFINITY, ..Default::default() };
    let mut ascent = AscentCheck { worst_excess: f64::NEG_INFINITY, ..Default::default() };
    for o in &ok {
        submult.pairs += o.submult.pairs;
        submult.violations += o.submult.violations;
        submult.worst_excess = submult.worst_excess.max(o.submult.worst_excess);
        ascent.points += o.ascent.points;
        ascent.violations += o.ascent.violations;
        ascent.worst_excess = ascent.worst_excess.max(o.ascent.worst_excess);
        ascent.closed_form_error = ascent.closed_form_error.max(o.ascent.closed_form_error);
    }
    let forward: Vec<Vec<f64>> = ok.iter().map(|o| o.summary.log_kappa.clone()).collect();
    let backward: Vec<Vec<f64>> = ok.iter().map(|o| o.summary.log_kappa_reversed.clone()).collect();
    let certificate = contraction_certificate(&forward)?;
    let reversed = contraction_certificate(&backward)?;
    let verdict = if certificate.contracting && reversed.contracting {
        FlowVerdict::Contracting
    } else {
        let side = if certificate.contracting { "reversed" } else { "forward" };
        let c = if certificate.contracting { &reversed } else { &certificate };
        FlowVerdict::NotContracting {
            reason: format!(
                "{side} κ envelope has rate {:.4}; worst point path {} t = {} with ln κ = {:.4}",
                c.rate, c.worst.path, c.worst.t, c.worst.log_kappa
            ),
        }
    };
    Ok(FlowReport {
        config: cfg.clone(),
        alpha: Some(alpha),
        paths,
        kappa_zero_exact: ok.iter().all(|o| o.zero_exact),
        submultiplicativity: submult,
        ascent,
        max_junction_jump: ok.iter().map(|o| o.junction).fold(0.0, f64::max),
        max_projection_defect: ok.iter().map(|o| o.projection).fold(0.0, f64::max),
        certificate: Some(certificate),
        reversed: Some(reversed),
        verdict,
        traces: ok.iter_mut().filter_map(|o| Some((o.summary.seed, o.trace.take()?))).collect(),
    })
}
