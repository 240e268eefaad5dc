//! Re-running diagnostics on a deformation that keeps peripheral images
//! conjugate to the original ones.

use std::collections::BTreeMap;

use serde::Serialize;

use super::envelope::FLAT_SLOPE_TOL;
use super::limit_set::{limit_set_sample_sphere, FLAG_TOLERANCE};
use super::profile::{fit_lower_envelope, morse_regularity, profile_graph, RowFilter};
use super::qi::quasi_isometry_check;
use crate::cusp::CuspedGraph;
use crate::error::{Error, Result};
use crate::group::{enumerate_ball, Group, RatMatrix, Representation};

/// New generator images plus, for each peripheral subgroup, the conjugator
/// `C` with `ρ'(s) = C ρ₀(s) C⁻¹` on its marked generators.
#[derive(Clone, Debug)]
pub struct Perturbation {
    pub name: String,
    pub images: Vec<RatMatrix>,
    pub conjugators: Vec<Option<RatMatrix>>,
}

impl Perturbation {
    /// The zero perturbation.
    pub fn none(rep: &Representation, peripherals: usize) -> Self {
        Self {
            name: format!("{}-unperturbed", rep.name),
            images: rep.generator_images().to_vec(),
            conjugators: vec![Some(RatMatrix::identity(rep.dim)); peripherals],
        }
    }
}

/// Ranks of `(m − I)^j` for `j = 1..d`, a conjugacy invariant.
pub fn unipotent_rank_profile(m: &RatMatrix) -> Vec<usize> {
    let n = m.sub(&RatMatrix::identity(m.dim()));
    let mut p = n.clone();
    let mut out = Vec::with_capacity(m.dim());
    for _ in 0..m.dim() {
        out.push(p.rank());
        p = p.mul(&n);
    }
    out
}

/// Exact check of `ρ'(s) = C ρ₀(s) C⁻¹` on every marked peripheral generator.
pub fn check_peripheral_conjugacy(group: &Group, base: &Representation, perturbed: &Representation, conjugators: &[Option<RatMatrix>]) -> Result<()> {
    if conjugators.len() != group.peripherals.len() {
        return Err(Error::Config(format!(
            "{} conjugators for {} peripheral subgroups",
            conjugators.len(),
            group.peripherals.len()
        )));
    }
    for (per, c) in group.peripherals.iter().zip(conjugators) {
        for &g in &per.generators {
            let (m0, m1) = (&base.generator_images()[g], &perturbed.generator_images()[g]);
            let (r0, r1) = (unipotent_rank_profile(m0), unipotent_rank_profile(m1));
            if r0 != r1 {
                return Err(Error::ConstraintViolated(format!(
                    "generator {} of peripheral {}: ranks of (ρ(s) − I)^j are {r0:?} before and {r1:?} after, so no conjugator exists",
                    group.gens.names[g], per.id
                )));
            }
            let Some(c) = c else {
                return Err(Error::ConstraintViolated(format!("no conjugator supplied for peripheral {}", per.id)));
            };
            if c.dim() != base.dim {
                return Err(Error::DimensionMismatch { expected: base.dim, got: c.dim() });
            }
            if c.mul(m0).mul(&c.inverse()?) != *m1 {
                return Err(Error::ConstraintViolated(format!(
                    "conjugator for peripheral {} does not carry the old image of {} to the new one",
                    per.id, group.gens.names[g]
                )));
            }
        }
    }
    Ok(())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RerunDiagnostic {
    GapFit,
    Morse,
    Qi,
    Transversality,
}

impl RerunDiagnostic {
    pub const ALL: [RerunDiagnostic; 4] = [Self::GapFit, Self::Morse, Self::Qi, Self::Transversality];
}

#[derive(Clone, Debug)]
pub struct RerunSettings {
    pub k: usize,
    /// Sphere radius for the transversality sample.
    pub sphere_radius: usize,
    pub diagnostics: Vec<RerunDiagnostic>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct BatteryConstants {
    pub constants: BTreeMap<String, f64>,
    pub verdicts: BTreeMap<String, String>,
}

fn flat_or_positive(flat: bool) -> String {
    if flat { "flat" } else { "positive" }.to_string()
}

pub fn battery_constants(group: &Group, rep: &Representation, graph: &CuspedGraph, settings: &RerunSettings) -> Result<BatteryConstants> {
    let mut out = BatteryConstants::default();
    let needs_profile = settings.diagnostics.iter().any(|d| *d != RerunDiagnostic::Transversality);
    let profile = if needs_profile { Some(profile_graph(group, rep, graph)?) } else { None };
    for diag in &settings.diagnostics {
        match diag {
            RerunDiagnostic::GapFit => {
                let fit = fit_lower_envelope(profile.as_ref().expect("built"), settings.k, RowFilter::All)?;
                out.constants.insert("gap.alpha".into(), fit.alpha);
                out.constants.insert("gap.beta".into(), fit.beta);
                out.verdicts.insert("gap".into(), flat_or_positive(fit.is_flat(FLAT_SLOPE_TOL)));
            }
            RerunDiagnostic::Morse => {
                let fit = morse_regularity(profile.as_ref().expect("built"), settings.k, RowFilter::All)?;
                out.constants.insert("morse.alpha".into(), fit.alpha);
                out.constants.insert("morse.beta".into(), fit.beta);
                out.verdicts.insert("morse".into(), flat_or_positive(fit.is_flat(FLAT_SLOPE_TOL)));
            }
            RerunDiagnostic::Qi => {
                let qi = quasi_isometry_check(profile.as_ref().expect("built"))?;
                if let (Some(k), Some(c)) = (qi.multiplicative, qi.additive) {
                    out.constants.insert("qi.multiplicative".into(), k);
                    out.constants.insert("qi.additive".into(), c);
                }
                let verdict = if qi.multiplicative.is_some() { "quasi-isometric" } else { "not-quasi-isometric" };
                out.verdicts.insert("qi".into(), verdict.into());
            }
            RerunDiagnostic::Transversality => {
                let ball = enumerate_ball(group, settings.sphere_radius, None)?;
                let sample = limit_set_sample_sphere(group, rep, &ball, settings.sphere_radius, settings.k)?;
                let verdict = match &sample.transversality {
                    Some(t) => {
                        out.constants.insert("transversality.min".into(), t.minimum);
                        if t.minimum > 0.0 { "transverse" } else { "not-transverse" }
                    }
                    None => "no-sample",
                };
                out.verdicts.insert("transversality".into(), verdict.into());
            }
        }
    }
    Ok(out)
}

#[derive(Clone, Debug, Serialize)]
pub struct ComparativeReport {
    pub base: BatteryConstants,
    pub perturbed: BatteryConstants,
    /// `|new − old| / |old|` per constant present in both runs.
    pub relative_change: BTreeMap<String, f64>,
    pub max_relative_change: f64,
    pub verdicts_preserved: bool,
    pub k: usize,
    pub sphere_radius: usize,
    pub flag_tolerance: f64,
}

/// Validates the conjugacy constraint exactly, then runs the selected
/// diagnostics on both representations over the same cusped graph.
pub fn perturbation_rerun(
    group: &Group,
    base: &Representation,
    perturbation: &Perturbation,
    graph: &CuspedGraph,
    settings: &RerunSettings,
) -> Result<ComparativeReport> {
    let perturbed = base.with_images(perturbation.name.clone(), group, perturbation.images.clone())?;
    check_peripheral_conjugacy(group, base, &perturbed, &perturbation.conjugators)?;
    let b = battery_constants(group, base, graph, settings)?;
    let p = battery_constants(group, &perturbed, graph, settings)?;
    let relative_change: BTreeMap<String, f64> = b
        .constants
        .iter()
        .filter_map(|(key, &old)| {
            p.constants.get(key).map(|&new| {
                let rel = if old == new { 0.0 } else { (new - old).abs() / old.abs() };
                (key.clone(), rel)
            })
        })
        .collect();
    let max_relative_change = relative_change.values().cloned().fold(0.0, f64::max);
    Ok(ComparativeReport {
        verdicts_preserved: b.verdicts == p.verdicts,
        base: b,
        perturbed: p,
        relative_change,
        max_relative_change,
        k: settings.k,
        sphere_radius: settings.sphere_radius,
        flag_tolerance: FLAG_TOLERANCE,
    })
}
