//! Per-element table of cusp distances and singular-value data.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::envelope::{fit_envelope, Direction, FitResult, SlopeConstraint};
use crate::cusp::CuspedGraph;
use crate::error::{Error, Result};
use crate::group::{DisplayWord, Group, GroupElement, Representation};
use crate::linalg::CartanStack;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ProfileRow {
    /// Index of the element in the cusped graph.
    pub id: usize,
    pub word: String,
    pub word_length: usize,
    pub cusp_distance: u32,
    /// `log μ_k/μ_{k+1}` for `k = 1..d−1`.
    pub mu_gaps: Vec<f64>,
    /// `log μ₁/μ_d`.
    pub log_spread: f64,
    /// `log λ_k/λ_{k+1}` for `k = 1..d−1`.
    pub lambda_gaps: Vec<f64>,
    /// Symmetric-space distance from the basepoint to its image.
    pub symmetric_distance: f64,
    /// Attached peripheral subgroup containing the element, if any.
    pub peripheral: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GapProfile {
    pub representation: String,
    pub dim: usize,
    pub rows: Vec<ProfileRow>,
    /// Elements skipped because they are not vertices of the graph.
    pub skipped: usize,
}

/// Which rows a fit uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RowFilter {
    All,
    /// Rows lying in some attached peripheral subgroup (identity included).
    Peripheral,
}

/// Singular-value data of one element, computed from its exact image.
pub fn element_row(
    group: &Group,
    rep: &Representation,
    graph: &CuspedGraph,
    g: &GroupElement,
) -> Result<ProfileRow> {
    let id = graph.vertex_of(g)?;
    let st = CartanStack::from_exact(&rep.image(g), &rep.basis_scale)?;
    let d = rep.dim;
    let mu_gaps = (1..d).map(|k| st.mu_gap(k)).collect::<Result<Vec<_>>>()?;
    let lambda_gaps = (1..d).map(|k| st.lambda_gap(k)).collect::<Result<Vec<_>>>()?;
    let mut peripheral = None;
    for &p in &graph.attached {
        if let Ok(true) = group.peripheral_membership(g, p) {
            peripheral = Some(p);
            break;
        }
    }
    Ok(ProfileRow {
        id,
        word: DisplayWord(&group.gens, &g.word).to_string(),
        word_length: g.length(),
        cusp_distance: graph.cusp_distance(g)?,
        mu_gaps,
        log_spread: st.log_spread(),
        lambda_gaps,
        symmetric_distance: st.symmetric_norm(),
        peripheral,
    })
}

/// One row per element that is a vertex of `graph`, in the given order.
pub fn build_gap_profile(
    group: &Group,
    rep: &Representation,
    graph: &CuspedGraph,
    elements: &[GroupElement],
) -> Result<GapProfile> {
    graph.root_distances();
    let rows: Vec<Option<ProfileRow>> = elements
        .par_iter()
        .map(|g| match element_row(group, rep, graph, g) {
            Ok(r) => Ok(Some(r)),
            Err(Error::OutsideBall { .. }) => Ok(None),
            Err(e) => Err(e),
        })
        .collect::<Result<_>>()?;
    let skipped = rows.iter().filter(|r| r.is_none()).count();
    Ok(GapProfile { representation: rep.name.clone(), dim: rep.dim, rows: rows.into_iter().flatten().collect(), skipped })
}

/// Profile over every element vertex of the graph.
pub fn profile_graph(group: &Group, rep: &Representation, graph: &CuspedGraph) -> Result<GapProfile> {
    build_gap_profile(group, rep, graph, &graph.elements)
}

impl GapProfile {
    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    fn check_k(&self, k: usize) -> Result<()> {
        if k == 0 || k >= self.dim {
            return Err(Error::Config(format!("k = {k} must lie in 1..{}", self.dim)));
        }
        Ok(())
    }

    pub fn rows_matching(&self, filter: RowFilter) -> impl Iterator<Item = &ProfileRow> {
        self.rows.iter().filter(move |r| filter == RowFilter::All || r.peripheral.is_some())
    }

    /// `(cusp distance, mu_gap_k)` pairs.
    pub fn gap_points(&self, k: usize, filter: RowFilter) -> Result<(Vec<f64>, Vec<f64>)> {
        self.check_k(k)?;
        Ok(self.rows_matching(filter).map(|r| (r.cusp_distance as f64, r.mu_gaps[k - 1])).unzip())
    }

    pub fn write_csv(&self, out: &mut impl Write) -> Result<()> {
        let io = |e| Error::io("profile csv", e);
        let d = self.dim;
        let mut header = vec!["id".to_string(), "word".into(), "word_length".into(), "cusp_distance".into()];
        header.extend((1..d).map(|k| format!("mu_gap_{k}")));
        header.push("log_spread".into());
        header.extend((1..d).map(|k| format!("lambda_gap_{k}")));
        header.push("symmetric_distance".into());
        header.push("peripheral".into());
        writeln!(out, "{}", header.join(",")).map_err(io)?;
        for r in &self.rows {
            let mut f = vec![r.id.to_string(), format!("\"{}\"", r.word), r.word_length.to_string(), r.cusp_distance.to_string()];
            f.extend(r.mu_gaps.iter().map(|x| format!("{x:.12e}")));
            f.push(format!("{:.12e}", r.log_spread));
            f.extend(r.lambda_gaps.iter().map(|x| format!("{x:.12e}")));
            f.push(format!("{:.12e}", r.symmetric_distance));
            f.push(r.peripheral.map(|p| p.to_string()).unwrap_or_default());
            writeln!(out, "{}", f.join(",")).map_err(io)?;
        }
        Ok(())
    }
}

/// Lower envelope `mu_gap_k ≥ α·d_X − β` with `α ≥ 0`.
pub fn fit_lower_envelope(profile: &GapProfile, k: usize, filter: RowFilter) -> Result<FitResult> {
    let (x, y) = profile.gap_points(k, filter)?;
    fit_envelope(&x, &y, Direction::Lower, SlopeConstraint::NonNegative)
}

/// Upper envelope `log μ₁/μ_d ≤ α·d_X + β` with `α ≥ 0`.
pub fn fit_upper_envelope(profile: &GapProfile, filter: RowFilter) -> Result<FitResult> {
    let (x, y): (Vec<f64>, Vec<f64>) =
        profile.rows_matching(filter).map(|r| (r.cusp_distance as f64, r.log_spread)).unzip();
    fit_envelope(&x, &y, Direction::Upper, SlopeConstraint::NonNegative)
}

/// Uniform regularity: largest `α ≥ 0` with `mu_gap_k ≥ α·log μ₁/μ_d − β`.
pub fn morse_regularity(profile: &GapProfile, k: usize, filter: RowFilter) -> Result<FitResult> {
    profile.check_k(k)?;
    let (x, y): (Vec<f64>, Vec<f64>) = profile.rows_matching(filter).map(|r| (r.log_spread, r.mu_gaps[k - 1])).unzip();
    fit_envelope(&x, &y, Direction::Lower, SlopeConstraint::NonNegative)
}
