//! Thick/thin labelling of a path in the cusped graph.

use serde::Serialize;

use crate::cusp::{CuspedGraph, GeodesicPath};

/// Vertices at horoball level ≥ this are thin.
pub const THIN_DEPTH: u32 = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "phase", rename_all = "kebab-case")]
pub enum Phase {
    Thick,
    Thin { horoball: usize },
}

/// A maximal run of thin vertices inside one horoball.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Excursion {
    pub horoball: usize,
    /// First and last path index of the thin run.
    pub first: usize,
    pub last: usize,
    /// Thick vertex just before the run (entry time), if on the path.
    pub entry: Option<usize>,
    /// Thick vertex just after the run (exit time), if on the path.
    pub exit: Option<usize>,
    pub max_depth: u32,
    /// The run touches the truncation depth of the graph.
    pub at_ceiling: bool,
}

impl Excursion {
    /// Exit time minus entry time.
    pub fn duration(&self) -> Option<usize> {
        Some(self.exit? - self.entry?)
    }

    /// Missing an entry or exit, or cut off by the truncation depth.
    pub fn truncated(&self) -> bool {
        self.entry.is_none() || self.exit.is_none() || self.at_ceiling
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Segmentation {
    pub phases: Vec<Phase>,
    pub depths: Vec<u32>,
    pub excursions: Vec<Excursion>,
}

impl Segmentation {
    pub fn is_thick(&self, i: usize) -> bool {
        self.phases[i] == Phase::Thick
    }

    pub fn thick_indices(&self) -> Vec<usize> {
        (0..self.phases.len()).filter(|&i| self.is_thick(i)).collect()
    }

    /// The excursion whose thin run contains path index `i`.
    pub fn excursion_at(&self, i: usize) -> Option<&Excursion> {
        self.excursions.iter().find(|e| e.first <= i && i <= e.last)
    }
}

pub fn segment_path(graph: &CuspedGraph, path: &GeodesicPath) -> Segmentation {
    let ceiling = graph.config.depth;
    let labels: Vec<_> = path.vertices.iter().map(|&v| graph.label(v)).collect();
    let depths: Vec<u32> = labels.iter().map(|l| l.depth).collect();
    let phases: Vec<Phase> = labels
        .iter()
        .map(|l| match l.horoball {
            Some(h) if l.depth >= THIN_DEPTH => Phase::Thin { horoball: h },
            _ => Phase::Thick,
        })
        .collect();
    let n = phases.len();
    let mut excursions = Vec::new();
    let mut i = 0;
    while i < n {
        let Phase::Thin { horoball } = phases[i] else {
            i += 1;
            continue;
        };
        let first = i;
        while i + 1 < n && phases[i + 1] == (Phase::Thin { horoball }) {
            i += 1;
        }
        let last = i;
        let max_depth = depths[first..=last].iter().copied().max().unwrap_or(THIN_DEPTH);
        excursions.push(Excursion {
            horoball,
            first,
            last,
            entry: first.checked_sub(1),
            exit: (last + 1 < n).then_some(last + 1),
            max_depth,
            at_ceiling: max_depth >= ceiling,
        });
        i += 1;
    }
    Segmentation { phases, depths, excursions }
}
