//! Standalone truncated combinatorial horoballs over a base graph.

use std::collections::VecDeque;

use serde::Serialize;

use super::engine::{ceil_log2, radius_at, Base, Block, Layered, Loc, UNREACHED};
use crate::error::{Error, Result};

/// A vertex `(base point, depth)` with depth counted from 1.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct HoroballVertex {
    pub base: usize,
    pub depth: u32,
}

impl HoroballVertex {
    pub fn new(base: usize, depth: u32) -> Self {
        HoroballVertex { base, depth }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EdgeCounts {
    pub cayley: u64,
    pub vertical: u64,
    pub horizontal: u64,
}

impl EdgeCounts {
    pub fn total(&self) -> u64 {
        self.cayley + self.vertical + self.horizontal
    }
}

/// The base graph a horoball is built over.
#[derive(Clone, Debug)]
pub enum BaseGraph {
    /// Path graph on `0..n` (a segment of ℤ).
    Segment(usize),
    /// `width × height` box in ℤ² with the standard generators; point `(x, y)`
    /// has index `y * width + x`.
    Grid { width: usize, height: usize },
    /// Any connected graph, given by adjacency lists.
    Adjacency(Vec<Vec<usize>>),
}

/// Smallest depth for which the truncation cannot shorten a path between
/// base points at distance `d` (the `2 + ⌈log₂ d⌉` rule).
pub fn required_depth(d: u64) -> u32 {
    if d == 0 {
        1
    } else {
        2 + ceil_log2(d)
    }
}

/// Length of the best path that climbs to a common level, takes at most
/// three horizontal edges there and descends again.
pub fn normal_form_distance(base_distance: u64, from_depth: u32, to_depth: u32, depth: u32) -> Result<u64> {
    let need = required_depth(base_distance).max(from_depth).max(to_depth);
    if depth < need {
        return Err(Error::InsufficientDepth { required: need, actual: depth });
    }
    let lo = from_depth.max(to_depth);
    let mut best = None;
    for level in lo..=depth {
        let r = radius_at(level);
        let h = base_distance.div_ceil(r);
        if h > 3 {
            continue;
        }
        let cost = (level - from_depth) as u64 + (level - to_depth) as u64 + h;
        if best.is_none_or(|b| cost < b) {
            best = Some(cost);
        }
    }
    best.ok_or(Error::InsufficientDepth { required: need, actual: depth })
}

/// A combinatorial horoball on `base × {1..depth}`.
#[derive(Clone, Debug)]
pub struct Horoball {
    graph: Layered,
    depth: u32,
}

impl Horoball {
    pub fn new(base: BaseGraph, depth: u32) -> Result<Self> {
        if depth < 1 {
            return Err(Error::Config("horoball depth must be at least 1".into()));
        }
        let base = match base {
            BaseGraph::Segment(n) if n > 0 => Base::Line { n },
            BaseGraph::Grid { width, height } if width > 0 && height > 0 => Base::Grid { width, height },
            BaseGraph::Adjacency(adj) if !adj.is_empty() => {
                let n = adj.len();
                Base::Explicit { n, dist: all_pairs(&adj)? }
            }
            _ => return Err(Error::Config("horoball base graph is empty".into())),
        };
        let block = Block { base, members: vec![], offset: 0, first_level: 1, depth };
        Ok(Horoball { graph: Layered::new(vec![], vec![block]), depth })
    }

    pub fn segment(n: usize, depth: u32) -> Result<Self> {
        Self::new(BaseGraph::Segment(n), depth)
    }

    pub fn grid(width: usize, height: usize, depth: u32) -> Result<Self> {
        Self::new(BaseGraph::Grid { width, height }, depth)
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn base_len(&self) -> usize {
        self.block().base.len()
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.total
    }

    pub fn edge_counts(&self) -> EdgeCounts {
        let (cayley, vertical, horizontal) = self.graph.edge_counts();
        EdgeCounts { cayley, vertical, horizontal }
    }

    /// Index of grid point `(x, y)`; only meaningful for grid bases.
    pub fn grid_point(&self, x: usize, y: usize) -> usize {
        match self.block().base {
            Base::Grid { width, .. } => y * width + x,
            _ => x,
        }
    }

    pub fn base_distance(&self, i: usize, j: usize) -> u64 {
        self.block().base.distance(i, j)
    }

    pub fn id(&self, v: HoroballVertex) -> Result<usize> {
        if v.depth < 1 || v.depth > self.depth || v.base >= self.base_len() {
            return Err(Error::Config(format!(
                "vertex ({}, {}) is outside the horoball ({} base points, depth {})",
                v.base,
                v.depth,
                self.base_len(),
                self.depth
            )));
        }
        Ok(self.block().vertex(v.depth, v.base))
    }

    pub fn vertex(&self, id: usize) -> HoroballVertex {
        match self.graph.locate(id) {
            Loc::Horo { level, point, .. } => HoroballVertex::new(point, level),
            Loc::Element(_) => unreachable!("standalone horoballs have no element vertices"),
        }
    }

    pub fn is_edge(&self, u: HoroballVertex, v: HoroballVertex) -> Result<bool> {
        self.id(u)?;
        self.id(v)?;
        Ok(if u.base == v.base {
            u.depth.abs_diff(v.depth) == 1
        } else {
            u.depth == v.depth && self.base_distance(u.base, v.base) <= radius_at(u.depth)
        })
    }

    /// Distances from `u` to every vertex, indexed by [`Horoball::id`].
    pub fn distances_from(&self, u: HoroballVertex) -> Result<Vec<u32>> {
        let s = self.id(u)?;
        Ok(self.graph.search(&[s]).dist)
    }

    pub fn distance_bfs(&self, u: HoroballVertex, v: HoroballVertex) -> Result<u64> {
        self.check_depth(u, v)?;
        let d = self.distances_from(u)?[self.id(v)?];
        debug_assert_ne!(d, UNREACHED);
        Ok(d as u64)
    }

    pub fn distance_normal_form(&self, u: HoroballVertex, v: HoroballVertex) -> Result<u64> {
        self.id(u)?;
        self.id(v)?;
        normal_form_distance(self.base_distance(u.base, v.base), u.depth, v.depth, self.depth)
    }

    fn check_depth(&self, u: HoroballVertex, v: HoroballVertex) -> Result<()> {
        let need = required_depth(self.base_distance(u.base, v.base)).max(u.depth).max(v.depth);
        if self.depth < need {
            return Err(Error::InsufficientDepth { required: need, actual: self.depth });
        }
        Ok(())
    }

    fn block(&self) -> &Block {
        &self.graph.blocks[0]
    }
}

pub(crate) fn all_pairs(adj: &[Vec<usize>]) -> Result<Vec<u32>> {
    let n = adj.len();
    let mut dist = vec![UNREACHED; n * n];
    for s in 0..n {
        let row = &mut dist[s * n..(s + 1) * n];
        row[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for &w in &adj[v] {
                if w >= n {
                    return Err(Error::Config(format!("adjacency refers to vertex {w} of {n}")));
                }
                if row[w] == UNREACHED {
                    row[w] = row[v] + 1;
                    q.push_back(w);
                }
            }
        }
        if row.contains(&UNREACHED) {
            return Err(Error::Config("horoball base graph is not connected".into()));
        }
    }
    Ok(dist)
}
