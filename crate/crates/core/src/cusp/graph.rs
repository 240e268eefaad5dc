//! Truncated cusped Cayley graphs: a Cayley ball with a combinatorial horoball
//! glued along every peripheral coset that meets it.

use std::collections::{HashMap, HashSet};
use std::io::Write;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::Serialize;

use super::engine::{ceil_log2, trace, Base, Block, Layered, Loc, UNREACHED};
use super::horoball::{all_pairs, EdgeCounts};
use crate::error::{Error, Result};
use crate::group::{enumerate_ball, DisplayWord, Group, GroupElement, RatMatrix, Symbol};

/// Coset pieces larger than this are refused unless they are paths.
pub const EXPLICIT_BASE_LIMIT: usize = 4096;

#[derive(Clone, Debug, Serialize)]
pub struct CuspConfig {
    /// Word-length radius of the Cayley ball.
    pub radius: usize,
    /// Horoball truncation depth.
    pub depth: u32,
    /// Peripheral ids to attach; `None` attaches every declared peripheral.
    pub peripherals: Option<Vec<String>>,
    /// Additionally include every element of each attached peripheral of
    /// length ≤ this in its own generators.
    pub peripheral_radius: usize,
    pub max_elements: Option<usize>,
    pub max_vertices: Option<usize>,
}

impl CuspConfig {
    pub fn new(radius: usize, depth: u32) -> Self {
        CuspConfig { radius, depth, peripherals: None, peripheral_radius: 0, max_elements: None, max_vertices: None }
    }

    pub fn with_peripheral_radius(mut self, r: usize) -> Self {
        self.peripheral_radius = r;
        self
    }
}

/// One horoball of the graph: a connected piece of a peripheral coset.
#[derive(Clone, Debug, Serialize)]
pub struct CosetHoroball {
    pub peripheral: usize,
    /// Element indices of the base points, in base order.
    pub members: Vec<usize>,
    /// Path-shaped pieces use the segment metric; others carry a table.
    pub path_shaped: bool,
    pub diameter: u64,
}

/// Vertex description in terms of the group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct VertexLabel {
    /// The element vertex directly below (itself for element vertices).
    pub element: usize,
    /// 1 for element vertices, the horoball level otherwise.
    pub depth: u32,
    pub horoball: Option<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct GraphSummary {
    pub radius: usize,
    pub depth: u32,
    pub ball_elements: usize,
    pub extension_elements: usize,
    pub horoballs: usize,
    pub vertices: usize,
    pub edges: EdgeCounts,
    pub partial: bool,
    pub max_coset_diameter: u64,
    pub required_depth: u32,
}

#[derive(Debug)]
pub struct CuspedGraph {
    pub config: CuspConfig,
    /// Ball elements in shortlex order, followed by peripheral extension elements.
    pub elements: Vec<GroupElement>,
    pub ball_len: usize,
    /// The ball was cut short by the element budget.
    pub partial: bool,
    /// Radius actually covered completely.
    pub complete_radius: usize,
    pub horoballs: Vec<CosetHoroball>,
    pub attached: Vec<usize>,
    index: HashMap<RatMatrix, usize>,
    graph: Layered,
    root: OnceLock<Vec<u32>>,
}

/// Depth the truncation needs so that no path inside a piece of diameter
/// `diam` is shortened (`3 + ⌈log₂ diam⌉`).
pub fn graph_required_depth(diam: u64) -> u32 {
    if diam == 0 {
        1
    } else {
        3 + ceil_log2(diam)
    }
}

impl CuspedGraph {
    pub fn build(group: &Group, config: CuspConfig) -> Result<Self> {
        if config.depth < 1 {
            return Err(Error::Config("cusp depth must be at least 1".into()));
        }
        let attached: Vec<usize> = match &config.peripherals {
            None => (0..group.peripherals.len()).collect(),
            Some(ids) => ids
                .iter()
                .map(|id| {
                    group.peripheral_index(id).ok_or_else(|| Error::Config(format!("unknown peripheral `{id}`")))
                })
                .collect::<Result<_>>()?,
        };
        let ball = enumerate_ball(group, config.radius, config.max_elements)?;
        let (partial, complete_radius, ball_len) = (ball.partial, ball.radius, ball.len());
        Self::assemble(group, config, attached, ball.elements, ball_len, partial, complete_radius)
    }

    /// Cusped graph over an explicit element set (identity first), e.g. the
    /// prefixes of a long word. Horoballs are glued along the connected
    /// coset pieces the set contains.
    pub fn build_on_elements(group: &Group, config: CuspConfig, elements: Vec<GroupElement>) -> Result<Self> {
        if elements.first().is_none_or(|e| !e.matrix.is_identity()) {
            return Err(Error::Config("element set must start with the identity".into()));
        }
        let mut seen = HashSet::new();
        if !elements.iter().all(|e| seen.insert(e.matrix.clone())) {
            return Err(Error::Config("element set has repeated elements".into()));
        }
        let attached = (0..group.peripherals.len()).collect();
        let n = elements.len();
        let mut config = config;
        config.peripheral_radius = 0;
        Self::assemble(group, config, attached, elements, n, false, 0)
    }

    fn assemble(
        group: &Group,
        config: CuspConfig,
        attached: Vec<usize>,
        mut elements: Vec<GroupElement>,
        ball_len: usize,
        partial: bool,
        complete_radius: usize,
    ) -> Result<Self> {
        if config.depth < 1 {
            return Err(Error::Config("cusp depth must be at least 1".into()));
        }
        let mut index: HashMap<RatMatrix, usize> =
            elements.iter().enumerate().map(|(i, e)| (e.matrix.clone(), i)).collect();

        if config.peripheral_radius > 0 {
            for &p in &attached {
                for e in peripheral_ball(group, &group.peripherals[p].generators, config.peripheral_radius) {
                    if !index.contains_key(&e.matrix) {
                        index.insert(e.matrix.clone(), elements.len());
                        elements.push(e);
                    }
                }
            }
        }

        let symbols = group.gens.symbols();
        let cayley: Vec<Vec<(u32, Symbol)>> = elements
            .par_iter()
            .map(|e| {
                symbols
                    .iter()
                    .filter_map(|&s| index.get(&e.matrix.mul(group.symbol_matrix(s))).map(|&w| (w as u32, s)))
                    .collect()
            })
            .collect();

        let mut horoballs = Vec::new();
        for &p in &attached {
            let marked: HashSet<usize> = group.peripherals[p].generators.iter().copied().collect();
            let mut seen = vec![false; elements.len()];
            for start in 0..elements.len() {
                if seen[start] {
                    continue;
                }
                let mut comp = vec![start];
                seen[start] = true;
                let mut k = 0;
                while k < comp.len() {
                    let v = comp[k];
                    k += 1;
                    for &(w, s) in &cayley[v] {
                        if marked.contains(&s.generator()) && !seen[w as usize] {
                            seen[w as usize] = true;
                            comp.push(w as usize);
                        }
                    }
                }
                comp.sort_unstable();
                horoballs.push(coset_piece(p, comp, &cayley, &marked)?);
            }
        }

        let max_diam = horoballs.iter().map(|h| h.0.diameter).max().unwrap_or(0);
        let required = graph_required_depth(max_diam);
        if config.depth < required {
            return Err(Error::InsufficientDepth { required, actual: config.depth });
        }

        let mut offset = elements.len();
        let mut blocks = Vec::with_capacity(horoballs.len());
        let mut infos = Vec::with_capacity(horoballs.len());
        for (info, base) in horoballs {
            let block = Block {
                base,
                members: info.members.iter().map(|&m| m as u32).collect(),
                offset,
                first_level: 2,
                depth: config.depth,
            };
            offset += block.vertex_count();
            if let Some(limit) = config.max_vertices {
                if offset > limit {
                    return Err(Error::MemoryBudget(format!(
                        "cusped graph needs more than {limit} vertices (radius {}, depth {})",
                        config.radius, config.depth
                    )));
                }
            }
            blocks.push(block);
            infos.push(info);
        }
        if let Some(limit) = config.max_vertices {
            if offset > limit {
                return Err(Error::MemoryBudget(format!("{offset} vertices exceed the budget of {limit}")));
            }
        }
        let graph = Layered::new(cayley, blocks);
        Ok(CuspedGraph {
            config,
            elements,
            ball_len,
            partial,
            complete_radius,
            horoballs: infos,
            attached,
            index,
            graph,
            root: OnceLock::new(),
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.graph.total
    }

    pub fn edge_counts(&self) -> EdgeCounts {
        let (cayley, vertical, horizontal) = self.graph.edge_counts();
        EdgeCounts { cayley, vertical, horizontal }
    }

    pub fn summary(&self) -> GraphSummary {
        let max_coset_diameter = self.horoballs.iter().map(|h| h.diameter).max().unwrap_or(0);
        GraphSummary {
            radius: self.config.radius,
            depth: self.config.depth,
            ball_elements: self.ball_len,
            extension_elements: self.elements.len() - self.ball_len,
            horoballs: self.horoballs.len(),
            vertices: self.vertex_count(),
            edges: self.edge_counts(),
            partial: self.partial,
            max_coset_diameter,
            required_depth: graph_required_depth(max_coset_diameter),
        }
    }

    pub fn identity_vertex(&self) -> usize {
        0
    }

    pub fn element_index(&self, m: &RatMatrix) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Vertex of `g`, or an error naming the radius that would contain it.
    pub fn vertex_of(&self, g: &GroupElement) -> Result<usize> {
        self.element_index(&g.matrix).ok_or(Error::OutsideBall {
            length: g.length(),
            required_radius: g.length(),
        })
    }

    /// Vertex `(element, depth)` for an element of a horoball base.
    pub fn horoball_vertex(&self, horoball: usize, point: usize, depth: u32) -> Result<usize> {
        let blk = self
            .graph
            .blocks
            .get(horoball)
            .ok_or_else(|| Error::Config(format!("no horoball {horoball}")))?;
        if point >= blk.base.len() || depth < 1 || depth > blk.depth {
            return Err(Error::Config(format!("({point}, {depth}) is not a vertex of horoball {horoball}")));
        }
        Ok(if depth == 1 { blk.members[point] as usize } else { blk.vertex(depth, point) })
    }

    pub fn label(&self, v: usize) -> VertexLabel {
        match self.graph.locate(v) {
            Loc::Element(e) => VertexLabel { element: e, depth: 1, horoball: None },
            Loc::Horo { block, level, point } => VertexLabel {
                element: self.graph.blocks[block].members[point] as usize,
                depth: level,
                horoball: Some(block),
            },
        }
    }

    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        self.graph.neighbours(v)
    }

    pub fn is_edge(&self, u: usize, v: usize) -> bool {
        self.graph.neighbours(u).contains(&v)
    }

    /// Distances from a set of vertices to all vertices.
    pub fn distances_from(&self, sources: &[usize]) -> Vec<u32> {
        self.graph.search(sources).dist
    }

    /// A shortest path from `source` to every vertex, by parent pointers.
    pub fn shortest_path_tree(&self, source: usize) -> (Vec<u32>, Vec<u32>) {
        let s = self.graph.search(&[source]);
        (s.dist, s.parent)
    }

    pub fn shortest_path(&self, u: usize, v: usize) -> Vec<usize> {
        let s = self.graph.search(&[u]);
        trace(&s.parent, v)
    }

    pub fn distance(&self, u: usize, v: usize) -> u32 {
        self.graph.search(&[u]).dist[v]
    }

    /// Distances from the identity vertex, computed once.
    pub fn root_distances(&self) -> &[u32] {
        self.root.get_or_init(|| self.graph.search(&[0]).dist)
    }

    /// Shortest-path distance from the identity to `g`.
    pub fn cusp_distance(&self, g: &GroupElement) -> Result<u32> {
        let v = self.vertex_of(g)?;
        let d = self.root_distances()[v];
        debug_assert_ne!(d, UNREACHED);
        Ok(d)
    }

    pub fn element(&self, i: usize) -> &GroupElement {
        &self.elements[i]
    }

    /// Writes `u v` lines (u < v) for every edge, and a JSON manifest
    /// mapping vertex ids to `(word, depth)`.
    pub fn export(&self, group: &Group, adjacency: &mut impl Write, manifest: &mut impl Write) -> Result<()> {
        let io = |e| Error::io("graph export", e);
        for v in 0..self.vertex_count() {
            let mut nb = self.graph.neighbours(v);
            nb.sort_unstable();
            nb.dedup();
            for w in nb.into_iter().filter(|&w| w > v) {
                writeln!(adjacency, "{v} {w}").map_err(io)?;
            }
        }
        #[derive(Serialize)]
        struct Entry {
            id: usize,
            word: String,
            depth: u32,
            #[serde(skip_serializing_if = "Option::is_none")]
            horoball: Option<usize>,
        }
        #[derive(Serialize)]
        struct Manifest<'a> {
            group: &'a str,
            summary: GraphSummary,
            vertices: Vec<Entry>,
        }
        let vertices = (0..self.vertex_count())
            .map(|v| {
                let l = self.label(v);
                Entry {
                    id: v,
                    word: DisplayWord(&group.gens, &self.elements[l.element].word).to_string(),
                    depth: l.depth,
                    horoball: l.horoball,
                }
            })
            .collect();
        let m = Manifest { group: &group.name, summary: self.summary(), vertices };
        serde_json::to_writer(&mut *manifest, &m)?;
        writeln!(manifest).map_err(io)?;
        Ok(())
    }
}

/// Elements of length ≤ `radius` in the marked generators.
fn peripheral_ball(group: &Group, generators: &[usize], radius: usize) -> Vec<GroupElement> {
    let symbols: Vec<Symbol> =
        generators.iter().flat_map(|&g| [Symbol::new(g, false), Symbol::new(g, true)]).collect();
    let mut seen: HashSet<RatMatrix> = HashSet::new();
    let id = group.identity();
    seen.insert(id.matrix.clone());
    let mut out = vec![id];
    let mut frontier = 0..1;
    for _ in 0..radius {
        let start = out.len();
        for i in frontier.clone() {
            for &s in &symbols {
                if out[i].word.last() == Some(&s.inverse()) {
                    continue;
                }
                let m = out[i].matrix.mul(group.symbol_matrix(s));
                if seen.insert(m.clone()) {
                    let mut word = out[i].word.clone();
                    word.push(s);
                    out.push(GroupElement { word, matrix: m });
                }
            }
        }
        frontier = start..out.len();
    }
    out
}

/// Classifies one coset piece and returns its base.
fn coset_piece(
    peripheral: usize,
    comp: Vec<usize>,
    cayley: &[Vec<(u32, Symbol)>],
    marked: &HashSet<usize>,
) -> Result<(CosetHoroball, Base)> {
    let n = comp.len();
    let local: HashMap<usize, usize> = comp.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let adj: Vec<Vec<usize>> = comp
        .iter()
        .map(|&v| {
            let mut nb: Vec<usize> = cayley[v]
                .iter()
                .filter(|(w, s)| marked.contains(&s.generator()) && *w as usize != v)
                .map(|(w, _)| local[&(*w as usize)])
                .collect();
            nb.sort_unstable();
            nb.dedup();
            nb
        })
        .collect();
    let edges: usize = adj.iter().map(Vec::len).sum::<usize>() / 2;
    let is_path = edges + 1 == n && adj.iter().all(|a| a.len() <= 2);
    if is_path {
        let mut order = Vec::with_capacity(n);
        let mut prev = usize::MAX;
        let mut cur = (0..n).find(|&i| adj[i].len() <= 1).unwrap_or(0);
        loop {
            order.push(comp[cur]);
            match adj[cur].iter().find(|&&w| w != prev) {
                Some(&next) if order.len() < n => {
                    prev = cur;
                    cur = next;
                }
                _ => break,
            }
        }
        let info = CosetHoroball { peripheral, members: order, path_shaped: true, diameter: n as u64 - 1 };
        return Ok((info, Base::Line { n }));
    }
    if n > EXPLICIT_BASE_LIMIT {
        return Err(Error::MemoryBudget(format!(
            "peripheral coset piece with {n} elements is not a path and exceeds {EXPLICIT_BASE_LIMIT}"
        )));
    }
    let dist = all_pairs(&adj)?;
    let diameter = dist.iter().copied().max().unwrap_or(0) as u64;
    let info = CosetHoroball { peripheral, members: comp, path_shaped: false, diameter };
    Ok((info, Base::Explicit { n, dist }))
}
