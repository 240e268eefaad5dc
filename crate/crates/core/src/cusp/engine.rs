//! Layered breadth-first search shared by standalone horoballs and cusped graphs.
//!
//! Vertex ids: element vertices first (`0..elements`), then one contiguous
//! range per horoball block laid out level by level. Horizontal neighbours are
//! never stored; they are enumerated from the base metric while the search
//! runs, with skip lists over the still-unvisited base points.

use std::collections::VecDeque;

use crate::group::Symbol;

pub(crate) const UNREACHED: u32 = u32::MAX;

#[derive(Clone, Debug)]
pub(crate) enum Base {
    /// Points `0..n` of a path graph.
    Line { n: usize },
    /// `width × height` rectangle of ℤ² with the L¹ metric; point `y*width + x`.
    Grid { width: usize, height: usize },
    /// Arbitrary connected base given by its all-pairs distance table.
    Explicit { n: usize, dist: Vec<u32> },
}

impl Base {
    pub fn len(&self) -> usize {
        match self {
            Base::Line { n } | Base::Explicit { n, .. } => *n,
            Base::Grid { width, height } => width * height,
        }
    }

    pub fn distance(&self, i: usize, j: usize) -> u64 {
        match self {
            Base::Line { .. } => i.abs_diff(j) as u64,
            Base::Grid { width, .. } => {
                let (xi, yi) = (i % width, i / width);
                let (xj, yj) = (j % width, j / width);
                (xi.abs_diff(xj) + yi.abs_diff(yj)) as u64
            }
            Base::Explicit { n, dist } => dist[i * n + j] as u64,
        }
    }


    /// Unordered pairs of distinct points at distance ≤ r.
    pub fn pairs_within(&self, r: u64) -> u64 {
        match self {
            Base::Line { n } => {
                let n = *n as u64;
                (1..=r.min(n.saturating_sub(1))).map(|d| n - d).sum()
            }
            Base::Grid { width, height } => {
                let (w, h) = (*width as i64, *height as i64);
                let r = r.min((w + h) as u64) as i64;
                let mut total = 0i64;
                for dy in 0..h.min(r + 1) {
                    let max_dx = (r - dy).min(w - 1);
                    for dx in -max_dx..=max_dx {
                        if dy == 0 && dx <= 0 {
                            continue;
                        }
                        total += (w - dx.abs()) * (h - dy);
                    }
                }
                total as u64
            }
            Base::Explicit { n, dist } => {
                let mut c = 0;
                for i in 0..*n {
                    for j in i + 1..*n {
                        if dist[i * n + j] as u64 <= r {
                            c += 1;
                        }
                    }
                }
                c
            }
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct Block {
    pub base: Base,
    /// Element vertex glued below each base point (empty for standalone horoballs).
    pub members: Vec<u32>,
    pub offset: usize,
    pub first_level: u32,
    pub depth: u32,
}

impl Block {
    pub fn levels(&self) -> usize {
        (self.depth + 1).saturating_sub(self.first_level) as usize
    }

    pub fn vertex_count(&self) -> usize {
        self.levels() * self.base.len()
    }

    pub fn vertex(&self, level: u32, point: usize) -> usize {
        self.offset + (level - self.first_level) as usize * self.base.len() + point
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Loc {
    Element(usize),
    Horo { block: usize, level: u32, point: usize },
}

/// Smallest unvisited index ≥ i, with path halving.
struct Skip {
    next: Vec<u32>,
}

impl Skip {
    fn new(n: usize) -> Self {
        Skip { next: (0..=n as u32).collect() }
    }

    fn find(&mut self, mut i: usize) -> usize {
        while self.next[i] as usize != i {
            let up = self.next[self.next[i] as usize];
            self.next[i] = up;
            i = up as usize;
        }
        i
    }

    fn remove(&mut self, i: usize) {
        self.next[i] = i as u32 + 1;
    }
}

enum LevelState {
    Flat(Skip),
    Grid { rows: Skip, cols: Vec<Skip>, remaining: Vec<u32> },
}

pub(crate) struct Search {
    pub dist: Vec<u32>,
    pub parent: Vec<u32>,
}

#[derive(Clone, Debug, Default)]
pub(crate) struct Layered {
    pub elements: usize,
    adj_start: Vec<u32>,
    adj: Vec<(u32, Symbol)>,
    up_start: Vec<u32>,
    up: Vec<(u32, u32)>,
    pub blocks: Vec<Block>,
    pub total: usize,
}

impl Layered {
    /// `cayley[v]` lists `(neighbour, symbol)`; `blocks` must have offsets
    /// already assigned contiguously after the element vertices.
    pub fn new(cayley: Vec<Vec<(u32, Symbol)>>, blocks: Vec<Block>) -> Self {
        let elements = cayley.len();
        let mut adj_start = Vec::with_capacity(elements + 1);
        let mut adj = Vec::new();
        adj_start.push(0);
        for nb in cayley {
            adj.extend(nb);
            adj_start.push(adj.len() as u32);
        }
        let mut ups: Vec<Vec<(u32, u32)>> = vec![Vec::new(); elements];
        for (b, block) in blocks.iter().enumerate() {
            for (i, &m) in block.members.iter().enumerate() {
                ups[m as usize].push((b as u32, i as u32));
            }
        }
        let mut up_start = Vec::with_capacity(elements + 1);
        let mut up = Vec::new();
        up_start.push(0);
        for u in ups {
            up.extend(u);
            up_start.push(up.len() as u32);
        }
        let total = blocks.last().map_or(elements, |b| b.offset + b.vertex_count());
        Layered { elements, adj_start, adj, up_start, up, blocks, total }
    }

    pub fn cayley_neighbours(&self, v: usize) -> &[(u32, Symbol)] {
        &self.adj[self.adj_start[v] as usize..self.adj_start[v + 1] as usize]
    }

    pub fn memberships(&self, v: usize) -> &[(u32, u32)] {
        &self.up[self.up_start[v] as usize..self.up_start[v + 1] as usize]
    }

    pub fn locate(&self, v: usize) -> Loc {
        if v < self.elements {
            return Loc::Element(v);
        }
        let b = self.blocks.partition_point(|blk| blk.offset <= v) - 1;
        let blk = &self.blocks[b];
        let n = blk.base.len();
        let r = v - blk.offset;
        Loc::Horo { block: b, level: blk.first_level + (r / n) as u32, point: r % n }
    }

    /// Undirected edge counts `(cayley, vertical, horizontal)`.
    pub fn edge_counts(&self) -> (u64, u64, u64) {
        let cayley = (0..self.elements)
            .map(|v| {
                let mut nb: Vec<u32> =
                    self.cayley_neighbours(v).iter().map(|(w, _)| *w).filter(|&w| w as usize > v).collect();
                nb.sort_unstable();
                nb.dedup();
                nb.len() as u64
            })
            .sum();
        let mut vertical = 0u64;
        let mut horizontal = 0u64;
        for blk in &self.blocks {
            let n = blk.base.len() as u64;
            let glued = if blk.members.is_empty() { 0 } else { 1 };
            vertical += n * (blk.levels() as u64 - 1 + glued);
            for level in blk.first_level..=blk.depth {
                horizontal += blk.base.pairs_within(radius_at(level));
            }
        }
        (cayley, vertical, horizontal)
    }

    /// All neighbours of `v`, materialized. Intended for export and checks,
    /// not for searches.
    pub fn neighbours(&self, v: usize) -> Vec<usize> {
        let mut out = Vec::new();
        match self.locate(v) {
            Loc::Element(e) => {
                out.extend(self.cayley_neighbours(e).iter().map(|(w, _)| *w as usize));
                for &(b, i) in self.memberships(e) {
                    let blk = &self.blocks[b as usize];
                    out.push(blk.vertex(blk.first_level, i as usize));
                }
            }
            Loc::Horo { block, level, point } => {
                let blk = &self.blocks[block];
                if level > blk.first_level {
                    out.push(blk.vertex(level - 1, point));
                } else if !blk.members.is_empty() {
                    out.push(blk.members[point] as usize);
                }
                if level < blk.depth {
                    out.push(blk.vertex(level + 1, point));
                }
                let r = radius_at(level);
                for j in 0..blk.base.len() {
                    if j != point && blk.base.distance(point, j) <= r {
                        out.push(blk.vertex(level, j));
                    }
                }
            }
        }
        out
    }

    /// Multi-source breadth-first search over the whole graph.
    pub fn search(&self, sources: &[usize]) -> Search {
        let mut dist = vec![UNREACHED; self.total];
        let mut parent = vec![UNREACHED; self.total];
        let mut states: Vec<Vec<LevelState>> = self
            .blocks
            .iter()
            .map(|blk| {
                (0..blk.levels())
                    .map(|_| match blk.base {
                        Base::Grid { width, height } => LevelState::Grid {
                            rows: Skip::new(height),
                            cols: (0..height).map(|_| Skip::new(width)).collect(),
                            remaining: vec![width as u32; height],
                        },
                        _ => LevelState::Flat(Skip::new(blk.base.len())),
                    })
                    .collect()
            })
            .collect();
        let mut queue = VecDeque::new();

        let mark = |v: usize, states: &mut Vec<Vec<LevelState>>| {
            if let Loc::Horo { block, level, point } = self.locate(v) {
                let blk = &self.blocks[block];
                match &mut states[block][(level - blk.first_level) as usize] {
                    LevelState::Flat(s) => s.remove(point),
                    LevelState::Grid { rows, cols, remaining } => {
                        let Base::Grid { width, .. } = blk.base else { unreachable!() };
                        let (x, y) = (point % width, point / width);
                        cols[y].remove(x);
                        remaining[y] -= 1;
                        if remaining[y] == 0 {
                            rows.remove(y);
                        }
                    }
                }
            }
        };

        for &s in sources {
            if dist[s] == UNREACHED {
                dist[s] = 0;
                mark(s, &mut states);
                queue.push_back(s);
            }
        }

        let mut found: Vec<usize> = Vec::new();
        while let Some(v) = queue.pop_front() {
            let dv = dist[v];
            found.clear();
            match self.locate(v) {
                Loc::Element(e) => {
                    for &(w, _) in self.cayley_neighbours(e) {
                        found.push(w as usize);
                    }
                    for &(b, i) in self.memberships(e) {
                        let blk = &self.blocks[b as usize];
                        found.push(blk.vertex(blk.first_level, i as usize));
                    }
                    found.retain(|&w| dist[w] == UNREACHED);
                }
                Loc::Horo { block, level, point } => {
                    let blk = &self.blocks[block];
                    if level > blk.first_level {
                        found.push(blk.vertex(level - 1, point));
                    } else if !blk.members.is_empty() {
                        found.push(blk.members[point] as usize);
                    }
                    if level < blk.depth {
                        found.push(blk.vertex(level + 1, point));
                    }
                    found.retain(|&w| dist[w] == UNREACHED);
                    let r = radius_at(level);
                    let li = (level - blk.first_level) as usize;
                    match (&blk.base, &mut states[block][li]) {
                        (Base::Line { n }, LevelState::Flat(s)) => {
                            let r = r.min(*n as u64) as usize;
                            let hi = (point + r).min(n - 1);
                            let mut j = s.find(point.saturating_sub(r));
                            while j <= hi {
                                found.push(blk.vertex(level, j));
                                j = s.find(j + 1);
                            }
                        }
                        (Base::Explicit { n, dist: table }, LevelState::Flat(s)) => {
                            let mut j = s.find(0);
                            while j < *n {
                                if table[point * n + j] as u64 <= r {
                                    found.push(blk.vertex(level, j));
                                }
                                j = s.find(j + 1);
                            }
                        }
                        (Base::Grid { width, height }, LevelState::Grid { rows, cols, .. }) => {
                            let (w, h) = (*width, *height);
                            let r = r.min((w + h) as u64) as usize;
                            let (x, y) = (point % w, point / w);
                            let y_hi = (y + r).min(h - 1);
                            let mut row = rows.find(y.saturating_sub(r));
                            while row <= y_hi {
                                let span = r - row.abs_diff(y);
                                let x_hi = (x + span).min(w - 1);
                                let mut col = cols[row].find(x.saturating_sub(span));
                                while col <= x_hi {
                                    found.push(blk.vertex(level, row * w + col));
                                    col = cols[row].find(col + 1);
                                }
                                row = rows.find(row + 1);
                            }
                        }
                        _ => unreachable!("level state matches base kind"),
                    }
                }
            }
            // Horizontal candidates come straight from the skip lists and are
            // removed from them here, together with the vertical ones.
            for &w in &found {
                if dist[w] == UNREACHED {
                    dist[w] = dv + 1;
                    parent[w] = v as u32;
                    mark(w, &mut states);
                    queue.push_back(w);
                }
            }
        }
        Search { dist, parent }
    }
}

/// Horizontal reach `2^{level−1}` at a level, saturating for very deep levels.
pub(crate) fn radius_at(level: u32) -> u64 {
    if level == 0 {
        0
    } else if level > 63 {
        u64::MAX
    } else {
        1u64 << (level - 1)
    }
}

pub(crate) fn ceil_log2(d: u64) -> u32 {
    if d <= 1 {
        0
    } else {
        64 - (d - 1).leading_zeros()
    }
}

/// Walks parent pointers from `target` back to a source.
pub(crate) fn trace(parent: &[u32], target: usize) -> Vec<usize> {
    let mut path = vec![target];
    let mut v = target;
    while parent[v] != UNREACHED {
        v = parent[v] as usize;
        path.push(v);
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;

    fn standalone(base: Base, depth: u32) -> Layered {
        let block = Block { base, members: vec![], offset: 0, first_level: 1, depth };
        Layered::new(vec![], vec![block])
    }

    /// Plain BFS over materialized adjacency, as an oracle for the skip-list search.
    fn naive(g: &Layered, s: usize) -> Vec<u32> {
        let mut dist = vec![UNREACHED; g.total];
        dist[s] = 0;
        let mut q = VecDeque::from([s]);
        while let Some(v) = q.pop_front() {
            for w in g.neighbours(v) {
                if dist[w] == UNREACHED {
                    dist[w] = dist[v] + 1;
                    q.push_back(w);
                }
            }
        }
        dist
    }

    #[test]
    fn skip_search_matches_naive_bfs() {
        for base in [Base::Line { n: 23 }, Base::Grid { width: 7, height: 5 }] {
            let g = standalone(base, 5);
            for s in [0, 3, g.total - 1] {
                assert_eq!(g.search(&[s]).dist, naive(&g, s));
            }
        }
        let n: usize = 6;
        // cycle of length 6
        let dist = (0..n * n).map(|k| (k / n).abs_diff(k % n).min(n - (k / n).abs_diff(k % n)) as u32).collect();
        let g = standalone(Base::Explicit { n, dist }, 4);
        assert_eq!(g.search(&[2]).dist, naive(&g, 2));
    }

    #[test]
    fn parents_trace_shortest_paths() {
        let g = standalone(Base::Line { n: 40 }, 7);
        let s = g.search(&[0]);
        for t in [5, 39, g.total - 3] {
            let p = trace(&s.parent, t);
            assert_eq!(p.len() as u32 - 1, s.dist[t]);
            for w in p.windows(2) {
                assert!(g.neighbours(w[0]).contains(&w[1]));
            }
        }
    }

    #[test]
    fn pair_counts_match_enumeration() {
        for base in [Base::Line { n: 9 }, Base::Grid { width: 4, height: 3 }] {
            for r in [0, 1, 2, 3, 8] {
                let n = base.len();
                let brute = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).filter(|&(i, j)| base.distance(i, j) <= r).count();
                assert_eq!(base.pairs_within(r), brute as u64);
            }
        }
    }

    #[test]
    fn log2_ceiling() {
        assert_eq!(ceil_log2(1), 0);
        assert_eq!(ceil_log2(2), 1);
        assert_eq!(ceil_log2(3), 2);
        assert_eq!(ceil_log2(256), 8);
        assert_eq!(ceil_log2(257), 9);
    }
}
