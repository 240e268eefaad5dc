//! Seeded geodesic sampling and slim-triangle estimates on cusped graphs.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::engine::{trace, UNREACHED};
use super::graph::CuspedGraph;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GeodesicPath {
    pub vertices: Vec<usize>,
    pub length: usize,
}

impl GeodesicPath {
    pub fn new(vertices: Vec<usize>) -> Self {
        let length = vertices.len().saturating_sub(1);
        GeodesicPath { vertices, length }
    }

    pub fn start(&self) -> usize {
        self.vertices[0]
    }

    pub fn end(&self) -> usize {
        *self.vertices.last().expect("paths are nonempty")
    }

    pub fn reversed(&self) -> Self {
        let mut v = self.vertices.clone();
        v.reverse();
        GeodesicPath::new(v)
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct GeodesicSample {
    pub paths: Vec<GeodesicPath>,
    pub requested: usize,
    pub min_length: usize,
    /// Some requested path could not reach `min_length`; the longest found
    /// was returned in its place or the path was dropped.
    pub short: bool,
    pub seed: u64,
}

/// Attempts per path before settling for a shorter one.
const ATTEMPTS: usize = 8;

/// `count` shortest paths with length ≥ `min_length` between random vertices.
/// Endpoints are drawn from `pool` (all vertices when empty).
pub fn sample_geodesics_from(
    graph: &CuspedGraph,
    pool: &[usize],
    count: usize,
    min_length: usize,
    seed: u64,
) -> GeodesicSample {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.vertex_count();
    let pick = |rng: &mut ChaCha8Rng| if pool.is_empty() { rng.random_range(0..n) } else { pool[rng.random_range(0..pool.len())] };
    let mut paths = Vec::with_capacity(count);
    let mut short = false;
    for _ in 0..count {
        let mut best: Option<(u32, usize, Vec<u32>)> = None;
        let mut done = false;
        for _ in 0..ATTEMPTS {
            let s = pick(&mut rng);
            let (dist, parent) = graph.shortest_path_tree(s);
            let far: Vec<usize> = if pool.is_empty() {
                (0..n).filter(|&v| dist[v] != UNREACHED && dist[v] as usize >= min_length).collect()
            } else {
                pool.iter().copied().filter(|&v| dist[v] != UNREACHED && dist[v] as usize >= min_length).collect()
            };
            if !far.is_empty() {
                let t = far[rng.random_range(0..far.len())];
                paths.push(GeodesicPath::new(trace(&parent, t)));
                done = true;
                break;
            }
            let (t, d) = (0..n)
                .filter(|&v| dist[v] != UNREACHED && (pool.is_empty() || pool.contains(&v)))
                .map(|v| (v, dist[v]))
                .max_by_key(|&(v, d)| (d, std::cmp::Reverse(v)))
                .unwrap_or((s, 0));
            if best.as_ref().is_none_or(|b| d > b.0) {
                best = Some((d, t, parent));
            }
        }
        if !done {
            short = true;
            if let Some((_, t, parent)) = best {
                paths.push(GeodesicPath::new(trace(&parent, t)));
            }
        }
    }
    GeodesicSample { paths, requested: count, min_length, short, seed }
}

pub fn sample_geodesics(graph: &CuspedGraph, count: usize, min_length: usize, seed: u64) -> GeodesicSample {
    sample_geodesics_from(graph, &[], count, min_length, seed)
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaEstimate {
    /// Largest slimness defect seen; a lower bound for the hyperbolicity constant.
    pub delta: f64,
    pub samples: usize,
    /// Running maximum after each triangle.
    pub running_max: Vec<u32>,
    pub seed: u64,
}

/// Max over sampled triangles and over points `p` on each side of the
/// distance from `p` to the union of the other two sides.
pub fn estimate_delta(graph: &CuspedGraph, samples: usize, seed: u64) -> DeltaEstimate {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = graph.vertex_count();
    let corners: Vec<[usize; 3]> =
        (0..samples).map(|_| [rng.random_range(0..n), rng.random_range(0..n), rng.random_range(0..n)]).collect();
    let defects: Vec<u32> = corners.par_iter().map(|&c| triangle_defect(graph, c)).collect();
    let mut running_max = Vec::with_capacity(samples);
    let mut m = 0;
    for d in defects {
        m = m.max(d);
        running_max.push(m);
    }
    DeltaEstimate { delta: m as f64, samples, running_max, seed }
}

pub(crate) fn triangle_defect(graph: &CuspedGraph, [x, y, z]: [usize; 3]) -> u32 {
    let (dx, px) = graph.shortest_path_tree(x);
    if dx[y] == UNREACHED || dx[z] == UNREACHED {
        return 0;
    }
    let (_, py) = graph.shortest_path_tree(y);
    let sides = [trace(&px, y), trace(&py, z), trace(&px, z)];
    let mut worst = 0;
    for i in 0..3 {
        let others: Vec<usize> = sides.iter().enumerate().filter(|&(j, _)| j != i).flat_map(|(_, s)| s.iter().copied()).collect();
        let d = graph.distances_from(&others);
        worst = sides[i].iter().map(|&p| d[p]).fold(worst, u32::max);
    }
    worst
}
