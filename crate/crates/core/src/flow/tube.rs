//! Long geodesics through deep excursions.
//!
//! A ball large enough to contain long paths with deep horoball excursions
//! is far out of reach, so instead a random reduced word is drawn that
//! alternates short non-peripheral syllables with long peripheral powers,
//! and the cusped graph is built on its prefixes only. When the generators
//! form a free basis and every peripheral is cyclic with syllable
//! membership, the non-peripheral edges between consecutive cosets are cut
//! edges, so a geodesic of this graph is a geodesic of the full cusped graph.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::cusp::{graph_required_depth, CuspConfig, CuspedGraph, GeodesicPath};
use crate::error::{Error, Result};
use crate::group::{DisplayWord, Group, GroupElement, Membership, Symbol};

#[derive(Clone, Debug, Serialize)]
pub struct TubeConfig {
    /// Minimum length of the returned geodesic.
    pub min_length: usize,
    /// Peripheral syllables have length `⌊2^{U·m}⌋`, `U` uniform on `[0,1]`.
    pub max_log2_syllable: u32,
    pub seed: u64,
}

#[derive(Debug)]
pub struct TubePath {
    pub word: String,
    pub graph: CuspedGraph,
    pub path: GeodesicPath,
    pub longest_syllable: usize,
}

fn check_tube_group(group: &Group) -> Result<(Vec<usize>, Vec<usize>)> {
    if !group.free_basis {
        return Err(Error::Unsupported("tube paths need the generators to be a free basis".into()));
    }
    let mut cusp_gens = Vec::new();
    for p in &group.peripherals {
        if p.generators.len() != 1 || p.membership != Membership::Syllable {
            return Err(Error::Unsupported(format!(
                "tube paths need cyclic peripherals with syllable membership; `{}` is not",
                p.id
            )));
        }
        cusp_gens.push(p.generators[0]);
    }
    let thick: Vec<usize> = (0..group.gens.rank()).filter(|g| !cusp_gens.contains(g)).collect();
    if thick.is_empty() || cusp_gens.is_empty() {
        return Err(Error::Unsupported("tube paths need both peripheral and non-peripheral generators".into()));
    }
    Ok((thick, cusp_gens))
}

fn push_syllable(word: &mut Vec<Symbol>, g: usize, n: usize, inverse: bool) {
    word.extend(std::iter::repeat_n(Symbol::new(g, inverse), n));
}

/// Rough cusped length of a syllable of `n` peripheral letters.
fn syllable_cost(n: usize) -> usize {
    if n <= 4 {
        n
    } else {
        2 * (usize::BITS - n.leading_zeros()) as usize
    }
}

pub fn tube_path(group: &Group, config: &TubeConfig) -> Result<TubePath> {
    let (thick, cusps) = check_tube_group(group)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut word: Vec<Symbol> = Vec::new();
    let mut estimate = 0;
    let mut longest = 1;
    for _attempt in 0..16 {
        while estimate < config.min_length + config.min_length / 4 + 4 {
            let g = thick[rng.random_range(0..thick.len())];
            let inv = rng.random_bool(0.5);
            let m = rng.random_range(1..=2);
            push_syllable(&mut word, g, m, inv);
            estimate += m;
            let c = cusps[rng.random_range(0..cusps.len())];
            let n = (2f64.powf(rng.random::<f64>() * config.max_log2_syllable as f64).floor() as usize).max(1);
            push_syllable(&mut word, c, n, rng.random_bool(0.5));
            longest = longest.max(n);
            estimate += syllable_cost(n) + 1;
        }
        let mut elements = vec![group.identity()];
        for (i, &s) in word.iter().enumerate() {
            let prev = &elements[i];
            elements.push(GroupElement { word: word[..=i].to_vec(), matrix: prev.matrix.mul(group.symbol_matrix(s)) });
        }
        let depth = graph_required_depth(longest as u64);
        let graph = CuspedGraph::build_on_elements(group, CuspConfig::new(0, depth), elements)?;
        let end = graph.vertex_of(&GroupElement { word: word.clone(), matrix: group.evaluate(&word) })?;
        let path = GeodesicPath::new(graph.shortest_path(graph.identity_vertex(), end));
        if path.length >= config.min_length {
            return Ok(TubePath { word: DisplayWord(&group.gens, &word).to_string(), graph, path, longest_syllable: longest });
        }
        estimate = path.length;
    }
    Err(Error::Config(format!("could not draw a tube path of length {}", config.min_length)))
}
