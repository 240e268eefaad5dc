use std::collections::HashMap;

use rayon::prelude::*;

use super::{Group, GroupElement, RatMatrix, Symbol};
use crate::error::{Error, Result};

/// Word-metric ball, one element per distinct matrix, in shortlex order.
///
/// Because the first word reaching a matrix is shortlex-minimal, the stored
/// word of every element is a geodesic and its length is `|g|_S`.
#[derive(Clone, Debug)]
pub struct Ball {
    pub radius: usize,
    pub elements: Vec<GroupElement>,
    /// `(parent, s)` with `elements[i] = elements[parent] * s`.
    pub parent: Vec<Option<(usize, Symbol)>>,
    /// Set when the element budget stopped enumeration early.
    pub partial: bool,
    sphere_starts: Vec<usize>,
    index: HashMap<RatMatrix, usize>,
}

impl Ball {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn lookup(&self, m: &RatMatrix) -> Option<usize> {
        self.index.get(m).copied()
    }

    /// Elements of word length exactly `l` (empty beyond the radius).
    pub fn sphere(&self, l: usize) -> &[GroupElement] {
        if l + 1 >= self.sphere_starts.len() {
            return &[];
        }
        &self.elements[self.sphere_starts[l]..self.sphere_starts[l + 1]]
    }

    pub fn sphere_range(&self, l: usize) -> std::ops::Range<usize> {
        if l + 1 >= self.sphere_starts.len() {
            return 0..0;
        }
        self.sphere_starts[l]..self.sphere_starts[l + 1]
    }

    /// Sizes of the spheres 0..=radius.
    pub fn sphere_sizes(&self) -> Vec<usize> {
        self.sphere_starts.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Enumerates the ball of the given radius, deduplicating by exact matrix.
///
/// `max_elements` is a memory budget: when exceeded the ball is returned
/// with `partial = true` and contains only complete spheres.
pub fn enumerate_ball(group: &Group, radius: usize, max_elements: Option<usize>) -> Result<Ball> {
    if !group.faithful {
        return Err(Error::Config(format!(
            "group `{}` is not declared faithful; exact matrices cannot serve as the word problem oracle",
            group.name
        )));
    }
    let symbols = group.gens.symbols();
    let id = group.identity();
    let mut index = HashMap::new();
    index.insert(id.matrix.clone(), 0usize);
    let mut elements = vec![id];
    let mut parent = vec![None];
    let mut sphere_starts = vec![0usize, 1];
    let mut partial = false;

    for _ in 0..radius {
        let lo = sphere_starts[sphere_starts.len() - 2];
        let hi = sphere_starts[sphere_starts.len() - 1];
        let candidates: Vec<Vec<(usize, Symbol, RatMatrix)>> = (lo..hi)
            .into_par_iter()
            .map(|i| {
                let g = &elements[i];
                let last = g.word.last().copied();
                symbols
                    .iter()
                    .filter(|&&s| last != Some(s.inverse()))
                    .map(|&s| (i, s, g.matrix.mul(group.symbol_matrix(s))))
                    .collect()
            })
            .collect();
        let before = elements.len();
        for (p, s, m) in candidates.into_iter().flatten() {
            if index.contains_key(&m) {
                continue;
            }
            let mut word = elements[p].word.clone();
            word.push(s);
            index.insert(m.clone(), elements.len());
            elements.push(GroupElement { word, matrix: m });
            parent.push(Some((p, s)));
        }
        if let Some(budget) = max_elements {
            if elements.len() > budget {
                for e in elements.drain(before..) {
                    index.remove(&e.matrix);
                }
                parent.truncate(before);
                partial = true;
                break;
            }
        }
        sphere_starts.push(elements.len());
    }
    let reached = sphere_starts.len() - 2;
    Ok(Ball { radius: reached, elements, parent, partial, sphere_starts, index })
}
