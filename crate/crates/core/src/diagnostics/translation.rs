//! Stable translation length in the cusped graph.

use serde::Serialize;

use crate::cusp::CuspedGraph;
use crate::error::{Error, Result};
use crate::group::{Group, GroupElement, Representation};
use crate::linalg::CartanStack;

#[derive(Clone, Debug, Serialize)]
pub struct TranslationReport {
    /// `(n, d_X(γⁿx₀, x₀)/n)`.
    pub ratios: Vec<(u64, f64)>,
    /// Ratio at the largest feasible `n`.
    pub estimate: f64,
    /// `|ratio(N) − ratio(⌈N/2⌉)|`.
    pub error_bar: f64,
    pub feasible_n: u64,
    /// Some `γⁿ` with `n ≤ n_max` fell outside the graph.
    pub truncated: bool,
    pub lambda_check: Option<LambdaCheck>,
}

/// `α·ℓ_X(γ) ≤ log λ_k/λ_{k+1}(ρ(γ))`, evaluated at both ends of the error bar.
#[derive(Clone, Debug, Serialize)]
pub struct LambdaCheck {
    pub k: usize,
    pub alpha: f64,
    pub lambda_gap: f64,
    pub lhs_low: f64,
    pub lhs_high: f64,
    /// Holds at the low end (`α(ℓ − err) ≤ gap`); holding at `lhs_high` too is stronger.
    pub consistent: bool,
}

pub fn translation_length(group: &Group, graph: &CuspedGraph, g: &GroupElement, n_max: u64) -> Result<TranslationReport> {
    if n_max == 0 {
        return Err(Error::Config("n_max must be at least 1".into()));
    }
    let mut ratios = Vec::new();
    let mut truncated = false;
    let mut power = group.identity();
    for n in 1..=n_max {
        power = group.multiply(&power, g);
        match graph.cusp_distance(&power) {
            Ok(d) => ratios.push((n, d as f64 / n as f64)),
            Err(Error::OutsideBall { .. }) => {
                truncated = true;
                break;
            }
            Err(e) => return Err(e),
        }
    }
    let Some(&(feasible_n, estimate)) = ratios.last() else {
        return Err(Error::OutsideBall { length: g.length(), required_radius: g.length() });
    };
    let half = feasible_n.div_ceil(2);
    let error_bar = (estimate - ratios[half as usize - 1].1).abs();
    Ok(TranslationReport { ratios, estimate, error_bar, feasible_n, truncated, lambda_check: None })
}

impl TranslationReport {
    pub fn with_lambda_check(mut self, rep: &Representation, g: &GroupElement, alpha: f64, k: usize) -> Result<Self> {
        let stack = CartanStack::from_exact(&rep.image(g), &rep.basis_scale)?;
        let lambda_gap = stack.lambda_gap(k)?;
        let lhs_low = alpha * (self.estimate - self.error_bar).max(0.0);
        let lhs_high = alpha * (self.estimate + self.error_bar);
        self.lambda_check = Some(LambdaCheck { k, alpha, lambda_gap, lhs_low, lhs_high, consistent: lhs_low <= lambda_gap + 1e-9 });
        Ok(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cusp::CuspConfig;
    use crate::group::builtin::{pingpong_group, pingpong_sym};

    #[test]
    fn generator_without_cusps_translates_by_one() {
        let base = pingpong_group();
        let free = Group::new("free", base.gens.names.clone(), base.matrices.clone(), vec![], true, true).unwrap();
        let graph = CuspedGraph::build(&free, CuspConfig::new(6, 1)).unwrap();
        let a = free.parse_element("a").unwrap();
        let r = translation_length(&free, &graph, &a, 6).unwrap();
        assert_eq!((r.estimate, r.error_bar, r.feasible_n, r.truncated), (1.0, 0.0, 6, false));
        let r = translation_length(&free, &graph, &a, 9).unwrap();
        assert!(r.truncated && r.feasible_n == 6);
    }

    #[test]
    fn identity_translates_by_zero() {
        let g = pingpong_group();
        let graph = CuspedGraph::build(&g, CuspConfig::new(2, 5)).unwrap();
        let r = translation_length(&g, &graph, &g.identity(), 5).unwrap();
        assert_eq!(r.estimate, 0.0);
    }

    #[test]
    fn parabolic_translation_tends_to_zero() {
        let g = pingpong_group();
        let graph = CuspedGraph::build(&g, CuspConfig::new(1, 13).with_peripheral_radius(512)).unwrap();
        let b = g.parse_element("b").unwrap();
        let r = translation_length(&g, &graph, &b, 512).unwrap();
        assert!(!r.truncated);
        assert!(r.estimate < 0.05, "{}", r.estimate);
        // oracle: the cusp distance of bⁿ itself
        for &(n, ratio) in r.ratios.iter().step_by(37) {
            let p = g.power(&b.word, n as usize).unwrap();
            assert_eq!(ratio, graph.cusp_distance(&p).unwrap() as f64 / n as f64);
        }
    }

    #[test]
    fn lambda_check_on_loxodromic() {
        let (g, rep) = pingpong_sym(2);
        let graph = CuspedGraph::build(&g, CuspConfig::new(8, 7)).unwrap();
        let ab = g.parse_element("a b").unwrap();
        let r = translation_length(&g, &graph, &ab, 4).unwrap().with_lambda_check(&rep, &ab, 0.1, 1).unwrap();
        let c = r.lambda_check.unwrap();
        assert!(c.lambda_gap > 0.0 && c.consistent, "{c:?}");
    }
}
