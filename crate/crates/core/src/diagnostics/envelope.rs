//! Exact two-variable envelope fits `y ≥ αx − β` / `y ≤ αx + β`.
//!
//! For a fixed slope the best intercept is forced by the extreme point, so
//! the problem reduces to a concave (resp. convex) piecewise-linear function
//! of the slope whose breakpoints are the slopes of the lower (resp. upper)
//! convex hull. Among feasible lines we take the one that is tightest at the
//! mean abscissa, breaking ties toward the larger (lower) or smaller
//! (upper) slope.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    /// `y ≥ αx − β` on every point.
    Lower,
    /// `y ≤ αx + β` on every point.
    Upper,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SlopeConstraint {
    Free,
    NonNegative,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    LpEnvelope,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FitResult {
    pub alpha: f64,
    pub beta: f64,
    pub direction: Direction,
    pub violations: usize,
    pub method: FitMethod,
    pub points: usize,
    pub x_range: [f64; 2],
    /// Slope of the same fit restricted to the upper half of the abscissa
    /// range; `None` when that half has fewer than two distinct abscissae.
    pub far_alpha: Option<f64>,
}

impl FitResult {
    /// Re-checks the fitted inequality on every point.
    /// The envelope stops growing over the far half of the tested range.
    pub fn is_flat(&self, tol: f64) -> bool {
        self.far_alpha.is_some_and(|a| a.abs() <= tol)
    }

    pub fn count_violations(&self, xs: &[f64], ys: &[f64]) -> usize {
        xs.iter().zip(ys).filter(|&(&x, &y)| !satisfies(self.direction, self.alpha, self.beta, x, y)).count()
    }
}

fn satisfies(direction: Direction, alpha: f64, beta: f64, x: f64, y: f64) -> bool {
    match direction {
        Direction::Lower => alpha * x - y <= beta,
        Direction::Upper => y - alpha * x <= beta,
    }
}

fn cross(o: (f64, f64), a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - o.0) * (b.1 - o.1) - (a.1 - o.1) * (b.0 - o.0)
}

/// Slopes of the lower hull edges (upper hull when `upper`).
fn hull_slopes(xs: &[f64], ys: &[f64], upper: bool) -> Vec<f64> {
    let mut pts: Vec<(f64, f64)> = xs.iter().zip(ys).map(|(&x, &y)| (x, if upper { -y } else { y })).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup_by(|a, b| a.0 == b.0);
    let mut hull: Vec<(f64, f64)> = Vec::new();
    for p in pts {
        while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0 {
            hull.pop();
        }
        hull.push(p);
    }
    hull.windows(2)
        .map(|w| {
            let s = (w[1].1 - w[0].1) / (w[1].0 - w[0].0);
            if upper {
                -s
            } else {
                s
            }
        })
        .collect()
}

/// Default tolerance for [`FitResult::is_flat`].
pub const FLAT_SLOPE_TOL: f64 = 0.05;

/// Envelope of a point cloud; rejects clouds whose abscissae are all equal.
pub fn fit_envelope(xs: &[f64], ys: &[f64], direction: Direction, slope: SlopeConstraint) -> Result<FitResult> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch { expected: xs.len(), got: ys.len() });
    }
    if xs.iter().chain(ys).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateProfile("non-finite coordinate".into()));
    }
    let (lo, hi) = x_bounds(xs);
    if xs.is_empty() || lo == hi {
        return Err(Error::DegenerateProfile(format!("{} points, all at x = {lo}", xs.len())));
    }
    let (alpha, beta) = solve(xs, ys, direction, slope);
    let mid = 0.5 * (lo + hi);
    let (fx, fy): (Vec<f64>, Vec<f64>) = xs.iter().zip(ys).filter(|p| *p.0 >= mid).map(|(&x, &y)| (x, y)).unzip();
    let (flo, fhi) = x_bounds(&fx);
    let far_alpha = (flo < fhi).then(|| solve(&fx, &fy, direction, slope).0);
    let mut fit = FitResult {
        alpha,
        beta,
        direction,
        violations: 0,
        method: FitMethod::LpEnvelope,
        points: xs.len(),
        x_range: [lo, hi],
        far_alpha,
    };
    fit.violations = fit.count_violations(xs, ys);
    Ok(fit)
}

fn x_bounds(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &x| (l.min(x), h.max(x)))
}

fn solve(xs: &[f64], ys: &[f64], direction: Direction, slope: SlopeConstraint) -> (f64, f64) {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    let intercept = |a: f64| -> f64 {
        match direction {
            Direction::Lower => xs.iter().zip(ys).map(|(&x, &y)| a * x - y).fold(f64::NEG_INFINITY, f64::max),
            Direction::Upper => xs.iter().zip(ys).map(|(&x, &y)| y - a * x).fold(f64::NEG_INFINITY, f64::max),
        }
    };
    // value of the envelope line at the mean abscissa; lower maximizes, upper minimizes
    let score = |a: f64| -> f64 {
        let b = intercept(a);
        match direction {
            Direction::Lower => a * mean - b,
            Direction::Upper => -(a * mean + b),
        }
    };
    let mut candidates = hull_slopes(xs, ys, direction == Direction::Upper);
    if slope == SlopeConstraint::NonNegative {
        candidates.retain(|&a| a >= 0.0);
        candidates.push(0.0);
    }
    let scale = ys.iter().fold(1.0f64, |m, y| m.max(y.abs())) * 1e-12;
    let mut best: Option<(f64, f64)> = None;
    for a in candidates {
        let s = score(a);
        best = match best {
            None => Some((a, s)),
            Some((ba, bs)) => {
                let better = s > bs + scale
                    || ((s - bs).abs() <= scale
                        && match direction {
                            Direction::Lower => a > ba,
                            Direction::Upper => a < ba,
                        });
                if better {
                    Some((a, s))
                } else {
                    Some((ba, bs))
                }
            }
        };
    }
    let (alpha, _) = best.expect("at least one candidate");
    (alpha, intercept(alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn collinear_points() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 2.0 * x - 1.0).collect();
        let f = fit_envelope(&xs, &ys, Direction::Lower, SlopeConstraint::NonNegative).unwrap();
        assert_eq!((f.alpha, f.beta, f.violations), (2.0, 1.0, 0));
        let u = fit_envelope(&xs, &ys, Direction::Upper, SlopeConstraint::NonNegative).unwrap();
        assert_eq!((u.alpha, u.beta, u.violations), (2.0, -1.0, 0));
    }

    #[test]
    fn degenerate_rejected() {
        assert!(matches!(
            fit_envelope(&[0.0], &[0.0], Direction::Lower, SlopeConstraint::Free),
            Err(Error::DegenerateProfile(_))
        ));
        assert!(fit_envelope(&[3.0, 3.0], &[0.0, 1.0], Direction::Upper, SlopeConstraint::Free).is_err());
    }

    #[test]
    fn bounded_data_gives_zero_slope() {
        let xs: Vec<f64> = (0..20).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| (x * 1.3).sin()).collect();
        let f = fit_envelope(&xs, &ys, Direction::Lower, SlopeConstraint::NonNegative).unwrap();
        assert!(f.alpha < 0.2);
        let decreasing: Vec<f64> = xs.iter().map(|x| -x).collect();
        let g = fit_envelope(&xs, &decreasing, Direction::Lower, SlopeConstraint::NonNegative).unwrap();
        assert_eq!(g.alpha, 0.0);
        assert_eq!(g.violations, 0);
        let h = fit_envelope(&xs, &decreasing, Direction::Lower, SlopeConstraint::Free).unwrap();
        assert_eq!(h.alpha, -1.0);
    }

    #[test]
    fn far_slope_separates_bounded_from_linear() {
        let xs: Vec<f64> = (0..40).map(f64::from).collect();
        let sat: Vec<f64> = xs.iter().map(|x| 1.0 - (-x).exp()).collect();
        let f = fit_envelope(&xs, &sat, Direction::Lower, SlopeConstraint::NonNegative).unwrap();
        assert!(f.alpha > 0.0 && f.is_flat(FLAT_SLOPE_TOL), "{f:?}");
        let lin: Vec<f64> = xs.iter().map(|x| 0.3 * x).collect();
        let g = fit_envelope(&xs, &lin, Direction::Lower, SlopeConstraint::NonNegative).unwrap();
        assert!((g.far_alpha.unwrap() - 0.3).abs() < 1e-12 && !g.is_flat(FLAT_SLOPE_TOL));
        let two = fit_envelope(&[0.0, 1.0], &[0.0, 1.0], Direction::Lower, SlopeConstraint::Free).unwrap();
        assert_eq!(two.far_alpha, None);
    }

    /// Brute-force oracle: every line through two points, kept if feasible.
    fn brute(xs: &[f64], ys: &[f64], dir: Direction) -> f64 {
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        let mut best = f64::NEG_INFINITY;
        for i in 0..xs.len() {
            for j in 0..xs.len() {
                if xs[i] == xs[j] {
                    continue;
                }
                let a = (ys[j] - ys[i]) / (xs[j] - xs[i]);
                let s = match dir {
                    Direction::Lower => {
                        let b = xs.iter().zip(ys).map(|(x, y)| a * x - y).fold(f64::NEG_INFINITY, f64::max);
                        a * mean - b
                    }
                    Direction::Upper => {
                        let b = xs.iter().zip(ys).map(|(x, y)| y - a * x).fold(f64::NEG_INFINITY, f64::max);
                        -(a * mean + b)
                    }
                };
                best = best.max(s);
            }
        }
        best
    }

    proptest! {
        #[test]
        fn envelope_is_optimal_and_feasible(pts in prop::collection::vec((0i32..40, -50i32..50), 2..30)) {
            let xs: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
            let ys: Vec<f64> = pts.iter().map(|p| p.1 as f64 / 3.0).collect();
            prop_assume!(xs.iter().any(|&x| x != xs[0]));
            let mean = xs.iter().sum::<f64>() / xs.len() as f64;
            for dir in [Direction::Lower, Direction::Upper] {
                let f = fit_envelope(&xs, &ys, dir, SlopeConstraint::Free).unwrap();
                prop_assert_eq!(f.violations, 0);
                let s = match dir {
                    Direction::Lower => f.alpha * mean - f.beta,
                    Direction::Upper => -(f.alpha * mean + f.beta),
                };
                prop_assert!((s - brute(&xs, &ys, dir)).abs() < 1e-9);
            }
        }
    }
}
