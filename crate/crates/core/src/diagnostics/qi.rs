//! Affine comparison of cusp distance with symmetric-space orbit distance.

use serde::Serialize;

use super::envelope::{fit_envelope, Direction, FitResult, SlopeConstraint};
use super::profile::GapProfile;
use crate::error::Result;

#[derive(Clone, Debug, Serialize)]
pub struct QiReport {
    /// `d_sym ≥ α·d_X − β`.
    pub lower: FitResult,
    /// `d_sym ≤ α'·d_X + β'`.
    pub upper: FitResult,
    /// `K` with `d_X/K − C ≤ d_sym ≤ K·d_X + C`; `None` when the lower slope is 0.
    pub multiplicative: Option<f64>,
    pub additive: Option<f64>,
    pub rows: usize,
    /// Rows violating `log μ₁/μ_d ≤ √d · d_sym` (relative slack 1e−9).
    pub spread_violations: usize,
    /// Largest `log(μ₁/μ_d) / d_sym` seen; at most `√d`.
    pub max_spread_ratio: f64,
}

pub fn quasi_isometry_check(profile: &GapProfile) -> Result<QiReport> {
    let (x, y): (Vec<f64>, Vec<f64>) =
        profile.rows.iter().map(|r| (r.cusp_distance as f64, r.symmetric_distance)).unzip();
    let lower = fit_envelope(&x, &y, Direction::Lower, SlopeConstraint::NonNegative)?;
    let upper = fit_envelope(&x, &y, Direction::Upper, SlopeConstraint::NonNegative)?;
    let (multiplicative, additive) = if lower.alpha > 0.0 {
        let k = upper.alpha.max(1.0 / lower.alpha);
        (Some(k), Some(upper.beta.max(lower.beta / lower.alpha).max(0.0)))
    } else {
        (None, None)
    };
    let root_d = (profile.dim as f64).sqrt();
    let mut spread_violations = 0;
    let mut max_spread_ratio: f64 = 0.0;
    for r in &profile.rows {
        if r.log_spread > root_d * r.symmetric_distance * (1.0 + 1e-9) + 1e-12 {
            spread_violations += 1;
        }
        if r.symmetric_distance > 0.0 {
            max_spread_ratio = max_spread_ratio.max(r.log_spread / r.symmetric_distance);
        }
    }
    Ok(QiReport { lower, upper, multiplicative, additive, rows: profile.rows.len(), spread_violations, max_spread_ratio })
}
