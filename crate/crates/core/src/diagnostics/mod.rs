//! Singular-value diagnostics of representations over cusped graphs.

mod dynamics;
mod envelope;
mod limit_set;
mod perturb;
mod profile;
mod qi;
mod translation;
mod unipotent;

pub use envelope::{fit_envelope, Direction, FLAT_SLOPE_TOL, FitMethod, FitResult, SlopeConstraint};
pub use profile::{
    build_gap_profile, element_row, fit_lower_envelope, fit_upper_envelope, morse_regularity, profile_graph, GapProfile,
    ProfileRow, RowFilter,
};
pub use limit_set::{limit_set_sample, limit_set_sample_sphere, transversality, transversality_report, LimitSample, LimitSetSample, TransversalityReport, FLAG_TOLERANCE};
pub use qi::{quasi_isometry_check, QiReport};
pub use dynamics::{
    divergence_monitor, exact_power, log_spaced, power_stacks, strong_dynamics_probe, strong_dynamics_probe_planes,
    DivergenceReport, DivergenceVerdict, ProbeConfig, ProbeReport, ProbeVerdict, BOUNDED_RISE, GROWTH_THRESHOLD,
};
pub use translation::{translation_length, LambdaCheck, TranslationReport};
pub use unipotent::{
    jordan_gap_check, log_r_function, nilpotent_exp, rational_growth_probe, unipotent_growth_laws, weakly_unipotent_check,
    GrowthLawConfig, GrowthLawReport, GrowthPoint, LowerLaw, RationalProbeReport, RationalSample, UnipotentEntry,
    UnipotentReport, UNIPOTENT_TOL,
};
pub use perturb::{
    battery_constants, check_peripheral_conjugacy, perturbation_rerun, unipotent_rank_profile, BatteryConstants,
    ComparativeReport, Perturbation, RerunDiagnostic, RerunSettings,
};
