//! Thick/thin segmentation of cusped geodesics, boundary flags, the
//! three-piece norm field along a path and the contraction ratio κ.

mod certificate;
mod field;
mod flags;
mod segment;
mod tube;

pub use flags::{
    estimate_flag, exact_transport, local_transition, BoundaryFlags, FlagEstimate, Splitting, Toward,
};
pub use segment::{segment_path, Excursion, Phase, Segmentation, THIN_DEPTH};
pub use certificate::{
    contraction_certificate, peripheral_alpha, run_flow, AlphaChoice, AlphaSource, AscentCheck, ContractionCertificate,
    FlowReport, FlowRunConfig, FlowVerdict, PathSummary, SubmultiplicativityCheck, WorstPoint, KAPPA_TOL,
};
pub use field::{flow_domain, FlowConfig, FlowPath, Junction, LocalNorm, PathTrace, Piece, JUNCTION_TOL};
pub use tube::{tube_path, TubeConfig, TubePath};
