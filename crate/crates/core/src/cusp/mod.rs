//! Combinatorial horoballs and truncated Groves–Manning cusped Cayley graphs.

mod engine;
mod geodesic;
mod graph;
mod horoball;

pub use geodesic::{estimate_delta, sample_geodesics, sample_geodesics_from, DeltaEstimate, GeodesicPath, GeodesicSample};
pub use graph::{graph_required_depth, CosetHoroball, CuspConfig, CuspedGraph, GraphSummary, VertexLabel, EXPLICIT_BASE_LIMIT};
pub use horoball::{normal_form_distance, required_depth, BaseGraph, EdgeCounts, Horoball, HoroballVertex};
