//! Run configuration, battery orchestration, reports and report comparison.

mod compare;
mod config;
mod run;

pub use compare::{compare, load_report, parse_report, ConstantChange, ReportDiff, VerdictChange};
pub use config::{
    Battery, CuspSettings, FlowSettings, GrowthSettings, InputSpec, LimitSetSettings, RunConfig, Tolerances,
    RUN_SCHEMA_VERSION,
};
pub use run::{
    init_threads, run, strip_timestamp, BatteryResult, Constant, InputSummary, Provenance, Report, Status, Timestamp, ToolInfo,
    Verdict, REPORT_SCHEMA_VERSION, THREADS_VAR, TOOL_NAME,
};
