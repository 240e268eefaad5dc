//! Battery orchestration and the persistent report.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::config::{Battery, RunConfig};
use crate::cusp::{estimate_delta, CuspConfig, CuspedGraph};
use crate::diagnostics::{
    divergence_monitor, fit_lower_envelope, limit_set_sample_sphere, log_spaced, morse_regularity, power_stacks,
    profile_graph, quasi_isometry_check, weakly_unipotent_check, FitResult, GapProfile, RowFilter, FLAG_TOLERANCE,
    UNIPOTENT_TOL,
};
use crate::error::{Error, Result};
use crate::flow::{run_flow, FlowReport, FlowRunConfig, FlowVerdict, JUNCTION_TOL, KAPPA_TOL};
use crate::group::{enumerate_ball, Group, Representation};

pub const REPORT_SCHEMA_VERSION: u32 = 1;
pub const TOOL_NAME: &str = "relanosov";
/// Environment variable holding the worker thread count.
pub const THREADS_VAR: &str = "RELANOSOV_THREADS";

/// A fitted or measured number, with how it was obtained and the range of
/// the variable it was measured over.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constant {
    pub value: f64,
    pub method: String,
    pub over: String,
    pub range: [f64; 2],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub value: String,
    pub over: String,
    pub range: [f64; 2],
    pub tolerance: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Status {
    Ok,
    Failed,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BatteryResult {
    pub battery: Battery,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub constants: BTreeMap<String, Constant>,
    pub verdicts: BTreeMap<String, Verdict>,
    /// Elements or samples realising the reported extremes.
    pub witnesses: BTreeMap<String, Value>,
    pub details: Value,
}

impl BatteryResult {
    fn new(battery: Battery) -> Self {
        BatteryResult {
            battery,
            status: Status::Ok,
            error: None,
            constants: BTreeMap::new(),
            verdicts: BTreeMap::new(),
            witnesses: BTreeMap::new(),
            details: Value::Null,
        }
    }

    fn fail(&mut self, msg: impl Into<String>) {
        self.status = Status::Failed;
        self.error = Some(msg.into());
    }

    fn constant(&mut self, key: impl Into<String>, value: f64, method: &str, over: &str, range: [f64; 2]) {
        self.constants.insert(key.into(), Constant { value, method: method.into(), over: over.into(), range });
    }

    fn verdict(&mut self, key: impl Into<String>, value: &str, over: &str, range: [f64; 2], tolerance: f64) {
        self.verdicts.insert(key.into(), Verdict { value: value.into(), over: over.into(), range, tolerance });
    }

    fn fit(&mut self, key: &str, fit: &FitResult, over: &str, flat_tol: f64) {
        self.constant(format!("{key}.alpha"), fit.alpha, "lp-envelope slope", over, fit.x_range);
        self.constant(format!("{key}.beta"), fit.beta, "lp-envelope intercept", over, fit.x_range);
        let v = if fit.alpha > 0.0 && !fit.is_flat(flat_tol) { "growing" } else { "flat" };
        self.verdict(key, v, over, fit.x_range, flat_tol);
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ToolInfo {
    pub name: String,
    pub version: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InputSummary {
    pub group: String,
    pub generators: Vec<String>,
    pub peripherals: Vec<String>,
    pub representation: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub threads: usize,
    pub threads_variable: String,
    pub batteries_run: Vec<Battery>,
}

/// The only part of a report that differs between identical runs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Timestamp {
    pub started_unix: u64,
    pub runtime_seconds: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: ToolInfo,
    pub config: RunConfig,
    pub input: InputSummary,
    pub provenance: Provenance,
    pub status: Status,
    pub batteries: Vec<BatteryResult>,
    /// Files written next to `report.json`, relative to the output directory.
    pub artifacts: Vec<String>,
    pub timestamp: Timestamp,
}

impl Report {
    pub fn battery(&self, b: Battery) -> Option<&BatteryResult> {
        self.batteries.iter().find(|r| r.battery == b)
    }

    /// 0 when every battery succeeded, 3 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self.status {
            Status::Ok => 0,
            Status::Failed => 3,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Sizes the global worker pool from `RELANOSOV_THREADS` (default: the
/// available parallelism) and returns the thread count in use.
pub fn init_threads() -> Result<usize> {
    let threads = match std::env::var(THREADS_VAR) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => n,
            _ => return Err(Error::Config(format!("{THREADS_VAR} must be a positive integer, got `{v}`"))),
        },
        Err(_) => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    // a pool built earlier in the process keeps its size
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(rayon::current_num_threads())
}

/// Report JSON with the `timestamp` field removed.
pub fn strip_timestamp(report_json: &str) -> Result<String> {
    let mut v: Value = serde_json::from_str(report_json)?;
    if let Value::Object(m) = &mut v {
        m.remove("timestamp");
    }
    Ok(serde_json::to_string_pretty(&v)?)
}

struct Outputs {
    dir: Option<PathBuf>,
    written: Vec<String>,
}

impl Outputs {
    fn write(&mut self, name: &str, f: impl FnOnce(&mut BufWriter<File>) -> Result<()>) -> Result<()> {
        let Some(dir) = &self.dir else { return Ok(()) };
        let path = dir.join(name);
        let file = File::create(&path).map_err(|e| Error::io(&path, e))?;
        let mut w = BufWriter::new(file);
        f(&mut w)?;
        w.flush().map_err(|e| Error::io(&path, e))?;
        self.written.push(name.to_string());
        Ok(())
    }
}

fn io_at(name: &str) -> impl Fn(std::io::Error) -> Error + '_ {
    move |e| Error::io(name, e)
}

struct State<'a> {
    cfg: &'a RunConfig,
    group: &'a Group,
    rep: &'a Representation,
    graph: Option<CuspedGraph>,
    profile: Option<GapProfile>,
    out: Outputs,
}

/// Runs the scheduled batteries and writes the report and side tables to
/// `config.output` when set. Invalid configuration or input is an error;
/// a failing battery only marks the report failed.
pub fn run(config: &RunConfig) -> Result<Report> {
    let started = Instant::now();
    let started_unix = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    config.validate()?;
    let (group, rep) = config.load_input()?;
    if let Some(dir) = &config.output {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let schedule = config.schedule();
    let mut st = State {
        cfg: config,
        group: &group,
        rep: &rep,
        graph: None,
        profile: None,
        out: Outputs { dir: config.output.clone(), written: vec![] },
    };
    let mut results: Vec<BatteryResult> = Vec::new();
    for &b in &schedule {
        let mut res = BatteryResult::new(b);
        let missing: Vec<&str> = b
            .prerequisites()
            .iter()
            .filter(|p| results.iter().any(|r| r.battery == **p && r.status == Status::Failed))
            .map(|p| p.name())
            .collect();
        if !missing.is_empty() {
            res.fail(format!("not run: prerequisite {} failed", missing.join(", ")));
        } else if let Err(e) = run_battery(&mut st, &mut res) {
            res.fail(e.to_string());
        }
        results.push(res);
    }
    let status = if results.iter().all(|r| r.status == Status::Ok) { Status::Ok } else { Status::Failed };
    let mut report = Report {
        schema_version: REPORT_SCHEMA_VERSION,
        tool: ToolInfo { name: TOOL_NAME.into(), version: env!("CARGO_PKG_VERSION").into() },
        config: config.clone(),
        input: InputSummary {
            group: group.name.clone(),
            generators: group.gens.names.clone(),
            peripherals: group.peripherals.iter().map(|p| p.id.clone()).collect(),
            representation: rep.name.clone(),
            dim: rep.dim,
        },
        provenance: Provenance {
            threads: rayon::current_num_threads(),
            threads_variable: THREADS_VAR.into(),
            batteries_run: schedule,
        },
        status,
        batteries: results,
        artifacts: vec![],
        timestamp: Timestamp { started_unix, runtime_seconds: 0.0 },
    };
    if let Some(dir) = &config.output {
        report.artifacts = st.out.written.clone();
        report.artifacts.push("report.json".into());
        report.timestamp.runtime_seconds = started.elapsed().as_secs_f64();
        let path = dir.join("report.json");
        std::fs::write(&path, report.to_json()?).map_err(|e| Error::io(&path, e))?;
    } else {
        report.timestamp.runtime_seconds = started.elapsed().as_secs_f64();
    }
    Ok(report)
}

fn run_battery(st: &mut State, res: &mut BatteryResult) -> Result<()> {
    match res.battery {
        Battery::Cusp => cusp_battery(st, res),
        Battery::Profile => profile_battery(st, res),
        Battery::Fit => fit_battery(st, res),
        Battery::LimitSet => limit_set_battery(st, res),
        Battery::Growth => growth_battery(st, res),
        Battery::Flow => flow_battery(st, res),
    }
}

fn cusp_battery(st: &mut State, res: &mut BatteryResult) -> Result<()> {
    let c = &st.cfg.cusp;
    let config = CuspConfig {
        radius: c.radius,
        depth: c.effective_depth(),
        peripherals: c.peripherals.clone(),
        peripheral_radius: c.peripheral_radius,
        max_elements: c.max_elements,
        max_vertices: None,
    };
    let graph = CuspedGraph::build(st.group, config)?;
    let summary = graph.summary();
    let delta = estimate_delta(&graph, c.delta_samples, st.cfg.seed);
    let vertices = [0.0, summary.vertices as f64];
    res.constant("delta", delta.delta, "max slimness defect over sampled geodesic triangles", "graph vertices", vertices);
    let radius = [0.0, graph.complete_radius as f64];
    res.verdict("ball", if graph.partial { "partial" } else { "complete" }, "word length", radius, 0.0);
    res.details = json!({ "graph": summary, "delta_samples": delta.samples, "delta_seed": delta.seed });
    if st.out.dir.is_some() {
        let (mut adjacency, mut manifest) = (Vec::new(), Vec::new());
        graph.export(st.group, &mut adjacency, &mut manifest)?;
        st.out.write("cusp_adjacency.txt", |w| w.write_all(&adjacency).map_err(io_at("cusp adjacency")))?;
        st.out.write("cusp_manifest.json", |w| w.write_all(&manifest).map_err(io_at("cusp manifest")))?;
    }
    st.graph = Some(graph);
    Ok(())
}

fn profile_battery(st: &mut State, res: &mut BatteryResult) -> Result<()> {
    let graph = st.graph.as_ref().ok_or_else(|| Error::Config("profile needs the cusp graph".into()))?;
    let profile = profile_graph(st.group, st.rep, graph)?;
    let dmax = profile.rows.iter().map(|r| r.cusp_distance).max().unwrap_or(0) as f64;
    let spread = profile.rows.iter().map(|r| r.log_spread).fold(0.0, f64::max);
    res.constant("max_log_spread", spread, "max log μ₁/μ_d over profile rows", "cusp distance", [0.0, dmax]);
    res.details = json!({
        "representation": profile.representation,
        "dim": profile.dim,
        "rows": profile.len(),
        "peripheral_rows": profile.rows_matching(RowFilter::Peripheral).count(),
        "skipped": profile.skipped,
    });
    st.out.write("profile.csv", |w| profile.write_csv(w))?;
    for &k in &st.cfg.k {
        let (xs, ys) = profile.gap_points(k, RowFilter::All)?;
        let per: Vec<bool> = profile.rows.iter().map(|r| r.peripheral.is_some()).collect();
        let name = format!("gap_vs_distance_k{k}.csv");
        st.out.write(&name, |w| {
            writeln!(w, "cusp_distance,mu_gap,peripheral").map_err(io_at("gap csv"))?;
            for ((x, y), p) in xs.iter().zip(&ys).zip(&per) {
                writeln!(w, "{x},{y:.12e},{}", *p as u8).map_err(io_at("gap csv"))?;
            }
            Ok(())
        })?;
    }
    st.profile = Some(profile);
    Ok(())
}

fn fit_battery(st: &mut State, res: &mut BatteryResult) -> Result<()> {
    let profile = st.profile.as_ref().ok_or_else(|| Error::Config("fit needs the gap profile".into()))?;
    let tol = st.cfg.tolerances.flat_slope;
    let mut details = serde_json::Map::new();
    for &k in &st.cfg.k {
        for (filter, tag) in [(RowFilter::All, "all"), (RowFilter::Peripheral, "peripheral")] {
            let lower = fit_lower_envelope(profile, k, filter)?;
            res.fit(&format!("lower_envelope.{tag}.k{k}"), &lower, "cusp distance", tol);
            let morse = morse_regularity(profile, k, filter)?;
            res.fit(&format!("morse.{tag}.k{k}"), &morse, "log μ₁/μ_d", tol);
            details.insert(format!("lower_envelope.{tag}.k{k}"), serde_json::to_value(&lower)?);
            details.insert(format!("morse.{tag}.k{k}"), serde_json::to_value(&morse)?);
        }
    }
    let qi = quasi_isometry_check(profile)?;
    res.fit("qi.lower", &qi.lower, "cusp distance", tol);
    res.fit("qi.upper", &qi.upper, "cusp distance", tol);
    if let (Some(m), Some(a)) = (qi.multiplicative, qi.additive) {
        res.constant("qi.multiplicative", m, "max of upper slope and inverse lower slope", "cusp distance", qi.lower.x_range);
        res.constant("qi.additive", a, "max of the envelope intercepts", "cusp distance", qi.lower.x_range);
    }
    details.insert("qi".into(), serde_json::to_value(&qi)?);
    res.details = Value::Object(details);
    Ok(())
}

fn limit_set_battery(st: &mut State, res: &mut BatteryResult) -> Result<()> {
    let shell = st.cfg.limit_set.shell;
    let ball = enumerate_ball(st.group, shell, st.cfg.cusp.max_elements)?;
    let range = [shell as f64, shell as f64];
    let mut details = serde_json::Map::new();
    for &k in &st.cfg.k {
        let sample = limit_set_sample_sphere(st.group, st.rep, &ball, shell, k)?;
        let key = format!("transversality.k{k}");
        match &sample.transversality {
            Some(t) => {
                res.constant(&key, t.minimum, "min σ_min[V|W] over flag-distinct sphere pairs", "word length", range);
                let v = if t.minimum > 0.0 { "positive" } else { "degenerate" };
                res.verdict(&key, v, "word length", range, FLAG_TOLERANCE);
                res.witnesses.insert(key.clone(), json!({ "pair": t.pair, "words": t.words }));
            }
            None => res.verdict(&key, "no-pairs", "word length", range, FLAG_TOLERANCE),
        }
        details.insert(
            format!("k{k}"),
            json!({
                "samples": sample.samples.len(),
                "dropped": sample.dropped,
                "transversality": sample.transversality,
                "diagnostic": sample.diagnostic,
            }),
        );
    }
    res.details = Value::Object(details);
    Ok(())
}

fn growth_battery(st: &mut State, res: &mut BatteryResult) -> Result<()> {
    let g = &st.cfg.growth;
    let ns = log_spaced(g.n_max, g.per_octave);
    let range = [ns[0] as f64, *ns.last().expect("n_max ≥ 4") as f64];
    let images = st.rep.generator_images();
    let mut details = serde_json::Map::new();
    for p in &st.group.peripherals {
        let mats: Vec<_> = p.generators.iter().map(|&i| images[i].clone()).collect();
        let unipotent = weakly_unipotent_check(&mats, UNIPOTENT_TOL)?;
        let v = if unipotent.weakly_unipotent { "weakly-unipotent" } else { "not-weakly-unipotent" };
        res.verdict(format!("unipotent.{}", p.id), v, "peripheral generators", [0.0, 0.0], UNIPOTENT_TOL);
        details.insert(format!("unipotent.{}", p.id), serde_json::to_value(&unipotent)?);
        for &i in &p.generators {
            let name = &st.group.gens.names[i];
            let stacks = power_stacks(st.rep, &images[i], &ns)?;
            for &k in &st.cfg.k {
                let d = divergence_monitor(&ns, &stacks, k)?;
                let key = format!("divergence.{}.{name}.k{k}", p.id);
                let v = serde_json::to_value(d.verdict)?;
                res.verdict(&key, v.as_str().unwrap_or_default(), "power n", range, d.growth_threshold);
                res.constant(
                    format!("{key}.growth"),
                    d.growth,
                    "far-half lower-envelope slope of the gap against ln n",
                    "power n",
                    range,
                );
                res.constant(format!("{key}.cap"), d.cap, "largest gap", "power n", range);
                details.insert(key, serde_json::to_value(&d)?);
            }
        }
    }
    res.details = Value::Object(details);
    Ok(())
}

fn flow_battery(st: &mut State, res: &mut BatteryResult) -> Result<()> {
    let f = &st.cfg.flow;
    let t = &st.cfg.tolerances;
    let mut details = serde_json::Map::new();
    let mut failures = Vec::new();
    for &k in &st.cfg.k {
        let cfg = FlowRunConfig {
            k,
            alpha: f.alpha,
            paths: f.paths,
            t_max: f.t_max,
            seed: st.cfg.seed,
            margin: f.margin,
            flag_tol: t.flag_convergence,
            transversality_floor: t.transversality_floor,
            max_log2_syllable: f.max_log2_syllable,
            traces: f.traces,
        };
        let report = run_flow(st.group, st.rep, &cfg)?;
        record_flow(res, &report, k, f.t_max);
        if let FlowVerdict::Failed { reason } = &report.verdict {
            failures.push(format!("k = {k}: {reason}"));
        }
        let name = format!("kappa_vs_t_k{k}.csv");
        st.out.write(&name, |w| {
            writeln!(w, "t,log_kappa,path").map_err(io_at("kappa csv"))?;
            for (p, s) in report.paths.iter().enumerate() {
                for (t, y) in s.log_kappa.iter().enumerate() {
                    writeln!(w, "{t},{y:.12e},{p}").map_err(io_at("kappa csv"))?;
                }
            }
            Ok(())
        })?;
        for (seed, trace) in &report.traces {
            st.out.write(&format!("flow_trace_k{k}_seed{seed}.json"), |w| {
                serde_json::to_writer(&mut *w, trace)?;
                writeln!(w).map_err(io_at("flow trace"))
            })?;
        }
        details.insert(format!("k{k}"), serde_json::to_value(&report)?);
    }
    res.details = Value::Object(details);
    if !failures.is_empty() {
        res.fail(failures.join("; "));
    }
    Ok(())
}

fn record_flow(res: &mut BatteryResult, r: &FlowReport, k: usize, t_max: usize) {
    let times = [0.0, t_max as f64];
    if let Some(a) = &r.alpha {
        let method = match &a.fit {
            Some(_) => "peripheral lower-envelope slope",
            None => "user supplied",
        };
        let range = a.fit.as_ref().map(|f| f.x_range).unwrap_or([0.0, 0.0]);
        res.constant(format!("alpha.k{k}"), a.value, method, "cusp distance", range);
    }
    let verdict = match &r.verdict {
        FlowVerdict::Contracting => "contracting",
        FlowVerdict::NotContracting { .. } => "not-contracting",
        FlowVerdict::Failed { .. } => "failed",
    };
    res.verdict(format!("contraction.k{k}"), verdict, "flow time", times, KAPPA_TOL);
    if let Some(c) = &r.certificate {
        res.constant(format!("rate.k{k}"), c.rate, "upper lp-envelope of ln κ(0,t), negated slope", "flow time", c.fit.x_range);
        res.constant(format!("constant.k{k}"), c.constant, "exp of the upper lp-envelope intercept", "flow time", c.fit.x_range);
        res.witnesses.insert(format!("worst.k{k}"), json!({ "path": r.paths.get(c.worst.path).map(|p| &p.word), "t": c.worst.t, "log_kappa": c.worst.log_kappa }));
    }
    if let Some(c) = &r.reversed {
        res.constant(format!("rate_reversed.k{k}"), c.rate, "upper lp-envelope on reversed paths, negated slope", "flow time", c.fit.x_range);
    }
    if r.paths.iter().all(|p| p.error.is_some()) {
        return;
    }
    let holds = |ok: bool| if ok { "holds" } else { "violated" };
    res.verdict(format!("kappa_zero.k{k}"), holds(r.kappa_zero_exact), "path start", [0.0, 0.0], 0.0);
    res.verdict(format!("submultiplicativity.k{k}"), holds(r.submultiplicativity.violations == 0), "flow time", times, KAPPA_TOL);
    res.constant(
        format!("submultiplicativity.k{k}.worst_excess"),
        r.submultiplicativity.worst_excess,
        "max ln κ(0,t+u) − ln κ(0,t) − ln κ(t,u)",
        "flow time",
        times,
    );
    res.verdict(format!("ascent_bound.k{k}"), holds(r.ascent.violations == 0), "excursion first third", times, KAPPA_TOL);
    res.constant(format!("ascent.k{k}.worst_excess"), r.ascent.worst_excess, "max ln κ(e,t) + αt on ascents", "excursion first third", times);
    res.verdict(format!("junctions.k{k}"), holds(r.max_junction_jump <= JUNCTION_TOL), "path time", times, JUNCTION_TOL);
    res.constant(format!("junctions.k{k}.max_jump"), r.max_junction_jump, "max relative Gram jump at piece boundaries", "path time", times);
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(builtin: &str, batteries: &[Battery]) -> RunConfig {
        let mut c = RunConfig::for_builtin(builtin);
        c.batteries = batteries.to_vec();
        c.cusp.radius = 3;
        c.cusp.delta_samples = 20;
        c.limit_set.shell = 4;
        c.growth.n_max = 1024;
        c.flow.paths = 2;
        c.flow.t_max = 12;
        c.flow.max_log2_syllable = 6;
        c
    }

    #[test]
    fn empty_selection_echoes_config_only() {
        let c = small("pingpong", &[]);
        let r = run(&c).unwrap();
        assert!(r.batteries.is_empty() && r.artifacts.is_empty());
        assert_eq!(r.status, Status::Ok);
        assert_eq!(r.config, c);
        assert_eq!(r.input.dim, 2);
        assert_eq!(r.provenance.threads_variable, THREADS_VAR);
    }

    #[test]
    fn every_constant_and_verdict_is_annotated() {
        let c = small("pingpong-sym2", &[Battery::Fit, Battery::LimitSet, Battery::Growth]);
        let r = run(&c).unwrap();
        assert_eq!(r.status, Status::Ok, "{:?}", r.batteries.iter().map(|b| &b.error).collect::<Vec<_>>());
        assert_eq!(r.provenance.batteries_run, vec![Battery::Cusp, Battery::Profile, Battery::Fit, Battery::LimitSet, Battery::Growth]);
        for b in &r.batteries {
            for (k, c) in &b.constants {
                assert!(!c.method.is_empty() && !c.over.is_empty() && c.range[0] <= c.range[1], "{k}");
            }
            for (k, v) in &b.verdicts {
                assert!(!v.over.is_empty() && v.range[0] <= v.range[1] && v.tolerance >= 0.0, "{k}");
            }
        }
        let growth = r.battery(Battery::Growth).unwrap();
        assert_eq!(growth.verdicts["divergence.P_b.b.k1"].value, "unbounded");
        assert_eq!(growth.verdicts["unipotent.P_b"].value, "weakly-unipotent");
        assert_eq!(r.battery(Battery::Fit).unwrap().verdicts["lower_envelope.all.k1"].value, "growing");
    }

    #[test]
    fn seeded_runs_agree_outside_the_timestamp() {
        let c = small("pingpong-sym2", &[Battery::Cusp, Battery::Flow]);
        let (a, b) = (run(&c).unwrap(), run(&c).unwrap());
        assert_eq!(strip_timestamp(&a.to_json().unwrap()).unwrap(), strip_timestamp(&b.to_json().unwrap()).unwrap());
    }

    #[test]
    fn failing_battery_marks_the_report() {
        let c = small("intro-t1", &[Battery::Flow]);
        let r = run(&c).unwrap();
        assert_eq!(r.status, Status::Failed);
        assert_eq!(r.exit_code(), 3);
        let flow = r.battery(Battery::Flow).unwrap();
        assert_eq!(flow.verdicts["contraction.k1"].value, "failed");
        assert!(flow.error.as_ref().unwrap().contains("α"));
    }

    #[test]
    fn dependents_of_a_failed_battery_are_not_run() {
        let mut c = small("pingpong", &[Battery::Fit]);
        c.cusp.depth = Some(1);
        let r = run(&c).unwrap();
        let errs: Vec<_> = r.batteries.iter().map(|b| b.error.clone().unwrap_or_default()).collect();
        assert!(errs[0].contains("depth"), "{errs:?}");
        assert!(errs[1].contains("prerequisite cusp") && errs[2].contains("prerequisite"), "{errs:?}");
    }

    #[test]
    fn outputs_are_listed_and_written() {
        let dir = std::env::temp_dir().join(format!("relanosov-run-{}", std::process::id()));
        let mut c = small("pingpong-sym2", &[Battery::Profile, Battery::Flow]);
        c.flow.traces = 1;
        c.output = Some(dir.clone());
        let r = run(&c).unwrap();
        for f in ["cusp_adjacency.txt", "cusp_manifest.json", "profile.csv", "gap_vs_distance_k1.csv", "kappa_vs_t_k1.csv", "report.json"] {
            assert!(r.artifacts.iter().any(|a| a == f), "{f} in {:?}", r.artifacts);
            assert!(dir.join(f).exists(), "{f}");
        }
        assert!(r.artifacts.iter().any(|a| a.starts_with("flow_trace_k1_seed")));
        let written = std::fs::read_to_string(dir.join("report.json")).unwrap();
        assert_eq!(written, r.to_json().unwrap());
        let gap = std::fs::read_to_string(dir.join("gap_vs_distance_k1.csv")).unwrap();
        assert!(gap.starts_with("cusp_distance,mu_gap,peripheral\n0,"));
        std::fs::remove_dir_all(&dir).unwrap();
    }
}
