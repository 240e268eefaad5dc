use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use relanosov_core::report::{
    compare, init_threads, load_report, run, Battery, Report, RunConfig, Status,
};
use relanosov_core::Error;

const VALIDATION: u8 = 2;
const BATTERY: u8 = 3;

#[derive(Parser)]
#[command(name = "relanosov", version, about = "Cusped-graph, singular-value and flow diagnostics for matrix groups")]
#[command(after_help = "Worker threads: set RELANOSOV_THREADS (default: available parallelism).\n\
Exit codes: 0 success, 2 validation failure, 3 battery failure.")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build the truncated cusped graph and estimate its hyperbolicity constant.
    BuildCusp(RunArgs),
    /// Singular-value gap profile over the cusped graph.
    Profile(RunArgs),
    /// Envelope, regularity and quasi-isometry fits of the gap profile.
    Fit(RunArgs),
    /// Limit-set sample on a sphere and its minimum transversality.
    LimitSet(RunArgs),
    /// Sampled flow paths, kappa checks and the contraction certificate.
    Flow(RunArgs),
    /// All batteries, or those chosen with --battery.
    Full(RunArgs),
    /// Constant and verdict changes between two reports.
    Compare {
        a: PathBuf,
        b: PathBuf,
        /// Print the diff as JSON.
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Run configuration (TOML); flags below override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Built-in example (pingpong, pingpong-sym2, pingpong-sym3, intro-t0, intro-t1, heisenberg).
    #[arg(long, conflicts_with = "group")]
    builtin: Option<String>,
    /// Group file (TOML).
    #[arg(long)]
    group: Option<PathBuf>,
    /// Gap indices, comma separated.
    #[arg(long, value_delimiter = ',')]
    k: Vec<usize>,
    /// Word-length radius of the Cayley ball.
    #[arg(long)]
    radius: Option<usize>,
    /// Horoball truncation depth.
    #[arg(long)]
    depth: Option<u32>,
    /// Attach only these peripheral subgroups (repeatable).
    #[arg(long = "peripheral")]
    peripherals: Vec<String>,
    /// Also include peripheral elements up to this length in their own generators.
    #[arg(long)]
    peripheral_radius: Option<usize>,
    /// Batteries to run with `full` (repeatable): cusp, profile, fit, limit-set, growth, flow.
    #[arg(long = "battery")]
    batteries: Vec<String>,
    #[arg(long)]
    seed: Option<u64>,
    /// Sphere radius for the limit-set sample.
    #[arg(long)]
    shell: Option<usize>,
    /// Largest power for the peripheral growth battery.
    #[arg(long)]
    n_max: Option<u64>,
    /// Number of sampled flow paths.
    #[arg(long)]
    paths: Option<usize>,
    /// Rate used by the flow norms; fitted on peripheral rows when omitted.
    #[arg(long)]
    alpha: Option<f64>,
    /// Largest flow time tabulated.
    #[arg(long)]
    t_max: Option<usize>,
    /// Output directory for the report and tables.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the full report JSON to stdout.
    #[arg(long)]
    json: bool,
}

impl RunArgs {
    /// `only` fixes the battery selection; `None` (the `full` command) keeps
    /// the config's selection, or runs everything when that is empty.
    fn config(&self, only: Option<Battery>) -> relanosov_core::Result<RunConfig> {
        let mut c = match &self.config {
            Some(p) => RunConfig::load(p)?,
            None => RunConfig::for_builtin("pingpong-sym2"),
        };
        match only {
            Some(b) => c.batteries = vec![b],
            None if c.batteries.is_empty() => c.batteries = Battery::ALL.to_vec(),
            None => {}
        }
        if let Some(b) = &self.builtin {
            c.input.builtin = Some(b.clone());
            c.input.file = None;
        }
        if let Some(g) = &self.group {
            c.input.file = Some(g.clone());
            c.input.builtin = None;
        }
        if !self.k.is_empty() {
            c.k = self.k.clone();
        }
        if let Some(r) = self.radius {
            c.cusp.radius = r;
        }
        if let Some(d) = self.depth {
            c.cusp.depth = Some(d);
        }
        if !self.peripherals.is_empty() {
            c.cusp.peripherals = Some(self.peripherals.clone());
        }
        if let Some(r) = self.peripheral_radius {
            c.cusp.peripheral_radius = r;
        }
        if only.is_none() && !self.batteries.is_empty() {
            c.batteries = self.batteries.iter().map(|b| Battery::parse(b)).collect::<relanosov_core::Result<_>>()?;
        }
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(s) = self.shell {
            c.limit_set.shell = s;
        }
        if let Some(n) = self.n_max {
            c.growth.n_max = n;
        }
        if let Some(p) = self.paths {
            c.flow.paths = p;
        }
        if self.alpha.is_some() {
            c.flow.alpha = self.alpha;
        }
        if let Some(t) = self.t_max {
            c.flow.t_max = t;
        }
        if self.out.is_some() {
            c.output = self.out.clone();
        }
        c.validate()?;
        c.load_input()?;
        Ok(c)
    }
}

fn fail(code: u8, e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(code)
}

fn num(x: f64) -> String {
    let a = x.abs();
    if a == 0.0 || (1e-3..1e6).contains(&a) || !x.is_finite() {
        format!("{x:.6}")
    } else {
        format!("{x:.4e}")
    }
}

fn summarize(r: &Report) {
    println!("{} / {} (d = {})", r.input.group, r.input.representation, r.input.dim);
    for b in &r.batteries {
        let status = match b.status {
            Status::Ok => "ok",
            Status::Failed => "FAILED",
        };
        println!("[{}] {status}", b.battery.name());
        if let Some(e) = &b.error {
            println!("  error: {e}");
        }
        for (k, v) in &b.verdicts {
            println!("  {k}: {} ({} in [{}, {}])", v.value, v.over, v.range[0], v.range[1]);
        }
        for (k, c) in &b.constants {
            println!("  {k} = {} ({})", num(c.value), c.method);
        }
    }
    if !r.artifacts.is_empty() {
        let dir = r.config.output.as_ref().map(|p| p.display().to_string()).unwrap_or_default();
        println!("wrote {} files to {dir}", r.artifacts.len());
    }
}

fn run_batteries(args: &RunArgs, only: Option<Battery>) -> ExitCode {
    let config = match args.config(only) {
        Ok(c) => c,
        Err(e) => return fail(VALIDATION, &e),
    };
    if let Err(e) = init_threads() {
        return fail(VALIDATION, &e);
    }
    let mut report = match run(&config) {
        Ok(r) => r,
        Err(e) => return fail(BATTERY, &e),
    };
    report.config.output = config.output.clone();
    if args.json {
        match report.to_json() {
            Ok(s) => print!("{s}"),
            Err(e) => return fail(BATTERY, &e),
        }
    } else {
        summarize(&report);
    }
    ExitCode::from(report.exit_code() as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::BuildCusp(a) => run_batteries(a, Some(Battery::Cusp)),
        Command::Profile(a) => run_batteries(a, Some(Battery::Profile)),
        Command::Fit(a) => run_batteries(a, Some(Battery::Fit)),
        Command::LimitSet(a) => run_batteries(a, Some(Battery::LimitSet)),
        Command::Flow(a) => run_batteries(a, Some(Battery::Flow)),
        Command::Full(a) => run_batteries(a, None),
        Command::Compare { a, b, json } => {
            let (ra, rb) = match (load_report(a), load_report(b)) {
                (Ok(x), Ok(y)) => (x, y),
                (Err(e), _) | (_, Err(e)) => return fail(VALIDATION, &e),
            };
            match compare(&ra, &rb) {
                Ok(d) if *json => {
                    println!("{}", d.to_json());
                    ExitCode::SUCCESS
                }
                Ok(d) => {
                    print!("{d}");
                    ExitCode::SUCCESS
                }
                Err(e) => fail(VALIDATION, &e),
            }
        }
    }
}
