//! Run configuration (TOML, `schema_version = 1`).
//!
//! ```toml
//! schema_version = 1
//! batteries = ["cusp", "profile", "fit", "limit-set", "growth", "flow"]
//! k = [1]
//! seed = 0
//! output = "out"
//!
//! [input]
//! builtin = "pingpong-sym2"    # or: file = "groups/mine.toml"
//!
//! [cusp]
//! radius = 6
//! # depth = 9                  # default: enough for the ball's coset pieces
//! peripheral_radius = 0
//! # peripherals = ["P"]        # default: all declared
//! delta_samples = 200
//!
//! [limit_set]
//! shell = 8
//!
//! [growth]
//! n_max = 65536
//!
//! [flow]
//! paths = 16
//! t_max = 40
//! # alpha = 0.5                # default: fitted on the peripheral rows
//! margin = 24
//! max_log2_syllable = 9
//! traces = 2
//!
//! [tolerances]
//! flat_slope = 0.05
//! flag_convergence = 1e-8
//! transversality_floor = 1e-8
//! ```

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cusp::graph_required_depth;
use crate::error::{Error, Result};
use crate::group::builtin::builtin_by_name;
use crate::group::config::GroupFile;
use crate::group::{Group, Representation};

pub const RUN_SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Battery {
    Cusp,
    Profile,
    Fit,
    LimitSet,
    Growth,
    Flow,
}

impl Battery {
    pub const ALL: [Battery; 6] =
        [Battery::Cusp, Battery::Profile, Battery::Fit, Battery::LimitSet, Battery::Growth, Battery::Flow];

    pub fn name(self) -> &'static str {
        match self {
            Battery::Cusp => "cusp",
            Battery::Profile => "profile",
            Battery::Fit => "fit",
            Battery::LimitSet => "limit-set",
            Battery::Growth => "growth",
            Battery::Flow => "flow",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Battery::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown battery `{s}`")))
    }

    /// Batteries whose results this one consumes.
    pub fn prerequisites(self) -> &'static [Battery] {
        match self {
            Battery::Profile => &[Battery::Cusp],
            Battery::Fit => &[Battery::Cusp, Battery::Profile],
            _ => &[],
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InputSpec {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    /// Group file; relative paths are resolved against the config file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CuspSettings {
    pub radius: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub depth: Option<u32>,
    pub peripheral_radius: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub peripherals: Option<Vec<String>>,
    pub delta_samples: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_elements: Option<usize>,
}

impl Default for CuspSettings {
    fn default() -> Self {
        CuspSettings { radius: 6, depth: None, peripheral_radius: 0, peripherals: None, delta_samples: 200, max_elements: None }
    }
}

impl CuspSettings {
    /// Explicit depth, or one deep enough for every coset piece of the ball.
    pub fn effective_depth(&self) -> u32 {
        self.depth.unwrap_or_else(|| graph_required_depth(2 * (self.radius + self.peripheral_radius) as u64))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LimitSetSettings {
    pub shell: usize,
}

impl Default for LimitSetSettings {
    fn default() -> Self {
        LimitSetSettings { shell: 8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthSettings {
    pub n_max: u64,
    pub per_octave: u32,
}

impl Default for GrowthSettings {
    fn default() -> Self {
        GrowthSettings { n_max: 1 << 16, per_octave: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlowSettings {
    pub paths: usize,
    pub t_max: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    pub margin: usize,
    pub max_log2_syllable: u32,
    /// Number of paths whose full trace is written next to the report.
    pub traces: usize,
}

impl Default for FlowSettings {
    fn default() -> Self {
        FlowSettings { paths: 16, t_max: 40, alpha: None, margin: 24, max_log2_syllable: 9, traces: 2 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    /// Far-range slope below which an envelope counts as flat.
    pub flat_slope: f64,
    /// Last Grassmannian increment accepted for a converged boundary flag.
    pub flag_convergence: f64,
    /// Smallest accepted transversality of the flags along a flow path.
    pub transversality_floor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances { flat_slope: 0.05, flag_convergence: 1e-8, transversality_floor: 1e-8 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema_version: u32,
    pub input: InputSpec,
    #[serde(default)]
    pub batteries: Vec<Battery>,
    #[serde(default = "default_k")]
    pub k: Vec<usize>,
    #[serde(default)]
    pub seed: u64,
    /// Directory for the report and side tables; nothing is written when
    /// absent. Not echoed into reports, so runs into different directories
    /// compare equal.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub cusp: CuspSettings,
    #[serde(default)]
    pub limit_set: LimitSetSettings,
    #[serde(default)]
    pub growth: GrowthSettings,
    #[serde(default)]
    pub flow: FlowSettings,
    #[serde(default)]
    pub tolerances: Tolerances,
}

fn default_k() -> Vec<usize> {
    vec![1]
}

impl RunConfig {
    pub fn for_builtin(name: &str) -> Self {
        RunConfig {
            schema_version: RUN_SCHEMA_VERSION,
            input: InputSpec { builtin: Some(name.into()), file: None },
            batteries: vec![],
            k: default_k(),
            seed: 0,
            output: None,
            cusp: CuspSettings::default(),
            limit_set: LimitSetSettings::default(),
            growth: GrowthSettings::default(),
            flow: FlowSettings::default(),
            tolerances: Tolerances::default(),
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let c: RunConfig = toml::from_str(text)?;
        c.validate()?;
        Ok(c)
    }

    /// Reads and validates a config; a relative group file path is made
    /// relative to the config's directory.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut c = Self::from_toml(&text)?;
        if let Some(f) = &c.input.file {
            if f.is_relative() {
                if let Some(dir) = path.parent() {
                    c.input.file = Some(dir.join(f));
                }
            }
        }
        Ok(c)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("run config serializes")
    }

    /// Selected batteries plus their prerequisites, in execution order.
    pub fn schedule(&self) -> Vec<Battery> {
        let mut out: Vec<Battery> = Vec::new();
        for &b in &self.batteries {
            out.extend_from_slice(b.prerequisites());
            out.push(b);
        }
        out.sort();
        out.dedup();
        out
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema_version != RUN_SCHEMA_VERSION {
            return Err(Error::SchemaMismatch(format!(
                "run config schema {} (supported: {RUN_SCHEMA_VERSION})",
                self.schema_version
            )));
        }
        match (&self.input.builtin, &self.input.file) {
            (Some(_), None) | (None, Some(_)) => {}
            _ => return Err(Error::Config("input needs exactly one of `builtin` and `file`".into())),
        }
        if self.k.is_empty() || self.k.contains(&0) {
            return Err(Error::Config("k values must be ≥ 1".into()));
        }
        let t = &self.tolerances;
        for (name, v) in [
            ("flat_slope", t.flat_slope),
            ("flag_convergence", t.flag_convergence),
            ("transversality_floor", t.transversality_floor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("tolerance `{name}` must be positive, got {v}")));
            }
        }
        if let Some(a) = self.flow.alpha {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Config(format!("flow.alpha must be positive, got {a}")));
            }
        }
        if self.cusp.depth == Some(0) {
            return Err(Error::Config("cusp.depth must be ≥ 1".into()));
        }
        if self.limit_set.shell == 0 {
            return Err(Error::Config("limit_set.shell must be ≥ 1".into()));
        }
        if self.growth.n_max < 4 || self.growth.per_octave == 0 {
            return Err(Error::Config("growth needs n_max ≥ 4 and per_octave ≥ 1".into()));
        }
        if self.flow.paths == 0 || self.flow.t_max == 0 {
            return Err(Error::Config("flow needs paths ≥ 1 and t_max ≥ 1".into()));
        }
        Ok(())
    }

    /// Builds the group and representation named by `input`, then checks
    /// the k values against the dimension.
    pub fn load_input(&self) -> Result<(Group, Representation)> {
        let (g, r) = match (&self.input.builtin, &self.input.file) {
            (Some(name), None) => builtin_by_name(name)?,
            (None, Some(path)) => GroupFile::load(path)?.build()?,
            _ => return Err(Error::Config("input needs exactly one of `builtin` and `file`".into())),
        };
        if let Some(&k) = self.k.iter().find(|&&k| k >= r.dim) {
            return Err(Error::Config(format!("k = {k} must be below the dimension {}", r.dim)));
        }
        if let Some(ids) = &self.cusp.peripherals {
            for id in ids {
                if g.peripheral_index(id).is_none() {
                    return Err(Error::Config(format!("group `{}` has no peripheral `{id}`", g.name)));
                }
            }
        }
        Ok((g, r))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn documented_example_parses() {
        let doc: String = include_str!("config.rs")
            .lines()
            .skip_while(|l| !l.starts_with("//! ```toml"))
            .skip(1)
            .take_while(|l| !l.starts_with("//! ```"))
            .map(|l| l.trim_start_matches("//!").trim_start())
            .collect::<Vec<_>>()
            .join("\n");
        let c = RunConfig::from_toml(&doc).unwrap();
        assert_eq!(c.batteries.len(), 6);
        assert_eq!(c.input.builtin.as_deref(), Some("pingpong-sym2"));
        assert_eq!(c.limit_set.shell, 8);
        let echoed = RunConfig::from_toml(&c.to_toml()).unwrap();
        assert_eq!(echoed.output, None);
        assert_eq!(RunConfig { output: None, ..c }, echoed);
    }

    #[test]
    fn defaults_fill_missing_sections() {
        let c = RunConfig::from_toml("schema_version = 1\n[input]\nbuiltin = \"pingpong\"\n").unwrap();
        assert_eq!(c, RunConfig::for_builtin("pingpong"));
        assert!(c.schedule().is_empty());
    }

    #[test]
    fn schedule_adds_prerequisites_in_order() {
        let mut c = RunConfig::for_builtin("pingpong");
        c.batteries = vec![Battery::Flow, Battery::Fit];
        assert_eq!(c.schedule(), vec![Battery::Cusp, Battery::Profile, Battery::Fit, Battery::Flow]);
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let base = "[input]\nbuiltin = \"pingpong\"\n";
        assert!(matches!(RunConfig::from_toml(&format!("schema_version = 2\n{base}")), Err(Error::SchemaMismatch(_))));
        assert!(RunConfig::from_toml(&format!("schema_version = 1\nk = [0]\n{base}")).is_err());
        assert!(RunConfig::from_toml(&format!("schema_version = 1\nbogus = 1\n{base}")).is_err());
        assert!(RunConfig::from_toml(&format!("schema_version = 1\n{base}[tolerances]\nflat_slope = 0.0\n")).is_err());
        assert!(RunConfig::from_toml(&format!("schema_version = 1\n{base}[tolerances]\nflag_convergence = -1e-3\n")).is_err());
        assert!(RunConfig::from_toml("schema_version = 1\n[input]\n").is_err());
        assert!(RunConfig::from_toml("schema_version = 1\nbatteries = [\"nope\"]\n[input]\nbuiltin = \"pingpong\"\n").is_err());
    }

    #[test]
    fn input_checks_k_and_peripherals() {
        let mut c = RunConfig::for_builtin("pingpong");
        c.k = vec![2];
        assert!(c.load_input().is_err());
        c.k = vec![1];
        c.cusp.peripherals = Some(vec!["nope".into()]);
        assert!(c.load_input().is_err());
        c.input.builtin = Some("nope".into());
        assert!(c.load_input().is_err());
    }
}
