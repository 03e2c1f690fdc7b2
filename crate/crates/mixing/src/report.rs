//! Criterion records, run reports and the consolidated table.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use crate::config::{Command, RunConfig};
use crate::io::{fmt_f64, read_summary};

/// Version of the summary layout.
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    /// Reported value with nothing to certify.
    Info,
    /// No admissible samples survived the leakage gate.
    Inconclusive,
    Fail,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "PASS",
            Status::Info => "INFO",
            Status::Inconclusive => "INCONCLUSIVE",
            Status::Fail => "FAIL",
        })
    }
}

/// Samples admitted and excluded by the leakage gate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Gate {
    pub used: usize,
    pub excluded: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Criterion {
    pub name: String,
    pub status: Status,
    pub observed: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bound: Option<f64>,
    /// Signed distance to failure; nonnegative when the check holds.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub margin: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub gate: Option<Gate>,
    pub detail: String,
}

impl Criterion {
    /// `observed ≤ bound`, with margin `bound - observed`.
    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64, detail: impl Into<String>) -> Self {
        let ok = observed <= bound;
        Self {
            name: name.into(),
            status: if ok { Status::Pass } else { Status::Fail },
            observed,
            bound: Some(bound),
            margin: Some(bound - observed),
            gate: None,
            detail: detail.into(),
        }
    }

    /// `observed ≥ bound`, with margin `observed - bound`.
    pub fn at_least(name: impl Into<String>, observed: f64, bound: f64, detail: impl Into<String>) -> Self {
        let mut c = Self::at_most(name, -observed, -bound, detail);
        c.observed = observed;
        c.bound = Some(bound);
        c
    }

    pub fn info(name: impl Into<String>, observed: f64, detail: impl Into<String>) -> Self {
        Self {
            name: name.into(),
            status: Status::Info,
            observed,
            bound: None,
            margin: None,
            gate: None,
            detail: detail.into(),
        }
    }

    /// Attaches a gate; an empty gated set makes the result inconclusive.
    pub fn gated(mut self, gate: Gate) -> Self {
        if gate.used == 0 && self.status != Status::Info {
            self.status = Status::Inconclusive;
        }
        self.gate = Some(gate);
        self
    }

    pub fn line(&self) -> String {
        let mut s = format!("{:<12} {}: observed {}", self.status.to_string(), self.name, fmt_f64(self.observed));
        if let Some(b) = self.bound {
            s += &format!(", bound {}", fmt_f64(b));
        }
        if let Some(g) = self.gate {
            s += &format!(", gated {}/{}", g.used, g.used + g.excluded);
        }
        if !self.detail.is_empty() {
            s += &format!(" ({})", self.detail);
        }
        s
    }
}

/// Overall status: any failure fails, then any inconclusive check.
pub fn overall(criteria: &[Criterion]) -> Status {
    let worst = criteria.iter().map(|c| c.status).max().unwrap_or(Status::Inconclusive);
    match worst {
        Status::Info => Status::Pass,
        s => s,
    }
}

pub fn exit_code(status: Status) -> i32 {
    match status {
        Status::Pass | Status::Info => 0,
        Status::Fail => 1,
        Status::Inconclusive => 3,
    }
}

/// Exit code for configuration errors.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub package: String,
    pub version: String,
    pub base_seed: u64,
}

impl Provenance {
    pub fn current(base_seed: u64) -> Self {
        Self { package: env!("CARGO_PKG_NAME").into(), version: env!("CARGO_PKG_VERSION").into(), base_seed }
    }
}

/// The content of `summary.json`. Wall time lives in `timing.json` so that
/// summaries of identical runs are byte-identical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub format: u32,
    pub command: Command,
    pub status: Status,
    pub config: RunConfig,
    pub criteria: Vec<Criterion>,
    pub warnings: Vec<String>,
    /// Command-specific scalar results.
    pub results: BTreeMap<String, serde_json::Value>,
    pub artifacts: Vec<String>,
    pub provenance: Provenance,
}

impl RunReport {
    pub fn new(config: RunConfig, warnings: Vec<String>) -> Self {
        Self {
            format: FORMAT_VERSION,
            command: config.command,
            status: Status::Inconclusive,
            provenance: Provenance::current(config.base_seed),
            config,
            criteria: Vec::new(),
            warnings,
            results: BTreeMap::new(),
            artifacts: Vec::new(),
        }
    }

    pub fn push(&mut self, c: Criterion) {
        self.criteria.push(c);
    }

    pub fn result(&mut self, key: &str, value: impl Serialize) {
        self.results.insert(key.to_string(), serde_json::to_value(value).expect("result serializes"));
    }

    pub fn criterion(&self, name: &str) -> Option<&Criterion> {
        self.criteria.iter().find(|c| c.name == name)
    }

    pub fn finish(&mut self) {
        self.status = overall(&self.criteria);
    }

    pub fn exit_code(&self) -> i32 {
        exit_code(self.status)
    }
}

/// One row of the consolidated table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    pub source: String,
    pub command: Command,
    pub criterion: Criterion,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Consolidated {
    pub status: Status,
    pub rows: Vec<TableRow>,
    pub gated_used: usize,
    pub gated_excluded: usize,
}

/// Merges the summaries in `dirs`. Summaries of the same command must come
/// from the same configuration apart from the output location.
pub fn compare_bounds(dirs: &[impl AsRef<Path>]) -> Result<Consolidated> {
    let mut seen: BTreeMap<String, (String, RunConfig)> = BTreeMap::new();
    let mut rows = Vec::new();
    for dir in dirs {
        let dir = dir.as_ref();
        let value = read_summary(dir)?;
        let report: RunReport =
            serde_json::from_value(value).with_context(|| format!("{} is not a run summary", dir.display()))?;
        if report.format != FORMAT_VERSION {
            bail!("{} uses summary format {}, expected {FORMAT_VERSION}", dir.display(), report.format);
        }
        let mut key_cfg = report.config.clone();
        key_cfg.output = None;
        let name = report.command.name().to_string();
        if let Some((first, cfg)) = seen.get(&name) {
            if *cfg != key_cfg {
                bail!("mismatched configs: {} and {} ran {name} with different parameters", first, dir.display());
            }
        } else {
            seen.insert(name, (dir.display().to_string(), key_cfg));
        }
        for c in report.criteria {
            rows.push(TableRow { source: dir.display().to_string(), command: report.command, criterion: c });
        }
    }
    let crit: Vec<Criterion> = rows.iter().map(|r| r.criterion.clone()).collect();
    let (gated_used, gated_excluded) = crit
        .iter()
        .filter_map(|c| c.gate)
        .fold((0, 0), |(u, e), g| (u + g.used, e + g.excluded));
    Ok(Consolidated { status: overall(&crit), rows, gated_used, gated_excluded })
}
