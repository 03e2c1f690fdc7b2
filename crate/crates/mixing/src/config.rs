//! Run configuration: a strict JSON document validated against the
//! preconditions of the kernel it drives.

use std::fmt;
use std::str::FromStr;

use mixing_core::constants::mixing_constants;
use mixing_core::lattice::{build_lattice, LatticeBox};
use mixing_core::theta::{make_theta, ThetaCoefficients, ThetaFamily};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Spectrum,
    Heat,
    TransportMc,
    HeatMc,
    Euler,
    Poincare,
    Orbits,
    Report,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Spectrum => "spectrum",
            Command::Heat => "heat",
            Command::TransportMc => "transport-mc",
            Command::HeatMc => "heat-mc",
            Command::Euler => "euler",
            Command::Poincare => "poincare",
            Command::Orbits => "orbits",
            Command::Report => "report",
        }
    }

    fn is_timed(self) -> bool {
        matches!(self, Command::Spectrum | Command::Heat | Command::TransportMc | Command::HeatMc | Command::Euler)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum ThetaConfig {
    UnitShell,
    Shells { radius: f64 },
    PowerLaw { alpha: f64, cutoff: f64 },
    Explicit { points: Vec<ExplicitPoint> },
}

impl Default for ThetaConfig {
    fn default() -> Self {
        ThetaConfig::UnitShell
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitPoint {
    pub k: Vec<i64>,
    pub value: f64,
}

impl ThetaConfig {
    pub fn family(&self) -> ThetaFamily {
        match self {
            ThetaConfig::UnitShell => ThetaFamily::UnitShell,
            ThetaConfig::Shells { radius } => ThetaFamily::Shells { radius: *radius },
            ThetaConfig::PowerLaw { alpha, cutoff } => ThetaFamily::PowerLaw { alpha: *alpha, cutoff: *cutoff },
            ThetaConfig::Explicit { points } => {
                ThetaFamily::Explicit(points.iter().map(|p| (p.k.clone(), p.value)).collect())
            }
        }
    }
}

impl FromStr for ThetaConfig {
    type Err = String;

    /// `unit_shell`, `shells:R`, `power_law:α:M`.
    fn from_str(s: &str) -> Result<Self, String> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64, String> {
            parts
                .get(i)
                .ok_or_else(|| format!("θ family `{s}` is missing a parameter"))?
                .parse()
                .map_err(|e| format!("θ parameter in `{s}`: {e}"))
        };
        match parts[0] {
            "unit_shell" if parts.len() == 1 => Ok(ThetaConfig::UnitShell),
            "shells" if parts.len() == 2 => Ok(ThetaConfig::Shells { radius: num(1)? }),
            "power_law" if parts.len() == 3 => Ok(ThetaConfig::PowerLaw { alpha: num(1)?, cutoff: num(2)? }),
            _ => Err(format!("unknown θ family `{s}`; use unit_shell, shells:R or power_law:α:M")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KappaKeyword {
    #[serde(rename = "auto")]
    Auto,
}

/// A noise intensity, or `"auto"` to size it from a target rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Kappa {
    Value(f64),
    Keyword(KappaKeyword),
}

impl Kappa {
    pub fn value(self) -> Option<f64> {
        match self {
            Kappa::Value(v) => Some(v),
            Kappa::Keyword(_) => None,
        }
    }
}

impl FromStr for Kappa {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        if s == "auto" {
            Ok(Kappa::Keyword(KappaKeyword::Auto))
        } else {
            s.parse().map(Kappa::Value).map_err(|e| format!("κ `{s}`: {e}"))
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Truncation {
    #[default]
    Conservative,
    Absorbing,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialConfig {
    /// Uniform on `0 < |k|² ≤ max_norm_sq`.
    Shell { max_norm_sq: i64, mass: f64 },
    /// A point mass at `k`.
    Delta { k: Vec<i64>, mass: f64 },
}

impl Default for InitialConfig {
    fn default() -> Self {
        InitialConfig::Shell { max_norm_sq: 2, mass: 1.0 }
    }
}

fn d_default() -> usize {
    2
}
fn n_default() -> i64 {
    24
}
fn kappa_default() -> Kappa {
    Kappa::Value(1.0)
}
fn p_default() -> Vec<f64> {
    vec![1.5, 2.0, 3.0]
}
fn beta_default() -> Vec<f64> {
    vec![0.5]
}
fn safety_default() -> f64 {
    0.5
}
fn paths_default() -> usize {
    64
}
fn leakage_default() -> f64 {
    1e-3
}
fn sigma_default() -> f64 {
    4.0
}
fn samples_default() -> usize {
    1000
}
fn dirichlet_default() -> usize {
    200
}
fn support_default() -> usize {
    64
}
fn noise_samples_default() -> usize {
    1_000_000
}
fn grid_default() -> usize {
    64
}
fn cutoff_default() -> f64 {
    10.0
}
fn energy_default() -> f64 {
    1.0
}
fn modes_default() -> i64 {
    16
}
fn tolerance_default() -> f64 {
    0.05
}
fn step_norm_default() -> i64 {
    9
}
fn margin_default() -> i64 {
    3
}
fn dirichlet_p_default() -> f64 {
    2.0
}
fn one() -> f64 {
    1.0
}
fn conservation_default() -> f64 {
    1e-6
}
fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub command: Command,
    #[serde(default = "d_default")]
    pub d: usize,
    /// Sup-norm radius of the lattice box.
    #[serde(rename = "N", default = "n_default")]
    pub n: i64,
    #[serde(default)]
    pub theta: ThetaConfig,
    #[serde(default = "kappa_default")]
    pub kappa: Kappa,
    #[serde(default)]
    pub lambda: f64,
    #[serde(default)]
    pub nu: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(default = "p_default")]
    pub p_list: Vec<f64>,
    /// Exponents `β` of the `H^{-β}` mixing norms.
    #[serde(default = "beta_default")]
    pub beta_list: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dt: Option<f64>,
    #[serde(default = "safety_default")]
    pub dt_safety: f64,
    #[serde(rename = "T", default, skip_serializing_if = "Option::is_none")]
    pub t_end: Option<f64>,
    #[serde(default = "paths_default")]
    pub paths: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default)]
    pub truncation: Truncation,
    /// Boundary band width; defaults to the sup-norm reach of `θ`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub boundary_margin: Option<i64>,
    #[serde(default = "leakage_default")]
    pub leakage_threshold: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample_stride: Option<usize>,
    #[serde(default)]
    pub initial: InitialConfig,
    /// Interval length for sup statistics; defaults to `t₀`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau: Option<f64>,
    /// Target rate for per-path envelope constants.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub envelope_rate: Option<f64>,
    /// Width, in standard errors, of Monte Carlo acceptance bands.
    #[serde(default = "sigma_default")]
    pub sigma: f64,
    #[serde(default = "noise_samples_default")]
    pub noise_samples: usize,
    #[serde(default = "samples_default")]
    pub samples: usize,
    #[serde(default = "dirichlet_default")]
    pub dirichlet_samples: usize,
    /// Exponent of the Dirichlet-form check.
    #[serde(default = "dirichlet_p_default")]
    pub dirichlet_p: f64,
    #[serde(default = "support_default")]
    pub max_support: usize,
    #[serde(default = "grid_default")]
    pub grid: usize,
    /// Energy ceiling used to size `κ`; defaults to `‖w₀‖²`.
    #[serde(rename = "R", default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
    #[serde(default = "cutoff_default")]
    pub cutoff: f64,
    #[serde(default = "energy_default")]
    pub initial_energy: f64,
    #[serde(default = "modes_default")]
    pub initial_modes: i64,
    #[serde(default = "yes")]
    pub noise: bool,
    /// Allowed relative energy excess per path in noisy Euler runs.
    #[serde(default = "tolerance_default")]
    pub energy_tolerance: f64,
    /// Horizon of the inviscid, noise-free conservation check.
    #[serde(default = "one")]
    pub conservation_time: f64,
    #[serde(default = "conservation_default")]
    pub conservation_tolerance: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit_steps: Option<Vec<Vec<i64>>>,
    #[serde(default = "step_norm_default")]
    pub max_step_norm_sq: i64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub orbit_pairs: Option<Vec<(Vec<i64>, Vec<i64>)>>,
    #[serde(default = "margin_default")]
    pub orbit_margin: i64,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub inputs: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl RunConfig {
    /// Defaults for `command`, as produced by parsing `{"command": …}`.
    pub fn new(command: Command) -> Self {
        serde_json::from_value(serde_json::json!({ "command": command })).expect("defaults deserialize")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn lattice(&self) -> anyhow::Result<LatticeBox> {
        Ok(build_lattice(self.d, self.n)?)
    }

    pub fn theta(&self, lattice: &LatticeBox) -> anyhow::Result<ThetaCoefficients> {
        Ok(make_theta(&self.theta.family(), lattice)?)
    }

    /// Checks every precondition and returns all violations at once.
    pub fn validate(&self) -> Validation {
        let mut v = Validation::default();
        let c = self.command;
        let positive = |v: &mut Validation, name: &str, x: f64| {
            if !(x.is_finite() && x > 0.0) {
                v.error(format!("{name} must be positive, got {x}"));
            }
        };
        if self.d < 2 {
            v.error(format!("d must be at least 2, got {}", self.d));
        }
        if self.n < 1 {
            v.error(format!("N must be at least 1, got {}", self.n));
        }
        match self.kappa {
            Kappa::Value(k) if c == Command::Euler => {
                if !(k.is_finite() && k >= 0.0) {
                    v.error(format!("kappa must be nonnegative, got {k}"));
                }
            }
            Kappa::Value(k) => positive(&mut v, "kappa", k),
            Kappa::Keyword(_) if c != Command::Euler => v.error("kappa = \"auto\" is only available for euler runs"),
            Kappa::Keyword(_) => {
                if !(self.lambda > 0.0) {
                    v.error("kappa = \"auto\" needs a positive target rate lambda");
                }
            }
        }
        if !(self.lambda.is_finite() && self.lambda >= 0.0) {
            v.error(format!("lambda must be nonnegative, got {}", self.lambda));
        }
        if !(self.nu.is_finite() && self.nu >= 0.0) {
            v.error(format!("nu must be nonnegative, got {}", self.nu));
        }
        if matches!(c, Command::Heat | Command::HeatMc) && !(self.nu > 0.0) {
            v.error(format!("heat runs need a positive viscosity nu, got {}", self.nu));
        }
        if c.is_timed() {
            match self.t_end {
                Some(t) => positive(&mut v, "T", t),
                None => v.error(format!("{} runs need a final time T", c.name())),
            }
        }
        if let Some(dt) = self.dt {
            positive(&mut v, "dt", dt);
        }
        if !(self.dt_safety > 0.0 && self.dt_safety <= 1.0) {
            v.error(format!("dt_safety must lie in (0, 1], got {}", self.dt_safety));
        }
        for &p in &self.p_list {
            if !(p > 1.0 && p.is_finite()) {
                v.error(format!("every p must exceed 1, got {p}"));
            }
        }
        let d = self.d as f64;
        for &b in &self.beta_list {
            if !(b > 0.0 && b.is_finite()) {
                v.error(format!("every β must be positive, got {b}"));
            } else if let Some(eps) = self.epsilon {
                let top = b * (d - 2.0 * b) / (d * d);
                if b <= d / 4.0 && !(eps > 0.0 && eps < top) {
                    v.error(format!(
                        "averaged mixing hypothesis violated: for β = {b} the loss ε must lie in (0, β(d-2β)/d²) = (0, {top}), got {eps}"
                    ));
                }
            }
        }
        if matches!(c, Command::TransportMc | Command::HeatMc | Command::Euler) && self.paths < 2 && self.noise {
            v.error(format!("Monte Carlo runs need at least 2 paths, got {}", self.paths));
        }
        if !(self.leakage_threshold > 0.0 && self.leakage_threshold < 1.0) {
            v.error(format!("leakage_threshold must lie in (0, 1), got {}", self.leakage_threshold));
        }
        if let Some(m) = self.boundary_margin {
            if m < 0 || m >= self.n {
                v.error(format!("boundary_margin must lie in [0, N), got {m}"));
            }
        }
        if self.sample_stride == Some(0) {
            v.error("sample_stride must be at least 1");
        }
        if let Some(t) = self.tau {
            positive(&mut v, "tau", t);
        }
        positive(&mut v, "sigma", self.sigma);
        match &self.initial {
            InitialConfig::Shell { max_norm_sq, mass } => {
                if *max_norm_sq < 1 {
                    v.error(format!("initial shell needs max_norm_sq ≥ 1, got {max_norm_sq}"));
                }
                positive(&mut v, "initial mass", *mass);
            }
            InitialConfig::Delta { k, mass } => {
                if k.len() != self.d || k.iter().all(|&c| c == 0) || k.iter().any(|c| c.abs() > self.n) {
                    v.error(format!("initial delta {k:?} is not a nonzero point of the box"));
                }
                positive(&mut v, "initial mass", *mass);
            }
        }
        match c {
            Command::Euler => {
                if self.d != 2 {
                    v.error("euler runs are two-dimensional");
                }
                if self.grid < 12 || self.grid % 2 != 0 {
                    v.error(format!("grid must be even and at least 12, got {}", self.grid));
                }
                match self.alpha {
                    Some(a) if a > 0.0 && a.is_finite() => {}
                    Some(a) => v.error(format!("alpha must be positive, got {a}")),
                    None => v.error("euler runs need the regularization exponent alpha"),
                }
                if !(self.cutoff >= 1.0) {
                    v.error(format!("cutoff must be at least 1, got {}", self.cutoff));
                }
                positive(&mut v, "initial_energy", self.initial_energy);
                positive(&mut v, "energy_tolerance", self.energy_tolerance);
                positive(&mut v, "conservation_time", self.conservation_time);
                positive(&mut v, "conservation_tolerance", self.conservation_tolerance);
                if let Some(r) = self.r {
                    if !(r >= 0.0) {
                        v.error(format!("R must be nonnegative, got {r}"));
                    }
                }
            }
            Command::Poincare => {
                if self.samples == 0 || self.max_support == 0 {
                    v.error("poincare runs need samples ≥ 1 and max_support ≥ 1");
                }
                if !(self.dirichlet_p > 1.0 && self.dirichlet_p.is_finite()) {
                    v.error(format!("dirichlet_p must exceed 1, got {}", self.dirichlet_p));
                }
            }
            Command::Orbits if self.orbit_margin < 0 => v.error("orbit_margin must be nonnegative"),
            Command::Report if self.inputs.is_empty() => v.error("report needs at least one input directory"),
            _ => {}
        }
        if v.errors.is_empty() && !matches!(c, Command::Euler | Command::Report) {
            self.semantic_checks(&mut v);
        }
        v
    }

    /// Checks that need the lattice and `θ`.
    fn semantic_checks(&self, v: &mut Validation) {
        let lattice = match self.lattice() {
            Ok(l) => l,
            Err(e) => return v.error(e.to_string()),
        };
        let theta = match self.theta(&lattice) {
            Ok(t) => t,
            Err(e) => return v.error(e.to_string()),
        };
        if let (Some(rate), Some(k)) = (self.envelope_rate, self.kappa.value()) {
            if let Ok(mc) = mixing_constants(&theta, self.d, k) {
                if rate / k >= mc.d_theta {
                    v.warn(format!(
                        "envelope rate λ/κ = {} is not below D(θ,d) = {}; almost-sure envelopes need not exist",
                        rate / k,
                        mc.d_theta
                    ));
                }
            }
        }
        if matches!(self.command, Command::Heat | Command::HeatMc) && self.lambda <= 4.0 * std::f64::consts::PI.powi(2) * self.nu {
            v.warn("λ ≤ 4π²ν: the noise-free heat equation already decays");
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Validation {
    pub errors: Vec<String>,
    pub warnings: Vec<String>,
}

impl Validation {
    fn error(&mut self, msg: impl Into<String>) {
        self.errors.push(msg.into());
    }

    fn warn(&mut self, msg: impl Into<String>) {
        self.warnings.push(msg.into());
    }
}

/// Every problem found in a configuration document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError {
    pub errors: Vec<String>,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration ({} problem(s)):", self.errors.len())?;
        for e in &self.errors {
            writeln!(f, "  - {e}")?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

/// Parses and validates a JSON document; returns the config and its warnings.
pub fn parse_config(text: &str) -> Result<(RunConfig, Vec<String>), ConfigError> {
    let cfg: RunConfig = serde_json::from_str(text).map_err(|e| ConfigError { errors: vec![e.to_string()] })?;
    check(cfg)
}

/// Validates an already built config.
pub fn check(cfg: RunConfig) -> Result<(RunConfig, Vec<String>), ConfigError> {
    let v = cfg.validate();
    if v.errors.is_empty() {
        Ok((cfg, v.warnings))
    } else {
        Err(ConfigError { errors: v.errors })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn minimal_spectrum_config() {
        let (c, w) = parse_config(
            r#"{"command":"spectrum","d":2,"N":24,"theta":{"family":"unit_shell"},"kappa":1,"T":0.5}"#,
        )
        .unwrap();
        assert_eq!(c.n, 24);
        assert_eq!(c.t_end, Some(0.5));
        assert!(w.is_empty());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = parse_config(r#"{"command":"spectrum","T":1,"kapa":1}"#).unwrap_err();
        assert!(e.errors[0].contains("kapa"), "{e}");
        let e = parse_config(r#"{"command":"spectrum","T":1,"theta":{"family":"shells","radius":2,"x":1}}"#);
        assert!(e.is_err());
    }

    #[test]
    fn errors_are_aggregated() {
        let e = parse_config(r#"{"command":"heat","kappa":-1,"d":1,"p_list":[0.5]}"#).unwrap_err();
        assert!(e.errors.len() >= 5, "{e}");
    }

    #[test]
    fn epsilon_outside_the_hypothesis_is_an_error() {
        let e = parse_config(r#"{"command":"spectrum","T":1,"beta_list":[0.5],"epsilon":0.25}"#).unwrap_err();
        assert!(e.errors.iter().any(|m| m.contains("β(d-2β)/d²")), "{e}");
        // d = 2, β = 0.5: the open interval is (0, 0.125).
        assert!(parse_config(r#"{"command":"spectrum","T":1,"beta_list":[0.5],"epsilon":0.125}"#).is_err());
        assert!(parse_config(r#"{"command":"spectrum","T":1,"beta_list":[0.5],"epsilon":0.1}"#).is_ok());
    }

    #[test]
    fn envelope_rate_above_the_almost_sure_constant_warns() {
        let (_, w) = parse_config(r#"{"command":"transport-mc","N":8,"T":0.01,"envelope_rate":3}"#).unwrap();
        assert!(w.iter().any(|m| m.contains("D(θ,d)")), "{w:?}");
        let (_, w) = parse_config(r#"{"command":"transport-mc","N":8,"T":0.01,"envelope_rate":1}"#).unwrap();
        assert!(w.is_empty());
    }

    #[test]
    fn kappa_keyword() {
        let (c, _) = parse_config(r#"{"command":"euler","alpha":0.5,"kappa":"auto","lambda":1,"T":0.01}"#).unwrap();
        assert_eq!(c.kappa, Kappa::Keyword(KappaKeyword::Auto));
        assert!(parse_config(r#"{"command":"spectrum","kappa":"auto","T":1}"#).is_err());
        assert_eq!("auto".parse::<Kappa>().unwrap(), c.kappa);
        assert_eq!("0.5".parse::<Kappa>().unwrap(), Kappa::Value(0.5));
    }

    #[test]
    fn theta_shorthand() {
        assert_eq!("power_law:0.5:10".parse::<ThetaConfig>().unwrap(), ThetaConfig::PowerLaw { alpha: 0.5, cutoff: 10.0 });
        assert!("power_law:0.5".parse::<ThetaConfig>().is_err());
    }

    fn arb_config() -> impl Strategy<Value = RunConfig> {
        (
            prop_oneof![Just(Command::Spectrum), Just(Command::Heat), Just(Command::TransportMc), Just(Command::Orbits)],
            2usize..4,
            4i64..30,
            prop_oneof![
                Just(ThetaConfig::UnitShell),
                (1.0f64..3.0).prop_map(|radius| ThetaConfig::Shells { radius }),
                (0.0f64..2.0, 1.0f64..3.0).prop_map(|(alpha, cutoff)| ThetaConfig::PowerLaw { alpha, cutoff }),
            ],
            0.01f64..10.0,
            0.001f64..1.0,
            proptest::option::of(1e-6f64..1e-3),
            any::<u64>(),
            prop::collection::vec(1.01f64..6.0, 1..4),
        )
            .prop_map(|(command, d, n, theta, kappa, nu, dt, seed, p_list)| {
                let mut c = RunConfig::new(command);
                c.d = d;
                c.n = n;
                c.theta = theta;
                c.kappa = Kappa::Value(kappa);
                c.nu = nu;
                c.lambda = 1.0;
                c.dt = dt;
                c.base_seed = seed;
                c.p_list = p_list;
                c.t_end = Some(0.25);
                c
            })
    }

    proptest! {
        #[test]
        fn config_round_trips(c in arb_config()) {
            let back: RunConfig = serde_json::from_str(&c.to_json()).unwrap();
            prop_assert_eq!(back, c);
        }
    }
}
