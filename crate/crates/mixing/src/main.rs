use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use serde_json::{json, Map, Value};

use mixing::config::{parse_config, Command, Kappa, ThetaConfig, Truncation};
use mixing::report::EXIT_CONFIG;
use mixing::{output_dir, run_command};

/// Transport-noise mixing experiments. Flags override keys of the config file.
#[derive(Parser, Debug)]
#[command(name = "mixing", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON configuration document.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides `output` and $MIXING_OUT.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Summary directories consolidated by `report`.
    inputs: Vec<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long = "N")]
    n: Option<i64>,
    /// unit_shell, shells:R or power_law:α:M.
    #[arg(long)]
    theta: Option<ThetaConfig>,
    /// A number, or `auto` for euler runs.
    #[arg(long)]
    kappa: Option<Kappa>,
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    nu: Option<f64>,
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    epsilon: Option<f64>,
    #[arg(long, value_delimiter = ',')]
    p_list: Option<Vec<f64>>,
    #[arg(long, value_delimiter = ',')]
    beta_list: Option<Vec<f64>>,
    #[arg(long)]
    dt: Option<f64>,
    #[arg(long)]
    dt_safety: Option<f64>,
    #[arg(long = "T")]
    t_end: Option<f64>,
    #[arg(long)]
    paths: Option<usize>,
    #[arg(long)]
    base_seed: Option<u64>,
    #[arg(long, value_enum)]
    truncation: Option<Truncation>,
    #[arg(long)]
    boundary_margin: Option<i64>,
    #[arg(long)]
    leakage_threshold: Option<f64>,
    #[arg(long)]
    sample_stride: Option<usize>,
    #[arg(long)]
    tau: Option<f64>,
    #[arg(long)]
    envelope_rate: Option<f64>,
    #[arg(long)]
    sigma: Option<f64>,
    #[arg(long)]
    noise_samples: Option<usize>,
    #[arg(long)]
    samples: Option<usize>,
    #[arg(long)]
    dirichlet_samples: Option<usize>,
    #[arg(long)]
    dirichlet_p: Option<f64>,
    #[arg(long)]
    max_support: Option<usize>,
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long = "R")]
    r: Option<f64>,
    #[arg(long)]
    cutoff: Option<f64>,
    #[arg(long)]
    initial_energy: Option<f64>,
    #[arg(long)]
    initial_modes: Option<i64>,
    #[arg(long)]
    noise: Option<bool>,
    #[arg(long)]
    energy_tolerance: Option<f64>,
    #[arg(long)]
    conservation_time: Option<f64>,
    #[arg(long)]
    conservation_tolerance: Option<f64>,
    #[arg(long)]
    max_step_norm_sq: Option<i64>,
    #[arg(long)]
    orbit_margin: Option<i64>,
}

impl Cli {
    /// The config document with every given flag written over it.
    fn document(&self) -> Result<String> {
        let mut doc: Map<String, Value> = match &self.config {
            Some(p) => {
                let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
                serde_json::from_str(&text).with_context(|| format!("{} is not a JSON object", p.display()))?
            }
            None => Map::new(),
        };
        doc.insert("command".into(), json!(self.command));
        let mut set = |key: &str, v: Option<Value>| {
            if let Some(v) = v {
                doc.insert(key.into(), v);
            }
        };
        set("d", self.d.as_ref().map(to_json));
        set("N", self.n.as_ref().map(to_json));
        set("theta", self.theta.as_ref().map(to_json));
        set("kappa", self.kappa.as_ref().map(to_json));
        set("lambda", self.lambda.as_ref().map(to_json));
        set("nu", self.nu.as_ref().map(to_json));
        set("alpha", self.alpha.as_ref().map(to_json));
        set("epsilon", self.epsilon.as_ref().map(to_json));
        set("p_list", self.p_list.as_ref().map(to_json));
        set("beta_list", self.beta_list.as_ref().map(to_json));
        set("dt", self.dt.as_ref().map(to_json));
        set("dt_safety", self.dt_safety.as_ref().map(to_json));
        set("T", self.t_end.as_ref().map(to_json));
        set("paths", self.paths.as_ref().map(to_json));
        set("base_seed", self.base_seed.as_ref().map(to_json));
        set("truncation", self.truncation.as_ref().map(to_json));
        set("boundary_margin", self.boundary_margin.as_ref().map(to_json));
        set("leakage_threshold", self.leakage_threshold.as_ref().map(to_json));
        set("sample_stride", self.sample_stride.as_ref().map(to_json));
        set("tau", self.tau.as_ref().map(to_json));
        set("envelope_rate", self.envelope_rate.as_ref().map(to_json));
        set("sigma", self.sigma.as_ref().map(to_json));
        set("noise_samples", self.noise_samples.as_ref().map(to_json));
        set("samples", self.samples.as_ref().map(to_json));
        set("dirichlet_samples", self.dirichlet_samples.as_ref().map(to_json));
        set("dirichlet_p", self.dirichlet_p.as_ref().map(to_json));
        set("max_support", self.max_support.as_ref().map(to_json));
        set("grid", self.grid.as_ref().map(to_json));
        set("R", self.r.as_ref().map(to_json));
        set("cutoff", self.cutoff.as_ref().map(to_json));
        set("initial_energy", self.initial_energy.as_ref().map(to_json));
        set("initial_modes", self.initial_modes.as_ref().map(to_json));
        set("noise", self.noise.as_ref().map(to_json));
        set("energy_tolerance", self.energy_tolerance.as_ref().map(to_json));
        set("conservation_time", self.conservation_time.as_ref().map(to_json));
        set("conservation_tolerance", self.conservation_tolerance.as_ref().map(to_json));
        set("max_step_norm_sq", self.max_step_norm_sq.as_ref().map(to_json));
        set("orbit_margin", self.orbit_margin.as_ref().map(to_json));
        if !self.inputs.is_empty() {
            set("inputs", Some(json!(self.inputs)));
        }
        Ok(Value::Object(doc).to_string())
    }
}

fn to_json<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("flag value serializes")
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    let doc = match cli.document() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    let (cfg, warnings) = match parse_config(&doc) {
        Ok(c) => c,
        Err(e) => {
            eprint!("{e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    for w in &warnings {
        log::warn!("{w}");
    }
    let out = output_dir(&cfg, cli.out.as_deref());
    let known = warnings.len();
    match run_command(&cfg, warnings, &out) {
        Ok(report) => {
            let mut stdout = std::io::stdout().lock();
            for w in &report.warnings[known..] {
                log::warn!("{w}");
            }
            for c in &report.criteria {
                // A closed pipe is not an error of the run.
                let _ = writeln!(stdout, "{}", c.line());
            }
            let _ = writeln!(stdout, "{}: {} ({})", cfg.command.name(), report.status, out.display());
            ExitCode::from(report.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}
