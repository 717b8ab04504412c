//! Experiment configuration: JSON file plus command-line overrides.
//!
//! Unknown keys are rejected. The `out` and `format` fields are delivery
//! details and are excluded from the config echo, so reports from the same
//! experiment are byte-identical regardless of where they are written.

use serde::{Deserialize, Serialize};

use crp_core::pick::NodeJson;
use crp_core::randmult::ModelSpec;
use crp_core::space::SpaceSpec;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    CheckSpace,
    Theorem1,
    MonteCarlo,
    Np,
    Search,
}

impl Command {
    pub fn parse(name: &str) -> Option<Command> {
        match name {
            "check-space" => Some(Command::CheckSpace),
            "theorem1" => Some(Command::Theorem1),
            "montecarlo" => Some(Command::MonteCarlo),
            "np" => Some(Command::Np),
            "search" => Some(Command::Search),
            _ => None,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Command::CheckSpace => "check-space",
            Command::Theorem1 => "theorem1",
            Command::MonteCarlo => "montecarlo",
            Command::Np => "np",
            Command::Search => "search",
        }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NodesSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub matrix_size: Option<usize>,
    /// Pin the row norm of sampled matrix nodes to `radius` instead of
    /// drawing it uniformly from (0, radius].
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exact_radius: Option<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<Vec<NodeJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SearchSpec {
    /// "free" or "compressed".
    pub mode: String,
    pub m: usize,
    pub max_degree: usize,
    pub trials: usize,
    #[serde(default)]
    pub climb_steps: usize,
    #[serde(default = "default_step_size")]
    pub step_size: f64,
}

fn default_step_size() -> f64 {
    0.1
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct NpSpec {
    #[serde(default = "default_two")]
    pub m: usize,
    #[serde(default = "default_two")]
    pub max_degree: usize,
}

fn default_two() -> usize {
    2
}

impl Default for NpSpec {
    fn default() -> NpSpec {
        NpSpec { m: 2, max_degree: 2 }
    }
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<String>,
    pub space: SpaceSpec,
    #[serde(rename = "N", default, skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_prime: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub model: Option<ModelSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nodes: Option<NodesSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub search: Option<SearchSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub np: Option<NpSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    /// montecarlo: "row", "col", or "both" (default).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub side: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_format", skip_serializing)]
    pub format: String,
    #[serde(default, skip_serializing)]
    pub out: Option<String>,
}

fn default_format() -> String {
    "csv".to_string()
}

impl ExperimentConfig {
    pub fn parse(text: &str) -> Result<ExperimentConfig, String> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| e.to_string())?;
        if cfg.format != "csv" && cfg.format != "json" {
            return Err(format!("format: expected \"csv\" or \"json\", got {:?}", cfg.format));
        }
        Ok(cfg)
    }

    /// Canonical JSON of the experiment (delivery fields excluded); embedded
    /// in every report so the run can be reproduced.
    pub fn echo(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}

/// Parsed command line: `crp <command> --config <path> [--seed u64]
/// [--out <path>] [--format csv|json]`.
#[derive(Clone, Debug)]
pub struct CliArgs {
    pub command: Command,
    pub config_path: String,
    pub seed: Option<u64>,
    pub out: Option<String>,
    pub format: Option<String>,
}

pub fn parse_args(args: &[String]) -> Result<CliArgs, String> {
    let mut it = args.iter();
    let command_name = it.next().ok_or("missing command")?;
    let command = Command::parse(command_name)
        .ok_or_else(|| format!("unknown command {command_name:?}"))?;
    let mut config_path = None;
    let mut seed = None;
    let mut out = None;
    let mut format = None;
    while let Some(flag) = it.next() {
        let mut take = |name: &str| -> Result<String, String> {
            it.next().cloned().ok_or_else(|| format!("{name} expects a value"))
        };
        match flag.as_str() {
            "--config" => config_path = Some(take("--config")?),
            "--seed" => {
                let raw = take("--seed")?;
                seed = Some(raw.parse::<u64>().map_err(|_| format!("--seed: bad u64 {raw:?}"))?);
            }
            "--out" => out = Some(take("--out")?),
            "--format" => {
                let raw = take("--format")?;
                if raw != "csv" && raw != "json" {
                    return Err(format!("--format: expected csv or json, got {raw:?}"));
                }
                format = Some(raw);
            }
            other => return Err(format!("unknown flag {other:?}")),
        }
    }
    Ok(CliArgs {
        command,
        config_path: config_path.ok_or("--config <path> is required")?,
        seed,
        out,
        format,
    })
}

/// File config with flag overrides applied; the command in the file, when
/// present, must match the command line.
pub fn resolve(args: &CliArgs, file_text: &str) -> Result<ExperimentConfig, String> {
    let mut cfg = ExperimentConfig::parse(file_text)?;
    if let Some(file_cmd) = &cfg.command
        && Command::parse(file_cmd) != Some(args.command)
    {
        return Err(format!(
            "command: file says {file_cmd:?} but the command line says {:?}",
            args.command.name()
        ));
    }
    cfg.command = Some(args.command.name().to_string());
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(out) = &args.out {
        cfg.out = Some(out.clone());
    }
    if let Some(format) = &args.format {
        cfg.format = format.clone();
    }
    Ok(cfg)
}
