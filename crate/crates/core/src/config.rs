//! Experiment configuration, read from a JSON document in which every field
//! is optional.
//!
//! ```json
//! {
//!   "n": 10,
//!   "protocol": "kary:2",
//!   "energy_protocol": { "kind": "lambda_exchange", "lambda": 2.0 },
//!   "loss": { "kind": "gaussian", "mean": 0.2, "stddev": 0.05 },
//!   "initial_energy": "random",
//!   "repetitions": 100,
//!   "master_seed": 42
//! }
//! ```

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::energy::LossModel;
use crate::error::{Error, Result};
use crate::formation::FormationProtocol;

/// Redistribution protocol selection, before it is bound to a tree.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum EnergyProtocolConfig {
    IdealTarget,
    LambdaExchange { lambda: f64 },
    RandExchange { lo: f64, hi: f64 },
    KappaTransfer { kappa: f64 },
    KDepthTarget { k: usize },
}

impl EnergyProtocolConfig {
    pub fn is_targeted(&self) -> bool {
        matches!(self, EnergyProtocolConfig::IdealTarget | EnergyProtocolConfig::KDepthTarget { .. })
    }
}

impl Default for EnergyProtocolConfig {
    fn default() -> Self {
        EnergyProtocolConfig::LambdaExchange { lambda: 2.0 }
    }
}

/// Short forms: `ideal`, `lambda:2`, `rand:2:3`, `kappa:0.5`, `depth:2`.
impl FromStr for EnergyProtocolConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let num = |i: usize| -> Result<f64> {
            parts
                .get(i)
                .and_then(|p| p.parse().ok())
                .ok_or_else(|| Error::Config(format!("bad energy protocol {s:?}")))
        };
        match (parts[0], parts.len()) {
            ("ideal" | "ideal-target", 1) => Ok(EnergyProtocolConfig::IdealTarget),
            ("lambda", 2) => Ok(EnergyProtocolConfig::LambdaExchange { lambda: num(1)? }),
            ("rand", 1) => Ok(EnergyProtocolConfig::RandExchange { lo: 2.0, hi: 3.0 }),
            ("rand", 3) => Ok(EnergyProtocolConfig::RandExchange { lo: num(1)?, hi: num(2)? }),
            ("kappa", 2) => Ok(EnergyProtocolConfig::KappaTransfer { kappa: num(1)? }),
            ("depth", 2) => Ok(EnergyProtocolConfig::KDepthTarget { k: num(1)? as usize }),
            _ => Err(Error::Config(format!("bad energy protocol {s:?}"))),
        }
    }
}

impl fmt::Display for EnergyProtocolConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            EnergyProtocolConfig::IdealTarget => write!(f, "ideal"),
            EnergyProtocolConfig::LambdaExchange { lambda } => write!(f, "lambda:{lambda}"),
            EnergyProtocolConfig::RandExchange { lo, hi } => write!(f, "rand:{lo}:{hi}"),
            EnergyProtocolConfig::KappaTransfer { kappa } => write!(f, "kappa:{kappa}"),
            EnergyProtocolConfig::KDepthTarget { k } => write!(f, "depth:{k}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum InitialEnergy {
    #[default]
    Uniform,
    Random,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum PhaseMode {
    /// Formation and estimation first, then redistribution.
    #[default]
    TwoPhase,
    /// All rule families active from the first step.
    Concurrent,
}

impl FromStr for PhaseMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "twophase" | "two_phase" => Ok(PhaseMode::TwoPhase),
            "concurrent" => Ok(PhaseMode::Concurrent),
            _ => Err(Error::Config(format!("unknown mode {s:?}"))),
        }
    }
}

/// Which total energy the targeted protocols aim to distribute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TargetEnergyBasis {
    Initial,
    #[default]
    PostFormation,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n: usize,
    pub protocol: FormationProtocol,
    pub energy_protocol: EnergyProtocolConfig,
    pub loss: LossModel,
    pub initial_energy: InitialEnergy,
    /// Defaults to `n · 1000`.
    pub total_energy: Option<f64>,
    pub repetitions: usize,
    pub master_seed: u64,
    /// Steps per phase; defaults to `500 · C(n, 2)`.
    pub step_budget: Option<u64>,
    pub phase_mode: PhaseMode,
    pub target_energy_basis: TargetEnergyBasis,
    /// Defaults to `10 · C(n, 2)`.
    pub quiescence_window: Option<u64>,
    /// Write per-run traces; defaults to on for `n ≤ 10`.
    pub emit_traces: Option<bool>,
    pub emit_metrics: bool,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            n: 10,
            protocol: FormationProtocol::BINARY,
            energy_protocol: EnergyProtocolConfig::default(),
            loss: LossModel::Lossless,
            initial_energy: InitialEnergy::Uniform,
            total_energy: None,
            repetitions: 100,
            master_seed: 0,
            step_budget: None,
            phase_mode: PhaseMode::TwoPhase,
            target_energy_basis: TargetEnergyBasis::PostFormation,
            quiescence_window: None,
            emit_traces: None,
            emit_metrics: true,
        }
    }
}

pub fn pairs_count(n: usize) -> u64 {
    (n as u64) * (n as u64).saturating_sub(1) / 2
}

impl ExperimentConfig {
    pub fn total_energy(&self) -> f64 {
        self.total_energy.unwrap_or(self.n as f64 * 1000.0)
    }

    pub fn step_budget(&self) -> u64 {
        self.step_budget.unwrap_or(500 * pairs_count(self.n).max(1))
    }

    pub fn quiescence_window(&self) -> u64 {
        self.quiescence_window.unwrap_or(10 * pairs_count(self.n).max(1))
    }

    pub fn emit_traces(&self) -> bool {
        self.emit_traces.unwrap_or(self.n <= 10)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n < 2 {
            return bad(format!("n must be at least 2, got {}", self.n));
        }
        if !(self.total_energy() > 0.0 && self.total_energy().is_finite()) {
            return bad(format!("total_energy must be positive, got {}", self.total_energy()));
        }
        if self.repetitions == 0 {
            return bad("repetitions must be at least 1".into());
        }
        if self.quiescence_window() == 0 || self.step_budget() == 0 {
            return bad("step_budget and quiescence_window must be positive".into());
        }
        if let FormationProtocol::KAry(k) = self.protocol {
            if k == 0 {
                return bad("k-ary formation needs k >= 1".into());
            }
        }
        self.loss.validate().map_err(|e| Error::Config(e.to_string()))?;
        let probe = crate::sim::bind_protocol(&self.energy_protocol, None, self.total_energy());
        probe.validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("config serializes")
    }
}
