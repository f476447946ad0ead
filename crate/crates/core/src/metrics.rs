//! Distribution distance, energy distance, the line potential Φ, energy
//! loss, and convergence detection.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::energy::IdealEnergyTable;
use crate::error::{Error, Result};
use crate::population::{EnergyState, TreeNetwork};

/// Total energy that must move before every parent holds at least twice
/// each child's energy: `Σ max(0, 2E_c − E_p)` over existing edges.
pub fn distribution_distance(network: &TreeNetwork, energies: &[f64]) -> f64 {
    network
        .edges()
        .map(|(p, c)| (2.0 * energies[c.0] - energies[p.0]).max(0.0))
        .sum()
}

/// Half the L1 distance between a final energy vector and the ideal one.
pub fn energy_distance(energies: &[f64], ideal: &IdealEnergyTable) -> Result<f64> {
    l1_half(energies, &ideal.per_node)
}

/// Half the L1 distance between two energy vectors over the same nodes.
pub fn l1_half(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::MismatchedNodeSets(a.len(), b.len()));
    }
    Ok(0.5 * a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>())
}

/// `Φ = Σ (λE_{i+1} − E_i)·1{E_i < λE_{i+1}}` along a line from the root.
pub fn potential_phi(network: &TreeNetwork, energies: &[f64], lambda: f64) -> Result<f64> {
    let order = network.line_order()?;
    Ok(order
        .windows(2)
        .map(|w| {
            let (ei, next) = (energies[w[0].0], lambda * energies[w[1].0]);
            (next - ei).max(0.0)
        })
        .sum())
}

/// Fraction of `initial_total` lost so far.
pub fn energy_loss_fraction(energy: &EnergyState, initial_total: f64) -> f64 {
    if initial_total > 0.0 {
        energy.lost() / initial_total
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MetricSample {
    pub step: u64,
    pub dd: f64,
    pub total_energy: f64,
    pub lost: f64,
}

pub const METRICS_HEADER: &str = "step,dd,total_energy,lost";

pub fn metrics_to_csv(samples: &[MetricSample]) -> String {
    let mut out = String::with_capacity(32 * (samples.len() + 1));
    out.push_str(METRICS_HEADER);
    out.push('\n');
    for s in samples {
        let _ = writeln!(out, "{},{},{},{}", s.step, s.dd, s.total_energy, s.lost);
    }
    out
}

/// How convergence is recognised for a protocol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ConvergenceRule {
    /// First step with `DD ≤ threshold`.
    ZeroDistance { threshold: f64 },
    /// Step of the last transfer, once `window` further steps moved nothing.
    Quiescence { window: u64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub tau: u64,
    pub dd_at_tau: f64,
    pub ed: f64,
    pub lost_at_tau: f64,
    pub converged: bool,
}

/// Online convergence detection over a stream of steps.
#[derive(Debug, Clone)]
pub struct ConvergenceDetector {
    rule: ConvergenceRule,
    last_transfer: u64,
    tau: Option<u64>,
}

impl ConvergenceDetector {
    pub fn new(rule: ConvergenceRule) -> Self {
        ConvergenceDetector {
            rule,
            last_transfer: 0,
            tau: None,
        }
    }

    /// Treats `step` as the most recent transfer seen so far.
    pub fn resume_from(&mut self, step: u64) {
        self.last_transfer = step;
    }

    pub fn rule(&self) -> ConvergenceRule {
        self.rule
    }

    /// Observes the state after `step` (step 0 is the starting state).
    /// Returns true once convergence has been established.
    pub fn observe(&mut self, step: u64, moved: bool, dd: f64) -> bool {
        if self.tau.is_some() {
            return true;
        }
        match self.rule {
            ConvergenceRule::ZeroDistance { threshold } => {
                if dd <= threshold {
                    self.tau = Some(step);
                }
            }
            ConvergenceRule::Quiescence { window } => {
                if moved {
                    self.last_transfer = step;
                }
                if step - self.last_transfer >= window {
                    self.tau = Some(self.last_transfer);
                }
            }
        }
        self.tau.is_some()
    }

    pub fn tau(&self) -> Option<u64> {
        self.tau
    }
}

/// Batch form of [`ConvergenceDetector`] over `(step, moved, dd)` triples.
/// If the stream ends first, `tau` is the last observed step and
/// `converged` is false.
pub fn detect_convergence(
    rule: ConvergenceRule,
    stream: impl IntoIterator<Item = (u64, bool, f64)>,
) -> (u64, bool) {
    let mut det = ConvergenceDetector::new(rule);
    let mut horizon = 0;
    for (step, moved, dd) in stream {
        horizon = step;
        if det.observe(step, moved, dd) {
            break;
        }
    }
    match det.tau() {
        Some(t) => (t, true),
        None => (horizon, false),
    }
}
