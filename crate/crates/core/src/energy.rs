//! Energy loss model and the redistribution protocols: ideal-target,
//! λ-exchange, rand-exchange, κ-transfer and k-depth-target.
//!
//! Each protocol is split into a pure *plan* (who sends how much to whom)
//! and the application of that plan to an [`EnergyState`] with a loss
//! fraction β. The simulation draws β only after a plan exists, so
//! interactions that move nothing consume no randomness.
//!
//! Strict inequalities in firing conditions are evaluated with a relative
//! slack of [`CONDITION_SLACK`] so that rounding noise at a fixed point does
//! not keep re-triggering transfers.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{EnergyState, NodeConfig, NodeId, Population, TreeNetwork};
use crate::scheduler::Pair;

pub const CONDITION_SLACK: f64 = 1e-9;

/// Upper clamp for sampled loss fractions.
pub const MAX_BETA: f64 = 0.999;

/// `a < b`, beyond relative slack.
pub fn clearly_less(a: f64, b: f64) -> bool {
    b - a > CONDITION_SLACK * a.abs().max(b.abs())
}

/// `a > b`, beyond relative slack.
pub fn clearly_greater(a: f64, b: f64) -> bool {
    clearly_less(b, a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LossModel {
    #[default]
    Lossless,
    Gaussian { mean: f64, stddev: f64 },
}

impl LossModel {
    /// β ~ N(0.2, 0.05), the lossy setting of the reference experiments.
    pub const STANDARD_LOSSY: LossModel = LossModel::Gaussian {
        mean: 0.2,
        stddev: 0.05,
    };

    pub fn validate(&self) -> Result<()> {
        match *self {
            LossModel::Lossless => Ok(()),
            LossModel::Gaussian { mean, stddev } => {
                if !(0.0..1.0).contains(&mean) || !(stddev >= 0.0 && stddev.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "loss model N({mean}, {stddev}) out of range"
                    )));
                }
                Ok(())
            }
        }
    }

    pub fn is_lossless(&self) -> bool {
        matches!(self, LossModel::Lossless)
    }

    /// One loss fraction, clamped to `[0, MAX_BETA]`. Lossless draws nothing.
    pub fn sample_beta<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match *self {
            LossModel::Lossless => 0.0,
            LossModel::Gaussian { mean, stddev } => {
                let normal = Normal::new(mean, stddev).expect("validated loss model");
                normal.sample(rng).clamp(0.0, MAX_BETA)
            }
        }
    }
}

pub fn sample_beta<R: Rng + ?Sized>(model: &LossModel, rng: &mut R) -> f64 {
    model.sample_beta(rng)
}

/// A single planned energy movement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transfer {
    pub from: NodeId,
    pub to: NodeId,
    pub amount: f64,
}

impl Transfer {
    pub fn apply(&self, energy: &mut EnergyState, beta: f64) {
        energy.transfer(self.from, self.to, self.amount, beta);
    }
}

fn apply_plan(plan: Option<Transfer>, energy: &mut EnergyState, beta: f64) -> Option<Transfer> {
    if let Some(t) = plan {
        t.apply(energy, beta);
    }
    plan
}

/// Energy each node holds in the unique exact distribution of a tree:
/// `γ_v = 2^(h − d_v) · x` with `x = E / Σ_d n_d · 2^(h − d)`.
#[derive(Debug, Clone, PartialEq)]
pub struct IdealEnergyTable {
    pub per_node: Vec<f64>,
    /// Ideal energy at the deepest level.
    pub base: f64,
    pub height: usize,
    /// Number of nodes at each depth.
    pub level_counts: Vec<usize>,
}

impl IdealEnergyTable {
    pub fn get(&self, id: NodeId) -> f64 {
        self.per_node[id.0]
    }
}

pub fn compute_ideal_energies(network: &TreeNetwork, total: f64) -> Result<IdealEnergyTable> {
    if !network.is_spanning_tree() {
        return Err(Error::IncompleteNetwork);
    }
    let depths = network.depths();
    let height = depths.iter().copied().max().unwrap_or(0);
    let mut level_counts = vec![0usize; height + 1];
    for &d in &depths {
        level_counts[d] += 1;
    }
    let weight = |d: usize| 2f64.powi((height - d) as i32);
    let denom: f64 = level_counts
        .iter()
        .enumerate()
        .map(|(d, &count)| count as f64 * weight(d))
        .sum();
    let base = total / denom;
    Ok(IdealEnergyTable {
        per_node: depths.iter().map(|&d| weight(d) * base).collect(),
        base,
        height,
        level_counts,
    })
}

/// Surplus-to-deficit move of `min(surplus, deficit)` between two nodes with
/// targets.
fn plan_targeted(u: NodeId, v: NodeId, energy: &EnergyState, tu: f64, tv: f64) -> Option<Transfer> {
    let (eu, ev) = (energy.get(u), energy.get(v));
    if clearly_greater(eu, tu) && clearly_less(ev, tv) {
        Some(Transfer {
            from: u,
            to: v,
            amount: (eu - tu).min(tv - ev),
        })
    } else if clearly_less(eu, tu) && clearly_greater(ev, tv) {
        Some(Transfer {
            from: v,
            to: u,
            amount: (tu - eu).min(ev - tv),
        })
    } else {
        None
    }
}

pub fn plan_ideal_target(pair: Pair, energy: &EnergyState, targets: &IdealEnergyTable) -> Option<Transfer> {
    let (u, v) = pair;
    plan_targeted(u, v, energy, targets.get(u), targets.get(v))
}

/// ideal-target on any interacting pair.
pub fn ideal_target_step(
    pair: Pair,
    energy: &mut EnergyState,
    targets: &IdealEnergyTable,
    beta: f64,
) -> Option<Transfer> {
    apply_plan(plan_ideal_target(pair, energy, targets), energy, beta)
}

pub fn plan_lambda_exchange(parent: NodeId, child: NodeId, energy: &EnergyState, lambda: f64) -> Option<Transfer> {
    let (ep, ec) = (energy.get(parent), energy.get(child));
    clearly_less(ep, lambda * ec).then(|| Transfer {
        from: child,
        to: parent,
        amount: (lambda * ec - ep) / (lambda + 1.0),
    })
}

/// λ-exchange on a parent-child pair: if the parent holds less than λ times
/// the child's energy, the child sends `(λE_c − E_p)/(λ+1)` upward.
pub fn lambda_exchange_step(
    parent: NodeId,
    child: NodeId,
    energy: &mut EnergyState,
    lambda: f64,
    beta: f64,
) -> Option<Transfer> {
    apply_plan(plan_lambda_exchange(parent, child, energy, lambda), energy, beta)
}

/// λ drawn uniformly from `[lo, hi]` with one draw from `rng`.
pub fn draw_uniform_lambda<R: Rng + ?Sized>(rng: &mut R, lo: f64, hi: f64) -> f64 {
    let u: f64 = rng.random();
    lo + (hi - lo) * u
}

/// rand-exchange: λ-exchange with a fresh λ ~ U[lo, hi] per interaction.
pub fn rand_exchange_step<R: Rng + ?Sized>(
    parent: NodeId,
    child: NodeId,
    energy: &mut EnergyState,
    rng: &mut R,
    lo: f64,
    hi: f64,
    beta: f64,
) -> Option<Transfer> {
    let lambda = draw_uniform_lambda(rng, lo, hi);
    lambda_exchange_step(parent, child, energy, lambda, beta)
}

pub fn plan_kappa_transfer(parent: NodeId, child: NodeId, energy: &EnergyState, kappa: f64) -> Option<Transfer> {
    let (ep, ec) = (energy.get(parent), energy.get(child));
    clearly_less(ep, 2.0 * ec).then_some(Transfer {
        from: child,
        to: parent,
        amount: kappa * ec,
    })
}

/// κ-transfer on a parent-child pair: if the parent holds less than twice
/// the child's energy, the child sends a κ fraction of its energy upward.
pub fn kappa_transfer_step(
    parent: NodeId,
    child: NodeId,
    energy: &mut EnergyState,
    kappa: f64,
    beta: f64,
) -> Option<Transfer> {
    apply_plan(plan_kappa_transfer(parent, child, energy, kappa), energy, beta)
}

/// Target `ζ_v = E / (k^{d_v} (h_v + 1))` of a non-root node, from its
/// current depth and height estimates.
pub fn depth_target(node: &NodeConfig, k: usize, total: f64) -> Result<f64> {
    if node.state.is_root() {
        return Err(Error::RootHasNoTarget(node.id));
    }
    let r = node.registers;
    Ok(total / ((k as f64).powi(r.d as i32) * (r.h as f64 + 1.0)))
}

/// The root serves the other node's need `y = ζ − E`, moving at most the
/// root's own energy.
fn plan_root_exchange(root: NodeId, other: NodeId, pop: &Population, k: usize, total: f64) -> Option<Transfer> {
    let zeta = depth_target(&pop.config(other), k, total).ok()?;
    let e_other = pop.energy.get(other);
    let e_root = pop.energy.get(root);
    let amount = (zeta - e_other).abs().min(e_root);
    if amount <= 0.0 {
        return None;
    }
    if clearly_less(e_other, zeta) {
        Some(Transfer { from: root, to: other, amount })
    } else if clearly_greater(e_other, zeta) {
        Some(Transfer { from: other, to: root, amount })
    } else {
        None
    }
}

pub fn plan_k_depth_target(pair: Pair, pop: &Population, k: usize, total: f64) -> Option<Transfer> {
    let (u, v) = pair;
    match (pop.states[u.0].is_root(), pop.states[v.0].is_root()) {
        (false, false) => {
            let zu = depth_target(&pop.config(u), k, total).ok()?;
            let zv = depth_target(&pop.config(v), k, total).ok()?;
            plan_targeted(u, v, &pop.energy, zu, zv)
        }
        (true, false) => plan_root_exchange(u, v, pop, k, total),
        (false, true) => plan_root_exchange(v, u, pop, k, total),
        (true, true) => None,
    }
}

/// k-depth-target on any interacting pair; targets are recomputed from the
/// nodes' current register estimates.
pub fn k_depth_target_step(pair: Pair, pop: &mut Population, k: usize, total: f64, beta: f64) -> Option<Transfer> {
    let plan = plan_k_depth_target(pair, pop, k, total);
    apply_plan(plan, &mut pop.energy, beta)
}

/// A redistribution protocol with its runtime parameters.
#[derive(Debug, Clone, PartialEq)]
pub enum EnergyProtocol {
    IdealTarget(IdealEnergyTable),
    LambdaExchange { lambda: f64 },
    RandExchange { lo: f64, hi: f64 },
    KappaTransfer { kappa: f64 },
    KDepthTarget { k: usize, total: f64 },
}

/// Outcome of planning one interaction.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Planned {
    pub transfer: Option<Transfer>,
    /// λ drawn by rand-exchange, if any.
    pub lambda: Option<f64>,
}

impl EnergyProtocol {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        match *self {
            EnergyProtocol::IdealTarget(_) => Ok(()),
            EnergyProtocol::LambdaExchange { lambda } if !(lambda >= 2.0 && lambda.is_finite()) => {
                bad(format!("lambda must be >= 2, got {lambda}"))
            }
            EnergyProtocol::RandExchange { lo, hi } if !(lo >= 2.0 && hi >= lo && hi.is_finite()) => {
                bad(format!("rand-exchange interval [{lo}, {hi}] invalid"))
            }
            EnergyProtocol::KappaTransfer { kappa } if !(kappa > 0.0 && kappa < 1.0) => {
                bad(format!("kappa must lie in (0, 1), got {kappa}"))
            }
            EnergyProtocol::KDepthTarget { k, total } if k < 2 || total.is_nan() || total <= 0.0 => {
                bad(format!("k-depth-target needs k >= 2 and positive total, got k={k}, total={total}"))
            }
            _ => Ok(()),
        }
    }

    /// Targeted protocols converge to a fixed point rather than to zero
    /// distribution distance.
    pub fn is_targeted(&self) -> bool {
        matches!(self, EnergyProtocol::IdealTarget(_) | EnergyProtocol::KDepthTarget { .. })
    }

    /// Plans the transfer for one interaction. `draw_lambda` is called only
    /// by rand-exchange on parent-child pairs.
    pub fn plan(&self, pop: &Population, pair: Pair, draw_lambda: &mut dyn FnMut(f64, f64) -> f64) -> Planned {
        let edge = || pop.network.orient_edge(pair.0, pair.1);
        match *self {
            EnergyProtocol::IdealTarget(ref table) => Planned {
                transfer: plan_ideal_target(pair, &pop.energy, table),
                lambda: None,
            },
            EnergyProtocol::LambdaExchange { lambda } => Planned {
                transfer: edge().and_then(|(p, c)| plan_lambda_exchange(p, c, &pop.energy, lambda)),
                lambda: None,
            },
            EnergyProtocol::RandExchange { lo, hi } => match edge() {
                Some((p, c)) => {
                    let lambda = draw_lambda(lo, hi);
                    Planned {
                        transfer: plan_lambda_exchange(p, c, &pop.energy, lambda),
                        lambda: Some(lambda),
                    }
                }
                None => Planned::default(),
            },
            EnergyProtocol::KappaTransfer { kappa } => Planned {
                transfer: edge().and_then(|(p, c)| plan_kappa_transfer(p, c, &pop.energy, kappa)),
                lambda: None,
            },
            EnergyProtocol::KDepthTarget { k, total } => Planned {
                transfer: plan_k_depth_target(pair, pop, k, total),
                lambda: None,
            },
        }
    }

    /// Target energy of a node under this protocol, if it has one.
    pub fn target_of(&self, pop: &Population, id: NodeId) -> Option<f64> {
        match self {
            EnergyProtocol::IdealTarget(table) => table.per_node.get(id.0).copied(),
            EnergyProtocol::KDepthTarget { k, total } => depth_target(&pop.config(id), *k, *total).ok(),
            _ => None,
        }
    }

    /// Writes every node's current target into its `target` register.
    pub fn refresh_targets(&self, pop: &mut Population) {
        for i in 0..pop.len() {
            pop.registers[i].target = self.target_of(pop, NodeId(i));
        }
    }
}
