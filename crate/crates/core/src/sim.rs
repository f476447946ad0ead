//! The run driver: builds the starting population, feeds interactions from
//! a scheduler (or a recorded trace) through the formation, estimation and
//! redistribution rules, and reports convergence.
//!
//! In two-phase mode the redistribution protocol is switched on only after
//! the tree is complete and every depth and height estimate is correct; the
//! redistribution clock starts at zero at that moment. In concurrent mode
//! every rule family runs from the first step and all step counts are
//! global.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{EnergyProtocolConfig, ExperimentConfig, InitialEnergy, PhaseMode, TargetEnergyBasis};
use crate::energy::{compute_ideal_energies, EnergyProtocol, IdealEnergyTable, LossModel, Transfer};
use crate::error::{Error, Result};
use crate::estimation::{apply_estimation_rules, estimation_stabilized};
use crate::formation::{apply_formation_rule, is_formation_complete, FormationProtocol, RuleTag};
use crate::metrics::{
    distribution_distance, energy_distance, ConvergenceDetector, ConvergenceReport, ConvergenceRule, MetricSample,
};
use crate::population::{NodeId, Population};
use crate::scheduler::{
    derive_run_seed, InteractionSource, InteractionTrace, Pair, Scheduler, SchedulerRng, TraceRecord, TraceReplay,
};
use crate::snapshot::NetworkSnapshot;

/// Relative DD threshold for the zero-distance convergence rule.
pub const DD_TOLERANCE: f64 = 1e-9;

const SETUP_STREAM: u64 = 0x0005_EED0_F141_71A1;

/// Binds a protocol selection to its runtime parameters. `ideal` is only
/// read by ideal-target; without it the protocol has an empty table.
pub fn bind_protocol(cfg: &EnergyProtocolConfig, ideal: Option<IdealEnergyTable>, total: f64) -> EnergyProtocol {
    match *cfg {
        EnergyProtocolConfig::IdealTarget => EnergyProtocol::IdealTarget(ideal.unwrap_or(IdealEnergyTable {
            per_node: Vec::new(),
            base: 0.0,
            height: 0,
            level_counts: Vec::new(),
        })),
        EnergyProtocolConfig::LambdaExchange { lambda } => EnergyProtocol::LambdaExchange { lambda },
        EnergyProtocolConfig::RandExchange { lo, hi } => EnergyProtocol::RandExchange { lo, hi },
        EnergyProtocolConfig::KappaTransfer { kappa } => EnergyProtocol::KappaTransfer { kappa },
        EnergyProtocolConfig::KDepthTarget { k } => EnergyProtocol::KDepthTarget { k, total },
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunSettings {
    pub formation: FormationProtocol,
    pub energy: EnergyProtocolConfig,
    pub loss: LossModel,
    pub phase_mode: PhaseMode,
    pub basis: TargetEnergyBasis,
    /// Step limit per phase; concurrent runs get twice this in total.
    pub step_budget: u64,
    pub window: u64,
    pub record_trace: bool,
    /// Metric sampling period in redistribution steps; 0 disables sampling.
    pub sample_every: u64,
}

impl RunSettings {
    pub fn from_config(cfg: &ExperimentConfig) -> Self {
        RunSettings {
            formation: cfg.protocol,
            energy: cfg.energy_protocol,
            loss: cfg.loss,
            phase_mode: cfg.phase_mode,
            basis: cfg.target_energy_basis,
            step_budget: cfg.step_budget(),
            window: cfg.quiescence_window(),
            record_trace: cfg.emit_traces(),
            sample_every: if !cfg.emit_metrics {
                0
            } else if cfg.n <= 10 {
                1
            } else {
                cfg.n as u64
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Formation,
    Redistribution,
    Concurrent,
}

/// What happened in one interaction, handed to the step observer.
#[derive(Debug)]
pub struct StepEvent<'a> {
    /// Global step index, starting at 0.
    pub step: u64,
    pub phase: Phase,
    pub pair: Pair,
    pub rule: RuleTag,
    pub transfer: Option<Transfer>,
    pub beta: f64,
    pub lambda: Option<f64>,
    pub population: &'a Population,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    Converged,
    FormationBudget,
    RedistributionBudget,
    SourceExhausted,
}

/// One row of the per-run table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub run_index: u64,
    pub seed: u64,
    pub formation_steps: u64,
    pub estimation_steps: u64,
    pub tau: u64,
    pub converged: bool,
    pub ed: f64,
    pub ed_percent: f64,
    pub loss_percent: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub row: RunRow,
    pub report: ConvergenceReport,
    pub stop: StopReason,
    pub population: Population,
    /// Exact distribution of the formed tree for the post-formation total.
    pub ideal: Option<IdealEnergyTable>,
    pub initial_total: f64,
    pub post_formation_total: Option<f64>,
    pub trace: Option<InteractionTrace>,
    pub metrics: Vec<MetricSample>,
    pub total_steps: u64,
}

impl RunOutcome {
    pub fn digest(&self) -> String {
        NetworkSnapshot::from_population(&self.population).digest()
    }
}

/// Starting population of a run: w-registers are a seeded permutation of
/// `0..n`, energies are split uniformly or by normalized uniform weights.
pub fn initial_population(cfg: &ExperimentConfig, run_seed: u64) -> Result<Population> {
    let n = cfg.n;
    let total = cfg.total_energy();
    let mut rng = SchedulerRng::new(run_seed ^ SETUP_STREAM);
    let mut keys: Vec<u64> = (0..n as u64).collect();
    keys.shuffle(&mut rng);
    let energies = match cfg.initial_energy {
        InitialEnergy::Uniform => vec![total / n as f64; n],
        InitialEnergy::Random => {
            let weights: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            let sum: f64 = weights.iter().sum();
            let mut e: Vec<f64> = weights.iter().map(|w| total * w / sum).collect();
            let head: f64 = e[..n - 1].iter().sum();
            e[n - 1] = (total - head).max(0.0);
            e
        }
    };
    Population::new(cfg.protocol.arity_bound(), energies, keys)
}

struct Driver<'a> {
    pop: Population,
    settings: &'a RunSettings,
    source: &'a mut dyn InteractionSource,
    observer: &'a mut dyn FnMut(&StepEvent),
    step: u64,
    trace: Option<InteractionTrace>,
}

impl Driver<'_> {
    /// One interaction. Returns `None` when the source has no more pairs.
    fn step(&mut self, phase: Phase, protocol: Option<&EnergyProtocol>) -> Result<Option<(RuleTag, Option<Transfer>)>> {
        let Some(pair) = self.source.next_pair(self.pop.len()) else {
            return Ok(None);
        };
        let rule = apply_formation_rule(self.settings.formation, &mut self.pop, pair)?;
        apply_estimation_rules(&self.pop.network, &mut self.pop.registers, pair);
        let (mut transfer, mut beta, mut lambda) = (None, 0.0, None);
        if let Some(protocol) = protocol {
            let source = &mut *self.source;
            let planned = protocol.plan(&self.pop, pair, &mut |lo, hi| source.draw_lambda(lo, hi));
            lambda = planned.lambda;
            if let Some(t) = planned.transfer {
                beta = self.source.draw_beta(&self.settings.loss);
                t.apply(&mut self.pop.energy, beta);
                transfer = Some(t);
            }
        }
        if let Some(trace) = self.trace.as_mut() {
            trace.records.push(TraceRecord {
                step: self.step,
                pair,
                rule,
                moved: transfer.map(|t| t.amount),
                beta: transfer.map(|_| beta),
                lambda,
            });
        }
        (self.observer)(&StepEvent {
            step: self.step,
            phase,
            pair,
            rule,
            transfer,
            beta,
            lambda,
            population: &self.pop,
        });
        self.step += 1;
        Ok(Some((rule, transfer)))
    }

    fn ready(&self) -> Result<bool> {
        Ok(is_formation_complete(&self.pop.network) && estimation_stabilized(&self.pop.network, &self.pop.registers)?)
    }
}

fn convergence_rule(protocol: &EnergyProtocol, settings: &RunSettings, reference_total: f64) -> ConvergenceRule {
    if protocol.is_targeted() {
        ConvergenceRule::Quiescence {
            window: settings.window,
        }
    } else {
        ConvergenceRule::ZeroDistance {
            threshold: DD_TOLERANCE * reference_total,
        }
    }
}

fn sample(pop: &Population, step: u64, dd: f64) -> MetricSample {
    MetricSample {
        step,
        dd,
        total_energy: pop.energy.total(),
        lost: pop.energy.lost(),
    }
}

/// Runs one simulation from `pop` with interactions drawn from `source`.
/// `observer` sees the population after every interaction.
pub fn simulate(
    pop: Population,
    settings: &RunSettings,
    source: &mut dyn InteractionSource,
    observer: &mut dyn FnMut(&StepEvent),
) -> Result<RunOutcome> {
    if pop.len() < 2 {
        return Err(Error::InvalidParameter("a run needs at least two nodes".into()));
    }
    let initial_total = pop.energy.total();
    let mut driver = Driver {
        pop,
        settings,
        source,
        observer,
        step: 0,
        trace: settings.record_trace.then(InteractionTrace::default),
    };
    match settings.phase_mode {
        PhaseMode::TwoPhase => run_two_phase(&mut driver, initial_total),
        PhaseMode::Concurrent => run_concurrent(&mut driver, initial_total),
    }
}

struct Progress {
    formation_steps: Option<u64>,
    ready_at: Option<u64>,
}

impl Progress {
    /// Updates completion markers after the step that ended at `now`.
    fn track(&mut self, driver: &Driver, now: u64, rule: RuleTag, changed_registers: bool) -> Result<()> {
        if self.formation_steps.is_none() && rule.connects() && is_formation_complete(&driver.pop.network) {
            self.formation_steps = Some(now);
        }
        if self.formation_steps.is_some() && self.ready_at.is_none() && (changed_registers || rule.connects())
            && driver.ready()? {
                self.ready_at = Some(now);
            }
        Ok(())
    }

    fn estimation_steps(&self) -> u64 {
        match (self.formation_steps, self.ready_at) {
            (Some(f), Some(r)) => r - f,
            _ => 0,
        }
    }
}

fn registers_snapshot(pop: &Population) -> Vec<(u32, u32)> {
    pop.registers.iter().map(|r| (r.d, r.h)).collect()
}

fn run_two_phase(driver: &mut Driver, initial_total: f64) -> Result<RunOutcome> {
    let settings = driver.settings;
    let mut progress = Progress {
        formation_steps: None,
        ready_at: None,
    };
    if is_formation_complete(&driver.pop.network) {
        progress.formation_steps = Some(0);
        if driver.ready()? {
            progress.ready_at = Some(0);
        }
    }
    while progress.ready_at.is_none() {
        if driver.step >= settings.step_budget {
            return Ok(unfinished(driver, initial_total, &progress, StopReason::FormationBudget));
        }
        let before = registers_snapshot(&driver.pop);
        let Some((rule, _)) = driver.step(Phase::Formation, None)? else {
            return Ok(unfinished(driver, initial_total, &progress, StopReason::SourceExhausted));
        };
        let changed = before != registers_snapshot(&driver.pop);
        progress.track(driver, driver.step, rule, changed)?;
    }

    let post_total = driver.pop.energy.total();
    let ideal = compute_ideal_energies(&driver.pop.network, post_total)?;
    let basis_total = match settings.basis {
        TargetEnergyBasis::PostFormation => post_total,
        TargetEnergyBasis::Initial => initial_total,
    };
    let protocol_ideal = if basis_total == post_total {
        ideal.clone()
    } else {
        compute_ideal_energies(&driver.pop.network, basis_total)?
    };
    let protocol = bind_protocol(&settings.energy, Some(protocol_ideal), basis_total);
    protocol.validate()?;
    let mut detector = ConvergenceDetector::new(convergence_rule(&protocol, settings, post_total));

    let mut dd = distribution_distance(&driver.pop.network, driver.pop.energy.as_slice());
    let mut metrics = Vec::new();
    if settings.sample_every > 0 {
        metrics.push(sample(&driver.pop, 0, dd));
    }
    let mut t = 0u64;
    let mut stop = StopReason::Converged;
    let mut done = detector.observe(0, false, dd);
    while !done {
        if t >= settings.step_budget {
            stop = StopReason::RedistributionBudget;
            break;
        }
        let Some((_, transfer)) = driver.step(Phase::Redistribution, Some(&protocol))? else {
            stop = StopReason::SourceExhausted;
            break;
        };
        t += 1;
        if transfer.is_some() {
            dd = distribution_distance(&driver.pop.network, driver.pop.energy.as_slice());
        }
        done = detector.observe(t, transfer.is_some(), dd);
        if settings.sample_every > 0 && (t.is_multiple_of(settings.sample_every) || done) {
            metrics.push(sample(&driver.pop, t, dd));
        }
    }
    if settings.sample_every > 0 && metrics.last().map(|m| m.step) != Some(t) {
        metrics.push(sample(&driver.pop, t, dd));
    }
    protocol.refresh_targets(&mut driver.pop);

    let (tau, converged) = match detector.tau() {
        Some(tau) => (tau, true),
        None => (t, false),
    };
    Ok(finish(
        driver,
        initial_total,
        &progress,
        Finished {
            tau,
            converged,
            stop,
            dd,
            ideal,
            post_total,
            metrics,
        },
    ))
}

fn run_concurrent(driver: &mut Driver, initial_total: f64) -> Result<RunOutcome> {
    let settings = driver.settings;
    let budget = 2 * settings.step_budget;
    let mut progress = Progress {
        formation_steps: None,
        ready_at: None,
    };
    if is_formation_complete(&driver.pop.network) {
        progress.formation_steps = Some(0);
        if driver.ready()? {
            progress.ready_at = Some(0);
        }
    }
    // ideal-target needs the finished tree; it starts once formation ends.
    let mut protocol = match settings.energy {
        EnergyProtocolConfig::IdealTarget => None,
        _ => Some(bind_protocol(&settings.energy, None, initial_total)),
    };
    if let Some(p) = &protocol {
        p.validate()?;
    }
    let mut ideal: Option<IdealEnergyTable> = None;
    let mut post_total = None;
    let mut detector: Option<ConvergenceDetector> = None;
    let mut last_transfer = 0u64;
    let mut dd = distribution_distance(&driver.pop.network, driver.pop.energy.as_slice());
    let mut metrics = Vec::new();
    if settings.sample_every > 0 {
        metrics.push(sample(&driver.pop, 0, dd));
    }
    let mut stop = StopReason::Converged;
    let mut done = false;
    let open_gate = |driver: &Driver, progress: &Progress| progress.ready_at.is_some() && !driver.pop.is_empty();

    loop {
        if progress.formation_steps.is_some() && ideal.is_none() {
            let total = driver.pop.energy.total();
            let table = compute_ideal_energies(&driver.pop.network, total)?;
            if protocol.is_none() {
                let basis = match settings.basis {
                    TargetEnergyBasis::PostFormation => total,
                    TargetEnergyBasis::Initial => initial_total,
                };
                let own = compute_ideal_energies(&driver.pop.network, basis)?;
                protocol = Some(bind_protocol(&settings.energy, Some(own), basis));
            }
            ideal = Some(table);
            post_total = Some(total);
        }
        if detector.is_none() && open_gate(driver, &progress) {
            let p = protocol.as_ref().expect("protocol bound once formation is complete");
            let mut det = ConvergenceDetector::new(convergence_rule(p, settings, post_total.unwrap_or(initial_total)));
            det.resume_from(last_transfer);
            done = det.observe(driver.step, false, dd);
            detector = Some(det);
        }
        if done {
            break;
        }
        if driver.step >= budget {
            stop = if progress.ready_at.is_some() {
                StopReason::RedistributionBudget
            } else {
                StopReason::FormationBudget
            };
            break;
        }
        let before = registers_snapshot(&driver.pop);
        let Some((rule, transfer)) = driver.step(Phase::Concurrent, protocol.as_ref())? else {
            stop = StopReason::SourceExhausted;
            break;
        };
        let now = driver.step;
        let changed = before != registers_snapshot(&driver.pop);
        progress.track(driver, now, rule, changed)?;
        if transfer.is_some() {
            last_transfer = now;
        }
        if transfer.is_some() || rule.connects() {
            dd = distribution_distance(&driver.pop.network, driver.pop.energy.as_slice());
        }
        if let Some(det) = detector.as_mut() {
            done = det.observe(now, transfer.is_some(), dd);
        }
        if settings.sample_every > 0 && (now.is_multiple_of(settings.sample_every) || done) {
            metrics.push(sample(&driver.pop, now, dd));
        }
    }
    let now = driver.step;
    if settings.sample_every > 0 && metrics.last().map(|m| m.step) != Some(now) {
        metrics.push(sample(&driver.pop, now, dd));
    }

    let Some(ideal) = ideal else {
        return Ok(unfinished(driver, initial_total, &progress, stop));
    };
    if let Some(p) = &protocol {
        p.refresh_targets(&mut driver.pop);
    }
    let (tau, converged) = match detector.and_then(|d| d.tau()) {
        Some(tau) => (tau, true),
        None => (now, false),
    };
    Ok(finish(
        driver,
        initial_total,
        &progress,
        Finished {
            tau,
            converged,
            stop,
            dd,
            ideal,
            post_total: post_total.unwrap_or(initial_total),
            metrics,
        },
    ))
}

struct Finished {
    tau: u64,
    converged: bool,
    stop: StopReason,
    dd: f64,
    ideal: IdealEnergyTable,
    post_total: f64,
    metrics: Vec<MetricSample>,
}

fn finish(driver: &mut Driver, initial_total: f64, progress: &Progress, f: Finished) -> RunOutcome {
    let pop = driver.pop.clone();
    let ed = energy_distance(pop.energy.as_slice(), &f.ideal).expect("ideal table covers every node");
    let report = ConvergenceReport {
        tau: f.tau,
        dd_at_tau: f.dd,
        ed,
        lost_at_tau: pop.energy.lost(),
        converged: f.converged,
    };
    RunOutcome {
        row: RunRow {
            run_index: 0,
            seed: 0,
            formation_steps: progress.formation_steps.unwrap_or(0),
            estimation_steps: progress.estimation_steps(),
            tau: f.tau,
            converged: f.converged,
            ed,
            ed_percent: 100.0 * ed / f.post_total,
            loss_percent: 100.0 * pop.energy.lost() / initial_total,
        },
        report,
        stop: f.stop,
        population: pop,
        ideal: Some(f.ideal),
        initial_total,
        post_formation_total: Some(f.post_total),
        trace: driver.trace.take(),
        metrics: f.metrics,
        total_steps: driver.step,
    }
}

fn unfinished(driver: &mut Driver, initial_total: f64, progress: &Progress, stop: StopReason) -> RunOutcome {
    let pop = driver.pop.clone();
    let lost = pop.energy.lost();
    RunOutcome {
        row: RunRow {
            run_index: 0,
            seed: 0,
            formation_steps: progress.formation_steps.unwrap_or(driver.step),
            estimation_steps: progress.estimation_steps(),
            tau: 0,
            converged: false,
            ed: f64::NAN,
            ed_percent: f64::NAN,
            loss_percent: 100.0 * lost / initial_total,
        },
        report: ConvergenceReport {
            tau: 0,
            dd_at_tau: distribution_distance(&pop.network, pop.energy.as_slice()),
            ed: f64::NAN,
            lost_at_tau: lost,
            converged: false,
        },
        stop,
        population: pop,
        ideal: None,
        initial_total,
        post_formation_total: None,
        trace: driver.trace.take(),
        metrics: Vec::new(),
        total_steps: driver.step,
    }
}

/// Formation and estimation only, driven by the random scheduler seeded
/// with `run_seed`. Returns the population once the tree is complete and
/// every estimate is correct, with the step counts of both milestones.
pub fn form_network(cfg: &ExperimentConfig, run_seed: u64) -> Result<(Population, u64, u64)> {
    cfg.validate()?;
    let mut pop = initial_population(cfg, run_seed)?;
    let mut source = Scheduler::random(SchedulerRng::new(run_seed));
    let budget = cfg.step_budget();
    let mut formed = None;
    for step in 1..=budget {
        let pair = source.next_pair(cfg.n).expect("random scheduler always yields a pair");
        apply_formation_rule(cfg.protocol, &mut pop, pair)?;
        apply_estimation_rules(&pop.network, &mut pop.registers, pair);
        if formed.is_none() && is_formation_complete(&pop.network) {
            formed = Some(step);
        }
        if let Some(f) = formed {
            if estimation_stabilized(&pop.network, &pop.registers)? {
                return Ok((pop, f, step));
            }
        }
    }
    Err(Error::InvalidParameter(format!("formation did not finish within {budget} steps")))
}

/// Runs repetition `run_index` of an experiment with its derived seed.
pub fn run_single(cfg: &ExperimentConfig, run_index: u64) -> Result<RunOutcome> {
    run_single_observed(cfg, run_index, &mut |_| {})
}

pub fn run_single_observed(
    cfg: &ExperimentConfig,
    run_index: u64,
    observer: &mut dyn FnMut(&StepEvent),
) -> Result<RunOutcome> {
    cfg.validate()?;
    let seed = derive_run_seed(cfg.master_seed, run_index);
    let pop = initial_population(cfg, seed)?;
    let settings = RunSettings::from_config(cfg);
    let mut source = Scheduler::random(SchedulerRng::new(seed));
    let mut out = simulate(pop, &settings, &mut source, observer)?;
    out.row.run_index = run_index;
    out.row.seed = seed;
    let digest = out.digest();
    if let Some(trace) = out.trace.as_mut() {
        trace.seed = seed;
        trace.set_meta("rng", SchedulerRng::ALGORITHM);
        trace.set_meta("run_index", run_index.to_string());
        trace.set_meta("config", cfg.to_json());
        trace.set_meta("digest", digest);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayReport {
    pub steps: usize,
    pub digest: String,
}

/// Re-executes a recorded run and checks every record and the final
/// snapshot digest against the trace.
pub fn replay_trace(trace: &InteractionTrace) -> Result<ReplayReport> {
    let cfg_text = trace
        .meta("config")
        .ok_or_else(|| Error::ReplayMismatch("trace has no config".into()))?;
    let expected = trace
        .meta("digest")
        .ok_or_else(|| Error::ReplayMismatch("trace has no digest".into()))?;
    let cfg = ExperimentConfig::from_json(cfg_text)?;
    let pop = initial_population(&cfg, trace.seed)?;
    let mut settings = RunSettings::from_config(&cfg);
    settings.record_trace = true;
    settings.sample_every = 0;
    let mut source = TraceReplay::new(trace);
    let out = simulate(pop, &settings, &mut source, &mut |_| {})?;
    if let Some(why) = source.desynced() {
        return Err(Error::ReplayMismatch(why.to_string()));
    }
    if source.remaining() > 0 {
        return Err(Error::ReplayMismatch(format!(
            "run ended with {} trace records unused",
            source.remaining()
        )));
    }
    let replayed = out.trace.as_ref().map(|t| t.records.as_slice()).unwrap_or_default();
    if let Some((a, b)) = trace.records.iter().zip(replayed).find(|(a, b)| a != b) {
        return Err(Error::ReplayMismatch(format!(
            "step {}: trace says {:?}, replay gives {:?}",
            a.step, a, b
        )));
    }
    let digest = out.digest();
    if digest != expected {
        return Err(Error::ReplayMismatch(format!("digest {digest} differs from recorded {expected}")));
    }
    Ok(ReplayReport {
        steps: trace.records.len(),
        digest,
    })
}

/// Final energies of a run, indexed by node.
pub fn final_energies(out: &RunOutcome) -> Vec<(NodeId, f64)> {
    out.population.network.ids().map(|v| (v, out.population.energy.get(v))).collect()
}
