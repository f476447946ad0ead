//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails. Pass criterion numbers as arguments to
//! run a subset, e.g. `cargo test --test acceptance -- 3 9`.
//!
//! Every stochastic check uses master seed 0.

use std::collections::VecDeque;
use std::fmt::Write as _;
use std::fs;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use tree_energy::config::{pairs_count, EnergyProtocolConfig, ExperimentConfig, InitialEnergy, PhaseMode};
use tree_energy::energy::{lambda_exchange_step, plan_lambda_exchange, LossModel};
use tree_energy::equilibrium::{exact_condition_line, ExactVariant};
use tree_energy::experiment::{run_experiment, Aggregate};
use tree_energy::formation::{apply_formation_rule, is_formation_complete, FormationProtocol};
use tree_energy::metrics::potential_phi;
use tree_energy::population::{check_distribution, check_ratio_distribution, DistributionKind, TreeNetwork};
use tree_energy::scheduler::{derive_run_seed, InteractionSource, Scheduler, SchedulerRng};
use tree_energy::sim::{form_network, initial_population, replay_trace, run_single, run_single_observed};

mod common;

use common::formation_chain::expected_formation_steps;
use common::golden_cases;

const SEEDS: u64 = 100;

type Verdict = Result<String, String>;

struct Criterion {
    id: u32,
    name: &'static str,
    limit: Option<Duration>,
    check: fn() -> Verdict,
}

fn main() -> ExitCode {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let criteria = [
        Criterion { id: 1, name: "golden examples", limit: Some(Duration::from_secs(1)), check: c1_golden },
        Criterion { id: 2, name: "formation safety and liveness", limit: Some(Duration::from_secs(120)), check: c2_formation_safety },
        Criterion { id: 3, name: "quadratic formation time", limit: None, check: c3_quadratic_formation },
        Criterion { id: 4, name: "estimation correctness", limit: None, check: c4_estimation },
        Criterion { id: 5, name: "lossless ideal-target exactness", limit: None, check: c5_ideal_target_exact },
        Criterion { id: 6, name: "lossless k-depth-target", limit: None, check: c6_depth_target },
        Criterion { id: 7, name: "potential monotonicity", limit: None, check: c7_phi },
        Criterion { id: 8, name: "conservation", limit: None, check: c8_conservation },
        Criterion { id: 9, name: "fine-tuning trends", limit: Some(Duration::from_secs(300)), check: c9_fine_tuning },
        Criterion { id: 10, name: "protocol ordering", limit: None, check: c10_ordering },
        Criterion { id: 11, name: "lossy runs converge faster", limit: None, check: c11_lossy_faster },
        Criterion { id: 12, name: "exact condition never met", limit: None, check: c12_impossibility },
        Criterion { id: 13, name: "determinism and replay", limit: None, check: c13_replay },
    ];
    let mut failed = 0;
    for c in criteria.iter().filter(|c| wanted.is_empty() || wanted.contains(&c.id)) {
        let start = Instant::now();
        let mut verdict = (c.check)();
        let took = start.elapsed();
        if let Some(limit) = c.limit {
            if took > limit {
                verdict = Err(format!("took {took:.1?}, limit {limit:?}; {}", verdict.unwrap_or_else(|e| e)));
            }
        }
        let (tag, detail) = match &verdict {
            Ok(d) => ("PASS", d),
            Err(d) => ("FAIL", d),
        };
        println!("criterion {:>2} {tag} [{}] ({took:.1?}) {detail}", c.id, c.name);
        failed += verdict.is_err() as usize;
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

fn ensure(ok: bool, detail: String) -> Verdict {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn base(n: usize, energy: EnergyProtocolConfig) -> ExperimentConfig {
    ExperimentConfig {
        n,
        energy_protocol: energy,
        repetitions: SEEDS as usize,
        master_seed: 0,
        emit_traces: Some(false),
        emit_metrics: false,
        ..ExperimentConfig::default()
    }
}

fn lossy(mut cfg: ExperimentConfig) -> ExperimentConfig {
    cfg.loss = LossModel::STANDARD_LOSSY;
    cfg
}

fn aggregate(cfg: &ExperimentConfig) -> Result<Aggregate, String> {
    run_experiment(cfg, None).map(|s| s.aggregate).map_err(|e| e.to_string())
}

const LAMBDA2: EnergyProtocolConfig = EnergyProtocolConfig::LambdaExchange { lambda: 2.0 };
const HALF: EnergyProtocolConfig = EnergyProtocolConfig::KappaTransfer { kappa: 0.5 };
const DEPTH2: EnergyProtocolConfig = EnergyProtocolConfig::KDepthTarget { k: 2 };
const RAND: EnergyProtocolConfig = EnergyProtocolConfig::RandExchange { lo: 2.0, hi: 3.0 };

fn all_protocols() -> [(&'static str, EnergyProtocolConfig); 5] {
    [
        ("ideal-target", EnergyProtocolConfig::IdealTarget),
        ("2-exchange", LAMBDA2),
        ("rand-exchange", RAND),
        ("0.5-transfer", HALF),
        ("depth-target", DEPTH2),
    ]
}

fn c1_golden() -> Verdict {
    let hook = std::panic::take_hook();
    std::panic::set_hook(Box::new(|_| {}));
    let failed: Vec<&str> = golden_cases::CASES
        .iter()
        .filter(|(_, case)| std::panic::catch_unwind(case).is_err())
        .map(|(name, _)| *name)
        .collect();
    std::panic::set_hook(hook);
    let total = golden_cases::CASES.len();
    ensure(
        failed.is_empty(),
        format!("{}/{total} worked examples reproduced {}", total - failed.len(), failed.join(", ")),
    )
}

/// Independent acyclicity and arity check straight from the parent array.
fn forest_ok(net: &TreeNetwork, bound: Option<usize>) -> Result<(), String> {
    let parents = net.parents();
    let mut kids = vec![0usize; parents.len()];
    for (v, p) in parents.iter().enumerate() {
        if let Some(p) = p {
            kids[p.0] += 1;
            let mut cur = *p;
            for _ in 0..parents.len() {
                if cur.0 == v {
                    return Err(format!("cycle through {v}"));
                }
                match parents[cur.0] {
                    Some(next) => cur = next,
                    None => break,
                }
            }
        }
    }
    if let Some(k) = bound {
        if let Some(v) = kids.iter().position(|&c| c > k) {
            return Err(format!("node {v} has {} children", kids[v]));
        }
    }
    Ok(())
}

fn c2_formation_safety() -> Verdict {
    let protocols = [
        FormationProtocol::Arbitrary,
        FormationProtocol::KAry(2),
        FormationProtocol::KAry(3),
        FormationProtocol::KAry(5),
    ];
    let mut runs = 0;
    let mut worst = 0.0f64;
    for n in [2, 5, 10, 30, 50] {
        let budget = 500 * pairs_count(n);
        for protocol in protocols {
            let cfg = ExperimentConfig { n, protocol, ..ExperimentConfig::default() };
            for i in 0..SEEDS {
                let seed = derive_run_seed(0, i);
                let mut pop = initial_population(&cfg, seed).map_err(|e| e.to_string())?;
                let mut src = Scheduler::random(SchedulerRng::new(seed));
                let mut done = None;
                for step in 1..=budget {
                    let pair = src.next_pair(n).expect("random scheduler");
                    apply_formation_rule(protocol, &mut pop, pair).map_err(|e| e.to_string())?;
                    forest_ok(&pop.network, protocol.arity_bound())
                        .map_err(|e| format!("{protocol} n={n} seed {i} step {step}: {e}"))?;
                    if !pop.states_consistent() {
                        return Err(format!("{protocol} n={n} seed {i} step {step}: stale states"));
                    }
                    if is_formation_complete(&pop.network) {
                        done = Some(step);
                        break;
                    }
                }
                let Some(steps) = done else {
                    return Err(format!("{protocol} n={n} seed {i}: no spanning tree within {budget} steps"));
                };
                worst = worst.max(steps as f64 / budget as f64);
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs, all forests, slowest used {:.2}% of the budget", 100.0 * worst))
}

fn mean_formation_steps(n: usize) -> Result<f64, String> {
    let cfg = ExperimentConfig {
        n,
        protocol: FormationProtocol::Arbitrary,
        ..ExperimentConfig::default()
    };
    let mut sum = 0.0;
    for i in 0..SEEDS {
        let (_, formed, _) = form_network(&cfg, derive_run_seed(0, i)).map_err(|e| e.to_string())?;
        sum += formed as f64;
    }
    Ok(sum / SEEDS as f64)
}

fn c3_quadratic_formation() -> Verdict {
    let (m10, m50) = (mean_formation_steps(10)?, mean_formation_steps(50)?);
    let ratio = m50 / m10;
    let oracle = expected_formation_steps(50) / expected_formation_steps(10);
    ensure(
        (15.0..=40.0).contains(&ratio),
        format!("mean steps n=10 {m10:.1}, n=50 {m50:.1}, ratio {ratio:.2} in [15, 40]; chain expectation ratio {oracle:.2}"),
    )
}

fn bfs_depths(net: &TreeNetwork) -> Vec<usize> {
    let mut depth = vec![usize::MAX; net.len()];
    let root = net.ids().find(|&v| net.parent(v).is_none()).expect("a root");
    depth[root.0] = 0;
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        for &c in net.children(u) {
            depth[c.0] = depth[u.0] + 1;
            queue.push_back(c);
        }
    }
    depth
}

fn c4_estimation() -> Verdict {
    let mut slowest = 0.0f64;
    let mut runs = 0;
    for n in [2, 5, 10, 30, 50] {
        let limit = 50 * pairs_count(n);
        for protocol in [FormationProtocol::Arbitrary, FormationProtocol::BINARY] {
            let cfg = ExperimentConfig { n, protocol, ..ExperimentConfig::default() };
            for i in 0..SEEDS {
                let (pop, formed, ready) = form_network(&cfg, derive_run_seed(0, i)).map_err(|e| e.to_string())?;
                let depths = bfs_depths(&pop.network);
                let height = *depths.iter().max().unwrap();
                let correct = pop
                    .registers
                    .iter()
                    .zip(&depths)
                    .all(|(r, &d)| r.d as usize == d && r.h as usize == height);
                if !correct {
                    return Err(format!("{protocol} n={n} seed {i}: registers disagree with BFS"));
                }
                if ready - formed > limit {
                    return Err(format!("{protocol} n={n} seed {i}: {} steps after formation", ready - formed));
                }
                slowest = slowest.max((ready - formed) as f64 / limit as f64);
                runs += 1;
            }
        }
    }
    Ok(format!("{runs}/{runs} runs correct, slowest used {:.1}% of 50·C(n,2)", 100.0 * slowest))
}

fn c5_ideal_target_exact() -> Verdict {
    let mut worst = 0.0f64;
    for n in [10, 30] {
        for initial in [InitialEnergy::Uniform, InitialEnergy::Random] {
            let cfg = ExperimentConfig {
                initial_energy: initial,
                ..base(n, EnergyProtocolConfig::IdealTarget)
            };
            for i in 0..SEEDS {
                let out = run_single(&cfg, i).map_err(|e| e.to_string())?;
                let total = out.initial_total;
                let exact = check_distribution(&out.population.network, &out.population.energy, DistributionKind::Exact, 1e-6)
                    .map_err(|e| e.to_string())?;
                if !(out.row.converged && exact && out.row.ed <= 1e-6 * total) {
                    return Err(format!("n={n} {initial:?} seed {i}: ED {} exact {exact}", out.row.ed));
                }
                worst = worst.max(out.row.ed / total);
            }
        }
    }
    Ok(format!("400 runs exact, worst ED {worst:.1e} of total"))
}

fn c6_depth_target() -> Verdict {
    let mut runs = 0;
    for k in [2usize, 3] {
        for n in [10, 30] {
            let cfg = ExperimentConfig {
                protocol: FormationProtocol::KAry(k),
                ..base(n, EnergyProtocolConfig::KDepthTarget { k })
            };
            for i in 0..SEEDS {
                let out = run_single(&cfg, i).map_err(|e| e.to_string())?;
                let (net, energy) = (&out.population.network, &out.population.energy);
                let exact = check_ratio_distribution(net, energy, DistributionKind::ExactUpToRoot, k as f64, 1e-9)
                    .map_err(|e| e.to_string())?;
                let root = net.ids().find(|&v| net.parent(v).is_none()).unwrap();
                let root_ok = net.children(root).iter().all(|&c| energy.get(root) >= 2.0 * energy.get(c));
                if !(out.row.converged && exact && root_ok) {
                    return Err(format!(
                        "k={k} n={n} seed {i}: converged {} exact-up-to-root {exact} root rich {root_ok}",
                        out.row.converged
                    ));
                }
                runs += 1;
            }
        }
    }
    Ok(format!("{runs} runs exact up to the root with ratio k, root at least twice each child"))
}

fn c7_phi() -> Verdict {
    let mut max_steps = 0;
    for n in [5, 10] {
        let net = TreeNetwork::line(n);
        for lambda in [2.0, 3.0] {
            for i in 0..SEEDS {
                let seed = derive_run_seed(0, i);
                let cfg = ExperimentConfig {
                    n,
                    initial_energy: InitialEnergy::Random,
                    ..ExperimentConfig::default()
                };
                let mut energy = initial_population(&cfg, seed).map_err(|e| e.to_string())?.energy;
                let total = energy.total();
                let mut src = Scheduler::random(SchedulerRng::new(seed));
                let mut phi = potential_phi(&net, energy.as_slice(), lambda).map_err(|e| e.to_string())?;
                let mut step = 0u64;
                loop {
                    let settled = net.edges().all(|(p, c)| plan_lambda_exchange(p, c, &energy, lambda).is_none());
                    if settled {
                        break;
                    }
                    if step == 1_000_000 {
                        return Err(format!("n={n} λ={lambda} seed {i}: still moving after {step} steps, Φ={phi}"));
                    }
                    step += 1;
                    let (u, v) = src.next_pair(n).expect("random scheduler");
                    if let Some((p, c)) = net.orient_edge(u, v) {
                        lambda_exchange_step(p, c, &mut energy, lambda, 0.0);
                    }
                    let next = potential_phi(&net, energy.as_slice(), lambda).unwrap();
                    if next > phi + 1e-12 * total {
                        return Err(format!("n={n} λ={lambda} seed {i} step {step}: Φ rose {phi} -> {next}"));
                    }
                    phi = next;
                }
                // Exchanges stop once no edge is violated beyond the rule's
                // 1e-9 relative slack.
                if phi > 1e-9 * lambda * total {
                    return Err(format!("n={n} λ={lambda} seed {i}: settled with Φ={phi}"));
                }
                max_steps = max_steps.max(step);
            }
        }
    }
    Ok(format!("400 line runs, Φ never rose and reached 0 (slowest {max_steps} steps)"))
}

fn c8_conservation() -> Verdict {
    let mut runs = 0;
    let mut worst = [0.0f64; 2];
    for (_, energy) in all_protocols() {
        for is_lossy in [false, true] {
            for mode in [PhaseMode::TwoPhase, PhaseMode::Concurrent] {
                let mut cfg = ExperimentConfig {
                    phase_mode: mode,
                    initial_energy: InitialEnergy::Random,
                    ..base(10, energy)
                };
                if is_lossy {
                    cfg = lossy(cfg);
                }
                for i in 0..SEEDS {
                    let mut reference: Option<f64> = None;
                    let mut err = 0.0f64;
                    run_single_observed(&cfg, i, &mut |ev| {
                        let e = &ev.population.energy;
                        // Formation never moves energy, so the total when the
                        // tree completes equals the initial total.
                        let total = *reference.get_or_insert(e.initial_total());
                        let drift = if is_lossy { e.total() + e.lost() - total } else { e.total() - total };
                        err = err.max(drift.abs() / total);
                    })
                    .map_err(|e| e.to_string())?;
                    if err > 1e-9 {
                        return Err(format!("{energy} lossy={is_lossy} {mode:?} seed {i}: drift {err:.2e}"));
                    }
                    worst[is_lossy as usize] = worst[is_lossy as usize].max(err);
                    runs += 1;
                }
            }
        }
    }
    Ok(format!("{runs} runs checked every step; worst drift lossless {:.1e}, lossy {:.1e}", worst[0], worst[1]))
}

fn c9_fine_tuning() -> Verdict {
    let mut tau = Vec::new();
    let mut ed = Vec::new();
    for lambda in [2.0, 3.0, 4.0, 5.0, 6.0] {
        let a = aggregate(&base(10, EnergyProtocolConfig::LambdaExchange { lambda }))?;
        tau.push(a.tau.mean);
        ed.push(a.ed_percent.mean);
    }
    let mut kappa_ed = Vec::new();
    for kappa in [0.3, 0.4, 0.5, 0.6, 0.7] {
        kappa_ed.push(aggregate(&base(10, EnergyProtocolConfig::KappaTransfer { kappa }))?.ed_percent.mean);
    }
    let mut problems = Vec::new();
    if tau[1] >= tau[0] {
        problems.push("τ(3) ≥ τ(2)".to_string());
    }
    for w in 1..4 {
        if tau[w + 1] > tau[w] * 1.05 {
            problems.push(format!("τ rose from λ={} to λ={}", w + 2, w + 3));
        }
    }
    if ed.windows(2).any(|w| w[1] <= w[0]) {
        problems.push("ED% not increasing in λ".into());
    }
    if !(2.0..=12.0).contains(&ed[0]) {
        problems.push(format!("ED%(λ=2) {:.2} outside [2, 12]", ed[0]));
    }
    if !(18.0..=30.0).contains(&ed[4]) {
        problems.push(format!("ED%(λ=6) {:.2} outside [18, 30]", ed[4]));
    }
    if let Some(k) = kappa_ed.iter().position(|e| !(50.0..=68.0).contains(e)) {
        problems.push(format!("κ-transfer ED% {:.2} (κ={}) outside [50, 68]", kappa_ed[k], 0.3 + 0.1 * k as f64));
    }
    let fmt = |v: &[f64], p: usize| v.iter().map(|x| format!("{x:.*}", p)).collect::<Vec<_>>().join("/");
    let mut detail = format!(
        "λ=2..6 τ {} ED% {}; κ=0.3..0.7 ED% {}",
        fmt(&tau, 0),
        fmt(&ed, 2),
        fmt(&kappa_ed, 2)
    );
    if !problems.is_empty() {
        let _ = write!(detail, "; {}", problems.join("; "));
    }
    ensure(problems.is_empty(), detail)
}

fn c10_ordering() -> Verdict {
    let mut problems = Vec::new();
    let mut detail = String::new();
    for is_lossy in [false, true] {
        let cfg = |e| if is_lossy { lossy(base(10, e)) } else { base(10, e) };
        let two = aggregate(&cfg(LAMBDA2))?.ed_percent.mean;
        let depth = aggregate(&cfg(DEPTH2))?.ed_percent.mean;
        let half = aggregate(&cfg(HALF))?.ed_percent.mean;
        let regime = if is_lossy { "lossy" } else { "lossless" };
        let _ = write!(detail, "{regime}: 2-exchange {two:.2}%, depth-target {depth:.2}%, 0.5-transfer {half:.2}%; ");
        if !(two < depth && depth < half) {
            problems.push(format!("{regime} ordering violated"));
        }
        if !is_lossy {
            for (name, got, table) in [("2-exchange", two, 6.93), ("depth-target", depth, 33.81), ("0.5-transfer", half, 63.71)] {
                if (got - table).abs() > 10.0 {
                    problems.push(format!("{name} {got:.2}% not within 10 points of {table}%"));
                }
            }
        } else {
            let ideal = aggregate(&cfg(EnergyProtocolConfig::IdealTarget))?;
            let _ = write!(
                detail,
                "lossy ideal-target {:.2}% (loss {:.2}%)",
                ideal.ed_percent.mean, ideal.loss_percent.mean
            );
            if !(10.0..=30.0).contains(&ideal.ed_percent.mean) {
                problems.push(format!("lossy ideal-target {:.2}% outside [10, 30]", ideal.ed_percent.mean));
            }
        }
    }
    if !problems.is_empty() {
        let _ = write!(detail, "; {}", problems.join("; "));
    }
    ensure(problems.is_empty(), detail)
}

fn c11_lossy_faster() -> Verdict {
    let mut problems = Vec::new();
    let mut detail = Vec::new();
    for (name, energy) in all_protocols() {
        let clean = aggregate(&base(10, energy))?.tau.mean;
        let lossy_tau = aggregate(&lossy(base(10, energy)))?.tau.mean;
        detail.push(format!("{name} {clean:.0}→{lossy_tau:.0}"));
        if lossy_tau >= clean {
            problems.push(name);
        }
    }
    let mut detail = format!("mean τ lossless→lossy: {}", detail.join(", "));
    if !problems.is_empty() {
        let _ = write!(detail, "; not faster: {}", problems.join(", "));
    }
    ensure(problems.is_empty(), detail)
}

fn c12_impossibility() -> Verdict {
    const STEPS: u64 = 1_000_000;
    let two = exact_condition_line(ExactVariant::TwoExchange, [1000, 1000, 1000], STEPS).map_err(|e| e.to_string())?;
    // E_a > 2(E_b + E_c).
    let kappa = exact_condition_line(ExactVariant::KappaTransfer { num: 1, den: 2 }, [5000, 1000, 1000], STEPS)
        .map_err(|e| e.to_string())?;
    ensure(
        two.never_exact() && kappa.never_exact() && two.transfers > 0,
        format!(
            "{STEPS} steps each; 2-exchange: {} transfers, {} ties, {}; 0.5-transfer: {} transfers, {} ties, {}",
            two.transfers,
            two.ties,
            exact_at(two.reached_at),
            kappa.transfers,
            kappa.ties,
            exact_at(kappa.reached_at)
        ),
    )
}

fn exact_at(step: Option<u64>) -> String {
    step.map_or("never exact".into(), |t| format!("exact after step {t}"))
}

fn c13_replay() -> Verdict {
    let mut replays = 0;
    for (name, energy) in all_protocols() {
        for is_lossy in [false, true] {
            for mode in [PhaseMode::TwoPhase, PhaseMode::Concurrent] {
                let mut cfg = ExperimentConfig {
                    phase_mode: mode,
                    emit_traces: Some(true),
                    ..base(10, energy)
                };
                if is_lossy {
                    cfg = lossy(cfg);
                }
                for i in 0..10 {
                    let a = run_single(&cfg, i).map_err(|e| e.to_string())?;
                    let b = run_single(&cfg, i).map_err(|e| e.to_string())?;
                    if a.digest() != b.digest() || a.trace != b.trace || a.row != b.row {
                        return Err(format!("{name} lossy={is_lossy} {mode:?} run {i}: reruns differ"));
                    }
                    let report = replay_trace(a.trace.as_ref().unwrap()).map_err(|e| format!("{name} run {i}: {e}"))?;
                    if report.digest != a.digest() {
                        return Err(format!("{name} run {i}: replay digest differs"));
                    }
                    let mut tampered = a.trace.clone().unwrap();
                    match tampered.records.iter_mut().find(|r| r.moved.is_some()) {
                        Some(r) => r.moved = r.moved.map(|m| m * 1.5),
                        None => tampered.set_meta("digest", "0".repeat(64)),
                    }
                    if replay_trace(&tampered).is_ok() {
                        return Err(format!("{name} run {i}: tampered trace replayed cleanly"));
                    }
                    replays += 1;
                }
            }
        }
    }
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let cfg = ExperimentConfig {
        repetitions: 20,
        emit_traces: Some(true),
        emit_metrics: true,
        ..lossy(base(10, RAND))
    };
    let (da, db) = (dir.path().join("a"), dir.path().join("b"));
    run_experiment(&cfg, Some(&da)).map_err(|e| e.to_string())?;
    run_experiment(&cfg, Some(&db)).map_err(|e| e.to_string())?;
    let mut files = 0;
    for rel in walk(&da) {
        let x = fs::read(da.join(&rel)).map_err(|e| e.to_string())?;
        let y = fs::read(db.join(&rel)).map_err(|e| format!("{rel}: {e}"))?;
        if x != y {
            return Err(format!("{rel} differs between invocations"));
        }
        files += 1;
    }
    Ok(format!("{replays} runs replayed to the same digest, tampering detected; {files} artifact files byte-identical"))
}

fn walk(root: &std::path::Path) -> Vec<String> {
    let mut out = Vec::new();
    let mut stack = vec![root.to_path_buf()];
    while let Some(dir) = stack.pop() {
        for entry in fs::read_dir(&dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                stack.push(path);
            } else {
                out.push(path.strip_prefix(root).unwrap().to_string_lossy().into_owned());
            }
        }
    }
    out.sort();
    out
}
