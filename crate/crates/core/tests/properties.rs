use proptest::prelude::*;

use tree_energy::config::{EnergyProtocolConfig, ExperimentConfig, InitialEnergy, PhaseMode};
use tree_energy::energy::{lambda_exchange_step, LossModel};
use tree_energy::formation::FormationProtocol;
use tree_energy::metrics::{distribution_distance, l1_half, potential_phi};
use tree_energy::population::{check_distribution, DistributionKind, EnergyState, NodeId, Population, TreeNetwork};
use tree_energy::scheduler::{InteractionSource, InteractionTrace, Scheduler, SchedulerRng};
use tree_energy::sim::{initial_population, simulate, RunSettings};
use tree_energy::snapshot::NetworkSnapshot;

/// A rooted tree on `parents.len() + 1` nodes where node `i + 1` hangs below
/// node `parents[i] % (i + 1)`.
fn tree_from(parents: &[usize]) -> TreeNetwork {
    let mut p = vec![None];
    p.extend(parents.iter().enumerate().map(|(i, &x)| Some(NodeId(x % (i + 1)))));
    TreeNetwork::from_parents(&p, None).unwrap()
}

fn tree_and_energies() -> impl Strategy<Value = (TreeNetwork, Vec<f64>)> {
    prop::collection::vec(any::<usize>(), 1..20).prop_flat_map(|parents| {
        let n = parents.len() + 1;
        let energies = prop::collection::vec(
            prop_oneof![(0u32..64).prop_map(f64::from), 0.0..1000.0f64],
            n,
        );
        (Just(tree_from(&parents)), energies)
    })
}

fn protocol() -> impl Strategy<Value = FormationProtocol> {
    prop_oneof![
        Just(FormationProtocol::Arbitrary),
        (2usize..6).prop_map(FormationProtocol::KAry),
    ]
}

fn energy_protocol() -> impl Strategy<Value = EnergyProtocolConfig> {
    prop_oneof![
        Just(EnergyProtocolConfig::IdealTarget),
        (2.0..6.0f64).prop_map(|lambda| EnergyProtocolConfig::LambdaExchange { lambda }),
        Just(EnergyProtocolConfig::RandExchange { lo: 2.0, hi: 6.0 }),
        (0.05..0.95f64).prop_map(|kappa| EnergyProtocolConfig::KappaTransfer { kappa }),
        (2usize..4).prop_map(|k| EnergyProtocolConfig::KDepthTarget { k }),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn zero_distance_iff_relaxed((net, energies) in tree_and_energies()) {
        let dd = distribution_distance(&net, &energies);
        let relaxed = net.edges().all(|(p, c)| energies[p.0] >= 2.0 * energies[c.0]);
        prop_assert!(dd >= 0.0);
        prop_assert_eq!(dd == 0.0, relaxed);
        let state = EnergyState::new(energies).unwrap();
        prop_assert_eq!(check_distribution(&net, &state, DistributionKind::Relaxed, 0.0).unwrap(), relaxed);
    }

    #[test]
    fn energy_distance_is_a_half_metric(
        a in prop::collection::vec(0.0..1e4f64, 1..30),
        shift in prop::collection::vec(-1e3..1e3f64, 30),
    ) {
        let b: Vec<f64> = a.iter().zip(&shift).map(|(x, s)| (x + s).max(0.0)).collect();
        let ab = l1_half(&a, &b).unwrap();
        prop_assert_eq!(ab, l1_half(&b, &a).unwrap());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(l1_half(&a, &a).unwrap(), 0.0);
        prop_assert_eq!(ab == 0.0, a == b);
    }

    #[test]
    fn formation_stays_a_forest(
        n in 2usize..16,
        protocol in protocol(),
        seed in any::<u64>(),
    ) {
        let cfg = ExperimentConfig { n, protocol, ..ExperimentConfig::default() };
        let pop = initial_population(&cfg, seed).unwrap();
        let mut src = Scheduler::random(SchedulerRng::new(seed));
        let mut settings = RunSettings::from_config(&cfg);
        settings.record_trace = false;
        settings.sample_every = 0;
        let mut edges = 0;
        let mut bad = None;
        let out = simulate(pop, &settings, &mut src, &mut |ev| {
            let net = &ev.population.network;
            if bad.is_none() {
                if let Err(e) = net.validate() {
                    bad = Some(format!("step {}: {e}", ev.step));
                } else if !ev.population.states_consistent() {
                    bad = Some(format!("step {}: stale states", ev.step));
                } else if net.edge_count() < edges {
                    bad = Some(format!("step {}: an edge disappeared", ev.step));
                }
            }
            edges = net.edge_count();
        }).unwrap();
        prop_assert_eq!(bad, None);
        prop_assert!(out.population.network.is_spanning_tree());
    }

    #[test]
    fn energy_is_conserved_every_step(
        n in 2usize..12,
        energy in energy_protocol(),
        lossy in any::<bool>(),
        random_split in any::<bool>(),
        concurrent in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let cfg = ExperimentConfig {
            n,
            energy_protocol: energy,
            loss: if lossy { LossModel::STANDARD_LOSSY } else { LossModel::Lossless },
            initial_energy: if random_split { InitialEnergy::Random } else { InitialEnergy::Uniform },
            phase_mode: if concurrent { PhaseMode::Concurrent } else { PhaseMode::TwoPhase },
            ..ExperimentConfig::default()
        };
        let pop = initial_population(&cfg, seed).unwrap();
        let total = pop.energy.total();
        let mut src = Scheduler::random(SchedulerRng::new(seed));
        let mut settings = RunSettings::from_config(&cfg);
        settings.record_trace = false;
        let mut worst = 0.0f64;
        let mut negative = false;
        let out = simulate(pop, &settings, &mut src, &mut |ev| {
            let e = &ev.population.energy;
            worst = worst.max((e.total() + e.lost() - total).abs() / total);
            negative |= e.as_slice().iter().any(|&x| x < 0.0);
            if !lossy {
                worst = worst.max(e.lost());
            }
        }).unwrap();
        prop_assert!(worst <= 1e-9, "relative drift {worst}");
        prop_assert!(!negative);
        prop_assert!(out.population.energy.conservation_error() <= 1e-9);
    }

    #[test]
    fn phi_never_increases_on_a_line(
        energies in prop::collection::vec(0.0..1000.0f64, 2..12),
        lambda in 2.0..4.0f64,
        picks in prop::collection::vec(any::<usize>(), 1..400),
    ) {
        let net = TreeNetwork::line(energies.len());
        let mut e = EnergyState::new(energies).unwrap();
        let mut phi = potential_phi(&net, e.as_slice(), lambda).unwrap();
        for pick in picks {
            let c = 1 + pick % (net.len() - 1);
            lambda_exchange_step(NodeId(c - 1), NodeId(c), &mut e, lambda, 0.0);
            let next = potential_phi(&net, e.as_slice(), lambda).unwrap();
            prop_assert!(next <= phi + 1e-9 * (1.0 + phi), "{phi} -> {next}");
            phi = next;
        }
    }

    #[test]
    fn trace_text_round_trips(
        n in 2usize..10,
        energy in energy_protocol(),
        lossy in any::<bool>(),
        seed in any::<u64>(),
    ) {
        let cfg = ExperimentConfig {
            n,
            energy_protocol: energy,
            loss: if lossy { LossModel::STANDARD_LOSSY } else { LossModel::Lossless },
            ..ExperimentConfig::default()
        };
        let pop = initial_population(&cfg, seed).unwrap();
        let mut src = Scheduler::random(SchedulerRng::new(seed));
        let mut settings = RunSettings::from_config(&cfg);
        settings.record_trace = true;
        let out = simulate(pop, &settings, &mut src, &mut |_| {}).unwrap();
        let trace = out.trace.unwrap();
        prop_assert_eq!(InteractionTrace::parse(&trace.to_text()).unwrap(), trace);
    }

    #[test]
    fn snapshot_text_round_trips(
        n in 2usize..16,
        protocol in protocol(),
        seed in any::<u64>(),
    ) {
        let cfg = ExperimentConfig {
            n,
            protocol,
            initial_energy: InitialEnergy::Random,
            ..ExperimentConfig::default()
        };
        let mut pop = initial_population(&cfg, seed).unwrap();
        let mut src = Scheduler::random(SchedulerRng::new(seed));
        for _ in 0..(n * n) {
            let pair = src.next_pair(n).unwrap();
            tree_energy::formation::apply_formation_rule(protocol, &mut pop, pair).unwrap();
        }
        let snap = NetworkSnapshot::from_population(&pop);
        let parsed = NetworkSnapshot::parse(&snap.to_text(), protocol.arity_bound()).unwrap();
        prop_assert_eq!(parsed.digest(), snap.digest());
        let back: Population = parsed.to_population().unwrap();
        prop_assert_eq!(back.network.parents(), pop.network.parents());
        prop_assert_eq!(back.energy.as_slice(), pop.energy.as_slice());
    }
}
