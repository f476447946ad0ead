//! Forms trees from isolated nodes with the random pairwise scheduler and
//! reports completion time and shape, then prints one formed binary tree
//! as a snapshot.

use tree_energy::config::{pairs_count, ExperimentConfig};
use tree_energy::estimation::apply_estimation_rules;
use tree_energy::formation::{apply_formation_rule, is_formation_complete, FormationProtocol};
use tree_energy::scheduler::{derive_run_seed, sample_pair, SchedulerRng};
use tree_energy::sim::initial_population;
use tree_energy::snapshot::NetworkSnapshot;

fn main() -> anyhow::Result<()> {
    let seeds = 100;
    println!("{:<10} {:>4} {:>14} {:>10} {:>12}", "protocol", "n", "steps", "steps/C(n,2)", "mean height");
    for protocol in [FormationProtocol::Arbitrary, FormationProtocol::BINARY, FormationProtocol::KAry(3)] {
        for n in [10, 30, 50] {
            let cfg = ExperimentConfig {
                n,
                protocol,
                ..ExperimentConfig::default()
            };
            let (mut steps, mut height) = (0u64, 0usize);
            for i in 0..seeds {
                let seed = derive_run_seed(1, i);
                let mut pop = initial_population(&cfg, seed)?;
                let mut rng = SchedulerRng::new(seed);
                while !is_formation_complete(&pop.network) {
                    let pair = sample_pair(&mut rng, n)?;
                    apply_formation_rule(protocol, &mut pop, pair)?;
                    steps += 1;
                }
                height += pop.network.height();
            }
            let mean = steps as f64 / seeds as f64;
            println!(
                "{:<10} {:>4} {:>14.1} {:>10.2} {:>12.2}",
                protocol.to_string(),
                n,
                mean,
                mean / pairs_count(n) as f64,
                height as f64 / seeds as f64
            );
        }
    }

    let cfg = ExperimentConfig::default();
    let mut pop = initial_population(&cfg, 42)?;
    let mut rng = SchedulerRng::new(42);
    while !is_formation_complete(&pop.network) {
        let pair = sample_pair(&mut rng, cfg.n)?;
        apply_formation_rule(cfg.protocol, &mut pop, pair)?;
        apply_estimation_rules(&pop.network, &mut pop.registers, pair);
    }
    println!("\nbinary tree on 10 nodes (estimates as of completion):");
    print!("{}", NetworkSnapshot::from_population(&pop).to_text());
    Ok(())
}
