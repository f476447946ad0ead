//! Shows how long the depth and height registers take to settle once a tree
//! has formed, and prints one tree with its learned estimates.

use tree_energy::config::{pairs_count, ExperimentConfig};
use tree_energy::formation::FormationProtocol;
use tree_energy::scheduler::derive_run_seed;
use tree_energy::sim::form_network;
use tree_energy::snapshot::NetworkSnapshot;

fn main() -> anyhow::Result<()> {
    let seeds = 100;
    println!("{:<10} {:>4} {:>12} {:>14} {:>16}", "protocol", "n", "formation", "estimation", "estimation/C(n,2)");
    for protocol in [FormationProtocol::Arbitrary, FormationProtocol::BINARY] {
        for n in [10, 30, 50] {
            let cfg = ExperimentConfig { n, protocol, ..ExperimentConfig::default() };
            let (mut formed, mut settled) = (0u64, 0u64);
            for i in 0..seeds {
                let (_, f, r) = form_network(&cfg, derive_run_seed(3, i))?;
                formed += f;
                settled += r - f;
            }
            let (f, e) = (formed as f64 / seeds as f64, settled as f64 / seeds as f64);
            println!(
                "{:<10} {:>4} {:>12.1} {:>14.1} {:>16.2}",
                protocol.to_string(),
                n,
                f,
                e,
                e / pairs_count(n) as f64
            );
        }
    }

    let (pop, formed, ready) = form_network(&ExperimentConfig { n: 12, ..ExperimentConfig::default() }, 99)?;
    println!("\n12-node binary tree, formed at step {formed}, estimates settled at step {ready}:");
    print!("{}", NetworkSnapshot::from_population(&pop).to_text());
    Ok(())
}
