//! Tracks the line potential Φ while λ-exchange runs on a line of nodes.

use tree_energy::energy::{lambda_exchange_step, plan_lambda_exchange};
use tree_energy::metrics::{distribution_distance, potential_phi};
use tree_energy::population::{EnergyState, TreeNetwork};
use tree_energy::scheduler::{sample_pair, SchedulerRng};

fn main() -> anyhow::Result<()> {
    let lambda: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2.0);
    let n = 8;
    let net = TreeNetwork::line(n);
    let mut energy = EnergyState::new((0..n).map(|i| 100.0 * (i + 1) as f64).collect())?;
    let mut rng = SchedulerRng::new(1);
    println!("{:>7} {:>12} {:>12}", "step", "phi", "DD");
    let mut step = 0u64;
    loop {
        let settled = net.edges().all(|(p, c)| plan_lambda_exchange(p, c, &energy, lambda).is_none());
        if step.is_power_of_two() || settled {
            println!(
                "{step:>7} {:>12.4} {:>12.4}",
                potential_phi(&net, energy.as_slice(), lambda)?,
                distribution_distance(&net, energy.as_slice())
            );
        }
        if settled {
            break;
        }
        let (u, v) = sample_pair(&mut rng, n)?;
        if let Some((p, c)) = net.orient_edge(u, v) {
            lambda_exchange_step(p, c, &mut energy, lambda, 0.0);
        }
        step += 1;
    }
    println!("final energies {:?}", energy.as_slice().iter().map(|e| (e * 100.0).round() / 100.0).collect::<Vec<_>>());
    Ok(())
}
