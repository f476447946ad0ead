//! Forms one tree, then runs every redistribution protocol on copies of it
//! and prints the final energies next to the ideal ones.

use tree_energy::config::{EnergyProtocolConfig, ExperimentConfig, InitialEnergy};
use tree_energy::energy::{compute_ideal_energies, LossModel};
use tree_energy::metrics::energy_distance;
use tree_energy::scheduler::{Scheduler, SchedulerRng};
use tree_energy::sim::{form_network, simulate, RunSettings};

fn main() -> anyhow::Result<()> {
    let lossy = std::env::args().any(|a| a == "lossy");
    let cfg = ExperimentConfig {
        n: 8,
        initial_energy: InitialEnergy::Random,
        loss: if lossy { LossModel::STANDARD_LOSSY } else { LossModel::Lossless },
        ..ExperimentConfig::default()
    };
    let (tree, _, _) = form_network(&cfg, 17)?;
    let total = tree.energy.total();
    let ideal = compute_ideal_energies(&tree.network, total)?;
    println!("parents: {:?}", tree.network.parents().iter().map(|p| p.map(|p| p.0)).collect::<Vec<_>>());
    println!("{:<16} {}", "initial", fmt(tree.energy.as_slice()));
    println!("{:<16} {}", "ideal", fmt(&ideal.per_node));

    for energy in [
        EnergyProtocolConfig::IdealTarget,
        EnergyProtocolConfig::LambdaExchange { lambda: 2.0 },
        EnergyProtocolConfig::RandExchange { lo: 2.0, hi: 3.0 },
        EnergyProtocolConfig::KappaTransfer { kappa: 0.5 },
        EnergyProtocolConfig::KDepthTarget { k: 2 },
    ] {
        let settings = RunSettings::from_config(&ExperimentConfig { energy_protocol: energy, ..cfg.clone() });
        let mut source = Scheduler::random(SchedulerRng::new(5));
        let out = simulate(tree.clone(), &settings, &mut source, &mut |_| {})?;
        let ed = energy_distance(out.population.energy.as_slice(), &ideal)?;
        println!(
            "{:<16} {}  tau {:>5}  ED {:>5.1}%  lost {:>4.1}%",
            energy.to_string(),
            fmt(out.population.energy.as_slice()),
            out.row.tau,
            100.0 * ed / total,
            100.0 * out.population.energy.lost() / total
        );
    }
    Ok(())
}

fn fmt(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:>7.1}")).collect::<Vec<_>>().join(" ")
}
