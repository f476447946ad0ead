//! Mean convergence time, energy distance and loss of every redistribution
//! protocol on 10-node binary trees, with and without transfer loss.
//!
//! Pass `concurrent` to run redistribution while the tree is still forming.

use tree_energy::config::{EnergyProtocolConfig, ExperimentConfig, InitialEnergy, PhaseMode};
use tree_energy::energy::LossModel;
use tree_energy::experiment::run_experiment;

fn main() -> anyhow::Result<()> {
    let phase_mode = match std::env::args().nth(1).as_deref() {
        Some("concurrent") => PhaseMode::Concurrent,
        _ => PhaseMode::TwoPhase,
    };
    let protocols = [
        ("ideal-target", EnergyProtocolConfig::IdealTarget),
        ("2-exchange", EnergyProtocolConfig::LambdaExchange { lambda: 2.0 }),
        ("rand-exchange", EnergyProtocolConfig::RandExchange { lo: 2.0, hi: 3.0 }),
        ("0.5-transfer", EnergyProtocolConfig::KappaTransfer { kappa: 0.5 }),
        ("depth-target", EnergyProtocolConfig::KDepthTarget { k: 2 }),
    ];
    println!("{:<14} {:>9} {:>10} {:>8} {:>10} {:>8} {:>7}", "protocol", "loss", "tau", "ED%", "tau(rand)", "ED%", "lost%");
    for loss in [LossModel::Lossless, LossModel::STANDARD_LOSSY] {
        for (name, energy) in protocols {
            let base = ExperimentConfig {
                n: 10,
                energy_protocol: energy,
                loss,
                repetitions: 100,
                master_seed: 2024,
                emit_traces: Some(false),
                emit_metrics: false,
                phase_mode,
                ..ExperimentConfig::default()
            };
            let uniform = run_experiment(&base, None)?.aggregate;
            let random = run_experiment(
                &ExperimentConfig {
                    initial_energy: InitialEnergy::Random,
                    ..base
                },
                None,
            )?
            .aggregate;
            println!(
                "{:<14} {:>9} {:>10.0} {:>7.2}% {:>10.0} {:>7.2}% {:>6.2}%",
                name,
                if loss.is_lossless() { "none" } else { "N(.2,.05)" },
                uniform.tau.mean,
                uniform.ed_percent.mean,
                random.tau.mean,
                random.ed_percent.mean,
                uniform.loss_percent.mean
            );
        }
    }
    Ok(())
}
