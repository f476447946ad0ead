//! Records a run's trace, writes it to disk, replays it, and shows that a
//! single edited transfer amount is caught.

use tree_energy::config::{EnergyProtocolConfig, ExperimentConfig};
use tree_energy::energy::LossModel;
use tree_energy::scheduler::InteractionTrace;
use tree_energy::sim::{replay_trace, run_single};

fn main() -> anyhow::Result<()> {
    let cfg = ExperimentConfig {
        n: 6,
        energy_protocol: EnergyProtocolConfig::RandExchange { lo: 2.0, hi: 3.0 },
        loss: LossModel::STANDARD_LOSSY,
        emit_traces: Some(true),
        master_seed: 8,
        ..ExperimentConfig::default()
    };
    let out = run_single(&cfg, 0)?;
    let digest = out.digest();
    let trace = out.trace.expect("traces enabled");
    let path = std::env::temp_dir().join("tree-energy-example-trace.txt");
    std::fs::write(&path, trace.to_text())?;
    println!("{} interactions written to {}", trace.records.len(), path.display());
    println!("run digest    {digest}");

    let parsed = InteractionTrace::parse(&std::fs::read_to_string(&path)?)?;
    println!("replay digest {}", replay_trace(&parsed)?.digest);

    let mut edited = parsed.clone();
    if let Some(r) = edited.records.iter_mut().find(|r| r.moved.is_some()) {
        r.moved = r.moved.map(|m| m + 1.0);
    }
    match replay_trace(&edited) {
        Ok(_) => println!("edited trace replayed cleanly"),
        Err(e) => println!("edited trace rejected: {e}"),
    }
    Ok(())
}
