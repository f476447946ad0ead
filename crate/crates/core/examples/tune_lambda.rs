//! Sweeps λ for λ-exchange and κ for κ-transfer on 10-node binary trees
//! and prints mean convergence time and energy distance per value.

use serde_json::json;
use tree_energy::config::ExperimentConfig;
use tree_energy::experiment::{run_sweep, SweepConfig};

fn main() -> anyhow::Result<()> {
    let base = ExperimentConfig {
        n: 10,
        repetitions: 100,
        master_seed: 7,
        emit_traces: Some(false),
        emit_metrics: false,
        ..ExperimentConfig::default()
    };
    let lambda = SweepConfig {
        base: base.clone(),
        grid: [(
            "energy_protocol".to_string(),
            (2..=6)
                .map(|l| json!({"kind": "lambda_exchange", "lambda": l as f64}))
                .collect(),
        )]
        .into(),
    };
    let kappa = SweepConfig {
        base,
        grid: [(
            "energy_protocol".to_string(),
            [0.3, 0.4, 0.5, 0.6, 0.7]
                .iter()
                .map(|k| json!({"kind": "kappa_transfer", "kappa": k}))
                .collect(),
        )]
        .into(),
    };
    println!("{:<34} {:>10} {:>10} {:>8}", "protocol", "tau", "tau sd", "ED%");
    for sweep in [lambda, kappa] {
        for r in run_sweep(&sweep, None)? {
            println!(
                "{:<34} {:>10.1} {:>10.1} {:>7.2}%",
                r.params["energy_protocol"].to_string(),
                r.aggregate.tau.mean,
                r.aggregate.tau.stddev,
                r.aggregate.ed_percent.mean
            );
        }
    }
    Ok(())
}
