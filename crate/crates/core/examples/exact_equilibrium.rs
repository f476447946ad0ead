//! Three-node line under a round-robin schedule with the exact equilibrium
//! condition: neither 2-exchange nor κ-transfer ever lands on the exact
//! distribution.

use tree_energy::equilibrium::{exact_condition_line, ExactVariant};

fn main() -> anyhow::Result<()> {
    let steps = 1_000_000;
    for (name, variant, start) in [
        ("2-exchange", ExactVariant::TwoExchange, [1000, 1000, 1000]),
        ("0.5-transfer", ExactVariant::KappaTransfer { num: 1, den: 2 }, [5000, 1000, 1000]),
        ("0.3-transfer", ExactVariant::KappaTransfer { num: 3, den: 10 }, [9000, 2000, 2000]),
    ] {
        let r = exact_condition_line(variant, start, steps)?;
        println!(
            "{name:<13} from {start:?}: {} transfers, {} ties, exact: {}",
            r.transfers,
            r.ties,
            r.reached_at.map_or("never".to_string(), |t| format!("after step {t}"))
        );
    }
    let r = exact_condition_line(ExactVariant::TwoExchange, [4, 2, 1], 3)?;
    println!("2-exchange from [4, 2, 1]: exact after step {:?}", r.reached_at);
    Ok(())
}
