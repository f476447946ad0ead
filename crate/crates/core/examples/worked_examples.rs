//! Walks through the small hand-sized scenarios: a scripted arbitrary tree,
//! a scripted binary tree with merge keys, and single interactions of each
//! redistribution protocol on a six-node binary tree.

use tree_energy::energy::{
    compute_ideal_energies, depth_target, ideal_target_step, kappa_transfer_step, k_depth_target_step,
    lambda_exchange_step,
};
use tree_energy::formation::{apply_formation_rule, FormationProtocol};
use tree_energy::population::{EnergyState, NodeId, Population, Registers, TreeNetwork};
use tree_energy::snapshot::NetworkSnapshot;

fn v(i: usize) -> NodeId {
    NodeId(i - 1)
}

fn scripted(protocol: FormationProtocol, keys: Vec<u64>, order: &[(usize, usize)]) -> anyhow::Result<Population> {
    let n = keys.len();
    let mut pop = Population::new(protocol.arity_bound(), vec![0.0; n], keys)?;
    for &(a, b) in order {
        let tag = apply_formation_rule(protocol, &mut pop, (v(a), v(b)))?;
        println!("  (v{a}, v{b}) -> {tag}");
    }
    Ok(pop)
}

fn main() -> anyhow::Result<()> {
    println!("arbitrary tree on 8 nodes:");
    let order = [(1, 2), (3, 4), (1, 4), (3, 5), (1, 2), (1, 3), (2, 6), (7, 8), (1, 7)];
    let pop = scripted(FormationProtocol::Arbitrary, (0..8).collect(), &order)?;
    print!("{}", NetworkSnapshot::from_population(&pop).to_text());

    println!("\nbinary tree on 7 nodes with keys 4 2 7 6 5 3 1:");
    let order = [(1, 2), (4, 3), (7, 6), (1, 4), (5, 6), (2, 7), (3, 4), (1, 6)];
    let pop = scripted(FormationProtocol::BINARY, vec![4, 2, 7, 6, 5, 3, 1], &order)?;
    print!("{}", NetworkSnapshot::from_population(&pop).to_text());

    // v6 is the root with children v1 and v5; v1 -> v2 -> v3 and v5 -> v4.
    let net = TreeNetwork::from_parents(&[Some(v(6)), Some(v(1)), Some(v(2)), Some(v(5)), Some(v(6)), None], Some(2))?;
    let energies = vec![500.0, 100.0, 150.0, 400.0, 350.0, 600.0];
    let ideal = compute_ideal_energies(&net, 2100.0)?;
    println!("\nsix-node tree, total 2100: x = {}, ideal energies {:?}", ideal.base, ideal.per_node);

    let mut e = EnergyState::new(vec![500.0, 150.0, 100.0, 400.0, 350.0, 600.0])?;
    ideal_target_step((v(1), v(2)), &mut e, &ideal, 0.0);
    println!("ideal-target (v1, v2) with E2 = 150: v1 {}, v2 {}", e.get(v(1)), e.get(v(2)));

    let mut e = EnergyState::new(vec![500.0, 400.0])?;
    lambda_exchange_step(NodeId(0), NodeId(1), &mut e, 2.0, 0.0);
    println!("2-exchange on (500, 400): {:?}", e.as_slice());
    let mut e = EnergyState::new(vec![500.0, 400.0])?;
    kappa_transfer_step(NodeId(0), NodeId(1), &mut e, 0.5, 0.0);
    println!("0.5-transfer on (500, 400): {:?}", e.as_slice());

    let registers = net
        .depths()
        .into_iter()
        .map(|d| Registers { d: d as u32, h: 3, ..Registers::default() })
        .collect();
    let mut pop = Population::from_network(net, energies, registers)?;
    for i in 1..=5 {
        println!("  target of v{i}: {}", depth_target(&pop.config(v(i)), 2, 2100.0)?);
    }
    k_depth_target_step((v(1), v(2)), &mut pop, 2, 2100.0, 0.0);
    println!("2-depth-target (v1, v2): v1 {}, v2 {}", pop.energy.get(v(1)), pop.energy.get(v(2)));
    k_depth_target_step((v(1), v(6)), &mut pop, 2, 2100.0, 0.0);
    println!("2-depth-target (v1, v6): v1 {}, root {}", pop.energy.get(v(1)), pop.energy.get(v(6)));
    Ok(())
}
