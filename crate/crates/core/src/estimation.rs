//! Local depth (UD) and tree-height (UH) estimation.

use crate::error::{Error, Result};
use crate::population::{Registers, TreeNetwork};
use crate::scheduler::Pair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct EstimationUpdate {
    /// UD fired (the pair is a parent-child edge).
    pub depth_updated: bool,
    /// UH changed at least one height register.
    pub height_changed: bool,
}

/// UD on a parent-child pair (`d_child := d_parent + 1`), then UH on every
/// pair (`h_u := h_v := max{h_u, h_v, d_u, d_v}`) using the updated depth.
pub fn apply_estimation_rules(
    network: &TreeNetwork,
    registers: &mut [Registers],
    pair: Pair,
) -> EstimationUpdate {
    let (u, v) = pair;
    let mut update = EstimationUpdate::default();
    if let Some((p, c)) = network.orient_edge(u, v) {
        registers[c.0].d = registers[p.0].d + 1;
        update.depth_updated = true;
    }
    let (ru, rv) = (registers[u.0], registers[v.0]);
    let h = ru.h.max(rv.h).max(ru.d).max(rv.d);
    update.height_changed = h != ru.h || h != rv.h;
    registers[u.0].h = h;
    registers[v.0].h = h;
    update
}

/// True when every depth register equals the node's distance from the root
/// and every height register equals the tree height.
pub fn estimation_stabilized(network: &TreeNetwork, registers: &[Registers]) -> Result<bool> {
    if !network.is_spanning_tree() {
        return Err(Error::IncompleteNetwork);
    }
    if registers.len() != network.len() {
        return Err(Error::MismatchedNodeSets(network.len(), registers.len()));
    }
    let depths = network.depths();
    let height = depths.iter().copied().max().unwrap_or(0);
    Ok(registers
        .iter()
        .zip(&depths)
        .all(|(r, &d)| r.d as usize == d && r.h as usize == height))
}
