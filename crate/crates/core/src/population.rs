//! Node configurations, the rooted forest that connects them, and the
//! per-node energy ledger.
//!
//! Node roles are maintained incrementally by the formation protocols;
//! [`classify`] recomputes a role from adjacency alone and serves as the
//! reference the incremental states are tested against.

use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Relative tolerance used for energy equilibrium and conservation checks.
pub const ENERGY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Role of a node in the network. Internal and root nodes carry their
/// current number of children.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeState {
    Isolated,
    Leaf,
    Internal(usize),
    Root(usize),
}

impl NodeState {
    pub fn children(self) -> usize {
        match self {
            NodeState::Isolated | NodeState::Leaf => 0,
            NodeState::Internal(c) | NodeState::Root(c) => c,
        }
    }

    pub fn is_root(self) -> bool {
        matches!(self, NodeState::Root(_))
    }

    pub fn is_isolated(self) -> bool {
        matches!(self, NodeState::Isolated)
    }

    /// State after gaining one child.
    pub(crate) fn with_new_child(self) -> NodeState {
        match self {
            NodeState::Isolated => NodeState::Root(1),
            NodeState::Leaf => NodeState::Internal(1),
            NodeState::Internal(c) => NodeState::Internal(c + 1),
            NodeState::Root(c) => NodeState::Root(c + 1),
        }
    }

    /// State after gaining a parent.
    pub(crate) fn with_parent(self) -> NodeState {
        match self {
            NodeState::Isolated => NodeState::Leaf,
            NodeState::Root(c) => NodeState::Internal(c),
            other => other,
        }
    }
}

impl fmt::Display for NodeState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeState::Isolated => write!(f, "S"),
            NodeState::Leaf => write!(f, "L"),
            NodeState::Internal(c) => write!(f, "I{c}"),
            NodeState::Root(c) => write!(f, "R{c}"),
        }
    }
}

impl FromStr for NodeState {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        let bad = || format!("unknown node state {s:?}");
        match s {
            "S" => Ok(NodeState::Isolated),
            "L" => Ok(NodeState::Leaf),
            _ => {
                let (head, count) = s.split_at(1.min(s.len()));
                let count: usize = count.parse().map_err(|_| bad())?;
                if count == 0 {
                    return Err(bad());
                }
                match head {
                    "I" => Ok(NodeState::Internal(count)),
                    "R" => Ok(NodeState::Root(count)),
                    _ => Err(bad()),
                }
            }
        }
    }
}

/// Per-node memory: merge key `w`, depth estimate `d`, height estimate `h`
/// and the target energy of targeted redistribution protocols.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Registers {
    pub w: u64,
    pub d: u32,
    pub h: u32,
    pub target: Option<f64>,
}

impl Registers {
    pub fn with_key(w: u64) -> Self {
        Registers {
            w,
            ..Registers::default()
        }
    }
}

/// Read-only view of one node's configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeConfig {
    pub id: NodeId,
    pub state: NodeState,
    pub energy: f64,
    pub registers: Registers,
}

/// Parent/children adjacency of a rooted forest over dense node ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeNetwork {
    parent: Vec<Option<NodeId>>,
    children: Vec<Vec<NodeId>>,
    arity_bound: Option<usize>,
}

impl TreeNetwork {
    /// `n` isolated nodes.
    pub fn new(n: usize, arity_bound: Option<usize>) -> Self {
        TreeNetwork {
            parent: vec![None; n],
            children: vec![Vec::new(); n],
            arity_bound,
        }
    }

    /// Builds a network from a parent array. Children are ordered by id.
    pub fn from_parents(parents: &[Option<NodeId>], arity_bound: Option<usize>) -> Result<Self> {
        let n = parents.len();
        let mut net = TreeNetwork::new(n, arity_bound);
        for (i, p) in parents.iter().enumerate() {
            if let Some(p) = *p {
                if p.0 >= n {
                    return Err(Error::UnknownNode(p));
                }
                net.parent[i] = Some(p);
                net.children[p.0].push(NodeId(i));
            }
        }
        net.validate()?;
        Ok(net)
    }

    /// The line `0 ⇝ 1 ⇝ … ⇝ n−1` rooted at node 0.
    pub fn line(n: usize) -> Self {
        let parents: Vec<_> = (0..n).map(|i| i.checked_sub(1).map(NodeId)).collect();
        TreeNetwork::from_parents(&parents, None).expect("a line is a valid tree")
    }

    /// A star rooted at node 0.
    pub fn star(n: usize) -> Self {
        let parents: Vec<_> = (0..n).map(|i| (i > 0).then_some(NodeId(0))).collect();
        TreeNetwork::from_parents(&parents, None).expect("a star is a valid tree")
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn arity_bound(&self) -> Option<usize> {
        self.arity_bound
    }

    pub fn contains(&self, id: NodeId) -> bool {
        id.0 < self.len()
    }

    fn check(&self, id: NodeId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::UnknownNode(id))
        }
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.len()).map(NodeId)
    }

    pub fn parent(&self, id: NodeId) -> Option<NodeId> {
        self.parent[id.0]
    }

    pub fn children(&self, id: NodeId) -> &[NodeId] {
        &self.children[id.0]
    }

    pub fn parents(&self) -> &[Option<NodeId>] {
        &self.parent
    }

    pub fn is_edge(&self, parent: NodeId, child: NodeId) -> bool {
        self.parent[child.0] == Some(parent)
    }

    /// If `a` and `b` are joined by an edge, returns them as `(parent, child)`.
    pub fn orient_edge(&self, a: NodeId, b: NodeId) -> Option<(NodeId, NodeId)> {
        if self.is_edge(a, b) {
            Some((a, b))
        } else if self.is_edge(b, a) {
            Some((b, a))
        } else {
            None
        }
    }

    /// All edges as `(parent, child)`, ordered by child id.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.parent
            .iter()
            .enumerate()
            .filter_map(|(c, p)| p.map(|p| (p, NodeId(c))))
    }

    pub fn edge_count(&self) -> usize {
        self.parent.iter().filter(|p| p.is_some()).count()
    }

    /// Nodes without a parent but with at least one child.
    pub fn roots(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids()
            .filter(|&v| self.parent[v.0].is_none() && !self.children[v.0].is_empty())
    }

    pub fn isolated(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.ids()
            .filter(|&v| self.parent[v.0].is_none() && self.children[v.0].is_empty())
    }

    /// Root of the component containing `id` (the node itself if it has no parent).
    pub fn root_of(&self, id: NodeId) -> NodeId {
        let mut cur = id;
        let mut steps = 0;
        while let Some(p) = self.parent[cur.0] {
            cur = p;
            steps += 1;
            assert!(steps <= self.len(), "cycle through node {id}");
        }
        cur
    }

    /// Adds the edge `parent ⇝ child`. Rejects edges that would give the child
    /// a second parent, exceed the arity bound, or close a cycle.
    pub fn attach(&mut self, parent: NodeId, child: NodeId) -> Result<()> {
        self.check(parent)?;
        self.check(child)?;
        if parent == child {
            return Err(Error::InvalidTree(format!("self loop at {parent}")));
        }
        if let Some(p) = self.parent[child.0] {
            return Err(Error::InvalidTree(format!(
                "{child} already has parent {p}"
            )));
        }
        if let Some(k) = self.arity_bound {
            if self.children[parent.0].len() >= k {
                return Err(Error::InvalidTree(format!(
                    "{parent} already has {k} children"
                )));
            }
        }
        if self.root_of(parent) == child {
            return Err(Error::InvalidTree(format!(
                "edge {parent} ⇝ {child} closes a cycle"
            )));
        }
        self.parent[child.0] = Some(parent);
        self.children[parent.0].push(child);
        Ok(())
    }

    /// Checks parent/children consistency, the arity bound and acyclicity.
    pub fn validate(&self) -> Result<()> {
        let n = self.len();
        for v in self.ids() {
            if let Some(p) = self.parent[v.0] {
                if !self.children[p.0].contains(&v) {
                    return Err(Error::InvalidTree(format!(
                        "{v} names parent {p} but is not among its children"
                    )));
                }
            }
            for &c in &self.children[v.0] {
                if self.parent[c.0] != Some(v) {
                    return Err(Error::InvalidTree(format!(
                        "{c} is listed as a child of {v} but has parent {:?}",
                        self.parent[c.0]
                    )));
                }
            }
            if let Some(k) = self.arity_bound {
                if self.children[v.0].len() > k {
                    return Err(Error::InvalidTree(format!(
                        "{v} has {} children, bound is {k}",
                        self.children[v.0].len()
                    )));
                }
            }
            let mut cur = v;
            let mut steps = 0;
            while let Some(p) = self.parent[cur.0] {
                cur = p;
                steps += 1;
                if steps > n {
                    return Err(Error::InvalidTree(format!("{v} is its own ancestor")));
                }
            }
        }
        Ok(())
    }

    /// True when the forest is a single tree spanning every node.
    pub fn is_spanning_tree(&self) -> bool {
        let n = self.len();
        if n <= 1 {
            return true;
        }
        self.edge_count() == n - 1 && self.roots().count() == 1 && self.isolated().count() == 0
    }

    /// Hop distance of every node from the root of its component.
    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0usize; self.len()];
        let mut queue: VecDeque<NodeId> =
            self.ids().filter(|&v| self.parent[v.0].is_none()).collect();
        while let Some(v) = queue.pop_front() {
            for &c in &self.children[v.0] {
                depth[c.0] = depth[v.0] + 1;
                queue.push_back(c);
            }
        }
        depth
    }

    pub fn height(&self) -> usize {
        self.depths().into_iter().max().unwrap_or(0)
    }

    /// True when every node has at most one child.
    pub fn is_line(&self) -> bool {
        self.children.iter().all(|c| c.len() <= 1)
    }

    /// Nodes of a line network from root to leaf.
    pub fn line_order(&self) -> Result<Vec<NodeId>> {
        if !self.is_line() || !self.is_spanning_tree() {
            return Err(Error::NotALine);
        }
        let Some(mut cur) = self.ids().find(|&v| self.parent[v.0].is_none()) else {
            return Ok(Vec::new());
        };
        let mut order = vec![cur];
        while let Some(&c) = self.children[cur.0].first() {
            order.push(c);
            cur = c;
        }
        Ok(order)
    }
}

/// Recomputes a node's role from adjacency.
pub fn classify(network: &TreeNetwork, id: NodeId) -> Result<NodeState> {
    network.check(id)?;
    let children = network.children(id).len();
    Ok(match (network.parent(id), children) {
        (None, 0) => NodeState::Isolated,
        (Some(_), 0) => NodeState::Leaf,
        (Some(_), c) => NodeState::Internal(c),
        (None, c) => NodeState::Root(c),
    })
}

/// Per-node energies plus the cumulative amount lost in transfers.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyState {
    per_node: Vec<f64>,
    lost: f64,
    initial_total: f64,
}

impl EnergyState {
    pub fn new(per_node: Vec<f64>) -> Result<Self> {
        if let Some(i) = per_node.iter().position(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(Error::InvalidParameter(format!(
                "energy of node {i} is {}",
                per_node[i]
            )));
        }
        let initial_total = per_node.iter().sum();
        Ok(EnergyState {
            per_node,
            lost: 0.0,
            initial_total,
        })
    }

    pub fn len(&self) -> usize {
        self.per_node.len()
    }

    pub fn is_empty(&self) -> bool {
        self.per_node.is_empty()
    }

    pub fn get(&self, id: NodeId) -> f64 {
        self.per_node[id.0]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.per_node
    }

    pub fn lost(&self) -> f64 {
        self.lost
    }

    pub fn initial_total(&self) -> f64 {
        self.initial_total
    }

    /// Energy currently stored in the nodes.
    pub fn total(&self) -> f64 {
        self.per_node.iter().sum()
    }

    /// Moves `amount` out of `from`; `(1 − beta)·amount` arrives at `to` and
    /// the rest is added to the loss counter.
    pub fn transfer(&mut self, from: NodeId, to: NodeId, amount: f64, beta: f64) {
        debug_assert!(amount >= 0.0, "negative transfer {amount}");
        debug_assert!((0.0..1.0).contains(&beta), "beta {beta} out of range");
        let held = self.per_node[from.0];
        debug_assert!(
            amount <= held * (1.0 + ENERGY_TOLERANCE) + f64::MIN_POSITIVE,
            "transfer of {amount} exceeds holding {held}"
        );
        let amount = amount.min(held);
        self.per_node[from.0] = held - amount;
        let lost = beta * amount;
        self.per_node[to.0] += amount - lost;
        self.lost += lost;
    }

    /// |Σ energy + lost − initial| relative to the initial total.
    pub fn conservation_error(&self) -> f64 {
        let err = (self.total() + self.lost - self.initial_total).abs();
        if self.initial_total > 0.0 {
            err / self.initial_total
        } else {
            err
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DistributionKind {
    Exact,
    Relaxed,
    ExactUpToRoot,
}

fn approx_eq(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

/// Checks whether every parent holds `factor` times (exactly, or at least)
/// the energy of each child. [`check_distribution`] is the `factor = 2` case.
pub fn check_ratio_distribution(
    network: &TreeNetwork,
    energy: &EnergyState,
    kind: DistributionKind,
    factor: f64,
    tol: f64,
) -> Result<bool> {
    if !network.is_spanning_tree() {
        return Err(Error::IncompleteNetwork);
    }
    if energy.len() != network.len() {
        return Err(Error::MismatchedNodeSets(network.len(), energy.len()));
    }
    let ok = network.edges().all(|(p, c)| {
        let (ep, ec) = (energy.get(p), energy.get(c));
        match kind {
            DistributionKind::Exact => approx_eq(ep, factor * ec, tol),
            DistributionKind::Relaxed => ep >= factor * ec - tol * ep.abs(),
            DistributionKind::ExactUpToRoot => {
                network.parent(p).is_none() || approx_eq(ep, factor * ec, tol)
            }
        }
    });
    Ok(ok)
}

pub fn check_distribution(
    network: &TreeNetwork,
    energy: &EnergyState,
    kind: DistributionKind,
    tol: f64,
) -> Result<bool> {
    check_ratio_distribution(network, energy, kind, 2.0, tol)
}

/// Complete state of a simulated population.
#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub network: TreeNetwork,
    pub states: Vec<NodeState>,
    pub registers: Vec<Registers>,
    pub energy: EnergyState,
}

impl Population {
    /// All nodes isolated, with the given energies and merge keys.
    pub fn new(arity_bound: Option<usize>, energies: Vec<f64>, keys: Vec<u64>) -> Result<Self> {
        if energies.len() != keys.len() {
            return Err(Error::MismatchedNodeSets(energies.len(), keys.len()));
        }
        let n = energies.len();
        Ok(Population {
            network: TreeNetwork::new(n, arity_bound),
            states: vec![NodeState::Isolated; n],
            registers: keys.into_iter().map(Registers::with_key).collect(),
            energy: EnergyState::new(energies)?,
        })
    }

    /// Wraps an existing network; states are derived from adjacency.
    pub fn from_network(network: TreeNetwork, energies: Vec<f64>, registers: Vec<Registers>) -> Result<Self> {
        if energies.len() != network.len() {
            return Err(Error::MismatchedNodeSets(network.len(), energies.len()));
        }
        if registers.len() != network.len() {
            return Err(Error::MismatchedNodeSets(network.len(), registers.len()));
        }
        let states = network
            .ids()
            .map(|v| classify(&network, v))
            .collect::<Result<_>>()?;
        Ok(Population {
            network,
            states,
            registers,
            energy: EnergyState::new(energies)?,
        })
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn config(&self, id: NodeId) -> NodeConfig {
        NodeConfig {
            id,
            state: self.states[id.0],
            energy: self.energy.get(id),
            registers: self.registers[id.0],
        }
    }

    /// Number of isolated nodes plus number of roots.
    pub fn component_potential(&self) -> usize {
        self.states
            .iter()
            .filter(|s| matches!(s, NodeState::Isolated | NodeState::Root(_)))
            .count()
    }

    /// Checks that incrementally maintained states agree with adjacency.
    pub fn states_consistent(&self) -> bool {
        self.network
            .ids()
            .all(|v| classify(&self.network, v).ok() == Some(self.states[v.0]))
    }
}
