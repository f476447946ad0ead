//! Tree formation protocols: TreeConstructor for arbitrary trees and
//! k-TreeConstructor for k-ary trees (BinaryTreeConstructor is `k = 2`).
//!
//! A pair `(u, v)` is tried in both orientations. The symmetric rules (SS,
//! and RR of the arbitrary protocol) make the first node of the pair the
//! parent, so the scheduler's random orientation decides. Under the k-ary
//! protocol a root may only be captured by a node with a smaller merge key
//! `w`, and the new child copies its parent's key on attachment.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::population::{NodeId, NodeState, Population, TreeNetwork};
use crate::scheduler::Pair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum FormationProtocol {
    Arbitrary,
    KAry(usize),
}

impl FormationProtocol {
    pub const BINARY: FormationProtocol = FormationProtocol::KAry(2);

    pub fn new_kary(k: usize) -> Result<Self> {
        if k < 2 {
            return Err(Error::InvalidParameter(format!("arity must be at least 2, got {k}")));
        }
        Ok(FormationProtocol::KAry(k))
    }

    pub fn arity_bound(self) -> Option<usize> {
        match self {
            FormationProtocol::Arbitrary => None,
            FormationProtocol::KAry(k) => Some(k),
        }
    }
}

impl fmt::Display for FormationProtocol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormationProtocol::Arbitrary => write!(f, "arbitrary"),
            FormationProtocol::KAry(k) => write!(f, "kary:{k}"),
        }
    }
}

impl FromStr for FormationProtocol {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "arbitrary" => Ok(FormationProtocol::Arbitrary),
            "binary" => Ok(FormationProtocol::BINARY),
            _ => {
                let k = s
                    .strip_prefix("kary:")
                    .and_then(|k| k.parse::<usize>().ok())
                    .ok_or_else(|| format!("unknown formation protocol {s:?}"))?;
                FormationProtocol::new_kary(k).map_err(|e| e.to_string())
            }
        }
    }
}

impl TryFrom<String> for FormationProtocol {
    type Error = String;

    fn try_from(s: String) -> std::result::Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<FormationProtocol> for String {
    fn from(p: FormationProtocol) -> String {
        p.to_string()
    }
}

/// Which formation rule fired during an interaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RuleTag {
    SS,
    RS,
    IS,
    LS,
    RR,
    IR,
    LR,
    UW,
    Noop,
}

impl RuleTag {
    /// True for rules that add an edge.
    pub fn connects(self) -> bool {
        !matches!(self, RuleTag::UW | RuleTag::Noop)
    }
}

impl fmt::Display for RuleTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            RuleTag::SS => "SS",
            RuleTag::RS => "RS",
            RuleTag::IS => "IS",
            RuleTag::LS => "LS",
            RuleTag::RR => "RR",
            RuleTag::IR => "IR",
            RuleTag::LR => "LR",
            RuleTag::UW => "UW",
            RuleTag::Noop => "NOOP",
        };
        f.write_str(s)
    }
}

impl FromStr for RuleTag {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(match s {
            "SS" => RuleTag::SS,
            "RS" => RuleTag::RS,
            "IS" => RuleTag::IS,
            "LS" => RuleTag::LS,
            "RR" => RuleTag::RR,
            "IR" => RuleTag::IR,
            "LR" => RuleTag::LR,
            "UW" => RuleTag::UW,
            "NOOP" => RuleTag::Noop,
            _ => return Err(format!("unknown rule tag {s:?}")),
        })
    }
}

/// The rule under which `child` may attach to `parent`, if any.
fn connecting_rule(
    protocol: FormationProtocol,
    pop: &Population,
    parent: NodeId,
    child: NodeId,
) -> Option<RuleTag> {
    use NodeState::*;
    let sp = pop.states[parent.0];
    let sc = pop.states[child.0];
    let has_room = match protocol {
        FormationProtocol::Arbitrary => true,
        FormationProtocol::KAry(k) => sp.children() < k,
    };
    if !has_room {
        return None;
    }
    match (sp, sc) {
        (Isolated, Isolated) => Some(RuleTag::SS),
        (Root(_), Isolated) => Some(RuleTag::RS),
        (Internal(_), Isolated) => Some(RuleTag::IS),
        (Leaf, Isolated) => Some(RuleTag::LS),
        (Root(_) | Internal(_) | Leaf, Root(_)) => match protocol {
            FormationProtocol::Arbitrary => sp.is_root().then_some(RuleTag::RR),
            FormationProtocol::KAry(_) => {
                if pop.registers[parent.0].w >= pop.registers[child.0].w {
                    return None;
                }
                Some(match sp {
                    Root(_) => RuleTag::RR,
                    Internal(_) => RuleTag::IR,
                    _ => RuleTag::LR,
                })
            }
        },
        _ => None,
    }
}

/// Fires at most one formation rule for the interacting pair and returns
/// its tag.
pub fn apply_formation_rule(
    protocol: FormationProtocol,
    pop: &mut Population,
    pair: Pair,
) -> Result<RuleTag> {
    let (a, b) = pair;
    for id in [a, b] {
        if !pop.network.contains(id) {
            return Err(Error::UnknownNode(id));
        }
    }
    if a == b {
        return Err(Error::InvalidParameter(format!("node {a} cannot interact with itself")));
    }

    if let Some((p, c)) = pop.network.orient_edge(a, b) {
        return Ok(match protocol {
            FormationProtocol::Arbitrary => RuleTag::Noop,
            FormationProtocol::KAry(_) => {
                pop.registers[c.0].w = pop.registers[p.0].w;
                RuleTag::UW
            }
        });
    }

    let fired = connecting_rule(protocol, pop, a, b)
        .map(|tag| (a, b, tag))
        .or_else(|| connecting_rule(protocol, pop, b, a).map(|tag| (b, a, tag)));
    let Some((parent, child, tag)) = fired else {
        return Ok(RuleTag::Noop);
    };

    pop.network.attach(parent, child)?;
    pop.states[parent.0] = pop.states[parent.0].with_new_child();
    pop.states[child.0] = pop.states[child.0].with_parent();
    if let FormationProtocol::KAry(_) = protocol {
        pop.registers[child.0].w = pop.registers[parent.0].w;
    }
    debug_assert_eq!(
        Ok(pop.states[parent.0]),
        crate::population::classify(&pop.network, parent).map_err(|e| e.to_string())
    );
    Ok(tag)
}

/// Simulator-side check that a single spanning tree has formed.
pub fn is_formation_complete(network: &TreeNetwork) -> bool {
    network.is_spanning_tree()
}
