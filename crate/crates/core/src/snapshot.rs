//! Plain-text network snapshots and their digest.
//!
//! ```text
//! # id state parent w d h energy
//! 0 R2 -1 3 0 2 1333.3333333333333
//! 1 L 0 3 1 2 666.6666666666666
//! # lost 0
//! ```
//!
//! `parent` is `-1` for roots and isolated nodes. Energies use Rust's
//! shortest round-trip float formatting, so parsing restores them bit for
//! bit. The digest is the SHA-256 of the snapshot text.

use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::population::{classify, NodeId, NodeState, Population, Registers, TreeNetwork};

pub const SNAPSHOT_HEADER: &str = "# id state parent w d h energy";

#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotRow {
    pub id: NodeId,
    pub state: NodeState,
    pub parent: Option<NodeId>,
    pub w: u64,
    pub d: u32,
    pub h: u32,
    pub energy: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkSnapshot {
    pub rows: Vec<SnapshotRow>,
    pub lost: f64,
    /// Arity bound to restore with; not part of the text format.
    pub arity_bound: Option<usize>,
}

impl NetworkSnapshot {
    pub fn from_population(pop: &Population) -> Self {
        let rows = pop
            .network
            .ids()
            .map(|v| {
                let r = pop.registers[v.0];
                SnapshotRow {
                    id: v,
                    state: pop.states[v.0],
                    parent: pop.network.parent(v),
                    w: r.w,
                    d: r.d,
                    h: r.h,
                    energy: pop.energy.get(v),
                }
            })
            .collect();
        NetworkSnapshot {
            rows,
            lost: pop.energy.lost(),
            arity_bound: pop.network.arity_bound(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(SNAPSHOT_HEADER);
        out.push('\n');
        for r in &self.rows {
            let parent = r.parent.map_or(-1, |p| p.0 as i64);
            let _ = writeln!(out, "{} {} {} {} {} {} {}", r.id.0, r.state, parent, r.w, r.d, r.h, r.energy);
        }
        let _ = writeln!(out, "# lost {}", self.lost);
        out
    }

    pub fn digest(&self) -> String {
        hex::encode(Sha256::digest(self.to_text().as_bytes()))
    }

    /// Parses snapshot text; the state column must agree with adjacency.
    pub fn parse(text: &str, arity_bound: Option<usize>) -> Result<Self> {
        let mut rows = Vec::new();
        let mut lost = 0.0;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                if let Some(v) = rest.trim().strip_prefix("lost ") {
                    lost = v.trim().parse().map_err(|_| Error::parse(lineno, "bad lost value"))?;
                }
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            if f.len() != 7 {
                return Err(Error::parse(lineno, format!("expected 7 columns, found {}", f.len())));
            }
            let num = |s: &str, what: &str| -> Result<u64> {
                s.parse().map_err(|_| Error::parse(lineno, format!("bad {what} {s:?}")))
            };
            let id = num(f[0], "id")? as usize;
            if id != rows.len() {
                return Err(Error::parse(lineno, format!("expected id {}, found {id}", rows.len())));
            }
            let state: NodeState = f[1]
                .parse()
                .map_err(|_| Error::parse(lineno, format!("bad state {:?}", f[1])))?;
            let parent = match f[2] {
                "-1" => None,
                s => Some(NodeId(num(s, "parent")? as usize)),
            };
            rows.push(SnapshotRow {
                id: NodeId(id),
                state,
                parent,
                w: num(f[3], "w")?,
                d: num(f[4], "d")? as u32,
                h: num(f[5], "h")? as u32,
                energy: f[6]
                    .parse()
                    .map_err(|_| Error::parse(lineno, format!("bad energy {:?}", f[6])))?,
            });
        }
        let snap = NetworkSnapshot {
            rows,
            lost,
            arity_bound,
        };
        let net = snap.network()?;
        for r in &snap.rows {
            let actual = classify(&net, r.id)?;
            if actual != r.state {
                return Err(Error::InvalidTree(format!(
                    "node {} listed as {} but adjacency says {}",
                    r.id, r.state, actual
                )));
            }
        }
        Ok(snap)
    }

    pub fn read(path: &Path, arity_bound: Option<usize>) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, arity_bound)
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_text()).map_err(|e| Error::io(path, e))
    }

    pub fn network(&self) -> Result<TreeNetwork> {
        let parents: Vec<Option<NodeId>> = self.rows.iter().map(|r| r.parent).collect();
        TreeNetwork::from_parents(&parents, self.arity_bound)
    }

    /// Rebuilds a population. The loss counter is not restored; the
    /// snapshot's energies become the new starting energies.
    pub fn to_population(&self) -> Result<Population> {
        let registers = self
            .rows
            .iter()
            .map(|r| Registers {
                w: r.w,
                d: r.d,
                h: r.h,
                target: None,
            })
            .collect();
        Population::from_network(self.network()?, self.rows.iter().map(|r| r.energy).collect(), registers)
    }
}
