//! Fair probabilistic scheduler, scripted schedules, and the interaction
//! trace used for record/replay.
//!
//! Every run owns one [`SchedulerRng`] stream (ChaCha8, seeded through
//! `SeedableRng::seed_from_u64`). Draw order inside an interaction is fixed:
//! the pair first, then a rand-exchange λ if the protocol needs one, then β
//! if energy actually moves.

use std::collections::VecDeque;
use std::fmt::Write as _;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::energy::{draw_uniform_lambda, LossModel};
use crate::error::{Error, Result};
use crate::formation::RuleTag;
use crate::population::NodeId;

pub type Pair = (NodeId, NodeId);

/// Deterministic, seedable generator backing every random choice of a run.
#[derive(Debug, Clone)]
pub struct SchedulerRng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl SchedulerRng {
    pub const ALGORITHM: &'static str = "chacha8";

    pub fn new(seed: u64) -> Self {
        SchedulerRng {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }
}

impl RngCore for SchedulerRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of run `run_index`: output number `run_index + 1` of a SplitMix64
/// generator whose state starts at `master_seed`.
pub fn derive_run_seed(master_seed: u64, run_index: u64) -> u64 {
    const GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;
    splitmix64(master_seed.wrapping_add(run_index.wrapping_add(1).wrapping_mul(GAMMA)))
}

/// Draws one unordered pair uniformly from the `n(n−1)/2` pairs, presented
/// in a uniformly random orientation.
pub fn sample_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Result<Pair> {
    if n < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least two nodes to form a pair, got {n}"
        )));
    }
    let u = rng.random_range(0..n as u64) as usize;
    let mut v = rng.random_range(0..(n - 1) as u64) as usize;
    if v >= u {
        v += 1;
    }
    Ok((NodeId(u), NodeId(v)))
}

/// Supplies a simulation with interacting pairs and the per-interaction
/// random parameters. `next_pair` returning `None` ends the run.
pub trait InteractionSource {
    fn next_pair(&mut self, n: usize) -> Option<Pair>;
    fn draw_lambda(&mut self, lo: f64, hi: f64) -> f64;
    fn draw_beta(&mut self, loss: &LossModel) -> f64;
}

/// Fair probabilistic scheduler with an optional scripted prefix.
#[derive(Debug, Clone)]
pub struct Scheduler {
    rng: SchedulerRng,
    script: VecDeque<Pair>,
}

impl Scheduler {
    pub fn random(rng: SchedulerRng) -> Self {
        Scheduler {
            rng,
            script: VecDeque::new(),
        }
    }

    /// Yields `pairs` in order, then falls back to uniform sampling.
    pub fn scripted(pairs: impl IntoIterator<Item = Pair>, rng: SchedulerRng) -> Self {
        Scheduler {
            rng,
            script: pairs.into_iter().collect(),
        }
    }

    pub fn script_remaining(&self) -> usize {
        self.script.len()
    }

    pub fn rng_mut(&mut self) -> &mut SchedulerRng {
        &mut self.rng
    }
}

/// Scripted scheduler whose fallback stream is seeded with `seed`.
pub fn scripted_scheduler(pairs: impl IntoIterator<Item = Pair>, seed: u64) -> Scheduler {
    Scheduler::scripted(pairs, SchedulerRng::new(seed))
}

impl InteractionSource for Scheduler {
    fn next_pair(&mut self, n: usize) -> Option<Pair> {
        if let Some(p) = self.script.pop_front() {
            return Some(p);
        }
        sample_pair(&mut self.rng, n).ok()
    }

    fn draw_lambda(&mut self, lo: f64, hi: f64) -> f64 {
        draw_uniform_lambda(&mut self.rng, lo, hi)
    }

    fn draw_beta(&mut self, loss: &LossModel) -> f64 {
        loss.sample_beta(&mut self.rng)
    }
}

/// One interaction as recorded in a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    pub step: u64,
    pub pair: Pair,
    pub rule: RuleTag,
    pub moved: Option<f64>,
    pub beta: Option<f64>,
    pub lambda: Option<f64>,
}

const TRACE_MAGIC: &str = "# tree-energy trace v1";
const TRACE_COLUMNS: &str = "# columns: step u v rule moved beta lambda";

/// Seeded, replayable record of every interaction of a run.
///
/// Text form: a header of `# key value` lines (always `seed`, plus free-form
/// metadata such as the run config and final digest) followed by one
/// whitespace-separated record per step: `step u v rule moved beta lambda`,
/// with `-` for absent values.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InteractionTrace {
    pub seed: u64,
    pub meta: Vec<(String, String)>,
    pub records: Vec<TraceRecord>,
}

fn opt_f64(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |x| x.to_string())
}

fn parse_opt_f64(tok: &str, line: usize) -> Result<Option<f64>> {
    if tok == "-" {
        return Ok(None);
    }
    tok.parse()
        .map(Some)
        .map_err(|_| Error::parse(line, format!("bad number {tok:?}")))
}

impl InteractionTrace {
    pub fn new(seed: u64) -> Self {
        InteractionTrace {
            seed,
            ..Default::default()
        }
    }

    pub fn meta(&self, key: &str) -> Option<&str> {
        self.meta
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }

    pub fn set_meta(&mut self, key: &str, value: impl Into<String>) {
        let value = value.into();
        assert!(!value.contains('\n'), "metadata values must be single-line");
        match self.meta.iter_mut().find(|(k, _)| k == key) {
            Some(entry) => entry.1 = value,
            None => self.meta.push((key.to_string(), value)),
        }
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str(TRACE_MAGIC);
        out.push('\n');
        let _ = writeln!(out, "# seed {}", self.seed);
        for (k, v) in &self.meta {
            let _ = writeln!(out, "# {k} {v}");
        }
        out.push_str(TRACE_COLUMNS);
        out.push('\n');
        for r in &self.records {
            let _ = writeln!(
                out,
                "{} {} {} {} {} {} {}",
                r.step,
                r.pair.0,
                r.pair.1,
                r.rule,
                opt_f64(r.moved),
                opt_f64(r.beta),
                opt_f64(r.lambda)
            );
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim_end() == TRACE_MAGIC => {}
            _ => return Err(Error::parse(1, "missing trace header")),
        }
        let mut trace = InteractionTrace::default();
        let mut seen_seed = false;
        for (i, raw) in lines {
            let lineno = i + 1;
            let line = raw.trim_end();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("# ") {
                if line == TRACE_COLUMNS {
                    continue;
                }
                let (key, value) = rest.split_once(' ').unwrap_or((rest, ""));
                if key == "seed" {
                    trace.seed = value
                        .parse()
                        .map_err(|_| Error::parse(lineno, "bad seed"))?;
                    seen_seed = true;
                } else {
                    trace.meta.push((key.to_string(), value.to_string()));
                }
                continue;
            }
            let toks: Vec<&str> = line.split_whitespace().collect();
            if toks.len() != 7 {
                return Err(Error::parse(lineno, "expected 7 columns"));
            }
            let int = |t: &str| -> Result<u64> {
                t.parse()
                    .map_err(|_| Error::parse(lineno, format!("bad integer {t:?}")))
            };
            let step = int(toks[0])?;
            if step != trace.records.len() as u64 {
                return Err(Error::parse(lineno, format!("step {step} out of sequence")));
            }
            let rule = toks[3]
                .parse()
                .map_err(|e: String| Error::parse(lineno, e))?;
            trace.records.push(TraceRecord {
                step,
                pair: (NodeId(int(toks[1])? as usize), NodeId(int(toks[2])? as usize)),
                rule,
                moved: parse_opt_f64(toks[4], lineno)?,
                beta: parse_opt_f64(toks[5], lineno)?,
                lambda: parse_opt_f64(toks[6], lineno)?,
            });
        }
        if !seen_seed {
            return Err(Error::parse(1, "trace has no seed"));
        }
        Ok(trace)
    }
}

/// Feeds a recorded trace back into a simulation. Values the simulation asks
/// for but the trace lacks are reported through [`TraceReplay::desynced`].
#[derive(Debug, Clone)]
pub struct TraceReplay<'a> {
    records: &'a [TraceRecord],
    pos: usize,
    desync: Option<String>,
}

impl<'a> TraceReplay<'a> {
    pub fn new(trace: &'a InteractionTrace) -> Self {
        TraceReplay {
            records: &trace.records,
            pos: 0,
            desync: None,
        }
    }

    pub fn remaining(&self) -> usize {
        self.records.len() - self.pos
    }

    pub fn desynced(&self) -> Option<&str> {
        self.desync.as_deref()
    }

    fn current(&self) -> Option<&TraceRecord> {
        self.pos.checked_sub(1).and_then(|i| self.records.get(i))
    }

    fn flag(&mut self, what: &str) {
        if self.desync.is_none() {
            self.desync = Some(format!("step {}: trace has no {what}", self.pos.saturating_sub(1)));
        }
    }
}

impl InteractionSource for TraceReplay<'_> {
    fn next_pair(&mut self, n: usize) -> Option<Pair> {
        let r = self.records.get(self.pos)?;
        self.pos += 1;
        let (u, v) = r.pair;
        if u.0 >= n || v.0 >= n || u == v {
            self.flag("valid pair");
            return None;
        }
        Some(r.pair)
    }

    fn draw_lambda(&mut self, lo: f64, _hi: f64) -> f64 {
        match self.current().and_then(|r| r.lambda) {
            Some(l) => l,
            None => {
                self.flag("lambda");
                lo
            }
        }
    }

    fn draw_beta(&mut self, _loss: &LossModel) -> f64 {
        match self.current().and_then(|r| r.beta) {
            Some(b) => b,
            None => {
                self.flag("beta");
                0.0
            }
        }
    }
}
