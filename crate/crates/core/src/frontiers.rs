//! The URL frontier and its five interchangeable disciplines.
//!
//! One `Frontier` type serves all strategies: FIFO for breadth-first, LIFO
//! for depth-first, and a max-score heap (ties broken by insertion order)
//! for the shark, priority, and naive-Bayes strategies. A URL is admitted
//! at most once; under the priority strategy a re-discovered URL keeps its
//! first-seen entry but its score is raised to the maximum seen.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::Error;

/// Frontier discipline selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StrategyKind {
    Bfs,
    Dfs,
    Shark,
    Priority,
    Nb,
}

impl StrategyKind {
    pub const ALL: [StrategyKind; 5] = [
        StrategyKind::Bfs,
        StrategyKind::Dfs,
        StrategyKind::Shark,
        StrategyKind::Priority,
        StrategyKind::Nb,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            StrategyKind::Bfs => "bfs",
            StrategyKind::Dfs => "dfs",
            StrategyKind::Shark => "shark",
            StrategyKind::Priority => "priority",
            StrategyKind::Nb => "nb",
        }
    }

    fn is_scored(&self) -> bool {
        matches!(self, StrategyKind::Shark | StrategyKind::Priority | StrategyKind::Nb)
    }
}

impl fmt::Display for StrategyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StrategyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<StrategyKind, Error> {
        match s {
            "bfs" => Ok(StrategyKind::Bfs),
            "dfs" => Ok(StrategyKind::Dfs),
            "shark" => Ok(StrategyKind::Shark),
            "priority" => Ok(StrategyKind::Priority),
            "nb" => Ok(StrategyKind::Nb),
            other => Err(Error::InvalidParam(format!("unknown strategy: {other}"))),
        }
    }
}

/// Shark-search mixing parameters.
///
/// delta decays relevance along the descendant chain, gamma balances the
/// inherited score against link-neighborhood evidence, beta weighs anchor
/// text against its surrounding context.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SharkParams {
    pub delta: f64,
    pub gamma: f64,
    pub beta: f64,
}

impl Default for SharkParams {
    fn default() -> SharkParams {
        SharkParams {
            delta: 0.5,
            gamma: 0.5,
            beta: 0.8,
        }
    }
}

impl SharkParams {
    pub fn validate(&self) -> Result<(), Error> {
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(Error::InvalidParam(format!("delta must be in (0,1), got {}", self.delta)));
        }
        for (name, v) in [("gamma", self.gamma), ("beta", self.beta)] {
            if !(0.0..=1.0).contains(&v) || v.is_nan() {
                return Err(Error::InvalidParam(format!("{name} must be in [0,1], got {v}")));
            }
        }
        Ok(())
    }
}

/// A scheduled URL. `seq` is assigned by the frontier at push time and is
/// unique within a crawl; `inherited` is only meaningful for shark.
#[derive(Debug, Clone, PartialEq)]
pub struct FrontierEntry {
    pub target: String,
    pub score: f64,
    pub depth: u32,
    pub seq: u64,
    pub inherited: f64,
}

impl FrontierEntry {
    pub fn new(target: String, score: f64, depth: u32, inherited: f64) -> FrontierEntry {
        FrontierEntry {
            target,
            score,
            depth,
            seq: 0,
            inherited,
        }
    }
}

// max-heap ordering: highest score first, ties by lowest seq
#[derive(Debug)]
struct HeapKey {
    score: f64,
    seq: u64,
    target: String,
}

impl PartialEq for HeapKey {
    fn eq(&self, other: &Self) -> bool {
        self.score == other.score && self.seq == other.seq
    }
}
impl Eq for HeapKey {}
impl PartialOrd for HeapKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for HeapKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.score
            .total_cmp(&other.score)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

// first-seen metadata for a live scored entry; only the score may change
struct LiveMeta {
    score: f64,
    seq: u64,
    depth: u32,
    inherited: f64,
}

enum Discipline {
    Fifo(VecDeque<FrontierEntry>),
    Lifo(Vec<FrontierEntry>),
    Scored {
        heap: BinaryHeap<HeapKey>,
        // live entries keyed by URL; stale heap keys are skipped on pop
        live: HashMap<String, LiveMeta>,
    },
}

pub struct Frontier {
    kind: StrategyKind,
    discipline: Discipline,
    members: std::collections::HashSet<String>,
    next_seq: u64,
    len: usize,
}

impl Frontier {
    pub fn new(kind: StrategyKind) -> Frontier {
        let discipline = if kind.is_scored() {
            Discipline::Scored {
                heap: BinaryHeap::new(),
                live: HashMap::new(),
            }
        } else if kind == StrategyKind::Dfs {
            Discipline::Lifo(Vec::new())
        } else {
            Discipline::Fifo(VecDeque::new())
        };
        Frontier {
            kind,
            discipline,
            members: std::collections::HashSet::new(),
            next_seq: 0,
            len: 0,
        }
    }

    pub fn kind(&self) -> StrategyKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Admit one entry. A target already in the frontier is not re-admitted;
    /// under the priority strategy its score is raised to max(old, new)
    /// while its first-seen depth and insertion order are retained.
    pub fn push(&mut self, mut entry: FrontierEntry) {
        if self.members.contains(&entry.target) {
            if self.kind == StrategyKind::Priority {
                if let Discipline::Scored { heap, live } = &mut self.discipline {
                    let meta = live.get_mut(&entry.target).expect("member has live meta");
                    if entry.score > meta.score {
                        meta.score = entry.score;
                        heap.push(HeapKey {
                            score: meta.score,
                            seq: meta.seq,
                            target: entry.target,
                        });
                    }
                }
            }
            return;
        }

        entry.seq = self.next_seq;
        self.next_seq += 1;
        self.members.insert(entry.target.clone());
        self.len += 1;

        match &mut self.discipline {
            Discipline::Fifo(q) => q.push_back(entry),
            Discipline::Lifo(s) => s.push(entry),
            Discipline::Scored { heap, live } => {
                live.insert(
                    entry.target.clone(),
                    LiveMeta {
                        score: entry.score,
                        seq: entry.seq,
                        depth: entry.depth,
                        inherited: entry.inherited,
                    },
                );
                heap.push(HeapKey {
                    score: entry.score,
                    seq: entry.seq,
                    target: entry.target,
                });
            }
        }
    }

    pub fn push_all(&mut self, entries: Vec<FrontierEntry>) {
        for e in entries {
            self.push(e);
        }
    }

    /// Remove and return the next entry under this frontier's discipline,
    /// or `None` when empty.
    pub fn pop(&mut self) -> Option<FrontierEntry> {
        let popped = match &mut self.discipline {
            Discipline::Fifo(q) => q.pop_front(),
            Discipline::Lifo(s) => s.pop(),
            Discipline::Scored { heap, live } => loop {
                let key = heap.pop()?;
                match live.get(&key.target) {
                    Some(meta) if meta.score == key.score => {
                        let meta = live.remove(&key.target).unwrap();
                        break Some(FrontierEntry {
                            target: key.target,
                            score: meta.score,
                            depth: meta.depth,
                            seq: meta.seq,
                            inherited: meta.inherited,
                        });
                    }
                    _ => continue, // stale: superseded score or already popped
                }
            },
        };
        if let Some(entry) = &popped {
            self.members.remove(&entry.target);
            self.len -= 1;
        }
        popped
    }
}

// ---------------------------------------------------------------------------
// Strategy scoring rules
// ---------------------------------------------------------------------------

/// Shark-search potential score for a child link.
///
/// The child's inherited score decays the parent's own relevance when the
/// parent scored above zero, otherwise it decays the parent's inherited
/// score. Anchor evidence dominates the neighborhood term: any anchor hit
/// promotes the context component to 1.
///
/// Returns `(potential, child_inherited)`.
pub fn shark_score(
    parent_sim: f64,
    parent_inherited: f64,
    anchor_sim: f64,
    context_sim: f64,
    params: &SharkParams,
) -> (f64, f64) {
    let child_inherited = if parent_sim > 0.0 {
        params.delta * parent_sim
    } else {
        params.delta * parent_inherited
    };
    let context_component = if anchor_sim > 0.0 { 1.0 } else { context_sim };
    let neighborhood = params.beta * anchor_sim + (1.0 - params.beta) * context_component;
    let potential = params.gamma * child_inherited + (1.0 - params.gamma) * neighborhood;
    (potential, child_inherited)
}

/// Priority-queue strategy score: equal mix of the parent page's relevance
/// and the link's anchor relevance.
pub fn priority_score(parent_sim: f64, anchor_sim: f64) -> f64 {
    0.5 * parent_sim + 0.5 * anchor_sim
}

/// Classifier strategy link gate: follow links only from pages whose
/// relevance posterior clears the threshold; the posterior doubles as the
/// frontier score.
pub fn nb_link_admit(parent_posterior: f64, threshold: f64) -> (bool, f64) {
    (parent_posterior >= threshold, parent_posterior)
}
