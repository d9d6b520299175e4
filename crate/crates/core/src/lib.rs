//! frontier-bench: an offline benchmark harness that compares five crawl
//! frontier strategies — breadth-first, depth-first, shark-search,
//! priority-based focused, and naive-Bayes focused — under identical,
//! reproducible conditions on a frozen web-graph snapshot served by a
//! virtual clock.
//!
//! Pipeline: build a snapshot ([`webgraph::synth_graph`] or live ingestion
//! via [`engine::run_live_crawl`]), run one crawl per strategy
//! ([`engine::crawl`]), then score the traces ([`evalbench::compare`]) on
//! harvest rate, precision/recall/F1, virtual-time budgets, and frontier
//! memory estimates.

pub mod cli;
pub mod engine;
pub mod error;
pub mod evalbench;
pub mod extract;
pub mod frontiers;
pub mod livefetch;
pub mod relevance;
pub mod stopwords;
pub mod webgraph;

pub use error::{Error, Result};
