//! Frozen web-graph snapshots and the deterministic fetch simulator.
//!
//! A [`GraphSnapshot`] is an immutable corpus of pages served under a
//! [`VirtualClock`], so every frontier strategy is measured against exactly
//! the same pages, link structure, and per-page costs. Time advances only
//! through [`sim_fetch`], by each page's stored latency, which makes the
//! time-budget metrics pure functions of the visit order.

use std::collections::BTreeMap;
use std::fs;
use std::io::Write;
use std::path::Path;

use base64::engine::general_purpose::STANDARD as B64;
use base64::Engine;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::extract::{content_checksum, require_normalized};

/// One stored page: raw HTML plus its simulated fetch cost and, when known,
/// a ground-truth relevance label.
#[derive(Debug, Clone, PartialEq)]
pub struct PageRecord {
    pub url: String,
    pub html: Vec<u8>,
    pub latency_ms: u64,
    pub label: Option<bool>,
}

/// Immutable corpus: pages keyed by normalized URL, plus the topic query and
/// seed list the corpus was built around. Shareable across threads.
#[derive(Debug, Clone, PartialEq)]
pub struct GraphSnapshot {
    pub format_version: u32,
    pub topic_query: Vec<String>,
    pub pages: BTreeMap<String, PageRecord>,
    pub seeds: Vec<String>,
}

/// Simulated milliseconds since crawl start. Only ever moves forward.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VirtualClock {
    now_ms: u64,
}

impl VirtualClock {
    pub fn new() -> VirtualClock {
        VirtualClock { now_ms: 0 }
    }

    pub fn now_ms(&self) -> u64 {
        self.now_ms
    }

    fn advance(&mut self, ms: u64) {
        self.now_ms += ms;
    }
}

/// Per-page fetch cost used by the synthetic generator and the ingest
/// fallback. 3600 ms per page makes a 1-hour budget resolve to exactly
/// 1000 pages.
pub const DEFAULT_LATENCY_MS: u64 = 3600;

/// Clock cost of fetching a URL that is not in the snapshot.
pub const DEFAULT_MISS_PENALTY_MS: u64 = 0;

pub const FORMAT_VERSION: u32 = 1;

// ---------------------------------------------------------------------------
// Fetch simulation
// ---------------------------------------------------------------------------

/// Serve one fetch from the snapshot. A hit advances the clock by the page's
/// latency and returns the record; a miss (dead link) advances the clock by
/// `miss_penalty_ms` and reports not-found so the caller can skip it.
pub fn sim_fetch<'a>(
    snapshot: &'a GraphSnapshot,
    url: &str,
    clock: &mut VirtualClock,
    miss_penalty_ms: u64,
) -> Result<&'a PageRecord> {
    match snapshot.pages.get(url) {
        Some(record) => {
            clock.advance(record.latency_ms);
            Ok(record)
        }
        None => {
            clock.advance(miss_penalty_ms);
            Err(Error::NotFound(url.to_string()))
        }
    }
}

// ---------------------------------------------------------------------------
// Snapshot line format
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct HeaderLine {
    format_version: u32,
    topic_query: String,
    seeds: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct RecordLine {
    url: String,
    latency_ms: u64,
    label: Option<bool>,
    html_b64: String,
}

impl GraphSnapshot {
    /// Canonical serialization: header line, then one record line per page
    /// in sorted-URL order. `save -> load -> save` is byte-identical.
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        let header = HeaderLine {
            format_version: self.format_version,
            topic_query: self.topic_query.join(" "),
            seeds: self.seeds.clone(),
        };
        writeln!(out, "{}", serde_json::to_string(&header).expect("header json")).unwrap();
        for record in self.pages.values() {
            let line = RecordLine {
                url: record.url.clone(),
                latency_ms: record.latency_ms,
                label: record.label,
                html_b64: B64.encode(&record.html),
            };
            writeln!(out, "{}", serde_json::to_string(&line).expect("record json")).unwrap();
        }
        out
    }

    /// Hex digest of the canonical serialization; traces and reports carry
    /// this so metrics are never computed against the wrong corpus.
    pub fn id(&self) -> String {
        format!("{:016x}", content_checksum(&self.to_bytes()))
    }

    /// Count of pages the oracle would call relevant under stored labels.
    pub fn labeled_relevant(&self) -> usize {
        self.pages
            .values()
            .filter(|p| p.label == Some(true))
            .count()
    }

    fn validate(&self) -> Result<()> {
        for seed in &self.seeds {
            if !self.pages.contains_key(seed) {
                return Err(Error::MissingSeed(seed.clone()));
            }
        }
        Ok(())
    }
}

pub fn save_snapshot(snapshot: &GraphSnapshot, path: &Path) -> Result<()> {
    let mut file = fs::File::create(path)?;
    file.write_all(&snapshot.to_bytes())?;
    file.flush()?;
    Ok(())
}

pub fn load_snapshot(path: &Path) -> Result<GraphSnapshot> {
    let data = fs::read_to_string(path)?;
    parse_snapshot(&data)
}

pub fn parse_snapshot(data: &str) -> Result<GraphSnapshot> {
    let mut lines = data.lines().enumerate();
    let (_, header_line) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "empty snapshot file".to_string(),
    })?;
    let header: HeaderLine = serde_json::from_str(header_line).map_err(|e| Error::Parse {
        line: 1,
        msg: format!("bad header: {e}"),
    })?;

    let mut pages = BTreeMap::new();
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let lineno = idx + 1;
        let record: RecordLine = serde_json::from_str(line).map_err(|e| Error::Parse {
            line: lineno,
            msg: format!("bad record: {e}"),
        })?;
        let url = require_normalized(&record.url).map_err(|e| Error::Parse {
            line: lineno,
            msg: e.to_string(),
        })?;
        let html = B64.decode(record.html_b64.as_bytes()).map_err(|e| Error::Parse {
            line: lineno,
            msg: format!("bad base64: {e}"),
        })?;
        let page = PageRecord {
            url: url.clone(),
            html,
            latency_ms: record.latency_ms,
            label: record.label,
        };
        if pages.insert(url.clone(), page).is_some() {
            return Err(Error::DuplicateUrl(url));
        }
    }

    let mut seeds = Vec::with_capacity(header.seeds.len());
    for seed in &header.seeds {
        seeds.push(require_normalized(seed)?);
    }

    let snapshot = GraphSnapshot {
        format_version: header.format_version,
        topic_query: header
            .topic_query
            .split_whitespace()
            .map(|s| s.to_string())
            .collect(),
        pages,
        seeds,
    };
    snapshot.validate()?;
    Ok(snapshot)
}

// ---------------------------------------------------------------------------
// Synthetic planted-cluster corpus
// ---------------------------------------------------------------------------

/// Parameters for the synthetic corpus generator.
#[derive(Debug, Clone)]
pub struct SynthParams {
    pub rng_seed: u64,
    pub n_pages: usize,
    pub relevant_fraction: f64,
    pub intra_cluster_link_prob: f64,
    pub cross_link_prob: f64,
    pub latency_ms: u64,
}

impl Default for SynthParams {
    fn default() -> SynthParams {
        SynthParams {
            rng_seed: 42,
            n_pages: 1000,
            relevant_fraction: 0.2,
            intra_cluster_link_prob: 0.05,
            cross_link_prob: 0.15,
            latency_ms: DEFAULT_LATENCY_MS,
        }
    }
}

const SYNTH_HOST: &str = "https://synth.example";
const QUERY_TOKENS: [&str; 3] = ["quantum", "entanglement", "research"];

const REL_WORDS: [&str; 12] = [
    "photon", "qubit", "superposition", "decoherence", "laboratory", "particle",
    "physics", "measurement", "spin", "experiment", "theory", "collider",
];
const IRR_WORDS: [&str; 12] = [
    "recipe", "football", "garden", "travel", "fashion", "finance",
    "weather", "celebrity", "kitchen", "stadium", "holiday", "shopping",
];
const NEUTRAL_WORDS: [&str; 6] = ["archive", "collection", "updated", "overview", "directory", "journal"];

/// Tree branching factor: positions 0..=1110 sit within three hops of the
/// root, so a depth-3 crawl can reach a four-digit corpus.
const TREE_BRANCH: usize = 10;

fn synth_url(index: usize) -> String {
    format!("{SYNTH_HOST}/p/{index:06}")
}

fn synth_href(index: usize) -> String {
    format!("/p/{index:06}")
}

fn ceil_fraction(fraction: f64, n: usize) -> usize {
    // guard against float noise pushing an exact product over the next integer
    let exact = fraction * n as f64;
    let mut k = (exact - 1e-9).ceil() as usize;
    if fraction > 0.0 && k == 0 {
        k = 1;
    }
    k.min(n)
}

/// Generate a planted-cluster web graph.
///
/// Page 0 is the seed. The first `ceil(relevant_fraction * n_pages)` page
/// indices form the topic cluster: their text carries the topic-query terms,
/// they are densely linked among themselves, and every link pointing into
/// the cluster carries query terms in its anchor text. Irrelevant pages use
/// a disjoint vocabulary and link into the cluster only sparsely. A
/// branching-factor-10 spanning tree over shuffled positions guarantees
/// every page is reachable from the seed.
///
/// The seed belongs to the cluster whenever the cluster is non-empty, and
/// its outlinks are curated (tree children plus a couple of forced cluster
/// and non-cluster entries) rather than densely intra-linked, so strategies
/// are separated by how they order discovery, not by seed adjacency. The
/// forced links also guarantee the seed's immediate children span both
/// relevance classes, which classifier-based strategies need for training.
pub fn synth_graph(params: &SynthParams) -> Result<GraphSnapshot> {
    if params.n_pages < 1 {
        return Err(Error::InvalidParam("n_pages must be >= 1".to_string()));
    }
    for (name, v) in [
        ("relevant_fraction", params.relevant_fraction),
        ("intra_cluster_link_prob", params.intra_cluster_link_prob),
        ("cross_link_prob", params.cross_link_prob),
    ] {
        if !(0.0..=1.0).contains(&v) || v.is_nan() {
            return Err(Error::InvalidParam(format!("{name} must be in [0,1], got {v}")));
        }
    }

    let n = params.n_pages;
    let n_rel = ceil_fraction(params.relevant_fraction, n);
    let mut rng = ChaCha8Rng::seed_from_u64(params.rng_seed);

    // position -> page index; position 0 is the seed, the rest shuffled
    let mut index_at_position: Vec<usize> = (0..n).collect();
    index_at_position[1..].shuffle(&mut rng);
    let mut position_of = vec![0usize; n];
    for (pos, &idx) in index_at_position.iter().enumerate() {
        position_of[idx] = pos;
    }

    let is_relevant = |idx: usize| idx < n_rel;

    let mut pages = BTreeMap::new();
    for (idx, &pos) in position_of.iter().enumerate() {

        // spanning-tree children keep the whole graph reachable
        let mut targets: Vec<usize> = Vec::new();
        for c in 1..=TREE_BRANCH {
            let child_pos = pos * TREE_BRANCH + c;
            if child_pos < n {
                targets.push(index_at_position[child_pos]);
            }
        }

        if idx == 0 {
            // forced entries: both classes among the seed's children
            for forced in [1, 2, 3, 4] {
                if forced < n_rel {
                    targets.push(forced);
                }
            }
            for forced in [n_rel, n_rel + 1] {
                if forced < n {
                    targets.push(forced);
                }
            }
        } else if is_relevant(idx) {
            for j in 1..n_rel {
                if j != idx && rng.gen::<f64>() < params.intra_cluster_link_prob {
                    targets.push(j);
                }
            }
        } else {
            if n_rel > 0 && rng.gen::<f64>() < params.cross_link_prob {
                let target = if n_rel > 1 { rng.gen_range(1..n_rel) } else { 0 };
                targets.push(target);
            }
            // noise links among irrelevant pages, sized to match the
            // cluster's link density so raw in-degree carries no class
            // signal and discovery order alone cannot find the cluster
            let noise_degree =
                (params.intra_cluster_link_prob * n_rel.saturating_sub(1) as f64).round() as usize;
            if n > n_rel + 1 {
                for _ in 0..noise_degree {
                    let target = rng.gen_range(n_rel..n);
                    if target != idx {
                        targets.push(target);
                    }
                }
            }
        }

        // dedup, then shuffle so document order carries no class signal
        let mut seen = std::collections::HashSet::new();
        targets.retain(|t| *t != idx && seen.insert(*t));
        targets.shuffle(&mut rng);

        let html = render_page(idx, is_relevant(idx), &targets, n_rel, &mut rng);
        let url = synth_url(idx);
        pages.insert(
            url.clone(),
            PageRecord {
                url,
                html: html.into_bytes(),
                latency_ms: params.latency_ms,
                label: Some(is_relevant(idx)),
            },
        );
    }

    Ok(GraphSnapshot {
        format_version: FORMAT_VERSION,
        topic_query: QUERY_TOKENS.iter().map(|s| s.to_string()).collect(),
        pages,
        seeds: vec![synth_url(0)],
    })
}

fn pick<'a>(rng: &mut ChaCha8Rng, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

fn render_page(
    idx: usize,
    relevant: bool,
    targets: &[usize],
    n_rel: usize,
    rng: &mut ChaCha8Rng,
) -> String {
    let title = if relevant {
        format!("Quantum Entanglement Research Node {idx}")
    } else {
        format!(
            "{} {} Journal {idx}",
            pick(rng, &IRR_WORDS),
            pick(rng, &IRR_WORDS)
        )
    };

    let mut body = String::new();
    if relevant {
        body.push_str("quantum entanglement research ");
        for _ in 0..8 {
            body.push_str(pick(rng, &REL_WORDS));
            body.push(' ');
        }
    } else {
        for _ in 0..10 {
            body.push_str(pick(rng, &IRR_WORDS));
            body.push(' ');
        }
    }
    for _ in 0..2 {
        body.push_str(pick(rng, &NEUTRAL_WORDS));
        body.push(' ');
    }

    let mut items = String::new();
    for &t in targets {
        let (anchor, tail) = if t < n_rel {
            (
                format!(
                    "{} {} {}",
                    pick(rng, &QUERY_TOKENS),
                    pick(rng, &QUERY_TOKENS),
                    pick(rng, &REL_WORDS)
                ),
                format!("{} {}", pick(rng, &QUERY_TOKENS), pick(rng, &REL_WORDS)),
            )
        } else {
            (
                format!("{} {}", pick(rng, &IRR_WORDS), pick(rng, &IRR_WORDS)),
                format!("{} {}", pick(rng, &IRR_WORDS), pick(rng, &IRR_WORDS)),
            )
        };
        items.push_str(&format!(
            "<li><a href=\"{}\">{}</a> {}</li>\n",
            synth_href(t),
            anchor,
            tail
        ));
    }

    let mut closing = String::new();
    let pool: &[&str] = if relevant { &REL_WORDS } else { &IRR_WORDS };
    for _ in 0..4 {
        closing.push_str(pick(rng, pool));
        closing.push(' ');
    }

    format!(
        "<html><head><title>{title}</title></head>\n<body>\n<h1>{title}</h1>\n<p>{body}</p>\n<ul>\n{items}</ul>\n<p>{closing}</p>\n</body></html>\n"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extract::parse_links;
    use std::collections::{HashSet, VecDeque};

    fn tiny_snapshot() -> GraphSnapshot {
        let url = "https://e.com/only".to_string();
        let mut pages = BTreeMap::new();
        pages.insert(
            url.clone(),
            PageRecord {
                url: url.clone(),
                html: b"<html>one</html>".to_vec(),
                latency_ms: 3600,
                label: Some(true),
            },
        );
        GraphSnapshot {
            format_version: FORMAT_VERSION,
            topic_query: vec!["one".to_string()],
            pages,
            seeds: vec![url],
        }
    }

    #[test]
    fn sim_fetch_advances_clock_by_latency() {
        let snap = tiny_snapshot();
        let mut clock = VirtualClock::new();
        sim_fetch(&snap, "https://e.com/only", &mut clock, 0).unwrap();
        assert_eq!(clock.now_ms(), 3600);
    }

    #[test]
    fn sim_fetch_miss_leaves_clock_alone_by_default() {
        let snap = tiny_snapshot();
        let mut clock = VirtualClock::new();
        let err = sim_fetch(&snap, "https://e.com/absent", &mut clock, 0);
        assert!(matches!(err, Err(Error::NotFound(_))));
        assert_eq!(clock.now_ms(), 0);
    }

    #[test]
    fn thousand_fetches_at_uniform_latency() {
        let snap = tiny_snapshot();
        let mut clock = VirtualClock::new();
        for _ in 0..1000 {
            sim_fetch(&snap, "https://e.com/only", &mut clock, 0).unwrap();
        }
        assert_eq!(clock.now_ms(), 3_600_000);
    }

    #[test]
    fn save_load_roundtrip_is_byte_identical() {
        let snap = synth_graph(&SynthParams {
            n_pages: 100,
            ..SynthParams::default()
        })
        .unwrap();
        let bytes = snap.to_bytes();
        let reloaded = parse_snapshot(std::str::from_utf8(&bytes).unwrap()).unwrap();
        assert_eq!(reloaded.to_bytes(), bytes);
    }

    #[test]
    fn empty_pages_snapshot_is_header_only() {
        let snap = GraphSnapshot {
            format_version: FORMAT_VERSION,
            topic_query: vec!["x".to_string()],
            pages: BTreeMap::new(),
            seeds: vec![],
        };
        let text = String::from_utf8(snap.to_bytes()).unwrap();
        assert_eq!(text.lines().count(), 1);
    }

    #[test]
    fn one_page_snapshot_is_two_lines() {
        let text = String::from_utf8(tiny_snapshot().to_bytes()).unwrap();
        assert_eq!(text.lines().count(), 2);
    }

    #[test]
    fn load_rejects_duplicate_urls() {
        let snap = tiny_snapshot();
        let mut text = String::from_utf8(snap.to_bytes()).unwrap();
        let record_line = text.lines().nth(1).unwrap().to_string();
        text.push_str(&record_line);
        text.push('\n');
        assert!(matches!(parse_snapshot(&text), Err(Error::DuplicateUrl(_))));
    }

    #[test]
    fn load_rejects_missing_seed() {
        let text = r#"{"format_version":1,"topic_query":"x","seeds":["https://e.com/gone"]}"#;
        assert!(matches!(parse_snapshot(text), Err(Error::MissingSeed(_))));
    }

    #[test]
    fn load_reports_line_numbers() {
        let text = "{\"format_version\":1,\"topic_query\":\"x\",\"seeds\":[]}\nnot json\n";
        match parse_snapshot(text) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("expected parse error, got {other:?}"),
        }
    }

    #[test]
    fn minimal_load_case() {
        let snap = tiny_snapshot();
        let text = String::from_utf8(snap.to_bytes()).unwrap();
        let loaded = parse_snapshot(&text).unwrap();
        assert_eq!(loaded.pages.len(), 1);
        assert_eq!(loaded.seeds.len(), 1);
    }

    #[test]
    fn synth_single_relevant_page_has_no_links() {
        let snap = synth_graph(&SynthParams {
            n_pages: 1,
            relevant_fraction: 1.0,
            ..SynthParams::default()
        })
        .unwrap();
        assert_eq!(snap.pages.len(), 1);
        let page = snap.pages.values().next().unwrap();
        assert_eq!(page.label, Some(true));
        assert!(parse_links(&page.html, &page.url, 8, 0).is_empty());
        assert_eq!(snap.seeds[0], page.url);
    }

    #[test]
    fn synth_is_deterministic() {
        let params = SynthParams {
            n_pages: 200,
            ..SynthParams::default()
        };
        let a = synth_graph(&params).unwrap();
        let b = synth_graph(&params).unwrap();
        assert_eq!(a.to_bytes(), b.to_bytes());
    }

    #[test]
    fn synth_label_count_is_exact() {
        let snap = synth_graph(&SynthParams {
            rng_seed: 42,
            n_pages: 1000,
            relevant_fraction: 0.2,
            ..SynthParams::default()
        })
        .unwrap();
        assert_eq!(snap.labeled_relevant(), 200);
    }

    #[test]
    fn synth_rejects_bad_params() {
        assert!(synth_graph(&SynthParams {
            n_pages: 0,
            ..SynthParams::default()
        })
        .is_err());
        assert!(synth_graph(&SynthParams {
            relevant_fraction: 1.5,
            ..SynthParams::default()
        })
        .is_err());
    }

    #[test]
    fn synth_every_page_reachable_from_seed() {
        // independent traversal over parsed links
        let snap = synth_graph(&SynthParams {
            n_pages: 300,
            ..SynthParams::default()
        })
        .unwrap();
        let mut seen: HashSet<String> = HashSet::new();
        let mut queue: VecDeque<String> = VecDeque::new();
        seen.insert(snap.seeds[0].clone());
        queue.push_back(snap.seeds[0].clone());
        while let Some(url) = queue.pop_front() {
            let page = &snap.pages[&url];
            for link in parse_links(&page.html, &url, 8, 0) {
                if snap.pages.contains_key(&link.target) && seen.insert(link.target.clone()) {
                    queue.push_back(link.target);
                }
            }
        }
        assert_eq!(seen.len(), snap.pages.len());
    }

    #[test]
    fn synth_anchors_into_cluster_carry_query_terms() {
        let snap = synth_graph(&SynthParams {
            n_pages: 120,
            relevant_fraction: 0.25,
            ..SynthParams::default()
        })
        .unwrap();
        let query: HashSet<&str> = QUERY_TOKENS.iter().copied().collect();
        for page in snap.pages.values() {
            for link in parse_links(&page.html, &page.url, 8, 0) {
                if snap.pages[&link.target].label == Some(true) && link.target != snap.seeds[0] {
                    assert!(
                        link.anchor_text.iter().any(|t| query.contains(t.as_str())),
                        "link {} -> {} lacks query terms in anchor",
                        page.url,
                        link.target
                    );
                }
            }
        }
    }

    #[test]
    fn checksums_are_collision_free_on_synth_corpus() {
        let snap = synth_graph(&SynthParams {
            n_pages: 1000,
            ..SynthParams::default()
        })
        .unwrap();
        let mut seen = HashSet::new();
        for page in snap.pages.values() {
            assert!(
                seen.insert(content_checksum(&page.html)),
                "digest collision at {}",
                page.url
            );
        }
    }

    #[test]
    fn clock_is_monotone() {
        let snap = tiny_snapshot();
        let mut clock = VirtualClock::new();
        let mut last = 0;
        for url in ["https://e.com/only", "https://e.com/missing", "https://e.com/only"] {
            let _ = sim_fetch(&snap, url, &mut clock, 7);
            assert!(clock.now_ms() >= last);
            last = clock.now_ms();
        }
    }
}
