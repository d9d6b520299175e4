//! Polite HTTP client used only to build snapshots. Measured benchmark
//! paths never touch this module — bench commands accept snapshot files
//! exclusively.
//!
//! Same-host requests are serialized and separated by at least
//! `per_host_delay_ms`, whatever the caller's scheduling looks like; the
//! pacer is process-global.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};
use std::time::{Duration, Instant};

use crate::error::{Error, Result};

/// Env var that overrides the configured user agent.
pub const UA_ENV_VAR: &str = "FRONTIER_BENCH_UA";

pub const DEFAULT_USER_AGENT: &str = "frontier-bench/0.1 (snapshot ingester)";
pub const DEFAULT_PER_HOST_DELAY_MS: u64 = 1000;
pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;
pub const DEFAULT_MAX_RETRIES: u32 = 2;

#[derive(Debug, Clone)]
pub struct FetchPolicy {
    pub user_agent: String,
    pub per_host_delay_ms: u64,
    pub timeout_ms: u64,
    pub max_retries: u32,
    pub obey_robots: bool,
}

impl Default for FetchPolicy {
    fn default() -> FetchPolicy {
        FetchPolicy {
            user_agent: std::env::var(UA_ENV_VAR)
                .unwrap_or_else(|_| DEFAULT_USER_AGENT.to_string()),
            per_host_delay_ms: DEFAULT_PER_HOST_DELAY_MS,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            max_retries: DEFAULT_MAX_RETRIES,
            obey_robots: true,
        }
    }
}

impl FetchPolicy {
    pub fn validate(&self) -> Result<()> {
        if self.timeout_ms == 0 {
            return Err(Error::InvalidParam("timeout_ms must be > 0".to_string()));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Per-host pacing
// ---------------------------------------------------------------------------

fn pacer() -> &'static Mutex<HashMap<String, Instant>> {
    static PACER: OnceLock<Mutex<HashMap<String, Instant>>> = OnceLock::new();
    PACER.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Block until this host's delay window has elapsed since its last request
/// completed, then reserve the slot.
fn pace_host(host: &str, delay_ms: u64) {
    if delay_ms == 0 {
        return;
    }
    loop {
        let wait = {
            let map = pacer().lock().unwrap();
            match map.get(host) {
                Some(last) => {
                    let ready = *last + Duration::from_millis(delay_ms);
                    ready.checked_duration_since(Instant::now())
                }
                None => None,
            }
        };
        match wait {
            Some(d) if !d.is_zero() => std::thread::sleep(d),
            _ => break,
        }
    }
}

fn mark_host(host: &str) {
    pacer()
        .lock()
        .unwrap()
        .insert(host.to_string(), Instant::now());
}

fn http_client() -> &'static reqwest::blocking::Client {
    static CLIENT: OnceLock<reqwest::blocking::Client> = OnceLock::new();
    CLIENT.get_or_init(|| {
        reqwest::blocking::Client::builder()
            .redirect(reqwest::redirect::Policy::limited(5))
            .build()
            .expect("http client")
    })
}

/// HTTP GET with per-host pacing, timeout, and bounded retries. Returns the
/// status code, body bytes, and measured elapsed milliseconds. Non-200
/// statuses are returned, not raised; the ingester decides what to skip.
pub fn fetch(url: &str, policy: &FetchPolicy) -> Result<(u16, Vec<u8>, u64)> {
    policy.validate()?;
    let parsed = url::Url::parse(url)
        .map_err(|e| Error::Fetch { url: url.to_string(), reason: e.to_string() })?;
    if parsed.scheme() != "http" && parsed.scheme() != "https" {
        return Err(Error::Fetch {
            url: url.to_string(),
            reason: format!("unsupported scheme {}", parsed.scheme()),
        });
    }
    // pacing key is the authority: one server, one lane
    let host = match parsed.port() {
        Some(p) => format!("{}:{p}", parsed.host_str().unwrap_or("")),
        None => parsed.host_str().unwrap_or("").to_string(),
    };

    let mut last_err = String::new();
    for _attempt in 0..=policy.max_retries {
        pace_host(&host, policy.per_host_delay_ms);
        let start = Instant::now();
        let result = http_client()
            .get(url)
            .timeout(Duration::from_millis(policy.timeout_ms))
            .header(reqwest::header::USER_AGENT, &policy.user_agent)
            .send()
            .and_then(|resp| {
                let status = resp.status().as_u16();
                resp.bytes().map(|b| (status, b.to_vec()))
            });
        mark_host(&host);
        match result {
            Ok((status, body)) => {
                let elapsed_ms = start.elapsed().as_millis() as u64;
                return Ok((status, body, elapsed_ms));
            }
            Err(e) => last_err = e.to_string(),
        }
    }
    Err(Error::Fetch {
        url: url.to_string(),
        reason: format!("{last_err} (after {} retries)", policy.max_retries),
    })
}

// ---------------------------------------------------------------------------
// Robots exclusion
// ---------------------------------------------------------------------------

/// Evaluate a robots.txt body for one URL: pick the most specific matching
/// agent group ("*" as fallback), then apply the longest-match path rule,
/// with Allow winning length ties. An empty or unreadable file allows
/// everything; unparseable lines are ignored.
pub fn robots_allowed(url: &str, robots_body: &[u8], user_agent: &str) -> bool {
    let path = match url::Url::parse(url) {
        Ok(u) => u.path().to_string(),
        Err(_) => return false,
    };

    struct Group {
        agents: Vec<String>,
        rules: Vec<(bool, String)>, // (is_allow, path prefix)
    }

    let text = String::from_utf8_lossy(robots_body);
    let mut groups: Vec<Group> = Vec::new();
    let mut current: Option<Group> = None;
    let mut collecting_agents = false;

    for raw_line in text.lines() {
        let line = raw_line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once(':') else {
            continue;
        };
        let key = key.trim().to_ascii_lowercase();
        let value = value.trim().to_string();
        match key.as_str() {
            "user-agent" => {
                if collecting_agents {
                    if let Some(g) = &mut current {
                        g.agents.push(value.to_ascii_lowercase());
                    }
                } else {
                    if let Some(g) = current.take() {
                        groups.push(g);
                    }
                    current = Some(Group {
                        agents: vec![value.to_ascii_lowercase()],
                        rules: Vec::new(),
                    });
                    collecting_agents = true;
                }
            }
            "disallow" | "allow" => {
                collecting_agents = false;
                if current.is_none() {
                    // rules before any user-agent line apply to everyone
                    current = Some(Group {
                        agents: vec!["*".to_string()],
                        rules: Vec::new(),
                    });
                }
                if let Some(g) = &mut current {
                    g.rules.push((key == "allow", value));
                }
            }
            _ => {
                collecting_agents = false;
            }
        }
    }
    if let Some(g) = current.take() {
        groups.push(g);
    }

    // most specific agent match: longest agent token contained in our UA;
    // "*" matches everything with the lowest specificity
    let ua = user_agent.to_ascii_lowercase();
    let mut selected: Option<(&Group, usize)> = None;
    for group in &groups {
        for agent in &group.agents {
            let specificity = if agent == "*" {
                Some(0)
            } else if !agent.is_empty() && ua.contains(agent.as_str()) {
                Some(agent.len())
            } else {
                None
            };
            if let Some(s) = specificity {
                if selected.as_ref().is_none_or(|(_, best)| s > *best) {
                    selected = Some((group, s));
                }
            }
        }
    }
    let Some((group, _)) = selected else {
        return true;
    };

    // longest-match path rule; Allow wins ties; empty Disallow means allow
    let mut best: Option<(usize, bool)> = None;
    for (is_allow, prefix) in &group.rules {
        if prefix.is_empty() {
            continue;
        }
        if path.starts_with(prefix.as_str()) {
            let len = prefix.len();
            let better = match best {
                None => true,
                Some((best_len, best_allow)) => {
                    len > best_len || (len == best_len && *is_allow && !best_allow)
                }
            };
            if better {
                best = Some((len, *is_allow));
            }
        }
    }
    match best {
        Some((_, is_allow)) => is_allow,
        None => true,
    }
}
