//! HTML text extraction, outlink harvesting, URL resolution, and content
//! checksums.
//!
//! Everything in here is a pure function. The HTML scanner is deliberately
//! lenient: malformed markup never fails, unparseable regions are skipped.

use crate::error::{Error, Result};
use crate::stopwords::is_stopword;
use url::Url;

/// An extracted outlink: the resolved target plus the link's textual
/// evidence (anchor tokens and a window of surrounding flow tokens).
#[derive(Debug, Clone, PartialEq)]
pub struct LinkCandidate {
    pub target: String,
    pub anchor_text: Vec<String>,
    pub context: Vec<String>,
    pub source: String,
    pub depth: u32,
}

/// A fetched page reduced to its token stream and content digest.
#[derive(Debug, Clone)]
pub struct Document {
    pub url: String,
    pub tokens: Vec<String>,
    pub checksum: u64,
}

impl Document {
    pub fn from_html(url: &str, html: &[u8]) -> Document {
        Document {
            url: url.to_string(),
            tokens: normalize_text(html),
            checksum: content_checksum(html),
        }
    }
}

/// Default number of context tokens captured on each side of an anchor.
pub const DEFAULT_CONTEXT_WINDOW: usize = 8;

// ---------------------------------------------------------------------------
// URL resolution
// ---------------------------------------------------------------------------

/// Normalize an absolute http(s) URL: lowercase scheme/host, strip default
/// port, drop the fragment, "/" for an empty path. Returns `None` for
/// anything that is not an absolute http(s) URL.
pub fn normalize_url(raw: &str) -> Option<String> {
    let mut url = Url::parse(raw.trim()).ok()?;
    if url.scheme() != "http" && url.scheme() != "https" {
        return None;
    }
    url.host_str()?;
    url.set_fragment(None);
    Some(url.to_string())
}

/// Resolve a raw href against a normalized absolute base URL.
///
/// Absolute http(s) hrefs pass through (normalized). Root-relative hrefs
/// ("/wiki/B", but not protocol-relative "//host/x") resolve against the
/// base's scheme and authority. Everything else — fragments, mailto:,
/// javascript:, relative paths without a leading "/" — yields `None`.
pub fn resolve_url(base: &str, href: &str) -> Option<String> {
    let href = href.trim();
    if href.is_empty() || href.starts_with('#') {
        return None;
    }
    let scheme_prefix = href.get(..8).unwrap_or(href).to_ascii_lowercase();
    if scheme_prefix.starts_with("http://") || scheme_prefix.starts_with("https://") {
        return normalize_url(href);
    }
    if href.starts_with('/') && !href.starts_with("//") {
        let base = Url::parse(base).ok()?;
        let joined = base.join(href).ok()?;
        return normalize_url(joined.as_str());
    }
    None
}

// ---------------------------------------------------------------------------
// Tokenization
// ---------------------------------------------------------------------------

/// Tokenize plain text: every maximal run of non-ASCII-alphabetic bytes is a
/// separator, tokens are lowercased, stop-words dropped.
fn tokenize(text: &str) -> Vec<String> {
    let mut tokens = Vec::new();
    let mut cur = String::new();
    for ch in text.chars() {
        if ch.is_ascii_alphabetic() {
            cur.push(ch.to_ascii_lowercase());
        } else if !cur.is_empty() {
            if !is_stopword(&cur) {
                tokens.push(std::mem::take(&mut cur));
            } else {
                cur.clear();
            }
        }
    }
    if !cur.is_empty() && !is_stopword(&cur) {
        tokens.push(cur);
    }
    tokens
}

/// Strip markup from HTML bytes and tokenize the remaining text flow.
pub fn normalize_text(html: &[u8]) -> Vec<String> {
    let mut flow = Vec::new();
    scan_html(html, |event| {
        if let ScanEvent::Text(t) = event {
            flow.extend(tokenize(t));
        }
    });
    flow
}

/// Extract one candidate per anchor element whose href resolves, in document
/// order. `anchor_text` holds the normalized tokens inside the element;
/// `context` holds up to `context_window` normalized tokens on each side of
/// the anchor in the page's text flow.
pub fn parse_links(
    html: &[u8],
    base: &str,
    context_window: usize,
    source_depth: u32,
) -> Vec<LinkCandidate> {
    struct Anchor {
        href: String,
        start: usize,
        end: usize,
    }
    let mut flow: Vec<String> = Vec::new();
    let mut anchors: Vec<Anchor> = Vec::new();
    let mut open: Option<Anchor> = None;

    scan_html(html, |event| match event {
        ScanEvent::Text(t) => flow.extend(tokenize(t)),
        ScanEvent::AnchorOpen(href) => {
            // nested <a> is invalid HTML; close the previous one leniently
            if let Some(mut a) = open.take() {
                a.end = flow.len();
                anchors.push(a);
            }
            open = Some(Anchor {
                href,
                start: flow.len(),
                end: flow.len(),
            });
        }
        ScanEvent::AnchorClose => {
            if let Some(mut a) = open.take() {
                a.end = flow.len();
                anchors.push(a);
            }
        }
    });
    if let Some(mut a) = open.take() {
        a.end = flow.len();
        anchors.push(a);
    }

    anchors
        .into_iter()
        .filter_map(|a| {
            let target = resolve_url(base, &a.href)?;
            let before_start = a.start.saturating_sub(context_window);
            let after_end = (a.end + context_window).min(flow.len());
            let mut context = Vec::with_capacity(context_window * 2);
            context.extend_from_slice(&flow[before_start..a.start]);
            context.extend_from_slice(&flow[a.end..after_end]);
            Some(LinkCandidate {
                target,
                anchor_text: flow[a.start..a.end].to_vec(),
                context,
                source: base.to_string(),
                depth: source_depth + 1,
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Lenient HTML scanner
// ---------------------------------------------------------------------------

enum ScanEvent<'a> {
    Text(&'a str),
    AnchorOpen(String),
    AnchorClose,
}

/// Single-pass scanner over UTF-8(-lossy) HTML. Emits text runs and anchor
/// boundaries. Comments and <script>/<style>/<noscript> bodies are skipped;
/// character entities are treated as separators (the tokenizer discards
/// non-alphabetic runs anyway).
fn scan_html<F: FnMut(ScanEvent)>(html: &[u8], mut emit: F) {
    let text = String::from_utf8_lossy(html);
    let bytes = text.as_bytes();
    let mut i = 0;
    let n = bytes.len();

    while i < n {
        if bytes[i] == b'<' {
            if text[i..].starts_with("<!--") {
                i = match text[i + 4..].find("-->") {
                    Some(p) => i + 4 + p + 3,
                    None => n,
                };
                continue;
            }
            let close = match text[i..].find('>') {
                Some(p) => i + p,
                None => break, // truncated tag at EOF
            };
            let tag = &text[i + 1..close];
            handle_tag(tag, &text, &mut i, close, &mut emit);
        } else {
            let next_tag = text[i..].find('<').map(|p| i + p).unwrap_or(n);
            let run = &text[i..next_tag];
            if !run.trim().is_empty() {
                emit(ScanEvent::Text(run));
            }
            i = next_tag;
        }
    }
}

fn handle_tag<F: FnMut(ScanEvent)>(
    tag: &str,
    text: &str,
    i: &mut usize,
    close: usize,
    emit: &mut F,
) {
    let inner = tag.trim();
    let (name, rest) = split_tag_name(inner);
    let lname = name.to_ascii_lowercase();
    match lname.as_str() {
        "a" => {
            if let Some(href) = find_attr(rest, "href") {
                emit(ScanEvent::AnchorOpen(href));
            } else {
                emit(ScanEvent::AnchorOpen(String::new()));
            }
            *i = close + 1;
        }
        "/a" => {
            emit(ScanEvent::AnchorClose);
            *i = close + 1;
        }
        "script" | "style" | "noscript" => {
            // skip to the matching close tag; at EOF just stop scanning it
            let end_pat = format!("</{lname}");
            let lower_rest = text[close + 1..].to_ascii_lowercase();
            match lower_rest.find(&end_pat) {
                Some(p) => {
                    let after = close + 1 + p;
                    *i = match text[after..].find('>') {
                        Some(q) => after + q + 1,
                        None => text.len(),
                    };
                }
                None => *i = text.len(),
            }
        }
        _ => {
            *i = close + 1;
        }
    }
}

fn split_tag_name(tag: &str) -> (&str, &str) {
    match tag.find(|c: char| c.is_ascii_whitespace()) {
        Some(p) => (&tag[..p], &tag[p..]),
        None => (tag, ""),
    }
}

/// Pull a named attribute value out of a tag body. Handles single/double
/// quoted and bare values.
fn find_attr(attrs: &str, name: &str) -> Option<String> {
    let lower = attrs.to_ascii_lowercase();
    let mut search_from = 0;
    loop {
        let p = lower[search_from..].find(name)? + search_from;
        // must be a standalone attribute name
        let before_ok = p == 0
            || lower.as_bytes()[p - 1].is_ascii_whitespace()
            || lower.as_bytes()[p - 1] == b'"'
            || lower.as_bytes()[p - 1] == b'\'';
        let after = p + name.len();
        let tail = &attrs[after..];
        let tail_trim = tail.trim_start();
        if before_ok && tail_trim.starts_with('=') {
            let val = tail_trim[1..].trim_start();
            let out = if let Some(stripped) = val.strip_prefix('"') {
                stripped.split('"').next().unwrap_or("")
            } else if let Some(stripped) = val.strip_prefix('\'') {
                stripped.split('\'').next().unwrap_or("")
            } else {
                val.split(|c: char| c.is_ascii_whitespace() || c == '>')
                    .next()
                    .unwrap_or("")
            };
            return Some(out.to_string());
        }
        search_from = after;
        if search_from >= lower.len() {
            return None;
        }
    }
}

// ---------------------------------------------------------------------------
// Content checksum
// ---------------------------------------------------------------------------

const FNV64_OFFSET: u64 = 0xcbf29ce484222325;
const FNV64_PRIME: u64 = 0x100000001b3;

/// FNV-1a 64-bit digest of the raw page bytes. Stable across runs and
/// platforms; cheap enough to run on every fetch. Not a cryptographic hash —
/// this exists for duplicate-content detection, nothing more.
pub fn content_checksum(bytes: &[u8]) -> u64 {
    let mut h = FNV64_OFFSET;
    for &b in bytes {
        h ^= b as u64;
        h = h.wrapping_mul(FNV64_PRIME);
    }
    h
}

/// Validate that a snapshot URL string is already in normalized absolute
/// form; returns the normalized form or an error naming the offender.
pub fn require_normalized(url: &str) -> Result<String> {
    match normalize_url(url) {
        Some(n) => Ok(n),
        None => Err(Error::InvalidParam(format!(
            "not an absolute http(s) URL: {url}"
        ))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn resolve_root_relative_against_wiki_base() {
        assert_eq!(
            resolve_url("https://en.wikipedia.org/wiki/A", "/wiki/B"),
            Some("https://en.wikipedia.org/wiki/B".to_string())
        );
    }

    #[test]
    fn resolve_absolute_passthrough() {
        assert_eq!(
            resolve_url("https://base.example/x", "https://example.com/x"),
            Some("https://example.com/x".to_string())
        );
    }

    #[test]
    fn resolve_rejects_fragments_and_schemes() {
        let base = "https://example.com/a";
        assert_eq!(resolve_url(base, "#section"), None);
        assert_eq!(resolve_url(base, "mailto:x@example.com"), None);
        assert_eq!(resolve_url(base, "javascript:void(0)"), None);
        assert_eq!(resolve_url(base, "relative/path"), None);
        assert_eq!(resolve_url(base, "//cdn.example/x"), None);
        assert_eq!(resolve_url(base, "ftp://example.com/f"), None);
    }

    #[test]
    fn resolve_normalizes_case_port_fragment() {
        assert_eq!(
            resolve_url("https://example.com/", "HTTPS://EXAMPLE.com:443/Path#frag"),
            Some("https://example.com/Path".to_string())
        );
        assert_eq!(
            normalize_url("http://Example.com:80"),
            Some("http://example.com/".to_string())
        );
    }

    #[test]
    fn normalize_text_basic() {
        assert_eq!(
            normalize_text(b"<p>Hello, WORLD!</p>"),
            vec!["hello".to_string(), "world".to_string()]
        );
    }

    #[test]
    fn normalize_text_all_stopwords() {
        assert!(normalize_text(b"a the of").is_empty());
    }

    #[test]
    fn normalize_text_skips_script_style_comments() {
        let html = b"<html><script>var ignored = 1;</script><style>p{color:red}</style>\
                     <!-- ignored comment -->body words</html>";
        assert_eq!(normalize_text(html), vec!["body", "words"]);
    }

    // Independent oracle for the fixture: strip tags by hand (no shared code
    // with the scanner), then apply the same token rules.
    #[test]
    fn normalize_text_matches_manual_strip_on_fixture() {
        let html = br#"<html><head><title>Solar Sailing</title></head>
<body><h1>Solar sailing craft</h1>
<p>A solar sail uses radiation pressure, exerted by sunlight, on large mirrors.</p>
<p>See the <a href="/wiki/Spacecraft">spacecraft</a> article.</p>
</body></html>"#;
        // Hand-derived: tags removed, non-alphabetic runs split, lowercased,
        // stop-words ("a", "by", "on", "see", "the") removed.
        let expected = vec![
            "solar", "sailing", "solar", "sailing", "craft", "solar", "sail", "uses",
            "radiation", "pressure", "exerted", "sunlight", "large", "mirrors",
            "spacecraft", "article",
        ];
        assert_eq!(normalize_text(html), expected);
    }

    #[test]
    fn parse_links_empty_page() {
        assert!(parse_links(b"<html><body>no links here</body></html>", "https://e.com/", 8, 0).is_empty());
    }

    #[test]
    fn parse_links_skips_unresolvable_keeps_order() {
        let html = br##"<p><a href="/one">first</a> <a href="#x">skip</a> <a href="/three">third</a></p>"##;
        let links = parse_links(html, "https://e.com/base", 8, 0);
        assert_eq!(links.len(), 2);
        assert_eq!(links[0].target, "https://e.com/one");
        assert_eq!(links[1].target, "https://e.com/three");
        assert_eq!(links[0].depth, 1);
    }

    #[test]
    fn parse_links_five_link_fixture() {
        // Hand-enumerated expectation for a fixed fixture page.
        let html = br#"<html><body>
<p>intro words before anything</p>
<ul>
<li><a href="/alpha">alpha page</a> trailing alpha text</li>
<li><a href="https://other.example/beta">beta BETA</a></li>
<li><a href="/gamma#frag">gamma link</a></li>
<li><a href="mailto:x@y.z">mail me</a></li>
<li><a href="/delta">delta</a> closing words</li>
</ul>
</body></html>"#;
        let links = parse_links(html, "https://e.com/page", 3, 2);
        let targets: Vec<&str> = links.iter().map(|l| l.target.as_str()).collect();
        assert_eq!(
            targets,
            vec![
                "https://e.com/alpha",
                "https://other.example/beta",
                "https://e.com/gamma",
                "https://e.com/delta",
            ]
        );
        assert_eq!(links[0].anchor_text, vec!["alpha", "page"]);
        assert_eq!(links[1].anchor_text, vec!["beta", "beta"]);
        // context of the first anchor: 3 tokens each side of the anchor span
        // ("before"/"anything" are stop-words, so the left side is short)
        assert_eq!(
            links[0].context,
            vec!["intro", "words", "trailing", "alpha", "text"]
        );
        assert!(links.iter().all(|l| l.depth == 3));
        assert!(links.iter().all(|l| l.source == "https://e.com/page"));
    }

    #[test]
    fn checksum_regression_values() {
        // FNV-1a 64 published empty-input digest is the offset basis.
        assert_eq!(content_checksum(b""), 0xcbf29ce484222325);
        assert_eq!(content_checksum(b"abc"), content_checksum(b"abc"));
        assert_ne!(content_checksum(b"abc"), content_checksum(b"abd"));
    }

    proptest! {
        #[test]
        fn resolve_is_idempotent_on_outputs(href in "[a-z/#:.]{0,20}") {
            let base = "https://example.com/dir/page";
            if let Some(once) = resolve_url(base, &href) {
                prop_assert_eq!(resolve_url(base, &once), Some(once));
            }
        }

        #[test]
        fn tokens_are_lowercase_non_stopword(s in "\\PC{0,200}") {
            for t in normalize_text(s.as_bytes()) {
                prop_assert!(t.chars().all(|c| c.is_ascii_lowercase()));
                prop_assert!(!is_stopword(&t));
            }
        }

        #[test]
        fn parse_links_targets_are_normalized(html in "\\PC{0,300}") {
            for l in parse_links(html.as_bytes(), "https://example.com/base", 4, 0) {
                prop_assert_eq!(normalize_url(&l.target), Some(l.target.clone()));
            }
        }
    }
}
