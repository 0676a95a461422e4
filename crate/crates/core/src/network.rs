//! Static description of lossy packet networks.
//!
//! A wireline network is a directed graph whose arcs (i, j) carry the
//! long-run reception rate z_ij in packets per unit time. A wireless network
//! is a directed hypergraph: each hyperarc (i, J) broadcasts from i to the
//! tail set J, and every injection is received by a random subset K of J;
//! the map K -> z_iJK gives the long-run rate of receptions by exactly the
//! set K. Rates are exact rationals so that capacity computations downstream
//! can be exact.
//!
//! The text format is line-oriented; statements may also be separated by
//! `;`. `#` starts a comment. Statements:
//!
//! ```text
//! node <label>
//! arc <head> <tail> <rate>
//! hyperarc <head> {<labels>} {<labels>}=<rate> [{<labels>}=<rate> ...]
//! ```
//!
//! Nodes must be declared before they are referenced. Rates are decimal
//! literals (`2.5`); the canonical serializer emits the same format and
//! round-trips through the parser.

use crate::rate::{format_rate, parse_rate, Rate};
use num_traits::Signed;
use std::collections::BTreeMap;
use std::fmt::Write as _;
use thiserror::Error;

/// Dense node index; labels live in the owning [`Network`].
pub type NodeId = usize;

/// Maximum tail-set size, so reception subsets fit a u16 bitmask.
pub const MAX_TAIL_SET: usize = 16;

/// Wireline arc (i, j) with reception rate z_ij. `head` transmits, `tail`
/// receives.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arc {
    pub head: NodeId,
    pub tail: NodeId,
    pub z: Rate,
}

/// Wireless hyperarc (i, J) with one reception rate per non-empty K <= J.
///
/// Reception sets are stored as bitmasks over positions in `tail_set`,
/// which is sorted by node id.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hyperarc {
    pub head: NodeId,
    pub tail_set: Vec<NodeId>,
    pub receptions: BTreeMap<u16, Rate>,
}

impl Hyperarc {
    /// Position of `node` within the tail set, if present.
    pub fn tail_position(&self, node: NodeId) -> Option<usize> {
        self.tail_set.iter().position(|&n| n == node)
    }

    /// Nodes selected by a reception bitmask, in tail-set order.
    pub fn nodes_of_mask(&self, mask: u16) -> Vec<NodeId> {
        self.tail_set
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, &n)| n)
            .collect()
    }

    /// Total declared reception rate, summed over reception sets.
    pub fn total_rate(&self) -> Rate {
        let mut acc = Rate::from_integer(0.into());
        for z in self.receptions.values() {
            acc += z;
        }
        acc
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NetworkKind {
    Wireline,
    Wireless,
}

/// An immutable, validated network.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    labels: Vec<String>,
    index: BTreeMap<String, NodeId>,
    kind: NetworkKind,
    arcs: Vec<Arc>,
    hyperarcs: Vec<Hyperarc>,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum NetworkError {
    #[error("line {line}: syntax error: {msg}")]
    Syntax { line: usize, msg: String },
    #[error("line {line}: validation error: {msg}")]
    Validation { line: usize, msg: String },
    #[error("network is already wireless")]
    AlreadyWireless,
    #[error("unknown node {0:?}")]
    UnknownNode(String),
}

fn syntax(line: usize, msg: impl Into<String>) -> NetworkError {
    NetworkError::Syntax { line, msg: msg.into() }
}

fn validation(line: usize, msg: impl Into<String>) -> NetworkError {
    NetworkError::Validation { line, msg: msg.into() }
}

/// One token of a statement: a word, `{`, `}`, or `=`.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Token {
    Word(String),
    Open,
    Close,
    Equals,
}

/// Splits raw text into (line number, tokens) statements. Statements end at
/// newlines or `;`; `#` comments run to end of line.
fn tokenize(text: &str) -> Result<Vec<(usize, Vec<Token>)>, NetworkError> {
    let mut statements = Vec::new();
    for (lineno, raw_line) in text.lines().enumerate() {
        let line = lineno + 1;
        let content = match raw_line.split_once('#') {
            Some((before, _)) => before,
            None => raw_line,
        };
        for stmt in content.split(';') {
            let mut tokens = Vec::new();
            let mut word = String::new();
            for c in stmt.chars() {
                match c {
                    '{' | '}' | '=' => {
                        if !word.is_empty() {
                            tokens.push(Token::Word(std::mem::take(&mut word)));
                        }
                        tokens.push(match c {
                            '{' => Token::Open,
                            '}' => Token::Close,
                            _ => Token::Equals,
                        });
                    }
                    c if c.is_whitespace() => {
                        if !word.is_empty() {
                            tokens.push(Token::Word(std::mem::take(&mut word)));
                        }
                    }
                    c => word.push(c),
                }
            }
            if !word.is_empty() {
                tokens.push(Token::Word(word));
            }
            if !tokens.is_empty() {
                statements.push((line, tokens));
            }
        }
    }
    Ok(statements)
}

fn expect_word(tokens: &[Token], pos: usize, line: usize, what: &str) -> Result<String, NetworkError> {
    match tokens.get(pos) {
        Some(Token::Word(w)) => Ok(w.clone()),
        _ => Err(syntax(line, format!("expected {what}"))),
    }
}

impl Network {
    /// Parses and validates a network description.
    pub fn parse(text: &str) -> Result<Self, NetworkError> {
        let mut labels: Vec<String> = Vec::new();
        let mut index: BTreeMap<String, NodeId> = BTreeMap::new();
        let mut arcs: Vec<Arc> = Vec::new();
        let mut hyperarcs: Vec<Hyperarc> = Vec::new();

        let lookup = |index: &BTreeMap<String, NodeId>, label: &str, line: usize| {
            index
                .get(label)
                .copied()
                .ok_or_else(|| validation(line, format!("dangling node {label:?} (not declared)")))
        };

        for (line, tokens) in tokenize(text)? {
            let keyword = expect_word(&tokens, 0, line, "a statement keyword")?;
            match keyword.as_str() {
                "node" => {
                    let label = expect_word(&tokens, 1, line, "a node label after `node`")?;
                    if tokens.len() != 2 {
                        return Err(syntax(line, "trailing tokens after node declaration"));
                    }
                    if index.contains_key(&label) {
                        return Err(validation(line, format!("duplicate node {label:?}")));
                    }
                    index.insert(label.clone(), labels.len());
                    labels.push(label);
                }
                "arc" => {
                    let head_label = expect_word(&tokens, 1, line, "an arc head label")?;
                    let tail_label = expect_word(&tokens, 2, line, "an arc tail label")?;
                    let rate_text = expect_word(&tokens, 3, line, "an arc rate")?;
                    if tokens.len() != 4 {
                        return Err(syntax(line, "trailing tokens after arc declaration"));
                    }
                    let head = lookup(&index, &head_label, line)?;
                    let tail = lookup(&index, &tail_label, line)?;
                    if head == tail {
                        return Err(validation(line, "arc head and tail coincide"));
                    }
                    let z = parse_rate(&rate_text)
                        .map_err(|e| syntax(line, format!("bad rate: {e}")))?;
                    if z.is_negative() {
                        return Err(validation(line, format!("negative rate {rate_text}")));
                    }
                    arcs.push(Arc { head, tail, z });
                }
                "hyperarc" => {
                    hyperarcs.push(Self::parse_hyperarc(&tokens, line, &index, &lookup)?);
                }
                other => {
                    return Err(syntax(line, format!("unknown keyword {other:?}")));
                }
            }
        }

        if !arcs.is_empty() && !hyperarcs.is_empty() {
            return Err(validation(
                0,
                "network mixes wireline arcs and wireless hyperarcs",
            ));
        }
        let kind = if hyperarcs.is_empty() {
            NetworkKind::Wireline
        } else {
            NetworkKind::Wireless
        };
        Ok(Network { labels, index, kind, arcs, hyperarcs })
    }

    fn parse_hyperarc(
        tokens: &[Token],
        line: usize,
        index: &BTreeMap<String, NodeId>,
        lookup: &dyn Fn(&BTreeMap<String, NodeId>, &str, usize) -> Result<NodeId, NetworkError>,
    ) -> Result<Hyperarc, NetworkError> {
        let head_label = expect_word(tokens, 1, line, "a hyperarc head label")?;
        let head = lookup(index, &head_label, line)?;

        // Brace groups: first is the tail set J, the rest are `{K}=rate`.
        let mut pos = 2;
        let mut groups: Vec<(Vec<String>, Option<String>)> = Vec::new();
        while pos < tokens.len() {
            if tokens[pos] != Token::Open {
                return Err(syntax(line, "expected `{` opening a node set"));
            }
            pos += 1;
            let mut members = Vec::new();
            loop {
                match tokens.get(pos) {
                    Some(Token::Word(w)) => {
                        members.push(w.clone());
                        pos += 1;
                    }
                    Some(Token::Close) => {
                        pos += 1;
                        break;
                    }
                    _ => return Err(syntax(line, "unterminated node set")),
                }
            }
            if tokens.get(pos) == Some(&Token::Equals) {
                pos += 1;
                let rate = expect_word(tokens, pos, line, "a rate after `=`")?;
                pos += 1;
                groups.push((members, Some(rate)));
            } else {
                groups.push((members, None));
            }
        }
        if groups.len() < 2 {
            return Err(syntax(
                line,
                "hyperarc needs a tail set and at least one reception set",
            ));
        }
        let (tail_labels, tail_rate) = &groups[0];
        if tail_rate.is_some() {
            return Err(syntax(line, "tail set must not carry a rate"));
        }
        if tail_labels.is_empty() {
            return Err(validation(line, "empty hyperarc tail set"));
        }
        let mut tail_set: Vec<NodeId> = Vec::new();
        for l in tail_labels {
            let id = lookup(index, l, line)?;
            if id == head {
                return Err(validation(line, "hyperarc head appears in its tail set"));
            }
            if tail_set.contains(&id) {
                return Err(validation(line, format!("duplicate tail node {l:?}")));
            }
            tail_set.push(id);
        }
        if tail_set.len() > MAX_TAIL_SET {
            return Err(validation(
                line,
                format!("tail set exceeds {MAX_TAIL_SET} nodes"),
            ));
        }
        tail_set.sort_unstable();

        let mut receptions = BTreeMap::new();
        for (members, rate_text) in &groups[1..] {
            let rate_text = rate_text
                .as_ref()
                .ok_or_else(|| syntax(line, "reception set missing `=rate`"))?;
            if members.is_empty() {
                return Err(validation(line, "empty reception set"));
            }
            let mut mask: u16 = 0;
            for l in members {
                let id = lookup(index, l, line)?;
                let p = tail_set.iter().position(|&n| n == id).ok_or_else(|| {
                    validation(line, format!("reception node {l:?} outside the tail set"))
                })?;
                mask |= 1 << p;
            }
            if receptions.contains_key(&mask) {
                return Err(validation(line, "duplicate reception set"));
            }
            let z = parse_rate(rate_text)
                .map_err(|e| syntax(line, format!("bad rate: {e}")))?;
            if z.is_negative() {
                return Err(validation(line, format!("negative rate {rate_text}")));
            }
            receptions.insert(mask, z);
        }
        Ok(Hyperarc { head, tail_set, receptions })
    }

    /// Canonical text form; parsing it back reproduces `self` exactly.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for label in &self.labels {
            let _ = writeln!(out, "node {label}");
        }
        for arc in &self.arcs {
            let _ = writeln!(
                out,
                "arc {} {} {}",
                self.labels[arc.head],
                self.labels[arc.tail],
                format_rate(&arc.z)
            );
        }
        for ha in &self.hyperarcs {
            let _ = write!(out, "hyperarc {} {{", self.labels[ha.head]);
            let _ = write!(
                out,
                "{}",
                ha.tail_set
                    .iter()
                    .map(|&n| self.labels[n].as_str())
                    .collect::<Vec<_>>()
                    .join(" ")
            );
            let _ = write!(out, "}}");
            for (mask, z) in &ha.receptions {
                let members = ha
                    .nodes_of_mask(*mask)
                    .into_iter()
                    .map(|n| self.labels[n].as_str().to_string())
                    .collect::<Vec<_>>()
                    .join(" ");
                let _ = write!(out, " {{{members}}}={}", format_rate(z));
            }
            let _ = writeln!(out);
        }
        out
    }

    /// Recasts a wireline network as the equivalent wireless one: each arc
    /// (i, j) becomes the hyperarc (i, {j}) with the whole rate on reception
    /// set {j}. Capacities are unchanged.
    pub fn wireline_as_wireless(&self) -> Result<Network, NetworkError> {
        if self.kind == NetworkKind::Wireless {
            return Err(NetworkError::AlreadyWireless);
        }
        let hyperarcs = self
            .arcs
            .iter()
            .map(|arc| Hyperarc {
                head: arc.head,
                tail_set: vec![arc.tail],
                receptions: BTreeMap::from([(1u16, arc.z.clone())]),
            })
            .collect();
        Ok(Network {
            labels: self.labels.clone(),
            index: self.index.clone(),
            kind: NetworkKind::Wireless,
            arcs: Vec::new(),
            hyperarcs,
        })
    }

    /// The network in wireless form regardless of its kind.
    pub fn as_wireless(&self) -> Network {
        match self.kind {
            NetworkKind::Wireless => self.clone(),
            NetworkKind::Wireline => self.wireline_as_wireless().expect("wireline input"),
        }
    }

    pub fn kind(&self) -> NetworkKind {
        self.kind
    }

    pub fn node_count(&self) -> usize {
        self.labels.len()
    }

    pub fn arcs(&self) -> &[Arc] {
        &self.arcs
    }

    pub fn hyperarcs(&self) -> &[Hyperarc] {
        &self.hyperarcs
    }

    pub fn node_id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    /// Like [`Network::node_id`] but with a descriptive error.
    pub fn require_node(&self, label: &str) -> Result<NodeId, NetworkError> {
        self.node_id(label)
            .ok_or_else(|| NetworkError::UnknownNode(label.to_string()))
    }

    pub fn label(&self, id: NodeId) -> &str {
        &self.labels[id]
    }

    /// Builds a network programmatically. Used by tests and generators;
    /// validates the same invariants as the parser.
    pub fn from_parts(
        labels: Vec<String>,
        arcs: Vec<Arc>,
        hyperarcs: Vec<Hyperarc>,
    ) -> Result<Network, NetworkError> {
        let mut text = String::new();
        for l in &labels {
            let _ = writeln!(text, "node {l}");
        }
        let tmp = Network {
            index: labels
                .iter()
                .enumerate()
                .map(|(i, l)| (l.clone(), i))
                .collect(),
            labels,
            kind: if hyperarcs.is_empty() {
                NetworkKind::Wireline
            } else {
                NetworkKind::Wireless
            },
            arcs,
            hyperarcs,
        };
        // Round-trip through the parser so every invariant is enforced in one
        // place.
        Network::parse(&tmp.serialize())
    }
}
