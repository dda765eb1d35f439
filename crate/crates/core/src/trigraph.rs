//! Label trigraphs: the states of a bracket expansion, and open fragments of
//! them used by relation rules.
//!
//! Text format (extends the diagram format):
//!
//! ```text
//! V.k[t1,t2,t3]   vertex of type V.k (k = 1..10), arc ends counterclockwise
//! L[i,t]          boundary leg i of a fragment, attached to arc end t
//! O[spec]         node-free closed loop
//! empty           the empty trigraph
//! ```
//!
//! An arc end token is `[~]N[>|<][@label]`: `~` marks a thin edge, `>`/`<`
//! orient the edge away from / into this node (no suffix: unoriented), and
//! `@label` attaches a label token; `@?x` in a fragment is a label variable.
//! A loop spec is `[~](u|+|-)[@label]` with `u` unoriented and `+`/`-`
//! oriented (a loop alone on the sphere has no chirality, so both mean the
//! same oriented loop).

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{Direction, EdgeDecor, End, EulerData, NodeDecor, NodeId, RotationMap};

/// One of the ten vertex types V.1 to V.10.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct VertexType(u8);

impl VertexType {
    pub fn new(k: u8) -> Result<Self> {
        if (1..=10).contains(&k) {
            Ok(VertexType(k))
        } else {
            Err(Error::UnknownVertexType(format!("V.{k}")))
        }
    }

    pub fn index(self) -> u8 {
        self.0
    }

    pub fn parse(s: &str) -> Result<Self> {
        s.strip_prefix("V.")
            .and_then(|k| k.parse::<u8>().ok())
            .ok_or_else(|| Error::UnknownVertexType(s.to_string()))
            .and_then(VertexType::new)
    }

    /// Types V.9 and V.10 carry no mark.
    pub fn is_marked(self) -> bool {
        self.0 <= 8
    }

    /// Indegree fixed by the vertex taxonomy, where it is fixed at all.
    pub fn required_indegree(self) -> Option<usize> {
        match self.0 {
            5 | 6 | 10 => Some(0),
            7 | 8 | 9 => Some(3),
            _ => None,
        }
    }
}

impl std::fmt::Display for VertexType {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "V.{}", self.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TriNode {
    Vertex(VertexType),
    /// Boundary leg `i` (1-based) of an open fragment.
    Leg(usize),
}

impl NodeDecor for TriNode {
    fn anchored(&self) -> bool {
        matches!(self, TriNode::Leg(_))
    }

    fn code(&self) -> String {
        match self {
            TriNode::Vertex(t) => format!("V{}", t.0),
            TriNode::Leg(i) => format!("L{i}"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EdgeKind {
    Thick,
    Thin,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TriEdge {
    pub kind: EdgeKind,
    pub label: Option<String>,
}

impl TriEdge {
    pub fn thick() -> Self {
        TriEdge {
            kind: EdgeKind::Thick,
            label: None,
        }
    }
}

impl EdgeDecor for TriEdge {
    fn code(&self) -> String {
        let mut s = String::new();
        if self.kind == EdgeKind::Thin {
            s.push('~');
        }
        if let Some(l) = &self.label {
            let _ = write!(s, "@{l}");
        }
        s
    }
}

/// Decoration of a node-free closed loop.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct LoopDecor {
    pub kind: EdgeKind,
    pub oriented: bool,
    pub label: Option<String>,
}

impl LoopDecor {
    pub fn of_edge(edge: &TriEdge, oriented: bool) -> Self {
        LoopDecor {
            kind: edge.kind,
            oriented,
            label: edge.label.clone(),
        }
    }

    fn spec(&self) -> String {
        let mut s = String::new();
        if self.kind == EdgeKind::Thin {
            s.push('~');
        }
        s.push(if self.oriented { '+' } else { 'u' });
        if let Some(l) = &self.label {
            let _ = write!(s, "@{l}");
        }
        s
    }
}

/// Identifies a trigraph up to isomorphism of decorated combinatorial maps.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CanonicalKey(String);

impl CanonicalKey {
    pub fn as_bytes(&self) -> &[u8] {
        self.0.as_bytes()
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

pub type TriMap = RotationMap<TriNode, TriEdge>;
pub type TriParts = Vec<(TriNode, Vec<End<usize, TriEdge>>)>;

/// A (possibly disconnected, possibly open) label trigraph.
#[derive(Clone, Debug, PartialEq)]
pub struct LabelTrigraph {
    map: TriMap,
    loops: BTreeMap<LoopDecor, usize>,
}

impl Default for LabelTrigraph {
    fn default() -> Self {
        Self::empty()
    }
}

impl LabelTrigraph {
    pub fn empty() -> Self {
        LabelTrigraph {
            map: RotationMap::default(),
            loops: BTreeMap::new(),
        }
    }

    pub fn new(map: TriMap, loops: BTreeMap<LoopDecor, usize>) -> Self {
        let loops = loops.into_iter().filter(|(_, c)| *c > 0).collect();
        LabelTrigraph { map, loops }
    }

    pub fn from_parts(parts: TriParts, loops: BTreeMap<LoopDecor, usize>) -> Result<Self> {
        Ok(Self::new(RotationMap::from_ends(parts)?, loops))
    }

    /// Node list with arc keys (the smaller dart id of each edge).
    pub fn to_parts(&self) -> TriParts {
        let m = &self.map;
        (0..m.node_count())
            .map(|n| {
                let ends = m
                    .darts_of(n)
                    .iter()
                    .map(|&d| End {
                        arc: d.min(m.partner(d)),
                        direction: m.dart(d).direction,
                        decor: m.decor(d).clone(),
                    })
                    .collect();
                (*m.node(n), ends)
            })
            .collect()
    }

    pub fn map(&self) -> &TriMap {
        &self.map
    }

    pub fn loops(&self) -> &BTreeMap<LoopDecor, usize> {
        &self.loops
    }

    pub fn loop_count(&self) -> usize {
        self.loops.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.map.node_count() == 0 && self.loops.is_empty()
    }

    /// Leg node of each boundary index, sorted by index.
    pub fn legs(&self) -> BTreeMap<usize, NodeId> {
        (0..self.map.node_count())
            .filter_map(|n| match self.map.node(n) {
                TriNode::Leg(i) => Some((*i, n)),
                _ => None,
            })
            .collect()
    }

    pub fn is_closed(&self) -> bool {
        self.legs().is_empty()
    }

    /// Disjoint union.
    pub fn union(&self, other: &LabelTrigraph) -> LabelTrigraph {
        let mut parts = self.to_parts();
        let offset = self.map.dart_count();
        for (node, ends) in other.to_parts() {
            let ends = ends
                .into_iter()
                .map(|e| End {
                    arc: e.arc + offset,
                    ..e
                })
                .collect();
            parts.push((node, ends));
        }
        let mut loops = self.loops.clone();
        for (k, v) in &other.loops {
            *loops.entry(k.clone()).or_default() += v;
        }
        LabelTrigraph::from_parts(parts, loops).expect("union of valid trigraphs")
    }

    /// Structural checks independent of any rule set: arities, legs, edge
    /// orientation coherence, planarity of every component.
    pub fn check(&self) -> Result<()> {
        let m = &self.map;
        m.check_structure()
            .map_err(|e| Error::InvalidTrigraph(e.to_string()))?;
        let mut legs = Vec::new();
        for n in 0..m.node_count() {
            match m.node(n) {
                TriNode::Vertex(t) if m.arity(n) != 3 => {
                    return Err(Error::InvalidTrigraph(format!(
                        "{t} node {n} has arity {}",
                        m.arity(n)
                    )))
                }
                TriNode::Leg(i) => {
                    if m.arity(n) != 1 {
                        return Err(Error::InvalidTrigraph(format!(
                            "leg {i} has arity {}",
                            m.arity(n)
                        )));
                    }
                    legs.push(*i);
                }
                _ => {}
            }
        }
        legs.sort_unstable();
        if legs.iter().enumerate().any(|(k, &i)| i != k + 1) {
            return Err(Error::InvalidTrigraph(format!(
                "legs must be numbered 1..k, found {legs:?}"
            )));
        }
        for d in 0..m.dart_count() {
            let (a, b) = (m.dart(d).direction, m.dart(m.partner(d)).direction);
            if a != b.reversed() {
                return Err(Error::InvalidTrigraph(format!(
                    "edge at dart {d} has incoherent orientation"
                )));
            }
        }
        if let Some(e) = m.euler().iter().find(|e| e.genus != 0) {
            return Err(Error::InvalidTrigraph(format!(
                "non-planar component (V={}, E={}, F={})",
                e.vertices, e.edges, e.faces
            )));
        }
        Ok(())
    }

    /// Checks of the fixed vertex taxonomy: unmarked vertices meet three
    /// thick edges, marked ones one thin and two thick, and types with a
    /// prescribed indegree have it. Returns human-readable violations.
    pub fn taxonomy_violations(&self) -> Vec<String> {
        let m = &self.map;
        let mut out = Vec::new();
        for n in 0..m.node_count() {
            let TriNode::Vertex(t) = *m.node(n) else {
                continue;
            };
            let darts = m.darts_of(n);
            let thin = darts
                .iter()
                .filter(|&&d| m.decor(d).kind == EdgeKind::Thin)
                .count();
            let want_thin = usize::from(t.is_marked());
            if thin != want_thin {
                out.push(format!(
                    "{t} node {n} has {thin} thin edges, expected {want_thin}"
                ));
            }
            if let Some(indeg) = t.required_indegree() {
                let ins = darts
                    .iter()
                    .filter(|&&d| m.dart(d).direction == Direction::Incoming)
                    .count();
                let outs = darts
                    .iter()
                    .filter(|&&d| m.dart(d).direction == Direction::Outgoing)
                    .count();
                if ins != indeg || ins + outs != 3 {
                    out.push(format!("{t} node {n} has indegree {ins}, expected {indeg}"));
                }
            }
        }
        out
    }

    pub fn euler_check(&self) -> Vec<EulerData> {
        let mut out = self.map.euler();
        out.extend((0..self.loop_count()).map(|_| EulerData {
            vertices: 0,
            edges: 0,
            faces: 2,
            genus: 0,
        }));
        out
    }

    /// Canonical key and the canonically renumbered representative.
    /// Components are canonicalized independently and sorted; loops are
    /// appended as a sorted multiset.
    pub fn canonical_form(&self, allow_mirror: bool) -> Result<(CanonicalKey, LabelTrigraph)> {
        self.check()?;
        Ok(self.canonical_unchecked(allow_mirror))
    }

    pub(crate) fn canonical_unchecked(&self, allow_mirror: bool) -> (CanonicalKey, LabelTrigraph) {
        let (map, codes) = self.map.canonicalized(allow_mirror);
        let mut key = codes.join("|");
        for (decor, count) in &self.loops {
            let _ = write!(key, "|O[{}]x{count}", decor.spec());
        }
        if key.is_empty() {
            key.push_str("empty");
        }
        (
            CanonicalKey(key),
            LabelTrigraph {
                map,
                loops: self.loops.clone(),
            },
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut parts: Vec<(TriNode, Vec<(u64, EndSpec)>)> = Vec::new();
        let mut loops: BTreeMap<LoopDecor, usize> = BTreeMap::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            for (col, tok) in line
                .split_whitespace()
                .map(|t| (t.as_ptr() as usize - line.as_ptr() as usize, t))
            {
                let err = |m: String| Error::syntax(lineno + 1, col + 1, m);
                if tok == "empty" {
                    continue;
                }
                let open = tok
                    .find('[')
                    .ok_or_else(|| err(format!("expected '[' in '{tok}'")))?;
                if !tok.ends_with(']') {
                    return Err(err(format!("expected ']' in '{tok}'")));
                }
                let head = &tok[..open];
                let body = &tok[open + 1..tok.len() - 1];
                if head == "O" {
                    let decor = parse_loop_spec(body).map_err(err)?;
                    *loops.entry(decor).or_default() += 1;
                } else if head == "L" {
                    let (idx, end) = body
                        .split_once(',')
                        .ok_or_else(|| err("leg must be L[i,arc]".into()))?;
                    let idx: usize = idx
                        .trim()
                        .parse()
                        .ok()
                        .filter(|&i| i > 0)
                        .ok_or_else(|| err(format!("bad leg index '{idx}'")))?;
                    parts.push((TriNode::Leg(idx), vec![parse_end(end.trim()).map_err(err)?]));
                } else {
                    let t = VertexType::parse(head).map_err(|e| err(e.to_string()))?;
                    let ends = body
                        .split(',')
                        .map(|p| parse_end(p.trim()))
                        .collect::<std::result::Result<Vec<_>, _>>()
                        .map_err(err)?;
                    if ends.len() != 3 {
                        return Err(err(format!("{head} expects 3 arcs, found {}", ends.len())));
                    }
                    parts.push((TriNode::Vertex(t), ends));
                }
            }
        }
        // both ends of an arc must agree on kind and label
        let mut first: BTreeMap<u64, &EndSpec> = BTreeMap::new();
        for (_, ends) in &parts {
            for (arc, spec) in ends {
                if let Some(prev) = first.get(arc) {
                    if prev.edge != spec.edge {
                        return Err(Error::InvalidTrigraph(format!(
                            "ends of arc {arc} disagree on kind or label"
                        )));
                    }
                } else {
                    first.insert(*arc, spec);
                }
            }
        }
        let parts = parts
            .into_iter()
            .map(|(node, ends)| {
                let ends = ends
                    .into_iter()
                    .map(|(arc, spec)| End {
                        arc,
                        direction: spec.direction,
                        decor: spec.edge,
                    })
                    .collect();
                (node, ends)
            })
            .collect();
        let g = LabelTrigraph::new(
            RotationMap::from_ends(parts).map_err(|e| Error::InvalidTrigraph(e.to_string()))?,
            loops,
        );
        g.check()?;
        Ok(g)
    }

    pub fn to_text(&self) -> String {
        let m = &self.map;
        let mut label = vec![0usize; m.dart_count()];
        let mut next = 1;
        for d in 0..m.dart_count() {
            if label[d] == 0 {
                label[d] = next;
                label[m.partner(d)] = next;
                next += 1;
            }
        }
        let end = |d: usize| {
            let e = m.decor(d);
            let mut s = String::new();
            if e.kind == EdgeKind::Thin {
                s.push('~');
            }
            let _ = write!(s, "{}", label[d]);
            match m.dart(d).direction {
                Direction::Outgoing => s.push('>'),
                Direction::Incoming => s.push('<'),
                Direction::Unoriented => {}
            }
            if let Some(l) = &e.label {
                let _ = write!(s, "@{l}");
            }
            s
        };
        let mut items = Vec::new();
        for n in 0..m.node_count() {
            let ends: Vec<String> = m.darts_of(n).iter().map(|&d| end(d)).collect();
            items.push(match m.node(n) {
                TriNode::Vertex(t) => format!("{t}[{}]", ends.join(",")),
                TriNode::Leg(i) => format!("L[{i},{}]", ends[0]),
            });
        }
        for (decor, count) in &self.loops {
            for _ in 0..*count {
                items.push(format!("O[{}]", decor.spec()));
            }
        }
        if items.is_empty() {
            "empty".into()
        } else {
            items.join(" ")
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
struct EndSpec {
    direction: Direction,
    edge: TriEdge,
}

fn parse_label(s: &str) -> std::result::Result<(&str, Option<String>), String> {
    match s.split_once('@') {
        Some((rest, l)) => {
            let valid = !l.is_empty()
                && l.trim_start_matches('?')
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '.');
            if !valid || l.trim_start_matches('?').is_empty() {
                return Err(format!("bad label '@{l}'"));
            }
            Ok((rest, Some(l.to_string())))
        }
        None => Ok((s, None)),
    }
}

fn parse_end(tok: &str) -> std::result::Result<(u64, EndSpec), String> {
    let (rest, label) = parse_label(tok)?;
    let (kind, rest) = match rest.strip_prefix('~') {
        Some(r) => (EdgeKind::Thin, r),
        None => (EdgeKind::Thick, rest),
    };
    let (digits, direction) = match rest.as_bytes().last() {
        Some(b'>') => (&rest[..rest.len() - 1], Direction::Outgoing),
        Some(b'<') => (&rest[..rest.len() - 1], Direction::Incoming),
        _ => (rest, Direction::Unoriented),
    };
    let arc: u64 = digits
        .parse()
        .map_err(|_| format!("bad arc label '{tok}'"))?;
    Ok((
        arc,
        EndSpec {
            direction,
            edge: TriEdge { kind, label },
        },
    ))
}

fn parse_loop_spec(body: &str) -> std::result::Result<LoopDecor, String> {
    let (rest, label) = parse_label(body)?;
    let (kind, rest) = match rest.strip_prefix('~') {
        Some(r) => (EdgeKind::Thin, r),
        None => (EdgeKind::Thick, rest),
    };
    let oriented = match rest {
        "u" => false,
        "+" | "-" => true,
        _ => return Err(format!("bad loop spec '{body}'")),
    };
    Ok(LoopDecor {
        kind,
        oriented,
        label,
    })
}
