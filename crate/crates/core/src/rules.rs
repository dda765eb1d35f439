//! Rule sets: the relation systems that present the module of trigraphs,
//! together with the smoothing rules that expand crossings.
//!
//! The rule DSL is line oriented; `#` starts a comment.
//!
//! ```text
//! ruleset NAME
//! ring A B ...                 ring variables (none: plain integers)
//! mirror on|off                identify mirror-image embeddings (default off)
//! taxonomy strict|off          enforce the fixed V.1-V.10 taxonomy (default off)
//! vertexsig V.k K K K D D D    legal decoration of a vertex type, up to rotation;
//!                              K in thick|thin, D in in|out|un
//! vertexmap source|sink V.k    image of a diagram vertex
//! arcs thick|thin oriented|unoriented
//!                              image of a diagram arc
//! smoothing ID positive|negative|any:
//!   choice: COEFF * FRAGMENT   (exactly two choices)
//! rule ID:
//!   lhs: FRAGMENT
//!   rhs: COEFF * FRAGMENT [+ COEFF * FRAGMENT ...]
//!   hint: both|left_to_right   (default both)
//! scalar FRAGMENT -> COEFF
//! ```
//!
//! A body written as `TODO` declares the rule without content; such a rule
//! set parses but is reported incomplete when used.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::diagram::{CrossingSign, Polarity};
use crate::error::{Error, Result};
use crate::laurent::Laurent;
use crate::map::Direction;
use crate::scalar::Scalar;
use crate::sum::parse_terms;
use crate::trigraph::{EdgeKind, LabelTrigraph, TriNode, VertexType};

/// Type of one boundary leg: the edge decoration at the leg and the flow
/// direction seen from the leg (`Outgoing`: into the fragment).
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LegType {
    pub kind: EdgeKind,
    pub label: Option<String>,
    pub direction: Direction,
}

/// An open trigraph with numbered boundary legs.
#[derive(Clone, Debug, PartialEq)]
pub struct Fragment {
    graph: LabelTrigraph,
    legs: Vec<LegType>,
}

impl Fragment {
    pub fn new(graph: LabelTrigraph) -> Result<Self> {
        graph.check()?;
        let m = graph.map();
        let legs = graph
            .legs()
            .values()
            .map(|&n| {
                let d = m.darts_of(n)[0];
                LegType {
                    kind: m.decor(d).kind,
                    label: m.decor(d).label.clone(),
                    direction: m.dart(d).direction,
                }
            })
            .collect();
        Ok(Fragment { graph, legs })
    }

    pub fn parse(text: &str) -> Result<Self> {
        Fragment::new(LabelTrigraph::parse(text)?)
    }

    pub fn graph(&self) -> &LabelTrigraph {
        &self.graph
    }

    pub fn legs(&self) -> &[LegType] {
        &self.legs
    }

    pub fn arity(&self) -> usize {
        self.legs.len()
    }

    /// Two fragments can be glued along all their legs.
    pub fn composable_with(&self, other: &Fragment) -> bool {
        self.legs.len() == other.legs.len()
            && self.legs.iter().zip(&other.legs).all(|(a, b)| {
                a.kind == b.kind && a.label == b.label && a.direction == b.direction.reversed()
            })
    }

    pub fn to_text(&self) -> String {
        self.graph.to_text()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DirectionHint {
    Both,
    LeftToRight,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RelationRule<R: Scalar = i64> {
    pub id: String,
    pub lhs: Fragment,
    pub rhs: Vec<(Laurent<R>, Fragment)>,
    pub hint: DirectionHint,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingClass {
    Positive,
    Negative,
    Any,
}

impl CrossingClass {
    pub fn covers(self, sign: CrossingSign) -> bool {
        matches!(
            (self, sign),
            (CrossingClass::Any, _)
                | (CrossingClass::Positive, CrossingSign::Positive)
                | (CrossingClass::Negative, CrossingSign::Negative)
        )
    }

    fn name(self) -> &'static str {
        match self {
            CrossingClass::Positive => "positive",
            CrossingClass::Negative => "negative",
            CrossingClass::Any => "any",
        }
    }
}

/// Two local replacements of a crossing; legs 1..4 are the crossing's darts
/// counterclockwise from the incoming understrand.
#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingRule<R: Scalar = i64> {
    pub id: String,
    pub class: CrossingClass,
    pub choices: [(Laurent<R>, Fragment); 2],
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct VertexSignature {
    pub vertex: VertexType,
    pub kinds: [EdgeKind; 3],
    pub directions: [Direction; 3],
}

impl VertexSignature {
    /// Whether the decorations match this signature under some rotation.
    pub fn accepts(&self, kinds: &[EdgeKind], dirs: &[Direction]) -> bool {
        kinds.len() == 3
            && (0..3).any(|r| {
                (0..3).all(|i| {
                    kinds[(i + r) % 3] == self.kinds[i] && dirs[(i + r) % 3] == self.directions[i]
                })
            })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RuleSet<R: Scalar = i64> {
    pub name: String,
    pub vars: Vec<String>,
    pub allow_mirror: bool,
    pub strict_taxonomy: bool,
    pub signatures: Vec<VertexSignature>,
    pub vertex_map: BTreeMap<Polarity, VertexType>,
    pub arc_kind: EdgeKind,
    pub arcs_oriented: bool,
    pub smoothing: Vec<SmoothingRule<R>>,
    pub relations: Vec<RelationRule<R>>,
    pub scalars: Vec<RelationRule<R>>,
    /// Declared rule ids whose bodies are still `TODO`, in file order.
    pub incomplete: Vec<String>,
}

impl<R: Scalar> RuleSet<R> {
    /// Errors naming the first declared-but-empty rule, smoothing rules first.
    pub fn require_complete(&self) -> Result<()> {
        match self.incomplete.first() {
            Some(id) => Err(Error::RulesetIncomplete(id.clone())),
            None => Ok(()),
        }
    }

    pub fn smoothing_for(&self, sign: CrossingSign) -> Option<&SmoothingRule<R>> {
        self.smoothing.iter().find(|r| r.class.covers(sign))
    }

    /// Relation and scalar rules, sorted by id.
    pub fn all_relations(&self) -> Vec<&RelationRule<R>> {
        let mut v: Vec<&RelationRule<R>> = self.relations.iter().chain(&self.scalars).collect();
        v.sort_by(|a, b| a.id.cmp(&b.id));
        v
    }

    pub fn relation(&self, id: &str) -> Option<&RelationRule<R>> {
        self.relations
            .iter()
            .chain(&self.scalars)
            .find(|r| r.id == id)
    }

    /// Rules used greedily by normalization, sorted by id.
    pub fn normalizing_rules(&self) -> Vec<&RelationRule<R>> {
        self.all_relations()
            .into_iter()
            .filter(|r| r.hint == DirectionHint::LeftToRight)
            .collect()
    }

    /// Checks a closed trigraph against the signature table (and the fixed
    /// taxonomy when strict).
    pub fn check_signatures(&self, g: &LabelTrigraph) -> Result<()> {
        let m = g.map();
        for n in 0..m.node_count() {
            let TriNode::Vertex(t) = *m.node(n) else {
                continue;
            };
            let darts = m.darts_of(n);
            let kinds: Vec<EdgeKind> = darts.iter().map(|&d| m.decor(d).kind).collect();
            let dirs: Vec<Direction> = darts.iter().map(|&d| m.dart(d).direction).collect();
            let ok = self
                .signatures
                .iter()
                .any(|s| s.vertex == t && s.accepts(&kinds, &dirs));
            if !ok {
                return Err(Error::SignatureViolation(format!(
                    "{t} node {n} with edges {kinds:?} {dirs:?} matches no signature"
                )));
            }
        }
        if self.strict_taxonomy {
            if let Some(v) = g.taxonomy_violations().into_iter().next() {
                return Err(Error::SignatureViolation(v));
            }
        }
        Ok(())
    }

    pub fn parse(text: &str) -> Result<Self> {
        parse_ruleset(text)
    }

    fn empty() -> Self {
        RuleSet {
            name: String::new(),
            vars: Vec::new(),
            allow_mirror: false,
            strict_taxonomy: false,
            signatures: Vec::new(),
            vertex_map: BTreeMap::new(),
            arc_kind: EdgeKind::Thick,
            arcs_oriented: true,
            smoothing: Vec::new(),
            relations: Vec::new(),
            scalars: Vec::new(),
            incomplete: Vec::new(),
        }
    }

    /// Serializes back to the rule DSL.
    pub fn to_text(&self) -> String {
        let v = &self.vars;
        let mut out = String::new();
        let _ = writeln!(out, "ruleset {}", self.name);
        let _ = writeln!(out, "ring {}", v.join(" "));
        let _ = writeln!(
            out,
            "mirror {}",
            if self.allow_mirror { "on" } else { "off" }
        );
        let _ = writeln!(
            out,
            "taxonomy {}",
            if self.strict_taxonomy {
                "strict"
            } else {
                "off"
            }
        );
        for s in &self.signatures {
            let kinds: Vec<&str> = s.kinds.iter().map(|k| kind_name(*k)).collect();
            let dirs: Vec<&str> = s.directions.iter().map(|d| dir_name(*d)).collect();
            let _ = writeln!(
                out,
                "vertexsig {} {} {}",
                s.vertex,
                kinds.join(" "),
                dirs.join(" ")
            );
        }
        for (p, t) in &self.vertex_map {
            let p = match p {
                Polarity::Source => "source",
                Polarity::Sink => "sink",
            };
            let _ = writeln!(out, "vertexmap {p} {t}");
        }
        let _ = writeln!(
            out,
            "arcs {} {}",
            kind_name(self.arc_kind),
            if self.arcs_oriented {
                "oriented"
            } else {
                "unoriented"
            }
        );
        for s in &self.smoothing {
            let _ = writeln!(out, "smoothing {} {}:", s.id, s.class.name());
            for (c, f) in &s.choices {
                let _ = writeln!(out, "  choice: {} * {}", c.to_token(v), f.to_text());
            }
        }
        for r in &self.relations {
            let _ = writeln!(out, "rule {}:", r.id);
            let _ = writeln!(out, "  lhs: {}", r.lhs.to_text());
            let rhs: Vec<String> = r
                .rhs
                .iter()
                .map(|(c, f)| format!("{} * {}", c.to_token(v), f.to_text()))
                .collect();
            let _ = writeln!(out, "  rhs: {}", rhs.join(" + "));
            if r.hint == DirectionHint::LeftToRight {
                let _ = writeln!(out, "  hint: left_to_right");
            }
        }
        for s in &self.scalars {
            let _ = writeln!(
                out,
                "scalar {} -> {}",
                s.lhs.to_text(),
                s.rhs[0].0.to_token(v)
            );
        }
        for id in &self.incomplete {
            let _ = writeln!(out, "# incomplete: {id}");
        }
        out
    }
}

fn kind_name(k: EdgeKind) -> &'static str {
    match k {
        EdgeKind::Thick => "thick",
        EdgeKind::Thin => "thin",
    }
}

fn dir_name(d: Direction) -> &'static str {
    match d {
        Direction::Incoming => "in",
        Direction::Outgoing => "out",
        Direction::Unoriented => "un",
    }
}

struct Pending {
    id: String,
    line: usize,
    body: PendingBody,
}

enum PendingBody {
    Smoothing {
        class: CrossingClass,
        choices: Vec<(String, usize)>,
    },
    Rule {
        lhs: Option<(String, usize)>,
        rhs: Option<(String, usize)>,
        hint: DirectionHint,
    },
}

fn is_todo(s: &str) -> bool {
    s.trim() == "TODO"
}

fn parse_ruleset<R: Scalar>(text: &str) -> Result<RuleSet<R>> {
    let mut rs = RuleSet::<R>::empty();
    let mut pending: Option<Pending> = None;
    let mut ids: BTreeSet<String> = BTreeSet::new();
    let mut seen_ruleset = false;

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let indent = line.len() - line.trim_start().len() + 1;
        let err = |m: String| Error::syntax(lineno, indent, m);

        // block body lines
        if let Some(key) = ["choice:", "lhs:", "rhs:", "hint:"]
            .iter()
            .find(|k| trimmed.starts_with(*k))
        {
            let value = trimmed[key.len()..].trim().to_string();
            let Some(p) = pending.as_mut() else {
                return Err(err(format!("'{key}' outside of a rule block")));
            };
            match (&mut p.body, *key) {
                (PendingBody::Smoothing { choices, .. }, "choice:") => {
                    choices.push((value, lineno))
                }
                (PendingBody::Rule { lhs, .. }, "lhs:") if lhs.is_none() => {
                    *lhs = Some((value, lineno))
                }
                (PendingBody::Rule { rhs, .. }, "rhs:") if rhs.is_none() => {
                    *rhs = Some((value, lineno))
                }
                (PendingBody::Rule { hint, .. }, "hint:") => {
                    *hint = match value.as_str() {
                        "both" => DirectionHint::Both,
                        "left_to_right" => DirectionHint::LeftToRight,
                        _ => return Err(err(format!("unknown hint '{value}'"))),
                    }
                }
                _ => return Err(err(format!("unexpected '{key}' in block {}", p.id))),
            }
            continue;
        }

        if let Some(p) = pending.take() {
            finish(&mut rs, p)?;
        }
        let (word, rest) = trimmed
            .split_once(char::is_whitespace)
            .unwrap_or((trimmed, ""));
        let rest = rest.trim();
        match word {
            "ruleset" => {
                if rest.is_empty() {
                    return Err(err("ruleset needs a name".into()));
                }
                rs.name = rest.to_string();
                seen_ruleset = true;
            }
            "ring" => {
                rs.vars = rest.split_whitespace().map(String::from).collect();
                let valid = rs
                    .vars
                    .iter()
                    .all(|v| v.chars().all(|c| c.is_ascii_alphabetic() || c == '_'));
                if !valid {
                    return Err(err("ring variables must be alphabetic".into()));
                }
            }
            "mirror" => {
                rs.allow_mirror = match rest {
                    "on" => true,
                    "off" => false,
                    _ => return Err(err("mirror takes on|off".into())),
                }
            }
            "taxonomy" => {
                rs.strict_taxonomy = match rest {
                    "strict" => true,
                    "off" => false,
                    _ => return Err(err("taxonomy takes strict|off".into())),
                }
            }
            "vertexsig" => {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 7 {
                    return Err(err(
                        "vertexsig needs a type, three kinds and three directions".into(),
                    ));
                }
                let vertex = VertexType::parse(f[0])?;
                let mut kinds = [EdgeKind::Thick; 3];
                let mut directions = [Direction::Unoriented; 3];
                for i in 0..3 {
                    kinds[i] = match f[1 + i] {
                        "thick" => EdgeKind::Thick,
                        "thin" => EdgeKind::Thin,
                        k => return Err(err(format!("unknown edge kind '{k}'"))),
                    };
                    directions[i] = match f[4 + i] {
                        "in" => Direction::Incoming,
                        "out" => Direction::Outgoing,
                        "un" => Direction::Unoriented,
                        d => return Err(err(format!("unknown direction '{d}'"))),
                    };
                }
                rs.signatures.push(VertexSignature {
                    vertex,
                    kinds,
                    directions,
                });
            }
            "vertexmap" => {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 2 {
                    return Err(err("vertexmap needs source|sink and a vertex type".into()));
                }
                let pol = match f[0] {
                    "source" => Polarity::Source,
                    "sink" => Polarity::Sink,
                    p => return Err(err(format!("unknown polarity '{p}'"))),
                };
                rs.vertex_map.insert(pol, VertexType::parse(f[1])?);
            }
            "arcs" => {
                let f: Vec<&str> = rest.split_whitespace().collect();
                if f.len() != 2 {
                    return Err(err("arcs needs a kind and oriented|unoriented".into()));
                }
                rs.arc_kind = match f[0] {
                    "thick" => EdgeKind::Thick,
                    "thin" => EdgeKind::Thin,
                    k => return Err(err(format!("unknown edge kind '{k}'"))),
                };
                rs.arcs_oriented = match f[1] {
                    "oriented" => true,
                    "unoriented" => false,
                    o => return Err(err(format!("expected oriented|unoriented, found '{o}'"))),
                };
            }
            "smoothing" => {
                let head = rest
                    .strip_suffix(':')
                    .ok_or_else(|| err("smoothing header must end with ':'".into()))?;
                let f: Vec<&str> = head.split_whitespace().collect();
                if f.len() != 2 {
                    return Err(err("smoothing needs an id and a crossing class".into()));
                }
                let class = match f[1] {
                    "positive" => CrossingClass::Positive,
                    "negative" => CrossingClass::Negative,
                    "any" => CrossingClass::Any,
                    c => return Err(err(format!("unknown crossing class '{c}'"))),
                };
                if !ids.insert(f[0].to_string()) {
                    return Err(Error::DuplicateRule(f[0].to_string()));
                }
                pending = Some(Pending {
                    id: f[0].to_string(),
                    line: lineno,
                    body: PendingBody::Smoothing {
                        class,
                        choices: Vec::new(),
                    },
                });
            }
            "rule" => {
                let id = rest
                    .strip_suffix(':')
                    .map(str::trim)
                    .filter(|id| !id.is_empty() && !id.contains(char::is_whitespace))
                    .ok_or_else(|| err("rule header must be 'rule ID:'".into()))?;
                if !ids.insert(id.to_string()) {
                    return Err(Error::DuplicateRule(id.to_string()));
                }
                pending = Some(Pending {
                    id: id.to_string(),
                    line: lineno,
                    body: PendingBody::Rule {
                        lhs: None,
                        rhs: None,
                        hint: DirectionHint::Both,
                    },
                });
            }
            "scalar" => {
                let (frag, value) = rest
                    .split_once("->")
                    .ok_or_else(|| err("scalar needs 'FRAGMENT -> COEFF'".into()))?;
                let lhs = Fragment::parse(frag.trim()).map_err(|e| at_line(e, lineno))?;
                if lhs.arity() != 0 {
                    return Err(err("scalar fragments must be closed".into()));
                }
                let value =
                    Laurent::parse(value.trim(), &rs.vars).map_err(|e| at_line(e, lineno))?;
                let id = format!("S{}", rs.scalars.len() + 1);
                ids.insert(id.clone());
                rs.scalars.push(RelationRule {
                    id,
                    lhs,
                    rhs: vec![(value, Fragment::parse("empty")?)],
                    hint: DirectionHint::LeftToRight,
                });
            }
            _ => return Err(err(format!("unknown directive '{word}'"))),
        }
    }
    if let Some(p) = pending.take() {
        finish(&mut rs, p)?;
    }
    if !seen_ruleset {
        return Err(Error::syntax(1, 1, "missing 'ruleset NAME'"));
    }
    validate(&rs)?;
    Ok(rs)
}

fn at_line(e: Error, line: usize) -> Error {
    match e {
        Error::Syntax {
            column, message, ..
        } => Error::Syntax {
            line,
            column,
            message,
        },
        other => other,
    }
}

fn parse_rhs<R: Scalar>(
    text: &str,
    line: usize,
    vars: &[String],
) -> Result<Vec<(Laurent<R>, Fragment)>> {
    parse_terms::<R>(text, vars)
        .map_err(|e| at_line(e, line))?
        .into_iter()
        .map(|(c, g)| Ok((c, Fragment::new(g)?)))
        .collect()
}

fn finish<R: Scalar>(rs: &mut RuleSet<R>, p: Pending) -> Result<()> {
    let empty_body = || Error::syntax(p.line, 1, format!("rule {} has an empty body", p.id));
    match p.body {
        PendingBody::Smoothing { class, choices } => {
            if choices.is_empty() {
                return Err(empty_body());
            }
            if choices.iter().any(|(c, _)| is_todo(c)) {
                rs.incomplete.push(p.id);
                return Ok(());
            }
            if choices.len() != 2 {
                return Err(Error::syntax(
                    p.line,
                    1,
                    format!(
                        "smoothing {} needs exactly two choices, found {}",
                        p.id,
                        choices.len()
                    ),
                ));
            }
            let mut parsed = Vec::new();
            for (text, line) in &choices {
                let mut terms = parse_rhs::<R>(text, *line, &rs.vars)?;
                if terms.len() != 1 {
                    return Err(Error::syntax(
                        *line,
                        1,
                        "a choice is a single COEFF * FRAGMENT",
                    ));
                }
                parsed.push(terms.remove(0));
            }
            let second = parsed.pop().expect("two choices");
            let first = parsed.pop().expect("two choices");
            rs.smoothing.push(SmoothingRule {
                id: p.id,
                class,
                choices: [first, second],
            });
        }
        PendingBody::Rule { lhs, rhs, hint } => {
            let (Some((lhs, lhs_line)), Some((rhs, rhs_line))) = (lhs, rhs) else {
                return Err(empty_body());
            };
            if is_todo(&lhs) || is_todo(&rhs) {
                rs.incomplete.push(p.id);
                return Ok(());
            }
            let lhs = Fragment::parse(&lhs).map_err(|e| at_line(e, lhs_line))?;
            let rhs = parse_rhs::<R>(&rhs, rhs_line, &rs.vars)?;
            rs.relations.push(RelationRule {
                id: p.id,
                lhs,
                rhs,
                hint,
            });
        }
    }
    Ok(())
}

fn validate<R: Scalar>(rs: &RuleSet<R>) -> Result<()> {
    let mismatch = |rule: &str, message: String| Error::InterfaceMismatch {
        rule: rule.to_string(),
        message,
    };
    for r in &rs.relations {
        for (i, (_, f)) in r.rhs.iter().enumerate() {
            if f.arity() != r.lhs.arity() {
                return Err(mismatch(
                    &r.id,
                    format!(
                        "lhs has {} legs but rhs term {} has {}",
                        r.lhs.arity(),
                        i + 1,
                        f.arity()
                    ),
                ));
            }
            if f.legs() != r.lhs.legs() {
                return Err(mismatch(
                    &r.id,
                    format!("leg types of rhs term {} differ from lhs", i + 1),
                ));
            }
        }
    }
    for s in &rs.smoothing {
        for (i, (_, f)) in s.choices.iter().enumerate() {
            if f.arity() != 4 {
                return Err(mismatch(
                    &s.id,
                    format!("choice {} has {} legs, expected 4", i + 1, f.arity()),
                ));
            }
        }
    }
    let declared: BTreeSet<VertexType> = rs.signatures.iter().map(|s| s.vertex).collect();
    let fragments = rs
        .relations
        .iter()
        .flat_map(|r| std::iter::once(&r.lhs).chain(r.rhs.iter().map(|(_, f)| f)))
        .chain(rs.scalars.iter().map(|r| &r.lhs))
        .chain(
            rs.smoothing
                .iter()
                .flat_map(|s| s.choices.iter().map(|(_, f)| f)),
        );
    for f in fragments {
        let m = f.graph().map();
        for n in 0..m.node_count() {
            if let TriNode::Vertex(t) = m.node(n) {
                if !declared.contains(t) {
                    return Err(Error::UnknownVertexType(format!(
                        "{t} has no vertexsig entry"
                    )));
                }
            }
        }
    }
    for t in rs.vertex_map.values() {
        if !declared.contains(t) {
            return Err(Error::UnknownVertexType(format!(
                "{t} has no vertexsig entry"
            )));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const KAUFFMAN: &str = include_str!("../rules/kauffman.rules");
    pub(crate) const SKELETON: &str = include_str!("../rules/label-bracket.rules");

    #[test]
    fn kauffman_bundle_shape() {
        let rs: RuleSet = RuleSet::parse(KAUFFMAN).unwrap();
        assert_eq!(rs.name, "kauffman");
        assert_eq!(rs.vars, vec!["A".to_string()]);
        assert_eq!(rs.smoothing.len(), 2);
        assert_eq!(rs.scalars.len(), 1);
        assert!(rs.incomplete.is_empty());
        rs.require_complete().unwrap();
        let delta = &rs.scalars[0].rhs[0].0;
        assert_eq!(delta.display(&rs.vars).to_string(), "-A^2 - A^-2");
    }

    #[test]
    fn skeleton_is_incomplete() {
        let rs: RuleSet = RuleSet::parse(SKELETON).unwrap();
        match rs.require_complete() {
            Err(Error::RulesetIncomplete(id)) => assert_eq!(id, "RS.1"),
            other => panic!("unexpected {other:?}"),
        }
        for id in [
            "R1.1", "R1.2", "R3.1", "R4.1", "R4.4", "R5.1", "R5.4", "RS.2",
        ] {
            assert!(rs.incomplete.iter().any(|x| x == id), "{id}");
        }
    }

    #[test]
    fn roundtrip() {
        let rs: RuleSet = RuleSet::parse(KAUFFMAN).unwrap();
        let again: RuleSet = RuleSet::parse(&rs.to_text()).unwrap();
        assert_eq!(rs, again);
    }

    #[test]
    fn empty_body_is_an_error() {
        let src = "ruleset t\nring A\nrule R1:\n";
        assert!(matches!(
            RuleSet::<i64>::parse(src),
            Err(Error::Syntax { .. })
        ));
        let src = "ruleset t\nring A\nrule R1:\n  lhs: L[1,1] L[2,1]\n";
        assert!(matches!(
            RuleSet::<i64>::parse(src),
            Err(Error::Syntax { .. })
        ));
    }

    #[test]
    fn interface_mismatch() {
        let src = "ruleset t\nring A\nrule R9:\n  lhs: L[1,1] L[2,2] L[3,1] O[u] L[4,2] L[5,3] L[6,3]\n  rhs: A * L[1,1] L[2,1] L[3,2] L[4,2]\n";
        // lhs has 6 legs, rhs 4
        match RuleSet::<i64>::parse(src) {
            Err(Error::InterfaceMismatch { rule, .. }) => assert_eq!(rule, "R9"),
            other => panic!("unexpected {other:?}"),
        }
        let src = "ruleset t\nring A\nrule R9:\n  lhs: L[1,1] L[2,1] L[3,2] L[4,2] L[5,3] L[6,3]\n  rhs: A * L[1,1] L[2,1] L[3,2] L[4,2]\n";
        assert!(matches!(
            RuleSet::<i64>::parse(src),
            Err(Error::InterfaceMismatch { .. })
        ));
        let src = "ruleset t\nring A\nrule R9:\n  lhs: L[1,1] L[2,1] L[3,2] L[4,2]\n  rhs: A * L[1,1] L[2,1] L[3,2] L[4,2] L[5,3] L[6,3] L[7,4] L[8,4]\n";
        assert!(matches!(
            RuleSet::<i64>::parse(src),
            Err(Error::InterfaceMismatch { .. })
        ));
    }

    #[test]
    fn three_versus_four_legs() {
        let src = "ruleset t\nring A\nvertexsig V.9 thick thick thick un un un\nrule R9:\n  lhs: V.9[1,2,3] L[1,1] L[2,2] L[3,3]\n  rhs: A * L[1,1] L[2,1] L[3,2] L[4,2]\n";
        assert!(matches!(
            RuleSet::<i64>::parse(src),
            Err(Error::InterfaceMismatch { .. })
        ));
    }

    #[test]
    fn unknown_vertex_type() {
        let src = "ruleset t\nring A\nrule R9:\n  lhs: V.3[1,2,3] L[1,1] L[2,2] L[3,3]\n  rhs: A * V.3[1,2,3] L[1,1] L[2,2] L[3,3]\n";
        assert!(matches!(
            RuleSet::<i64>::parse(src),
            Err(Error::UnknownVertexType(_))
        ));
        assert!(matches!(
            RuleSet::<i64>::parse("ruleset t\nvertexsig V.12 thick thick thick un un un\n"),
            Err(Error::UnknownVertexType(_))
        ));
    }

    #[test]
    fn syntax_error_position() {
        match RuleSet::<i64>::parse("ruleset t\nring A\n  bogus 1\n") {
            Err(Error::Syntax { line, column, .. }) => assert_eq!((line, column), (3, 3)),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn signature_rotation() {
        let s = VertexSignature {
            vertex: VertexType::new(1).unwrap(),
            kinds: [EdgeKind::Thin, EdgeKind::Thick, EdgeKind::Thick],
            directions: [
                Direction::Unoriented,
                Direction::Incoming,
                Direction::Outgoing,
            ],
        };
        assert!(s.accepts(
            &[EdgeKind::Thick, EdgeKind::Thick, EdgeKind::Thin],
            &[
                Direction::Incoming,
                Direction::Outgoing,
                Direction::Unoriented
            ]
        ));
        assert!(!s.accepts(
            &[EdgeKind::Thick, EdgeKind::Thick, EdgeKind::Thin],
            &[
                Direction::Outgoing,
                Direction::Incoming,
                Direction::Unoriented
            ]
        ));
    }
}
