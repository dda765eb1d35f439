//! Knotted trivalent graph diagrams.
//!
//! Text format, one node per line (several per line are accepted), `#` starts
//! a comment:
//!
//! ```text
//! X[a,b,c,d]   crossing, darts counterclockwise from the incoming understrand
//! V+[a,b,c]    source vertex (all edges outgoing)
//! V-[a,b,c]    sink vertex (all edges incoming)
//! O[+] O[-]    crossing-free closed loop, counterclockwise / clockwise
//! ```
//!
//! Arc labels are positive integers, each used exactly twice. An arc end may
//! carry an explicit direction suffix, `>` (leaving the node) or `<`
//! (entering it). Unannotated ends are oriented by propagation from vertex
//! polarities and understrands; a component passing only over crossings is
//! oriented so that its smallest unresolved dart enters its node.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::map::{DartId, Direction, End, EulerData, NodeDecor, NodeId, RotationMap};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Polarity {
    Source,
    Sink,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum DiagramNode {
    /// Darts start at the incoming understrand; slots 0 and 2 are the
    /// understrand, slots 1 and 3 the overstrand.
    Crossing,
    Vertex(Polarity),
}

impl NodeDecor for DiagramNode {
    fn anchored(&self) -> bool {
        matches!(self, DiagramNode::Crossing)
    }

    fn code(&self) -> String {
        match self {
            DiagramNode::Crossing => "X".into(),
            DiagramNode::Vertex(Polarity::Source) => "V+".into(),
            DiagramNode::Vertex(Polarity::Sink) => "V-".into(),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CrossingSign {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GraphDiagram {
    map: RotationMap<DiagramNode, ()>,
    /// Crossing-free loops: `[counterclockwise, clockwise]`.
    free_loops: [usize; 2],
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViolationKind {
    Arity,
    MixedOrientation,
    CrossingOrientation,
    ArcOrientation,
    NonPlanar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: Option<NodeId>,
    pub dart: Option<DartId>,
    pub message: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.violations.is_empty() {
            return writeln!(f, "valid");
        }
        for v in &self.violations {
            writeln!(f, "{}", v.message)?;
        }
        Ok(())
    }
}

impl GraphDiagram {
    pub fn new(map: RotationMap<DiagramNode, ()>, free_loops: [usize; 2]) -> Self {
        GraphDiagram { map, free_loops }
    }

    pub fn map(&self) -> &RotationMap<DiagramNode, ()> {
        &self.map
    }

    pub fn free_loops(&self) -> [usize; 2] {
        self.free_loops
    }

    pub fn crossings(&self) -> Vec<NodeId> {
        (0..self.map.node_count())
            .filter(|&n| *self.map.node(n) == DiagramNode::Crossing)
            .collect()
    }

    pub fn crossing_count(&self) -> usize {
        self.crossings().len()
    }

    pub fn vertex_count(&self) -> usize {
        self.map.node_count() - self.crossing_count()
    }

    /// The dart where the understrand enters a crossing.
    pub fn under_in_dart(&self, crossing: NodeId) -> DartId {
        self.map.darts_of(crossing)[0]
    }

    /// Sign of a crossing: positive when the overstrand enters at slot 3.
    pub fn crossing_sign(&self, crossing: NodeId) -> CrossingSign {
        let darts = self.map.darts_of(crossing);
        if self.map.dart(darts[3]).direction == Direction::Incoming {
            CrossingSign::Positive
        } else {
            CrossingSign::Negative
        }
    }

    pub fn writhe(&self) -> i64 {
        self.crossings()
            .into_iter()
            .map(|c| match self.crossing_sign(c) {
                CrossingSign::Positive => 1,
                CrossingSign::Negative => -1,
            })
            .sum()
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes: Vec<(DiagramNode, Vec<(u64, Option<Direction>)>)> = Vec::new();
        let mut free_loops = [0usize; 2];
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("");
            for (col, tok) in tokens(line) {
                let err = |m: &str| Error::syntax(lineno + 1, col + 1, m);
                let open = tok.find('[').ok_or_else(|| err("expected '['"))?;
                if !tok.ends_with(']') {
                    return Err(err("expected ']'"));
                }
                let head = &tok[..open];
                let body = &tok[open + 1..tok.len() - 1];
                let kind = match head {
                    "X" => DiagramNode::Crossing,
                    "V+" => DiagramNode::Vertex(Polarity::Source),
                    "V-" => DiagramNode::Vertex(Polarity::Sink),
                    "O" => {
                        match body {
                            "+" => free_loops[0] += 1,
                            "-" => free_loops[1] += 1,
                            _ => return Err(err("free loop must be O[+] or O[-]")),
                        }
                        continue;
                    }
                    _ => return Err(err(&format!("unknown node kind '{head}'"))),
                };
                let mut ends = Vec::new();
                for part in body.split(',') {
                    let part = part.trim();
                    let (digits, dir) = match part.as_bytes().last() {
                        Some(b'>') => (&part[..part.len() - 1], Some(Direction::Outgoing)),
                        Some(b'<') => (&part[..part.len() - 1], Some(Direction::Incoming)),
                        _ => (part, None),
                    };
                    let label: u64 = digits
                        .parse()
                        .ok()
                        .filter(|&l| l > 0)
                        .ok_or_else(|| err(&format!("bad arc label '{part}'")))?;
                    ends.push((label, dir));
                }
                let want = if kind == DiagramNode::Crossing { 4 } else { 3 };
                if ends.len() != want {
                    return Err(err(&format!(
                        "{head} expects {want} arcs, found {}",
                        ends.len()
                    )));
                }
                nodes.push((kind, ends));
            }
        }
        Self::from_labelled(nodes, free_loops)
    }

    /// Builds a diagram from nodes listing `(arc label, explicit direction)`
    /// counterclockwise; missing directions are inferred.
    pub fn from_labelled(
        nodes: Vec<(DiagramNode, Vec<(u64, Option<Direction>)>)>,
        free_loops: [usize; 2],
    ) -> Result<Self> {
        let mut counts: BTreeMap<u64, usize> = BTreeMap::new();
        for (_, ends) in &nodes {
            for (a, _) in ends {
                *counts.entry(*a).or_default() += 1;
            }
        }
        if let Some((a, c)) = counts.iter().find(|(_, &c)| c != 2) {
            return Err(Error::InvalidDiagram(format!(
                "arc {a} appears {c} times, expected 2"
            )));
        }
        let dirs = infer_directions(&nodes);
        let mut k = 0;
        let built = nodes
            .into_iter()
            .map(|(kind, ends)| {
                let ends = ends
                    .into_iter()
                    .map(|(arc, _)| {
                        let direction = dirs[k].expect("every dart is oriented");
                        k += 1;
                        End {
                            arc,
                            direction,
                            decor: (),
                        }
                    })
                    .collect();
                (kind, ends)
            })
            .collect();
        Ok(GraphDiagram {
            map: RotationMap::from_ends(built)?,
            free_loops,
        })
    }

    /// Writes the diagram in the text format. Arc labels are renumbered by
    /// first dart; directions are written wherever they are not implied.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let label = self.arc_labels();
        for n in 0..self.map.node_count() {
            let kind = *self.map.node(n);
            let _ = write!(out, "{}[", kind.code());
            for (i, &d) in self.map.darts_of(n).iter().enumerate() {
                if i > 0 {
                    out.push(',');
                }
                let dir = self.map.dart(d).direction;
                let implied = match kind {
                    DiagramNode::Crossing if i == 0 => Some(Direction::Incoming),
                    DiagramNode::Crossing if i == 2 => Some(Direction::Outgoing),
                    DiagramNode::Crossing => None,
                    DiagramNode::Vertex(Polarity::Source) => Some(Direction::Outgoing),
                    DiagramNode::Vertex(Polarity::Sink) => Some(Direction::Incoming),
                };
                let _ = write!(out, "{}", label[d]);
                if implied != Some(dir) {
                    out.push(match dir {
                        Direction::Outgoing => '>',
                        Direction::Incoming => '<',
                        Direction::Unoriented => '?',
                    });
                }
            }
            out.push_str("]\n");
        }
        for _ in 0..self.free_loops[0] {
            out.push_str("O[+]\n");
        }
        for _ in 0..self.free_loops[1] {
            out.push_str("O[-]\n");
        }
        out
    }

    /// Arc label per dart, numbering edges by their first dart from 1.
    pub fn arc_labels(&self) -> Vec<usize> {
        let mut label = vec![0; self.map.dart_count()];
        let mut next = 1;
        for d in 0..self.map.dart_count() {
            if label[d] == 0 {
                label[d] = next;
                label[self.map.partner(d)] = next;
                next += 1;
            }
        }
        label
    }

    pub fn euler_check(&self) -> Vec<EulerData> {
        let mut out = self.map.euler();
        out.extend(
            (0..self.free_loops[0] + self.free_loops[1]).map(|_| EulerData {
                vertices: 0,
                edges: 0,
                faces: 2,
                genus: 0,
            }),
        );
        out
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let m = &self.map;
        for n in 0..m.node_count() {
            let darts = m.darts_of(n);
            let dir = |i: usize| m.dart(darts[i]).direction;
            match *m.node(n) {
                DiagramNode::Vertex(p) => {
                    if darts.len() != 3 {
                        violations.push(Violation {
                            kind: ViolationKind::Arity,
                            node: Some(n),
                            dart: None,
                            message: format!("vertex {n} has arity {}, expected 3", darts.len()),
                        });
                        continue;
                    }
                    let want = match p {
                        Polarity::Source => Direction::Outgoing,
                        Polarity::Sink => Direction::Incoming,
                    };
                    let outs = (0..3).filter(|&i| dir(i) == Direction::Outgoing).count();
                    let ins = (0..3).filter(|&i| dir(i) == Direction::Incoming).count();
                    if outs != 3 && ins != 3 {
                        violations.push(Violation {
                            kind: ViolationKind::MixedOrientation,
                            node: Some(n),
                            dart: darts.iter().copied().find(|&d| m.dart(d).direction != want),
                            message: format!(
                                "mixed orientation at vertex {n}: {ins} incoming, {outs} outgoing"
                            ),
                        });
                    } else if (0..3).any(|i| dir(i) != want) {
                        violations.push(Violation {
                            kind: ViolationKind::MixedOrientation,
                            node: Some(n),
                            dart: Some(darts[0]),
                            message: format!("mixed orientation at vertex {n}: polarity disagrees with its edges"),
                        });
                    }
                }
                DiagramNode::Crossing => {
                    if darts.len() != 4 {
                        violations.push(Violation {
                            kind: ViolationKind::Arity,
                            node: Some(n),
                            dart: None,
                            message: format!("crossing {n} has arity {}, expected 4", darts.len()),
                        });
                        continue;
                    }
                    let ok = dir(0) == Direction::Incoming
                        && dir(2) == Direction::Outgoing
                        && dir(1) != Direction::Unoriented
                        && dir(1) == dir(3).reversed();
                    if !ok {
                        violations.push(Violation {
                            kind: ViolationKind::CrossingOrientation,
                            node: Some(n),
                            dart: Some(darts[0]),
                            message: format!(
                                "crossing {n} does not have two strands passing through in order"
                            ),
                        });
                    }
                }
            }
        }
        for d in 0..m.dart_count() {
            let p = m.partner(d);
            if d < p {
                let (a, b) = (m.dart(d).direction, m.dart(p).direction);
                if a == Direction::Unoriented || a != b.reversed() {
                    violations.push(Violation {
                        kind: ViolationKind::ArcOrientation,
                        node: Some(m.dart(d).node),
                        dart: Some(d),
                        message: format!("arc at dart {d} is not coherently oriented"),
                    });
                }
            }
        }
        for (i, e) in m.euler().iter().enumerate() {
            if e.genus != 0 {
                let node = m.components()[i][0];
                violations.push(Violation {
                    kind: ViolationKind::NonPlanar,
                    node: Some(node),
                    dart: None,
                    message: format!(
                        "non-planar embedding: component of node {node} has V-E+F = {}",
                        e.vertices as i64 - e.edges as i64 + e.faces as i64
                    ),
                });
            }
        }
        ValidationReport { violations }
    }

    /// Key identifying the diagram up to relabeling and planar isotopy on the
    /// sphere (free loop chirality is not an invariant there).
    pub fn canonical_key(&self) -> String {
        let (_, codes) = self.map.canonicalized(false);
        let mut key = codes.join("|");
        let _ = write!(key, "|O{}", self.free_loops[0] + self.free_loops[1]);
        key
    }

    pub(crate) fn to_pd(&self) -> Pd {
        let m = &self.map;
        let nodes = (0..m.node_count())
            .map(|n| {
                Some(PdNode {
                    kind: *m.node(n),
                    ends: m
                        .darts_of(n)
                        .iter()
                        .map(|&d| (d.min(m.partner(d)), m.dart(d).direction))
                        .collect(),
                })
            })
            .collect();
        Pd {
            nodes,
            free_loops: self.free_loops,
            next_arc: m.dart_count(),
        }
    }
}

fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, c) in line.char_indices() {
        if c.is_whitespace() {
            if let Some(s) = start.take() {
                out.push((s, &line[s..i]));
            }
        } else if start.is_none() {
            start = Some(i);
        }
    }
    if let Some(s) = start {
        out.push((s, &line[s..]));
    }
    out.into_iter()
}

fn infer_directions(
    nodes: &[(DiagramNode, Vec<(u64, Option<Direction>)>)],
) -> Vec<Option<Direction>> {
    let total: usize = nodes.iter().map(|(_, e)| e.len()).sum();
    let mut fixed: Vec<Option<Direction>> = vec![None; total];
    let mut links: Vec<Vec<usize>> = vec![Vec::new(); total];
    let mut arc_first: BTreeMap<u64, usize> = BTreeMap::new();
    let mut k = 0;
    for (kind, ends) in nodes {
        let base = k;
        for (i, (arc, dir)) in ends.iter().enumerate() {
            fixed[k] = dir.or(match kind {
                DiagramNode::Vertex(Polarity::Source) => Some(Direction::Outgoing),
                DiagramNode::Vertex(Polarity::Sink) => Some(Direction::Incoming),
                DiagramNode::Crossing if i == 0 => Some(Direction::Incoming),
                DiagramNode::Crossing if i == 2 => Some(Direction::Outgoing),
                DiagramNode::Crossing => None,
            });
            if let Some(&other) = arc_first.get(arc) {
                links[other].push(k);
                links[k].push(other);
            } else {
                arc_first.insert(*arc, k);
            }
            k += 1;
        }
        if *kind == DiagramNode::Crossing && ends.len() == 4 {
            links[base + 1].push(base + 3);
            links[base + 3].push(base + 1);
        }
    }
    let mut dirs = fixed.clone();
    let propagate = |dirs: &mut Vec<Option<Direction>>, seeds: Vec<usize>| {
        let mut queue: VecDeque<usize> = seeds.into();
        while let Some(x) = queue.pop_front() {
            let want = dirs[x].expect("seeded").reversed();
            for &y in &links[x] {
                if dirs[y].is_none() {
                    dirs[y] = Some(want);
                    queue.push_back(y);
                }
            }
        }
    };
    let seeds = (0..total).filter(|&i| fixed[i].is_some()).collect();
    propagate(&mut dirs, seeds);
    for i in 0..total {
        if dirs[i].is_none() {
            dirs[i] = Some(Direction::Incoming);
            propagate(&mut dirs, vec![i]);
        }
    }
    dirs
}

/// Arc-labelled node list used for local surgery.
#[derive(Clone, Debug)]
pub(crate) struct Pd {
    pub nodes: Vec<Option<PdNode>>,
    pub free_loops: [usize; 2],
    pub next_arc: usize,
}

#[derive(Clone, Debug)]
pub(crate) struct PdNode {
    pub kind: DiagramNode,
    pub ends: Vec<(usize, Direction)>,
}

impl Pd {
    pub fn fresh_arc(&mut self) -> usize {
        self.next_arc += 1;
        self.next_arc
    }

    pub fn node(&self, n: NodeId) -> &PdNode {
        self.nodes[n].as_ref().expect("live node")
    }

    pub fn node_mut(&mut self, n: NodeId) -> &mut PdNode {
        self.nodes[n].as_mut().expect("live node")
    }

    pub fn push(&mut self, kind: DiagramNode, ends: Vec<(usize, Direction)>) -> NodeId {
        self.nodes.push(Some(PdNode { kind, ends }));
        self.nodes.len() - 1
    }

    /// Deletes nodes and joins pairs of arcs that met at them. Chains that
    /// close up become free loops of the given chirality slot.
    pub fn splice(&mut self, removed: &[NodeId], joins: &[(usize, usize)], loop_slot: usize) {
        for &n in removed {
            self.nodes[n] = None;
        }
        let mut parent: BTreeMap<usize, usize> = BTreeMap::new();
        fn find(parent: &mut BTreeMap<usize, usize>, x: usize) -> usize {
            let p = *parent.entry(x).or_insert(x);
            if p == x {
                return x;
            }
            let r = find(parent, p);
            parent.insert(x, r);
            r
        }
        for &(a, b) in joins {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent.insert(ra.max(rb), ra.min(rb));
            }
        }
        let arcs: Vec<usize> = parent.keys().copied().collect();
        let mut live: BTreeMap<usize, usize> = BTreeMap::new();
        for node in self.nodes.iter_mut().flatten() {
            for end in &mut node.ends {
                if parent.contains_key(&end.0) {
                    end.0 = find(&mut parent, end.0);
                    *live.entry(end.0).or_default() += 1;
                }
            }
        }
        let mut roots: Vec<usize> = arcs.iter().map(|&a| find(&mut parent, a)).collect();
        roots.sort_unstable();
        roots.dedup();
        for r in roots {
            if !live.contains_key(&r) {
                self.free_loops[loop_slot] += 1;
            }
        }
    }

    pub fn build(self) -> Result<GraphDiagram> {
        let nodes = self
            .nodes
            .into_iter()
            .flatten()
            .map(|n| {
                let ends = n
                    .ends
                    .into_iter()
                    .map(|(arc, direction)| End {
                        arc,
                        direction,
                        decor: (),
                    })
                    .collect();
                (n.kind, ends)
            })
            .collect();
        Ok(GraphDiagram {
            map: RotationMap::from_ends(nodes)?,
            free_loops: self.free_loops,
        })
    }
}
