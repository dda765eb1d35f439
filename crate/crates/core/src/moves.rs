//! Reidemeister-type moves on diagrams, and invariance certification.
//!
//! Ω1 adds or removes a kink, Ω2 a bigon of two crossings, Ω3 slides a
//! strand over a crossing, Ω4 slides a strand over or under a vertex, and
//! Ω5 twists two edges at a vertex. Every move is carried out as local
//! surgery on the arc-labelled node list and the result is validated, so a
//! site is only offered when its move yields a valid planar diagram.

use std::collections::BTreeSet;
use std::fmt;
use std::time::Instant;

use serde::Serialize;

use crate::diagram::{DiagramNode, GraphDiagram, Pd, PdNode};
use crate::engine::{equivalent, Budget, Equivalence, Trace};
use crate::error::{Error, Result};
use crate::laurent::Laurent;
use crate::map::{DartId, Direction, NodeId};
use crate::rules::RuleSet;
use crate::scalar::Scalar;
use crate::statesum::{bracket, BracketOptions};
use crate::sum::FormalSum;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum MoveKind {
    Omega1,
    Omega2,
    Omega3,
    Omega4,
    Omega5,
}

impl MoveKind {
    pub const ALL: [MoveKind; 5] = [
        MoveKind::Omega1,
        MoveKind::Omega2,
        MoveKind::Omega3,
        MoveKind::Omega4,
        MoveKind::Omega5,
    ];

    /// Crossing-count change of the forward move (Ω3 keeps the count).
    pub fn crossing_delta(self) -> i64 {
        match self {
            MoveKind::Omega1 | MoveKind::Omega4 | MoveKind::Omega5 => 1,
            MoveKind::Omega2 => 2,
            MoveKind::Omega3 => 0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        let t = s.trim().to_lowercase();
        let digit = t
            .strip_prefix("omega")
            .or_else(|| t.strip_prefix("ω"))
            .or_else(|| t.strip_prefix('r'))
            .unwrap_or(&t);
        match digit {
            "1" => Ok(MoveKind::Omega1),
            "2" => Ok(MoveKind::Omega2),
            "3" => Ok(MoveKind::Omega3),
            "4" => Ok(MoveKind::Omega4),
            "5" => Ok(MoveKind::Omega5),
            _ => Err(Error::syntax(
                1,
                1,
                format!("unknown move '{s}' (expected omega1..omega5)"),
            )),
        }
    }
}

impl fmt::Display for MoveKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let k = MoveKind::ALL
            .iter()
            .position(|m| m == self)
            .expect("listed")
            + 1;
        write!(f, "Ω{k}")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum MoveDirection {
    /// Adds crossings (Ω3: slides the triangle).
    Apply,
    /// Removes crossings.
    Inverse,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum MoveSite {
    /// An arc, named by its smaller dart.
    Arc(DartId),
    /// A free loop of the given chirality slot.
    FreeLoop(usize),
    /// Face darts (two on one face for Ω2, a bigon or triangle otherwise).
    Darts(Vec<DartId>),
    /// A node and one of its slots.
    NodeSlot(NodeId, usize),
}

impl fmt::Display for MoveSite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MoveSite::Arc(d) => write!(f, "arc@{d}"),
            MoveSite::FreeLoop(s) => write!(f, "loop{s}"),
            MoveSite::Darts(ds) => {
                let v: Vec<String> = ds.iter().map(|d| d.to_string()).collect();
                write!(f, "darts[{}]", v.join(","))
            }
            MoveSite::NodeSlot(n, s) => write!(f, "node{n}.{s}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct MoveInstance {
    pub kind: MoveKind,
    pub direction: MoveDirection,
    pub site: MoveSite,
    /// Index among the variants of this site.
    pub variant: usize,
    /// Human-readable variant class.
    pub label: String,
}

impl fmt::Display for MoveInstance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dir = match self.direction {
            MoveDirection::Apply => "",
            MoveDirection::Inverse => "⁻¹",
        };
        write!(
            f,
            "{}{dir} {} #{} ({})",
            self.kind, self.site, self.variant, self.label
        )
    }
}

type Ends = [(usize, Direction); 4];

/// A crossing from ends listed counterclockwise; `odd_over` says the strand
/// at positions 1 and 3 is the overstrand. Rotated so the understrand
/// enters at slot 0.
fn crossing(pos: Ends, odd_over: bool) -> Result<PdNode> {
    let under = if odd_over { [0, 2] } else { [1, 3] };
    let start = under
        .into_iter()
        .find(|&u| pos[u].1 == Direction::Incoming)
        .ok_or_else(|| {
            Error::InvalidSite("understrand is not oriented through the crossing".into())
        })?;
    Ok(PdNode {
        kind: DiagramNode::Crossing,
        ends: (0..4).map(|k| pos[(start + k) % 4]).collect(),
    })
}

/// Ends of a crossing rotated to start at `slot`, with whether the strand
/// at rotated positions 0 and 2 is the overstrand.
fn rotated(node: &PdNode, slot: usize) -> (Ends, bool) {
    let e = &node.ends;
    (
        [
            e[slot % 4],
            e[(slot + 1) % 4],
            e[(slot + 2) % 4],
            e[(slot + 3) % 4],
        ],
        slot % 2 == 1,
    )
}

fn is_crossing(d: &GraphDiagram, n: NodeId) -> bool {
    *d.map().node(n) == DiagramNode::Crossing
}

/// Sites of one kind and direction, each with every variant, in
/// deterministic order. Only instances whose move succeeds are listed.
pub fn enumerate_move_sites(
    d: &GraphDiagram,
    kind: MoveKind,
    direction: MoveDirection,
) -> Vec<MoveInstance> {
    candidates(d, kind, direction)
        .into_iter()
        .filter(|m| apply_move(d, m).is_ok())
        .collect()
}

fn instance(
    kind: MoveKind,
    direction: MoveDirection,
    site: MoveSite,
    variant: usize,
    label: &str,
) -> MoveInstance {
    MoveInstance {
        kind,
        direction,
        site,
        variant,
        label: label.to_string(),
    }
}

fn candidates(d: &GraphDiagram, kind: MoveKind, direction: MoveDirection) -> Vec<MoveInstance> {
    use MoveDirection::*;
    use MoveKind::*;
    let m = d.map();
    let mut out = Vec::new();
    match (kind, direction) {
        (Omega1, Apply) => {
            const LABELS: [&str; 4] = [
                "negative, under first",
                "positive, under first",
                "negative, over first",
                "positive, over first",
            ];
            let mut sites: Vec<MoveSite> = (0..m.dart_count())
                .filter(|&x| x < m.partner(x))
                .map(MoveSite::Arc)
                .collect();
            sites.extend(
                (0..2)
                    .filter(|&s| d.free_loops()[s] > 0)
                    .map(MoveSite::FreeLoop),
            );
            for site in sites {
                for (v, label) in LABELS.iter().enumerate() {
                    out.push(instance(kind, direction, site.clone(), v, label));
                }
            }
        }
        (Omega1, Inverse) => {
            for n in (0..m.node_count()).filter(|&n| is_crossing(d, n)) {
                for s in 0..4 {
                    let x = m.darts_of(n)[s];
                    if m.partner(x) == m.darts_of(n)[(s + 1) % 4] {
                        out.push(instance(
                            kind,
                            direction,
                            MoveSite::NodeSlot(n, s),
                            0,
                            "kink",
                        ));
                    }
                }
            }
        }
        (Omega2, Apply) => {
            for face in m.faces() {
                for i in 0..face.len() {
                    for j in i + 1..face.len() {
                        let (a, b) = (face[i], face[j]);
                        if a == b || m.partner(a) == b {
                            continue;
                        }
                        let parallel = (m.dart(a).direction == Direction::Outgoing)
                            != (m.dart(b).direction == Direction::Outgoing);
                        let class = if parallel { "parallel" } else { "antiparallel" };
                        for v in 0..2 {
                            let over = if v == 0 { "first over" } else { "second over" };
                            out.push(instance(
                                kind,
                                direction,
                                MoveSite::Darts(vec![a, b]),
                                v,
                                &format!("{class}, {over}"),
                            ));
                        }
                    }
                }
            }
        }
        (Omega2, Inverse) => {
            for face in m.faces() {
                if face.len() == 2 && face.iter().all(|&x| is_crossing(d, m.dart(x).node)) {
                    out.push(instance(kind, direction, MoveSite::Darts(face), 0, "bigon"));
                }
            }
        }
        (Omega3, _) => {
            for face in m.faces() {
                if face.len() == 3 && face.iter().all(|&x| is_crossing(d, m.dart(x).node)) {
                    let nodes: BTreeSet<NodeId> = face.iter().map(|&x| m.dart(x).node).collect();
                    if nodes.len() == 3 {
                        let forward: Vec<bool> = face
                            .iter()
                            .map(|&x| m.dart(x).direction == Direction::Outgoing)
                            .collect();
                        let label = if forward.iter().all(|&f| f == forward[0]) {
                            "cyclic"
                        } else {
                            "braidlike"
                        };
                        out.push(instance(kind, direction, MoveSite::Darts(face), 0, label));
                    }
                }
            }
        }
        (Omega4, Apply) => {
            for v in (0..m.node_count()).filter(|&n| !is_crossing(d, n)) {
                for j in 0..3 {
                    let c = m.dart(m.partner(m.darts_of(v)[j])).node;
                    if is_crossing(d, c) {
                        let over = m.slot(m.partner(m.darts_of(v)[j])) % 2 == 0;
                        let label = if over { "over" } else { "under" };
                        out.push(instance(
                            kind,
                            direction,
                            MoveSite::NodeSlot(v, j),
                            0,
                            label,
                        ));
                    }
                }
            }
        }
        (Omega4, Inverse) => {
            for v in (0..m.node_count()).filter(|&n| !is_crossing(d, n)) {
                for j in 0..3 {
                    let c1 = m.dart(m.partner(m.darts_of(v)[(j + 1) % 3])).node;
                    let c2 = m.dart(m.partner(m.darts_of(v)[(j + 2) % 3])).node;
                    if c1 != c2 && is_crossing(d, c1) && is_crossing(d, c2) {
                        out.push(instance(
                            kind,
                            direction,
                            MoveSite::NodeSlot(v, j),
                            0,
                            "strand",
                        ));
                    }
                }
            }
        }
        (Omega5, Apply) => {
            for v in (0..m.node_count()).filter(|&n| !is_crossing(d, n)) {
                for j in 0..3 {
                    for (var, label) in ["first over", "second over"].iter().enumerate() {
                        out.push(instance(
                            kind,
                            direction,
                            MoveSite::NodeSlot(v, j),
                            var,
                            label,
                        ));
                    }
                }
            }
        }
        (Omega5, Inverse) => {
            for v in (0..m.node_count()).filter(|&n| !is_crossing(d, n)) {
                for j in 0..3 {
                    let p = m.partner(m.darts_of(v)[j]);
                    let q = m.partner(m.darts_of(v)[(j + 1) % 3]);
                    let c = m.dart(p).node;
                    if c == m.dart(q).node && is_crossing(d, c) && m.slot(q) == (m.slot(p) + 3) % 4
                    {
                        out.push(instance(
                            kind,
                            direction,
                            MoveSite::NodeSlot(v, j),
                            0,
                            "twist",
                        ));
                    }
                }
            }
        }
    }
    out
}

/// The diagram after a move. Fails when the instance does not describe a
/// valid site or the result is not a valid diagram.
pub fn apply_move(d: &GraphDiagram, mv: &MoveInstance) -> Result<GraphDiagram> {
    let bad = |msg: &str| Error::InvalidSite(format!("{mv}: {msg}"));
    let m = d.map();
    let mut pd = d.to_pd();
    let dart_ok = |x: DartId| x < m.dart_count();
    let slot_end = |pd: &Pd, x: DartId| pd.node(m.dart(x).node).ends[m.slot(x)];
    use MoveDirection::*;
    use MoveKind::*;
    match (mv.kind, mv.direction, &mv.site) {
        (Omega1, Apply, site) => {
            if mv.variant > 3 {
                return Err(bad("no such variant"));
            }
            let (e1, l, e2) = match *site {
                MoveSite::Arc(a) if dart_ok(a) => {
                    let tail = if m.dart(a).direction == Direction::Outgoing {
                        a
                    } else {
                        m.partner(a)
                    };
                    let head = m.partner(tail);
                    let (e1, e2, l) = (pd.fresh_arc(), pd.fresh_arc(), pd.fresh_arc());
                    pd.node_mut(m.dart(tail).node).ends[m.slot(tail)].0 = e1;
                    pd.node_mut(m.dart(head).node).ends[m.slot(head)].0 = e2;
                    (e1, l, e2)
                }
                MoveSite::FreeLoop(s) if s < 2 && pd.free_loops[s] > 0 => {
                    pd.free_loops[s] -= 1;
                    let (e, l) = (pd.fresh_arc(), pd.fresh_arc());
                    (e, l, e)
                }
                _ => return Err(bad("not an arc")),
            };
            use Direction::{Incoming as I, Outgoing as O};
            let ends = match mv.variant {
                0 => vec![(e1, I), (l, I), (l, O), (e2, O)],
                1 => vec![(e1, I), (e2, O), (l, O), (l, I)],
                2 => vec![(l, I), (e1, I), (e2, O), (l, O)],
                _ => vec![(l, I), (l, O), (e2, O), (e1, I)],
            };
            pd.push(DiagramNode::Crossing, ends);
        }
        (Omega1, Inverse, &MoveSite::NodeSlot(c, s)) => {
            if c >= m.node_count() || !is_crossing(d, c) || s > 3 {
                return Err(bad("not a crossing slot"));
            }
            let darts = m.darts_of(c);
            if m.partner(darts[s]) != darts[(s + 1) % 4] {
                return Err(bad("no kink at this slot"));
            }
            let ends = &pd.node(c).ends;
            let (a, b) = (ends[(s + 2) % 4].0, ends[(s + 3) % 4].0);
            pd.splice(&[c], &[(a, b)], 0);
        }
        (Omega2, Apply, MoveSite::Darts(ds)) => {
            let &[da, db] = ds.as_slice() else {
                return Err(bad("needs two darts"));
            };
            if !dart_ok(da) || !dart_ok(db) || da == db || m.partner(da) == db || mv.variant > 1 {
                return Err(bad("needs two distinct edges"));
            }
            let fi = m.face_index();
            if fi[da] != fi[db] {
                return Err(bad("darts are not on one face"));
            }
            // strand a runs east along the top of the face, strand b west
            // along its bottom; b is pushed north across a, crossing it at
            // C2 (east) and then C1 (west)
            let (pa, pb) = (m.partner(da), m.partner(db));
            let a_east = m.dart(da).direction == Direction::Outgoing;
            let b_west = m.dart(db).direction == Direction::Outgoing;
            let (a1, mid, a2) = (pd.fresh_arc(), pd.fresh_arc(), pd.fresh_arc());
            let (b1, top, b2) = (pd.fresh_arc(), pd.fresh_arc(), pd.fresh_arc());
            pd.node_mut(m.dart(da).node).ends[m.slot(da)].0 = a1;
            pd.node_mut(m.dart(pa).node).ends[m.slot(pa)].0 = a2;
            pd.node_mut(m.dart(db).node).ends[m.slot(db)].0 = b1;
            pd.node_mut(m.dart(pb).node).ends[m.slot(pb)].0 = b2;
            let dir = |forward: bool, entering: bool| {
                if forward == entering {
                    Direction::Incoming
                } else {
                    Direction::Outgoing
                }
            };
            // positions: east, north, west, south; strand a at 0/2
            let c2 = [
                (a2, dir(a_east, false)),
                (top, dir(b_west, false)),
                (mid, dir(a_east, true)),
                (b1, dir(b_west, true)),
            ];
            let c1 = [
                (mid, dir(a_east, false)),
                (top, dir(b_west, true)),
                (a1, dir(a_east, true)),
                (b2, dir(b_west, false)),
            ];
            let a_over = mv.variant == 0;
            let n2 = crossing(c2, !a_over)?;
            let n1 = crossing(c1, !a_over)?;
            pd.nodes.push(Some(n2));
            pd.nodes.push(Some(n1));
        }
        (Omega2, Inverse, MoveSite::Darts(ds)) => {
            let &[f1, f2] = ds.as_slice() else {
                return Err(bad("needs a bigon"));
            };
            if !dart_ok(f1) || !dart_ok(f2) || m.face_next(f1) != f2 || m.face_next(f2) != f1 {
                return Err(bad("not a bigon face"));
            }
            let (c1, c2) = (m.dart(f1).node, m.dart(f2).node);
            if c1 == c2 || !is_crossing(d, c1) || !is_crossing(d, c2) {
                return Err(bad("bigon needs two crossings"));
            }
            let (g1, g2) = (m.partner(f1), m.partner(f2));
            if m.slot(f1) % 2 != m.slot(g1) % 2 {
                return Err(bad("strands alternate over and under"));
            }
            let far = |pd: &Pd, x: DartId| pd.node(m.dart(x).node).ends[(m.slot(x) + 2) % 4].0;
            let joins = [(far(&pd, f1), far(&pd, g1)), (far(&pd, f2), far(&pd, g2))];
            pd.splice(&[c1, c2], &joins, 0);
        }
        (Omega3, _, MoveSite::Darts(ds)) => {
            let &[f0, f1, f2] = ds.as_slice() else {
                return Err(bad("needs a triangle"));
            };
            let f = [f0, f1, f2];
            if f.iter().any(|&x| !dart_ok(x)) || (0..3).any(|i| m.face_next(f[i]) != f[(i + 1) % 3])
            {
                return Err(bad("not a triangle face"));
            }
            let x: Vec<NodeId> = f.iter().map(|&y| m.dart(y).node).collect();
            if x.iter().collect::<BTreeSet<_>>().len() != 3 || x.iter().any(|&n| !is_crossing(d, n))
            {
                return Err(bad("triangle needs three crossings"));
            }
            // corner k+1 seen from the triangle: [T_k, T_(k+1), out_k, in_(k+1)]
            let corner: Vec<(Ends, bool)> = (0..3)
                .map(|k| {
                    let p = m.partner(f[k]);
                    rotated(pd.node(m.dart(p).node), m.slot(p))
                })
                .collect();
            let over: Vec<bool> = corner.iter().map(|c| c.1).collect();
            if over.iter().all(|&o| o == over[0]) {
                return Err(bad("cyclic heights"));
            }
            let mut new_nodes = Vec::new();
            for k in 0..3 {
                let (e, k_over) = corner[k];
                let in_k = corner[(k + 2) % 3].0[3];
                let out_next = corner[(k + 1) % 3].0[2];
                let pos = [
                    (e[0].0, e[2].1),
                    (e[1].0, e[3].1),
                    (in_k.0, e[0].1),
                    (out_next.0, e[1].1),
                ];
                new_nodes.push((m.dart(m.partner(f[k])).node, crossing(pos, !k_over)?));
            }
            for (n, node) in new_nodes {
                pd.nodes[n] = Some(node);
            }
        }
        (Omega4, Apply, &MoveSite::NodeSlot(v, j)) => {
            if v >= m.node_count() || is_crossing(d, v) || j > 2 {
                return Err(bad("not a vertex slot"));
            }
            let r = m.partner(m.darts_of(v)[j]);
            let c = m.dart(r).node;
            if !is_crossing(d, c) || c == v {
                return Err(bad("edge does not reach a crossing"));
            }
            // e = [r, sL, x, sR]; the sliding strand sits at positions 1/3
            // and keeps its height, so in the new crossings, where it sits
            // at 0/2, positions 1/3 are over exactly when the edge was
            let (e, edge_over) = rotated(pd.node(c), m.slot(r));
            let (s_l, x, s_r) = (e[1], e[2], e[3]);
            let vd = |k: usize| pd.node(v).ends[(j + k) % 3];
            let (v1, v2) = (vd(1), vd(2));
            if [v1.0, v2.0].contains(&x.0)
                || [v1.0, v2.0].contains(&s_l.0)
                || [v1.0, v2.0].contains(&s_r.0)
            {
                return Err(bad("strand meets the vertex's other edges"));
            }
            let (r1, r2, mid) = (pd.fresh_arc(), pd.fresh_arc(), pd.fresh_arc());
            let c1 = [
                s_r,
                (v1.0, v1.1),
                (mid, s_r.1.reversed()),
                (r1, v1.1.reversed()),
            ];
            let c2 = [(mid, s_r.1), (v2.0, v2.1), s_l, (r2, v2.1.reversed())];
            let n1 = crossing(c1, edge_over)?;
            let n2 = crossing(c2, edge_over)?;
            {
                let vn = pd.node_mut(v);
                vn.ends[j].0 = x.0;
                vn.ends[(j + 1) % 3].0 = r1;
                vn.ends[(j + 2) % 3].0 = r2;
            }
            pd.nodes[c] = None;
            pd.nodes.push(Some(n1));
            pd.nodes.push(Some(n2));
        }
        (Omega4, Inverse, &MoveSite::NodeSlot(v, j)) => {
            if v >= m.node_count() || is_crossing(d, v) || j > 2 {
                return Err(bad("not a vertex slot"));
            }
            let q1 = m.partner(m.darts_of(v)[(j + 1) % 3]);
            let q2 = m.partner(m.darts_of(v)[(j + 2) % 3]);
            let (c1, c2) = (m.dart(q1).node, m.dart(q2).node);
            if c1 == c2 || !is_crossing(d, c1) || !is_crossing(d, c2) {
                return Err(bad("needs two crossings"));
            }
            // c1 = [sR, y1, m, r1], c2 = [m, y2, sL, r2]
            let (e1, _) = rotated(pd.node(c1), m.slot(q1) + 1);
            let (e2, _) = rotated(pd.node(c2), m.slot(q2) + 1);
            let mid1 = m.darts_of(c1)[(m.slot(q1) + 3) % 4];
            let mid2 = m.darts_of(c2)[(m.slot(q2) + 1) % 4];
            if m.partner(mid1) != mid2 {
                return Err(bad("crossings are not joined by the strand"));
            }
            if m.slot(q1) % 2 != m.slot(q2) % 2 {
                return Err(bad("strand changes height"));
            }
            // strand at c1 positions 0/2 is over when they are odd slots
            let strand_over = (m.slot(q1) + 1) % 2 == 1;
            let (s_r, y1, s_l, y2) = (e1[0], e1[1], e2[2], e2[1]);
            let vj = pd.node(v).ends[j];
            let r = pd.fresh_arc();
            let pos = [(r, vj.1.reversed()), s_l, (vj.0, vj.1), s_r];
            let n = crossing(pos, strand_over)?;
            {
                let vn = pd.node_mut(v);
                vn.ends[j].0 = r;
                vn.ends[(j + 1) % 3].0 = y1.0;
                vn.ends[(j + 2) % 3].0 = y2.0;
            }
            pd.nodes[c1] = None;
            pd.nodes[c2] = None;
            pd.nodes.push(Some(n));
        }
        (Omega5, Apply, &MoveSite::NodeSlot(v, j)) => {
            if v >= m.node_count() || is_crossing(d, v) || j > 2 || mv.variant > 1 {
                return Err(bad("not a vertex slot"));
            }
            let (ea, eb) = (pd.node(v).ends[j], pd.node(v).ends[(j + 1) % 3]);
            let (p, q) = (pd.fresh_arc(), pd.fresh_arc());
            // C = [ea, eb, q, p]; strands ea-q and eb-p
            let pos = [
                (ea.0, ea.1),
                (eb.0, eb.1),
                (q, eb.1.reversed()),
                (p, ea.1.reversed()),
            ];
            let n = crossing(pos, mv.variant == 1)?;
            {
                let vn = pd.node_mut(v);
                vn.ends[j].0 = p;
                vn.ends[(j + 1) % 3].0 = q;
            }
            pd.nodes.push(Some(n));
        }
        (Omega5, Inverse, &MoveSite::NodeSlot(v, j)) => {
            if v >= m.node_count() || is_crossing(d, v) || j > 2 {
                return Err(bad("not a vertex slot"));
            }
            let p = m.partner(m.darts_of(v)[j]);
            let q = m.partner(m.darts_of(v)[(j + 1) % 3]);
            let c = m.dart(p).node;
            if c != m.dart(q).node || !is_crossing(d, c) || m.slot(q) != (m.slot(p) + 3) % 4 {
                return Err(bad("no twist at this vertex slot"));
            }
            let ea = slot_end(&pd, m.darts_of(c)[(m.slot(p) + 1) % 4]);
            let eb = slot_end(&pd, m.darts_of(c)[(m.slot(p) + 2) % 4]);
            {
                let vn = pd.node_mut(v);
                vn.ends[j].0 = ea.0;
                vn.ends[(j + 1) % 3].0 = eb.0;
            }
            pd.nodes[c] = None;
        }
        _ => return Err(bad("site does not fit the move")),
    }
    let out = pd.build().map_err(|e| bad(&e.to_string()))?;
    let report = out.validate();
    if !report.is_valid() {
        return Err(bad(&report.to_string()));
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Certificate {
    Certified {
        trace: Trace,
    },
    /// Not shown equal within budget. `factor` is set when the invariants
    /// are known to differ by that unit.
    Unknown {
        explored: usize,
        reason: String,
        factor: Option<String>,
    },
}

/// `b = u · a` for a unit `u`, found from the leading terms.
pub fn unit_factor<R: Scalar>(a: &FormalSum<R>, b: &FormalSum<R>) -> Option<Laurent<R>> {
    let (k, ca, _) = a.iter().next()?;
    let cb = b.coefficient(k)?;
    let lead = |c: &Laurent<R>| {
        let (mono, coeff) = c.terms().last().expect("nonzero");
        Laurent::monomial(coeff.clone(), mono.clone())
    };
    let u = lead(cb).exact_div(&lead(ca))?;
    (u.is_unit() && a.scaled(&u).canonical_hash() == b.canonical_hash()).then_some(u)
}

/// Checks that a move leaves the invariant unchanged, by comparing the
/// normalized invariants of both diagrams with a certified search. When the
/// search fails and the invariants differ by a unit (Ω1 under a framed
/// invariant), the unit is reported.
pub fn certify_invariance<R: Scalar>(
    d: &GraphDiagram,
    mv: &MoveInstance,
    rules: &RuleSet<R>,
    opts: BracketOptions,
    budget: Budget,
) -> Result<Certificate> {
    let moved = apply_move(d, mv)?;
    let (a, _) = bracket(d, rules, opts)?;
    let (b, _) = bracket(&moved, rules, opts)?;
    Ok(match equivalent(rules, &a, &b, budget)? {
        Equivalence::Equal { trace } => Certificate::Certified { trace },
        Equivalence::Unknown { explored, reason } => match unit_factor(&a, &b) {
            Some(u) => {
                let u = u.display(&rules.vars).to_string();
                Certificate::Unknown {
                    explored,
                    reason: format!("invariants differ by the unit factor {u}"),
                    factor: Some(u),
                }
            }
            None => Certificate::Unknown {
                explored,
                reason,
                factor: None,
            },
        },
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub diagram: String,
    #[serde(rename = "move")]
    pub kind: String,
    pub direction: MoveDirection,
    pub site: String,
    pub variant: String,
    pub outcome: String,
    pub factor: Option<String>,
    pub trace_length: usize,
    /// Why the cell could not be computed, for outcome `error`.
    pub error: Option<String>,
    pub wall_ms: f64,
}

/// Certifies every move instance of the given kinds on a diagram. Cells
/// that fail are recorded with outcome `error` rather than aborting.
pub fn sweep<R: Scalar>(
    name: &str,
    d: &GraphDiagram,
    kinds: &[MoveKind],
    rules: &RuleSet<R>,
    opts: BracketOptions,
    budget: Budget,
) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for &kind in kinds {
        for direction in [MoveDirection::Apply, MoveDirection::Inverse] {
            if kind == MoveKind::Omega3 && direction == MoveDirection::Inverse {
                continue; // the triangle slide is its own inverse
            }
            for mv in enumerate_move_sites(d, kind, direction) {
                let start = Instant::now();
                let (outcome, factor, trace_length, error) =
                    match certify_invariance(d, &mv, rules, opts, budget) {
                        Ok(Certificate::Certified { trace }) => {
                            ("certified", None, trace.len(), None)
                        }
                        Ok(Certificate::Unknown { factor, .. }) => ("unknown", factor, 0, None),
                        Err(e) => ("error", None, 0, Some(e.to_string())),
                    };
                rows.push(SweepRow {
                    diagram: name.to_string(),
                    kind: kind.to_string(),
                    direction,
                    site: mv.site.to_string(),
                    variant: mv.label.clone(),
                    outcome: outcome.to_string(),
                    factor,
                    trace_length,
                    error,
                    wall_ms: start.elapsed().as_secs_f64() * 1e3,
                });
            }
        }
    }
    rows
}
