//! Combinatorial maps (rotation systems) shared by diagrams and trigraphs.
//!
//! Every edge is a pair of darts. Each node owns its darts in
//! counterclockwise order; for "anchored" nodes (crossings, boundary legs) the
//! first dart in that order is significant and is preserved by every
//! transformation. Faces are the orbits of `next_at_node ∘ partner`, which
//! walk each face keeping it on the right.

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type DartId = usize;
pub type NodeId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    Outgoing,
    Incoming,
    Unoriented,
}

impl Direction {
    pub fn reversed(self) -> Self {
        match self {
            Direction::Outgoing => Direction::Incoming,
            Direction::Incoming => Direction::Outgoing,
            Direction::Unoriented => Direction::Unoriented,
        }
    }

    fn code(self) -> char {
        match self {
            Direction::Outgoing => '>',
            Direction::Incoming => '<',
            Direction::Unoriented => '-',
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Dart {
    pub id: DartId,
    pub node: NodeId,
    pub partner: DartId,
    pub next_at_node: DartId,
    pub direction: Direction,
}

/// Decoration carried by a node.
pub trait NodeDecor: Clone + std::fmt::Debug + PartialEq {
    /// Whether the starting dart of this node's rotation is significant.
    fn anchored(&self) -> bool;
    /// Injective textual code used by canonical traversals.
    fn code(&self) -> String;
}

/// Decoration carried by an edge (shared by both of its darts).
pub trait EdgeDecor: Clone + std::fmt::Debug + PartialEq {
    fn code(&self) -> String;
}

impl EdgeDecor for () {
    fn code(&self) -> String {
        String::new()
    }
}

/// One end of an arc while a map is being assembled: the arc key pairs ends.
#[derive(Clone, Debug, PartialEq)]
pub struct End<K, E> {
    pub arc: K,
    pub direction: Direction,
    pub decor: E,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RotationMap<N, E> {
    nodes: Vec<N>,
    node_darts: Vec<Vec<DartId>>,
    darts: Vec<Dart>,
    edge_decor: Vec<E>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EulerData {
    pub vertices: usize,
    pub edges: usize,
    pub faces: usize,
    pub genus: i64,
}

impl<N: NodeDecor, E: EdgeDecor> Default for RotationMap<N, E> {
    fn default() -> Self {
        RotationMap {
            nodes: Vec::new(),
            node_darts: Vec::new(),
            darts: Vec::new(),
            edge_decor: Vec::new(),
        }
    }
}

impl<N: NodeDecor, E: EdgeDecor> RotationMap<N, E> {
    /// Builds a map from nodes listing their arc ends counterclockwise.
    /// Every arc key must occur exactly twice. Decorations of the two ends
    /// are taken from the first occurrence.
    pub fn from_ends<K>(nodes: Vec<(N, Vec<End<K, E>>)>) -> Result<Self>
    where
        K: std::hash::Hash + Eq + Clone + std::fmt::Debug,
    {
        let mut map = RotationMap::default();
        let mut seen: HashMap<K, (DartId, usize)> = HashMap::new();
        for (node_id, (decor, ends)) in nodes.into_iter().enumerate() {
            let first = map.darts.len();
            let arity = ends.len();
            let mut ids = Vec::with_capacity(arity);
            for (i, end) in ends.into_iter().enumerate() {
                let id = first + i;
                ids.push(id);
                map.darts.push(Dart {
                    id,
                    node: node_id,
                    partner: usize::MAX,
                    next_at_node: first + (i + 1) % arity,
                    direction: end.direction,
                });
                map.edge_decor.push(end.decor);
                let entry = seen.entry(end.arc.clone()).or_insert((usize::MAX, 0));
                entry.1 += 1;
                match entry.1 {
                    1 => entry.0 = id,
                    2 => {
                        let other = entry.0;
                        map.darts[other].partner = id;
                        map.darts[id].partner = other;
                        map.edge_decor[id] = map.edge_decor[other].clone();
                    }
                    _ => {
                        return Err(Error::InvalidDiagram(format!(
                            "arc {:?} appears more than twice",
                            end.arc
                        )))
                    }
                }
            }
            map.nodes.push(decor);
            map.node_darts.push(ids);
        }
        if let Some((k, _)) = seen.iter().find(|(_, v)| v.1 != 2) {
            return Err(Error::InvalidDiagram(format!(
                "arc {k:?} appears only once"
            )));
        }
        Ok(map)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn dart_count(&self) -> usize {
        self.darts.len()
    }

    pub fn edge_count(&self) -> usize {
        self.darts.len() / 2
    }

    pub fn node(&self, n: NodeId) -> &N {
        &self.nodes[n]
    }

    pub fn nodes(&self) -> &[N] {
        &self.nodes
    }

    pub fn dart(&self, d: DartId) -> &Dart {
        &self.darts[d]
    }

    pub fn darts(&self) -> &[Dart] {
        &self.darts
    }

    pub fn decor(&self, d: DartId) -> &E {
        &self.edge_decor[d]
    }

    /// Darts of a node in counterclockwise order from its first dart.
    pub fn darts_of(&self, n: NodeId) -> &[DartId] {
        &self.node_darts[n]
    }

    pub fn arity(&self, n: NodeId) -> usize {
        self.node_darts[n].len()
    }

    /// Position of a dart within its node's rotation list.
    pub fn slot(&self, d: DartId) -> usize {
        let n = self.darts[d].node;
        self.node_darts[n]
            .iter()
            .position(|&x| x == d)
            .expect("dart belongs to its node")
    }

    pub fn partner(&self, d: DartId) -> DartId {
        self.darts[d].partner
    }

    pub fn next_at_node(&self, d: DartId) -> DartId {
        self.darts[d].next_at_node
    }

    pub fn prev_at_node(&self, d: DartId) -> DartId {
        let n = self.darts[d].node;
        let list = &self.node_darts[n];
        let i = self.slot(d);
        list[(i + list.len() - 1) % list.len()]
    }

    /// Next dart along the face on the right of `d`.
    pub fn face_next(&self, d: DartId) -> DartId {
        self.next_at_node(self.partner(d))
    }

    /// Faces as dart orbits, in order of their smallest dart.
    pub fn faces(&self) -> Vec<Vec<DartId>> {
        let mut seen = vec![false; self.darts.len()];
        let mut faces = Vec::new();
        for start in 0..self.darts.len() {
            if seen[start] {
                continue;
            }
            let mut face = Vec::new();
            let mut d = start;
            while !seen[d] {
                seen[d] = true;
                face.push(d);
                d = self.face_next(d);
            }
            faces.push(face);
        }
        faces
    }

    /// Face index of every dart.
    pub fn face_index(&self) -> Vec<usize> {
        let mut idx = vec![0; self.darts.len()];
        for (f, face) in self.faces().iter().enumerate() {
            for &d in face {
                idx[d] = f;
            }
        }
        idx
    }

    /// Connected components as sorted node lists, ordered by smallest node.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut comp = vec![usize::MAX; self.nodes.len()];
        let mut out = Vec::new();
        for s in 0..self.nodes.len() {
            if comp[s] != usize::MAX {
                continue;
            }
            let c = out.len();
            let mut members = vec![s];
            comp[s] = c;
            let mut i = 0;
            while i < members.len() {
                let n = members[i];
                i += 1;
                for &d in &self.node_darts[n] {
                    let m = self.darts[self.darts[d].partner].node;
                    if comp[m] == usize::MAX {
                        comp[m] = c;
                        members.push(m);
                    }
                }
            }
            members.sort_unstable();
            out.push(members);
        }
        out
    }

    /// Vertex, edge and face counts with genus for each component.
    pub fn euler(&self) -> Vec<EulerData> {
        let face_of = self.face_index();
        self.components()
            .iter()
            .map(|members| {
                let darts: Vec<DartId> = members
                    .iter()
                    .flat_map(|&n| self.node_darts[n].iter().copied())
                    .collect();
                let mut faces: Vec<usize> = darts.iter().map(|&d| face_of[d]).collect();
                faces.sort_unstable();
                faces.dedup();
                let v = members.len();
                let e = darts.len() / 2;
                let f = faces.len();
                let chi = v as i64 - e as i64 + f as i64;
                EulerData {
                    vertices: v,
                    edges: e,
                    faces: f,
                    genus: (2 - chi) / 2,
                }
            })
            .collect()
    }

    /// Structural self-check of the dart tables.
    pub fn check_structure(&self) -> Result<()> {
        for d in &self.darts {
            let p = &self.darts[d.partner];
            if d.partner == d.id || p.partner != d.id {
                return Err(Error::InvalidDiagram(format!(
                    "dart {} has a bad partner",
                    d.id
                )));
            }
        }
        for (n, list) in self.node_darts.iter().enumerate() {
            for (i, &d) in list.iter().enumerate() {
                if self.darts[d].node != n
                    || self.darts[d].next_at_node != list[(i + 1) % list.len()]
                {
                    return Err(Error::InvalidDiagram(format!(
                        "rotation at node {n} is inconsistent"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Rebuilds the map with the given node and dart renumbering; non-anchored
    /// nodes may have their rotation start shifted by `shift[node]`.
    pub fn relabeled(&self, node_perm: &[NodeId], dart_perm: &[DartId], shift: &[usize]) -> Self {
        let mut nodes = vec![None; self.nodes.len()];
        let mut node_darts = vec![Vec::new(); self.nodes.len()];
        for (n, decor) in self.nodes.iter().enumerate() {
            let list = &self.node_darts[n];
            let k = if decor.anchored() || list.is_empty() {
                0
            } else {
                shift[n] % list.len()
            };
            let rotated: Vec<DartId> = (0..list.len())
                .map(|i| dart_perm[list[(i + k) % list.len()]])
                .collect();
            nodes[node_perm[n]] = Some(decor.clone());
            node_darts[node_perm[n]] = rotated;
        }
        let mut darts = vec![
            Dart {
                id: 0,
                node: 0,
                partner: 0,
                next_at_node: 0,
                direction: Direction::Unoriented
            };
            self.darts.len()
        ];
        let mut edge_decor = vec![None; self.darts.len()];
        for d in &self.darts {
            let id = dart_perm[d.id];
            darts[id] = Dart {
                id,
                node: node_perm[d.node],
                partner: dart_perm[d.partner],
                next_at_node: dart_perm[d.next_at_node],
                direction: d.direction,
            };
            edge_decor[id] = Some(self.edge_decor[d.id].clone());
        }
        RotationMap {
            nodes: nodes.into_iter().map(|n| n.expect("permutation")).collect(),
            node_darts,
            darts,
            edge_decor: edge_decor
                .into_iter()
                .map(|e| e.expect("permutation"))
                .collect(),
        }
    }

    /// Reverses the rotation at the given nodes (first dart kept first).
    pub fn mirrored_at(&self, nodes: &[NodeId]) -> Self {
        let mut out = self.clone();
        for &n in nodes {
            let list = &mut out.node_darts[n];
            if list.len() > 1 {
                list[1..].reverse();
            }
            let arity = list.len();
            for i in 0..arity {
                let d = list[i];
                out.darts[d].next_at_node = list[(i + 1) % arity];
            }
        }
        out
    }

    /// Deterministic traversal from `start`. Returns the code string and the
    /// visit order of nodes and darts (each node's darts in traversal order).
    fn traversal(&self, start: DartId, mirrored: bool) -> (String, Vec<NodeId>, Vec<DartId>) {
        let mut dart_num = vec![usize::MAX; self.darts.len()];
        let mut node_seen = vec![false; self.nodes.len()];
        let mut order_nodes = Vec::new();
        let mut order_darts = Vec::new();
        let mut queue = VecDeque::new();

        let discover = |d0: DartId,
                        dart_num: &mut Vec<usize>,
                        order_darts: &mut Vec<DartId>,
                        node_seen: &mut Vec<bool>,
                        order_nodes: &mut Vec<NodeId>,
                        queue: &mut VecDeque<NodeId>| {
            let n = self.darts[d0].node;
            node_seen[n] = true;
            order_nodes.push(n);
            queue.push_back(n);
            // anchored nodes always enumerate from their first dart
            let first = if self.nodes[n].anchored() {
                self.node_darts[n][0]
            } else {
                d0
            };
            let mut d = first;
            loop {
                dart_num[d] = order_darts.len();
                order_darts.push(d);
                d = if mirrored {
                    self.prev_at_node(d)
                } else {
                    self.next_at_node(d)
                };
                if d == first {
                    break;
                }
            }
        };

        discover(
            start,
            &mut dart_num,
            &mut order_darts,
            &mut node_seen,
            &mut order_nodes,
            &mut queue,
        );
        let mut cursor = 0;
        while cursor < order_darts.len() {
            let d = order_darts[cursor];
            cursor += 1;
            let p = self.darts[d].partner;
            if !node_seen[self.darts[p].node] {
                discover(
                    p,
                    &mut dart_num,
                    &mut order_darts,
                    &mut node_seen,
                    &mut order_nodes,
                    &mut queue,
                );
            }
        }

        let mut code = String::new();
        let mut pos = 0;
        for &n in &order_nodes {
            let arity = self.node_darts[n].len();
            let _ = write!(code, "{}", self.nodes[n].code());
            if self.nodes[n].anchored() {
                // record which dart of an anchored node the traversal entered by
                let _ = write!(code, "^{}", self.slot(order_darts[pos]));
            }
            code.push('(');
            for &d in &order_darts[pos..pos + arity] {
                let _ = write!(
                    code,
                    "{}{}{},",
                    dart_num[self.darts[d].partner],
                    self.darts[d].direction.code(),
                    self.edge_decor[d].code()
                );
            }
            code.push(')');
            pos += arity;
        }
        (code, order_nodes, order_darts)
    }

    /// Minimal traversal code per component, with the traversal achieving it.
    /// `allow_mirror` also tries clockwise traversals.
    pub fn component_codes(&self, allow_mirror: bool) -> Vec<ComponentCode> {
        self.components()
            .into_iter()
            .map(|members| {
                let mut best: Option<ComponentCode> = None;
                for &n in &members {
                    for &d in &self.node_darts[n] {
                        for mirrored in [false, true] {
                            if mirrored && !allow_mirror {
                                continue;
                            }
                            let (code, nodes, darts) = self.traversal(d, mirrored);
                            if best.as_ref().is_none_or(|b| code < b.code) {
                                best = Some(ComponentCode {
                                    code,
                                    nodes,
                                    darts,
                                    mirrored,
                                });
                            }
                        }
                    }
                }
                best.expect("components are non-empty")
            })
            .collect()
    }

    /// Canonically renumbered copy: components sorted by code, nodes and
    /// darts in traversal order. Also returns the sorted component codes.
    pub fn canonicalized(&self, allow_mirror: bool) -> (Self, Vec<String>) {
        let comps = self.component_codes(allow_mirror);
        let flip: Vec<NodeId> = comps
            .iter()
            .filter(|c| c.mirrored)
            .flat_map(|c| c.nodes.iter().copied())
            .collect();
        if !flip.is_empty() {
            return self.mirrored_at(&flip).canonicalized(false);
        }
        let mut comps = comps;
        comps.sort_by(|a, b| a.code.cmp(&b.code));
        let mut node_perm = vec![0; self.nodes.len()];
        let mut dart_perm = vec![0; self.darts.len()];
        let mut shift = vec![0; self.nodes.len()];
        let (mut next_node, mut next_dart) = (0, 0);
        for c in &comps {
            let mut pos = 0;
            for &n in &c.nodes {
                node_perm[n] = next_node;
                next_node += 1;
                let arity = self.node_darts[n].len();
                let first = c.darts[pos];
                shift[n] = self.slot(first);
                // keep ccw dart order even for a mirrored minimum
                let mut d = first;
                for _ in 0..arity {
                    dart_perm[d] = next_dart;
                    next_dart += 1;
                    d = self.next_at_node(d);
                }
                pos += arity;
            }
        }
        let codes = comps.into_iter().map(|c| c.code).collect();
        (self.relabeled(&node_perm, &dart_perm, &shift), codes)
    }
}

#[derive(Clone, Debug)]
pub struct ComponentCode {
    pub code: String,
    pub nodes: Vec<NodeId>,
    pub darts: Vec<DartId>,
    pub mirrored: bool,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[derive(Clone, Debug, PartialEq)]
    struct Plain;
    impl NodeDecor for Plain {
        fn anchored(&self) -> bool {
            false
        }
        fn code(&self) -> String {
            "v".into()
        }
    }

    fn build(rot: &[&[u32]]) -> RotationMap<Plain, ()> {
        RotationMap::from_ends(
            rot.iter()
                .map(|arcs| {
                    (
                        Plain,
                        arcs.iter()
                            .map(|&a| End {
                                arc: a,
                                direction: Direction::Unoriented,
                                decor: (),
                            })
                            .collect(),
                    )
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn theta_is_planar() {
        let m = build(&[&[1, 2, 3], &[3, 2, 1]]);
        m.check_structure().unwrap();
        let e = m.euler();
        assert_eq!(e.len(), 1);
        assert_eq!(
            (e[0].vertices, e[0].edges, e[0].faces, e[0].genus),
            (2, 3, 3, 0)
        );
    }

    #[test]
    fn theta_with_same_cyclic_order_is_toroidal() {
        // both vertices list 1,2,3 counterclockwise: one face, genus 1
        let m = build(&[&[1, 2, 3], &[1, 2, 3]]);
        let e = m.euler()[0];
        assert_eq!((e.faces, e.genus), (1, 1));
    }

    #[test]
    fn k4_rotations() {
        // vertices 0..3, edges a=01 b=02 c=03 d=12 e=13 f=23
        let planar = build(&[&[1, 2, 3], &[1, 5, 4], &[2, 4, 6], &[3, 6, 5]]);
        assert_eq!(planar.euler()[0].genus, 0);
        assert_eq!(planar.euler()[0].faces, 4);
        // reverse the rotation at vertex 3 only
        let torus = build(&[&[1, 2, 3], &[1, 5, 4], &[2, 4, 6], &[3, 5, 6]]);
        assert_eq!(torus.euler()[0].faces, 2);
        assert_eq!(torus.euler()[0].genus, 1);
    }

    #[test]
    fn arcs_must_pair() {
        let r: Result<RotationMap<Plain, ()>> = RotationMap::from_ends(vec![(
            Plain,
            vec![End {
                arc: 1,
                direction: Direction::Unoriented,
                decor: (),
            }],
        )]);
        assert!(r.is_err());
    }

    #[test]
    fn canonicalized_is_idempotent() {
        let m = build(&[&[1, 2, 3], &[1, 5, 4], &[2, 4, 6], &[3, 6, 5]]);
        let (c, codes) = m.canonicalized(false);
        let (c2, codes2) = c.canonicalized(false);
        assert_eq!(codes, codes2);
        assert_eq!(c, c2);
        c.check_structure().unwrap();
    }
}
