//! Occurrences of rule fragments in trigraphs, and the cut-and-glue surgery
//! that replaces them.
//!
//! A site maps the fragment's vertices into the host preserving rotations,
//! types, edge decorations and directions. Leg-to-leg arcs of the fragment
//! land on host edges untouched by the vertex image (either traversal
//! direction) or on host loops; fragment loops land on host loops. Label
//! variables `@?x` bind to host labels consistently.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::map::{DartId, Direction, End, NodeId};
use crate::trigraph::{LabelTrigraph, LoopDecor, TriEdge, TriNode, TriParts};

/// What carries a leg-to-leg arc of the fragment in the host.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub enum Carrier {
    /// A host edge, named by its smaller dart and traversed from it.
    Edge(DartId),
    /// Instance `k` of the host loops with this decoration.
    Loop(LoopDecor, usize),
}

/// A leg-to-leg arc `L_from -> L_to` laid along a carrier. Several arcs may
/// share a carrier; `pos` is the insertion index among the arcs already on
/// it, `reversed` whether the arc runs against the carrier's traversal.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Segment {
    pub from: usize,
    pub to: usize,
    pub carrier: Carrier,
    pub pos: usize,
    pub reversed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Site {
    /// `(fragment node, host node, rotation shift)`, by fragment node.
    pub nodes: Vec<(NodeId, NodeId, usize)>,
    pub arcs: Vec<Segment>,
    /// Host loops consumed whole by the fragment's own loops.
    pub loops: Vec<LoopDecor>,
    pub bindings: BTreeMap<String, String>,
}

impl fmt::Display for Site {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nodes: Vec<String> = self
            .nodes
            .iter()
            .map(|(a, b, s)| format!("{a}->{b}+{s}"))
            .collect();
        write!(f, "nodes[{}]", nodes.join(","))?;
        for seg in &self.arcs {
            let dir = if seg.reversed { "-" } else { "+" };
            match &seg.carrier {
                Carrier::Edge(d) => write!(f, " L{}-L{}:d{d}{dir}{}", seg.from, seg.to, seg.pos)?,
                Carrier::Loop(_, k) => {
                    write!(f, " L{}-L{}:o{k}{dir}{}", seg.from, seg.to, seg.pos)?
                }
            }
        }
        if !self.loops.is_empty() {
            write!(f, " loops{}", self.loops.len())?;
        }
        for (k, v) in &self.bindings {
            write!(f, " ?{k}={v}")?;
        }
        Ok(())
    }
}

type Bindings = BTreeMap<String, String>;

fn match_label(pattern: &Option<String>, host: &Option<String>, b: &mut Bindings) -> bool {
    match (pattern, host) {
        (None, None) => true,
        (Some(p), Some(h)) => match p.strip_prefix('?') {
            Some(var) => match b.get(var) {
                Some(v) => v == h,
                None => {
                    b.insert(var.to_string(), h.clone());
                    true
                }
            },
            None => p == h,
        },
        _ => false,
    }
}

fn match_edge(p: &TriEdge, h: &TriEdge, b: &mut Bindings) -> bool {
    p.kind == h.kind && match_label(&p.label, &h.label, b)
}

fn match_loop(p: &LoopDecor, h: &LoopDecor, b: &mut Bindings) -> bool {
    p.kind == h.kind && p.oriented == h.oriented && match_label(&p.label, &h.label, b)
}

/// Static shape of a fragment used during matching.
struct Shape {
    /// Vertex components, each a list of nodes with the first as root.
    components: Vec<Vec<NodeId>>,
    /// `(i, j, dart at L_i)` for leg-to-leg arcs, `i < j`.
    leg_arcs: Vec<(usize, usize, DartId)>,
    loops: Vec<LoopDecor>,
}

fn shape(p: &LabelTrigraph) -> Shape {
    let m = p.map();
    let mut components = Vec::new();
    let mut seen = vec![false; m.node_count()];
    for n in 0..m.node_count() {
        if seen[n] || !matches!(m.node(n), TriNode::Vertex(_)) {
            continue;
        }
        let mut comp = vec![n];
        seen[n] = true;
        let mut k = 0;
        while k < comp.len() {
            for &d in m.darts_of(comp[k]) {
                let w = m.dart(m.partner(d)).node;
                if !seen[w] && matches!(m.node(w), TriNode::Vertex(_)) {
                    seen[w] = true;
                    comp.push(w);
                }
            }
            k += 1;
        }
        components.push(comp);
    }
    let mut leg_arcs = Vec::new();
    for n in 0..m.node_count() {
        if let TriNode::Leg(i) = *m.node(n) {
            let d = m.darts_of(n)[0];
            if let TriNode::Leg(j) = *m.node(m.dart(m.partner(d)).node) {
                if i < j {
                    leg_arcs.push((i, j, d));
                }
            }
        }
    }
    let loops = p
        .loops()
        .iter()
        .flat_map(|(d, &c)| std::iter::repeat_n(d.clone(), c))
        .collect();
    Shape {
        components,
        leg_arcs,
        loops,
    }
}

/// Extends a component from its root placed at `(h, shift)`.
fn place_component(
    p: &LabelTrigraph,
    host: &LabelTrigraph,
    comp_root: NodeId,
    h: NodeId,
    shift: usize,
    used: &BTreeSet<NodeId>,
    bindings: &Bindings,
) -> Option<(Vec<(NodeId, NodeId, usize)>, Bindings)> {
    let (pm, hm) = (p.map(), host.map());
    let mut b = bindings.clone();
    let mut placed: BTreeMap<NodeId, (NodeId, usize)> = BTreeMap::new();
    let mut images: BTreeSet<NodeId> = BTreeSet::new();
    let mut queue = vec![(comp_root, h, shift)];
    while let Some((f, h, s)) = queue.pop() {
        if let Some(&(h0, s0)) = placed.get(&f) {
            if (h0, s0) != (h, s) {
                return None;
            }
            continue;
        }
        if used.contains(&h)
            || images.contains(&h)
            || pm.node(f) != hm.node(h)
            || hm.arity(h) != pm.arity(f)
        {
            return None;
        }
        placed.insert(f, (h, s));
        images.insert(h);
        let arity = pm.arity(f);
        for (k, &fd) in pm.darts_of(f).iter().enumerate() {
            let hd = hm.darts_of(h)[(k + s) % arity];
            if pm.dart(fd).direction != hm.dart(hd).direction
                || !match_edge(pm.decor(fd), hm.decor(hd), &mut b)
            {
                return None;
            }
            let fp = pm.partner(fd);
            let w = pm.dart(fp).node;
            if let TriNode::Vertex(_) = pm.node(w) {
                let hp = hm.partner(hd);
                let hw = hm.dart(hp).node;
                let aw = hm.arity(hw);
                let sw = (hm.slot(hp) + aw - pm.slot(fp) % aw) % aw;
                queue.push((w, hw, sw));
            }
        }
    }
    Some((placed.into_iter().map(|(f, (h, s))| (f, h, s)).collect(), b))
}

/// All sites of `pattern` in the closed trigraph `host`, in a deterministic
/// order (before any planarity filtering).
pub fn match_sites(host: &LabelTrigraph, pattern: &LabelTrigraph) -> Vec<Site> {
    let sh = shape(pattern);
    let mut out = Vec::new();
    let mut acc = Vec::new();
    place_all(
        host,
        pattern,
        &sh,
        0,
        &mut acc,
        &BTreeSet::new(),
        &Bindings::new(),
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn place_all(
    host: &LabelTrigraph,
    p: &LabelTrigraph,
    sh: &Shape,
    k: usize,
    acc: &mut Vec<(NodeId, NodeId, usize)>,
    used: &BTreeSet<NodeId>,
    b: &Bindings,
    out: &mut Vec<Site>,
) {
    if k == sh.components.len() {
        let mut nodes = acc.clone();
        nodes.sort_unstable();
        place_arcs(
            host,
            p,
            sh,
            0,
            &nodes,
            used,
            &mut Vec::new(),
            &mut BTreeMap::new(),
            b,
            out,
        );
        return;
    }
    let root = sh.components[k][0];
    let hm = host.map();
    for h in 0..hm.node_count() {
        for s in 0..hm.arity(h) {
            if let Some((placed, b2)) = place_component(p, host, root, h, s, used, b) {
                let mut used2 = used.clone();
                used2.extend(placed.iter().map(|x| x.1));
                let len = acc.len();
                acc.extend(placed);
                place_all(host, p, sh, k + 1, acc, &used2, &b2, out);
                acc.truncate(len);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn place_arcs(
    host: &LabelTrigraph,
    p: &LabelTrigraph,
    sh: &Shape,
    k: usize,
    nodes: &[(NodeId, NodeId, usize)],
    used_nodes: &BTreeSet<NodeId>,
    arcs: &mut Vec<Segment>,
    on: &mut BTreeMap<Carrier, usize>,
    b: &Bindings,
    out: &mut Vec<Site>,
) {
    let (pm, hm) = (p.map(), host.map());
    if k == sh.leg_arcs.len() {
        // loop instances already cut by arcs are not available whole
        let mut used_loops: BTreeMap<LoopDecor, usize> = BTreeMap::new();
        for c in on.keys() {
            if let Carrier::Loop(l, _) = c {
                *used_loops.entry(l.clone()).or_default() += 1;
            }
        }
        place_loops(
            host,
            sh,
            0,
            nodes,
            arcs,
            &mut Vec::new(),
            &mut used_loops,
            b,
            out,
        );
        return;
    }
    let (i, j, x) = sh.leg_arcs[k];
    let (xdir, xdecor) = (pm.dart(x).direction, pm.decor(x));
    let mut options: Vec<(Carrier, bool, Bindings)> = Vec::new();
    for a in 0..hm.dart_count() {
        if a > hm.partner(a)
            || used_nodes.contains(&hm.dart(a).node)
            || used_nodes.contains(&hm.dart(hm.partner(a)).node)
        {
            continue;
        }
        let mut b2 = b.clone();
        if !match_edge(xdecor, hm.decor(a), &mut b2) {
            continue;
        }
        let hdir = hm.dart(a).direction;
        let revs: &[bool] = match (hdir, xdir) {
            (Direction::Unoriented, Direction::Unoriented) => &[false, true],
            (Direction::Unoriented, _) | (_, Direction::Unoriented) => &[],
            _ if hdir == xdir => &[false],
            _ => &[true],
        };
        options.extend(revs.iter().map(|&r| (Carrier::Edge(a), r, b2.clone())));
    }
    let want = LoopDecor::of_edge(xdecor, xdir != Direction::Unoriented);
    for (hl, &count) in host.loops() {
        let mut b2 = b.clone();
        if !match_loop(&want, hl, &mut b2) {
            continue;
        }
        let opened = on
            .keys()
            .filter(|c| matches!(c, Carrier::Loop(l, _) if l == hl))
            .count();
        let revs: &[bool] = match xdir {
            Direction::Unoriented => &[false, true],
            Direction::Outgoing => &[false],
            Direction::Incoming => &[true],
        };
        for inst in 0..count.min(opened + 1) {
            options.extend(
                revs.iter()
                    .map(|&r| (Carrier::Loop(hl.clone(), inst), r, b2.clone())),
            );
        }
    }
    for (carrier, reversed, b2) in options {
        let here = on.get(&carrier).copied().unwrap_or(0);
        for pos in 0..=here {
            on.insert(carrier.clone(), here + 1);
            arcs.push(Segment {
                from: i,
                to: j,
                carrier: carrier.clone(),
                pos,
                reversed,
            });
            place_arcs(host, p, sh, k + 1, nodes, used_nodes, arcs, on, &b2, out);
            arcs.pop();
            if here == 0 {
                on.remove(&carrier);
            } else {
                on.insert(carrier.clone(), here);
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn place_loops(
    host: &LabelTrigraph,
    sh: &Shape,
    k: usize,
    nodes: &[(NodeId, NodeId, usize)],
    arcs: &[Segment],
    loops: &mut Vec<LoopDecor>,
    used_loops: &mut BTreeMap<LoopDecor, usize>,
    b: &Bindings,
    out: &mut Vec<Site>,
) {
    if k == sh.loops.len() {
        out.push(Site {
            nodes: nodes.to_vec(),
            arcs: arcs.to_vec(),
            loops: loops.clone(),
            bindings: b.clone(),
        });
        return;
    }
    // identical pattern loops take host loops in non-decreasing order
    let floor = if k > 0 && sh.loops[k] == sh.loops[k - 1] {
        loops.last().cloned()
    } else {
        None
    };
    for (hl, &count) in host.loops() {
        if floor.as_ref().is_some_and(|f| hl < f)
            || used_loops.get(hl).copied().unwrap_or(0) >= count
        {
            continue;
        }
        let mut b2 = b.clone();
        if !match_loop(&sh.loops[k], hl, &mut b2) {
            continue;
        }
        *used_loops.entry(hl.clone()).or_default() += 1;
        loops.push(hl.clone());
        place_loops(host, sh, k + 1, nodes, arcs, loops, used_loops, &b2, out);
        loops.pop();
        *used_loops.get_mut(hl).expect("counted") -= 1;
    }
}

/// Arc keys of an open graph under construction.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
enum Key {
    Edge(DartId),
    /// A host end attached to this leg.
    Leg(usize),
    /// Two complement legs joined directly; named by the smaller.
    Pair(usize),
    /// The complement arc ending at this segment entry leg.
    Into(usize),
}

/// The host with a site cut out: an open trigraph whose legs face the
/// fragment's legs.
#[derive(Clone, Debug)]
pub struct Complement {
    parts: TriParts,
    loops: BTreeMap<LoopDecor, usize>,
}

impl Complement {
    pub fn parts(&self) -> &TriParts {
        &self.parts
    }

    pub fn loops(&self) -> &BTreeMap<LoopDecor, usize> {
        &self.loops
    }
}

/// Cuts the site out of the host.
pub fn complement(
    host: &LabelTrigraph,
    pattern: &LabelTrigraph,
    site: &Site,
) -> Result<Complement> {
    let (pm, hm) = (pattern.map(), host.map());
    let image: BTreeSet<NodeId> = site.nodes.iter().map(|x| x.1).collect();
    // host dart -> fragment leg it faces, for darts at image vertices
    let mut leg_of_host_dart: HashMap<DartId, usize> = HashMap::new();
    for &(f, h, s) in &site.nodes {
        let arity = pm.arity(f);
        for (k, &fd) in pm.darts_of(f).iter().enumerate() {
            if let TriNode::Leg(i) = *pm.node(pm.dart(pm.partner(fd)).node) {
                leg_of_host_dart.insert(hm.darts_of(h)[(k + s) % arity], i);
            }
        }
    }
    // host end (outside the image) -> leg it is attached to
    let mut across: HashMap<DartId, usize> = HashMap::new();
    let mut leg_ends: BTreeMap<usize, (Key, Direction, TriEdge)> = BTreeMap::new();
    let legs = pattern.legs();
    let leg_dir = |i: usize| pm.dart(pm.darts_of(legs[&i])[0]).direction.reversed();
    for (&d, &i) in &leg_of_host_dart {
        let dp = hm.partner(d);
        let key = match leg_of_host_dart.get(&dp) {
            Some(&j) => Key::Pair(i.min(j)),
            None => {
                across.insert(dp, i);
                Key::Leg(i)
            }
        };
        leg_ends.insert(i, (key, leg_dir(i), hm.decor(d).clone()));
    }
    let mut loops = host.loops().clone();
    let mut take_loop = |l: &LoopDecor| -> Result<()> {
        match loops.get_mut(l) {
            Some(c) if *c > 0 => {
                *c -= 1;
                Ok(())
            }
            _ => Err(Error::InvalidSite("site uses a loop the host lacks".into())),
        }
    };
    let mut lanes: BTreeMap<&Carrier, Vec<(usize, usize)>> = BTreeMap::new();
    for seg in &site.arcs {
        let lane = lanes.entry(&seg.carrier).or_default();
        if seg.pos > lane.len() {
            return Err(Error::InvalidSite(format!(
                "segment position {} out of range",
                seg.pos
            )));
        }
        let ends = if seg.reversed {
            (seg.to, seg.from)
        } else {
            (seg.from, seg.to)
        };
        lane.insert(seg.pos, ends);
    }
    for (carrier, lane) in lanes {
        let m = lane.len();
        let decor = match carrier {
            Carrier::Edge(a) => hm.decor(*a).clone(),
            Carrier::Loop(l, _) => TriEdge {
                kind: l.kind,
                label: l.label.clone(),
            },
        };
        for t in 0..m {
            let (exit, next_entry) = (lane[t].1, lane[(t + 1) % m].0);
            if t + 1 < m || matches!(carrier, Carrier::Loop(..)) {
                leg_ends.insert(exit, (Key::Into(next_entry), leg_dir(exit), decor.clone()));
                leg_ends.insert(
                    next_entry,
                    (Key::Into(next_entry), leg_dir(next_entry), decor.clone()),
                );
            }
        }
        match carrier {
            Carrier::Edge(a) => {
                let (first, last) = (lane[0].0, lane[m - 1].1);
                across.insert(*a, first);
                across.insert(hm.partner(*a), last);
                leg_ends.insert(first, (Key::Leg(first), leg_dir(first), decor.clone()));
                leg_ends.insert(last, (Key::Leg(last), leg_dir(last), decor));
            }
            Carrier::Loop(l, _) => take_loop(l)?,
        }
    }
    for l in &site.loops {
        take_loop(l)?;
    }
    if leg_ends.len() != legs.len() {
        return Err(Error::InvalidSite(format!(
            "site attaches {} of {} legs",
            leg_ends.len(),
            legs.len()
        )));
    }
    let mut keyed: Vec<(TriNode, Vec<End<Key, TriEdge>>)> = Vec::new();
    for n in 0..hm.node_count() {
        if image.contains(&n) {
            continue;
        }
        let ends = hm
            .darts_of(n)
            .iter()
            .map(|&d| End {
                arc: match across.get(&d) {
                    Some(&i) => Key::Leg(i),
                    None => Key::Edge(d.min(hm.partner(d))),
                },
                direction: hm.dart(d).direction,
                decor: hm.decor(d).clone(),
            })
            .collect();
        keyed.push((*hm.node(n), ends));
    }
    for (i, (key, direction, decor)) in leg_ends {
        keyed.push((
            TriNode::Leg(i),
            vec![End {
                arc: key,
                direction,
                decor,
            }],
        ));
    }
    Ok(Complement {
        parts: intern(keyed),
        loops,
    })
}

fn intern<K: Ord + Copy>(keyed: Vec<(TriNode, Vec<End<K, TriEdge>>)>) -> TriParts {
    let mut ids: BTreeMap<K, usize> = BTreeMap::new();
    keyed
        .into_iter()
        .map(|(n, ends)| {
            let ends = ends
                .into_iter()
                .map(|e| {
                    let next = ids.len();
                    End {
                        arc: *ids.entry(e.arc).or_insert(next),
                        direction: e.direction,
                        decor: e.decor,
                    }
                })
                .collect();
            (n, ends)
        })
        .collect()
}

/// Replaces label variables by their bindings.
pub fn substitute(g: &LabelTrigraph, bindings: &BTreeMap<String, String>) -> Result<LabelTrigraph> {
    let sub = |label: &Option<String>| -> Result<Option<String>> {
        match label.as_deref().and_then(|l| l.strip_prefix('?')) {
            Some(var) => bindings
                .get(var)
                .cloned()
                .map(Some)
                .ok_or_else(|| Error::Gluing(format!("unbound label variable ?{var}"))),
            None => Ok(label.clone()),
        }
    };
    let mut parts = g.to_parts();
    for (_, ends) in &mut parts {
        for e in ends {
            e.decor.label = sub(&e.decor.label)?;
        }
    }
    let mut loops = BTreeMap::new();
    for (l, c) in g.loops() {
        let l = LoopDecor {
            label: sub(&l.label)?,
            ..l.clone()
        };
        *loops.entry(l).or_default() += c;
    }
    LabelTrigraph::from_parts(parts, loops)
}

/// Joins two open graphs along equally numbered legs. Every leg must find
/// its partner; joined legs must agree on decoration and have opposite
/// directions. Chains of joined legs that close up become loops.
pub fn glue(
    a: (&TriParts, &BTreeMap<LoopDecor, usize>),
    b: (&TriParts, &BTreeMap<LoopDecor, usize>),
) -> Result<LabelTrigraph> {
    let offset =
        a.0.iter()
            .flat_map(|(_, e)| e.iter().map(|e| e.arc + 1))
            .max()
            .unwrap_or(0);
    let all: Vec<(TriNode, Vec<End<usize, TriEdge>>)> =
        a.0.iter()
            .cloned()
            .chain(b.0.iter().map(|(n, ends)| {
                (
                    *n,
                    ends.iter()
                        .map(|e| End {
                            arc: e.arc + offset,
                            ..e.clone()
                        })
                        .collect(),
                )
            }))
            .collect();
    let side_of = |idx: usize| usize::from(idx >= a.0.len());
    let mut legs: BTreeMap<usize, Vec<(usize, &End<usize, TriEdge>)>> = BTreeMap::new();
    for (idx, (n, ends)) in all.iter().enumerate() {
        if let TriNode::Leg(i) = n {
            legs.entry(*i).or_default().push((side_of(idx), &ends[0]));
        }
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
    let mut loop_decor: BTreeMap<usize, LoopDecor> = BTreeMap::new();
    for (i, ends) in &legs {
        let [(sa, ea), (sb, eb)] = ends.as_slice() else {
            return Err(Error::Gluing(format!(
                "leg {i} appears {} times",
                ends.len()
            )));
        };
        if sa == sb {
            return Err(Error::Gluing(format!("leg {i} appears twice on one side")));
        }
        if ea.decor != eb.decor || ea.direction != eb.direction.reversed() {
            return Err(Error::Gluing(format!("leg {i} types are incompatible")));
        }
        let (ra, rb) = (find(&mut parent, ea.arc), find(&mut parent, eb.arc));
        if ra != rb {
            parent.insert(ra.max(rb), ra.min(rb));
        }
        loop_decor.insert(
            ea.arc,
            LoopDecor::of_edge(&ea.decor, ea.direction != Direction::Unoriented),
        );
    }
    let mut parts: TriParts = Vec::new();
    let mut live: BTreeSet<usize> = BTreeSet::new();
    for (n, ends) in &all {
        if let TriNode::Leg(_) = n {
            continue;
        }
        let ends = ends
            .iter()
            .map(|e| {
                let r = find(&mut parent, e.arc);
                live.insert(r);
                End {
                    arc: r,
                    ..e.clone()
                }
            })
            .collect();
        parts.push((*n, ends));
    }
    let mut loops = a.1.clone();
    for (l, c) in b.1 {
        *loops.entry(l.clone()).or_default() += c;
    }
    let mut closed: BTreeSet<usize> = BTreeSet::new();
    for (arc, decor) in loop_decor {
        let r = find(&mut parent, arc);
        if !live.contains(&r) && closed.insert(r) {
            *loops.entry(decor).or_default() += 1;
        }
    }
    LabelTrigraph::from_parts(parts, loops).map_err(|e| Error::Gluing(e.to_string()))
}

/// The host with the site replaced by `replacement` (which shares the
/// pattern's legs). Fails when the result is not a valid planar trigraph.
pub fn replace(
    complement: &Complement,
    replacement: &LabelTrigraph,
    bindings: &BTreeMap<String, String>,
) -> Result<LabelTrigraph> {
    let r = substitute(replacement, bindings)?;
    let rp = r.to_parts();
    let g = glue((&complement.parts, &complement.loops), (&rp, r.loops()))?;
    g.check()?;
    Ok(g)
}
