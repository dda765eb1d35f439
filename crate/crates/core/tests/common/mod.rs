//! Shared fixtures and independent oracles for the integration tests.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::PathBuf;

use label_bracket::diagram::GraphDiagram;
use label_bracket::moves::{
    apply_move, enumerate_move_sites, MoveDirection, MoveInstance, MoveKind,
};
use label_bracket::rules::RuleSet;
use label_bracket::statesum::{enumerate_states, resolve_state};
use label_bracket::trigraph::LabelTrigraph;
use rand::seq::SliceRandom;
use rand::Rng;

pub fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

pub fn corpus_dir() -> PathBuf {
    root().join("corpus")
}

pub fn rules_path(name: &str) -> PathBuf {
    root().join("rules").join(format!("{name}.rules"))
}

pub fn kauffman() -> RuleSet {
    RuleSet::parse(&std::fs::read_to_string(rules_path("kauffman")).unwrap()).unwrap()
}

pub fn corpus_text(name: &str) -> String {
    std::fs::read_to_string(corpus_dir().join(format!("{name}.pd"))).unwrap()
}

/// `(name, text, diagram)` for every corpus file, by name.
pub fn corpus() -> Vec<(String, String, GraphDiagram)> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "pd"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|p| {
            let text = std::fs::read_to_string(&p).unwrap();
            let d = GraphDiagram::parse(&text).unwrap();
            (
                p.file_stem().unwrap().to_string_lossy().into_owned(),
                text,
                d,
            )
        })
        .collect()
}

/// Corpus diagrams without trivalent vertices.
pub fn link_corpus() -> Vec<(String, String, GraphDiagram)> {
    corpus()
        .into_iter()
        .filter(|(_, _, d)| d.vertex_count() == 0)
        .collect()
}

/// Laurent polynomials in `A` as exponent → coefficient, kept apart from the
/// library's arithmetic.
pub type Poly = BTreeMap<i32, i64>;

pub fn poly(terms: &[(i64, i32)]) -> Poly {
    let mut p = Poly::new();
    for &(c, e) in terms {
        *p.entry(e).or_default() += c;
    }
    p.retain(|_, c| *c != 0);
    p
}

pub fn mul(a: &Poly, b: &Poly) -> Poly {
    let mut p = Poly::new();
    for (ea, ca) in a {
        for (eb, cb) in b {
            *p.entry(ea + eb).or_default() += ca * cb;
        }
    }
    p.retain(|_, c| *c != 0);
    p
}

pub fn add(a: &Poly, b: &Poly) -> Poly {
    let mut p = a.clone();
    for (e, c) in b {
        *p.entry(*e).or_default() += c;
    }
    p.retain(|_, c| *c != 0);
    p
}

pub fn delta() -> Poly {
    poly(&[(-1, 2), (-1, -2)])
}

/// Printed like the library prints coefficients (`A^k`, descending).
pub fn show(p: &Poly) -> String {
    if p.is_empty() {
        return "0".into();
    }
    let mut s = String::new();
    for (i, (&e, &c)) in p.iter().rev().enumerate() {
        let (sign, mag) = if c < 0 { ("-", -c) } else { ("+", c) };
        if i == 0 {
            if sign == "-" {
                s.push('-');
            }
        } else {
            s += &format!(" {sign} ");
        }
        let var = match e {
            0 => String::new(),
            1 => "A".into(),
            _ => format!("A^{e}"),
        };
        match (mag, var.is_empty()) {
            (m, true) => s += &m.to_string(),
            (1, false) => s += &var,
            (m, false) => s += &format!("{m}{var}"),
        }
    }
    s
}

/// Parses the crossings of a PD-only diagram text (`X[a,b,c,d]`, `O[..]`).
pub fn pd_crossings(text: &str) -> (Vec<[u64; 4]>, usize) {
    let mut xs = Vec::new();
    let mut loops = 0;
    for tok in text
        .lines()
        .map(|l| l.split('#').next().unwrap())
        .flat_map(str::split_whitespace)
    {
        if tok.starts_with("O[") {
            loops += 1;
        } else {
            let body = tok
                .strip_prefix("X[")
                .and_then(|t| t.strip_suffix(']'))
                .expect("link diagram");
            let v: Vec<u64> = body
                .split(',')
                .map(|p| p.trim().trim_end_matches(['<', '>']).parse().unwrap())
                .collect();
            xs.push([v[0], v[1], v[2], v[3]]);
        }
    }
    (xs, loops)
}

/// Skein recursion `<L> = A <L_0> + A^-1 <L_inf>` on PD codes: the first
/// crossing is resolved by joining its arcs pairwise and recursing; a
/// crossing-free remainder is a set of loops worth `delta` each, with
/// `<empty> = 1`.
pub fn skein(text: &str) -> Poly {
    let (xs, loops) = pd_crossings(text);
    fn go(xs: &[[u64; 4]], joins: &mut Vec<(u64, u64)>, labels: &[u64], loops: usize) -> Poly {
        let Some((x, rest)) = xs.split_first() else {
            let n = count_loops(labels, joins) + loops;
            return (0..n).fold(poly(&[(1, 0)]), |p, _| mul(&p, &delta()));
        };
        let mut out = Poly::new();
        for (coeff, pairs) in [
            (1, [(x[0], x[1]), (x[2], x[3])]),
            (-1, [(x[0], x[3]), (x[1], x[2])]),
        ] {
            joins.extend(pairs);
            out = add(
                &out,
                &mul(&poly(&[(1, coeff)]), &go(rest, joins, labels, loops)),
            );
            joins.truncate(joins.len() - 2);
        }
        out
    }
    let mut labels: Vec<u64> = xs.iter().flatten().copied().collect();
    labels.sort();
    labels.dedup();
    go(&xs, &mut Vec::new(), &labels, loops)
}

/// Connected components of the arc labels under the joins, by repeated
/// relaxation.
fn count_loops(labels: &[u64], joins: &[(u64, u64)]) -> usize {
    let mut comp: BTreeMap<u64, u64> = labels.iter().map(|&l| (l, l)).collect();
    loop {
        let mut changed = false;
        for &(a, b) in joins {
            let m = comp[&a].min(comp[&b]);
            for l in [a, b] {
                if comp[&l] != m {
                    comp.insert(l, m);
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut roots: Vec<u64> = comp.values().copied().collect();
    roots.sort();
    roots.dedup();
    roots.len()
}

/// Brute-force isomorphism of closed or open trigraphs: tries every dart
/// bijection and checks it carries node decorations, partners, rotations,
/// directions and edge decorations across. Only for small maps.
pub fn brute_isomorphic(g: &LabelTrigraph, h: &LabelTrigraph) -> bool {
    let (a, b) = (g.map(), h.map());
    if g.loops() != h.loops()
        || a.dart_count() != b.dart_count()
        || a.node_count() != b.node_count()
    {
        return false;
    }
    let n = a.dart_count();
    assert!(n <= 8, "brute force is limited to 8 darts");
    let mut perm: Vec<usize> = (0..n).collect();
    let respects = |p: &[usize]| {
        (0..n).all(|d| {
            let (x, y) = (a.dart(d), b.dart(p[d]));
            a.node(x.node) == b.node(y.node)
                && p[x.partner] == y.partner
                && p[x.next_at_node] == y.next_at_node
                && x.direction == y.direction
                && a.decor(d) == b.decor(p[d])
        })
    };
    // Heap's algorithm over all n! bijections.
    let mut c = vec![0usize; n];
    if respects(&perm) {
        return true;
    }
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            if respects(&perm) {
                return true;
            }
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    false
}

/// A uniformly random renumbering of nodes and darts, with random rotation
/// starting points where the start is not significant.
pub fn relabel<G: Rng>(g: &LabelTrigraph, rng: &mut G) -> LabelTrigraph {
    let m = g.map();
    let mut nodes: Vec<usize> = (0..m.node_count()).collect();
    let mut darts: Vec<usize> = (0..m.dart_count()).collect();
    nodes.shuffle(rng);
    darts.shuffle(rng);
    let shift: Vec<usize> = (0..m.node_count()).map(|_| rng.gen_range(0..3)).collect();
    LabelTrigraph::new(m.relabeled(&nodes, &darts, &shift), g.loops().clone())
}

/// Ten small trigraphs (at most 8 darts) with isomorphic and
/// non-isomorphic pairs.
pub const PANEL: [&str; 10] = [
    "V.10[1,2,3] V.9[1,3,2]",
    "V.9[3,1,2] V.10[2,1,3]",
    "V.10[1>,2>,3>] V.9[1<,3<,2<]",
    "V.10[~1,2,3] V.9[~1,3,2]",
    "V.10[1,~2,3] V.9[1,3,~2]",
    "V.10[1@a,2,3] V.9[1@a,3,2]",
    "V.10[1@b,2,3] V.9[1@b,3,2]",
    "V.10[1,2,3] V.9[1,3,2] O[u]",
    "L[1,1] L[2,1] L[3,2] L[4,2]",
    "L[1,1] L[4,1] L[2,2] L[3,2]",
];

pub fn panel() -> Vec<LabelTrigraph> {
    PANEL
        .iter()
        .map(|t| LabelTrigraph::parse(t).unwrap())
        .collect()
}

/// Distinct state trigraphs of the corpus under the Kauffman rules that
/// have at least one node, plus the panel.
pub fn corpus_trigraphs() -> Vec<LabelTrigraph> {
    let rules = kauffman();
    let mut seen = BTreeMap::new();
    for (_, _, d) in corpus() {
        for s in enumerate_states(d.crossing_count()) {
            let (_, g) = resolve_state(&d, &rules, &s).unwrap();
            if g.map().node_count() > 0 {
                seen.entry(g.to_text()).or_insert(g);
            }
        }
    }
    seen.into_values().chain(panel()).collect()
}

/// Whether some undoing instance of `mv` applied to `moved` gives back a
/// diagram with the same canonical key as `d`. The triangle slide undoes
/// itself.
pub fn undoable(d: &GraphDiagram, mv: &MoveInstance, moved: &GraphDiagram) -> bool {
    let back = match (mv.kind, mv.direction) {
        (MoveKind::Omega3, _) => MoveDirection::Apply,
        (_, MoveDirection::Apply) => MoveDirection::Inverse,
        (_, MoveDirection::Inverse) => MoveDirection::Apply,
    };
    let key = d.canonical_key();
    enumerate_move_sites(moved, mv.kind, back)
        .iter()
        .any(|u| apply_move(moved, u).is_ok_and(|e| e.canonical_key() == key))
}

/// Checks involutivity, validity and crossing deltas for every site of
/// every move kind in both directions; returns the number of instances.
pub fn check_moves(d: &GraphDiagram) -> Result<usize, String> {
    let mut count = 0;
    for kind in MoveKind::ALL {
        for dir in [MoveDirection::Apply, MoveDirection::Inverse] {
            for mv in enumerate_move_sites(d, kind, dir) {
                let e = apply_move(d, &mv).map_err(|e| format!("{mv}: {e}"))?;
                let report = e.validate();
                if !report.is_valid() {
                    return Err(format!("{mv}: invalid result: {report}"));
                }
                let delta = e.crossing_count() as i64 - d.crossing_count() as i64;
                let want = match dir {
                    MoveDirection::Apply => kind.crossing_delta(),
                    MoveDirection::Inverse => -kind.crossing_delta(),
                };
                if delta != want {
                    return Err(format!("{mv}: crossing delta {delta}, expected {want}"));
                }
                if !undoable(d, &mv, &e) {
                    return Err(format!("{mv}: no instance undoes it"));
                }
                count += 1;
            }
        }
    }
    Ok(count)
}

/// Brackets of the three constituent knots of a theta-curve diagram (one
/// edge deleted, the other two joined through both vertices), each scaled
/// to lowest exponent 0 and positive leading coefficient, sorted. Isotopy
/// changes a constituent's bracket by at most a unit `±A^k`.
pub fn theta_constituents(d: &GraphDiagram) -> Vec<String> {
    use label_bracket::diagram::DiagramNode;
    let m = d.map();
    let is_x = |n: usize| *m.node(n) == DiagramNode::Crossing;
    let verts: Vec<usize> = (0..m.node_count()).filter(|&n| !is_x(n)).collect();
    assert_eq!(verts.len(), 2, "theta-curves only");
    let mut edge = vec![usize::MAX; m.dart_count()];
    for (k, &start) in m.darts_of(verts[0]).iter().enumerate() {
        let mut x = start;
        loop {
            let y = m.partner(x);
            edge[x] = k;
            edge[y] = k;
            let n = m.dart(y).node;
            if !is_x(n) {
                break;
            }
            x = m.darts_of(n)[(m.slot(y) + 2) % 4];
        }
    }
    let mut out = Vec::new();
    for del in 0..3 {
        let mut root: Vec<usize> = (0..m.dart_count()).collect();
        fn find(root: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while root[r] != r {
                r = root[r];
            }
            root[x] = r;
            r
        }
        let union = |root: &mut Vec<usize>, a: usize, b: usize| {
            let (ra, rb) = (find(root, a), find(root, b));
            root[ra.max(rb)] = ra.min(rb);
        };
        for x in 0..m.dart_count() {
            union(&mut root, x, m.partner(x));
        }
        let mut kept = Vec::new();
        for n in (0..m.node_count()).filter(|&n| is_x(n)) {
            let s = m.darts_of(n);
            match (edge[s[0]] == del, edge[s[1]] == del) {
                (true, true) => {}
                (true, false) => union(&mut root, s[1], s[3]),
                (false, true) => union(&mut root, s[0], s[2]),
                (false, false) => kept.push([s[0], s[1], s[2], s[3]]),
            }
        }
        for &v in &verts {
            let rest: Vec<usize> = m
                .darts_of(v)
                .iter()
                .copied()
                .filter(|&x| edge[x] != del)
                .collect();
            union(&mut root, rest[0], rest[1]);
        }
        let mut text = String::new();
        let mut touched = std::collections::BTreeSet::new();
        for x in &kept {
            let l: Vec<usize> = x.iter().map(|&y| find(&mut root, y) + 1).collect();
            touched.extend(l.iter().copied());
            text += &format!("X[{},{},{},{}]\n", l[0], l[1], l[2], l[3]);
        }
        let mut classes = std::collections::BTreeSet::new();
        for x in (0..m.dart_count()).filter(|&x| edge[x] != del) {
            classes.insert(find(&mut root, x) + 1);
        }
        for _ in classes.difference(&touched) {
            text += "O[+]\n";
        }
        let p = skein(&text);
        let low = *p.keys().next().unwrap();
        let sign = if *p.values().next_back().unwrap() < 0 {
            -1
        } else {
            1
        };
        out.push(show(&p.iter().map(|(e, c)| (e - low, c * sign)).collect()));
    }
    out.sort();
    out
}
