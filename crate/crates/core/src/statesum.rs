//! The state-sum expansion: every crossing is replaced by one of the two
//! choices of its smoothing rule, each state contributes the product of the
//! chosen coefficients times the resulting trigraph, and the sum is
//! normalized with the rule set's left-to-right rules.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::diagram::{DiagramNode, GraphDiagram};
use crate::engine::{normalize, NormalizeReport};
use crate::error::{Error, Result};
use crate::laurent::Laurent;
use crate::map::{Direction, End};
use crate::matching::glue;
use crate::rules::{RuleSet, SmoothingRule};
use crate::scalar::Scalar;
use crate::sum::FormalSum;
use crate::trigraph::{LabelTrigraph, LoopDecor, TriEdge, TriNode, TriParts};

/// Choice (0 or 1) per crossing, crossings in node order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct StateSelector(pub Vec<u8>);

impl StateSelector {
    /// The `index`-th state in lexicographic order (first crossing most
    /// significant).
    pub fn from_index(index: u64, crossings: usize) -> Self {
        StateSelector(
            (0..crossings)
                .map(|c| ((index >> (crossings - 1 - c)) & 1) as u8)
                .collect(),
        )
    }
}

/// All `2^n` states in lexicographic order, lazily.
pub fn enumerate_states(crossings: usize) -> impl Iterator<Item = StateSelector> {
    assert!(crossings < 64, "too many crossings to enumerate");
    (0..1u64 << crossings).map(move |i| StateSelector::from_index(i, crossings))
}

/// Checks that a diagram can be expanded with a rule set and returns the
/// smoothing rule of each crossing.
pub fn smoothing_plan<'r, R: Scalar>(
    d: &GraphDiagram,
    rules: &'r RuleSet<R>,
) -> Result<Vec<&'r SmoothingRule<R>>> {
    rules.require_complete()?;
    let report = d.validate();
    if !report.is_valid() {
        return Err(Error::InvalidDiagram(report.to_string()));
    }
    for n in 0..d.map().node_count() {
        if let DiagramNode::Vertex(p) = d.map().node(n) {
            if !rules.vertex_map.contains_key(p) {
                return Err(Error::UnknownVertexType(format!(
                    "rule set {} has no vertexmap entry for {p:?} vertices",
                    rules.name
                )));
            }
        }
    }
    d.crossings()
        .into_iter()
        .map(|c| {
            let sign = d.crossing_sign(c);
            rules
                .smoothing_for(sign)
                .ok_or_else(|| Error::UncoveredCrossing {
                    crossing: c,
                    class: format!("{sign:?}").to_lowercase(),
                })
        })
        .collect()
}

/// The diagram with vertices mapped to trigraph vertices and every crossing
/// dart turned into a leg (`4c + slot + 1` for the `c`-th crossing).
fn open_diagram<R: Scalar>(
    d: &GraphDiagram,
    rules: &RuleSet<R>,
) -> (TriParts, BTreeMap<LoopDecor, usize>) {
    let m = d.map();
    let edge = TriEdge {
        kind: rules.arc_kind,
        label: None,
    };
    let dir = |x: Direction| {
        if rules.arcs_oriented {
            x
        } else {
            Direction::Unoriented
        }
    };
    let mut parts: TriParts = Vec::new();
    let mut crossing_index = 0;
    for n in 0..m.node_count() {
        let ends = m.darts_of(n).iter().map(|&dt| End {
            arc: dt.min(m.partner(dt)),
            direction: dir(m.dart(dt).direction),
            decor: edge.clone(),
        });
        match m.node(n) {
            DiagramNode::Vertex(p) => {
                parts.push((TriNode::Vertex(rules.vertex_map[p]), ends.collect()))
            }
            DiagramNode::Crossing => {
                for (slot, end) in ends.enumerate() {
                    parts.push((TriNode::Leg(4 * crossing_index + slot + 1), vec![end]));
                }
                crossing_index += 1;
            }
        }
    }
    let mut loops = BTreeMap::new();
    let count = d.free_loops()[0] + d.free_loops()[1];
    if count > 0 {
        loops.insert(LoopDecor::of_edge(&edge, rules.arcs_oriented), count);
    }
    (parts, loops)
}

fn resolve_with<R: Scalar>(
    open: &(TriParts, BTreeMap<LoopDecor, usize>),
    plan: &[&SmoothingRule<R>],
    rules: &RuleSet<R>,
    state: &StateSelector,
) -> Result<(Laurent<R>, LabelTrigraph)> {
    let mut coeff = Laurent::one();
    let mut parts: TriParts = Vec::new();
    let mut loops: BTreeMap<LoopDecor, usize> = BTreeMap::new();
    let mut offset = 0;
    for (c, (rule, &choice)) in plan.iter().zip(&state.0).enumerate() {
        let (k, frag) = &rule.choices[usize::from(choice)];
        coeff = &coeff * k;
        let fp = frag.graph().to_parts();
        let width = fp
            .iter()
            .flat_map(|(_, e)| e.iter().map(|e| e.arc + 1))
            .max()
            .unwrap_or(0);
        for (node, ends) in fp {
            let node = match node {
                TriNode::Leg(i) => TriNode::Leg(4 * c + i),
                v => v,
            };
            let ends = ends
                .into_iter()
                .map(|e| End {
                    arc: e.arc + offset,
                    ..e
                })
                .collect();
            parts.push((node, ends));
        }
        offset += width;
        for (l, n) in frag.graph().loops() {
            *loops.entry(l.clone()).or_default() += n;
        }
    }
    let g = glue((&open.0, &open.1), (&parts, &loops))?;
    g.check()?;
    rules.check_signatures(&g)?;
    Ok((coeff, g))
}

/// The weighted trigraph of one state.
pub fn resolve_state<R: Scalar>(
    d: &GraphDiagram,
    rules: &RuleSet<R>,
    state: &StateSelector,
) -> Result<(Laurent<R>, LabelTrigraph)> {
    let plan = smoothing_plan(d, rules)?;
    if state.0.len() != plan.len() || state.0.iter().any(|&c| c > 1) {
        return Err(Error::InvalidDiagram(format!(
            "state selects {} choices for {} crossings",
            state.0.len(),
            plan.len()
        )));
    }
    resolve_with(&open_diagram(d, rules), &plan, rules, state)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct BracketOptions {
    /// Rewrite budget for normalization.
    pub max_steps: usize,
    /// Worker threads for the state expansion (0: rayon default).
    pub workers: usize,
}

impl Default for BracketOptions {
    fn default() -> Self {
        BracketOptions {
            max_steps: 10_000,
            workers: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BracketReport {
    pub states: u64,
    pub crossings: usize,
    pub normalization: NormalizeReport,
}

/// The raw state sum before normalization.
pub fn state_sum<R: Scalar>(
    d: &GraphDiagram,
    rules: &RuleSet<R>,
    workers: usize,
) -> Result<FormalSum<R>> {
    let plan = smoothing_plan(d, rules)?;
    let open = open_diagram(d, rules);
    let n = plan.len();
    if n >= 40 {
        return Err(Error::InvalidDiagram(format!(
            "{n} crossings is too many states to expand"
        )));
    }
    let mirror = rules.allow_mirror;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::InvalidDiagram(format!("cannot start workers: {e}")))?;
    pool.install(|| {
        (0..1u64 << n)
            .into_par_iter()
            .try_fold(
                || FormalSum::zero(mirror),
                |mut acc, i| {
                    let (c, g) =
                        resolve_with(&open, &plan, rules, &StateSelector::from_index(i, n))?;
                    acc.add_term(c, &g)?;
                    Ok::<_, Error>(acc)
                },
            )
            .try_reduce(
                || FormalSum::zero(mirror),
                |mut a, b| {
                    for (k, c, g) in b.iter() {
                        a.add_keyed(k.clone(), g.clone(), c.clone());
                    }
                    Ok(a)
                },
            )
    })
}

/// The normalized invariant of a diagram.
pub fn bracket<R: Scalar>(
    d: &GraphDiagram,
    rules: &RuleSet<R>,
    opts: BracketOptions,
) -> Result<(FormalSum<R>, BracketReport)> {
    let raw = state_sum(d, rules, opts.workers)?;
    let (sum, normalization) = normalize(rules, &raw, opts.max_steps)?;
    let crossings = d.crossing_count();
    Ok((
        sum,
        BracketReport {
            states: 1u64 << crossings,
            crossings,
            normalization,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    const KAUFFMAN: &str = include_str!("../rules/kauffman.rules");

    fn rules() -> RuleSet {
        RuleSet::parse(KAUFFMAN).unwrap()
    }

    /// Independent state sum on arc labels: A-smoothings join slots (0,1)
    /// and (2,3), the other smoothing (0,3) and (1,2); loops are counted with
    /// union-find and each contributes the loop value.
    fn oracle(pd: &[[usize; 4]], free: usize) -> Laurent<i64> {
        let a = Laurent::var(0, 1);
        let ainv = Laurent::var(0, -1);
        let delta = -(a.pow(2)) - ainv.pow(2);
        let arcs: Vec<usize> = {
            let mut v: Vec<usize> = pd.iter().flatten().copied().collect();
            v.sort_unstable();
            v.dedup();
            v
        };
        let mut total = Laurent::zero();
        for s in 0..1u32 << pd.len() {
            let mut parent: BTreeMap<usize, usize> = arcs.iter().map(|&x| (x, x)).collect();
            fn find(p: &mut BTreeMap<usize, usize>, x: usize) -> usize {
                let q = p[&x];
                if q == x {
                    x
                } else {
                    let r = find(p, q);
                    p.insert(x, r);
                    r
                }
            }
            let mut weight = Laurent::one();
            for (i, x) in pd.iter().enumerate() {
                let b = (s >> (pd.len() - 1 - i)) & 1 == 1;
                let joins = if b {
                    [(x[0], x[3]), (x[1], x[2])]
                } else {
                    [(x[0], x[1]), (x[2], x[3])]
                };
                weight = &weight * if b { &ainv } else { &a };
                for (u, v) in joins {
                    let (ru, rv) = (find(&mut parent, u), find(&mut parent, v));
                    parent.insert(ru, rv);
                }
            }
            let mut roots: Vec<usize> = arcs.iter().map(|&x| find(&mut parent, x)).collect();
            roots.sort_unstable();
            roots.dedup();
            total = &total + &(&weight * &delta.pow((roots.len() + free) as u32));
        }
        total
    }

    fn pd_text(pd: &[[usize; 4]]) -> String {
        pd.iter()
            .map(|x| format!("X[{},{},{},{}]\n", x[0], x[1], x[2], x[3]))
            .collect()
    }

    fn scalar(text: &str) -> Laurent<i64> {
        let d = GraphDiagram::parse(text).unwrap();
        let (s, rep) = bracket(&d, &rules(), BracketOptions::default()).unwrap();
        assert!(rep.normalization.fixpoint);
        s.as_scalar().expect("knot brackets evaluate to scalars")
    }

    fn show(l: &Laurent<i64>) -> String {
        l.display(&["A".to_string()]).to_string()
    }

    #[test]
    fn states_are_lexicographic() {
        let all: Vec<StateSelector> = enumerate_states(3).collect();
        assert_eq!(all.len(), 8);
        assert_eq!(all[0].0, vec![0, 0, 0]);
        assert_eq!(all[1].0, vec![0, 0, 1]);
        assert_eq!(all[7].0, vec![1, 1, 1]);
        assert!(all.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn golden_values() {
        assert_eq!(show(&scalar("O[+]")), "-A^2 - A^-2");
        assert_eq!(show(&scalar("X[1,1,2,2]")), "A^5 + A");
        assert_eq!(show(&scalar("X[1,2,2,1]")), "A^-1 + A^-5");
        assert_eq!(show(&scalar("X[1,2,3,4]\nX[3,2,1,4]")), "A^4 + 2 + A^-4");
        assert_eq!(
            show(&scalar("X[4,1,3,2]\nX[2,3,1,4]")),
            "A^6 + A^2 + A^-2 + A^-6"
        );
        assert_eq!(
            show(&scalar("X[1,5,2,4]\nX[3,1,4,6]\nX[5,3,6,2]")),
            "A^7 + A^3 + A^-1 - A^-9"
        );
    }

    #[test]
    fn agrees_with_union_find_oracle() {
        let cases: Vec<Vec<[usize; 4]>> = vec![
            vec![[1, 1, 2, 2]],
            vec![[1, 2, 2, 1]],
            vec![[1, 2, 3, 4], [3, 2, 1, 4]],
            vec![[1, 5, 2, 4], [3, 1, 4, 6], [5, 3, 6, 2]],
            vec![[1, 4, 2, 5], [3, 6, 4, 1], [5, 2, 6, 3]],
            // figure eight
            vec![[4, 2, 5, 1], [8, 6, 1, 5], [6, 3, 7, 4], [2, 7, 3, 8]],
        ];
        for pd in cases {
            let text = pd_text(&pd);
            assert_eq!(scalar(&text), oracle(&pd, 0), "{text}");
        }
        assert_eq!(scalar("X[1,1,2,2]\nO[+]\nO[-]"), oracle(&[[1, 1, 2, 2]], 2));
    }

    #[test]
    fn theta_keeps_its_vertices() {
        let d = GraphDiagram::parse("V+[1,2,3]\nV-[3,2,1]").unwrap();
        let (s, rep) = bracket(&d, &rules(), BracketOptions::default()).unwrap();
        assert_eq!(rep.states, 1);
        assert_eq!(s.len(), 1);
        assert!(s.as_scalar().is_none());
    }

    #[test]
    fn resolve_state_weights() {
        let d = GraphDiagram::parse("X[1,2,3,4]\nX[3,2,1,4]").unwrap();
        let (c, g) = resolve_state(&d, &rules(), &StateSelector(vec![0, 1])).unwrap();
        assert_eq!(show(&c), "1");
        assert!(g.loop_count() >= 1);
        assert!(resolve_state(&d, &rules(), &StateSelector(vec![0])).is_err());
    }

    #[test]
    fn skeleton_rules_report_first_incomplete_rule() {
        let rs: RuleSet = RuleSet::parse(include_str!("../rules/label-bracket.rules")).unwrap();
        let d = GraphDiagram::parse("O[+]").unwrap();
        let err = bracket(&d, &rs, BracketOptions::default()).unwrap_err();
        assert_eq!(err.to_string(), "ruleset incomplete: RS.1");
    }

    #[test]
    fn uncovered_crossing_is_reported() {
        let text = KAUFFMAN.replace("smoothing RS.2 negative:", "smoothing RS.2 positive:");
        let rs: RuleSet = RuleSet::parse(&text).unwrap();
        let d = GraphDiagram::parse("X[1,2,2,1]").unwrap();
        assert!(matches!(
            bracket(&d, &rs, BracketOptions::default()),
            Err(Error::UncoveredCrossing { .. })
        ));
    }
}
