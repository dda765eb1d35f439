//! Rewriting formal sums with relation rules: single steps, greedy
//! normalization, and a certificate-producing equivalence search.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::Laurent;
use crate::matching::{complement, match_sites, replace, Site};
use crate::rules::{DirectionHint, RelationRule, RuleSet};
use crate::scalar::Scalar;
use crate::sum::FormalSum;
use crate::trigraph::{CanonicalKey, LabelTrigraph};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum RuleDirection {
    /// Replace an occurrence of the left-hand side by the right-hand side.
    Forward,
    /// Replace an occurrence of right-hand term `term` (0-based) by solving
    /// the relation for it.
    Backward { term: usize },
}

/// One rewrite of one term of a sum. `site` indexes the valid sites of the
/// pattern in the term's canonical representative.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Step {
    pub key: CanonicalKey,
    pub rule: String,
    pub direction: RuleDirection,
    pub site: usize,
}

/// A site together with what the rewrite puts there: terms
/// `(multiplier, trigraph)` scaled by `coefficient / divisor`.
#[derive(Clone, Debug)]
pub struct Rewrite<R: Scalar = i64> {
    pub site: Site,
    pub divisor: Laurent<R>,
    pub outputs: Vec<(Laurent<R>, LabelTrigraph)>,
}

fn pattern<R: Scalar>(rule: &RelationRule<R>, dir: RuleDirection) -> Result<&LabelTrigraph> {
    match dir {
        RuleDirection::Forward => Ok(rule.lhs.graph()),
        RuleDirection::Backward { term } => {
            if rule.hint != DirectionHint::Both {
                return Err(Error::BadStep(format!(
                    "rule {} only applies left to right",
                    rule.id
                )));
            }
            rule.rhs.get(term).map(|(_, f)| f.graph()).ok_or_else(|| {
                Error::BadStep(format!("rule {} has no right-hand term {term}", rule.id))
            })
        }
    }
}

/// All sites of a rule in a closed trigraph whose rewrite yields valid
/// planar trigraphs, in deterministic order.
pub fn rewrites<R: Scalar>(
    host: &LabelTrigraph,
    rule: &RelationRule<R>,
    dir: RuleDirection,
) -> Result<Vec<Rewrite<R>>> {
    let pat = pattern(rule, dir)?;
    let mut out = Vec::new();
    'sites: for site in match_sites(host, pat) {
        let Ok(c) = complement(host, pat, &site) else {
            continue;
        };
        let plan: Vec<(Laurent<R>, &LabelTrigraph)> = match dir {
            RuleDirection::Forward => rule
                .rhs
                .iter()
                .map(|(c, f)| (c.clone(), f.graph()))
                .collect(),
            RuleDirection::Backward { term } => std::iter::once((Laurent::one(), rule.lhs.graph()))
                .chain(
                    rule.rhs
                        .iter()
                        .enumerate()
                        .filter(|(i, _)| *i != term)
                        .map(|(_, (c, f))| (-c, f.graph())),
                )
                .collect(),
        };
        let mut outputs = Vec::with_capacity(plan.len());
        for (m, g) in plan {
            match replace(&c, g, &site.bindings) {
                Ok(t) => outputs.push((m, t)),
                Err(_) => continue 'sites,
            }
        }
        let divisor = match dir {
            RuleDirection::Forward => Laurent::one(),
            RuleDirection::Backward { term } => rule.rhs[term].0.clone(),
        };
        out.push(Rewrite {
            site,
            divisor,
            outputs,
        });
    }
    Ok(out)
}

fn rewrite_sum<R: Scalar>(
    sum: &FormalSum<R>,
    key: &CanonicalKey,
    rule_id: &str,
    rw: &Rewrite<R>,
) -> Result<FormalSum<R>> {
    let a = sum
        .coefficient(key)
        .ok_or_else(|| Error::BadStep(format!("no term with key {key}")))?;
    let scaled = a
        .exact_div(&rw.divisor)
        .ok_or_else(|| Error::NonInvertible {
            rule: rule_id.to_string(),
        })?;
    let mut out = sum.clone();
    let rep = sum
        .representative(key)
        .expect("term has a representative")
        .clone();
    out.add_keyed(key.clone(), rep, -a);
    for (m, g) in &rw.outputs {
        out.add_term(&scaled * m, g)?;
    }
    Ok(out)
}

pub fn apply_step<R: Scalar>(
    rules: &RuleSet<R>,
    sum: &FormalSum<R>,
    step: &Step,
) -> Result<FormalSum<R>> {
    let rule = rules
        .relation(&step.rule)
        .ok_or_else(|| Error::BadStep(format!("unknown rule {}", step.rule)))?;
    let rep = sum
        .representative(&step.key)
        .ok_or_else(|| Error::BadStep(format!("no term with key {}", step.key)))?;
    let rws = rewrites(rep, rule, step.direction)?;
    let rw = rws.get(step.site).ok_or_else(|| {
        Error::InvalidSite(format!(
            "rule {} has {} sites, asked for {}",
            rule.id,
            rws.len(),
            step.site
        ))
    })?;
    rewrite_sum(sum, &step.key, &rule.id, rw)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NormalizeReport {
    pub steps: Vec<Step>,
    /// No normalizing rule applies to the result.
    pub fixpoint: bool,
}

/// Greedy normalization: repeatedly apply the first applicable
/// left-to-right rule (lowest term key, then lowest rule id, then first
/// site) until none applies or `max_steps` rewrites were made.
pub fn normalize<R: Scalar>(
    rules: &RuleSet<R>,
    sum: &FormalSum<R>,
    max_steps: usize,
) -> Result<(FormalSum<R>, NormalizeReport)> {
    let ordered = rules.normalizing_rules();
    let mut cur = sum.clone();
    let mut steps = Vec::new();
    if max_steps == 0 {
        return Ok((
            cur,
            NormalizeReport {
                steps,
                fixpoint: false,
            },
        ));
    }
    loop {
        let mut found = None;
        'scan: for (key, _, rep) in cur.iter() {
            for rule in &ordered {
                if let Some(rw) = rewrites(rep, rule, RuleDirection::Forward)?
                    .into_iter()
                    .next()
                {
                    found = Some((key.clone(), rule.id.clone(), rw));
                    break 'scan;
                }
            }
        }
        let applied = found.is_some();
        if let Some((key, rule, rw)) = found {
            cur = rewrite_sum(&cur, &key, &rule, &rw)?;
            steps.push(Step {
                key,
                rule,
                direction: RuleDirection::Forward,
                site: 0,
            });
        }
        if !applied {
            return Ok((
                cur,
                NormalizeReport {
                    steps,
                    fixpoint: true,
                },
            ));
        }
        if steps.len() >= max_steps {
            return Ok((
                cur,
                NormalizeReport {
                    steps,
                    fixpoint: false,
                },
            ));
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Budget {
    /// Total distinct sums visited over both directions.
    pub max_nodes: usize,
    /// Rewrite steps from either end.
    pub max_depth: usize,
    /// Worker threads for frontier expansion (0: rayon default).
    pub workers: usize,
}

impl Default for Budget {
    fn default() -> Self {
        Budget {
            max_nodes: 10_000,
            max_depth: 8,
            workers: 0,
        }
    }
}

/// Rewrite paths from both inputs to a common sum.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Trace {
    pub from_a: Vec<Step>,
    pub from_b: Vec<Step>,
}

impl Trace {
    pub fn len(&self) -> usize {
        self.from_a.len() + self.from_b.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Replays both halves and checks they meet.
    pub fn verify<R: Scalar>(
        &self,
        rules: &RuleSet<R>,
        a: &FormalSum<R>,
        b: &FormalSum<R>,
    ) -> Result<bool> {
        let run = |start: &FormalSum<R>, steps: &[Step]| -> Result<FormalSum<R>> {
            steps
                .iter()
                .try_fold(start.clone(), |s, st| apply_step(rules, &s, st))
        };
        Ok(run(a, &self.from_a)?.canonical_hash() == run(b, &self.from_b)?.canonical_hash())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum Equivalence {
    Equal { trace: Trace },
    Unknown { explored: usize, reason: String },
}

/// All single-step successors of a sum, in deterministic order.
pub fn successors<R: Scalar>(
    rules: &RuleSet<R>,
    sum: &FormalSum<R>,
) -> Result<Vec<(Step, FormalSum<R>)>> {
    let mut out = Vec::new();
    for (key, _, rep) in sum.iter() {
        for rule in rules.all_relations() {
            let mut dirs = vec![RuleDirection::Forward];
            if rule.hint == DirectionHint::Both {
                dirs.extend((0..rule.rhs.len()).map(|term| RuleDirection::Backward { term }));
            }
            for dir in dirs {
                for (i, rw) in rewrites(rep, rule, dir)?.iter().enumerate() {
                    let next = match rewrite_sum(sum, key, &rule.id, rw) {
                        Ok(n) => n,
                        Err(Error::NonInvertible { .. }) => continue,
                        Err(e) => return Err(e),
                    };
                    let step = Step {
                        key: key.clone(),
                        rule: rule.id.clone(),
                        direction: dir,
                        site: i,
                    };
                    out.push((step, next));
                }
            }
        }
    }
    Ok(out)
}

struct Side<R: Scalar> {
    seen: HashMap<String, (Option<(String, Step)>, usize)>,
    sums: HashMap<String, FormalSum<R>>,
    frontier: Vec<String>,
}

impl<R: Scalar> Side<R> {
    fn new(s: &FormalSum<R>) -> Self {
        let h = s.canonical_hash();
        Side {
            seen: HashMap::from([(h.clone(), (None, 0))]),
            sums: HashMap::from([(h.clone(), s.clone())]),
            frontier: vec![h],
        }
    }

    fn path_to(&self, mut h: String) -> Vec<Step> {
        let mut steps = Vec::new();
        while let Some((Some((parent, step)), _)) = self.seen.get(&h) {
            steps.push(step.clone());
            h = parent.clone();
        }
        steps.reverse();
        steps
    }
}

/// Searches for rewrite paths joining `a` and `b`, expanding the smaller
/// frontier breadth-first. `Equal` is only returned after the trace has
/// been replayed successfully.
pub fn equivalent<R: Scalar>(
    rules: &RuleSet<R>,
    a: &FormalSum<R>,
    b: &FormalSum<R>,
    budget: Budget,
) -> Result<Equivalence> {
    let width = rules.vars.len();
    for (name, s) in [("first", a), ("second", b)] {
        if s.ring_width() > width {
            return Err(Error::RingMismatch(format!(
                "{name} sum uses {} ring variables, rule set {} has {width}",
                s.ring_width(),
                rules.name
            )));
        }
    }
    if a.allow_mirror() != b.allow_mirror() {
        return Err(Error::RingMismatch(
            "sums disagree on mirror identification".into(),
        ));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(budget.workers)
        .build()
        .map_err(|e| Error::BadStep(format!("cannot start workers: {e}")))?;
    let mut sides = [Side::new(a), Side::new(b)];
    let finish = |sides: &[Side<R>; 2], h: &String| -> Result<Equivalence> {
        let trace = Trace {
            from_a: sides[0].path_to(h.clone()),
            from_b: sides[1].path_to(h.clone()),
        };
        if !trace.verify(rules, a, b)? {
            return Err(Error::BadStep("trace failed to replay".into()));
        }
        Ok(Equivalence::Equal { trace })
    };
    let start = sides[0].frontier[0].clone();
    if sides[1].seen.contains_key(&start) {
        return finish(&sides, &start);
    }
    let explored = |sides: &[Side<R>; 2]| sides[0].seen.len() + sides[1].seen.len();
    let mut depth = [0usize; 2];
    loop {
        let open: Vec<usize> = (0..2)
            .filter(|&s| !sides[s].frontier.is_empty() && depth[s] < budget.max_depth)
            .collect();
        let Some(&s) = open.iter().min_by_key(|&&s| (sides[s].frontier.len(), s)) else {
            let reason = if sides.iter().any(|x| !x.frontier.is_empty()) {
                "depth budget exhausted"
            } else {
                "search space exhausted"
            };
            return Ok(Equivalence::Unknown {
                explored: explored(&sides),
                reason: reason.into(),
            });
        };
        let frontier = std::mem::take(&mut sides[s].frontier);
        let expanded: Vec<Result<Vec<(Step, FormalSum<R>)>>> = pool.install(|| {
            frontier
                .par_iter()
                .map(|h| successors(rules, &sides[s].sums[h]))
                .collect()
        });
        depth[s] += 1;
        for (h, succ) in frontier.iter().zip(expanded) {
            for (step, next) in succ? {
                let nh = next.canonical_hash();
                if sides[s].seen.contains_key(&nh) {
                    continue;
                }
                sides[s]
                    .seen
                    .insert(nh.clone(), (Some((h.clone(), step)), depth[s]));
                if sides[1 - s].seen.contains_key(&nh) {
                    return finish(&sides, &nh);
                }
                sides[s].sums.insert(nh.clone(), next);
                sides[s].frontier.push(nh);
                if explored(&sides) >= budget.max_nodes {
                    return Ok(Equivalence::Unknown {
                        explored: explored(&sides),
                        reason: "node budget exhausted".into(),
                    });
                }
            }
        }
    }
}

/// Keys of a sum mapped to their coefficients, for reports.
pub fn coefficients<R: Scalar>(sum: &FormalSum<R>) -> BTreeMap<CanonicalKey, Laurent<R>> {
    sum.iter().map(|(k, c, _)| (k.clone(), c.clone())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    const TOY: &str = "ruleset toy
ring A
vertexsig V.9 thick thick thick un un un
vertexsig V.10 thick thick thick un un un
rule R1:
  lhs: V.10[1,2,3] V.9[3,4,5] L[1,1] L[2,2] L[3,4] L[4,5]
  rhs: A * L[1,1] L[2,1] L[3,2] L[4,2]
scalar O[u] -> -A^2 - A^-2
";

    fn vars() -> Vec<String> {
        vec!["A".into()]
    }

    fn sum(text: &str) -> FormalSum {
        FormalSum::parse(text, &vars(), false).unwrap()
    }

    #[test]
    fn normalize_evaluates_loops() {
        let rules: RuleSet = RuleSet::parse(TOY).unwrap();
        let (out, rep) = normalize(&rules, &sum("1 * O[u] O[u]"), 100).unwrap();
        assert!(rep.fixpoint);
        assert_eq!(rep.steps.len(), 2);
        assert_eq!(
            out.as_scalar().unwrap().display(&vars()).to_string(),
            "A^4 + 2 + A^-4"
        );
        let (_, rep0) = normalize(&rules, &sum("1 * O[u]"), 0).unwrap();
        assert!(!rep0.fixpoint);
    }

    #[test]
    fn forward_and_backward_steps_are_inverse() {
        let rules: RuleSet = RuleSet::parse(TOY).unwrap();
        // theta: contracting one edge pair leaves a single loop
        let theta = sum("1 * V.10[1,2,3] V.9[3,2,1]");
        let succ = successors(&rules, &theta).unwrap();
        assert!(!succ.is_empty());
        let (step, next) = &succ[0];
        assert_eq!(step.direction, RuleDirection::Forward);
        assert_eq!(next.len(), 1);
        let (k, c, g) = next.iter().next().unwrap();
        assert_eq!(g.loop_count(), 1);
        assert_eq!(c.display(&vars()).to_string(), "A");
        // backward from the loop gets back to a theta
        let back = successors(&rules, next)
            .unwrap()
            .into_iter()
            .find(|(s, _)| s.key == *k && s.direction == RuleDirection::Backward { term: 0 })
            .unwrap();
        assert_eq!(back.1.canonical_hash(), theta.canonical_hash());
    }

    #[test]
    fn equivalent_finds_and_verifies_certificates() {
        let rules: RuleSet = RuleSet::parse(TOY).unwrap();
        let a = sum("1 * V.10[1,2,3] V.9[3,2,1]");
        let b = sum("(-A^3 - A^-1) * [empty]");
        match equivalent(&rules, &a, &b, Budget::default()).unwrap() {
            Equivalence::Equal { trace } => {
                assert!(trace.verify(&rules, &a, &b).unwrap());
                assert!(!trace.is_empty());
            }
            other => panic!("expected equal, got {other:?}"),
        }
        let c = sum("A * [empty]");
        let tight = Budget {
            max_nodes: 50,
            max_depth: 3,
            workers: 2,
        };
        assert!(matches!(
            equivalent(&rules, &a, &c, tight).unwrap(),
            Equivalence::Unknown { .. }
        ));
    }

    #[test]
    fn ring_mismatch_is_reported() {
        let rules: RuleSet = RuleSet::parse(TOY).unwrap();
        let two = vec!["A".to_string(), "B".to_string()];
        let b = FormalSum::parse("B * [empty]", &two, false).unwrap();
        assert!(matches!(
            equivalent(&rules, &sum("1 * [empty]"), &b, Budget::default()),
            Err(Error::RingMismatch(_))
        ));
    }

    #[test]
    fn invalid_site_is_an_error() {
        let rules: RuleSet = RuleSet::parse(TOY).unwrap();
        let s = sum("1 * O[u]");
        let key = s.keys().next().unwrap().clone();
        let step = Step {
            key,
            rule: "S1".into(),
            direction: RuleDirection::Forward,
            site: 5,
        };
        assert!(matches!(
            apply_step(&rules, &s, &step),
            Err(Error::InvalidSite(_))
        ));
    }
}
