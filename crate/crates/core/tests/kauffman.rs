mod common;

use common::{corpus, corpus_text, delta, kauffman, link_corpus, mul, poly, show, skein, Poly};
use label_bracket::diagram::GraphDiagram;
use label_bracket::rules::RuleSet;
use label_bracket::statesum::{
    bracket, enumerate_states, resolve_state, state_sum, BracketOptions,
};
use label_bracket::sum::FormalSum;
use label_bracket::BigInt;
use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::SeedableRng;

/// Classical values with a single loop worth 1, worked out by hand: the
/// kinks scale the unknot by `-A^{±3}`, the Hopf link is `-A^4 - A^-4` and
/// this trefoil is `A^-7 - A^-3 - A^5`. The engine counts every loop, so the
/// expected brackets carry one more factor of `delta`.
fn golden(name: &str) -> Poly {
    let one_loop = match name {
        "unknot" => poly(&[(1, 0)]),
        "kink-left" => poly(&[(-1, 3)]),
        "kink-right" => poly(&[(-1, -3)]),
        "hopf" => poly(&[(-1, 4), (-1, -4)]),
        "trefoil" => poly(&[(1, -7), (-1, -3), (-1, 5)]),
        _ => unreachable!(),
    };
    mul(&delta(), &one_loop)
}

fn scalar_bracket(d: &GraphDiagram, workers: usize) -> String {
    let opts = BracketOptions {
        workers,
        ..Default::default()
    };
    let (s, rep) = bracket(d, &kauffman(), opts).unwrap();
    assert!(rep.normalization.fixpoint);
    s.as_scalar()
        .expect("links evaluate to scalars")
        .display(&["A".to_string()])
        .to_string()
}

#[test]
fn hand_values_match_engine_and_skein_recursion() {
    for name in ["unknot", "kink-left", "kink-right", "hopf", "trefoil"] {
        let text = corpus_text(name);
        let want = show(&golden(name));
        assert_eq!(show(&skein(&text)), want, "skein {name}");
        assert_eq!(
            scalar_bracket(&GraphDiagram::parse(&text).unwrap(), 0),
            want,
            "engine {name}"
        );
    }
}

#[test]
fn every_link_diagram_matches_the_skein_recursion() {
    for (name, text, d) in link_corpus() {
        assert_eq!(scalar_bracket(&d, 0), show(&skein(&text)), "{name}");
    }
}

#[test]
fn state_counts_are_powers_of_two() {
    for (name, _, d) in corpus() {
        let n = d.crossing_count();
        assert_eq!(enumerate_states(n).count(), 1 << n, "{name}");
        let (_, rep) = bracket(&d, &kauffman(), BracketOptions::default()).unwrap();
        assert_eq!(rep.states, 1 << n, "{name}");
    }
}

#[test]
fn sum_does_not_depend_on_state_order() {
    let rules = kauffman();
    let mut rng = StdRng::seed_from_u64(3);
    for (name, _, d) in corpus() {
        let want = state_sum(&d, &rules, 1).unwrap().canonical_hash();
        let mut states: Vec<_> = enumerate_states(d.crossing_count()).collect();
        for _ in 0..3 {
            states.shuffle(&mut rng);
            let mut s = FormalSum::zero(rules.allow_mirror);
            for st in &states {
                let (c, g) = resolve_state(&d, &rules, st).unwrap();
                s.add_term(c, &g).unwrap();
            }
            assert_eq!(s.canonical_hash(), want, "{name}");
        }
    }
}

/// Renumbers every arc label in a diagram text by `offset`.
fn shifted(text: &str, offset: u64) -> String {
    let mut out = String::new();
    for tok in text
        .lines()
        .map(|l| l.split('#').next().unwrap())
        .flat_map(str::split_whitespace)
    {
        let open = tok.find('[').unwrap();
        let (head, body) = (&tok[..open], &tok[open + 1..tok.len() - 1]);
        if head == "O" {
            out += &format!("{tok}\n");
            continue;
        }
        let ends: Vec<String> = body
            .split(',')
            .map(|p| {
                let digits: String = p.chars().filter(char::is_ascii_digit).collect();
                let suffix: String = p.chars().filter(|c| !c.is_ascii_digit()).collect();
                format!("{}{suffix}", digits.parse::<u64>().unwrap() + offset)
            })
            .collect();
        out += &format!("{head}[{}]\n", ends.join(","));
    }
    out
}

#[test]
fn brackets_multiply_over_split_unions() {
    let rules = kauffman();
    let opts = BracketOptions::default();
    let pairs = [
        ("unknot", "trefoil"),
        ("hopf", "kink-left"),
        ("theta", "trefoil"),
        ("handcuff", "theta"),
    ];
    for (a, b) in pairs {
        let (ta, tb) = (corpus_text(a), corpus_text(b));
        let da = GraphDiagram::parse(&ta).unwrap();
        let db = GraphDiagram::parse(&tb).unwrap();
        let both = GraphDiagram::parse(&(ta.clone() + &shifted(&tb, 100))).unwrap();
        let (sa, _) = bracket(&da, &rules, opts).unwrap();
        let (sb, _) = bracket(&db, &rules, opts).unwrap();
        let (s, _) = bracket(&both, &rules, opts).unwrap();
        assert_eq!(
            s.canonical_hash(),
            sa.product(&sb).unwrap().canonical_hash(),
            "{a} + {b}"
        );
    }
}

#[test]
fn worker_count_does_not_change_results() {
    let rules = kauffman();
    for (name, _, d) in corpus() {
        let run = |workers| {
            let opts = BracketOptions {
                workers,
                ..Default::default()
            };
            let (s, _) = bracket(&d, &rules, opts).unwrap();
            serde_json::to_string(&s.records(&rules.vars)).unwrap()
        };
        assert_eq!(run(1), run(8), "{name}");
    }
}

#[test]
fn big_integer_coefficients_agree() {
    let text = std::fs::read_to_string(common::rules_path("kauffman")).unwrap();
    let big: RuleSet<BigInt> = RuleSet::parse(&text).unwrap();
    let small = kauffman();
    for (name, _, d) in corpus() {
        let (a, _) = bracket(&d, &small, BracketOptions::default()).unwrap();
        let (b, _) = bracket(&d, &big, BracketOptions::default()).unwrap();
        assert_eq!(
            a.to_text(&small.vars, false),
            b.to_text(&big.vars, false),
            "{name}"
        );
    }
}
