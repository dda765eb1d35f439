//! Formal sums of canonical trigraphs with Laurent coefficients.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::laurent::Laurent;
use crate::scalar::Scalar;
use crate::trigraph::{CanonicalKey, LabelTrigraph};

#[derive(Clone, Debug, PartialEq)]
pub struct FormalSum<R: Scalar = i64> {
    terms: BTreeMap<CanonicalKey, Laurent<R>>,
    reps: BTreeMap<CanonicalKey, LabelTrigraph>,
    allow_mirror: bool,
}

/// One term of a sum in serializable form.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermRecord {
    pub canonical_key: String,
    pub representative: String,
    pub coefficient: String,
}

impl<R: Scalar> FormalSum<R> {
    pub fn zero(allow_mirror: bool) -> Self {
        FormalSum {
            terms: BTreeMap::new(),
            reps: BTreeMap::new(),
            allow_mirror,
        }
    }

    pub fn allow_mirror(&self) -> bool {
        self.allow_mirror
    }

    pub fn singleton(coeff: Laurent<R>, g: &LabelTrigraph, allow_mirror: bool) -> Result<Self> {
        let mut s = Self::zero(allow_mirror);
        s.add_term(coeff, g)?;
        Ok(s)
    }

    /// Adds `coeff · g`, canonicalizing `g`.
    pub fn add_term(&mut self, coeff: Laurent<R>, g: &LabelTrigraph) -> Result<()> {
        let (key, rep) = g.canonical_form(self.allow_mirror)?;
        self.add_keyed(key, rep, coeff);
        Ok(())
    }

    pub(crate) fn add_keyed(&mut self, key: CanonicalKey, rep: LabelTrigraph, coeff: Laurent<R>) {
        if coeff.is_zero() {
            return;
        }
        let total = match self.terms.get(&key) {
            Some(c) => c + &coeff,
            None => coeff,
        };
        if total.is_zero() {
            self.terms.remove(&key);
            self.reps.remove(&key);
        } else {
            self.reps.entry(key.clone()).or_insert(rep);
            self.terms.insert(key, total);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, key: &CanonicalKey) -> Option<&Laurent<R>> {
        self.terms.get(key)
    }

    pub fn representative(&self, key: &CanonicalKey) -> Option<&LabelTrigraph> {
        self.reps.get(key)
    }

    pub fn keys(&self) -> impl Iterator<Item = &CanonicalKey> {
        self.terms.keys()
    }

    /// Terms in key order: `(key, coefficient, representative)`.
    pub fn iter(&self) -> impl Iterator<Item = (&CanonicalKey, &Laurent<R>, &LabelTrigraph)> {
        self.terms.iter().map(move |(k, c)| (k, c, &self.reps[k]))
    }

    /// The coefficient of the empty trigraph when it is the only term.
    pub fn as_scalar(&self) -> Option<Laurent<R>> {
        match self.terms.len() {
            0 => Some(Laurent::zero()),
            1 => {
                let (k, c) = self.terms.iter().next()?;
                self.reps[k].is_empty().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn scaled(&self, c: &Laurent<R>) -> Self {
        let mut out = Self::zero(self.allow_mirror);
        for (k, v, g) in self.iter() {
            out.add_keyed(k.clone(), g.clone(), v * c);
        }
        out
    }

    /// Product over disjoint unions of generators.
    pub fn product(&self, other: &Self) -> Result<Self> {
        let mut out = Self::zero(self.allow_mirror);
        for (_, ca, ga) in self.iter() {
            for (_, cb, gb) in other.iter() {
                out.add_term(ca * cb, &ga.union(gb))?;
            }
        }
        Ok(out)
    }

    /// Highest ring variable index used by any coefficient, plus one.
    pub fn ring_width(&self) -> usize {
        self.terms.values().map(Laurent::width).max().unwrap_or(0)
    }

    /// Stable digest of the whole sum: the sorted `(key, coefficient)` list.
    pub fn canonical_hash(&self) -> String {
        let mut s = String::new();
        for (k, c) in &self.terms {
            let _ = write!(s, "{k}=");
            for (m, v) in c.terms() {
                let _ = write!(s, "{v}{:?};", m.exponents());
            }
            s.push('\n');
        }
        s
    }

    pub fn records(&self, vars: &[String]) -> Vec<TermRecord> {
        self.iter()
            .map(|(k, c, g)| TermRecord {
                canonical_key: k.to_string(),
                representative: g.to_text(),
                coefficient: c.display(vars).to_string(),
            })
            .collect()
    }

    /// Printed as `COEFF * [TRIGRAPH] + ...`, one term per line with
    /// `lines`, otherwise on one line.
    pub fn to_text(&self, vars: &[String], lines: bool) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let terms: Vec<String> = self
            .iter()
            .map(|(_, c, g)| format!("{} * [{}]", c.to_token(vars), g.to_text()))
            .collect();
        if lines {
            terms.join("\n") + "\n"
        } else {
            terms.join(" + ")
        }
    }

    /// Parses sums written as `COEFF * FRAGMENT` terms separated by `+`
    /// (or `-`), one or more per line. Fragments may be wrapped in `[...]`.
    pub fn parse(text: &str, vars: &[String], allow_mirror: bool) -> Result<Self> {
        let mut out = Self::zero(allow_mirror);
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() || line == "0" {
                continue;
            }
            let terms = parse_terms(line, vars).map_err(|e| relocate(e, lineno + 1))?;
            for (c, g) in terms {
                out.add_term(c, &g)?;
            }
        }
        Ok(out)
    }
}

fn relocate(e: Error, line: usize) -> Error {
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

fn is_fragment_token(tok: &str) -> bool {
    let t = tok.trim_start_matches('[');
    t == "empty"
        || t == "empty]"
        || t.starts_with("V.")
        || t.starts_with("L[")
        || t.starts_with("O[")
}

/// Splits `COEFF * FRAG + COEFF * FRAG ...` into terms.
pub(crate) fn parse_terms<R: Scalar>(
    line: &str,
    vars: &[String],
) -> Result<Vec<(Laurent<R>, LabelTrigraph)>> {
    let toks: Vec<&str> = line.split_whitespace().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let mut negate = false;
    while i < toks.len() {
        // coefficient part
        let mut coeff_toks = Vec::new();
        if !is_fragment_token(toks[i]) {
            let mut depth = 0i32;
            while i < toks.len() {
                let t = toks[i];
                if t == "*" && depth == 0 {
                    break;
                }
                depth += t.matches('(').count() as i32 - t.matches(')').count() as i32;
                coeff_toks.push(t);
                i += 1;
            }
            if i == toks.len() {
                return Err(Error::syntax(
                    0,
                    1,
                    format!("expected '*' after coefficient in '{line}'"),
                ));
            }
            i += 1;
        }
        let mut coeff = if coeff_toks.is_empty() {
            Laurent::one()
        } else {
            Laurent::parse(&coeff_toks.join(" "), vars)?
        };
        if negate {
            coeff = -coeff;
        }
        let mut frag_toks = Vec::new();
        while i < toks.len() && toks[i] != "+" && toks[i] != "-" {
            frag_toks.push(toks[i]);
            i += 1;
        }
        if frag_toks.is_empty() {
            return Err(Error::syntax(0, 1, format!("missing fragment in '{line}'")));
        }
        let mut text = frag_toks.join(" ");
        if text.starts_with('[') {
            if !text.ends_with(']') {
                return Err(Error::syntax(0, 1, "unbalanced '[' around fragment"));
            }
            text = text[1..text.len() - 1].to_string();
        }
        out.push((coeff, LabelTrigraph::parse(&text)?));
        if i < toks.len() {
            negate = toks[i] == "-";
            i += 1;
            if i == toks.len() {
                return Err(Error::syntax(0, 1, "dangling '+'"));
            }
        }
    }
    Ok(out)
}
