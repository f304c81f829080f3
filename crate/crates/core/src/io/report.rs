//! Conflict statistics from transaction logs (verbosity 4).
//!
//! A call of presolver `p` is a round in which `p` found at least one
//! transaction. For an ordered pair `(p, q)` the report counts the rounds in
//! which both were called, the rounds in which a transaction of `p` was
//! discarded because of an earlier transaction of `q`, the transactions `p`
//! found in the common rounds, and how many of the discarded ones were
//! redundant.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::presolvers::{Tier, DESCRIPTORS};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct PairCounts {
    pub common_calls: usize,
    pub conflicting_calls: usize,
    /// Transactions of the first presolver in the common calls.
    pub transactions: usize,
    pub conflicts: usize,
    pub redundant: usize,
}

impl PairCounts {
    fn merge(&mut self, other: &PairCounts) {
        self.common_calls += other.common_calls;
        self.conflicting_calls += other.conflicting_calls;
        self.transactions += other.transactions;
        self.conflicts += other.conflicts;
        self.redundant += other.redundant;
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ConflictReport {
    pub logs: usize,
    pub calls: BTreeMap<String, usize>,
    pub transactions: BTreeMap<String, usize>,
    pub discarded: BTreeMap<String, usize>,
    pub pairs: BTreeMap<(String, String), PairCounts>,
}

#[derive(Default)]
struct Round {
    found: BTreeMap<String, usize>,
    conflicts: BTreeMap<(String, String), (usize, usize)>,
}

/// Fields of a `transaction` log line: presolver, status, conflicting
/// presolver and the redundancy flag.
fn transaction_line(line: &str) -> Option<(&str, &str, Option<&str>, bool)> {
    let t: Vec<&str> = line.split_whitespace().collect();
    match t[..] {
        ["transaction", _, "presolver", p, "status", s, "conflict", q, "redundant", r] => {
            Some((p, s, (q != "-").then_some(q), r == "1"))
        }
        _ => None,
    }
}

impl ConflictReport {
    /// Report for one log.
    pub fn from_log(text: &str) -> Self {
        let mut report = ConflictReport {
            logs: 1,
            ..ConflictReport::default()
        };
        let mut round = Round::default();
        for line in text.lines() {
            if line.starts_with("round ") {
                report.close(std::mem::take(&mut round));
                continue;
            }
            let Some((p, status, q, redundant)) = transaction_line(line) else {
                continue;
            };
            *round.found.entry(p.to_string()).or_default() += 1;
            if status == "DISCARDED" {
                *report.discarded.entry(p.to_string()).or_default() += 1;
            }
            if let Some(q) = q {
                let c = round.conflicts.entry((p.to_string(), q.to_string())).or_default();
                c.0 += 1;
                c.1 += redundant as usize;
            }
        }
        report.close(round);
        report
    }

    fn close(&mut self, mut round: Round) {
        for (_, q) in round.conflicts.keys() {
            round.found.entry(q.clone()).or_default();
        }
        for (p, &n) in &round.found {
            *self.calls.entry(p.clone()).or_default() += (n > 0) as usize;
            *self.transactions.entry(p.clone()).or_default() += n;
        }
        for (p, &n) in &round.found {
            for q in round.found.keys() {
                let pair = self.pairs.entry((p.clone(), q.clone())).or_default();
                pair.common_calls += 1;
                pair.transactions += n;
                if let Some(&(c, r)) = round.conflicts.get(&(p.clone(), q.clone())) {
                    pair.conflicting_calls += 1;
                    pair.conflicts += c;
                    pair.redundant += r;
                }
            }
        }
    }

    pub fn merge(&mut self, other: &ConflictReport) {
        self.logs += other.logs;
        for (k, v) in &other.calls {
            *self.calls.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.transactions {
            *self.transactions.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.discarded {
            *self.discarded.entry(k.clone()).or_default() += v;
        }
        for (k, v) in &other.pairs {
            self.pairs.entry(k.clone()).or_default().merge(v);
        }
    }

    pub fn pair(&self, p: &str, q: &str) -> PairCounts {
        self.pairs.get(&(p.to_string(), q.to_string())).copied().unwrap_or_default()
    }

    /// Matrices of conflicting over common calls for the presolvers of each
    /// tier (rows: discarded presolver, columns: the one it conflicted
    /// with), then a ledger of all conflicting pairs.
    pub fn render(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "logs {}", self.logs);
        let total: usize = self.transactions.values().sum();
        let discarded: usize = self.discarded.values().sum();
        let _ = writeln!(out, "transactions {total} discarded {discarded}");
        for tier in [Tier::Fast, Tier::Medium, Tier::Exhaustive] {
            let names: Vec<&str> = DESCRIPTORS.iter().filter(|d| d.tier == tier).map(|d| d.name).collect();
            self.matrix(&mut out, &format!("{} presolvers", tier.name().to_lowercase()), &names);
        }
        let known: BTreeSet<&str> = DESCRIPTORS.iter().map(|d| d.name).collect();
        let others: Vec<&str> = self.calls.keys().map(String::as_str).filter(|n| !known.contains(n)).collect();
        if !others.is_empty() {
            self.matrix(&mut out, "other presolvers", &others);
        }
        self.ledger(&mut out);
        out
    }

    fn matrix(&self, out: &mut String, title: &str, names: &[&str]) {
        let width = names.iter().map(|n| n.len()).max().unwrap_or(0).max(9);
        let _ = writeln!(out, "\nconflicting/common calls, {title}");
        let _ = write!(out, "{:width$}", "");
        for q in names {
            let _ = write!(out, " {q:>width$}");
        }
        out.push('\n');
        for p in names {
            let _ = write!(out, "{p:width$}");
            for q in names {
                let c = self.pair(p, q);
                let cell = if c.common_calls == 0 {
                    "-".to_string()
                } else {
                    format!("{}/{}", c.conflicting_calls, c.common_calls)
                };
                let _ = write!(out, " {cell:>width$}");
            }
            out.push('\n');
        }
    }

    fn ledger(&self, out: &mut String) {
        let mut rows: Vec<(&(String, String), &PairCounts)> = self.pairs.iter().filter(|(_, c)| c.conflicts > 0).collect();
        rows.sort_by(|a, b| b.1.conflicts.cmp(&a.1.conflicts).then_with(|| a.0.cmp(b.0)));
        let _ = writeln!(out, "\nconflict ledger");
        let _ = writeln!(
            out,
            "{:<16} {:<16} {:>8} {:>8} {:>8} {:>8} {:>8}",
            "p", "q", "t^p", "c^p-q", "r^p-q", "c/t", "r/c"
        );
        for ((p, q), c) in rows {
            let ratio = |a: usize, b: usize| if b == 0 { 0.0 } else { a as f64 / b as f64 };
            let _ = writeln!(
                out,
                "{p:<16} {q:<16} {:>8} {:>8} {:>8} {:>8.3} {:>8.3}",
                c.transactions,
                c.conflicts,
                c.redundant,
                ratio(c.conflicts, c.transactions),
                ratio(c.redundant, c.conflicts)
            );
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    const LOG: &str = "round 1 tier FAST
call colsingleton transactions 2
transaction 0 presolver colsingleton status APPLIED conflict - redundant 0
colsingleton row 0 col 0 val - kind SUBSTITUTE_COLUMN status APPLIED
transaction 1 presolver colsingleton status DISCARDED conflict colsingleton redundant 0
transaction 2 presolver propagation status DISCARDED conflict colsingleton redundant 1
round 2 tier FAST
transaction 3 presolver propagation status APPLIED conflict - redundant 0
";

    #[test]
    fn counts_from_a_crafted_log() {
        let r = ConflictReport::from_log(LOG);
        assert_eq!(r.calls["colsingleton"], 1);
        assert_eq!(r.calls["propagation"], 2);
        assert_eq!(
            r.pair("colsingleton", "colsingleton"),
            PairCounts { common_calls: 1, conflicting_calls: 1, transactions: 2, conflicts: 1, redundant: 0 }
        );
        assert_eq!(
            r.pair("propagation", "colsingleton"),
            PairCounts { common_calls: 1, conflicting_calls: 1, transactions: 1, conflicts: 1, redundant: 1 }
        );
        assert_eq!(r.pair("colsingleton", "propagation").conflicts, 0);
        let text = r.render();
        assert!(text.contains("conflicting/common calls, fast presolvers"));
        assert!(text.contains("conflict ledger"));
        let mut twice = r.clone();
        twice.merge(&r);
        assert_eq!(twice.pair("colsingleton", "colsingleton").conflicts, 2);
        assert_eq!(twice.logs, 2);
    }

    fn arb_log() -> impl Strategy<Value = String> {
        let names = ["colsingleton", "propagation", "dualfix"];
        let line = (0..3usize, 0..3usize, 0..4usize, any::<bool>(), 0..6usize);
        prop::collection::vec(line, 0..60).prop_map(move |lines| {
            let mut out = String::new();
            for (id, (p, q, status, redundant, round)) in lines.into_iter().enumerate() {
                if round == 0 {
                    out.push_str("round 1 tier FAST\n");
                }
                let (status, conflict) = match status {
                    0 => ("APPLIED", "-"),
                    1 => ("CANCELED", "-"),
                    _ => ("DISCARDED", names[q]),
                };
                let redundant = (redundant && conflict != "-") as u8;
                out.push_str(&format!(
                    "transaction {id} presolver {} status {status} conflict {conflict} redundant {redundant}\n",
                    names[p]
                ));
            }
            out
        })
    }

    proptest! {
        #[test]
        fn report_invariants(log in arb_log()) {
            let r = ConflictReport::from_log(&log);
            for c in r.pairs.values() {
                prop_assert!(c.redundant <= c.conflicts);
                prop_assert!(c.conflicting_calls <= c.common_calls);
                prop_assert!(c.conflicts <= c.transactions);
            }
        }
    }
}
