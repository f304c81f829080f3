//! Run statistics as `key=value` lines.

use std::fmt::Write as _;
use std::time::Duration;

use super::IoError;
use crate::model::Problem;
use crate::numerics::Real;
use crate::scheduler::{PresolveResult, TxCounts};

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Statistics {
    pub entries: Vec<(String, String)>,
}

impl Statistics {
    pub fn new<R: Real>(original: &Problem<R>, result: &PresolveResult<R>, threads: usize, elapsed: Duration) -> Self {
        let mut s = Statistics::default();
        let st = &result.stats;
        s.push("status", result.status.name());
        s.push("mode", R::MODE.name());
        s.push("threads", threads);
        s.push("time_seconds", format!("{:.6}", elapsed.as_secs_f64()));
        s.push("rows_before", original.nrows());
        s.push("cols_before", original.ncols());
        s.push("nnz_before", original.matrix.nnz());
        s.push("rows_after", result.reduced.nrows());
        s.push("cols_after", result.reduced.ncols());
        s.push("nnz_after", result.reduced.matrix.nnz());
        s.push("rounds_fast", st.rounds_fast);
        s.push("rounds_medium", st.rounds_medium);
        s.push("rounds_exhaustive", st.rounds_exhaustive);
        s.push("rounds_total", st.rounds());
        s.push("delayed_enabled", st.delayed_enabled);
        s.push("bound_changes", st.changes.bound_changes);
        s.push("deleted_cols", st.changes.deleted_cols);
        s.push("side_changes", st.changes.side_changes);
        s.push("deleted_rows", st.changes.deleted_rows);
        s.push("coeff_changes", st.changes.coeff_changes);
        s.push_counts("transactions_", &st.transactions);
        for (name, counts) in &st.by_presolver {
            s.push(&format!("presolver.{name}.calls"), st.calls.get(name).copied().unwrap_or(0));
            s.push_counts(&format!("presolver.{name}."), counts);
        }
        s
    }

    fn push(&mut self, key: &str, value: impl ToString) {
        self.entries.push((key.to_string(), value.to_string()));
    }

    fn push_counts(&mut self, prefix: &str, c: &TxCounts) {
        self.push(&format!("{prefix}found"), c.found);
        self.push(&format!("{prefix}applied"), c.applied);
        self.push(&format!("{prefix}discarded"), c.discarded);
        self.push(&format!("{prefix}canceled"), c.canceled);
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn get_usize(&self, key: &str) -> Option<usize> {
        self.get(key)?.parse().ok()
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.entries {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, IoError> {
        let mut entries = Vec::new();
        for (number, line) in text.lines().enumerate().map(|(i, l)| (i + 1, l.trim())) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| IoError::parse(number, "expected key=value"))?;
            entries.push((k.trim().to_string(), v.trim().to_string()));
        }
        Ok(Statistics { entries })
    }

    /// Checks `found = applied + discarded + canceled` for every group of
    /// transaction counters.
    pub fn check_consistency(&self) -> Result<(), String> {
        for (key, _) in self.entries.iter().filter(|(k, _)| k.ends_with("found")) {
            let prefix = &key[..key.len() - "found".len()];
            let get = |suffix: &str| {
                self.get_usize(&format!("{prefix}{suffix}"))
                    .ok_or_else(|| format!("missing or invalid {prefix}{suffix}"))
            };
            let found = get("found")?;
            let sum = get("applied")? + get("discarded")? + get("canceled")?;
            if found != sum {
                return Err(format!("{prefix}found is {found} but the outcomes add up to {sum}"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ProblemBuilder;
    use crate::numerics::NumericContext;
    use crate::scheduler::{presolve, PresolveOptions};

    fn knapsack() -> Problem<f64> {
        let mut b = ProblemBuilder::new();
        let x1 = b.add_col("x1", -2.0, Some(0.0), Some(1.0), true);
        let x2 = b.add_col("x2", -1.0, Some(0.0), Some(1.0), true);
        b.add_row("c", &[(x1, 7.0), (x2, 8.0)], None, Some(13.0));
        b.build()
    }

    #[test]
    fn statistics_round_trip_and_add_up() {
        let p = knapsack();
        let opts = PresolveOptions { threads: 1, ..PresolveOptions::default() }.only(&["coefftightening"]);
        let r = presolve(p.clone(), &opts, NumericContext::default());
        let s = Statistics::new(&p, &r, 1, Duration::from_millis(3));
        s.check_consistency().unwrap();
        let parsed = Statistics::parse(&s.to_text()).unwrap();
        assert_eq!(parsed, s);
        assert_eq!(s.get("status"), Some("REDUCED"));
        assert_eq!(s.get_usize("rows_after"), Some(1));
        assert!(s.get_usize("presolver.coefftightening.applied").unwrap() >= 1);
    }

    #[test]
    fn inconsistent_counts_are_reported() {
        let s = Statistics::parse("x.found=3\nx.applied=1\nx.discarded=1\nx.canceled=0\n").unwrap();
        assert!(s.check_consistency().unwrap_err().contains("x.found"));
        assert!(Statistics::parse("novalue\n").is_err());
    }
}
