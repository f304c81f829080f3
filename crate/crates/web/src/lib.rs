//! Browser demo bindings. Every export takes strings and returns a JSON
//! object with either the result fields or an `error` field.

use std::collections::BTreeMap;

use presolve::io::{
    mps_name, read_mps_str, read_record, read_sol, record_mode, write_mps_string, write_record, write_sol, ConflictReport,
    MpsOptions, RecordFormat,
};
use presolve::numerics::{NumericContext, NumericMode, Rational, Real};
use presolve::postsolve::postsolve_primal;
use presolve::scheduler::{presolve, PresolveOptions, VERBOSITY_TRANSACTIONS};
use serde::{Deserialize, Serialize};
use wasm_bindgen::prelude::wasm_bindgen;

#[derive(Debug, Default, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DemoOptions {
    /// `float` or `rational`.
    pub mode: Option<String>,
    pub disabled: Vec<String>,
    pub apply_immediately: bool,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct Dimensions {
    pub rows: usize,
    pub cols: usize,
    pub nnz: usize,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PresolveSummary {
    pub status: String,
    pub mode: String,
    pub before: Dimensions,
    pub after: Dimensions,
    pub rounds: usize,
    /// Applied transactions per presolver.
    pub applied: BTreeMap<String, usize>,
    pub discarded: usize,
    pub reduced_mps: String,
    /// Postsolve record in the text layout.
    pub record: String,
    pub log: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct PostsolveSummary {
    pub objective: String,
    pub solution: String,
}

#[derive(Serialize)]
struct ErrorReply {
    error: String,
}

fn reply<T: Serialize>(result: Result<T, String>) -> String {
    let json = match &result {
        Ok(v) => serde_json::to_string(v),
        Err(e) => serde_json::to_string(&ErrorReply { error: e.clone() }),
    };
    json.unwrap_or_else(|e| format!("{{\"error\":\"{e}\"}}"))
}

fn parse_options(json: &str) -> Result<(PresolveOptions, NumericMode), String> {
    let demo: DemoOptions = if json.trim().is_empty() {
        DemoOptions::default()
    } else {
        serde_json::from_str(json).map_err(|e| format!("options: {e}"))?
    };
    let mode = match demo.mode.as_deref() {
        None => NumericMode::Float64,
        Some(m) => m.parse().map_err(|e| format!("options: {e}"))?,
    };
    let names: Vec<&str> = presolve::presolvers::presolver_names().collect();
    if let Some(unknown) = demo.disabled.iter().find(|d| !names.contains(&d.as_str())) {
        return Err(format!("options: unknown presolver {unknown}"));
    }
    let options = PresolveOptions {
        threads: 1,
        verbosity: VERBOSITY_TRANSACTIONS,
        apply_immediately: demo.apply_immediately,
        disabled: demo.disabled.into_iter().collect(),
        ..PresolveOptions::default()
    };
    Ok((options, mode))
}

fn summarize<R: Real>(mps: &str, options: &PresolveOptions) -> Result<PresolveSummary, String> {
    let problem = read_mps_str::<R>(mps, MpsOptions::default()).map_err(|e| e.to_string())?;
    let ctx: NumericContext<R> = options.context().map_err(|e| e.to_string())?;
    let dims = |p: &presolve::model::Problem<R>| Dimensions {
        rows: p.nrows(),
        cols: p.ncols(),
        nnz: p.matrix.nnz(),
    };
    let before = dims(&problem);
    let result = presolve(problem, options, ctx);
    let record = write_record(&result.record, RecordFormat::Text);
    Ok(PresolveSummary {
        status: result.status.name().to_string(),
        mode: R::MODE.name().to_string(),
        before,
        after: dims(&result.reduced),
        rounds: result.stats.rounds(),
        applied: result
            .stats
            .by_presolver
            .iter()
            .filter(|(_, c)| c.applied > 0)
            .map(|(name, c)| (name.to_string(), c.applied))
            .collect(),
        discarded: result.stats.transactions.discarded,
        reduced_mps: write_mps_string(&result.reduced),
        record: String::from_utf8(record).map_err(|e| e.to_string())?,
        log: result.log,
    })
}

/// Presolves an MPS model. `options` is JSON such as
/// `{"mode":"rational","disabled":["domcol"],"apply_immediately":false}`.
#[wasm_bindgen]
pub fn presolve_mps(mps: &str, options: &str) -> String {
    reply(parse_options(options).and_then(|(opts, mode)| match mode {
        NumericMode::Float64 => summarize::<f64>(mps, &opts),
        NumericMode::Rational => summarize::<Rational>(mps, &opts),
    }))
}

fn expand<R: Real>(bytes: &[u8], solution: &str) -> Result<PostsolveSummary, String> {
    let record = read_record::<R>(bytes).map_err(|e| e.to_string())?;
    let reduced_names: Vec<String> = record
        .col_map
        .iter()
        .enumerate()
        .map(|(k, &j)| mps_name(&record.col_names[j], 'C', k))
        .collect();
    let (values, _) = read_sol::<R>(solution, &reduced_names).map_err(|e| format!("solution: {e}"))?;
    let ctx = NumericContext::<R>::default();
    let sol = postsolve_primal(&record, &values, &ctx).map_err(|e| e.to_string())?;
    let names: Vec<String> = record.col_names.iter().enumerate().map(|(j, n)| mps_name(n, 'C', j)).collect();
    Ok(PostsolveSummary {
        objective: sol.objective.to_string(),
        solution: write_sol(&names, &sol.values, &sol.objective),
    })
}

/// Maps a solution of the reduced model (`name value` lines) back to the
/// original model using a record returned by [`presolve_mps`].
#[wasm_bindgen]
pub fn postsolve_solution(record: &str, solution: &str) -> String {
    let bytes = record.as_bytes();
    reply(record_mode(bytes).map_err(|e| e.to_string()).and_then(|mode| match mode {
        NumericMode::Float64 => expand::<f64>(bytes, solution),
        NumericMode::Rational => expand::<Rational>(bytes, solution),
    }))
}

/// Conflict report of the transaction log returned by [`presolve_mps`].
#[wasm_bindgen]
pub fn conflict_report(log: &str) -> String {
    #[derive(Serialize)]
    struct Report {
        report: String,
    }
    reply(Ok(Report {
        report: ConflictReport::from_log(log).render(),
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    const KNAPSACK: &str = "NAME knapsack
ROWS
 N obj
 L c
COLUMNS
 MARKER 'MARKER' 'INTORG'
 x1 obj -2 c 7
 x2 obj -1 c 8
 MARKER 'MARKER' 'INTEND'
RHS
 RHS c 13
BOUNDS
 UP BND x1 1
 UP BND x2 1
ENDATA
";

    fn summary(options: &str) -> PresolveSummary {
        let json = presolve_mps(KNAPSACK, options);
        serde_json::from_str(&json).unwrap_or_else(|e| panic!("{e}: {json}"))
    }

    #[test]
    fn presolve_then_postsolve() {
        for mode in ["float", "rational"] {
            let s = summary(&format!("{{\"mode\":\"{mode}\",\"disabled\":[\"domcol\"]}}"));
            assert_eq!(s.status, "REDUCED");
            assert_eq!(s.mode, mode);
            assert_eq!(s.before, Dimensions { rows: 1, cols: 2, nnz: 2 });
            assert_eq!(s.after, Dimensions { rows: 1, cols: 2, nnz: 2 });
            assert!(s.applied.contains_key("coefftightening"));
            let back: PostsolveSummary =
                serde_json::from_str(&postsolve_solution(&s.record, "x1 1\nx2 0\n")).unwrap();
            assert_eq!(back.objective, "-2");
            assert_eq!(back.solution, "=obj= -2\nx1 1\nx2 0\n");
        }
    }

    #[test]
    fn report_from_the_returned_log() {
        let s = summary("");
        let json: serde_json::Value = serde_json::from_str(&conflict_report(&s.log.join("\n"))).unwrap();
        assert!(json["report"].as_str().unwrap().contains("conflict ledger"));
    }

    #[test]
    fn errors_are_json() {
        let bad = |json: String| serde_json::from_str::<serde_json::Value>(&json).unwrap()["error"].as_str().unwrap().to_string();
        assert!(bad(presolve_mps("NAME x\nROWS\n N obj\nCOLUMNS\n x nosuch 1\n", "")).contains("line 5"));
        assert!(bad(presolve_mps(KNAPSACK, "{\"mode\":\"decimal\"}")).starts_with("options"));
        assert!(bad(presolve_mps(KNAPSACK, "{\"disabled\":[\"nosuch\"]}")).contains("nosuch"));
        assert!(!bad(postsolve_solution("garbage", "")).is_empty());
    }
}
