//! Scaling measurements over the dispatch family.

use std::fmt::Write as _;
use std::time::Instant;

use pglb_core::analyzer::{analyze, AnalysisError, Delay};
use pglb_core::family::gen_paper_family;
use pglb_core::projector::{
    check_equivalence, dispatch_project, specialize, thread_jumps, OracleSuite, ProjectionError,
};

#[derive(Debug, Clone)]
pub struct BenchOptions {
    pub kmax: u32,
    /// State limit for every analysis; exceeding it flags the row.
    pub state_limit: usize,
    /// Seeded oracles the projected programs are re-checked under.
    pub seeds: Vec<u64>,
}

impl BenchOptions {
    pub fn new(kmax: u32) -> Self {
        BenchOptions {
            kmax,
            state_limit: pglb_core::params::DEFAULT_STATE_LIMIT,
            seeds: (0..8).collect(),
        }
    }
}

/// `None` marks a measurement that hit the state limit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchRow {
    pub k: u32,
    pub length_original: usize,
    pub mid_original: Option<Delay>,
    pub state_nodes: Option<usize>,
    pub length_specialized: Option<usize>,
    pub mid_specialized: Option<Delay>,
    pub mid_threaded: Option<Delay>,
    pub length_dispatch: usize,
    pub mid_dispatch: Option<Delay>,
    /// Both projections agree with `P_k` on every seeded oracle.
    pub equivalent: bool,
    pub millis_analyze: u128,
    pub millis_specialize: u128,
    pub millis_dispatch: u128,
    pub millis_verify: u128,
}

impl BenchRow {
    /// Length and delay of `P_k` as expected, no state limit hit,
    /// projections equivalent.
    pub fn ok(&self) -> bool {
        self.length_original == 12 * (1usize << self.k) + 4
            && self.mid_original == Some(Delay::Finite(4))
            && self.length_specialized.is_some()
            && self.mid_specialized.is_some()
            && self.mid_dispatch.is_some()
            && self.equivalent
    }
}

fn limited<T>(r: Result<T, AnalysisError>) -> Option<T> {
    match r {
        Ok(v) => Some(v),
        Err(AnalysisError::StateLimitExceeded { .. }) => None,
        Err(e) => panic!("family member failed analysis: {e}"),
    }
}

pub fn bench_row(k: u32, opts: &BenchOptions) -> BenchRow {
    let (p, family) = gen_paper_family(k);
    let mut params = family.tool_params();
    params.state_limit = opts.state_limit;

    let t = Instant::now();
    let original = limited(analyze(&p, &params));
    let millis_analyze = t.elapsed().as_millis();

    let t = Instant::now();
    let specialized = match specialize(&p, &params) {
        Ok(r) => Some(r),
        Err(ProjectionError::Analysis(AnalysisError::StateLimitExceeded { .. })) => None,
        Err(e) => panic!("family member failed to specialize: {e}"),
    };
    let threaded = specialized.as_ref().map(|r| thread_jumps(&r.output));
    let mid_threaded = threaded
        .as_ref()
        .and_then(|q| limited(analyze(q, &params)))
        .map(|(_, m)| m.value);
    let millis_specialize = t.elapsed().as_millis();

    let t = Instant::now();
    let dispatch = dispatch_project(&p, &params).expect("family foci do not collide with cell names");
    let millis_dispatch = t.elapsed().as_millis();

    let t = Instant::now();
    let suite = OracleSuite {
        depth: 0,
        seeds: opts.seeds.clone(),
        step_limit: 1_000_000,
    };
    let agrees = |q: &pglb_core::Program, params: &pglb_core::ToolParams| {
        check_equivalence(&p, q, params, &suite).is_ok_and(|v| v.is_equivalent())
    };
    let equivalent = agrees(&dispatch.output, &dispatch.params)
        && specialized.as_ref().is_none_or(|r| agrees(&r.output, &r.params))
        && threaded.as_ref().is_none_or(|q| agrees(q, &params));
    let millis_verify = t.elapsed().as_millis();

    BenchRow {
        k,
        length_original: p.len(),
        mid_original: original.as_ref().map(|(_, m)| m.value),
        state_nodes: original.as_ref().map(|(g, _)| g.len()),
        length_specialized: specialized.as_ref().map(|r| r.length_after),
        mid_specialized: specialized
            .as_ref()
            .and_then(|r| r.mid_after.as_ref().ok())
            .map(|m| m.value),
        mid_threaded,
        length_dispatch: dispatch.length_after,
        mid_dispatch: dispatch.mid_after.as_ref().ok().map(|m| m.value),
        equivalent,
        millis_analyze,
        millis_specialize,
        millis_dispatch,
        millis_verify,
    }
}

/// One row per `k` in `1..=kmax`, in order.
pub fn bench_family(opts: &BenchOptions) -> Vec<BenchRow> {
    (1..=opts.kmax).map(|k| bench_row(k, opts)).collect()
}

const COLUMNS: [&str; 15] = [
    "k",
    "length_original",
    "mid_original",
    "state_nodes",
    "length_specialized",
    "mid_specialized",
    "mid_threaded",
    "length_dispatch",
    "mid_dispatch",
    "equivalent",
    "ms_analyze",
    "ms_specialize",
    "ms_dispatch",
    "ms_verify",
    "status",
];

fn cells(r: &BenchRow) -> Vec<String> {
    fn opt<T: ToString>(v: &Option<T>) -> String {
        v.as_ref().map_or_else(|| "limit".to_string(), T::to_string)
    }
    vec![
        r.k.to_string(),
        r.length_original.to_string(),
        opt(&r.mid_original),
        opt(&r.state_nodes),
        opt(&r.length_specialized),
        opt(&r.mid_specialized),
        opt(&r.mid_threaded),
        r.length_dispatch.to_string(),
        opt(&r.mid_dispatch),
        r.equivalent.to_string(),
        r.millis_analyze.to_string(),
        r.millis_specialize.to_string(),
        r.millis_dispatch.to_string(),
        r.millis_verify.to_string(),
        if r.ok() { "OK" } else { "FAIL" }.to_string(),
    ]
}

pub fn render_csv(rows: &[BenchRow]) -> String {
    let mut out = COLUMNS.join(",");
    out.push('\n');
    for r in rows {
        out.push_str(&cells(r).join(","));
        out.push('\n');
    }
    out
}

pub fn render_markdown(rows: &[BenchRow]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", COLUMNS.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(COLUMNS.len()));
    for r in rows {
        let _ = writeln!(out, "| {} |", cells(r).join(" | "));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_rows() {
        let rows = bench_family(&BenchOptions::new(3));
        assert_eq!(rows.len(), 3);
        for r in &rows {
            assert!(r.ok(), "{r:?}");
        }
        assert_eq!(rows[1].length_original, 52);
        assert_eq!(rows[1].length_specialized, Some(253));
        let csv = render_csv(&rows);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.lines().skip(1).all(|l| l.ends_with(",OK")));
        assert_eq!(render_markdown(&rows).lines().count(), 5);
    }

    #[test]
    fn state_limit_flags_the_row() {
        let mut opts = BenchOptions::new(2);
        opts.state_limit = 100;
        let rows = bench_family(&opts);
        assert!(rows[0].ok());
        assert_eq!(rows[1].mid_original, None);
        assert!(!rows[1].ok());
        assert!(render_csv(&rows).lines().nth(2).unwrap().contains("limit"));
    }

    #[test]
    fn deterministic_apart_from_timings() {
        let strip = |mut r: BenchRow| {
            r.millis_analyze = 0;
            r.millis_specialize = 0;
            r.millis_dispatch = 0;
            r.millis_verify = 0;
            r
        };
        let a: Vec<_> = bench_family(&BenchOptions::new(2)).into_iter().map(strip).collect();
        let b: Vec<_> = bench_family(&BenchOptions::new(2)).into_iter().map(strip).collect();
        assert_eq!(a, b);
    }
}
