use alloc::boxed::Box;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use crate::isa::Program;
use crate::params::ToolParams;
use crate::vm::{observable_trace, run_with, MachineConfig, ObservableTrace, ReplyOracle, Status, VmError};

/// Which oracles to compare two programs under.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleSuite {
    /// Every reply sequence up to this many oracle replies; later replies
    /// are `false`.
    pub depth: usize,
    /// Seeds of additional pseudo-random oracles, run after the exhaustive
    /// part.
    pub seeds: Vec<u64>,
    /// Step limit for each run; hitting it makes that comparison
    /// inconclusive.
    pub step_limit: u64,
}

impl OracleSuite {
    pub fn exhaustive(depth: usize) -> Self {
        OracleSuite {
            depth,
            seeds: (0..8).collect(),
            step_limit: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleCase {
    /// Reply prefix, padded with `false`.
    Exhaustive(Vec<bool>),
    Seeded(u64),
}

impl OracleCase {
    pub fn oracle(&self) -> ReplyOracle {
        match self {
            OracleCase::Exhaustive(path) => ReplyOracle::exhaustive(path.clone(), Some(false)),
            OracleCase::Seeded(seed) => ReplyOracle::seeded(*seed),
        }
    }
}

impl fmt::Display for OracleCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            OracleCase::Exhaustive(path) => {
                f.write_str("replies ")?;
                for r in path {
                    f.write_str(if *r { "T" } else { "F" })?;
                }
                f.write_str(" then F…")
            }
            OracleCase::Seeded(seed) => write!(f, "seed {seed}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub oracle: OracleCase,
    pub left: ObservableTrace,
    pub right: ObservableTrace,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    Equivalent {
        checked: usize,
        /// Comparisons cut short by the step limit whose observable
        /// prefixes agree.
        inconclusive: usize,
    },
    Counterexample(Box<Counterexample>),
}

impl Verdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, Verdict::Equivalent { .. })
    }
}

enum Agreement {
    Same,
    Inconclusive,
    Differ,
}

fn compare(a: &ObservableTrace, b: &ObservableTrace) -> Agreement {
    if a.status != Status::StepLimit && b.status != Status::StepLimit {
        return if a == b { Agreement::Same } else { Agreement::Differ };
    }
    let n = a.events.len().min(b.events.len());
    let longer_is_done = |short: &ObservableTrace| short.status == Status::StepLimit;
    let prefix_ok = a.events[..n] == b.events[..n]
        && (a.events.len() == b.events.len()
            || (a.events.len() < b.events.len() && longer_is_done(a))
            || (b.events.len() < a.events.len() && longer_is_done(b)));
    if prefix_ok {
        Agreement::Inconclusive
    } else {
        Agreement::Differ
    }
}

/// Compares the observable traces and final statuses of `p` and `q` under
/// every oracle of `suite`, in a fixed order, and returns the first
/// disagreement.
pub fn check_equivalence(
    p: &Program,
    q: &Program,
    params: &ToolParams,
    suite: &OracleSuite,
) -> Result<Verdict, VmError> {
    let mut params = params.clone();
    params.step_limit = suite.step_limit;
    let observe = |prog: &Program, case: &OracleCase| -> Result<(ObservableTrace, usize), VmError> {
        let (trace, last) = run_with(prog, &params, MachineConfig::new(&params, case.oracle()))?;
        Ok((observable_trace(&trace, &params), last.oracle.consumed()))
    };

    let mut checked = 0;
    let mut inconclusive = 0;
    let mut judge = |case: OracleCase, a: ObservableTrace, b: ObservableTrace| -> Option<Verdict> {
        checked += 1;
        match compare(&a, &b) {
            Agreement::Same => None,
            Agreement::Inconclusive => {
                inconclusive += 1;
                None
            }
            Agreement::Differ => Some(Verdict::Counterexample(Box::new(Counterexample {
                oracle: case,
                left: a,
                right: b,
            }))),
        }
    };

    let mut pending: Vec<Vec<bool>> = vec![Vec::new()];
    while let Some(path) = pending.pop() {
        let case = OracleCase::Exhaustive(path);
        let (a, used_a) = observe(p, &case)?;
        let (b, used_b) = observe(q, &case)?;
        let OracleCase::Exhaustive(path) = case else {
            unreachable!()
        };
        if used_a.max(used_b) > path.len() && path.len() < suite.depth {
            let mut with_true = path.clone();
            with_true.push(true);
            let mut with_false = path;
            with_false.push(false);
            pending.push(with_true);
            pending.push(with_false);
            continue;
        }
        if let Some(v) = judge(OracleCase::Exhaustive(path), a, b) {
            return Ok(v);
        }
    }
    for &seed in &suite.seeds {
        let case = OracleCase::Seeded(seed);
        let (a, _) = observe(p, &case)?;
        let (b, _) = observe(q, &case)?;
        if let Some(v) = judge(case, a, b) {
            return Ok(v);
        }
    }
    Ok(Verdict::Equivalent { checked, inconclusive })
}
