//! Indirect-jump elimination.
//!
//! Both projections lay the output out as one contiguous block per source
//! unit (an instruction position for [`dispatch_project`], a reachable
//! machine state for [`specialize`]) and re-aim every relative jump at block
//! starts through a [`RelocationMap`].

mod dispatch;
mod equivalence;
mod specialize;
mod thread;

pub use dispatch::{dispatch_project, register_bits, tree_size};
pub use equivalence::{check_equivalence, Counterexample, OracleCase, OracleSuite, Verdict};
pub use specialize::specialize;
pub use thread::thread_jumps;

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::analyzer::{AnalysisError, MidResult, StateNode};
use crate::isa::{BasicInstruction, Instruction, Program};
use crate::params::ToolParams;
use crate::vm::VmError;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum RelocKey {
    Position(usize),
    State(StateNode),
}

impl fmt::Display for RelocKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RelocKey::Position(p) => write!(f, "{p}"),
            RelocKey::State(s) => write!(f, "{s}"),
        }
    }
}

/// Output block: 1-based start and length.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Block {
    pub start: usize,
    pub len: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RelocationMap {
    entries: Vec<(RelocKey, Block)>,
}

impl RelocationMap {
    pub fn entries(&self) -> &[(RelocKey, Block)] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn lookup(&self, key: &RelocKey) -> Option<Block> {
        self.entries.iter().find(|(k, _)| k == key).map(|(_, b)| *b)
    }

    /// Blocks are non-empty, in order, back to back, and end at `total`.
    pub fn covers(&self, total: usize) -> bool {
        let mut next = 1;
        for (_, b) in &self.entries {
            if b.start != next || b.len == 0 {
                return false;
            }
            next += b.len;
        }
        next == total + 1
    }

    /// Sorted block starts.
    pub fn starts(&self) -> Vec<usize> {
        self.entries.iter().map(|(_, b)| b.start).collect()
    }
}

/// Output of a projection plus the measured trade-off.
#[derive(Debug, Clone)]
pub struct ProjectionReport {
    pub output: Program,
    pub map: RelocationMap,
    pub length_before: usize,
    pub length_after: usize,
    pub mid_before: Result<MidResult, AnalysisError>,
    pub mid_after: Result<MidResult, AnalysisError>,
    /// Basic instructions the projection added to the auxiliary set.
    pub aux_introduced: Vec<BasicInstruction>,
    /// Parameters the output must be run and analysed with.
    pub params: ToolParams,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ProjectionError {
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
    #[error(transparent)]
    Vm(#[from] VmError),
    #[error("focus {0} collides with the register cell names used by dispatch")]
    FocusCollision(String),
}

/// Direct jump at position `from` landing on `to`.
pub(crate) fn jump_between(from: usize, to: usize) -> Instruction {
    if to >= from {
        Instruction::FwdJump((to - from) as u32)
    } else {
        Instruction::BwdJump((from - to) as u32)
    }
}

/// The jump that deadlocks wherever it is placed.
pub(crate) const DEADLOCK: Instruction = Instruction::FwdJump(0);
