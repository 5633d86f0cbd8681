//! Run enumeration: the reference the graph analysis is tested against.

use alloc::vec;
use alloc::vec::Vec;

use super::id_weight;
use crate::isa::{validate, Instruction, Program};
use crate::params::ToolParams;
use crate::vm::{MachineConfig, RegisterFile, ReplyOracle, Status, VmError};

/// Largest closed anchor-to-anchor delay over every run of at most `depth`
/// executed instructions, with every test reply tried both ways.
///
/// Runs are produced by [`MachineConfig::step`], independently of the state
/// graph. The result is a lower bound of the true delay and equals it once
/// `depth` exceeds the longest simple path of the state graph.
pub fn brute_force_mid(p: &Program, params: &ToolParams, depth: usize) -> Result<u64, VmError> {
    params.check()?;
    let diagnostics = validate(p, params);
    if !diagnostics.is_empty() {
        return Err(VmError::InvalidProgram(diagnostics));
    }
    let start = MachineConfig::at(1, RegisterFile::new(params.maxr), ReplyOracle::scripted(vec![]));
    // (machine, executed so far, delay since the last anchor)
    let mut stack: Vec<(MachineConfig, usize, Option<u64>)> = vec![(start, 0, None)];
    let mut best = 0u64;
    while let Some((machine, executed, mut open)) = stack.pop() {
        if executed >= depth || machine.status != Status::Running {
            continue;
        }
        let instruction = p.get(machine.pc).expect("running machine has a valid pc");
        let weight = u64::from(id_weight(instruction, &params.aux));
        if weight == 0 {
            if let Some(delay) = open {
                best = best.max(delay);
            }
            open = Some(0);
        } else if let Some(delay) = open.as_mut() {
            *delay += weight;
        }
        let replies: &[bool] = match instruction {
            Instruction::PosTest(_) | Instruction::NegTest(_) => &[true, false],
            _ => &[false],
        };
        for &reply in replies {
            let mut next = machine.clone();
            next.oracle = ReplyOracle::scripted(vec![reply]);
            next.step(p)?;
            stack.push((next, executed + 1, open));
        }
    }
    Ok(best)
}
