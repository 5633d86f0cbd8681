//! Maximal internal delay analysis.

mod brute;
mod graph;
mod mid;
mod scc;

pub use brute::brute_force_mid;
pub use graph::{build_state_graph, AnalysisError, Flow, NodeId, StateGraph, StateNode, Target};
pub use mid::{compute_mid, Delay, MidResult, Witness};
pub use scc::tarjan;

use alloc::vec;

use crate::isa::{Instruction, Program};
use crate::params::{AuxSet, ToolParams};
use crate::vm::{MachineConfig, ReplyOracle, Status};

/// Internal delay contributed by one instruction.
pub fn id_weight(u: &Instruction, aux: &AuxSet) -> u8 {
    match u {
        Instruction::Plain(b) | Instruction::PosTest(b) | Instruction::NegTest(b) => u8::from(aux.contains(b)),
        Instruction::Halt => 0,
        Instruction::FwdJump(_) | Instruction::BwdJump(_) | Instruction::RegSet { .. } => 1,
        Instruction::IndFwdJump(_) | Instruction::IndBwdJump(_) => 2,
    }
}

/// Builds the state graph and computes the delay in one go.
pub fn analyze(p: &Program, params: &ToolParams) -> Result<(StateGraph, MidResult), AnalysisError> {
    let g = build_state_graph(p, params)?;
    let r = compute_mid(&g);
    Ok((g, r))
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("witness is empty")]
    Empty,
    #[error("no single step leads from witness node {0} to the next one")]
    Broken(usize),
    #[error("witness endpoints are not anchors")]
    Endpoints,
}

/// Replays the witness through [`MachineConfig::step`] and returns the total
/// weight of the path it describes (for a cycle witness: stem, one lap,
/// exit). Both reply values are tried on tests.
pub fn replay_witness(p: &Program, params: &ToolParams, g: &StateGraph, witness: &Witness) -> Result<u64, ReplayError> {
    let path = witness.path();
    let (first, last) = match (path.first(), path.last()) {
        (Some(f), Some(l)) => (*f, *l),
        _ => return Err(ReplayError::Empty),
    };
    let weight_of = |v: NodeId| {
        let pc = g.node(v).pc as usize;
        id_weight(p.get(pc).expect("pc in range"), &params.aux)
    };
    if weight_of(first) != 0 || weight_of(last) != 0 {
        return Err(ReplayError::Endpoints);
    }
    for (i, pair) in path.windows(2).enumerate() {
        let (from, to) = (g.node(pair[0]), g.node(pair[1]));
        let reached = [true, false].iter().any(|&reply| {
            let mut machine = MachineConfig::at(
                from.pc as usize,
                from.registers.clone(),
                ReplyOracle::scripted(vec![reply]),
            );
            machine.step(p).is_ok()
                && machine.status == Status::Running
                && machine.pc == to.pc as usize
                && machine.registers == to.registers
        });
        if !reached {
            return Err(ReplayError::Broken(i));
        }
    }
    Ok(path.iter().map(|&v| u64::from(weight_of(v))).sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::parse_program;

    #[test]
    fn weight_table() {
        let aux = AuxSet::parse_list("x.*").unwrap();
        let w = |s: &str| id_weight(&parse_program(s).unwrap().instructions()[0], &aux);
        assert_eq!(w("#5"), 1);
        assert_eq!(w("\\#5"), 1);
        assert_eq!(w("set:1:1"), 1);
        assert_eq!(w("i#1"), 2);
        assert_eq!(w("i\\#2"), 2);
        assert_eq!(w("!"), 0);
        assert_eq!(w("f.m"), 0);
        assert_eq!(w("+f.m"), 0);
        assert_eq!(w("-f.m"), 0);
        assert_eq!(w("x.m"), 1);
        assert_eq!(w("+x.m"), 1);
        assert_eq!(w("-x.m"), 1);
    }

    #[test]
    fn witnesses_replay() {
        let params = ToolParams::new(1, 1).with_aux(AuxSet::parse_list("x.*").unwrap());
        let p = parse_program("f.m ; +x.get ; \\#1 ; !").unwrap();
        let (g, r) = analyze(&p, &params).unwrap();
        // stem f.m,x.get (1) + lap \#1,x.get (2) + exit ! (0)
        assert_eq!(replay_witness(&p, &params, &g, &r.witness), Ok(3));

        let p = parse_program("f.m ; set:1:1 ; i#1 ; f.m ; !").unwrap();
        let (g, r) = analyze(&p, &params).unwrap();
        assert_eq!(replay_witness(&p, &params, &g, &r.witness), Ok(3));
    }
}
