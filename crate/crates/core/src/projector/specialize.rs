use alloc::vec::Vec;

use super::{jump_between, Block, ProjectionError, ProjectionReport, RelocKey, RelocationMap, DEADLOCK};
use crate::analyzer::{analyze, build_state_graph, compute_mid, Flow, Target};
use crate::isa::Instruction;
use crate::isa::Program;
use crate::params::ToolParams;

/// Register-state specialization.
///
/// One block per reachable `(pc, registers)` state, in breadth-first order:
///
/// * plain `a` becomes `a ; #→succ`
/// * a test becomes `test ; #→next ; #→skip`
/// * `!` is copied
/// * every jump and register set becomes one direct jump to the block of the
///   resolved successor state, `#0` when that successor is a deadlock.
pub fn specialize(p: &Program, params: &ToolParams) -> Result<ProjectionReport, ProjectionError> {
    let g = build_state_graph(p, params)?;
    let instruction_at = |v| p.get(g.node(v).pc as usize).expect("pc in range");

    let mut map = RelocationMap::default();
    let mut next = 1usize;
    for v in g.ids() {
        let len = match instruction_at(v) {
            Instruction::Plain(_) => 2,
            Instruction::PosTest(_) | Instruction::NegTest(_) => 3,
            _ => 1,
        };
        map.entries
            .push((RelocKey::State(g.node(v).clone()), Block { start: next, len }));
        next += len;
    }
    let starts: Vec<usize> = map.entries.iter().map(|(_, b)| b.start).collect();
    let aim = |at: usize, target: Target| match target {
        Target::Node(t) => jump_between(at, starts[t as usize]),
        Target::Deadlock => DEADLOCK,
    };

    let mut out = Vec::with_capacity(next - 1);
    for v in g.ids() {
        let start = starts[v as usize];
        let u = instruction_at(v);
        match (u, g.flow(v)) {
            (Instruction::Halt, _) => out.push(Instruction::Halt),
            (Instruction::Plain(_), Flow::Single(t)) => {
                out.push(u.clone());
                out.push(aim(start + 1, t));
            }
            (Instruction::PosTest(_) | Instruction::NegTest(_), Flow::Branch { next, skip }) => {
                out.push(u.clone());
                out.push(aim(start + 1, next));
                out.push(aim(start + 2, skip));
            }
            (_, Flow::Single(t)) => out.push(aim(start, t)),
            _ => unreachable!("flow shape follows the instruction kind"),
        }
    }
    let output = Program::new(out).expect("the initial state always yields a block");
    let mid_after = analyze(&output, params).map(|(_, r)| r);
    Ok(ProjectionReport {
        length_before: p.len(),
        length_after: output.len(),
        output,
        map,
        mid_before: Ok(compute_mid(&g)),
        mid_after,
        aux_introduced: Vec::new(),
        params: params.clone(),
    })
}
