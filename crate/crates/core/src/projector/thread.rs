use alloc::vec;
use alloc::vec::Vec;

use super::{jump_between, DEADLOCK};
use crate::isa::{Instruction, Program};

/// Where control ends up when a direct jump at `pos` is taken.
enum Hop {
    To(usize),
    Deadlock,
}

fn hop(p: &Program, pos: usize) -> Option<Hop> {
    let len = p.len();
    let target = match p.get(pos)? {
        Instruction::FwdJump(l) => (*l != 0).then(|| pos + *l as usize),
        Instruction::BwdJump(l) => (*l != 0).then(|| pos.checked_sub(*l as usize)).flatten(),
        _ => return None,
    };
    Some(match target {
        Some(t) if (1..=len).contains(&t) => Hop::To(t),
        _ => Hop::Deadlock,
    })
}

/// Jump threading: a direct jump whose target is another direct jump is
/// re-aimed at the end of the chain. Chains that end in a deadlocking jump
/// become `#0`; chains that run into a cycle of jumps are left alone.
/// Length and observable behaviour are preserved and the pass is idempotent.
pub fn thread_jumps(p: &Program) -> Program {
    let len = p.len();
    let mut out: Vec<Instruction> = p.instructions().to_vec();
    let mut seen = vec![0usize; len + 1];
    let mut stamp = 0usize;
    for pos in 1..=len {
        let Some(Hop::To(first)) = hop(p, pos) else {
            continue;
        };
        if hop(p, first).is_none() {
            continue;
        }
        stamp += 1;
        seen[pos] = stamp;
        let mut at = first;
        let replacement = loop {
            if seen[at] == stamp {
                break None;
            }
            seen[at] = stamp;
            match hop(p, at) {
                None => break Some(jump_between(pos, at)),
                Some(Hop::Deadlock) => break Some(DEADLOCK),
                Some(Hop::To(t)) => at = t,
            }
        };
        if let Some(r) = replacement {
            out[pos - 1] = r;
        }
    }
    Program::new(out).expect("same length as the input")
}
