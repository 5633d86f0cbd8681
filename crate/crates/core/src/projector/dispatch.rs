use alloc::collections::BTreeSet;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{jump_between, Block, ProjectionError, ProjectionReport, RelocKey, RelocationMap, DEADLOCK};
use crate::analyzer::analyze;
use crate::isa::{validate, BasicInstruction, Instruction, Program};
use crate::params::{AuxPattern, CellBinding, FocusPattern, ToolParams};
use crate::vm::VmError;

/// Bits needed for register contents `0..=maxn`.
pub fn register_bits(maxn: u32) -> u32 {
    u32::BITS - maxn.leading_zeros()
}

/// Instructions in a dispatch tree over `bits` bits:
/// `3` for one bit, `2 + 2 * tree_size(bits - 1)` above that.
pub fn tree_size(bits: u32) -> usize {
    match bits {
        0 => 1,
        1 => 3,
        _ => 2 + 2 * tree_size(bits - 1),
    }
}

fn cell_focus(reg: u32, bit: u32) -> alloc::string::String {
    format!("r{reg}b{bit}")
}

fn cell_op(reg: u32, bit: u32, method: &str) -> BasicInstruction {
    BasicInstruction::new(&cell_focus(reg, bit), method).expect("well-formed cell name")
}

/// Boolean-cell dispatch.
///
/// Register `i` is held in auxiliary cells `r<i>b<j>`, `j < b` with
/// `b = register_bits(maxn)`. Per source position, one block:
///
/// * `set:i:n` writes the `b` bits of `n`, most significant first;
/// * `i#i` / `i\#i` becomes a decision tree testing the bits most
///   significant first, whose leaves, in ascending value order, jump to the
///   block of `pc ± v` (`#0` for `v = 0` or an out-of-range target);
/// * a test is copied, followed by `#→next ; #→skip` unless the next block
///   is a single instruction;
/// * direct jumps are re-aimed at block starts, everything else is copied.
///
/// Tree layout for height `h ≥ 2`: `+bit.get ; #→T ; F-subtree ; T-subtree`;
/// height 1: `-bit.get ; leaf(0) ; leaf(1)`.
pub fn dispatch_project(p: &Program, params: &ToolParams) -> Result<ProjectionReport, ProjectionError> {
    params.check().map_err(VmError::from)?;
    let diagnostics = validate(p, params);
    if !diagnostics.is_empty() {
        return Err(VmError::InvalidProgram(diagnostics).into());
    }
    let reserved = FocusPattern::parse("r*b*").expect("valid pattern");
    if let Some(b) = p
        .instructions()
        .iter()
        .filter_map(Instruction::basic)
        .find(|b| reserved.matches(b.focus()))
    {
        return Err(ProjectionError::FocusCollision(b.focus().into()));
    }

    let bits = register_bits(params.maxn);
    let len = p.len();
    let mut lens = vec![0usize; len + 2];
    for pos in (1..=len).rev() {
        lens[pos] = match p.get(pos).expect("in range") {
            Instruction::RegSet { .. } => bits as usize,
            Instruction::IndFwdJump(_) | Instruction::IndBwdJump(_) => tree_size(bits),
            Instruction::PosTest(_) | Instruction::NegTest(_) => {
                if pos == len || lens[pos + 1] == 1 {
                    1
                } else {
                    3
                }
            }
            _ => 1,
        };
    }
    let mut map = RelocationMap::default();
    let mut next = 1;
    for (pos, &n) in lens.iter().enumerate().take(len + 1).skip(1) {
        map.entries
            .push((RelocKey::Position(pos), Block { start: next, len: n }));
        next += n;
    }
    let start_of = |old: Option<usize>| -> Option<usize> {
        old.filter(|o| (1..=len).contains(o))
            .map(|o| map.entries[o - 1].1.start)
    };
    let aim = |at: usize, old: Option<usize>| match start_of(old) {
        Some(s) => jump_between(at, s),
        None => DEADLOCK,
    };

    // Out-of-range targets keep their overshoot past either end, so they
    // still deadlock and PGLB input comes back unchanged.
    let total = next - 1;
    let relocate = |at: usize, old: i64| {
        let new = if old < 1 {
            old
        } else if old as usize > len {
            (total + old as usize - len) as i64
        } else {
            map.entries[old as usize - 1].1.start as i64
        };
        if new >= at as i64 {
            Instruction::FwdJump((new - at as i64) as u32)
        } else {
            Instruction::BwdJump((at as i64 - new) as u32)
        }
    };
    let mut out: Vec<Instruction> = Vec::with_capacity(total);
    let mut introduced: BTreeSet<BasicInstruction> = BTreeSet::new();
    let mut registers_used: BTreeSet<u32> = BTreeSet::new();
    for (pos, u) in p.iter() {
        let here = out.len() + 1;
        debug_assert_eq!(here, map.entries[pos - 1].1.start);
        match u {
            Instruction::PosTest(_) | Instruction::NegTest(_) => {
                out.push(u.clone());
                if lens[pos] == 3 {
                    out.push(aim(here + 1, Some(pos + 1)));
                    out.push(aim(here + 2, Some(pos + 2)));
                }
            }
            Instruction::FwdJump(0) | Instruction::BwdJump(0) => out.push(u.clone()),
            Instruction::FwdJump(l) => out.push(relocate(here, pos as i64 + i64::from(*l))),
            Instruction::BwdJump(l) => out.push(relocate(here, pos as i64 - i64::from(*l))),
            Instruction::RegSet { reg, value } => {
                registers_used.insert(*reg);
                for bit in (0..bits).rev() {
                    let method = if value >> bit & 1 == 1 { "set:T" } else { "set:F" };
                    let op = cell_op(*reg, bit, method);
                    introduced.insert(op.clone());
                    out.push(Instruction::Plain(op));
                }
            }
            Instruction::IndFwdJump(reg) | Instruction::IndBwdJump(reg) => {
                registers_used.insert(*reg);
                let forward = matches!(u, Instruction::IndFwdJump(_));
                let leaf_target = |v: u32| -> Option<usize> {
                    if v == 0 {
                        None
                    } else if forward {
                        Some(pos + v as usize)
                    } else {
                        pos.checked_sub(v as usize)
                    }
                };
                emit_tree(&mut out, &mut introduced, *reg, bits, 0, &|at, v| {
                    aim(at, leaf_target(v))
                });
            }
            _ => out.push(u.clone()),
        }
        debug_assert_eq!(out.len() + 1 - here, lens[pos]);
    }

    let mut out_params = params.clone();
    let mut bindings = Vec::new();
    for &reg in &registers_used {
        for bit in 0..bits {
            let focus = cell_focus(reg, bit);
            out_params
                .aux
                .push(AuxPattern::parse(&format!("{focus}.*")).expect("valid pattern"));
            bindings.push(CellBinding {
                pattern: FocusPattern::parse(&focus).expect("valid pattern"),
                init: false,
            });
        }
    }
    bindings.append(&mut out_params.cells);
    out_params.cells = bindings;

    let output = Program::new(out).expect("one block per source instruction");
    let mid_before = analyze(p, params).map(|(_, r)| r);
    let mid_after = analyze(&output, &out_params).map(|(_, r)| r);
    Ok(ProjectionReport {
        length_before: len,
        length_after: output.len(),
        output,
        map,
        mid_before,
        mid_after,
        aux_introduced: introduced.into_iter().collect(),
        params: out_params,
    })
}

fn emit_tree(
    out: &mut Vec<Instruction>,
    introduced: &mut BTreeSet<BasicInstruction>,
    reg: u32,
    height: u32,
    prefix: u32,
    leaf: &dyn Fn(usize, u32) -> Instruction,
) {
    let bit = height - 1;
    let get = cell_op(reg, bit, "get");
    introduced.insert(get.clone());
    if height == 1 {
        out.push(Instruction::NegTest(get));
        let at = out.len() + 1;
        out.push(leaf(at, prefix << 1));
        out.push(leaf(at + 1, prefix << 1 | 1));
        return;
    }
    out.push(Instruction::PosTest(get));
    let at = out.len() + 1;
    out.push(jump_between(at, at + 1 + tree_size(height - 1)));
    emit_tree(out, introduced, reg, height - 1, prefix << 1, leaf);
    emit_tree(out, introduced, reg, height - 1, prefix << 1 | 1, leaf);
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::parse_program;

    #[test]
    fn bit_widths() {
        assert_eq!(register_bits(1), 1);
        assert_eq!(register_bits(3), 2);
        assert_eq!(register_bits(4), 3);
        assert_eq!(register_bits(5), 3);
        assert_eq!(register_bits(7), 3);
        assert_eq!(register_bits(8), 4);
        assert_eq!(tree_size(1), 3);
        assert_eq!(tree_size(2), 8);
        assert_eq!(tree_size(3), 18);
    }

    #[test]
    fn one_bit_registers() {
        let p = parse_program("set:1:1 ; i#1 ; ! ; !").unwrap();
        let r = dispatch_project(&p, &ToolParams::new(1, 1)).unwrap();
        assert_eq!(r.output.render(), "r1b0.set:T ; -r1b0.get ; #0 ; #1 ; ! ; !");
        assert_eq!(r.map.lookup(&RelocKey::Position(3)).unwrap().start, 5);
        assert!(r.map.covers(r.length_after));
        assert!(r.params.aux.contains(&"r1b0.get".parse().unwrap()));
        assert_eq!(r.aux_introduced.len(), 2);
    }

    #[test]
    fn two_bit_tree_layout() {
        let p = parse_program("i#1 ; ! ; ! ; !").unwrap();
        let r = dispatch_project(&p, &ToolParams::new(1, 3)).unwrap();
        // +b1 ; #→T ; -b0 ; v0 ; v1 ; -b0 ; v2 ; v3
        assert_eq!(
            r.output.render(),
            "+r1b1.get ; #4 ; -r1b0.get ; #0 ; #4 ; -r1b0.get ; #3 ; #3 ; ! ; ! ; !"
        );
    }

    #[test]
    fn pglb_input_is_kept() {
        let p = parse_program("+f.m ; #2 ; g.m ; \\#2 ; -h.m ; !").unwrap();
        let r = dispatch_project(&p, &ToolParams::new(1, 5)).unwrap();
        assert_eq!(r.output, p);
        assert!(r.aux_introduced.is_empty());
    }

    #[test]
    fn test_before_expanded_block_gets_trampolines() {
        let p = parse_program("+f.m ; set:1:3 ; !").unwrap();
        let r = dispatch_project(&p, &ToolParams::new(1, 3)).unwrap();
        assert_eq!(r.output.render(), "+f.m ; #2 ; #3 ; r1b1.set:T ; r1b0.set:T ; !");
    }

    #[test]
    fn name_collision() {
        let p = parse_program("r1b0.get ; !").unwrap();
        assert!(matches!(
            dispatch_project(&p, &ToolParams::new(1, 1)),
            Err(ProjectionError::FocusCollision(_))
        ));
    }
}
