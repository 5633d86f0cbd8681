//! Program generators: the two-level dispatch family and random programs.

use alloc::format;
use alloc::vec::Vec;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::isa::{BasicInstruction, Instruction, Program};
use crate::params::ToolParams;

/// Parameters implied by the family member `P_k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyParams {
    pub k: u32,
    pub maxr: u32,
    pub maxn: u32,
}

impl FamilyParams {
    pub fn new(k: u32) -> Self {
        FamilyParams {
            k,
            maxr: 2,
            maxn: 2 * (1 << k) + 1,
        }
    }

    /// Number of dispatch targets, `2^k`.
    pub fn width(&self) -> u32 {
        1 << self.k
    }

    /// `12 * 2^k + 4`.
    pub fn length(&self) -> usize {
        12 * self.width() as usize + 4
    }

    /// Tool parameters for running the family: `bool1` is left to the
    /// environment (no Boolean cells), no auxiliary instructions.
    pub fn tool_params(&self) -> ToolParams {
        ToolParams::new(self.maxr, self.maxn).without_cells()
    }
}

fn basic(focus: &str, method: &str) -> BasicInstruction {
    BasicInstruction::new(focus, method).expect("generator identifiers are well formed")
}

/// Register value that makes the dispatch jump land on the `i`-th target.
pub fn dispatch_offset(i: u32) -> u32 {
    2 * i - 1
}

/// Builds `P_k`: two test loops over `bool1.get` that record the number of
/// tries in registers 1 and 2, then two indirect jumps selecting `a<i>.run`
/// and `ap<j>.run`.
///
/// # Panics
/// If `k` is 0 or above 20.
pub fn gen_paper_family(k: u32) -> (Program, FamilyParams) {
    assert!((1..=20).contains(&k), "family index out of range");
    let params = FamilyParams::new(k);
    let width = params.width();
    let mut out = Vec::with_capacity(params.length());
    let get = basic("bool1", "get");
    for reg in 1..=2 {
        for i in 1..=width {
            out.push(Instruction::NegTest(get.clone()));
            out.push(Instruction::FwdJump(3));
            out.push(Instruction::RegSet {
                reg,
                value: dispatch_offset(i),
            });
            out.push(Instruction::FwdJump((width - i) * 4 + 2));
        }
        out.push(Instruction::Halt);
    }
    out.push(Instruction::IndFwdJump(1));
    for i in 1..=width {
        out.push(Instruction::Plain(basic(&format!("a{i}"), "run")));
        out.push(Instruction::FwdJump((width - i) * 2 + 1));
    }
    out.push(Instruction::IndFwdJump(2));
    for i in 1..=width {
        out.push(Instruction::Plain(basic(&format!("ap{i}"), "run")));
        out.push(Instruction::Halt);
    }
    let program = Program::new(out).expect("non-empty");
    debug_assert_eq!(program.len(), params.length());
    (program, params)
}

/// Relative draw weights of the nine instruction kinds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct KindWeights {
    pub plain: u32,
    pub pos_test: u32,
    pub neg_test: u32,
    pub fwd_jump: u32,
    pub bwd_jump: u32,
    pub reg_set: u32,
    pub ind_fwd_jump: u32,
    pub ind_bwd_jump: u32,
    pub halt: u32,
}

impl Default for KindWeights {
    fn default() -> Self {
        KindWeights {
            plain: 2,
            pos_test: 2,
            neg_test: 2,
            fwd_jump: 2,
            bwd_jump: 1,
            reg_set: 2,
            ind_fwd_jump: 1,
            ind_bwd_jump: 1,
            halt: 1,
        }
    }
}

const BASICS: [(&str, &str); 6] = [
    ("a", "m"),
    ("b", "m"),
    ("c", "get"),
    ("bool1", "get"),
    ("bool1", "set:T"),
    ("bool1", "set:F"),
];

/// Deterministic random program of `length` instructions (at least 1).
/// Register indices stay within `maxr`, literals within `maxn`, jump
/// distances within `length`.
pub fn gen_random(seed: u64, length: usize, params: &ToolParams, weights: &KindWeights) -> Program {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut below = |n: u32| -> u32 { (rng.next_u64() % u64::from(n.max(1))) as u32 };
    let table = [
        weights.plain,
        weights.pos_test,
        weights.neg_test,
        weights.fwd_jump,
        weights.bwd_jump,
        weights.reg_set,
        weights.ind_fwd_jump,
        weights.ind_bwd_jump,
        weights.halt,
    ];
    let total: u32 = table.iter().sum();
    assert!(total > 0, "at least one instruction kind must have weight");
    let length = length.max(1);
    let distance_bound = length as u32 + 1;
    let out = (0..length)
        .map(|_| {
            let mut pick = below(total);
            let kind = table
                .iter()
                .position(|&w| {
                    if pick < w {
                        true
                    } else {
                        pick -= w;
                        false
                    }
                })
                .expect("pick < total");
            let mut random_basic = || {
                let (f, m) = BASICS[below(BASICS.len() as u32) as usize];
                basic(f, m)
            };
            match kind {
                0 => Instruction::Plain(random_basic()),
                1 => Instruction::PosTest(random_basic()),
                2 => Instruction::NegTest(random_basic()),
                3 => Instruction::FwdJump(below(distance_bound)),
                4 => Instruction::BwdJump(below(distance_bound)),
                5 => Instruction::RegSet {
                    reg: 1 + below(params.maxr),
                    value: 1 + below(params.maxn),
                },
                6 => Instruction::IndFwdJump(1 + below(params.maxr)),
                7 => Instruction::IndBwdJump(1 + below(params.maxr)),
                _ => Instruction::Halt,
            }
        })
        .collect();
    Program::new(out).expect("length is at least 1")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::isa::{parse_program, validate};

    #[test]
    fn family_lengths() {
        assert_eq!(gen_paper_family(1).0.len(), 28);
        assert_eq!(gen_paper_family(3).0.len(), 100);
        for k in 1..=10 {
            assert_eq!(gen_paper_family(k).0.len(), 12 * (1 << k) + 4);
        }
    }

    #[test]
    fn family_text_k1() {
        let (p, fp) = gen_paper_family(1);
        assert_eq!(
            p.render(),
            "-bool1.get ; #3 ; set:1:1 ; #6 ; -bool1.get ; #3 ; set:1:3 ; #2 ; ! ; \
             -bool1.get ; #3 ; set:2:1 ; #6 ; -bool1.get ; #3 ; set:2:3 ; #2 ; ! ; \
             i#1 ; a1.run ; #3 ; a2.run ; #1 ; i#2 ; ap1.run ; ! ; ap2.run ; !"
        );
        assert_eq!(fp.maxn, 5);
        assert!(validate(&p, &fp.tool_params()).is_empty());
        assert_eq!(parse_program(&p.render()).unwrap(), p);
    }

    #[test]
    fn random_is_deterministic_and_in_range() {
        let params = ToolParams::new(2, 3);
        let w = KindWeights::default();
        assert_eq!(gen_random(7, 12, &params, &w), gen_random(7, 12, &params, &w));
        assert_ne!(gen_random(7, 12, &params, &w), gen_random(8, 12, &params, &w));
        for seed in 0..200 {
            let p = gen_random(seed, 12, &params, &w);
            assert_eq!(p.len(), 12);
            assert!(validate(&p, &params).is_empty());
            for u in p.instructions() {
                if let Instruction::FwdJump(l) | Instruction::BwdJump(l) = u {
                    assert!(*l <= 12);
                }
            }
        }
    }
}
