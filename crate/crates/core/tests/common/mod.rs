#![allow(dead_code)]

use pglb_core::analyzer::{tarjan, StateGraph};
use pglb_core::family::{gen_random, KindWeights};
use pglb_core::{Program, ToolParams};

pub fn small_params() -> ToolParams {
    ToolParams::new(2, 3)
}

pub fn random_program(seed: u64, len: usize) -> Program {
    gen_random(seed, len, &small_params(), &KindWeights::default())
}

/// Programs without register instructions.
pub fn random_pglb(seed: u64, len: usize) -> Program {
    let weights = KindWeights {
        reg_set: 0,
        ind_fwd_jump: 0,
        ind_bwd_jump: 0,
        ..KindWeights::default()
    };
    gen_random(seed, len, &small_params(), &weights)
}

/// Reachable state graph without cycles (self-loops cannot occur: a jump
/// of distance 0 deadlocks).
pub fn acyclic(g: &StateGraph) -> bool {
    let all = vec![true; g.len()];
    tarjan(&all, |v| g.successors(v)).iter().all(|c| c.len() == 1)
}
