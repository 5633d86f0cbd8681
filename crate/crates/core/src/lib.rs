//! Single-pass instruction sequences with direct and indirect jumps.
//!
//! The crate parses and executes programs, computes their maximal internal
//! delay over all runs, and eliminates indirect jumps with two projections:
//! register-state specialization (delay stays constant, length grows
//! quadratically on the dispatch family) and Boolean-cell dispatch (length
//! stays linear, delay grows with the register width).
//!
//! ```
//! use pglb_core::analyzer::{analyze, Delay};
//! use pglb_core::family::gen_paper_family;
//!
//! let (program, family) = gen_paper_family(2);
//! assert_eq!(program.len(), 52);
//! let (_, mid) = analyze(&program, &family.tool_params()).unwrap();
//! assert_eq!(mid.value, Delay::Finite(4));
//! ```

#![no_std]

extern crate alloc;

pub mod analyzer;
pub mod family;
pub mod isa;
pub mod params;
pub mod projector;
pub mod vm;

pub use isa::{parse_program, render_program, BasicInstruction, Instruction, Program};
pub use params::ToolParams;
