//! Concrete execution against Boolean-cell services and a reply oracle.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::isa::{validate, BasicInstruction, Diagnostic, Instruction, Program};
use crate::params::{CellBinding, ParamsError, ToolParams};

/// Register contents; index `i` (1-based) holds a value in `[0, maxn]`.
/// 0 is the never-set initial value.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RegisterFile(Vec<u32>);

impl RegisterFile {
    pub fn new(maxr: u32) -> Self {
        RegisterFile(alloc::vec![0; maxr as usize])
    }

    pub fn from_values(values: Vec<u32>) -> Self {
        RegisterFile(values)
    }

    /// Contents of register `reg`; 0 for indices outside the file.
    pub fn get(&self, reg: u32) -> u32 {
        reg.checked_sub(1)
            .and_then(|i| self.0.get(i as usize))
            .copied()
            .unwrap_or(0)
    }

    /// # Panics
    /// If `reg` is not in `[1, maxr]`.
    pub fn set(&mut self, reg: u32, value: u32) {
        self.0[reg as usize - 1] = value;
    }

    pub fn values(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for RegisterFile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(":")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// A service holding one Boolean.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BooleanCell {
    pub contents: bool,
}

impl BooleanCell {
    /// `set:T` and `set:F` write and echo the written value; `get` echoes the
    /// contents. Other methods are not understood.
    pub fn process(&mut self, method: &str) -> Option<bool> {
        match method {
            "set:T" => {
                self.contents = true;
                Some(true)
            }
            "set:F" => {
                self.contents = false;
                Some(false)
            }
            "get" => Some(self.contents),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
enum OracleSource {
    Scripted(Vec<bool>),
    Seeded(Box<ChaCha8Rng>),
    Exhaustive { path: Vec<bool>, fill: Option<bool> },
}

/// Supplies replies for foci that are not bound to a service.
#[derive(Debug, Clone)]
pub struct ReplyOracle {
    source: OracleSource,
    consumed: usize,
}

impl ReplyOracle {
    /// Replies consumed in order; running out is an error.
    pub fn scripted(replies: Vec<bool>) -> Self {
        ReplyOracle {
            source: OracleSource::Scripted(replies),
            consumed: 0,
        }
    }

    /// Deterministic pseudo-random stream.
    pub fn seeded(seed: u64) -> Self {
        ReplyOracle {
            source: OracleSource::Seeded(Box::new(ChaCha8Rng::seed_from_u64(seed))),
            consumed: 0,
        }
    }

    /// Replies from `path`, then `fill` forever (or an error if `None`).
    pub fn exhaustive(path: Vec<bool>, fill: Option<bool>) -> Self {
        ReplyOracle {
            source: OracleSource::Exhaustive { path, fill },
            consumed: 0,
        }
    }

    /// Number of replies handed out so far.
    pub fn consumed(&self) -> usize {
        self.consumed
    }

    fn next_reply(&mut self) -> Option<bool> {
        let reply = match &mut self.source {
            OracleSource::Scripted(replies) => replies.get(self.consumed).copied(),
            OracleSource::Seeded(rng) => Some(rng.next_u32() & 1 == 1),
            OracleSource::Exhaustive { path, fill } => path.get(self.consumed).copied().or(*fill),
        };
        if reply.is_some() {
            self.consumed += 1;
        }
        reply
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Status {
    Running,
    Terminated,
    Deadlocked,
    StepLimit,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Running => "Running",
            Status::Terminated => "Terminated",
            Status::Deadlocked => "Deadlocked",
            Status::StepLimit => "StepLimit",
        })
    }
}

#[derive(Debug, Clone)]
enum Service {
    Cell(BooleanCell),
    Oracle,
}

/// Full machine state between two steps.
#[derive(Debug, Clone)]
pub struct MachineConfig {
    /// 1-based; 0 once the machine has stopped.
    pub pc: usize,
    pub registers: RegisterFile,
    pub oracle: ReplyOracle,
    pub status: Status,
    services: BTreeMap<String, Service>,
    bindings: Vec<CellBinding>,
}

/// One executed instruction.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceEvent {
    pub position: usize,
    pub instruction: Instruction,
    /// Present iff the instruction carries a basic instruction.
    pub reply: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Trace {
    pub events: Vec<TraceEvent>,
    /// Never `Running`.
    pub status: Status,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VmError {
    #[error("oracle exhausted at position {position}")]
    OracleExhausted { position: usize },
    #[error("Boolean cell {focus} does not understand method {method}")]
    UnsupportedCellMethod { focus: String, method: String },
    #[error("machine is not running")]
    NotRunning,
    #[error("program fails validation ({} diagnostics)", .0.len())]
    InvalidProgram(Vec<Diagnostic>),
    #[error(transparent)]
    Params(#[from] ParamsError),
}

impl MachineConfig {
    /// pc = 1, all registers 0, cells at their configured initial contents.
    pub fn new(params: &ToolParams, oracle: ReplyOracle) -> Self {
        MachineConfig {
            pc: 1,
            registers: RegisterFile::new(params.maxr),
            oracle,
            status: Status::Running,
            services: BTreeMap::new(),
            bindings: params.cells.clone(),
        }
    }

    /// Starts from an arbitrary `(pc, registers)` with every focus answered
    /// by the oracle.
    pub fn at(pc: usize, registers: RegisterFile, oracle: ReplyOracle) -> Self {
        MachineConfig {
            pc,
            registers,
            oracle,
            status: Status::Running,
            services: BTreeMap::new(),
            bindings: Vec::new(),
        }
    }

    /// Contents of the cell bound to `focus`, if it has been touched.
    pub fn cell(&self, focus: &str) -> Option<bool> {
        match self.services.get(focus) {
            Some(Service::Cell(c)) => Some(c.contents),
            _ => None,
        }
    }

    fn query(&mut self, b: &BasicInstruction, steers: bool) -> Result<bool, VmError> {
        let focus = b.focus();
        if !self.services.contains_key(focus) {
            let service = match self.bindings.iter().find(|c| c.pattern.matches(focus)) {
                Some(binding) => Service::Cell(BooleanCell { contents: binding.init }),
                None => Service::Oracle,
            };
            self.services.insert(focus.to_string(), service);
        }
        match self.services.get_mut(focus) {
            Some(Service::Cell(cell)) => cell.process(b.method()).ok_or_else(|| VmError::UnsupportedCellMethod {
                focus: focus.to_string(),
                method: b.method().to_string(),
            }),
            // A plain instruction proceeds the same way whatever the reply,
            // so only tests draw from the oracle.
            _ if !steers => Ok(true),
            _ => self
                .oracle
                .next_reply()
                .ok_or(VmError::OracleExhausted { position: self.pc }),
        }
    }

    fn goto(&mut self, target: Option<usize>, len: usize) {
        match target {
            Some(t) if (1..=len).contains(&t) => self.pc = t,
            _ => {
                self.pc = 0;
                self.status = Status::Deadlocked;
            }
        }
    }

    fn jump_forward(&mut self, distance: u32, len: usize) {
        let target = (distance != 0).then(|| self.pc + distance as usize);
        self.goto(target, len);
    }

    fn jump_backward(&mut self, distance: u32, len: usize) {
        let target = (distance != 0)
            .then(|| self.pc.checked_sub(distance as usize))
            .flatten();
        self.goto(target, len);
    }

    /// Executes the instruction at `pc`.
    pub fn step(&mut self, p: &Program) -> Result<TraceEvent, VmError> {
        if self.status != Status::Running {
            return Err(VmError::NotRunning);
        }
        let len = p.len();
        let position = self.pc;
        let instruction = p.get(position).ok_or(VmError::NotRunning)?.clone();
        let mut reply = None;
        match &instruction {
            Instruction::Halt => {
                self.pc = 0;
                self.status = Status::Terminated;
            }
            Instruction::Plain(b) => {
                reply = Some(self.query(b, false)?);
                self.goto(Some(position + 1), len);
            }
            Instruction::PosTest(b) => {
                let r = self.query(b, true)?;
                reply = Some(r);
                self.goto(Some(position + if r { 1 } else { 2 }), len);
            }
            Instruction::NegTest(b) => {
                let r = self.query(b, true)?;
                reply = Some(r);
                self.goto(Some(position + if r { 2 } else { 1 }), len);
            }
            Instruction::FwdJump(l) => self.jump_forward(*l, len),
            Instruction::BwdJump(l) => self.jump_backward(*l, len),
            Instruction::RegSet { reg, value } => {
                self.registers.set(*reg, *value);
                self.goto(Some(position + 1), len);
            }
            Instruction::IndFwdJump(reg) => {
                let l = self.registers.get(*reg);
                self.jump_forward(l, len);
            }
            Instruction::IndBwdJump(reg) => {
                let l = self.registers.get(*reg);
                self.jump_backward(l, len);
            }
        }
        Ok(TraceEvent {
            position,
            instruction,
            reply,
        })
    }
}

/// Runs `p` from the initial configuration until it stops or
/// `params.step_limit` instructions have been executed.
pub fn run(p: &Program, params: &ToolParams, oracle: ReplyOracle) -> Result<Trace, VmError> {
    run_with(p, params, MachineConfig::new(params, oracle)).map(|(t, _)| t)
}

/// Like [`run`] but starting from `config`; also returns the final config.
pub fn run_with(
    p: &Program,
    params: &ToolParams,
    mut config: MachineConfig,
) -> Result<(Trace, MachineConfig), VmError> {
    params.check()?;
    let diagnostics = validate(p, params);
    if !diagnostics.is_empty() {
        return Err(VmError::InvalidProgram(diagnostics));
    }
    let mut events = Vec::new();
    while config.status == Status::Running {
        if events.len() as u64 >= params.step_limit {
            config.status = Status::StepLimit;
            break;
        }
        events.push(config.step(p)?);
    }
    Ok((
        Trace {
            events,
            status: config.status,
        },
        config,
    ))
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObservableEvent {
    pub basic: BasicInstruction,
    pub reply: bool,
}

/// The externally visible part of a run.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ObservableTrace {
    pub events: Vec<ObservableEvent>,
    pub status: Status,
}

/// Keeps the non-auxiliary basic instructions of `t` and its final status.
pub fn observable_trace(t: &Trace, params: &ToolParams) -> ObservableTrace {
    let events = t
        .events
        .iter()
        .filter_map(|e| {
            let basic = e.instruction.basic()?;
            if params.is_aux(basic) {
                return None;
            }
            Some(ObservableEvent {
                basic: basic.clone(),
                reply: e.reply?,
            })
        })
        .collect();
    ObservableTrace {
        events,
        status: t.status,
    }
}

/// Why a trace is not a run of its program.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceMismatch {
    /// Index into `events`.
    pub event: usize,
}

/// Replays `t` against `p`, checking that every event follows from the
/// previous one, that replies are present exactly on basic instructions,
/// and that the final status matches the last event.
pub fn verify_trace(p: &Program, params: &ToolParams, t: &Trace) -> Result<(), TraceMismatch> {
    let mut registers = RegisterFile::new(params.maxr);
    let mut expected = Some(1usize);
    let len = p.len();
    let within = |t: Option<usize>| t.filter(|t| (1..=len).contains(t));
    for (i, e) in t.events.iter().enumerate() {
        let bad = TraceMismatch { event: i };
        if expected != Some(e.position) || p.get(e.position) != Some(&e.instruction) {
            return Err(bad);
        }
        if e.reply.is_some() != e.instruction.basic().is_some() {
            return Err(bad);
        }
        let pc = e.position;
        let fwd = |l: u32| (l != 0).then(|| pc + l as usize);
        let bwd = |l: u32| (l != 0).then(|| pc.checked_sub(l as usize)).flatten();
        expected = match &e.instruction {
            Instruction::Halt => None,
            Instruction::Plain(_) => Some(pc + 1),
            Instruction::PosTest(_) => Some(pc + if e.reply == Some(true) { 1 } else { 2 }),
            Instruction::NegTest(_) => Some(pc + if e.reply == Some(true) { 2 } else { 1 }),
            Instruction::FwdJump(l) => fwd(*l),
            Instruction::BwdJump(l) => bwd(*l),
            Instruction::RegSet { reg, value } => {
                registers.set(*reg, *value);
                Some(pc + 1)
            }
            Instruction::IndFwdJump(reg) => fwd(registers.get(*reg)),
            Instruction::IndBwdJump(reg) => bwd(registers.get(*reg)),
        };
        let halted = matches!(e.instruction, Instruction::Halt);
        expected = within(expected);
        let last = i + 1 == t.events.len();
        if !last && expected.is_none() {
            return Err(TraceMismatch { event: i + 1 });
        }
        if last {
            let ok = match t.status {
                Status::Terminated => halted,
                Status::Deadlocked => !halted && expected.is_none(),
                Status::StepLimit => expected.is_some(),
                Status::Running => false,
            };
            if !ok {
                return Err(bad);
            }
        }
    }
    if t.events.is_empty() && t.status != Status::StepLimit {
        return Err(TraceMismatch { event: 0 });
    }
    Ok(())
}
