//! Reachable `(pc, registers)` state graph with free replies.

use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;

use super::id_weight;
use crate::isa::{validate, Instruction, Program};
use crate::params::ToolParams;
use crate::vm::{RegisterFile, VmError};

pub type NodeId = u32;

/// Control state of the machine; service contents are not tracked.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct StateNode {
    pub pc: u32,
    pub registers: RegisterFile,
}

impl fmt::Display for StateNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}@{}", self.pc, self.registers)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Target {
    Node(NodeId),
    Deadlock,
}

impl Target {
    pub fn node(self) -> Option<NodeId> {
        match self {
            Target::Node(n) => Some(n),
            Target::Deadlock => None,
        }
    }
}

/// Outgoing transitions of a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Flow {
    Halt,
    Single(Target),
    /// A test: `next` is the pc+1 outcome, `skip` the pc+2 outcome.
    Branch {
        next: Target,
        skip: Target,
    },
}

impl Flow {
    pub fn targets(self) -> impl Iterator<Item = Target> {
        let (a, b) = match self {
            Flow::Halt => (None, None),
            Flow::Single(t) => (Some(t), None),
            Flow::Branch { next, skip } => (Some(next), Some(skip)),
        };
        a.into_iter().chain(b)
    }

    pub fn successors(self) -> impl Iterator<Item = NodeId> {
        self.targets().filter_map(Target::node)
    }
}

#[derive(Debug, Clone)]
pub struct StateGraph {
    nodes: Vec<StateNode>,
    flows: Vec<Flow>,
    weights: Vec<u8>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum AnalysisError {
    #[error("state limit of {limit} nodes exceeded ({frontier} nodes still unexplored)")]
    StateLimitExceeded { limit: usize, frontier: usize },
    #[error(transparent)]
    Vm(#[from] VmError),
}

impl StateGraph {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// The initial state `(1, 0…0)`.
    pub fn initial(&self) -> NodeId {
        0
    }

    pub fn node(&self, id: NodeId) -> &StateNode {
        &self.nodes[id as usize]
    }

    pub fn flow(&self, id: NodeId) -> Flow {
        self.flows[id as usize]
    }

    /// Delay weight of the instruction at the node's pc.
    pub fn weight(&self, id: NodeId) -> u8 {
        self.weights[id as usize]
    }

    pub fn successors(&self, id: NodeId) -> impl Iterator<Item = NodeId> {
        self.flows[id as usize].successors()
    }

    pub fn edge_count(&self) -> usize {
        self.flows.iter().map(|f| f.targets().count()).sum()
    }

    pub fn ids(&self) -> impl Iterator<Item = NodeId> {
        0..self.nodes.len() as NodeId
    }

    /// Linear lookup of a state.
    pub fn find(&self, node: &StateNode) -> Option<NodeId> {
        self.nodes.iter().position(|n| n == node).map(|i| i as NodeId)
    }

    pub fn halts(&self) -> usize {
        self.flows.iter().filter(|f| matches!(f, Flow::Halt)).count()
    }

    /// Nodes with at least one transition into deadlock.
    pub fn deadlocks(&self) -> usize {
        self.flows
            .iter()
            .filter(|f| f.targets().any(|t| t == Target::Deadlock))
            .count()
    }
}

/// Breadth-first closure from the initial state. Tests get both outcomes,
/// register contents are tracked exactly.
pub fn build_state_graph(p: &Program, params: &ToolParams) -> Result<StateGraph, AnalysisError> {
    params.check().map_err(VmError::from)?;
    let diagnostics = validate(p, params);
    if !diagnostics.is_empty() {
        return Err(VmError::InvalidProgram(diagnostics).into());
    }
    let len = p.len();
    let mut index: HashMap<StateNode, NodeId> = HashMap::new();
    let mut nodes = Vec::new();
    let mut flows = Vec::new();
    let mut weights = Vec::new();

    let start = StateNode {
        pc: 1,
        registers: RegisterFile::new(params.maxr),
    };
    index.insert(start.clone(), 0);
    nodes.push(start);

    let mut cursor = 0usize;
    while cursor < nodes.len() {
        let pc = nodes[cursor].pc as usize;
        let instruction = p.get(pc).expect("nodes only hold in-range pcs");
        let registers = nodes[cursor].registers.clone();
        let mut intern = |target: Option<usize>, registers: RegisterFile| -> Result<Target, AnalysisError> {
            let target = match target {
                Some(t) if (1..=len).contains(&t) => t,
                _ => return Ok(Target::Deadlock),
            };
            let node = StateNode {
                pc: target as u32,
                registers,
            };
            if let Some(&id) = index.get(&node) {
                return Ok(Target::Node(id));
            }
            if nodes.len() >= params.state_limit {
                return Err(AnalysisError::StateLimitExceeded {
                    limit: params.state_limit,
                    frontier: nodes.len() - cursor,
                });
            }
            let id = nodes.len() as NodeId;
            index.insert(node.clone(), id);
            nodes.push(node);
            Ok(Target::Node(id))
        };
        let forward = |l: u32| (l != 0).then(|| pc + l as usize);
        let backward = |l: u32| (l != 0).then(|| pc.checked_sub(l as usize)).flatten();
        let flow = match instruction {
            Instruction::Halt => Flow::Halt,
            Instruction::Plain(_) => Flow::Single(intern(Some(pc + 1), registers)?),
            Instruction::PosTest(_) | Instruction::NegTest(_) => {
                let next = intern(Some(pc + 1), registers.clone())?;
                let skip = intern(Some(pc + 2), registers)?;
                Flow::Branch { next, skip }
            }
            Instruction::FwdJump(l) => Flow::Single(intern(forward(*l), registers)?),
            Instruction::BwdJump(l) => Flow::Single(intern(backward(*l), registers)?),
            Instruction::RegSet { reg, value } => {
                let mut updated = registers;
                updated.set(*reg, *value);
                Flow::Single(intern(Some(pc + 1), updated)?)
            }
            Instruction::IndFwdJump(reg) => {
                let l = registers.get(*reg);
                Flow::Single(intern(forward(l), registers)?)
            }
            Instruction::IndBwdJump(reg) => {
                let l = registers.get(*reg);
                Flow::Single(intern(backward(l), registers)?)
            }
        };
        flows.push(flow);
        weights.push(id_weight(instruction, &params.aux));
        cursor += 1;
    }
    Ok(StateGraph { nodes, flows, weights })
}
