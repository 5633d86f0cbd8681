//! Maximal internal delay over the state graph.
//!
//! Anchors are nodes of weight 0 (non-auxiliary basic instructions and
//! termination). A segment runs from one anchor to the next anchor on the
//! same path with only positive-weight nodes strictly between them. The
//! delay of the program is the largest segment weight, or unbounded when a
//! cycle of positive-weight nodes sits on such a segment.

use alloc::collections::VecDeque;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;

use super::graph::{NodeId, StateGraph};
use super::scc::tarjan;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Delay {
    Finite(u64),
    Unbounded,
}

impl Delay {
    pub fn finite(self) -> Option<u64> {
        match self {
            Delay::Finite(n) => Some(n),
            Delay::Unbounded => None,
        }
    }
}

impl fmt::Display for Delay {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Delay::Finite(n) => write!(f, "{n}"),
            Delay::Unbounded => f.write_str("unbounded"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Witness {
    /// No anchor is reachable.
    None,
    /// Anchor, positive-weight nodes, anchor. A single node when the best
    /// segment is the empty one.
    Segment(Vec<NodeId>),
    /// `stem` runs from an anchor to `cycle[0]`; `cycle` returns to
    /// `cycle[0]` after its last node; `exit` leaves `cycle[0]` and ends on
    /// an anchor.
    Cycle {
        stem: Vec<NodeId>,
        cycle: Vec<NodeId>,
        exit: Vec<NodeId>,
    },
}

impl Witness {
    /// The witness as one path; a cycle witness goes round once.
    pub fn path(&self) -> Vec<NodeId> {
        match self {
            Witness::None => Vec::new(),
            Witness::Segment(s) => s.clone(),
            Witness::Cycle { stem, cycle, exit } => {
                let mut path = stem.clone();
                path.extend_from_slice(&cycle[1..]);
                path.push(cycle[0]);
                path.extend_from_slice(exit);
                path
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MidResult {
    pub value: Delay,
    pub witness: Witness,
    /// False when the program never reaches an anchor; `value` is then 0.
    pub anchor_reachable: bool,
    /// Largest delay after an anchor that never meets another anchor.
    pub open_tail: Delay,
}

/// Computes the maximal internal delay of a complete state graph.
pub fn compute_mid(g: &StateGraph) -> MidResult {
    let n = g.len();
    let anchor: Vec<bool> = g.ids().map(|v| g.weight(v) == 0).collect();
    let anchors: Vec<NodeId> = g.ids().filter(|&v| anchor[v as usize]).collect();
    if anchors.is_empty() {
        return MidResult {
            value: Delay::Finite(0),
            witness: Witness::None,
            anchor_reachable: false,
            open_tail: Delay::Finite(0),
        };
    }

    // Positive-weight nodes entered from an anchor without meeting another.
    let mut forward = vec![false; n];
    let mut queue: VecDeque<NodeId> = VecDeque::new();
    for &a in &anchors {
        for s in g.successors(a) {
            if !anchor[s as usize] && !forward[s as usize] {
                forward[s as usize] = true;
                queue.push_back(s);
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for s in g.successors(v) {
            if !anchor[s as usize] && !forward[s as usize] {
                forward[s as usize] = true;
                queue.push_back(s);
            }
        }
    }

    // Positive-weight nodes that reach an anchor without meeting another.
    let mut pred_start = vec![0u32; n + 1];
    for v in g.ids() {
        for s in g.successors(v) {
            pred_start[s as usize + 1] += 1;
        }
    }
    for i in 0..n {
        pred_start[i + 1] += pred_start[i];
    }
    let mut fill = pred_start.clone();
    let mut preds = vec![0u32; pred_start[n] as usize];
    for v in g.ids() {
        for s in g.successors(v) {
            preds[fill[s as usize] as usize] = v;
            fill[s as usize] += 1;
        }
    }
    let predecessors = |v: NodeId| &preds[pred_start[v as usize] as usize..pred_start[v as usize + 1] as usize];
    let mut backward = vec![false; n];
    for &a in &anchors {
        for &p in predecessors(a) {
            if !anchor[p as usize] && !backward[p as usize] {
                backward[p as usize] = true;
                queue.push_back(p);
            }
        }
    }
    while let Some(v) = queue.pop_front() {
        for &p in predecessors(v) {
            if !anchor[p as usize] && !backward[p as usize] {
                backward[p as usize] = true;
                queue.push_back(p);
            }
        }
    }

    let between: Vec<bool> = (0..n).map(|i| forward[i] && backward[i]).collect();
    let components = tarjan(&forward, |v| g.successors(v));
    let self_loop = |v: NodeId| g.successors(v).any(|s| s == v);
    let cyclic = |c: &Vec<NodeId>| c.len() > 1 || self_loop(c[0]);

    // Open tails: longest positive-weight continuation after an anchor.
    let mut tail = vec![Delay::Finite(0); n];
    for c in &components {
        if cyclic(c) {
            for &v in c {
                tail[v as usize] = Delay::Unbounded;
            }
            continue;
        }
        let v = c[0];
        let mut best = Delay::Finite(0);
        for s in g.successors(v) {
            if forward[s as usize] {
                best = best.max(tail[s as usize]);
            }
        }
        tail[v as usize] = match best {
            Delay::Finite(b) => Delay::Finite(b + u64::from(g.weight(v))),
            Delay::Unbounded => Delay::Unbounded,
        };
    }
    let mut open_tail = Delay::Finite(0);
    for &a in &anchors {
        for s in g.successors(a) {
            if forward[s as usize] {
                open_tail = open_tail.max(tail[s as usize]);
            }
        }
    }

    if let Some(c) = components.iter().find(|c| between[c[0] as usize] && cyclic(c)) {
        let witness = cycle_witness(g, &anchor, &forward, &between, c);
        return MidResult {
            value: Delay::Unbounded,
            witness,
            anchor_reachable: true,
            open_tail,
        };
    }

    // Longest closed continuation; components are sinks first and, inside
    // `between`, all singletons.
    const NONE: NodeId = NodeId::MAX;
    let mut best = vec![0u64; n];
    let mut choice = vec![NONE; n];
    for c in &components {
        let v = c[0];
        if !between[v as usize] {
            continue;
        }
        let mut top: Option<(u64, NodeId)> = None;
        for s in g.successors(v) {
            let candidate = if anchor[s as usize] {
                0
            } else if between[s as usize] {
                best[s as usize]
            } else {
                continue;
            };
            if top.is_none_or(|(b, _)| candidate > b) {
                top = Some((candidate, s));
            }
        }
        let (b, s) = top.expect("nodes between anchors reach an anchor");
        best[v as usize] = b + u64::from(g.weight(v));
        choice[v as usize] = s;
    }

    let mut top: (u64, Vec<NodeId>) = (0, vec![anchors[0]]);
    let mut closed = false;
    for &a in &anchors {
        for s in g.successors(a) {
            let candidate = if anchor[s as usize] {
                0
            } else if between[s as usize] {
                best[s as usize]
            } else {
                continue;
            };
            if !closed || candidate > top.0 {
                let mut path = vec![a, s];
                let mut v = s;
                while !anchor[v as usize] {
                    v = choice[v as usize];
                    path.push(v);
                }
                top = (candidate, path);
                closed = true;
            }
        }
    }
    MidResult {
        value: Delay::Finite(top.0),
        witness: Witness::Segment(top.1),
        anchor_reachable: true,
        open_tail,
    }
}

/// Shortest path from `sources` to a successor satisfying `goal`, moving
/// only through nodes satisfying `through`. The path starts at a source and
/// ends at the goal node.
fn bfs_path(
    g: &StateGraph,
    sources: &[NodeId],
    through: impl Fn(NodeId) -> bool,
    goal: impl Fn(NodeId) -> bool,
) -> Option<Vec<NodeId>> {
    const ROOT: NodeId = NodeId::MAX;
    let mut parent = hashbrown::HashMap::new();
    let mut queue = VecDeque::new();
    for &s in sources {
        parent.insert(s, ROOT);
        queue.push_back(s);
    }
    while let Some(v) = queue.pop_front() {
        for s in g.successors(v) {
            if goal(s) {
                let mut path = vec![s, v];
                let mut u = v;
                while let Some(&p) = parent.get(&u) {
                    if p == ROOT {
                        break;
                    }
                    path.push(p);
                    u = p;
                }
                path.reverse();
                return Some(path);
            }
            if through(s) && !parent.contains_key(&s) {
                parent.insert(s, v);
                queue.push_back(s);
            }
        }
    }
    None
}

fn cycle_witness(g: &StateGraph, anchor: &[bool], forward: &[bool], between: &[bool], component: &[NodeId]) -> Witness {
    let mut member = hashbrown::HashSet::new();
    member.extend(component.iter().copied());
    let anchors: Vec<NodeId> = g.ids().filter(|&v| anchor[v as usize]).collect();
    let stem = bfs_path(g, &anchors, |v| forward[v as usize], |v| member.contains(&v))
        .expect("component is entered from an anchor");
    let entry = *stem.last().expect("non-empty");
    let mut cycle = bfs_path(g, &[entry], |v| member.contains(&v), |v| v == entry).expect("component is cyclic");
    cycle.pop();
    let mut exit =
        bfs_path(g, &[entry], |v| between[v as usize], |v| anchor[v as usize]).expect("component reaches an anchor");
    exit.remove(0);
    Witness::Cycle { stem, cycle, exit }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analyzer::build_state_graph;
    use crate::isa::parse_program;
    use crate::params::{AuxSet, ToolParams};

    fn mid(text: &str, aux: &str) -> MidResult {
        let params = ToolParams::new(2, 3).with_aux(AuxSet::parse_list(aux).unwrap());
        let g = build_state_graph(&parse_program(text).unwrap(), &params).unwrap();
        compute_mid(&g)
    }

    #[test]
    fn halt_is_zero() {
        let r = mid("!", "");
        assert_eq!(r.value, Delay::Finite(0));
        assert_eq!(r.witness, Witness::Segment(vec![0]));
    }

    #[test]
    fn register_dispatch_segment() {
        let r = mid("f.m ; set:1:1 ; i#1 ; f.m ; !", "");
        assert_eq!(r.value, Delay::Finite(3));
        assert_eq!(r.witness.path().len(), 4);
    }

    #[test]
    fn aux_loop_is_unbounded() {
        let r = mid("f.m ; +x.get ; \\#1 ; !", "x.*");
        assert_eq!(r.value, Delay::Unbounded);
        let Witness::Cycle { stem, cycle, exit } = &r.witness else {
            panic!("expected a cycle witness");
        };
        assert_eq!(stem.first(), Some(&0));
        assert_eq!(cycle.len(), 2);
        assert!(!exit.is_empty());
    }

    #[test]
    fn loop_without_exit_is_an_open_tail() {
        // The loop never reaches a second anchor, so it does not count.
        let r = mid("f.m ; #1 ; \\#1", "");
        assert_eq!(r.value, Delay::Finite(0));
        assert_eq!(r.open_tail, Delay::Unbounded);
    }

    #[test]
    fn deadlocking_tail_is_not_counted() {
        let r = mid("f.m ; #1 ; #1 ; #1 ; #0", "");
        assert_eq!(r.value, Delay::Finite(0));
        assert_eq!(r.open_tail, Delay::Finite(4));
    }

    #[test]
    fn no_anchor() {
        let r = mid("#1 ; #0", "");
        assert_eq!(r.value, Delay::Finite(0));
        assert!(!r.anchor_reachable);
        assert_eq!(r.witness, Witness::None);
    }

    #[test]
    fn prefix_before_first_anchor_is_ignored() {
        let r = mid("#1 ; #1 ; #1 ; f.m ; #1 ; !", "");
        assert_eq!(r.value, Delay::Finite(1));
    }
}
