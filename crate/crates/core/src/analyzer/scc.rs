//! Iterative Tarjan over an induced subgraph.

use alloc::vec;
use alloc::vec::Vec;

const UNVISITED: u32 = u32::MAX;

/// Strongly connected components of the subgraph induced by `included`,
/// sinks first (reverse topological order).
pub fn tarjan<S, I>(included: &[bool], successors: S) -> Vec<Vec<u32>>
where
    S: Fn(u32) -> I,
    I: Iterator<Item = u32>,
{
    let n = included.len();
    let mut index = vec![UNVISITED; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut frames: Vec<(u32, I)> = Vec::new();
    let mut components = Vec::new();
    let mut counter = 0u32;

    for root in 0..n as u32 {
        if !included[root as usize] || index[root as usize] != UNVISITED {
            continue;
        }
        index[root as usize] = counter;
        low[root as usize] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root as usize] = true;
        frames.push((root, successors(root)));

        while let Some(frame) = frames.last_mut() {
            let v = frame.0;
            match frame.1.next() {
                Some(w) => {
                    let wi = w as usize;
                    if !included[wi] {
                        continue;
                    }
                    if index[wi] == UNVISITED {
                        index[wi] = counter;
                        low[wi] = counter;
                        counter += 1;
                        stack.push(w);
                        on_stack[wi] = true;
                        frames.push((w, successors(w)));
                    } else if on_stack[wi] {
                        low[v as usize] = low[v as usize].min(index[wi]);
                    }
                }
                None => {
                    frames.pop();
                    if let Some(parent) = frames.last() {
                        let p = parent.0 as usize;
                        low[p] = low[p].min(low[v as usize]);
                    }
                    if low[v as usize] == index[v as usize] {
                        let mut component = Vec::new();
                        loop {
                            let w = stack.pop().expect("component root is on the stack");
                            on_stack[w as usize] = false;
                            component.push(w);
                            if w == v {
                                break;
                            }
                        }
                        components.push(component);
                    }
                }
            }
        }
    }
    components
}
