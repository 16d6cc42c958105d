//! Two independent ten-task reduction trees.
//!
//! Each tree has four producers writing distinct handles, two reducers
//! combining them pairwise, a final reducer, and three consumers that
//! update the result in place one after another. The trees use disjoint
//! handles, so the debugger shows two separate components.

use std::time::Duration;

use taskscope_runtime::{Access, FunctionId, Runtime, TaskId};

use crate::{busy_wait, DemoError};

pub const TASKS_PER_TREE: usize = 10;

#[derive(Debug, Clone)]
pub struct TwinTrees {
    /// Task ids, first tree then second, in submission order.
    pub tasks: Vec<TaskId>,
    pub produce: FunctionId,
    pub combine: FunctionId,
    pub reduce: FunctionId,
    pub consume: FunctionId,
}

/// Handle `slot` of tree `tree`, spaced like word-sized memory slots.
fn handle(tree: u64, slot: u64) -> u64 {
    0x1000 * (tree + 1) + 8 * slot
}

/// Submits both trees; each task runs for `task_time`.
pub fn generate_twin_trees(runtime: &Runtime, task_time: Duration) -> Result<TwinTrees, DemoError> {
    let produce = runtime.register_function("produce")?;
    let combine = runtime.register_function("combine")?;
    let reduce = runtime.register_function("reduce")?;
    let consume = runtime.register_function("consume")?;
    let body = move || busy_wait(task_time);

    let mut tasks = Vec::with_capacity(2 * TASKS_PER_TREE);
    for tree in 0..2 {
        let h = |slot| handle(tree, slot);
        for slot in 0..4 {
            tasks.push(runtime.submit(produce, vec![Access::output(h(slot))], body)?);
        }
        for (a, b, out) in [(0, 1, 4), (2, 3, 5)] {
            let accesses = vec![Access::input(h(a)), Access::input(h(b)), Access::output(h(out))];
            tasks.push(runtime.submit(combine, accesses, body)?);
        }
        let accesses = vec![Access::input(h(4)), Access::input(h(5)), Access::output(h(6))];
        tasks.push(runtime.submit(reduce, accesses, body)?);
        for _ in 0..3 {
            tasks.push(runtime.submit(consume, vec![Access::inout(h(6))], body)?);
        }
    }
    Ok(TwinTrees {
        tasks,
        produce,
        combine,
        reduce,
        consume,
    })
}
