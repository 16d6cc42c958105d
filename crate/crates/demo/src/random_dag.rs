//! Seeded random workloads: tasks with random accesses over a few handles.

use std::path::Path;
use std::time::Duration;

use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use taskscope_runtime::{Access, MemorySink, Runtime};
use taskscope_wire::Frame;

use crate::check::{dependency_set, max_concurrency};
use crate::{busy_wait, DemoError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RandomDagSpec {
    pub tasks: usize,
    /// Handles are drawn from 1..=handles.
    pub handles: u64,
    pub seed: u64,
    pub workers: usize,
    /// Upper bound on accesses per task.
    pub max_accesses: usize,
    /// Upper bound on each task's busy time.
    pub max_task_time: Duration,
}

impl Default for RandomDagSpec {
    fn default() -> Self {
        RandomDagSpec {
            tasks: 50,
            handles: 8,
            seed: 0,
            workers: 4,
            max_accesses: 4,
            max_task_time: Duration::from_micros(200),
        }
    }
}

/// One task of a generated workload.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaskPlan {
    pub accesses: Vec<Access>,
    pub busy: Duration,
}

/// The workload for `spec`; depends only on the spec, never on timing.
pub fn plan(spec: &RandomDagSpec) -> Vec<TaskPlan> {
    let mut rng = StdRng::seed_from_u64(spec.seed);
    let max_busy = spec.max_task_time.as_micros() as u64;
    (0..spec.tasks)
        .map(|_| {
            let n = rng.gen_range(0..=spec.max_accesses);
            let accesses = (0..n)
                .map(|_| {
                    let h = rng.gen_range(1..=spec.handles.max(1));
                    match rng.gen_range(0..3) {
                        0 => Access::input(h),
                        1 => Access::inout(h),
                        _ => Access::output(h),
                    }
                })
                .collect();
            TaskPlan {
                accesses,
                busy: Duration::from_micros(rng.gen_range(0..=max_busy)),
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RandomDagSummary {
    pub created: usize,
    pub finished: usize,
    pub edges: usize,
    /// Most tasks observed running at once.
    pub max_concurrency: usize,
    pub wall: Duration,
}

#[derive(Debug, Clone)]
pub struct RandomDagRun {
    /// The complete frame stream, shutdown included.
    pub frames: Vec<Frame>,
    pub summary: RandomDagSummary,
}

/// Runs the workload to completion, optionally recording a `.ayu` trace.
pub fn run_random_dag(spec: &RandomDagSpec, trace: Option<&Path>) -> Result<RandomDagRun, DemoError> {
    let memory = MemorySink::new();
    let mut builder = Runtime::builder().workers(spec.workers).sink(memory.clone());
    if let Some(path) = trace {
        builder = builder.record_to(path).map_err(|source| DemoError::Io {
            context: format!("cannot create {}", path.display()),
            source,
        })?;
    }
    let runtime = builder.build();
    let step = runtime.register_function("step")?;
    for task in plan(spec) {
        let busy = task.busy;
        runtime.submit(step, task.accesses, move || busy_wait(busy))?;
    }
    let wait = runtime.wait_all();
    drop(runtime);

    let frames = memory.frames();
    let summary = RandomDagSummary {
        created: wait.created,
        finished: wait.finished,
        edges: dependency_set(&frames).len(),
        max_concurrency: max_concurrency(&frames),
        wall: wait.wall,
    };
    Ok(RandomDagRun { frames, summary })
}
