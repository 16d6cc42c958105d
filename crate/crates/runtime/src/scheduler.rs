//! Scheduler state machine.
//!
//! [`Scheduler`] owns every task record, the ready and priority queues and
//! the debugger controls (block list, stop flag, step permits, function
//! breakpoints). It is single-threaded; [`crate::Runtime`] wraps it in a
//! mutex and drives it from the master and worker threads. Every state
//! change is emitted to the attached sinks before the call returns.

use std::collections::{HashMap, HashSet, VecDeque};
use std::time::Instant;

use log::warn;
use taskscope_wire::{Ack, AckStatus, Command, CommandId, Event, Frame, NameFrame};
use thiserror::Error;

use crate::ledger::HandleLedger;
use crate::sink::FrameSink;
use crate::types::{
    Access, DependencyEdge, FunctionId, TaskId, TaskRecord, TaskState, Timestamps, WorkerId,
};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SubmitError {
    #[error("function name must not be empty")]
    EmptyName,
    #[error("function {0} is not registered")]
    UnknownFunction(FunctionId),
    #[error("access {index} uses the reserved handle 0")]
    ZeroHandle { index: usize },
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SchedulerError {
    #[error("unknown task {0}")]
    UnknownTask(TaskId),
    #[error("task {task} is {state:?}, expected Running")]
    NotRunning { task: TaskId, state: TaskState },
}

/// Who consumes a sink. `Detach` drops the debugger sinks only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SinkRole {
    Debugger,
    Recorder,
}

struct AttachedSink {
    role: SinkRole,
    sink: Box<dyn FrameSink>,
}

/// A task handed to a worker by [`Scheduler::worker_dequeue`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dispatch {
    pub task: TaskId,
    /// The task's function has a breakpoint; the stop flag is now set.
    pub breakpoint: bool,
}

pub struct Scheduler {
    origin: Instant,
    functions: Vec<String>,
    function_ids: HashMap<String, FunctionId>,
    tasks: Vec<TaskRecord>,
    ledger: HandleLedger,
    ready: VecDeque<TaskId>,
    priority: VecDeque<TaskId>,
    block_list: HashSet<TaskId>,
    stop: bool,
    step_permits: u32,
    break_functions: HashSet<FunctionId>,
    workers: usize,
    running: usize,
    finished: usize,
    last_transition: Instant,
    sinks: Vec<AttachedSink>,
}

impl Scheduler {
    /// Creates the scheduler and emits `RuntimeInit` to `sinks`.
    pub fn new(workers: usize, sinks: Vec<(SinkRole, Box<dyn FrameSink>)>) -> Self {
        let origin = Instant::now();
        let mut sched = Scheduler {
            origin,
            functions: Vec::new(),
            function_ids: HashMap::new(),
            tasks: Vec::new(),
            ledger: HandleLedger::new(),
            ready: VecDeque::new(),
            priority: VecDeque::new(),
            block_list: HashSet::new(),
            stop: false,
            step_permits: 0,
            break_functions: HashSet::new(),
            workers,
            running: 0,
            finished: 0,
            last_transition: origin,
            sinks: sinks
                .into_iter()
                .map(|(role, sink)| AttachedSink { role, sink })
                .collect(),
        };
        sched.emit(Event::runtime_init(0).into());
        sched.flush();
        sched
    }

    pub fn now_us(&self) -> u64 {
        self.origin.elapsed().as_micros() as u64
    }

    fn emit(&mut self, frame: Frame) {
        self.sinks.retain_mut(|attached| match attached.sink.send(&frame) {
            Ok(()) => true,
            Err(err) => {
                warn!("dropping {:?} sink after write error: {err}", attached.role);
                false
            }
        });
    }

    fn flush(&mut self) {
        self.sinks.retain_mut(|attached| match attached.sink.flush() {
            Ok(()) => true,
            Err(err) => {
                warn!("dropping {:?} sink after flush error: {err}", attached.role);
                false
            }
        });
    }

    fn touch(&mut self) {
        self.last_transition = Instant::now();
    }

    pub fn attach_sink(&mut self, role: SinkRole, sink: Box<dyn FrameSink>) {
        self.sinks.push(AttachedSink { role, sink });
    }

    pub fn has_debugger(&self) -> bool {
        self.sinks.iter().any(|s| s.role == SinkRole::Debugger)
    }

    pub fn register_function(&mut self, name: &str) -> Result<FunctionId, SubmitError> {
        if name.is_empty() {
            return Err(SubmitError::EmptyName);
        }
        if let Some(&id) = self.function_ids.get(name) {
            return Ok(id);
        }
        self.functions.push(name.to_owned());
        let id = FunctionId(self.functions.len() as u64);
        self.function_ids.insert(name.to_owned(), id);
        self.emit(Frame::Name(NameFrame {
            function: id.get(),
            name: name.to_owned(),
        }));
        self.flush();
        Ok(id)
    }

    pub fn function_name(&self, id: FunctionId) -> Option<&str> {
        let idx = usize::try_from(id.get()).ok()?.checked_sub(1)?;
        self.functions.get(idx).map(String::as_str)
    }

    pub fn function_id(&self, name: &str) -> Option<FunctionId> {
        self.function_ids.get(name).copied()
    }

    /// Creates a task, infers its dependencies and queues it when nothing
    /// is pending. Returns the new id and the edges into it.
    pub fn submit_task(
        &mut self,
        function: FunctionId,
        accesses: Vec<Access>,
        high_priority: bool,
    ) -> Result<(TaskId, Vec<DependencyEdge>), SubmitError> {
        if self.function_name(function).is_none() {
            return Err(SubmitError::UnknownFunction(function));
        }
        if let Some(index) = accesses.iter().position(|a| a.handle.get() == 0) {
            return Err(SubmitError::ZeroHandle { index });
        }

        let id = TaskId(self.tasks.len() as u64 + 1);
        let edges = self.ledger.resolve(id, &accesses);
        let now = self.now_us();

        let mut preds: Vec<TaskId> = edges.iter().map(|e| e.pred).collect();
        preds.sort_unstable();
        preds.dedup();
        let mut pending = 0;
        for &pred in &preds {
            let record = &mut self.tasks[pred.get() as usize - 1];
            record.successors.push(id);
            if record.state != TaskState::Finished {
                pending += 1;
            }
        }

        self.tasks.push(TaskRecord {
            id,
            function,
            accesses,
            state: TaskState::NotQueued,
            thread: None,
            pending,
            high_priority,
            blocked: false,
            times: Timestamps {
                created: Some(now),
                ..Timestamps::default()
            },
            successors: Vec::new(),
        });

        self.emit(Event::task_created(id.get(), function.get(), now).into());
        for edge in &edges {
            self.emit(
                Event::dependency_added(
                    edge.pred.get(),
                    id.get(),
                    edge.handle.get(),
                    edge.kind,
                    now,
                )
                .into(),
            );
        }
        if pending == 0 {
            self.enqueue(id, now);
        }
        self.touch();
        self.flush();
        Ok((id, edges))
    }

    fn enqueue(&mut self, id: TaskId, now: u64) {
        let record = self.record_mut(id);
        debug_assert_eq!(record.state, TaskState::NotQueued);
        debug_assert_eq!(record.pending, 0);
        record.state = TaskState::Queued;
        record.times.queued = Some(now);
        if record.high_priority {
            self.priority.push_back(id);
        } else {
            self.ready.push_back(id);
        }
        self.emit(Event::task_queued(id.get(), now).into());
    }

    fn take_unblocked(queue: &mut VecDeque<TaskId>, blocked: &HashSet<TaskId>) -> Option<TaskId> {
        let pos = queue.iter().position(|t| !blocked.contains(t))?;
        queue.remove(pos)
    }

    /// Hands the first eligible queued task to `worker`, priority queue
    /// first. Returns `None` while stopped (unless a step permit is
    /// available) or when every queued task is blocked.
    pub fn worker_dequeue(&mut self, worker: WorkerId) -> Option<Dispatch> {
        let stepping = self.stop;
        if stepping && self.step_permits == 0 {
            return None;
        }
        let task = Self::take_unblocked(&mut self.priority, &self.block_list)
            .or_else(|| Self::take_unblocked(&mut self.ready, &self.block_list))?;
        if stepping {
            self.step_permits -= 1;
        }

        let now = self.now_us();
        let record = self.record_mut(task);
        record.state = TaskState::Running;
        record.thread = Some(worker);
        record.times.running = Some(now);
        let function = record.function;
        self.running += 1;
        self.emit(Event::task_running(task.get(), worker.0, now).into());

        let breakpoint = self.break_functions.contains(&function);
        if breakpoint {
            self.stop = true;
            self.emit(Event::breakpoint_hit(task.get(), function.get(), worker.0, now).into());
        }
        self.touch();
        self.flush();
        Some(Dispatch { task, breakpoint })
    }

    /// Marks a running task finished and queues successors whose last
    /// pending predecessor this was, in task id order.
    pub fn complete_task(&mut self, task: TaskId) -> Result<Vec<TaskId>, SchedulerError> {
        let now = self.now_us();
        let record = self
            .record_mut_checked(task)
            .ok_or(SchedulerError::UnknownTask(task))?;
        if record.state != TaskState::Running {
            return Err(SchedulerError::NotRunning {
                task,
                state: record.state,
            });
        }
        record.state = TaskState::Finished;
        record.times.finished = Some(now);
        let successors = record.successors.clone();
        self.running -= 1;
        self.finished += 1;
        self.emit(Event::task_finished(task.get(), now).into());

        let mut released = Vec::new();
        for succ in successors {
            let record = self.record_mut(succ);
            record.pending -= 1;
            if record.pending == 0 {
                released.push(succ);
            }
        }
        released.sort_unstable();
        for &succ in &released {
            self.enqueue(succ, now);
        }
        self.touch();
        self.flush();
        Ok(released)
    }

    /// Applies a debugger command and emits its acknowledgment.
    pub fn apply_command(&mut self, command: Command) -> AckStatus {
        let status = self.command_status(command);
        // A command may make blocked or stopped work runnable again, so it
        // restarts the stall clock like a task transition does.
        self.touch();
        self.emit(Frame::Ack(Ack::new(command, status.clone())));
        self.flush();
        if command == Command::Detach {
            self.sinks.retain(|s| s.role != SinkRole::Debugger);
        }
        status
    }

    /// Acknowledges a command frame that could not be decoded.
    pub fn reject_command(&mut self, raw_id: u64, raw_arg: u64, reason: String) -> AckStatus {
        let status = AckStatus::Error(reason);
        self.emit(Frame::Ack(Ack {
            command: raw_id,
            arg: raw_arg,
            status: status.clone(),
        }));
        self.flush();
        status
    }

    fn command_status(&mut self, command: Command) -> AckStatus {
        match command {
            Command::Block(t) | Command::Unblock(t) => {
                let task = TaskId(t);
                let Some(record) = self.record_mut_checked(task) else {
                    return AckStatus::Error(format!("unknown task {t}"));
                };
                let block = command.id() == CommandId::Block;
                record.blocked = block;
                let state = record.state;
                if block {
                    self.block_list.insert(task);
                } else {
                    self.block_list.remove(&task);
                }
                match state {
                    TaskState::Running | TaskState::Finished => {
                        AckStatus::Ineffective(format!("task {t} is already {}", state.label()))
                    }
                    _ => AckStatus::Ok,
                }
            }
            Command::Prioritize(t) | Command::Deprioritize(t) => {
                let Some(record) = self.record_mut_checked(TaskId(t)) else {
                    return AckStatus::Error(format!("unknown task {t}"));
                };
                if record.state != TaskState::NotQueued {
                    return AckStatus::Ineffective(format!(
                        "task {t} is already {}; queued tasks cannot be requeued",
                        record.state.label()
                    ));
                }
                record.high_priority = command.id() == CommandId::Prioritize;
                AckStatus::Ok
            }
            Command::Stop => {
                self.stop = true;
                AckStatus::Ok
            }
            Command::Continue => {
                self.stop = false;
                self.step_permits = 0;
                AckStatus::Ok
            }
            Command::Step => {
                if self.stop {
                    self.step_permits += 1;
                    AckStatus::Ok
                } else {
                    AckStatus::Ineffective("execution is not stopped".to_owned())
                }
            }
            Command::BreakOnFunction(f) => {
                let function = FunctionId(f);
                if self.function_name(function).is_none() {
                    return AckStatus::Error(format!("unknown function {f}"));
                }
                self.break_functions.insert(function);
                AckStatus::Ok
            }
            Command::Detach => AckStatus::Ok,
        }
    }

    fn record_mut_checked(&mut self, id: TaskId) -> Option<&mut TaskRecord> {
        let idx = usize::try_from(id.get()).ok()?.checked_sub(1)?;
        self.tasks.get_mut(idx)
    }

    fn record_mut(&mut self, id: TaskId) -> &mut TaskRecord {
        &mut self.tasks[id.get() as usize - 1]
    }

    pub fn task(&self, id: TaskId) -> Option<&TaskRecord> {
        let idx = usize::try_from(id.get()).ok()?.checked_sub(1)?;
        self.tasks.get(idx)
    }

    pub fn tasks(&self) -> &[TaskRecord] {
        &self.tasks
    }

    pub fn ready_queue(&self) -> impl Iterator<Item = TaskId> + '_ {
        self.ready.iter().copied()
    }

    pub fn priority_queue(&self) -> impl Iterator<Item = TaskId> + '_ {
        self.priority.iter().copied()
    }

    pub fn is_stopped(&self) -> bool {
        self.stop
    }

    pub fn is_blocked(&self, id: TaskId) -> bool {
        self.block_list.contains(&id)
    }

    pub fn workers(&self) -> usize {
        self.workers
    }

    pub fn created(&self) -> usize {
        self.tasks.len()
    }

    pub fn finished(&self) -> usize {
        self.finished
    }

    pub fn running(&self) -> usize {
        self.running
    }

    pub fn all_finished(&self) -> bool {
        self.finished == self.tasks.len()
    }

    pub fn last_transition(&self) -> Instant {
        self.last_transition
    }

    pub fn unfinished(&self) -> Vec<TaskId> {
        self.tasks
            .iter()
            .filter(|t| t.state != TaskState::Finished)
            .map(|t| t.id)
            .collect()
    }

    /// Emits `RuntimeShutdown` and flushes; sinks stay attached.
    pub fn shutdown(&mut self) {
        let now = self.now_us();
        self.emit(Event::runtime_shutdown(now).into());
        self.flush();
    }
}
