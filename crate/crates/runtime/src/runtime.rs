use std::collections::HashMap;
use std::io::BufWriter;
use std::net::{Shutdown, TcpStream};
use std::panic::{self, AssertUnwindSafe};
use std::path::Path;
use std::sync::{Arc, Condvar, Mutex, MutexGuard};
use std::thread::{self, JoinHandle};
use std::time::{Duration, Instant};

use log::{debug, error, info, warn};
use taskscope_wire::{raw_command_arg, raw_command_id, read_command, AckStatus, Command};

use crate::config::{RuntimeConfig, DEFAULT_STALL_INTERVAL};
use crate::link::{self, LinkError};
use crate::scheduler::{Scheduler, SinkRole, SubmitError};
use crate::sink::{FrameSink, WriterSink};
use crate::types::{Access, FunctionId, TaskId, TaskRecord, WorkerId};

type Body = Box<dyn FnOnce() + Send + 'static>;

struct State {
    sched: Scheduler,
    bodies: HashMap<TaskId, Body>,
    shutdown: bool,
}

struct Shared {
    state: Mutex<State>,
    changed: Condvar,
}

impl Shared {
    fn lock(&self) -> MutexGuard<'_, State> {
        self.state.lock().unwrap_or_else(|poisoned| poisoned.into_inner())
    }

    fn apply_command(&self, command: Command) -> AckStatus {
        let status = self.lock().sched.apply_command(command);
        debug!("command {command}: {status}");
        self.changed.notify_all();
        status
    }
}

/// Outcome of [`Runtime::wait_all`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum WaitOutcome {
    Completed,
    /// No task ran, changed state or received a command for the stall
    /// interval; these tasks are still unfinished (blocked, stopped, or
    /// waiting on those).
    Stalled { unfinished: Vec<TaskId> },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WaitSummary {
    pub created: usize,
    pub finished: usize,
    /// Time since runtime init.
    pub wall: Duration,
    pub outcome: WaitOutcome,
}

impl WaitSummary {
    pub fn is_stalled(&self) -> bool {
        matches!(self.outcome, WaitOutcome::Stalled { .. })
    }
}

/// Cloneable handle for applying debugger commands from any thread.
#[derive(Clone)]
pub struct Controller {
    shared: Arc<Shared>,
}

impl Controller {
    pub fn apply_command(&self, command: Command) -> AckStatus {
        self.shared.apply_command(command)
    }
}

pub struct RuntimeBuilder {
    workers: usize,
    stall_interval: Duration,
    sinks: Vec<(SinkRole, Box<dyn FrameSink>)>,
    debugger: Option<TcpStream>,
}

impl Default for RuntimeBuilder {
    fn default() -> Self {
        RuntimeBuilder {
            workers: thread::available_parallelism().map_or(1, |n| n.get()),
            stall_interval: DEFAULT_STALL_INTERVAL,
            sinks: Vec::new(),
            debugger: None,
        }
    }
}

impl RuntimeBuilder {
    /// Applies a parsed environment configuration; connects to the
    /// debugger when one is configured.
    pub fn config(mut self, config: &RuntimeConfig) -> Result<Self, LinkError> {
        if let Some(n) = config.workers {
            self = self.workers(n);
        }
        if let Some(d) = config.stall_interval {
            self = self.stall_interval(d);
        }
        if let Some(addr) = &config.connect {
            self = self.connect(addr)?;
        } else if let Some(addr) = &config.listen {
            self = self.listen(addr)?;
        }
        Ok(self)
    }

    pub fn workers(mut self, n: usize) -> Self {
        self.workers = n.max(1);
        self
    }

    pub fn stall_interval(mut self, interval: Duration) -> Self {
        self.stall_interval = interval;
        self
    }

    pub fn sink(mut self, sink: impl FrameSink + 'static) -> Self {
        self.sinks.push((SinkRole::Recorder, Box::new(sink)));
        self
    }

    /// Records the raw frame stream to a `.ayu` trace file.
    pub fn record_to(self, path: impl AsRef<Path>) -> std::io::Result<Self> {
        Ok(self.sink(WriterSink::create(path)?))
    }

    /// Connects out to a debugger waiting at `addr`.
    pub fn connect(mut self, addr: &str) -> Result<Self, LinkError> {
        self.debugger = Some(link::connect(addr)?);
        Ok(self)
    }

    /// Waits for a debugger to connect to `addr`.
    pub fn listen(mut self, addr: &str) -> Result<Self, LinkError> {
        self.debugger = Some(link::accept(addr)?);
        Ok(self)
    }

    /// Uses an already-handshaken debugger connection.
    pub fn debugger_stream(mut self, stream: TcpStream) -> Self {
        self.debugger = Some(stream);
        self
    }

    pub fn build(self) -> Runtime {
        Runtime::start(self)
    }
}

/// A dataflow task runtime with a pool of worker threads.
///
/// The thread that owns the `Runtime` is the master: it registers
/// functions, submits tasks and waits for them. Workers run task bodies
/// once every predecessor has finished.
pub struct Runtime {
    shared: Arc<Shared>,
    workers: Vec<JoinHandle<()>>,
    listener: Option<(TcpStream, JoinHandle<()>)>,
    stall_interval: Duration,
    started: Instant,
}

impl Runtime {
    pub fn builder() -> RuntimeBuilder {
        RuntimeBuilder::default()
    }

    /// Runtime configured from the `TASKSCOPE_*` environment variables.
    pub fn from_env() -> Result<Runtime, LinkError> {
        let config = RuntimeConfig::from_env().map_err(LinkError::Config)?;
        Ok(Runtime::builder().config(&config)?.build())
    }

    fn start(builder: RuntimeBuilder) -> Runtime {
        let RuntimeBuilder {
            workers,
            stall_interval,
            mut sinks,
            debugger,
        } = builder;

        let mut command_stream = None;
        if let Some(stream) = debugger {
            match stream.try_clone() {
                Ok(writer) => {
                    sinks.push((
                        SinkRole::Debugger,
                        Box::new(WriterSink::new(BufWriter::new(writer))),
                    ));
                    command_stream = Some(stream);
                }
                Err(err) => warn!("debugger connection unusable, running without it: {err}"),
            }
        }

        let shared = Arc::new(Shared {
            state: Mutex::new(State {
                sched: Scheduler::new(workers, sinks),
                bodies: HashMap::new(),
                shutdown: false,
            }),
            changed: Condvar::new(),
        });

        let handles = (1..=workers as u64)
            .map(|ordinal| {
                let shared = Arc::clone(&shared);
                thread::Builder::new()
                    .name(format!("taskscope-worker-{ordinal}"))
                    .spawn(move || worker_loop(&shared, WorkerId(ordinal)))
                    .expect("spawn worker thread")
            })
            .collect();

        let listener = command_stream.and_then(|stream| {
            let shutdown_handle = stream.try_clone().ok()?;
            let shared = Arc::clone(&shared);
            let handle = thread::Builder::new()
                .name("taskscope-commands".into())
                .spawn(move || command_loop(&shared, stream))
                .expect("spawn command listener");
            Some((shutdown_handle, handle))
        });

        info!("runtime started with {workers} workers");
        Runtime {
            shared,
            workers: handles,
            listener,
            stall_interval,
            started: Instant::now(),
        }
    }

    pub fn controller(&self) -> Controller {
        Controller {
            shared: Arc::clone(&self.shared),
        }
    }

    pub fn worker_count(&self) -> usize {
        self.workers.len()
    }

    pub fn register_function(&self, name: &str) -> Result<FunctionId, SubmitError> {
        self.shared.lock().sched.register_function(name)
    }

    pub fn submit<F>(&self, function: FunctionId, accesses: Vec<Access>, body: F) -> Result<TaskId, SubmitError>
    where
        F: FnOnce() + Send + 'static,
    {
        self.submit_task(function, accesses, false, body)
    }

    /// Creates a task. It runs once every earlier task it depends on
    /// through `accesses` has finished; `high_priority` tasks are taken
    /// from the priority queue first.
    pub fn submit_task<F>(
        &self,
        function: FunctionId,
        accesses: Vec<Access>,
        high_priority: bool,
        body: F,
    ) -> Result<TaskId, SubmitError>
    where
        F: FnOnce() + Send + 'static,
    {
        let mut state = self.shared.lock();
        let (id, _) = state.sched.submit_task(function, accesses, high_priority)?;
        state.bodies.insert(id, Box::new(body));
        drop(state);
        self.shared.changed.notify_all();
        Ok(id)
    }

    pub fn apply_command(&self, command: Command) -> AckStatus {
        self.shared.apply_command(command)
    }

    /// Snapshot of a task record.
    pub fn task(&self, id: TaskId) -> Option<TaskRecord> {
        self.shared.lock().sched.task(id).cloned()
    }

    pub fn is_stopped(&self) -> bool {
        self.shared.lock().sched.is_stopped()
    }

    pub fn stall_interval(&self) -> Duration {
        self.stall_interval
    }

    /// Blocks until every created task has finished, or until no task has
    /// run or changed state and no command has arrived for the stall
    /// interval.
    pub fn wait_all(&self) -> WaitSummary {
        self.wait_all_with(self.stall_interval)
    }

    pub fn wait_all_with(&self, stall_interval: Duration) -> WaitSummary {
        let mut state = self.shared.lock();
        loop {
            let sched = &state.sched;
            if sched.all_finished() {
                return self.summary(sched, WaitOutcome::Completed);
            }
            let idle_for = sched.last_transition().elapsed();
            if sched.running() == 0 && idle_for >= stall_interval {
                let unfinished = sched.unfinished();
                return self.summary(sched, WaitOutcome::Stalled { unfinished });
            }
            let timeout = stall_interval
                .saturating_sub(idle_for)
                .clamp(Duration::from_millis(1), Duration::from_millis(100));
            state = self
                .shared
                .changed
                .wait_timeout(state, timeout)
                .unwrap_or_else(|p| p.into_inner())
                .0;
        }
    }

    fn summary(&self, sched: &Scheduler, outcome: WaitOutcome) -> WaitSummary {
        WaitSummary {
            created: sched.created(),
            finished: sched.finished(),
            wall: self.started.elapsed(),
            outcome,
        }
    }
}

impl Drop for Runtime {
    fn drop(&mut self) {
        self.shared.lock().shutdown = true;
        self.shared.changed.notify_all();
        for handle in self.workers.drain(..) {
            let _ = handle.join();
        }
        self.shared.lock().sched.shutdown();
        if let Some((stream, handle)) = self.listener.take() {
            let _ = stream.shutdown(Shutdown::Both);
            let _ = handle.join();
        }
    }
}

fn worker_loop(shared: &Shared, worker: WorkerId) {
    let mut state = shared.lock();
    loop {
        if state.shutdown {
            return;
        }
        let Some(dispatch) = state.sched.worker_dequeue(worker) else {
            state = shared.changed.wait(state).unwrap_or_else(|p| p.into_inner());
            continue;
        };
        if dispatch.breakpoint {
            info!("breakpoint hit by task {}", dispatch.task);
        }
        let body = state.bodies.remove(&dispatch.task);
        drop(state);

        if let Some(body) = body {
            if panic::catch_unwind(AssertUnwindSafe(body)).is_err() {
                error!("task {} panicked", dispatch.task);
            }
        }

        state = shared.lock();
        let completed = state.sched.complete_task(dispatch.task);
        debug_assert!(completed.is_ok(), "{completed:?}");
        shared.changed.notify_all();
    }
}

fn command_loop(shared: &Shared, mut stream: TcpStream) {
    loop {
        let frame = match read_command(&mut stream) {
            Ok(Some(frame)) => frame,
            Ok(None) => {
                info!("debugger closed the command channel");
                return;
            }
            Err(err) => {
                debug!("command channel closed: {err}");
                return;
            }
        };
        match Command::decode(&frame) {
            Ok(command) => {
                shared.apply_command(command);
                if command == Command::Detach {
                    info!("debugger detached");
                    return;
                }
            }
            Err(err) => {
                warn!("rejecting command frame: {err}");
                shared
                    .lock()
                    .sched
                    .reject_command(raw_command_id(&frame), raw_command_arg(&frame), err.to_string());
            }
        }
    }
}
