use std::fmt;

pub use taskscope_wire::DepKind;

macro_rules! id_newtype {
    ($(#[$meta:meta])* $name:ident, $prefix:literal) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
        pub struct $name(pub u64);

        impl $name {
            pub fn get(self) -> u64 {
                self.0
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, concat!($prefix, "{}"), self.0)
            }
        }
    };
}

id_newtype!(
    /// Task ordinal in creation order, starting at 1.
    TaskId,
    "t"
);
id_newtype!(
    /// Registered task function, starting at 1.
    FunctionId,
    "f"
);
id_newtype!(
    /// Opaque identifier of a memory region or value slot. Never 0.
    Handle,
    "h"
);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum AccessMode {
    Input,
    Inout,
    Output,
}

impl AccessMode {
    pub fn reads(self) -> bool {
        matches!(self, AccessMode::Input | AccessMode::Inout)
    }

    pub fn writes(self) -> bool {
        matches!(self, AccessMode::Output | AccessMode::Inout)
    }
}

/// A declared data access of a task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Access {
    pub handle: Handle,
    pub mode: AccessMode,
}

impl Access {
    pub fn input(handle: u64) -> Self {
        Access {
            handle: Handle(handle),
            mode: AccessMode::Input,
        }
    }

    pub fn inout(handle: u64) -> Self {
        Access {
            handle: Handle(handle),
            mode: AccessMode::Inout,
        }
    }

    pub fn output(handle: u64) -> Self {
        Access {
            handle: Handle(handle),
            mode: AccessMode::Output,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TaskState {
    NotQueued,
    Queued,
    Running,
    Finished,
}

impl TaskState {
    pub fn label(self) -> &'static str {
        match self {
            TaskState::NotQueued => "not queued",
            TaskState::Queued => "queued",
            TaskState::Running => "running",
            TaskState::Finished => "finished",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DependencyEdge {
    pub pred: TaskId,
    pub succ: TaskId,
    pub handle: Handle,
    pub kind: DepKind,
}

/// Worker thread ordinal, starting at 1 so that 0 can mean "no thread" on
/// the wire.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct WorkerId(pub u64);

/// Times in microseconds since runtime init.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Timestamps {
    pub created: Option<u64>,
    pub queued: Option<u64>,
    pub running: Option<u64>,
    pub finished: Option<u64>,
}

#[derive(Debug, Clone)]
pub struct TaskRecord {
    pub id: TaskId,
    pub function: FunctionId,
    pub accesses: Vec<Access>,
    pub state: TaskState,
    pub thread: Option<WorkerId>,
    pub pending: usize,
    pub high_priority: bool,
    pub blocked: bool,
    pub times: Timestamps,
    /// Distinct successors in creation order.
    pub successors: Vec<TaskId>,
}
