use crate::{read_u64, WireError};

/// Size of an encoded [`Event`].
pub const EVENT_FRAME_LEN: usize = 64;

/// Instrumentation event kinds, runtime to debugger.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u64)]
pub enum EventId {
    RuntimeInit = 0,
    TaskCreated = 1,
    DependencyAdded = 2,
    TaskQueued = 3,
    TaskRunning = 4,
    TaskFinished = 5,
    RuntimeShutdown = 6,
    BreakpointHit = 7,
}

impl EventId {
    pub const ALL: [EventId; 8] = [
        EventId::RuntimeInit,
        EventId::TaskCreated,
        EventId::DependencyAdded,
        EventId::TaskQueued,
        EventId::TaskRunning,
        EventId::TaskFinished,
        EventId::RuntimeShutdown,
        EventId::BreakpointHit,
    ];

    pub fn from_u64(raw: u64) -> Result<Self, WireError> {
        usize::try_from(raw)
            .ok()
            .and_then(|i| Self::ALL.get(i).copied())
            .ok_or(WireError::UnknownEvent(raw))
    }

    pub fn as_u64(self) -> u64 {
        self as u64
    }
}

/// Kind of a dependency edge, carried in the function slot of a
/// `DependencyAdded` frame.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u64)]
pub enum DepKind {
    /// Read after write.
    Raw = 1,
    /// Write after read.
    War = 2,
    /// Write after write.
    Waw = 3,
}

impl DepKind {
    pub fn from_u64(raw: u64) -> Option<Self> {
        match raw {
            1 => Some(DepKind::Raw),
            2 => Some(DepKind::War),
            3 => Some(DepKind::Waw),
            _ => None,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            DepKind::Raw => "RAW",
            DepKind::War => "WAR",
            DepKind::Waw => "WAW",
        }
    }
}

/// One instrumentation event. Slots that carry no meaning for `id` are 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Event {
    pub id: EventId,
    pub task: u64,
    /// Predecessor task of a `DependencyAdded` event.
    pub dep_task: u64,
    /// Data handle of a `DependencyAdded` event.
    pub handle: u64,
    /// Function id (`TaskCreated`, `BreakpointHit`) or edge kind code
    /// (`DependencyAdded`).
    pub function: u64,
    pub thread: u64,
    pub timestamp_us: u64,
}

impl Event {
    pub fn new(id: EventId, task: u64, timestamp_us: u64) -> Self {
        Event {
            id,
            task,
            dep_task: 0,
            handle: 0,
            function: 0,
            thread: 0,
            timestamp_us,
        }
    }

    pub fn runtime_init(timestamp_us: u64) -> Self {
        Event::new(EventId::RuntimeInit, 0, timestamp_us)
    }

    pub fn runtime_shutdown(timestamp_us: u64) -> Self {
        Event::new(EventId::RuntimeShutdown, 0, timestamp_us)
    }

    pub fn task_created(task: u64, function: u64, timestamp_us: u64) -> Self {
        Event {
            function,
            ..Event::new(EventId::TaskCreated, task, timestamp_us)
        }
    }

    pub fn dependency_added(
        pred: u64,
        succ: u64,
        handle: u64,
        kind: DepKind,
        timestamp_us: u64,
    ) -> Self {
        Event {
            dep_task: pred,
            handle,
            function: kind as u64,
            ..Event::new(EventId::DependencyAdded, succ, timestamp_us)
        }
    }

    pub fn task_queued(task: u64, timestamp_us: u64) -> Self {
        Event::new(EventId::TaskQueued, task, timestamp_us)
    }

    pub fn task_running(task: u64, thread: u64, timestamp_us: u64) -> Self {
        Event {
            thread,
            ..Event::new(EventId::TaskRunning, task, timestamp_us)
        }
    }

    pub fn task_finished(task: u64, timestamp_us: u64) -> Self {
        Event::new(EventId::TaskFinished, task, timestamp_us)
    }

    pub fn breakpoint_hit(task: u64, function: u64, thread: u64, timestamp_us: u64) -> Self {
        Event {
            function,
            thread,
            ..Event::new(EventId::BreakpointHit, task, timestamp_us)
        }
    }

    /// Edge kind of a `DependencyAdded` event, if the slot holds a known code.
    pub fn dep_kind(&self) -> Option<DepKind> {
        (self.id == EventId::DependencyAdded)
            .then(|| DepKind::from_u64(self.function))
            .flatten()
    }

    pub fn encode(&self) -> [u8; EVENT_FRAME_LEN] {
        let words = [
            self.id.as_u64(),
            self.task,
            self.dep_task,
            self.handle,
            self.function,
            self.thread,
            self.timestamp_us,
            0,
        ];
        let mut out = [0u8; EVENT_FRAME_LEN];
        for (chunk, word) in out.chunks_exact_mut(8).zip(words) {
            chunk.copy_from_slice(&word.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, WireError> {
        if bytes.len() != EVENT_FRAME_LEN {
            return Err(WireError::Framing {
                expected: EVENT_FRAME_LEN,
                actual: bytes.len(),
            });
        }
        let id = EventId::from_u64(read_u64(bytes, 0))?;
        let reserved = read_u64(bytes, 7);
        if reserved != 0 {
            return Err(WireError::Reserved {
                slot: 7,
                value: reserved,
            });
        }
        Ok(Event {
            id,
            task: read_u64(bytes, 1),
            dep_task: read_u64(bytes, 2),
            handle: read_u64(bytes, 3),
            function: read_u64(bytes, 4),
            thread: read_u64(bytes, 5),
            timestamp_us: read_u64(bytes, 6),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn words(bytes: &[u8]) -> Vec<u64> {
        (0..bytes.len() / 8).map(|i| read_u64(bytes, i)).collect()
    }

    #[test]
    fn task_created_layout() {
        let ev = Event::task_created(3, 2, 1000);
        let bytes = ev.encode();
        assert_eq!(words(&bytes), vec![1, 3, 0, 0, 2, 0, 1000, 0]);
        assert_eq!(Event::decode(&bytes).unwrap(), ev);
    }

    #[test]
    fn all_zero_is_runtime_init() {
        let ev = Event::decode(&[0u8; 64]).unwrap();
        assert_eq!(ev, Event::runtime_init(0));
    }

    #[test]
    fn unknown_event_id_is_reported() {
        let mut bytes = Event::runtime_init(0).encode();
        bytes[0] = 8;
        match Event::decode(&bytes) {
            Err(WireError::UnknownEvent(8)) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn wrong_length_is_framing_error() {
        assert!(matches!(
            Event::decode(&[0u8; 63]),
            Err(WireError::Framing {
                expected: 64,
                actual: 63
            })
        ));
    }

    #[test]
    fn nonzero_reserved_rejected() {
        let mut bytes = Event::runtime_init(0).encode();
        bytes[56] = 1;
        assert!(matches!(
            Event::decode(&bytes),
            Err(WireError::Reserved { slot: 7, value: 1 })
        ));
    }

    #[test]
    fn dependency_kind_slot() {
        let ev = Event::dependency_added(1, 4, 0xbeef, DepKind::War, 7);
        assert_eq!(words(&ev.encode()), vec![2, 4, 1, 0xbeef, 2, 0, 7, 0]);
        assert_eq!(ev.dep_kind(), Some(DepKind::War));
        assert_eq!(Event::task_queued(1, 0).dep_kind(), None);
    }
}
