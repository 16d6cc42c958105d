//! Debugger-side mirror of the task graph, built from the event stream.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use indexmap::IndexSet;
use serde::Serialize;
use taskscope_wire::{Ack, Command, DepKind, Event, EventId, Frame};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeState {
    NotQueued,
    Queued,
    Running,
    Finished,
}

impl NodeState {
    pub const ALL: [NodeState; 4] = [
        NodeState::NotQueued,
        NodeState::Queued,
        NodeState::Running,
        NodeState::Finished,
    ];

    pub fn ordinal(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeInfo {
    pub task: u64,
    pub function: u64,
    pub state: NodeState,
    pub thread: Option<u64>,
    pub created_us: u64,
    pub queued_us: Option<u64>,
    pub running_us: Option<u64>,
    pub finished_us: Option<u64>,
    /// Approximate: instrumentation perturbs the timings it reports.
    pub duration_us: Option<u64>,
    pub blocked: bool,
    pub prioritized: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Edge {
    pub pred: u64,
    pub succ: u64,
    pub handle: u64,
    /// `None` when the frame carried no known kind code.
    pub kind: Option<DepKind>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosticKind {
    UnknownTask(u64),
    DuplicateTask(u64),
    UnknownPredecessor { pred: u64, succ: u64 },
    BackwardEdge { pred: u64, succ: u64 },
    IllegalTransition {
        task: u64,
        from: NodeState,
        event: EventId,
    },
}

/// A frame the model refused to apply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    /// Position of the frame in the received stream.
    pub frame_index: u64,
    pub kind: DiagnosticKind,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "frame {}: ", self.frame_index)?;
        match &self.kind {
            DiagnosticKind::UnknownTask(t) => write!(f, "event for unknown task {t}"),
            DiagnosticKind::DuplicateTask(t) => write!(f, "task {t} created twice"),
            DiagnosticKind::UnknownPredecessor { pred, succ } => {
                write!(f, "edge {pred} -> {succ} from unknown task")
            }
            DiagnosticKind::BackwardEdge { pred, succ } => {
                write!(f, "edge {pred} -> {succ} does not point forward")
            }
            DiagnosticKind::IllegalTransition { task, from, event } => {
                write!(f, "task {task} in state {from:?} cannot take {event:?}")
            }
        }
    }
}

/// What one applied frame changed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Delta {
    pub nodes: Vec<u64>,
    pub edges: Vec<Edge>,
    pub functions: Vec<u64>,
    pub stopped_changed: bool,
}

impl Delta {
    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
            && self.edges.is_empty()
            && self.functions.is_empty()
            && !self.stopped_changed
    }

    pub fn merge(&mut self, other: Delta) {
        for n in other.nodes {
            if !self.nodes.contains(&n) {
                self.nodes.push(n);
            }
        }
        self.edges.extend(other.edges);
        for f in other.functions {
            if !self.functions.contains(&f) {
                self.functions.push(f);
            }
        }
        self.stopped_changed |= other.stopped_changed;
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GraphModel {
    nodes: BTreeMap<u64, NodeInfo>,
    edges: IndexSet<Edge>,
    function_names: BTreeMap<u64, String>,
    event_log: Vec<Event>,
    quarantine: Vec<(Event, Diagnostic)>,
    frames_seen: u64,
    stopped: bool,
    breakpoint_task: Option<u64>,
    shut_down: bool,
}

impl GraphModel {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn nodes(&self) -> impl DoubleEndedIterator<Item = &NodeInfo> + ExactSizeIterator + '_ {
        self.nodes.values()
    }

    pub fn node(&self, task: u64) -> Option<&NodeInfo> {
        self.nodes.get(&task)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Edges in arrival order.
    pub fn edges(&self) -> impl ExactSizeIterator<Item = &Edge> + '_ {
        self.edges.iter()
    }

    pub fn edge_set(&self) -> BTreeSet<Edge> {
        self.edges.iter().copied().collect()
    }

    pub fn function_name(&self, function: u64) -> Option<&str> {
        self.function_names.get(&function).map(String::as_str)
    }

    pub fn function_names(&self) -> &BTreeMap<u64, String> {
        &self.function_names
    }

    pub fn function_by_name(&self, name: &str) -> Option<u64> {
        self.function_names
            .iter()
            .find(|(_, n)| n.as_str() == name)
            .map(|(&id, _)| id)
    }

    pub fn event_log(&self) -> &[Event] {
        &self.event_log
    }

    pub fn quarantine(&self) -> &[(Event, Diagnostic)] {
        &self.quarantine
    }

    pub fn is_stopped(&self) -> bool {
        self.stopped
    }

    pub fn breakpoint_task(&self) -> Option<u64> {
        self.breakpoint_task
    }

    pub fn is_shut_down(&self) -> bool {
        self.shut_down
    }

    /// Distinct predecessors of `task`.
    pub fn predecessors(&self, task: u64) -> BTreeSet<u64> {
        self.edges
            .iter()
            .filter(|e| e.succ == task)
            .map(|e| e.pred)
            .collect()
    }

    /// Applies any frame from the runtime stream.
    pub fn apply_frame(&mut self, frame: &Frame) -> Result<Delta, Diagnostic> {
        match frame {
            Frame::Event(event) => self.apply_event(event),
            Frame::Name(name) => {
                self.frames_seen += 1;
                self.function_names.insert(name.function, name.name.clone());
                Ok(Delta {
                    functions: vec![name.function],
                    ..Delta::default()
                })
            }
            Frame::Ack(ack) => {
                self.frames_seen += 1;
                Ok(self.mirror_ack(ack))
            }
        }
    }

    /// Mirrors the scheduling flags of a successful acknowledgment.
    fn mirror_ack(&mut self, ack: &Ack) -> Delta {
        let mut delta = Delta::default();
        if !ack.status.is_ok() {
            return delta;
        }
        let Some(command) = ack.decoded_command() else {
            return delta;
        };
        let mut set_flag = |task: u64, update: &dyn Fn(&mut NodeInfo)| {
            if let Some(node) = self.nodes.get_mut(&task) {
                update(node);
                delta.nodes.push(task);
            }
        };
        match command {
            Command::Block(t) => set_flag(t, &|n| n.blocked = true),
            Command::Unblock(t) => set_flag(t, &|n| n.blocked = false),
            Command::Prioritize(t) => set_flag(t, &|n| n.prioritized = true),
            Command::Deprioritize(t) => set_flag(t, &|n| n.prioritized = false),
            Command::Stop => {
                delta.stopped_changed = !self.stopped;
                self.stopped = true;
            }
            Command::Continue => {
                delta.stopped_changed = self.stopped;
                self.stopped = false;
                self.breakpoint_task = None;
            }
            Command::Step | Command::BreakOnFunction(_) | Command::Detach => {}
        }
        delta
    }

    /// Applies one event. Events that would corrupt the model are
    /// quarantined and reported; the model is then left unchanged.
    pub fn apply_event(&mut self, event: &Event) -> Result<Delta, Diagnostic> {
        let index = self.frames_seen;
        self.frames_seen += 1;
        match self.try_apply(event) {
            Ok(delta) => {
                self.event_log.push(*event);
                Ok(delta)
            }
            Err(kind) => {
                let diag = Diagnostic {
                    frame_index: index,
                    kind,
                };
                self.quarantine.push((*event, diag.clone()));
                Err(diag)
            }
        }
    }

    fn try_apply(&mut self, ev: &Event) -> Result<Delta, DiagnosticKind> {
        let mut delta = Delta::default();
        match ev.id {
            EventId::RuntimeInit => {}
            EventId::RuntimeShutdown => self.shut_down = true,
            EventId::TaskCreated => {
                if self.nodes.contains_key(&ev.task) {
                    return Err(DiagnosticKind::DuplicateTask(ev.task));
                }
                self.nodes.insert(
                    ev.task,
                    NodeInfo {
                        task: ev.task,
                        function: ev.function,
                        state: NodeState::NotQueued,
                        thread: None,
                        created_us: ev.timestamp_us,
                        queued_us: None,
                        running_us: None,
                        finished_us: None,
                        duration_us: None,
                        blocked: false,
                        prioritized: false,
                    },
                );
                delta.nodes.push(ev.task);
            }
            EventId::DependencyAdded => {
                let (pred, succ) = (ev.dep_task, ev.task);
                let succ_state = self
                    .nodes
                    .get(&succ)
                    .ok_or(DiagnosticKind::UnknownTask(succ))?
                    .state;
                if !self.nodes.contains_key(&pred) {
                    return Err(DiagnosticKind::UnknownPredecessor { pred, succ });
                }
                if pred >= succ {
                    return Err(DiagnosticKind::BackwardEdge { pred, succ });
                }
                if succ_state != NodeState::NotQueued {
                    return Err(DiagnosticKind::IllegalTransition {
                        task: succ,
                        from: succ_state,
                        event: ev.id,
                    });
                }
                let edge = Edge {
                    pred,
                    succ,
                    handle: ev.handle,
                    kind: ev.dep_kind(),
                };
                if self.edges.insert(edge) {
                    delta.edges.push(edge);
                }
            }
            EventId::TaskQueued | EventId::TaskRunning | EventId::TaskFinished => {
                let node = self
                    .nodes
                    .get_mut(&ev.task)
                    .ok_or(DiagnosticKind::UnknownTask(ev.task))?;
                let (from, to) = match ev.id {
                    EventId::TaskQueued => (NodeState::NotQueued, NodeState::Queued),
                    EventId::TaskRunning => (NodeState::Queued, NodeState::Running),
                    _ => (NodeState::Running, NodeState::Finished),
                };
                if node.state != from {
                    return Err(DiagnosticKind::IllegalTransition {
                        task: ev.task,
                        from: node.state,
                        event: ev.id,
                    });
                }
                node.state = to;
                match to {
                    NodeState::Queued => node.queued_us = Some(ev.timestamp_us),
                    NodeState::Running => {
                        node.running_us = Some(ev.timestamp_us);
                        node.thread = Some(ev.thread);
                    }
                    _ => {
                        node.finished_us = Some(ev.timestamp_us);
                        node.duration_us = node
                            .running_us
                            .map(|start| ev.timestamp_us.saturating_sub(start));
                    }
                }
                delta.nodes.push(ev.task);
            }
            EventId::BreakpointHit => {
                if !self.nodes.contains_key(&ev.task) {
                    return Err(DiagnosticKind::UnknownTask(ev.task));
                }
                delta.stopped_changed = !self.stopped;
                self.stopped = true;
                self.breakpoint_task = Some(ev.task);
            }
        }
        Ok(delta)
    }
}

#[cfg(test)]
mod tests {
    use taskscope_wire::{AckStatus, NameFrame};

    use super::*;

    #[test]
    fn created_node_starts_not_queued() {
        let mut m = GraphModel::new();
        let delta = m.apply_event(&Event::task_created(5, 2, 10)).unwrap();
        assert_eq!(delta.nodes, vec![5]);
        assert_eq!(m.node_count(), 1);
        assert_eq!(m.node(5).unwrap().state, NodeState::NotQueued);
        assert_eq!(m.node(5).unwrap().function, 2);
    }

    #[test]
    fn unknown_task_is_quarantined() {
        let mut m = GraphModel::new();
        let before = m.clone();
        let err = m.apply_event(&Event::task_running(9, 1, 5)).unwrap_err();
        assert_eq!(err.kind, DiagnosticKind::UnknownTask(9));
        assert_eq!(m.node_count(), 0);
        assert!(m.event_log().is_empty());
        assert_eq!(m.quarantine().len(), 1);
        assert_eq!(m.nodes().count(), before.nodes().count());
    }

    #[test]
    fn lifecycle_computes_duration() {
        let mut m = GraphModel::new();
        m.apply_event(&Event::task_created(1, 1, 0)).unwrap();
        m.apply_event(&Event::task_queued(1, 1)).unwrap();
        m.apply_event(&Event::task_running(1, 2, 10)).unwrap();
        assert_eq!(m.node(1).unwrap().duration_us, None);
        m.apply_event(&Event::task_finished(1, 260)).unwrap();
        let n = m.node(1).unwrap();
        assert_eq!((n.state, n.thread, n.duration_us), (NodeState::Finished, Some(2), Some(250)));
    }

    #[test]
    fn illegal_transition_leaves_model_unchanged() {
        let mut m = GraphModel::new();
        m.apply_event(&Event::task_created(1, 1, 0)).unwrap();
        let snapshot = m.node(1).cloned();
        let err = m.apply_event(&Event::task_running(1, 1, 3)).unwrap_err();
        assert!(matches!(err.kind, DiagnosticKind::IllegalTransition { task: 1, .. }));
        assert_eq!(m.node(1).cloned(), snapshot);
        assert_eq!(err.frame_index, 1);
    }

    #[test]
    fn edges_require_known_forward_endpoints() {
        let mut m = GraphModel::new();
        m.apply_event(&Event::task_created(1, 1, 0)).unwrap();
        assert!(m
            .apply_event(&Event::dependency_added(1, 2, 7, DepKind::Raw, 0))
            .is_err());
        m.apply_event(&Event::task_created(2, 1, 0)).unwrap();
        assert!(m
            .apply_event(&Event::dependency_added(3, 2, 7, DepKind::Raw, 0))
            .is_err());
        let d = m
            .apply_event(&Event::dependency_added(1, 2, 7, DepKind::Raw, 0))
            .unwrap();
        assert_eq!(d.edges.len(), 1);
        assert_eq!(m.predecessors(2), [1].into());
    }

    #[test]
    fn ok_acks_mirror_flags() {
        let mut m = GraphModel::new();
        m.apply_event(&Event::task_created(1, 1, 0)).unwrap();
        m.apply_frame(&Frame::Ack(Ack::new(Command::Block(1), AckStatus::Ok)))
            .unwrap();
        assert!(m.node(1).unwrap().blocked);
        m.apply_frame(&Frame::Ack(Ack::new(
            Command::Prioritize(1),
            AckStatus::Ineffective("queued".into()),
        )))
        .unwrap();
        assert!(!m.node(1).unwrap().prioritized);
        m.apply_frame(&Frame::Ack(Ack::new(Command::Stop, AckStatus::Ok)))
            .unwrap();
        assert!(m.is_stopped());
    }

    #[test]
    fn names_and_breakpoints() {
        let mut m = GraphModel::new();
        m.apply_frame(&Frame::Name(NameFrame {
            function: 3,
            name: "reduce".into(),
        }))
        .unwrap();
        assert_eq!(m.function_by_name("reduce"), Some(3));
        m.apply_event(&Event::task_created(1, 3, 0)).unwrap();
        let d = m.apply_event(&Event::breakpoint_hit(1, 3, 1, 4)).unwrap();
        assert!(d.stopped_changed && m.is_stopped());
        assert_eq!(m.breakpoint_task(), Some(1));
    }
}
