//! Offline checkers over a recorded frame stream.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use taskscope_wire::{EventId, Frame};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// Task `task` started before predecessor `pred` finished.
    RanEarly { task: u64, pred: u64, frame: usize },
    /// An edge that does not point from an earlier to a later task.
    BackwardEdge { pred: u64, succ: u64, frame: usize },
    /// Task `task` took `event` out of order.
    OutOfOrder { task: u64, event: EventId, frame: usize },
    /// Task `task` never reached FINISHED.
    Incomplete { task: u64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::RanEarly { task, pred, frame } => {
                write!(f, "frame {frame}: task {task} ran before predecessor {pred} finished")
            }
            Violation::BackwardEdge { pred, succ, frame } => {
                write!(f, "frame {frame}: edge {pred} -> {succ} points backwards")
            }
            Violation::OutOfOrder { task, event, frame } => {
                write!(f, "frame {frame}: task {task} got {event:?} out of order")
            }
            Violation::Incomplete { task } => write!(f, "task {task} never finished"),
        }
    }
}

fn events(frames: &[Frame]) -> impl Iterator<Item = (usize, &taskscope_wire::Event)> {
    frames.iter().enumerate().filter_map(|(i, f)| match f {
        Frame::Event(e) => Some((i, e)),
        _ => None,
    })
}

/// Every TASK_RUNNING must follow TASK_FINISHED of all the task's
/// predecessors, and every edge must point forward.
pub fn schedule_violations(frames: &[Frame]) -> Vec<Violation> {
    let mut preds: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    let mut finished = BTreeSet::new();
    let mut violations = Vec::new();
    for (frame, e) in events(frames) {
        match e.id {
            EventId::DependencyAdded => {
                if e.dep_task >= e.task {
                    violations.push(Violation::BackwardEdge {
                        pred: e.dep_task,
                        succ: e.task,
                        frame,
                    });
                }
                preds.entry(e.task).or_default().insert(e.dep_task);
            }
            EventId::TaskRunning => {
                for &pred in preds.get(&e.task).into_iter().flatten() {
                    if !finished.contains(&pred) {
                        violations.push(Violation::RanEarly {
                            task: e.task,
                            pred,
                            frame,
                        });
                    }
                }
            }
            EventId::TaskFinished => {
                finished.insert(e.task);
            }
            _ => {}
        }
    }
    violations
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Phase {
    Created,
    Queued,
    Running,
    Finished,
}

/// Each task's events must read TASK_CREATED, any number of
/// DEPENDENCY_ADDED, then TASK_QUEUED, TASK_RUNNING, TASK_FINISHED. With
/// `require_finished`, a task stopping short of FINISHED is a violation.
pub fn state_machine_violations(frames: &[Frame], require_finished: bool) -> Vec<Violation> {
    let mut phase: BTreeMap<u64, Phase> = BTreeMap::new();
    let mut violations = Vec::new();
    for (frame, e) in events(frames) {
        let expected_from = match e.id {
            EventId::TaskCreated => None,
            EventId::DependencyAdded | EventId::TaskQueued => Some(Phase::Created),
            EventId::TaskRunning => Some(Phase::Queued),
            EventId::TaskFinished => Some(Phase::Running),
            _ => continue,
        };
        let current = phase.get(&e.task).copied();
        let ok = match expected_from {
            None => current.is_none(),
            Some(p) => current == Some(p),
        };
        if !ok {
            violations.push(Violation::OutOfOrder {
                task: e.task,
                event: e.id,
                frame,
            });
            continue;
        }
        let next = match e.id {
            EventId::TaskCreated | EventId::DependencyAdded => Phase::Created,
            EventId::TaskQueued => Phase::Queued,
            EventId::TaskRunning => Phase::Running,
            _ => Phase::Finished,
        };
        phase.insert(e.task, next);
    }
    if require_finished {
        violations.extend(
            phase
                .into_iter()
                .filter(|&(_, p)| p != Phase::Finished)
                .map(|(task, _)| Violation::Incomplete { task }),
        );
    }
    violations
}

/// Largest number of tasks simultaneously between TASK_RUNNING and
/// TASK_FINISHED in stream order.
pub fn max_concurrency(frames: &[Frame]) -> usize {
    let mut running = 0usize;
    let mut max = 0;
    for (_, e) in events(frames) {
        match e.id {
            EventId::TaskRunning => {
                running += 1;
                max = max.max(running);
            }
            EventId::TaskFinished => running = running.saturating_sub(1),
            _ => {}
        }
    }
    max
}

/// DEPENDENCY_ADDED frames as (pred, succ, handle, kind code) tuples.
pub fn dependency_set(frames: &[Frame]) -> BTreeSet<(u64, u64, u64, u64)> {
    events(frames)
        .filter(|(_, e)| e.id == EventId::DependencyAdded)
        .map(|(_, e)| (e.dep_task, e.task, e.handle, e.function))
        .collect()
}

#[cfg(test)]
mod tests {
    use taskscope_wire::{DepKind, Event};

    use super::*;

    fn frames(events: &[Event]) -> Vec<Frame> {
        events.iter().copied().map(Frame::from).collect()
    }

    fn good() -> Vec<Frame> {
        frames(&[
            Event::task_created(1, 1, 0),
            Event::task_queued(1, 0),
            Event::task_created(2, 1, 0),
            Event::dependency_added(1, 2, 5, DepKind::Raw, 0),
            Event::task_running(1, 1, 1),
            Event::task_finished(1, 2),
            Event::task_queued(2, 2),
            Event::task_running(2, 1, 3),
            Event::task_finished(2, 4),
        ])
    }

    #[test]
    fn good_trace_passes() {
        let f = good();
        assert!(schedule_violations(&f).is_empty());
        assert!(state_machine_violations(&f, true).is_empty());
        assert_eq!(max_concurrency(&f), 1);
        assert_eq!(dependency_set(&f).len(), 1);
    }

    #[test]
    fn early_start_is_caught() {
        let f = frames(&[
            Event::task_created(1, 1, 0),
            Event::task_queued(1, 0),
            Event::task_created(2, 1, 0),
            Event::dependency_added(1, 2, 5, DepKind::Raw, 0),
            Event::task_queued(2, 0),
            Event::task_running(2, 1, 1),
        ]);
        assert_eq!(
            schedule_violations(&f),
            vec![Violation::RanEarly {
                task: 2,
                pred: 1,
                frame: 5
            }]
        );
    }

    #[test]
    fn skipped_queue_and_incomplete_are_caught() {
        let f = frames(&[
            Event::task_created(1, 1, 0),
            Event::task_running(1, 1, 1),
            Event::task_created(2, 1, 0),
        ]);
        let v = state_machine_violations(&f, true);
        assert!(matches!(v[0], Violation::OutOfOrder { task: 1, event: EventId::TaskRunning, .. }));
        assert!(v.contains(&Violation::Incomplete { task: 2 }));
        assert_eq!(state_machine_violations(&f, false).len(), 1);
    }

    #[test]
    fn dependency_after_queueing_is_out_of_order() {
        let f = frames(&[
            Event::task_created(1, 1, 0),
            Event::task_created(2, 1, 0),
            Event::task_queued(2, 0),
            Event::dependency_added(1, 2, 5, DepKind::Raw, 0),
        ]);
        assert_eq!(state_machine_violations(&f, false).len(), 1);
    }
}
