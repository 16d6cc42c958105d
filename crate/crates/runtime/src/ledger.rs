//! Dependency inference from declared accesses.
//!
//! For every handle the ledger remembers the last task that wrote it and
//! the tasks that read it since. A new task then depends on:
//!
//! * the last writer, for each handle it reads (RAW);
//! * the last writer, for each handle it writes (WAW);
//! * every reader since that write, for each handle it writes (WAR).
//!
//! No renaming is performed, so anti and output dependencies serialize the
//! tasks just like true ones.

use std::collections::{BTreeSet, HashMap};

use crate::types::{Access, DepKind, DependencyEdge, Handle, TaskId};

#[derive(Debug, Default, Clone)]
struct HandleEntry {
    last_writer: Option<TaskId>,
    readers_since_write: BTreeSet<TaskId>,
}

#[derive(Debug, Default, Clone)]
pub struct HandleLedger {
    entries: HashMap<Handle, HandleEntry>,
}

impl HandleLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn last_writer(&self, handle: Handle) -> Option<TaskId> {
        self.entries.get(&handle).and_then(|e| e.last_writer)
    }

    pub fn readers_since_write(&self, handle: Handle) -> impl Iterator<Item = TaskId> + '_ {
        self.entries
            .get(&handle)
            .into_iter()
            .flat_map(|e| e.readers_since_write.iter().copied())
    }

    /// Records `task`'s accesses and returns the edges into it, in discovery
    /// order with duplicates and self-edges removed.
    pub fn resolve(&mut self, task: TaskId, accesses: &[Access]) -> Vec<DependencyEdge> {
        let mut edges: Vec<DependencyEdge> = Vec::new();
        let mut push = |pred: TaskId, handle: Handle, kind: DepKind| {
            if pred == task {
                return;
            }
            let edge = DependencyEdge {
                pred,
                succ: task,
                handle,
                kind,
            };
            if !edges.contains(&edge) {
                edges.push(edge);
            }
        };

        for access in accesses {
            let entry = self.entries.entry(access.handle).or_default();
            if access.mode.reads() {
                if let Some(writer) = entry.last_writer {
                    push(writer, access.handle, DepKind::Raw);
                }
                entry.readers_since_write.insert(task);
            }
            if access.mode.writes() {
                if let Some(writer) = entry.last_writer {
                    push(writer, access.handle, DepKind::Waw);
                }
                for &reader in &entry.readers_since_write {
                    push(reader, access.handle, DepKind::War);
                }
                entry.last_writer = Some(task);
                entry.readers_since_write.clear();
            }
        }
        edges
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn edge(pred: u64, succ: u64, handle: u64, kind: DepKind) -> DependencyEdge {
        DependencyEdge {
            pred: TaskId(pred),
            succ: TaskId(succ),
            handle: Handle(handle),
            kind,
        }
    }

    #[test]
    fn one_writer_two_readers_then_writer() {
        let mut ledger = HandleLedger::new();
        let h = 9;
        assert!(ledger.resolve(TaskId(1), &[Access::output(h)]).is_empty());
        assert_eq!(
            ledger.resolve(TaskId(2), &[Access::input(h)]),
            vec![edge(1, 2, h, DepKind::Raw)]
        );
        assert_eq!(
            ledger.resolve(TaskId(3), &[Access::input(h)]),
            vec![edge(1, 3, h, DepKind::Raw)]
        );
        assert_eq!(
            ledger.resolve(TaskId(4), &[Access::output(h)]),
            vec![
                edge(1, 4, h, DepKind::Waw),
                edge(2, 4, h, DepKind::War),
                edge(3, 4, h, DepKind::War),
            ]
        );
        assert_eq!(ledger.last_writer(Handle(h)), Some(TaskId(4)));
        assert_eq!(ledger.readers_since_write(Handle(h)).count(), 0);
    }

    #[test]
    fn first_inout_has_no_edges() {
        let mut ledger = HandleLedger::new();
        assert!(ledger.resolve(TaskId(1), &[Access::inout(3)]).is_empty());
        assert_eq!(ledger.last_writer(Handle(3)), Some(TaskId(1)));
    }

    #[test]
    fn consecutive_inouts_give_raw_and_waw() {
        let mut ledger = HandleLedger::new();
        ledger.resolve(TaskId(1), &[Access::inout(3)]);
        assert_eq!(
            ledger.resolve(TaskId(2), &[Access::inout(3)]),
            vec![edge(1, 2, 3, DepKind::Raw), edge(1, 2, 3, DepKind::Waw)]
        );
    }

    #[test]
    fn repeated_access_in_one_task_dedups() {
        let mut ledger = HandleLedger::new();
        ledger.resolve(TaskId(1), &[Access::output(1)]);
        let edges = ledger.resolve(TaskId(2), &[Access::input(1), Access::input(1)]);
        assert_eq!(edges, vec![edge(1, 2, 1, DepKind::Raw)]);
    }

    #[test]
    fn read_then_write_same_task_has_no_self_edge() {
        let mut ledger = HandleLedger::new();
        let edges = ledger.resolve(TaskId(1), &[Access::input(5), Access::output(5)]);
        assert!(edges.is_empty());
        assert_eq!(ledger.last_writer(Handle(5)), Some(TaskId(1)));
    }
}
