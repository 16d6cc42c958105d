//! The incremental ledger against a from-scratch pairwise scan.

use std::collections::BTreeSet;

use proptest::prelude::*;
use taskscope_runtime::{Access, AccessMode, DepKind, DependencyEdge, Handle, HandleLedger, TaskId};

/// Scans the flattened access history for every access: a read depends on
/// the latest earlier write of its handle (RAW); a write depends on that
/// write (WAW) and on every read of the handle after it (WAR).
fn pairwise_oracle(tasks: &[Vec<Access>]) -> BTreeSet<DependencyEdge> {
    // (task index, handle, is_write), reads of an inout before its write.
    let mut ops: Vec<(usize, Handle, bool)> = Vec::new();
    for (t, accesses) in tasks.iter().enumerate() {
        for a in accesses {
            if matches!(a.mode, AccessMode::Input | AccessMode::Inout) {
                ops.push((t, a.handle, false));
            }
            if matches!(a.mode, AccessMode::Output | AccessMode::Inout) {
                ops.push((t, a.handle, true));
            }
        }
    }
    let id = |t: usize| TaskId(t as u64 + 1);
    let mut edges = BTreeSet::new();
    for (p, &(succ, handle, is_write)) in ops.iter().enumerate() {
        let last_write = (0..p).rev().find(|&q| ops[q].1 == handle && ops[q].2);
        let mut add = |pred: usize, kind| {
            if pred != succ {
                edges.insert(DependencyEdge { pred: id(pred), succ: id(succ), handle, kind });
            }
        };
        if let Some(q) = last_write {
            add(ops[q].0, if is_write { DepKind::Waw } else { DepKind::Raw });
        }
        if is_write {
            let from = last_write.map_or(0, |q| q + 1);
            for q in from..p {
                if ops[q].1 == handle && !ops[q].2 {
                    add(ops[q].0, DepKind::War);
                }
            }
        }
    }
    edges
}

fn incremental(tasks: &[Vec<Access>]) -> (Vec<DependencyEdge>, BTreeSet<DependencyEdge>) {
    let mut ledger = HandleLedger::new();
    let all: Vec<DependencyEdge> = tasks
        .iter()
        .enumerate()
        .flat_map(|(i, acc)| ledger.resolve(TaskId(i as u64 + 1), acc))
        .collect();
    let set = all.iter().copied().collect();
    (all, set)
}

fn access() -> impl Strategy<Value = Access> {
    (1u64..=8, 0u8..3).prop_map(|(h, m)| match m {
        0 => Access::input(h),
        1 => Access::inout(h),
        _ => Access::output(h),
    })
}

#[test]
fn four_task_example() {
    let h = 1;
    let tasks = vec![
        vec![Access::output(h)],
        vec![Access::input(h)],
        vec![Access::input(h)],
        vec![Access::output(h)],
    ];
    let e = |p: u64, s: u64, kind| DependencyEdge { pred: TaskId(p), succ: TaskId(s), handle: Handle(h), kind };
    let expected: BTreeSet<_> = [
        e(1, 2, DepKind::Raw),
        e(1, 3, DepKind::Raw),
        e(1, 4, DepKind::Waw),
        e(2, 4, DepKind::War),
        e(3, 4, DepKind::War),
    ]
    .into();
    assert_eq!(pairwise_oracle(&tasks), expected);
    assert_eq!(incremental(&tasks).1, expected);
}

#[test]
fn two_inouts_example() {
    let tasks = vec![vec![Access::inout(4)], vec![Access::inout(4)]];
    let (list, set) = incremental(&tasks);
    assert_eq!(list.len(), 2);
    assert_eq!(set, pairwise_oracle(&tasks));
    let kinds: BTreeSet<_> = list.iter().map(|e| e.kind).collect();
    assert_eq!(kinds, [DepKind::Raw, DepKind::Waw].into());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn ledger_matches_pairwise_oracle(
        tasks in prop::collection::vec(prop::collection::vec(access(), 0..4), 1..=50)
    ) {
        let (list, set) = incremental(&tasks);
        prop_assert_eq!(list.len(), set.len(), "duplicate edges emitted");
        prop_assert!(list.iter().all(|e| e.pred < e.succ));
        prop_assert_eq!(set, pairwise_oracle(&tasks));
    }
}
