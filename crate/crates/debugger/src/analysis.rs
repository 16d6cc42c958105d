//! Whole-graph analyses over a model snapshot.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use crate::model::GraphModel;

/// Node weighting for [`critical_path`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Weight {
    /// Measured duration in microseconds; unfinished tasks weigh 0.
    Duration,
    /// Every task weighs 1, giving the longest chain by task count.
    Unit,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalPath {
    pub weight: u64,
    pub tasks: Vec<u64>,
}

/// Partitions the nodes into weakly connected components, each sorted
/// ascending, ordered by smallest member.
pub fn weakly_connected_components(model: &GraphModel) -> Vec<BTreeSet<u64>> {
    let mut neighbours: BTreeMap<u64, Vec<u64>> =
        model.nodes().map(|n| (n.task, Vec::new())).collect();
    for e in model.edges() {
        neighbours.entry(e.pred).or_default().push(e.succ);
        neighbours.entry(e.succ).or_default().push(e.pred);
    }

    let mut seen = BTreeSet::new();
    let mut components = Vec::new();
    for &start in neighbours.keys() {
        if !seen.insert(start) {
            continue;
        }
        let mut component = BTreeSet::from([start]);
        let mut queue = VecDeque::from([start]);
        while let Some(v) = queue.pop_front() {
            for &w in &neighbours[&v] {
                if seen.insert(w) {
                    component.insert(w);
                    queue.push_back(w);
                }
            }
        }
        components.push(component);
    }
    components
}

/// Heaviest path through the dependency graph.
///
/// Any single node counts as a path. Among paths of equal weight the
/// lexicographically smallest task sequence wins. Edges always point
/// from a lower to a higher task id, so ascending id order is a
/// topological order and the longest path is found by one backward sweep.
pub fn critical_path(model: &GraphModel, weight: Weight) -> CriticalPath {
    let node_weight = |task: u64| -> u64 {
        match weight {
            Weight::Unit => 1,
            Weight::Duration => model
                .node(task)
                .and_then(|n| n.duration_us)
                .unwrap_or(0),
        }
    };

    let mut successors: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for e in model.edges() {
        successors.entry(e.pred).or_default().insert(e.succ);
    }

    // best[v]: heaviest, then lexicographically smallest, path starting at v.
    let mut best: BTreeMap<u64, CriticalPath> = BTreeMap::new();
    for node in model.nodes().rev() {
        let v = node.task;
        let mut choice: Option<&CriticalPath> = None;
        // Ascending successor order: on equal weight the first one seen
        // has the smaller second element, hence the smaller sequence.
        for s in successors.get(&v).into_iter().flatten() {
            let Some(candidate) = best.get(s) else { continue };
            if choice.map_or(true, |c| candidate.weight > c.weight) {
                choice = Some(candidate);
            }
        }
        let own = node_weight(v);
        let path = match choice {
            // Stopping at v gives the shorter, hence smaller, sequence.
            Some(c) if c.weight > 0 => {
                let mut tasks = Vec::with_capacity(c.tasks.len() + 1);
                tasks.push(v);
                tasks.extend_from_slice(&c.tasks);
                CriticalPath {
                    weight: own + c.weight,
                    tasks,
                }
            }
            _ => CriticalPath {
                weight: own,
                tasks: vec![v],
            },
        };
        best.insert(v, path);
    }

    let mut result: Option<&CriticalPath> = None;
    for path in best.values() {
        if result.map_or(true, |r| path.weight > r.weight) {
            result = Some(path);
        }
    }
    result.cloned().unwrap_or(CriticalPath {
        weight: 0,
        tasks: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use taskscope_wire::{DepKind, Event};

    use super::*;

    fn finished_graph(durations: &[u64], edges: &[(u64, u64)]) -> GraphModel {
        let mut m = GraphModel::new();
        for t in 1..=durations.len() as u64 {
            m.apply_event(&Event::task_created(t, 1, 0)).unwrap();
        }
        for &(p, s) in edges {
            m.apply_event(&Event::dependency_added(p, s, 1, DepKind::Raw, 0))
                .unwrap();
        }
        for (i, &d) in durations.iter().enumerate() {
            let t = i as u64 + 1;
            m.apply_event(&Event::task_queued(t, 0)).unwrap();
            m.apply_event(&Event::task_running(t, 1, 100)).unwrap();
            m.apply_event(&Event::task_finished(t, 100 + d)).unwrap();
        }
        m
    }

    #[test]
    fn empty_model() {
        let m = GraphModel::new();
        assert!(weakly_connected_components(&m).is_empty());
        assert_eq!(
            critical_path(&m, Weight::Unit),
            CriticalPath {
                weight: 0,
                tasks: vec![]
            }
        );
    }

    #[test]
    fn single_node_unit() {
        let m = finished_graph(&[7], &[]);
        assert_eq!(critical_path(&m, Weight::Unit).tasks, vec![1]);
        assert_eq!(critical_path(&m, Weight::Unit).weight, 1);
    }

    #[test]
    fn chain_durations() {
        let m = finished_graph(&[5, 10, 2], &[(1, 2), (2, 3)]);
        let p = critical_path(&m, Weight::Duration);
        assert_eq!((p.weight, p.tasks), (17, vec![1, 2, 3]));
    }

    #[test]
    fn diamond_durations() {
        let m = finished_graph(&[1, 10, 2, 1], &[(1, 2), (1, 3), (2, 4), (3, 4)]);
        let p = critical_path(&m, Weight::Duration);
        assert_eq!((p.weight, p.tasks), (12, vec![1, 2, 4]));
    }

    #[test]
    fn ties_prefer_smaller_ids() {
        let m = finished_graph(&[1, 3, 3, 1], &[(1, 2), (1, 3), (2, 4), (3, 4)]);
        assert_eq!(critical_path(&m, Weight::Duration).tasks, vec![1, 2, 4]);
    }

    #[test]
    fn zero_weight_tail_is_dropped() {
        let m = finished_graph(&[4, 0], &[(1, 2)]);
        assert_eq!(critical_path(&m, Weight::Duration).tasks, vec![1]);
    }

    #[test]
    fn components_split() {
        let m = finished_graph(&[1; 5], &[(1, 3), (2, 4), (4, 5)]);
        let c = weakly_connected_components(&m);
        assert_eq!(c, vec![BTreeSet::from([1, 3]), BTreeSet::from([2, 4, 5])]);
    }
}
