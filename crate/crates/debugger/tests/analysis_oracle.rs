//! Analyses checked against independent brute-force implementations.

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use taskscope_debugger::{critical_path, weakly_connected_components, GraphModel, Weight};
use taskscope_wire::{DepKind, Event};

/// Random DAG: `n` nodes, each edge p<s present with probability `density`,
/// durations in 0..20 (zero included to exercise ties).
fn random_dag(rng: &mut StdRng, n: u64, density: f64) -> (Vec<u64>, Vec<(u64, u64)>) {
    let durations = (0..n).map(|_| rng.gen_range(0..20)).collect();
    let mut edges = Vec::new();
    for s in 1..=n {
        for p in 1..s {
            if rng.gen_bool(density) {
                edges.push((p, s));
            }
        }
    }
    (durations, edges)
}

fn build(durations: &[u64], edges: &[(u64, u64)]) -> GraphModel {
    let mut m = GraphModel::new();
    for t in 1..=durations.len() as u64 {
        m.apply_event(&Event::task_created(t, 1, 0)).unwrap();
    }
    for (i, &(p, s)) in edges.iter().enumerate() {
        // Alternate handles and kinds; several edges per pair must not
        // change the analyses.
        m.apply_event(&Event::dependency_added(p, s, 1 + i as u64 % 3, DepKind::Raw, 0))
            .unwrap();
        m.apply_event(&Event::dependency_added(p, s, 1 + i as u64 % 3, DepKind::War, 0))
            .unwrap();
    }
    for (i, &d) in durations.iter().enumerate() {
        let t = i as u64 + 1;
        m.apply_event(&Event::task_queued(t, 1)).unwrap();
        m.apply_event(&Event::task_running(t, 1, 1000)).unwrap();
        m.apply_event(&Event::task_finished(t, 1000 + d)).unwrap();
    }
    m
}

/// Every path in the DAG (single nodes included), by depth-first search.
fn all_paths(n: u64, edges: &[(u64, u64)]) -> Vec<Vec<u64>> {
    let mut succ: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for &(p, s) in edges {
        succ.entry(p).or_default().insert(s);
    }
    fn extend(path: &mut Vec<u64>, succ: &BTreeMap<u64, BTreeSet<u64>>, out: &mut Vec<Vec<u64>>) {
        out.push(path.clone());
        let last = *path.last().unwrap();
        for &s in succ.get(&last).into_iter().flatten() {
            path.push(s);
            extend(path, succ, out);
            path.pop();
        }
    }
    let mut out = Vec::new();
    for v in 1..=n {
        extend(&mut vec![v], &succ, &mut out);
    }
    out
}

/// Heaviest path, ties to the lexicographically smallest sequence.
fn enumerate_best(durations: &[u64], edges: &[(u64, u64)], unit: bool) -> (u64, Vec<u64>) {
    let weight = |p: &Vec<u64>| -> u64 {
        p.iter()
            .map(|&t| if unit { 1 } else { durations[t as usize - 1] })
            .sum()
    };
    all_paths(durations.len() as u64, edges)
        .into_iter()
        .map(|p| (weight(&p), p))
        .max_by(|(wa, pa), (wb, pb)| wa.cmp(wb).then_with(|| pb.cmp(pa)))
        .unwrap_or((0, Vec::new()))
}

fn union_find_components(n: u64, edges: &[(u64, u64)]) -> Vec<BTreeSet<u64>> {
    let mut parent: Vec<usize> = (0..=n as usize).collect();
    fn find(parent: &mut [usize], x: usize) -> usize {
        let mut root = x;
        while parent[root] != root {
            root = parent[root];
        }
        let mut x = x;
        while parent[x] != root {
            let next = parent[x];
            parent[x] = root;
            x = next;
        }
        root
    }
    for &(p, s) in edges {
        let (a, b) = (find(&mut parent, p as usize), find(&mut parent, s as usize));
        parent[a.max(b)] = a.min(b);
    }
    let mut groups: BTreeMap<usize, BTreeSet<u64>> = BTreeMap::new();
    for v in 1..=n {
        let root = find(&mut parent, v as usize);
        groups.entry(root).or_default().insert(v);
    }
    let mut components: Vec<_> = groups.into_values().collect();
    components.sort_by_key(|c| *c.iter().next().unwrap());
    components
}

#[test]
fn critical_path_matches_enumeration_on_200_dags() {
    let mut rng = StdRng::seed_from_u64(0x5eed);
    for case in 0..200 {
        let n = rng.gen_range(0..=12);
        let density = rng.gen_range(0.0..0.6);
        let (durations, edges) = random_dag(&mut rng, n, density);
        let model = build(&durations, &edges);
        for (weight, unit) in [(Weight::Duration, false), (Weight::Unit, true)] {
            let got = critical_path(&model, weight);
            let (w, path) = enumerate_best(&durations, &edges, unit);
            assert_eq!((got.weight, got.tasks), (w, path), "case {case}, {weight:?}");
        }
    }
}

#[test]
fn unfinished_tasks_weigh_nothing() {
    let mut m = GraphModel::new();
    m.apply_event(&Event::task_created(1, 1, 0)).unwrap();
    m.apply_event(&Event::task_created(2, 1, 0)).unwrap();
    m.apply_event(&Event::dependency_added(1, 2, 1, DepKind::Raw, 0)).unwrap();
    let p = critical_path(&m, Weight::Duration);
    assert_eq!((p.weight, p.tasks), (0, vec![1]));
    assert_eq!(critical_path(&m, Weight::Unit).tasks, vec![1, 2]);
}

proptest! {
    #[test]
    fn components_match_union_find(seed in any::<u64>(), n in 0u64..40, density in 0.0f64..0.15) {
        let mut rng = StdRng::seed_from_u64(seed);
        let (durations, edges) = random_dag(&mut rng, n, density);
        let model = build(&durations, &edges);
        prop_assert_eq!(weakly_connected_components(&model), union_find_components(n, &edges));
    }
}
