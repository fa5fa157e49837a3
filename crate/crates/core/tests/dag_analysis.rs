mod common;

use std::collections::{BTreeMap, BTreeSet};

use dagproof_core::bundle::{parse_bundle, DagDecl, Unit};
use dagproof_core::dag::*;
use proptest::prelude::*;

fn ids(items: &[&str]) -> BTreeSet<String> {
    items.iter().map(|s| s.to_string()).collect()
}

#[test]
fn reference_fixture_values() {
    let b = parse_bundle(common::bundle_root()).unwrap();
    let v = compute_values(&b.dag).unwrap();
    assert_eq!(v.unit_count, 9);
    assert_eq!(v.layer_counts, BTreeMap::from([(0, 8), (1, 1)]));
    assert_eq!(
        v.entry_points,
        ids(&["U01", "U02", "U03", "U04", "U05", "U07", "U08", "U09"])
    );
    assert_eq!(v.leaf_nodes, ids(&["U06", "U07", "U09"]));
    assert_eq!(v.critical_path, ["U05", "U06"]);
    assert_eq!(v.critical_path_loc, 138);
    assert!(reconcile(b.dag.declared_computed.as_ref().unwrap(), &b.dag)
        .unwrap()
        .is_empty());
    assert!(detect_cycles(&b.dag).is_none());
    let layers = compute_layers(&b.dag).unwrap();
    assert_eq!(layers.layer_of["U06"], 1);
    assert!(layers
        .layer_of
        .iter()
        .filter(|(k, _)| *k != "U06")
        .all(|(_, &l)| l == 0));
}

#[test]
fn reference_fixture_loc_matches_sources() {
    let b = parse_bundle(common::bundle_root()).unwrap();
    assert!(recount_loc(&b.dag, &b.root).is_empty());
}

#[test]
fn strict_loc_catches_drift() {
    let (_dir, root) = common::bundle_copy();
    std::fs::write(root.join("src/c/hello.c"), "int main(void) { return 0; }\n").unwrap();
    let b = parse_bundle(&root).unwrap();
    let diffs = recount_loc(&b.dag, &b.root);
    assert_eq!(
        diffs,
        [LocDiff {
            unit: "U03".into(),
            declared: 7,
            counted: Some(1)
        }]
    );
}

#[test]
fn declared_value_drift_is_reported() {
    let b = parse_bundle(common::bundle_root()).unwrap();
    let mut declared = b.dag.declared_computed.clone().unwrap();
    declared.critical_path_loc = 137;
    declared.leaf_nodes.remove("U09");
    let diffs = reconcile(&declared, &b.dag).unwrap();
    let fields: Vec<_> = diffs.iter().map(|d| d.field).collect();
    assert_eq!(fields, ["leaf_nodes", "critical_path_loc"]);
    assert_eq!(
        diffs[1].to_string(),
        "critical_path_loc: declared 137, computed 138"
    );
}

#[test]
fn small_shapes() {
    let chain = DagDecl::from_units(vec![
        Unit::new("A", &[], 1),
        Unit::new("B", &["A"], 1),
        Unit::new("C", &["B"], 1),
    ]);
    let layers = compute_layers(&chain).unwrap().layer_of;
    assert_eq!(
        layers,
        BTreeMap::from([("A".into(), 0), ("B".into(), 1), ("C".into(), 2)])
    );
    assert_eq!(entry_points(&chain), ids(&["A"]));
    assert_eq!(leaf_nodes(&chain), ids(&["C"]));

    let isolated = DagDecl::from_units(vec![
        Unit::new("X", &[], 4),
        Unit::new("Y", &[], 2),
        Unit::new("Z", &[], 3),
    ]);
    assert_eq!(entry_points(&isolated), leaf_nodes(&isolated));
    assert_eq!(
        critical_path(&isolated).unwrap(),
        CriticalPathResult {
            path: vec!["X".into()],
            total_loc: 4
        }
    );

    let empty = DagDecl::from_units(vec![]);
    assert!(compute_layers(&empty).unwrap().layer_of.is_empty());
    assert!(detect_cycles(&DagDecl::from_units(vec![Unit::new("A", &[], 1)])).is_none());
}

#[test]
fn two_cycle_is_reported_smallest_first() {
    let dag = DagDecl::from_units(vec![Unit::new("B", &["A"], 1), Unit::new("A", &["B"], 1)]);
    assert_eq!(detect_cycles(&dag).unwrap(), ["A", "B"]);
    assert!(matches!(compute_layers(&dag), Err(DagError::Cycle(_))));
    assert!(matches!(critical_path(&dag), Err(DagError::Cycle(_))));
}

/// Every source-to-sink path by exhaustive enumeration; the best is the
/// heaviest, ties to the lexicographically smallest id sequence.
fn oracle(dag: &DagDecl) -> (Vec<String>, u64) {
    let loc: BTreeMap<&str, u64> = dag.units.iter().map(|u| (u.id.as_str(), u.loc)).collect();
    let mut dependents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for u in &dag.units {
        dependents.entry(&u.id).or_default();
        for d in &u.deps {
            dependents.entry(d.as_str()).or_default().push(&u.id);
        }
    }
    let mut paths: Vec<Vec<String>> = Vec::new();
    fn walk<'a>(
        at: &'a str,
        so_far: &mut Vec<String>,
        dependents: &BTreeMap<&'a str, Vec<&'a str>>,
        out: &mut Vec<Vec<String>>,
    ) {
        so_far.push(at.to_string());
        let next = &dependents[at];
        if next.is_empty() {
            out.push(so_far.clone());
        }
        for n in next {
            walk(n, so_far, dependents, out);
        }
        so_far.pop();
    }
    for u in dag.units.iter().filter(|u| u.deps.is_empty()) {
        walk(&u.id, &mut Vec::new(), &dependents, &mut paths);
    }
    let weight = |p: &Vec<String>| p.iter().map(|id| loc[id.as_str()]).sum::<u64>();
    let best = paths.iter().map(weight).max().unwrap_or(0);
    let path = paths
        .into_iter()
        .filter(|p| weight(p) == best)
        .min()
        .unwrap_or_default();
    (path, best)
}

/// Acyclic graphs of up to `max` units. Edges only point from earlier to
/// later positions, and names are shuffled so id order is not topological.
fn arb_dag(max: usize, max_loc: u64) -> impl Strategy<Value = DagDecl> {
    (1..=max)
        .prop_flat_map(move |n| {
            (
                Just(n),
                proptest::collection::vec(proptest::bool::weighted(0.3), n * n),
                proptest::collection::vec(1..=max_loc, n),
                Just((0..n).collect::<Vec<_>>()).prop_shuffle(),
            )
        })
        .prop_map(|(n, edges, locs, names)| {
            let name = |i: usize| format!("U{:02}", names[i] + 1);
            let units = (0..n)
                .map(|i| {
                    let deps: Vec<String> =
                        (0..i).filter(|&j| edges[i * n + j]).map(name).collect();
                    let deps: Vec<&str> = deps.iter().map(String::as_str).collect();
                    Unit::new(name(i), &deps, locs[i])
                })
                .collect();
            DagDecl::from_units(units)
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn critical_path_matches_oracle(dag in arb_dag(10, 50)) {
        let got = critical_path(&dag).unwrap();
        let (path, loc) = oracle(&dag);
        prop_assert_eq!(got.total_loc, loc);
        prop_assert_eq!(got.path, path);
    }

    #[test]
    fn critical_path_ties_match_oracle(dag in arb_dag(10, 2)) {
        let got = critical_path(&dag).unwrap();
        prop_assert_eq!((got.path, got.total_loc), oracle(&dag));
    }

    #[test]
    fn structural_invariants(dag in arb_dag(10, 50)) {
        let v = compute_values(&dag).unwrap();
        prop_assert!(!v.entry_points.is_empty());
        prop_assert!(!v.leaf_nodes.is_empty());
        prop_assert_eq!(v.layer_counts.values().sum::<usize>(), v.unit_count);
        let max_unit = dag.units.iter().map(|u| u.loc).max().unwrap();
        prop_assert!(v.critical_path_loc >= max_unit);
        prop_assert!(reconcile(&v, &dag).unwrap().is_empty());
        let layers = compute_layers(&dag).unwrap().layer_of;
        for u in &dag.units {
            let expect = u.deps.iter().map(|d| layers[d] + 1).max().unwrap_or(0);
            prop_assert_eq!(layers[&u.id], expect);
        }
    }

    #[test]
    fn back_edge_yields_real_cycle(dag in arb_dag(10, 5), pick in any::<proptest::sample::Index>()) {
        let mut dag = dag;
        // make some unit depend on a unit downstream of it
        let edges: Vec<(usize, String)> = dag.units.iter().enumerate()
            .flat_map(|(i, u)| u.deps.iter().map(move |d| (i, d.clone()))).collect();
        prop_assume!(!edges.is_empty());
        let (dependent, dep) = edges[pick.index(edges.len())].clone();
        let back = dag.units[dependent].id.clone();
        dag.units.iter_mut().find(|u| u.id == dep).unwrap().deps.push(back);
        let cycle = detect_cycles(&dag).expect("cycle");
        prop_assert_eq!(cycle.iter().min(), cycle.first());
        for (k, id) in cycle.iter().enumerate() {
            let next = &cycle[(k + 1) % cycle.len()];
            prop_assert!(dag.get(next).unwrap().deps.contains(id), "{} -> {} not an edge", id, next);
        }
    }
}
