//! Graph-derived values of an implementation DAG.
//!
//! Edges run from a dependency to its dependent: a unit with `deps = ["A"]`
//! sits downstream of `A`. Layers are longest-path depth from the sources.
//! The critical path is the source-to-sink path with the largest LOC sum;
//! ties go to the lexicographically smallest id sequence.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::bundle::{ComputedValues, DagDecl};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DagError {
    #[error("dependency cycle: {}", .0.join(" -> "))]
    Cycle(Vec<String>),
    #[error("unit {unit} depends on unknown unit {dep}")]
    UnknownDependency { unit: String, dep: String },
}

/// Shortest cycle among `(id, deps)` nodes, listed in dependency-to-dependent
/// order starting from its smallest id. Deps naming unknown nodes are ignored.
pub fn find_cycle<'a, I>(nodes: I) -> Option<Vec<String>>
where
    I: IntoIterator<Item = (&'a str, &'a [String])>,
{
    let nodes: BTreeMap<&str, &[String]> = nodes.into_iter().collect();
    let mut dependents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    for (&id, deps) in &nodes {
        for dep in deps.iter() {
            if nodes.contains_key(dep.as_str()) {
                dependents.entry(dep.as_str()).or_default().push(id);
            }
        }
    }
    for list in dependents.values_mut() {
        list.sort_unstable();
        list.dedup();
    }

    let mut best: Option<Vec<&str>> = None;
    for &start in nodes.keys() {
        // BFS from `start` along dependent edges until it comes back.
        let mut parent: HashMap<&str, &str> = HashMap::new();
        let mut queue = VecDeque::from([start]);
        let mut closing = None;
        'search: while let Some(node) = queue.pop_front() {
            for &next in dependents.get(node).map(Vec::as_slice).unwrap_or(&[]) {
                if next == start {
                    closing = Some(node);
                    break 'search;
                }
                if next != start && !parent.contains_key(next) {
                    parent.insert(next, node);
                    queue.push_back(next);
                }
            }
        }
        let Some(mut node) = closing else { continue };
        let mut cycle = vec![node];
        while node != start {
            node = parent[node];
            cycle.push(node);
        }
        cycle.reverse();
        if best.as_ref().is_none_or(|b| cycle.len() < b.len()) {
            best = Some(cycle);
        }
    }
    best.map(|c| c.into_iter().map(str::to_string).collect())
}

/// One witness cycle, or `None` for an acyclic graph.
pub fn detect_cycles(dag: &DagDecl) -> Option<Vec<String>> {
    find_cycle(dag.units.iter().map(|u| (u.id.as_str(), u.deps.as_slice())))
}

/// Unit indices in topological order (dependencies first, ties by id).
fn topo_order(dag: &DagDecl) -> Result<Vec<usize>, DagError> {
    let index: HashMap<&str, usize> = dag
        .units
        .iter()
        .enumerate()
        .map(|(i, u)| (u.id.as_str(), i))
        .collect();
    let mut indegree = vec![0usize; dag.units.len()];
    let mut dependents: Vec<Vec<usize>> = vec![Vec::new(); dag.units.len()];
    for (i, u) in dag.units.iter().enumerate() {
        let deps: BTreeSet<&str> = u.deps.iter().map(String::as_str).collect();
        for dep in deps {
            let &d = index.get(dep).ok_or_else(|| DagError::UnknownDependency {
                unit: u.id.clone(),
                dep: dep.to_string(),
            })?;
            dependents[d].push(i);
            indegree[i] += 1;
        }
    }
    let mut ready: BTreeSet<(&str, usize)> = dag
        .units
        .iter()
        .enumerate()
        .filter(|(i, _)| indegree[*i] == 0)
        .map(|(i, u)| (u.id.as_str(), i))
        .collect();
    let mut order = Vec::with_capacity(dag.units.len());
    while let Some(first) = ready.pop_first() {
        let (_, i) = first;
        order.push(i);
        for &j in &dependents[i] {
            indegree[j] -= 1;
            if indegree[j] == 0 {
                ready.insert((dag.units[j].id.as_str(), j));
            }
        }
    }
    if order.len() < dag.units.len() {
        let cycle = detect_cycles(dag).unwrap_or_default();
        return Err(DagError::Cycle(cycle));
    }
    Ok(order)
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LayerAssignment {
    pub layer_of: BTreeMap<String, u32>,
}

impl LayerAssignment {
    /// layer -> number of units on it
    pub fn histogram(&self) -> BTreeMap<u32, usize> {
        let mut counts = BTreeMap::new();
        for &layer in self.layer_of.values() {
            *counts.entry(layer).or_insert(0) += 1;
        }
        counts
    }
}

pub fn compute_layers(dag: &DagDecl) -> Result<LayerAssignment, DagError> {
    let order = topo_order(dag)?;
    let mut layer_of: BTreeMap<String, u32> = BTreeMap::new();
    for i in order {
        let unit = &dag.units[i];
        let layer = unit
            .deps
            .iter()
            .map(|d| layer_of[d.as_str()] + 1)
            .max()
            .unwrap_or(0);
        layer_of.insert(unit.id.clone(), layer);
    }
    Ok(LayerAssignment { layer_of })
}

/// Units with no dependencies.
pub fn entry_points(dag: &DagDecl) -> BTreeSet<String> {
    dag.units
        .iter()
        .filter(|u| u.deps.is_empty())
        .map(|u| u.id.clone())
        .collect()
}

/// Units nothing depends on. May overlap with the entry points.
pub fn leaf_nodes(dag: &DagDecl) -> BTreeSet<String> {
    let depended: BTreeSet<&str> = dag
        .units
        .iter()
        .flat_map(|u| u.deps.iter().map(String::as_str))
        .collect();
    dag.units
        .iter()
        .filter(|u| !depended.contains(u.id.as_str()))
        .map(|u| u.id.clone())
        .collect()
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CriticalPathResult {
    pub path: Vec<String>,
    pub total_loc: u64,
}

pub fn critical_path(dag: &DagDecl) -> Result<CriticalPathResult, DagError> {
    let order = topo_order(dag)?;
    let index: HashMap<&str, usize> = dag
        .units
        .iter()
        .enumerate()
        .map(|(i, u)| (u.id.as_str(), i))
        .collect();
    let mut dependents: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); dag.units.len()];
    for (i, u) in dag.units.iter().enumerate() {
        for dep in &u.deps {
            dependents[index[dep.as_str()]].insert(i);
        }
    }

    // best[i]: heaviest path from i to a sink, lexicographically smallest
    // among equals. Any suffix of an optimal path is optimal for its head,
    // so sinks-first evaluation is exact.
    let mut best: Vec<Option<(u64, Vec<usize>)>> = vec![None; dag.units.len()];
    let ids =
        |path: &[usize]| -> Vec<&str> { path.iter().map(|&i| dag.units[i].id.as_str()).collect() };
    for &i in order.iter().rev() {
        let mut chosen: Option<&(u64, Vec<usize>)> = None;
        for &j in &dependents[i] {
            let candidate = best[j].as_ref().expect("dependents are evaluated first");
            chosen = match chosen {
                None => Some(candidate),
                Some(current) => {
                    if candidate.0 > current.0
                        || (candidate.0 == current.0 && ids(&candidate.1) < ids(&current.1))
                    {
                        Some(candidate)
                    } else {
                        Some(current)
                    }
                }
            };
        }
        let (weight, mut path) = chosen.cloned().unwrap_or((0, Vec::new()));
        path.insert(0, i);
        best[i] = Some((weight + dag.units[i].loc, path));
    }

    let mut winner: Option<(u64, Vec<usize>)> = None;
    for (i, u) in dag.units.iter().enumerate() {
        if !u.deps.is_empty() {
            continue;
        }
        let candidate = best[i].clone().expect("every unit evaluated");
        let better = match &winner {
            None => true,
            Some(w) => candidate.0 > w.0 || (candidate.0 == w.0 && ids(&candidate.1) < ids(&w.1)),
        };
        if better {
            winner = Some(candidate);
        }
    }
    Ok(winner
        .map(|(total_loc, path)| CriticalPathResult {
            path: path.into_iter().map(|i| dag.units[i].id.clone()).collect(),
            total_loc,
        })
        .unwrap_or_default())
}

/// Recompute every value that `[computed]` declares.
pub fn compute_values(dag: &DagDecl) -> Result<ComputedValues, DagError> {
    let layers = compute_layers(dag)?;
    let critical = critical_path(dag)?;
    Ok(ComputedValues {
        unit_count: dag.units.len(),
        layer_counts: layers.histogram(),
        entry_points: entry_points(dag),
        leaf_nodes: leaf_nodes(dag),
        critical_path: critical.path,
        critical_path_loc: critical.total_loc,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReconcileDiff {
    pub field: &'static str,
    pub declared: String,
    pub computed: String,
}

impl fmt::Display for ReconcileDiff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: declared {}, computed {}",
            self.field, self.declared, self.computed
        )
    }
}

pub const COMPUTED_FIELDS: [&str; 6] = [
    "unit_count",
    "layer_counts",
    "entry_points",
    "leaf_nodes",
    "critical_path",
    "critical_path_loc",
];

fn show_layers(m: &BTreeMap<u32, usize>) -> String {
    let inner: Vec<String> = m.iter().map(|(k, v)| format!("{k}: {v}")).collect();
    format!("{{{}}}", inner.join(", "))
}

fn show_set(s: &BTreeSet<String>) -> String {
    format!("{{{}}}", s.iter().cloned().collect::<Vec<_>>().join(", "))
}

fn show_path(p: &[String]) -> String {
    format!("[{}]", p.join(", "))
}

/// Field-by-field comparison of declared and recomputed values. Sets are
/// compared order-insensitively, the critical path in order.
pub fn reconcile(declared: &ComputedValues, dag: &DagDecl) -> Result<Vec<ReconcileDiff>, DagError> {
    let computed = compute_values(dag)?;
    Ok(compare_values(declared, &computed))
}

pub fn compare_values(declared: &ComputedValues, computed: &ComputedValues) -> Vec<ReconcileDiff> {
    let mut diffs = Vec::new();
    let mut check = |field: &'static str, same: bool, d: String, c: String| {
        if !same {
            diffs.push(ReconcileDiff {
                field,
                declared: d,
                computed: c,
            });
        }
    };
    check(
        "unit_count",
        declared.unit_count == computed.unit_count,
        declared.unit_count.to_string(),
        computed.unit_count.to_string(),
    );
    check(
        "layer_counts",
        declared.layer_counts == computed.layer_counts,
        show_layers(&declared.layer_counts),
        show_layers(&computed.layer_counts),
    );
    check(
        "entry_points",
        declared.entry_points == computed.entry_points,
        show_set(&declared.entry_points),
        show_set(&computed.entry_points),
    );
    check(
        "leaf_nodes",
        declared.leaf_nodes == computed.leaf_nodes,
        show_set(&declared.leaf_nodes),
        show_set(&computed.leaf_nodes),
    );
    check(
        "critical_path",
        declared.critical_path == computed.critical_path,
        show_path(&declared.critical_path),
        show_path(&computed.critical_path),
    );
    check(
        "critical_path_loc",
        declared.critical_path_loc == computed.critical_path_loc,
        declared.critical_path_loc.to_string(),
        computed.critical_path_loc.to_string(),
    );
    diffs
}

/// Physical lines: newline bytes, plus one for a final unterminated line.
pub fn count_physical_lines(bytes: &[u8]) -> u64 {
    let newlines = bytes.iter().filter(|&&b| b == b'\n').count() as u64;
    match bytes.last() {
        Some(b'\n') | None => newlines,
        Some(_) => newlines + 1,
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LocDiff {
    pub unit: String,
    pub declared: u64,
    /// `None` when a source path could not be read.
    pub counted: Option<u64>,
}

/// Strict mode: recount physical lines of each unit's sources and report
/// units whose declared `loc` differs.
pub fn recount_loc(dag: &DagDecl, root: &Path) -> Vec<LocDiff> {
    let mut diffs = Vec::new();
    for unit in &dag.units {
        let counted = unit.source_paths.iter().try_fold(0u64, |acc, p| {
            std::fs::read(root.join(p.as_str()))
                .ok()
                .map(|bytes| acc + count_physical_lines(&bytes))
        });
        if counted != Some(unit.loc) {
            diffs.push(LocDiff {
                unit: unit.id.clone(),
                declared: unit.loc,
                counted,
            });
        }
    }
    diffs
}
