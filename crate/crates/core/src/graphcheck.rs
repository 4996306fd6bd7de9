//! Structural predicates for the graph classes used by the hardness constructions.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::network::Network;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AnnotationError {
    #[error("annotation refers to unknown bus {0:?}")]
    UnknownBus(String),
    #[error("bus {0:?} appears more than once in the tree")]
    RepeatedBus(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Block {
    pub buses: Vec<String>,
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Witness {
    /// The block decomposition certifying a positive verdict.
    Blocks { blocks: Vec<Block> },
    Line { line: String, reason: String },
    Bus { bus: String, reason: String },
    Component { buses: usize, lines: usize },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StructureVerdict {
    pub predicate: String,
    pub holds: bool,
    pub witness: Option<Witness>,
}

impl StructureVerdict {
    fn yes(predicate: &str, witness: Option<Witness>) -> Self {
        StructureVerdict { predicate: predicate.to_string(), holds: true, witness }
    }

    fn no(predicate: &str, witness: Witness) -> Self {
        StructureVerdict { predicate: predicate.to_string(), holds: false, witness: Some(witness) }
    }
}

/// Largest number of lines incident to one bus.
pub fn max_degree(net: &Network) -> usize {
    degrees(net).into_iter().max().unwrap_or(0)
}

pub fn degrees(net: &Network) -> Vec<usize> {
    let mut deg = vec![0; net.buses().len()];
    for i in 0..net.lines().len() {
        let (a, b) = net.ends(i);
        deg[a] += 1;
        deg[b] += 1;
    }
    deg
}

/// Bridges of the graph on `n` vertices with the given edges, as a per-edge flag.
pub fn bridges(n: usize, edges: &[(usize, usize)]) -> Vec<bool> {
    let mut adj = vec![Vec::new(); n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let mut is_bridge = vec![false; edges.len()];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut time = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (vertex, edge used to reach it, next adjacency index)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (v, via, ref mut next)) = stack.last_mut() {
            if *next < adj[v].len() {
                let (w, e) = adj[v][*next];
                *next += 1;
                if e == via {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, e, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        is_bridge[via] = true;
                    }
                }
            }
        }
    }
    is_bridge
}

/// Biconnected blocks as lists of edge indices (Tarjan with an edge stack).
/// Isolated vertices belong to no block.
pub fn biconnected_blocks(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for (e, &(a, b)) in edges.iter().enumerate() {
        adj[a].push((b, e));
        adj[b].push((a, e));
    }
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0; n];
    let mut time = 0;
    let mut edge_stack: Vec<usize> = Vec::new();
    let mut seen_edge = vec![false; edges.len()];
    let mut blocks = Vec::new();
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = time;
        low[root] = time;
        time += 1;
        while let Some(&mut (v, via, ref mut next)) = stack.last_mut() {
            if *next < adj[v].len() {
                let (w, e) = adj[v][*next];
                *next += 1;
                if e == via || seen_edge[e] {
                    continue;
                }
                seen_edge[e] = true;
                edge_stack.push(e);
                if disc[w] == usize::MAX {
                    disc[w] = time;
                    low[w] = time;
                    time += 1;
                    stack.push((w, e, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] >= disc[parent] {
                        let mut block = Vec::new();
                        while let Some(e) = edge_stack.pop() {
                            block.push(e);
                            if e == via {
                                break;
                            }
                        }
                        block.sort_unstable();
                        blocks.push(block);
                    }
                }
            }
        }
    }
    blocks.sort();
    blocks
}

fn edge_list(net: &Network) -> Vec<(usize, usize)> {
    (0..net.lines().len()).map(|i| net.ends(i)).collect()
}

fn component_count(net: &Network) -> usize {
    net.components_by_mask(&vec![false; net.lines().len()]).len()
}

/// Connected, and every biconnected block is a single line or a simple cycle.
pub fn is_cactus(net: &Network) -> StructureVerdict {
    const NAME: &str = "cactus";
    if net.buses().len() > 1 && component_count(net) > 1 {
        let comps = net.components_by_mask(&vec![false; net.lines().len()]);
        let bus = net.buses()[comps[1][0]].id.clone();
        return StructureVerdict::no(NAME, Witness::Bus { bus, reason: "not connected to the rest".into() });
    }
    let edges = edge_list(net);
    let mut blocks = Vec::new();
    for block in biconnected_blocks(net.buses().len(), &edges) {
        let buses: BTreeSet<usize> = block.iter().flat_map(|&e| [edges[e].0, edges[e].1]).collect();
        if block.len() > 1 && block.len() != buses.len() {
            // A 2-connected block that is not a cycle: every line in it lies on two cycles.
            let line = block.iter().map(|&e| net.lines()[e].id.clone()).max().expect("nonempty block");
            return StructureVerdict::no(NAME, Witness::Line { line, reason: "lies on more than one cycle".into() });
        }
        let mut bus_ids: Vec<String> = buses.iter().map(|&b| net.buses()[b].id.clone()).collect();
        bus_ids.sort();
        let mut line_ids: Vec<String> = block.iter().map(|&e| net.lines()[e].id.clone()).collect();
        line_ids.sort();
        blocks.push(Block { buses: bus_ids, lines: line_ids });
    }
    blocks.sort_by(|a, b| a.lines.cmp(&b.lines));
    StructureVerdict::yes(NAME, Some(Witness::Blocks { blocks }))
}

/// Spanning-tree annotation for the n-level tree check: the root and, for every
/// internal bus, its ordered list of children.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TreeAnnotation {
    pub root: String,
    pub children: BTreeMap<String, Vec<String>>,
}

/// Checks the annotated spanning tree against the n-level tree conditions for `levels`:
/// leaves are loads, the root is the only generator, and every non-tree line joins
/// two buses that are neighbours in the left-to-right order of a level `<= levels`.
pub fn validate_level_tree(
    net: &Network,
    annotation: &TreeAnnotation,
    levels: usize,
) -> Result<StructureVerdict, AnnotationError> {
    let name = format!("{levels}-level tree");
    let known = |id: &String| {
        if net.bus(id).is_some() {
            Ok(())
        } else {
            Err(AnnotationError::UnknownBus(id.clone()))
        }
    };
    known(&annotation.root)?;
    for (parent, kids) in &annotation.children {
        known(parent)?;
        kids.iter().try_for_each(known)?;
    }

    // Walk the tree breadth-first so each level lists buses in the order induced
    // by the parents' order and each parent's child order.
    let mut level_of: BTreeMap<String, usize> = BTreeMap::new();
    let mut levels_order: Vec<Vec<String>> = vec![vec![annotation.root.clone()]];
    level_of.insert(annotation.root.clone(), 0);
    let mut tree_lines: HashSet<String> = HashSet::new();
    loop {
        let current = levels_order.last().expect("root level").clone();
        let mut next = Vec::new();
        for parent in &current {
            for child in annotation.children.get(parent).into_iter().flatten() {
                if level_of.contains_key(child) {
                    return Err(AnnotationError::RepeatedBus(child.clone()));
                }
                let Some(line) = net.line_between(parent, child) else {
                    return Ok(StructureVerdict::no(
                        &name,
                        Witness::Bus { bus: child.clone(), reason: format!("no line to its parent {parent}") },
                    ));
                };
                tree_lines.insert(line.id.clone());
                level_of.insert(child.clone(), levels_order.len());
                next.push(child.clone());
            }
        }
        if next.is_empty() {
            break;
        }
        levels_order.push(next);
    }
    if let Some(parent) = annotation.children.keys().find(|p| !level_of.contains_key(*p)) {
        return Err(AnnotationError::UnknownBus(parent.clone()));
    }
    if let Some(bus) = net.buses().iter().find(|b| !level_of.contains_key(&b.id)) {
        return Ok(StructureVerdict::no(
            &name,
            Witness::Bus { bus: bus.id.clone(), reason: "not covered by the spanning tree".into() },
        ));
    }

    for bus in net.buses() {
        let is_leaf = annotation.children.get(&bus.id).is_none_or(|c| c.is_empty());
        if is_leaf && bus.id != annotation.root && !bus.is_load() {
            return Ok(StructureVerdict::no(
                &name,
                Witness::Bus { bus: bus.id.clone(), reason: "leaf is not a load".into() },
            ));
        }
        if bus.is_generator() && bus.id != annotation.root {
            return Ok(StructureVerdict::no(
                &name,
                Witness::Bus { bus: bus.id.clone(), reason: "generator away from the root".into() },
            ));
        }
    }
    if !net.bus(&annotation.root).expect("checked").is_generator() {
        return Ok(StructureVerdict::no(
            &name,
            Witness::Bus { bus: annotation.root.clone(), reason: "root is not a generator".into() },
        ));
    }

    let position: BTreeMap<&String, usize> =
        levels_order.iter().flat_map(|lvl| lvl.iter().enumerate().map(|(i, b)| (b, i))).collect();
    for line in net.lines() {
        if tree_lines.contains(&line.id) {
            continue;
        }
        let (la, lb) = (level_of[&line.a], level_of[&line.b]);
        let reason = if la != lb {
            Some("joins different levels")
        } else if la > levels {
            Some("joins buses below the allowed level")
        } else if position[&line.a].abs_diff(position[&line.b]) != 1 {
            Some("joins buses that are not neighbours in the level order")
        } else {
            None
        };
        if let Some(reason) = reason {
            return Ok(StructureVerdict::no(&name, Witness::Line { line: line.id.clone(), reason: reason.into() }));
        }
    }
    Ok(StructureVerdict::yes(&name, None))
}

pub fn validate_two_level_tree(net: &Network, annotation: &TreeAnnotation) -> Result<StructureVerdict, AnnotationError> {
    validate_level_tree(net, annotation, 2)
}

/// Euler's necessary planarity bound `m <= 3n - 6`, checked per connected component.
pub fn euler_planarity_necessary(net: &Network) -> bool {
    let comps = net.components_by_mask(&vec![false; net.lines().len()]);
    let mut comp_of = vec![0; net.buses().len()];
    for (c, buses) in comps.iter().enumerate() {
        for &b in buses {
            comp_of[b] = c;
        }
    }
    let mut line_count = vec![0usize; comps.len()];
    for i in 0..net.lines().len() {
        line_count[comp_of[net.ends(i).0]] += 1;
    }
    comps.iter().zip(&line_count).all(|(buses, &m)| buses.len() < 3 || m + 6 <= 3 * buses.len())
}

pub fn euler_verdict(net: &Network) -> StructureVerdict {
    if euler_planarity_necessary(net) {
        StructureVerdict::yes("euler planarity bound", None)
    } else {
        StructureVerdict::no(
            "euler planarity bound",
            Witness::Component { buses: net.buses().len(), lines: net.lines().len() },
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::{Bus, Line};
    use crate::rational::ExtRational;

    fn graph(n: usize, edges: &[(usize, usize)]) -> Network {
        let buses = (0..n).map(|i| Bus::new(format!("v{i}"))).collect();
        let lines = edges
            .iter()
            .enumerate()
            .map(|(k, &(a, b))| Line::new(format!("e{k}"), format!("v{a}"), format!("v{b}"), 1.into(), 1.into()))
            .collect();
        Network::new(buses, lines).unwrap()
    }

    #[test]
    fn degrees() {
        assert_eq!(max_degree(&graph(1, &[])), 0);
        assert_eq!(max_degree(&graph(3, &[(0, 1), (1, 2), (0, 2)])), 2);
        assert_eq!(max_degree(&graph(4, &[(0, 1), (0, 2), (0, 3)])), 3);
    }

    #[test]
    fn bridges_of_a_triangle_with_tail() {
        let flags = bridges(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4)]);
        assert_eq!(flags, vec![false, false, false, true, true]);
    }

    #[test]
    fn triangle_is_a_cactus() {
        let v = is_cactus(&graph(3, &[(0, 1), (1, 2), (0, 2)]));
        assert!(v.holds);
        let Some(Witness::Blocks { blocks }) = v.witness else { panic!("blocks expected") };
        assert_eq!(blocks.len(), 1);
        assert!(blocks.iter().all(|b| b.lines.len() <= b.buses.len()));
    }

    #[test]
    fn chord_breaks_the_cactus() {
        // square v0 v1 v2 v3 with the chord e4 = v0-v2
        let v = is_cactus(&graph(4, &[(0, 1), (1, 2), (2, 3), (3, 0), (0, 2)]));
        assert!(!v.holds);
        assert_eq!(v.witness, Some(Witness::Line { line: "e4".into(), reason: "lies on more than one cycle".into() }));
    }

    #[test]
    fn two_triangles_sharing_a_bus_are_a_cactus() {
        let v = is_cactus(&graph(5, &[(0, 1), (1, 2), (2, 0), (2, 3), (3, 4), (4, 2)]));
        assert!(v.holds);
        assert!(!is_cactus(&graph(3, &[(0, 1)])).holds, "disconnected");
    }

    #[test]
    fn euler_bound() {
        let k5: Vec<(usize, usize)> = (0..5).flat_map(|a| (a + 1..5).map(move |b| (a, b))).collect();
        assert!(!euler_planarity_necessary(&graph(5, &k5)));
        assert!(euler_planarity_necessary(&graph(5, &[(0, 1), (1, 2), (1, 3), (3, 4)])));
        assert!(euler_planarity_necessary(&graph(2, &[(0, 1)])));
    }

    fn rooted_tree() -> (Network, TreeAnnotation) {
        let load = |id: &str| Bus::new(id).load(0.into(), 1.into());
        let buses = vec![
            Bus::new("g").generation(ExtRational::Infinity),
            Bus::new("p"),
            Bus::new("q"),
            load("l1"),
            load("l2"),
            load("l3"),
        ];
        let line = |a: &str, b: &str| Line::new(format!("{a}-{b}"), a, b, 1.into(), 1.into());
        let lines = vec![line("g", "p"), line("g", "q"), line("p", "l1"), line("p", "l2"), line("q", "l3")];
        let mut children = BTreeMap::new();
        children.insert("g".to_string(), vec!["p".to_string(), "q".to_string()]);
        children.insert("p".to_string(), vec!["l1".to_string(), "l2".to_string()]);
        children.insert("q".to_string(), vec!["l3".to_string()]);
        (Network::new(buses, lines).unwrap(), TreeAnnotation { root: "g".into(), children })
    }

    #[test]
    fn bare_tree_with_leaf_loads() {
        let (net, ann) = rooted_tree();
        assert!(validate_two_level_tree(&net, &ann).unwrap().holds);
    }

    #[test]
    fn same_level_neighbours_allowed_cross_level_rejected() {
        let (net, ann) = rooted_tree();
        let mut lines = net.lines().to_vec();
        lines.push(Line::new("l2-l3", "l2", "l3", 1.into(), 1.into()));
        let deep = Network::new(net.buses().to_vec(), lines).unwrap();
        // level 2 line between order-adjacent buses l2, l3
        assert!(validate_two_level_tree(&deep, &ann).unwrap().holds);
        assert!(!validate_level_tree(&deep, &ann, 1).unwrap().holds);

        let mut lines = net.lines().to_vec();
        lines.push(Line::new("p-l3", "p", "l3", 1.into(), 1.into()));
        let cross = Network::new(net.buses().to_vec(), lines).unwrap();
        let v = validate_two_level_tree(&cross, &ann).unwrap();
        assert!(!v.holds);
        assert!(matches!(v.witness, Some(Witness::Line { ref line, .. }) if line == "p-l3"));

        let mut lines = net.lines().to_vec();
        lines.push(Line::new("l1-l3", "l1", "l3", 1.into(), 1.into()));
        let skip = Network::new(net.buses().to_vec(), lines).unwrap();
        assert!(!validate_two_level_tree(&skip, &ann).unwrap().holds);
    }

    #[test]
    fn malformed_annotation() {
        let (net, mut ann) = rooted_tree();
        ann.children.insert("zz".into(), vec![]);
        assert_eq!(validate_two_level_tree(&net, &ann), Err(AnnotationError::UnknownBus("zz".into())));
    }
}
