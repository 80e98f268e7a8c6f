use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use super::{ElementKind, Netlist, GROUND};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    /// Node group with no DC path to ground.
    FloatingNode,
    /// Loop made only of ideal voltage sources (and inductors, shorts at DC).
    SourceLoop,
    /// Node group attached to the rest of the circuit only through current sources.
    CurrentSourceCutset,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub nodes: Vec<String>,
    pub elements: Vec<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            DiagnosticKind::FloatingNode => {
                write!(f, "floating node(s) {} have no DC path to ground", self.nodes.join(", "))
            }
            DiagnosticKind::SourceLoop => write!(
                f,
                "source loop: voltage sources {} form a loop",
                self.elements.join(", ")
            ),
            DiagnosticKind::CurrentSourceCutset => write!(
                f,
                "current-source cutset: node(s) {} are fed only by {}",
                self.nodes.join(", "),
                self.elements.join(", ")
            ),
        }
    }
}

pub(crate) struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub(crate) fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    pub(crate) fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    /// Returns false when `a` and `b` were already joined.
    pub(crate) fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        // keep the smaller index as root so ground (index 0) stays a root
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Node list with ground first, so ground always has index 0.
pub(crate) fn node_index(netlist: &Netlist) -> (Vec<String>, BTreeMap<String, usize>) {
    let mut names = vec![GROUND.to_string()];
    names.extend(netlist.nodes.iter().filter(|n| *n != GROUND).cloned());
    let index = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect();
    (names, index)
}

/// Checks that the circuit has a unique DC solution structure.
///
/// Returns an empty list when every node has a DC path to ground, no loop of
/// ideal voltage sources exists and no node group is fed only by current
/// sources.
pub fn validate(netlist: &Netlist) -> Vec<Diagnostic> {
    let (names, index) = node_index(netlist);
    let idx = |n: &str| index[n];
    let mut diags = Vec::new();

    // inductors are shorts at DC, so they join nodes before sources are added
    let mut shorts = UnionFind::new(names.len());
    for e in &netlist.elements {
        if let ElementKind::Inductor { nodes, .. } = &e.kind {
            shorts.union(idx(&nodes[0]), idx(&nodes[1]));
        }
    }
    let mut loop_groups: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    let mut closing: Vec<(String, usize)> = Vec::new();
    for e in &netlist.elements {
        if let ElementKind::VoltageSource { nodes, .. } = &e.kind {
            if !shorts.union(idx(&nodes[0]), idx(&nodes[1])) {
                closing.push((e.name.clone(), idx(&nodes[0])));
            }
        }
    }
    for e in &netlist.elements {
        if let ElementKind::VoltageSource { nodes, .. } = &e.kind {
            let root = shorts.find(idx(&nodes[0]));
            loop_groups.entry(root).or_default().push(e.name.clone());
        }
    }
    for (name, node) in closing {
        let root = shorts.find(node);
        let mut members = loop_groups.get(&root).cloned().unwrap_or_default();
        // the closing source first, the rest of its shorted group after
        members.retain(|m| *m != name);
        members.insert(0, name);
        let nodes: Vec<String> = names
            .iter()
            .enumerate()
            .filter(|(i, _)| shorts.find(*i) == root)
            .map(|(_, n)| n.clone())
            .collect();
        diags.push(Diagnostic {
            kind: DiagnosticKind::SourceLoop,
            nodes,
            elements: members,
        });
    }

    // DC-conductive connectivity
    let mut dc = UnionFind::new(names.len());
    for e in &netlist.elements {
        match &e.kind {
            ElementKind::Resistor { nodes, .. }
            | ElementKind::Inductor { nodes, .. }
            | ElementKind::VoltageSource { nodes, .. } => {
                dc.union(idx(&nodes[0]), idx(&nodes[1]));
            }
            ElementKind::Fet { drain, source, .. } => {
                dc.union(idx(drain), idx(source));
            }
            _ => {}
        }
    }
    let mut groups: BTreeMap<usize, BTreeSet<usize>> = BTreeMap::new();
    for i in 0..names.len() {
        groups.entry(dc.find(i)).or_default().insert(i);
    }
    let ground_root = dc.find(0);
    for (root, members) in groups {
        if root == ground_root {
            continue;
        }
        let mut feeding = Vec::new();
        for e in &netlist.elements {
            if let ElementKind::CurrentSource { nodes, .. } = &e.kind {
                let inside = nodes.iter().filter(|n| members.contains(&idx(n))).count();
                if inside == 1 {
                    feeding.push(e.name.clone());
                }
            }
        }
        let nodes: Vec<String> = members.iter().map(|&i| names[i].clone()).collect();
        diags.push(if feeding.is_empty() {
            Diagnostic {
                kind: DiagnosticKind::FloatingNode,
                nodes,
                elements: Vec::new(),
            }
        } else {
            Diagnostic {
                kind: DiagnosticKind::CurrentSourceCutset,
                nodes,
                elements: feeding,
            }
        });
    }
    diags
}
