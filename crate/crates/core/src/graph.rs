//! Small graph helpers over dense `usize` node ids.

use petgraph::algo::tarjan_scc;
use petgraph::graph::{DiGraph, NodeIndex};

/// Strongly connected components: `id[v]` is the component of node `v`.
pub struct Components {
    pub id: Vec<usize>,
    pub count: usize,
}

impl Components {
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.count];
        for (v, &c) in self.id.iter().enumerate() {
            out[c].push(v);
        }
        out
    }
}

pub fn strongly_connected(n: usize, edges: &[(usize, usize)]) -> Components {
    let mut g: DiGraph<(), ()> = DiGraph::with_capacity(n, edges.len());
    for _ in 0..n {
        g.add_node(());
    }
    for &(u, v) in edges {
        g.add_edge(NodeIndex::new(u), NodeIndex::new(v), ());
    }
    let sccs = tarjan_scc(&g);
    let mut id = vec![0; n];
    for (c, comp) in sccs.iter().enumerate() {
        for v in comp {
            id[v.index()] = c;
        }
    }
    Components {
        id,
        count: sccs.len(),
    }
}

/// Nodes from which some node in `targets` is reachable (targets included).
pub fn can_reach(n: usize, edges: &[(usize, usize)], targets: &[bool]) -> Vec<bool> {
    let mut preds = vec![Vec::new(); n];
    for &(u, v) in edges {
        preds[v].push(u);
    }
    let mut seen = targets.to_vec();
    let mut stack: Vec<usize> = (0..n).filter(|&v| targets[v]).collect();
    while let Some(v) = stack.pop() {
        for &u in &preds[v] {
            if !seen[u] {
                seen[u] = true;
                stack.push(u);
            }
        }
    }
    seen
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn components_and_reachability() {
        let edges = [(0, 1), (1, 0), (1, 2), (3, 3)];
        let c = strongly_connected(4, &edges);
        assert_eq!(c.id[0], c.id[1]);
        assert_ne!(c.id[1], c.id[2]);
        assert_eq!(c.count, 3);
        let r = can_reach(4, &edges, &[false, false, true, false]);
        assert_eq!(r, vec![true, true, true, false]);
    }
}
