//! A small named digraph with breadth-first utilities.

use std::collections::{BTreeMap, VecDeque};

use serde::Serialize;

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct Digraph {
    names: Vec<String>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
    #[serde(skip)]
    out: Vec<Vec<usize>>,
    #[serde(skip)]
    inc: Vec<Vec<usize>>,
}

impl Digraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges<S: AsRef<str>>(edges: &[(S, S)]) -> Self {
        let mut g = Self::new();
        for (u, v) in edges {
            g.add_edge(u.as_ref(), v.as_ref());
        }
        g
    }

    /// Adds the vertex if missing and returns its index.
    pub fn add_vertex(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), i);
        self.out.push(Vec::new());
        self.inc.push(Vec::new());
        i
    }

    /// Adds `u -> v`, creating endpoints as needed. Parallel edges collapse.
    pub fn add_edge(&mut self, u: &str, v: &str) {
        let (a, b) = (self.add_vertex(u), self.add_vertex(v));
        if !self.out[a].contains(&b) {
            self.out[a].push(b);
            self.inc[b].push(a);
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn successors(&self, i: usize) -> &[usize] {
        &self.out[i]
    }

    pub fn predecessors(&self, i: usize) -> &[usize] {
        &self.inc[i]
    }

    pub fn has_edge(&self, u: &str, v: &str) -> bool {
        match (self.index_of(u), self.index_of(v)) {
            (Some(a), Some(b)) => self.out[a].contains(&b),
            _ => false,
        }
    }

    /// Edges as name pairs, in insertion order of their sources.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut e = Vec::with_capacity(self.edge_count());
        for (a, outs) in self.out.iter().enumerate() {
            for &b in outs {
                e.push((self.names[a].clone(), self.names[b].clone()));
            }
        }
        e
    }

    /// Unweighted shortest distances from `src`, with BFS parents.
    pub fn bfs(&self, src: usize) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
        let mut dist = vec![None; self.vertex_count()];
        let mut parent = vec![None; self.vertex_count()];
        let mut queue = VecDeque::new();
        dist[src] = Some(0);
        queue.push_back(src);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].unwrap();
            for &v in &self.out[u] {
                if dist[v].is_none() {
                    dist[v] = Some(du + 1);
                    parent[v] = Some(u);
                    queue.push_back(v);
                }
            }
        }
        (dist, parent)
    }

    /// A shortest directed cycle, as its vertex sequence without repeating
    /// the start, if one of length at most `limit` exists.
    pub fn shortest_cycle_within(&self, limit: usize) -> Option<Vec<usize>> {
        let mut best: Option<Vec<usize>> = None;
        for v in 0..self.vertex_count() {
            let (dist, parent) = self.bfs(v);
            for &u in &self.inc[v] {
                let Some(d) = dist[u] else { continue };
                let len = d + 1;
                if len > limit || best.as_ref().is_some_and(|b| b.len() <= len) {
                    continue;
                }
                let mut cycle = vec![u];
                let mut cur = u;
                while let Some(p) = parent[cur] {
                    cycle.push(p);
                    cur = p;
                }
                cycle.reverse();
                best = Some(cycle);
            }
        }
        best
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_cycle() {
        let g = Digraph::from_edges(&[("a", "b"), ("b", "c"), ("c", "a")]);
        let c = g.shortest_cycle_within(3).unwrap();
        assert_eq!(c.len(), 3);
        assert!(g.shortest_cycle_within(2).is_none());
    }

    #[test]
    fn picks_shortest_cycle() {
        let g = Digraph::from_edges(&[("a", "b"), ("b", "c"), ("c", "d"), ("d", "a"), ("c", "b")]);
        let c = g.shortest_cycle_within(10).unwrap();
        assert_eq!(c.len(), 2);
    }

    #[test]
    fn self_loop_is_a_one_cycle() {
        let g = Digraph::from_edges(&[("a", "a")]);
        assert_eq!(g.shortest_cycle_within(1), Some(vec![0]));
    }

    #[test]
    fn bfs_distances() {
        let g = Digraph::from_edges(&[("a", "b"), ("b", "c"), ("a", "c"), ("c", "d")]);
        let (d, _) = g.bfs(0);
        assert_eq!(d, vec![Some(0), Some(1), Some(1), Some(2)]);
    }
}
