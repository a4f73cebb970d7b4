//! Exact-length relation paths over a directed edge relation, bounded cycle
//! search, and the `2^(n+1) + 1` cycle certificate.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::digraph::Digraph;

/// The directed edge relation `R` is simply a digraph.
pub type EdgeRelationGraph = Digraph;

/// Largest `n` accepted by [`base_case_contradiction`] (walks of length `2^n`).
pub const MAX_SOP_LEVEL: u32 = 16;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SopError {
    #[error("path length must be at least 1")]
    ZeroLength,
    #[error("unknown vertex {0:?}")]
    UnknownVertex(String),
    #[error("invalid path witness: {0}")]
    InvalidWitness(String),
    #[error("witnesses do not meet: first ends at {0:?}, second starts at {1:?}")]
    Mismatch(String, String),
    #[error("level must lie in 1..={MAX_SOP_LEVEL}, got {0}")]
    Level(u32),
    #[error("anchor edge {0} -> {1} is missing")]
    MissingAnchorEdge(String, String),
    #[error("closed walk of length {} through the anchors: {}", .0.len(), .0)]
    WitnessCycle(PathWitness),
    #[error("graph has a directed cycle of length {} within the bound: {}", .0.len(), .0)]
    ShortCycle(PathWitness),
}

/// A walk `v0 -> v1 -> ... -> vk`; its length is the number of steps.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PathWitness {
    pub vertices: Vec<String>,
}

impl PathWitness {
    pub fn new<S: AsRef<str>>(vertices: &[S]) -> Self {
        PathWitness {
            vertices: vertices.iter().map(|s| s.as_ref().to_string()).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.vertices.len().saturating_sub(1)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn start(&self) -> &str {
        &self.vertices[0]
    }

    pub fn end(&self) -> &str {
        self.vertices.last().expect("non-empty witness")
    }

    /// Intermediate vertices.
    pub fn interior(&self) -> &[String] {
        if self.vertices.len() < 2 {
            return &[];
        }
        &self.vertices[1..self.vertices.len() - 1]
    }

    /// Every step is an edge of `g` and there is at least one step.
    pub fn check(&self, g: &Digraph) -> Result<(), SopError> {
        if self.is_empty() {
            return Err(SopError::InvalidWitness("witness has no steps".into()));
        }
        for w in self.vertices.windows(2) {
            if !g.has_edge(&w[0], &w[1]) {
                return Err(SopError::InvalidWitness(format!(
                    "{} -> {} is not an edge",
                    w[0], w[1]
                )));
            }
        }
        Ok(())
    }
}

impl fmt::Display for PathWitness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.vertices.join(" -> "))
    }
}

fn vertex(g: &Digraph, name: &str) -> Result<usize, SopError> {
    g.index_of(name)
        .ok_or_else(|| SopError::UnknownVertex(name.into()))
}

/// Layered reachability: `layers[t][v]` holds the predecessor of `v` on
/// some walk of exactly `t` steps from `src`, or `None` if unreachable.
/// With `backward` set, walks run against the edges.
fn exact_layers(g: &Digraph, src: usize, k: usize, backward: bool) -> Vec<Vec<Option<usize>>> {
    let size = g.vertex_count();
    let mut layers = vec![vec![None; size]; k + 1];
    layers[0][src] = Some(src);
    for t in 0..k {
        let (done, rest) = layers.split_at_mut(t + 1);
        let (cur, next) = (&done[t], &mut rest[0]);
        for u in 0..size {
            if cur[u].is_some() {
                let step = if backward {
                    g.predecessors(u)
                } else {
                    g.successors(u)
                };
                for &v in step {
                    next[v].get_or_insert(u);
                }
            }
        }
    }
    layers
}

fn walk_back(g: &Digraph, layers: &[Vec<Option<usize>>], end: usize) -> PathWitness {
    let mut idx = vec![end];
    let mut cur = end;
    for t in (1..layers.len()).rev() {
        cur = layers[t][cur].expect("reachable");
        idx.push(cur);
    }
    idx.reverse();
    PathWitness {
        vertices: idx.into_iter().map(|i| g.name(i).to_string()).collect(),
    }
}

/// `R_k(x, y)`: a walk of exactly `k` steps from `x` to `y` (vertices may
/// repeat). Returns a witness when one exists.
pub fn r_k_holds(g: &Digraph, x: &str, y: &str, k: usize) -> Result<Option<PathWitness>, SopError> {
    if k == 0 {
        return Err(SopError::ZeroLength);
    }
    let (s, t) = (vertex(g, x)?, vertex(g, y)?);
    let layers = exact_layers(g, s, k, false);
    Ok(layers[k][t].map(|_| walk_back(g, &layers, t)))
}

/// A shortest directed cycle of length `<= limit`, listed from its start
/// and closed by repeating the start.
pub fn shortest_cycle_at_most(g: &Digraph, limit: usize) -> Option<PathWitness> {
    let mut cycle: Vec<String> = g
        .shortest_cycle_within(limit)?
        .iter()
        .map(|&i| g.name(i).to_string())
        .collect();
    cycle.push(cycle[0].clone());
    Some(PathWitness { vertices: cycle })
}

/// Joins witnesses for `R_a(x, y)` and `R_b(y, z)` into one for
/// `R_{a+b}(x, z)`.
pub fn path_concat(
    g: &Digraph,
    first: &PathWitness,
    second: &PathWitness,
) -> Result<PathWitness, SopError> {
    first.check(g)?;
    second.check(g)?;
    if first.end() != second.start() {
        return Err(SopError::Mismatch(
            first.end().into(),
            second.start().into(),
        ));
    }
    let mut vertices = first.vertices.clone();
    vertices.extend_from_slice(&second.vertices[1..]);
    let out = PathWitness { vertices };
    out.check(g)?;
    Ok(out)
}

/// Anchors and level of the base-case dividing check: an edge `c1 -> c2`
/// and the walk length `2^n` on either side of the shared witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DividingConfiguration {
    pub level: u32,
    pub first: String,
    pub second: String,
}

impl DividingConfiguration {
    pub fn new(level: u32, first: &str, second: &str) -> Result<Self, SopError> {
        if level == 0 || level > MAX_SOP_LEVEL {
            return Err(SopError::Level(level));
        }
        if first == second {
            return Err(SopError::InvalidWitness("anchors must be distinct".into()));
        }
        Ok(DividingConfiguration {
            level,
            first: first.into(),
            second: second.into(),
        })
    }

    pub fn walk_length(&self) -> usize {
        1 << self.level
    }

    /// `2^(n+1) + 1`: walk back to the first anchor, the anchor edge, walk on.
    pub fn cycle_length(&self) -> usize {
        2 * self.walk_length() + 1
    }
}

/// No vertex `c` has both `R_{2^n}(c, c1)` and `R_{2^n}(c2, c)`, and the
/// graph has no directed cycle of length `<= 2^(n+1) + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub config: DividingConfiguration,
    pub vertices_checked: usize,
    /// Vertices with a walk of length `2^n` into the first anchor.
    pub into_first: Vec<String>,
    /// Vertices reached by a walk of length `2^n` from the second anchor.
    pub from_second: Vec<String>,
}

/// Searches every vertex for a common witness `c` with `R_{2^n}(c, c1)` and
/// `R_{2^n}(c2, c)`. A witness closes a walk of length `2^(n+1) + 1`, which
/// is returned as [`SopError::WitnessCycle`]. Otherwise the cycle bound is
/// checked and a [`Certificate`] returned.
pub fn base_case_contradiction(
    g: &Digraph,
    config: &DividingConfiguration,
) -> Result<Certificate, SopError> {
    let (c1, c2) = (vertex(g, &config.first)?, vertex(g, &config.second)?);
    if !g.has_edge(&config.first, &config.second) {
        return Err(SopError::MissingAnchorEdge(
            config.first.clone(),
            config.second.clone(),
        ));
    }
    let k = config.walk_length();
    let forward = exact_layers(g, c2, k, false);
    let backward = exact_layers(g, c1, k, true);
    let reach_from_second: BTreeSet<usize> = (0..g.vertex_count())
        .filter(|&v| forward[k][v].is_some())
        .collect();
    let into_first: BTreeSet<usize> = (0..g.vertex_count())
        .filter(|&v| backward[k][v].is_some())
        .collect();
    if let Some(&c) = into_first.intersection(&reach_from_second).next() {
        let name = g.name(c);
        let back = r_k_holds(g, name, &config.first, k)?.expect("witness in set");
        let anchor = PathWitness::new(&[config.first.as_str(), config.second.as_str()]);
        let on = walk_back(g, &forward, c);
        let cycle = path_concat(g, &path_concat(g, &back, &anchor)?, &on)?;
        debug_assert_eq!(cycle.len(), config.cycle_length());
        return Err(SopError::WitnessCycle(cycle));
    }
    if let Some(cycle) = shortest_cycle_at_most(g, config.cycle_length()) {
        return Err(SopError::ShortCycle(cycle));
    }
    let names = |s: &BTreeSet<usize>| s.iter().map(|&i| g.name(i).to_string()).collect();
    Ok(Certificate {
        config: config.clone(),
        vertices_checked: g.vertex_count(),
        into_first: names(&into_first),
        from_second: names(&reach_from_second),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path(n: usize) -> Digraph {
        let names: Vec<String> = (0..=n).map(|i| format!("v{i}")).collect();
        let edges: Vec<(&str, &str)> = names
            .windows(2)
            .map(|w| (w[0].as_str(), w[1].as_str()))
            .collect();
        Digraph::from_edges(&edges)
    }

    fn cycle(n: usize) -> Digraph {
        let names: Vec<String> = (0..n).map(|i| format!("v{i}")).collect();
        let edges: Vec<(&str, &str)> = (0..n)
            .map(|i| (names[i].as_str(), names[(i + 1) % n].as_str()))
            .collect();
        Digraph::from_edges(&edges)
    }

    #[test]
    fn exact_length_paths() {
        let g = Digraph::from_edges(&[("a", "b"), ("b", "c")]);
        assert!(r_k_holds(&g, "a", "b", 1).unwrap().is_some());
        let w = r_k_holds(&g, "a", "c", 2).unwrap().unwrap();
        assert_eq!(w.interior(), &["b".to_string()]);
        assert!(r_k_holds(&g, "c", "a", 2).unwrap().is_none());
        assert!(r_k_holds(&g, "a", "c", 1).unwrap().is_none());
        assert_eq!(r_k_holds(&g, "a", "b", 0), Err(SopError::ZeroLength));
    }

    #[test]
    fn walks_may_repeat_vertices() {
        let g = cycle(3);
        let w = r_k_holds(&g, "v0", "v1", 4).unwrap().unwrap();
        assert_eq!(w.len(), 4);
        w.check(&g).unwrap();
    }

    #[test]
    fn cycle_search() {
        let g = cycle(3);
        assert_eq!(shortest_cycle_at_most(&g, 3).unwrap().len(), 3);
        assert!(shortest_cycle_at_most(&g, 2).is_none());
    }

    #[test]
    fn concatenation() {
        let g = path(4);
        let ab = r_k_holds(&g, "v0", "v1", 1).unwrap().unwrap();
        let bc = r_k_holds(&g, "v1", "v2", 1).unwrap().unwrap();
        assert_eq!(path_concat(&g, &ab, &bc).unwrap().len(), 2);
        let ac = r_k_holds(&g, "v0", "v2", 2).unwrap().unwrap();
        let ce = r_k_holds(&g, "v2", "v4", 2).unwrap().unwrap();
        let ae = path_concat(&g, &ac, &ce).unwrap();
        assert_eq!((ae.len(), ae.start(), ae.end()), (4, "v0", "v4"));
        assert!(matches!(
            path_concat(&g, &ab, &ce),
            Err(SopError::Mismatch(..))
        ));
        let bogus = PathWitness::new(&["v0", "v2"]);
        assert!(matches!(
            path_concat(&g, &bogus, &ce),
            Err(SopError::InvalidWitness(_))
        ));
    }

    #[test]
    fn five_cycle_breaks_the_base_case() {
        let g = cycle(5);
        let cfg = DividingConfiguration::new(1, "v0", "v1").unwrap();
        match base_case_contradiction(&g, &cfg) {
            Err(SopError::WitnessCycle(c)) => {
                assert_eq!(c.len(), 5);
                assert_eq!(c.start(), c.end());
                c.check(&g).unwrap();
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn missing_anchor_edge() {
        let g = path(3);
        let cfg = DividingConfiguration::new(1, "v1", "v0").unwrap();
        assert!(matches!(
            base_case_contradiction(&g, &cfg),
            Err(SopError::MissingAnchorEdge(..))
        ));
        assert!(DividingConfiguration::new(0, "a", "b").is_err());
    }

    #[test]
    fn long_cycle_is_certified() {
        let g = cycle(7);
        let cfg = DividingConfiguration::new(1, "v0", "v1").unwrap();
        let cert = base_case_contradiction(&g, &cfg).unwrap();
        assert_eq!(cert.into_first, vec!["v5".to_string()]);
        assert_eq!(cert.from_second, vec!["v3".to_string()]);
    }

    #[test]
    fn short_cycle_elsewhere_is_reported() {
        let mut g = path(2);
        g.add_edge("x", "y");
        g.add_edge("y", "x");
        let cfg = DividingConfiguration::new(1, "v0", "v1").unwrap();
        assert!(
            matches!(base_case_contradiction(&g, &cfg), Err(SopError::ShortCycle(c)) if c.len() == 2)
        );
    }
}
