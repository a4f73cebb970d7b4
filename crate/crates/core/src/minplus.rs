//! All-pairs min-plus closure with path reconstruction.

/// Shortest chain lengths between every ordered pair of nodes of a small
/// weighted digraph, computed by Floyd–Warshall over the (min, +) semiring.
#[derive(Clone, Debug)]
pub struct Closure {
    size: usize,
    cap: Option<u64>,
    dist: Vec<Option<u64>>,
    next: Vec<Option<usize>>,
}

impl Closure {
    /// Builds the closure of the arcs reported by `weight(from, to)`.
    ///
    /// With `cap = Some(c)`, every length above `c` is stored as `c`; lengths
    /// up to `c` stay exact.
    pub fn new<F>(size: usize, cap: Option<u64>, weight: F) -> Self
    where
        F: Fn(usize, usize) -> Option<u64>,
    {
        let clamp = |v: u64| cap.map_or(v, |c| v.min(c));
        let mut dist = vec![None; size * size];
        let mut next = vec![None; size * size];
        for i in 0..size {
            dist[i * size + i] = Some(0);
            for j in 0..size {
                if i == j {
                    continue;
                }
                if let Some(w) = weight(i, j) {
                    dist[i * size + j] = Some(clamp(w));
                    next[i * size + j] = Some(j);
                }
            }
        }
        for k in 0..size {
            for i in 0..size {
                let Some(ik) = dist[i * size + k] else {
                    continue;
                };
                for j in 0..size {
                    let Some(kj) = dist[k * size + j] else {
                        continue;
                    };
                    let through = clamp(ik + kj);
                    if dist[i * size + j].is_none_or(|cur| through < cur) {
                        dist[i * size + j] = Some(through);
                        next[i * size + j] = next[i * size + k];
                    }
                }
            }
        }
        Closure {
            size,
            cap,
            dist,
            next,
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Shortest chain length from `from` to `to`, `None` when unreachable.
    pub fn dist(&self, from: usize, to: usize) -> Option<u64> {
        self.dist[from * self.size + to]
    }

    /// Node sequence of a shortest chain, endpoints included.
    ///
    /// Returns `None` when `to` is unreachable or the stored length sits at
    /// the cap (the chain is then not tracked exactly).
    pub fn path(&self, from: usize, to: usize) -> Option<Vec<usize>> {
        let d = self.dist(from, to)?;
        if self.cap.is_some_and(|c| d >= c) {
            return None;
        }
        let mut path = vec![from];
        let mut cur = from;
        while cur != to {
            cur = self.next[cur * self.size + to]?;
            path.push(cur);
        }
        Some(path)
    }

    /// Lightest closed chain that uses at least one arc, as
    /// `(length, nodes)` with the start node repeated at the end.
    pub fn min_cycle<F>(&self, weight: F) -> Option<(u64, Vec<usize>)>
    where
        F: Fn(usize, usize) -> Option<u64>,
    {
        let mut best: Option<(u64, usize, usize)> = None;
        for i in 0..self.size {
            for j in 0..self.size {
                if i == j {
                    continue;
                }
                let (Some(w), Some(back)) = (weight(i, j), self.dist(j, i)) else {
                    continue;
                };
                let total = w + back;
                if best.is_none_or(|(b, _, _)| total < b) {
                    best = Some((total, i, j));
                }
            }
        }
        let (total, i, j) = best?;
        let mut nodes = vec![i];
        match self.path(j, i) {
            Some(back) => nodes.extend(back),
            None => nodes.extend([j, i]),
        }
        Some((total, nodes))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arcs(list: &[(usize, usize, u64)]) -> impl Fn(usize, usize) -> Option<u64> + '_ {
        move |i, j| {
            list.iter()
                .filter(|&&(a, b, _)| a == i && b == j)
                .map(|&(_, _, w)| w)
                .min()
        }
    }

    #[test]
    fn shortest_chain_and_path() {
        let w = [(0, 1, 3), (1, 2, 2), (0, 2, 9), (2, 3, 1)];
        let c = Closure::new(4, None, arcs(&w));
        assert_eq!(c.dist(0, 2), Some(5));
        assert_eq!(c.dist(0, 3), Some(6));
        assert_eq!(c.dist(3, 0), None);
        assert_eq!(c.path(0, 3), Some(vec![0, 1, 2, 3]));
    }

    #[test]
    fn cap_keeps_small_values_exact() {
        let w = [(0, 1, 4), (1, 2, 4)];
        let c = Closure::new(3, Some(5), arcs(&w));
        assert_eq!(c.dist(0, 1), Some(4));
        assert_eq!(c.dist(0, 2), Some(5));
        assert_eq!(c.path(0, 2), None);
    }

    #[test]
    fn min_cycle_finds_lightest() {
        let w = [(0, 1, 1), (1, 2, 1), (2, 0, 5), (1, 0, 4)];
        let c = Closure::new(3, None, arcs(&w));
        let (len, nodes) = c.min_cycle(arcs(&w)).unwrap();
        assert_eq!(len, 5);
        assert_eq!(nodes.first(), nodes.last());
    }
}
