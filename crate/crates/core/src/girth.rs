//! Directed graphs without directed cycles of length `<= n`, described by
//! the directed distance of every pair of points, and the odd-girth analogue
//! for undirected graphs.
//!
//! With `nstar = ceil(n / 2)`, a pair of points carries either a directed
//! distance `d` (a shortest path of length `d` in one direction) or, when
//! `n` is odd, the bidirected distance `nstar`. Directed distances are at
//! most `nstar`, and strictly below it when `n` is odd.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::digraph::Digraph;
use crate::minplus::Closure;
use crate::spaces::{check_name, Distance, PartialDistanceSpec, SpaceError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GirthError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("invalid assignment {0}")]
    InvalidAssignment(String),
    #[error("pair {0:?}-{1:?} assigned twice")]
    DuplicatePair(String, String),
    #[error("pair {0:?}-{1:?} has no assignment")]
    MissingPair(String, String),
    #[error("inconsistent distances: {0}")]
    Inconsistent(ConsistencyReport),
    #[error("directed cycle of length {} within the bound: {}", .0.len(), .0.join(" -> "))]
    CycleFound(Vec<String>),
    #[error("no path of length <= nstar between {0:?} and {1:?}")]
    PairBeyondNstar(String, String),
    #[error("odd-girth bound must be odd, got {0}")]
    EvenBound(Distance),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("realization check failed: {0}")]
    VerificationFailed(String),
}

pub fn nstar_of(n: Distance) -> Distance {
    n.div_ceil(2)
}

/// Type of one pair, seen from the lower-indexed point.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
enum PairType {
    /// Lower index to higher index.
    Forward(Distance),
    Backward(Distance),
    Bidirected,
}

/// Directed distance of one pair of points, by name.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DirectedDistance {
    Directed {
        from: String,
        to: String,
        length: Distance,
    },
    Bidirected {
        a: String,
        b: String,
    },
}

impl DirectedDistance {
    pub fn directed(from: &str, to: &str, length: Distance) -> Self {
        DirectedDistance::Directed {
            from: from.into(),
            to: to.into(),
            length,
        }
    }

    pub fn bidirected(a: &str, b: &str) -> Self {
        DirectedDistance::Bidirected {
            a: a.into(),
            b: b.into(),
        }
    }

    fn endpoints(&self) -> (&str, &str) {
        match self {
            DirectedDistance::Directed { from, to, .. } => (from, to),
            DirectedDistance::Bidirected { a, b } => (a, b),
        }
    }
}

impl fmt::Display for DirectedDistance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DirectedDistance::Directed { from, to, length } => {
                write!(f, "{from} -> {to}: {length}")
            }
            DirectedDistance::Bidirected { a, b } => write!(f, "{a} <-> {b}"),
        }
    }
}

/// Directed distances for every pair of a finite point set.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct DirectedDistanceStructure {
    bound: Distance,
    points: Vec<String>,
    #[serde(skip)]
    pairs: BTreeMap<(usize, usize), PairType>,
}

impl DirectedDistanceStructure {
    /// Requires exactly one assignment for every pair of distinct points.
    pub fn new(
        bound: Distance,
        points: Vec<String>,
        assignments: impl IntoIterator<Item = DirectedDistance>,
    ) -> Result<Self, GirthError> {
        if bound == 0 {
            return Err(SpaceError::ZeroBound.into());
        }
        let mut sorted = BTreeSet::new();
        for p in &points {
            check_name(p)?;
            if !sorted.insert(p.clone()) {
                return Err(SpaceError::DuplicatePoint(p.clone()).into());
            }
        }
        let points: Vec<String> = sorted.into_iter().collect();
        let mut s = DirectedDistanceStructure {
            bound,
            points,
            pairs: BTreeMap::new(),
        };
        for a in assignments {
            s.insert(a)?;
        }
        let k = s.points.len();
        for i in 0..k {
            for j in i + 1..k {
                if !s.pairs.contains_key(&(i, j)) {
                    return Err(GirthError::MissingPair(
                        s.points[i].clone(),
                        s.points[j].clone(),
                    ));
                }
            }
        }
        Ok(s)
    }

    fn insert(&mut self, a: DirectedDistance) -> Result<(), GirthError> {
        let (p, q) = a.endpoints();
        let i = self
            .index_of(p)
            .ok_or_else(|| SpaceError::UnknownPoint(p.into()))?;
        let j = self
            .index_of(q)
            .ok_or_else(|| SpaceError::UnknownPoint(q.into()))?;
        if i == j {
            return Err(SpaceError::SelfPair(p.into()).into());
        }
        let (n, nstar) = (self.bound, self.nstar());
        let ty = match a {
            DirectedDistance::Directed { length, .. } => {
                let max = if n % 2 == 1 { nstar - 1 } else { nstar };
                if length == 0 || length > max {
                    return Err(GirthError::InvalidAssignment(format!(
                        "{a}: directed length must lie in 1..={max} for n = {n}"
                    )));
                }
                if i < j {
                    PairType::Forward(length)
                } else {
                    PairType::Backward(length)
                }
            }
            DirectedDistance::Bidirected { .. } => {
                if n % 2 == 0 {
                    return Err(GirthError::InvalidAssignment(format!(
                        "{a}: bidirected distances need odd n, got {n}"
                    )));
                }
                PairType::Bidirected
            }
        };
        let key = (i.min(j), i.max(j));
        if self.pairs.insert(key, ty).is_some() {
            return Err(GirthError::DuplicatePair(
                self.points[key.0].clone(),
                self.points[key.1].clone(),
            ));
        }
        Ok(())
    }

    pub fn bound(&self) -> Distance {
        self.bound
    }

    pub fn nstar(&self) -> Distance {
        nstar_of(self.bound)
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.points.binary_search_by(|p| p.as_str().cmp(name)).ok()
    }

    fn describe(&self, i: usize, j: usize, ty: PairType) -> DirectedDistance {
        let (p, q) = (self.points[i].clone(), self.points[j].clone());
        match ty {
            PairType::Forward(length) => DirectedDistance::Directed {
                from: p,
                to: q,
                length,
            },
            PairType::Backward(length) => DirectedDistance::Directed {
                from: q,
                to: p,
                length,
            },
            PairType::Bidirected => DirectedDistance::Bidirected { a: p, b: q },
        }
    }

    /// All assignments, ordered by the sorted pair of endpoint names.
    pub fn assignments(&self) -> Vec<DirectedDistance> {
        self.pairs
            .iter()
            .map(|(&(i, j), &ty)| self.describe(i, j, ty))
            .collect()
    }

    pub fn get(&self, p: &str, q: &str) -> Option<DirectedDistance> {
        let (i, j) = (self.index_of(p)?, self.index_of(q)?);
        let key = (i.min(j), i.max(j));
        self.pairs
            .get(&key)
            .map(|&ty| self.describe(key.0, key.1, ty))
    }

    /// Length of the arc from `i` to `j`, if the pair points that way.
    fn arc(&self, i: usize, j: usize) -> Option<u64> {
        if i == j {
            return None;
        }
        let ty = *self.pairs.get(&(i.min(j), i.max(j)))?;
        let forward = i < j;
        match ty {
            PairType::Forward(d) if forward => Some(u64::from(d)),
            PairType::Backward(d) if !forward => Some(u64::from(d)),
            PairType::Bidirected => Some(u64::from(self.nstar())),
            _ => None,
        }
    }

    /// Substructure on the named points.
    pub fn restrict<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, GirthError> {
        let keep: BTreeSet<&str> = names.iter().map(|s| s.as_ref()).collect();
        for k in &keep {
            if self.index_of(k).is_none() {
                return Err(SpaceError::UnknownPoint(k.to_string()).into());
            }
        }
        let assignments = self.assignments().into_iter().filter(|a| {
            let (p, q) = a.endpoints();
            keep.contains(p) && keep.contains(q)
        });
        Self::new(
            self.bound,
            keep.iter().map(|s| s.to_string()).collect(),
            assignments,
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DdViolation {
    /// A chain of total length `<= floor(n/2)` from `from` to `to` beats or
    /// contradicts the pair's assignment.
    ChainShortcut {
        chain: Vec<String>,
        chain_length: Distance,
        assigned: DirectedDistance,
    },
    /// Assigned distances close up into a directed cycle of length `<= n`.
    ShortCycle {
        cycle: Vec<String>,
        length: Distance,
    },
}

impl fmt::Display for DdViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DdViolation::ChainShortcut {
                chain,
                chain_length,
                assigned,
            } => {
                write!(
                    f,
                    "chain {} of length {chain_length} against {assigned}",
                    chain.join(" -> ")
                )
            }
            DdViolation::ShortCycle { cycle, length } => {
                write!(f, "cycle {} of length {length}", cycle.join(" -> "))
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub violations: Vec<DdViolation>,
}

impl ConsistencyReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ConsistencyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        let parts: Vec<String> = self.violations.iter().map(ToString::to_string).collect();
        write!(f, "{}", parts.join("; "))
    }
}

fn names(points: &[String], idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| points[i].clone()).collect()
}

/// Checks the two consistency criteria: no chain of total length
/// `<= floor(n/2)` may be shorter than, or point against, the assigned
/// distance of its endpoints; and no chain of assigned distances may close
/// a directed cycle of length `<= n` (bidirected pairs count both ways).
pub fn dd_validate(s: &DirectedDistanceStructure) -> ConsistencyReport {
    let n = u64::from(s.bound);
    let half = n / 2;
    let k = s.len();
    let closure = Closure::new(k, Some(n + 1), |i, j| s.arc(i, j));
    let mut violations = Vec::new();
    for a in 0..k {
        for b in 0..k {
            if a == b {
                continue;
            }
            let Some(sp) = closure.dist(a, b) else {
                continue;
            };
            if sp > half {
                continue;
            }
            if s.arc(a, b) != Some(sp) || s.arc(b, a).is_some() {
                let key = (a.min(b), a.max(b));
                violations.push(DdViolation::ChainShortcut {
                    chain: names(&s.points, &closure.path(a, b).expect("short chain")),
                    chain_length: sp as Distance,
                    assigned: s.describe(key.0, key.1, s.pairs[&key]),
                });
            }
        }
    }
    if let Some((len, cycle)) = closure.min_cycle(|i, j| s.arc(i, j)) {
        if len <= n {
            violations.push(DdViolation::ShortCycle {
                cycle: names(&s.points, &cycle),
                length: len as Distance,
            });
        }
    }
    ConsistencyReport { violations }
}

/// A digraph realizing a directed-distance structure on its original points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RealizedDigraph {
    pub bound: Distance,
    pub graph: Digraph,
    pub original: Vec<String>,
}

fn add_path(g: &mut Digraph, from: usize, to: usize, length: Distance, tag: &str) {
    let mut prev = g.name(from).to_string();
    for t in 1..length {
        let v = format!("~{tag}.{t}");
        g.add_edge(&prev, &v);
        prev = v;
    }
    let last = g.name(to).to_string();
    g.add_edge(&prev, &last);
}

/// Realizes the structure: for a pair at directed distance `d` from `a` to
/// `b`, a path of length `d` from `a` to `b` and one of length `n + 1 - d`
/// back. Bidirected pairs get a path of length `nstar` each way.
///
/// Gadget vertices are named `~i.j.t` (point indices and step) for the path
/// from point `i` to point `j`. The result is checked for directed cycles of
/// length `<= n` and exact distances before it is returned.
pub fn dd_realize(s: &DirectedDistanceStructure) -> Result<RealizedDigraph, GirthError> {
    let report = dd_validate(s);
    if !report.is_ok() {
        return Err(GirthError::Inconsistent(report));
    }
    let n = s.bound;
    let mut g = Digraph::new();
    for p in &s.points {
        g.add_vertex(p);
    }
    for (&(i, j), &ty) in &s.pairs {
        let (from, to, d) = match ty {
            PairType::Forward(d) => (i, j, d),
            PairType::Backward(d) => (j, i, d),
            PairType::Bidirected => (i, j, s.nstar()),
        };
        add_path(&mut g, from, to, d, &format!("{from}.{to}"));
        add_path(&mut g, to, from, n + 1 - d, &format!("{to}.{from}"));
    }
    if let Some(cycle) = g.shortest_cycle_within(n as usize) {
        return Err(GirthError::VerificationFailed(format!(
            "realization has a directed cycle of length {}",
            cycle.len()
        )));
    }
    for (&(i, j), &ty) in &s.pairs {
        let (di, _) = g.bfs(i);
        let (dj, _) = g.bfs(j);
        let (ij, ji) = (di[j], dj[i]);
        let want = match ty {
            PairType::Forward(d) => ij == Some(d as usize),
            PairType::Backward(d) => ji == Some(d as usize),
            PairType::Bidirected => {
                ij == Some(s.nstar() as usize) && ji == Some(s.nstar() as usize)
            }
        };
        if !want {
            return Err(GirthError::VerificationFailed(format!(
                "distances between {} and {} are {ij:?} / {ji:?}, expected {}",
                s.points[i],
                s.points[j],
                s.describe(i, j, ty)
            )));
        }
    }
    Ok(RealizedDigraph {
        bound: n,
        graph: g,
        original: s.points.clone(),
    })
}

/// Reads off the directed distance of every pair of vertices of `g`.
pub fn dd_from_digraph(g: &Digraph, n: Distance) -> Result<DirectedDistanceStructure, GirthError> {
    dd_from_digraph_on(g, n, g.names())
}

/// Like [`dd_from_digraph`], restricted to the named vertices; paths may run
/// through any vertex of `g`.
pub fn dd_from_digraph_on<S: AsRef<str>>(
    g: &Digraph,
    n: Distance,
    points: &[S],
) -> Result<DirectedDistanceStructure, GirthError> {
    if let Some(cycle) = g.shortest_cycle_within(n as usize) {
        return Err(GirthError::CycleFound(
            cycle.iter().map(|&v| g.name(v).to_string()).collect(),
        ));
    }
    let nstar = nstar_of(n) as usize;
    let idx: Vec<usize> = points
        .iter()
        .map(|p| {
            g.index_of(p.as_ref())
                .ok_or_else(|| GirthError::from(SpaceError::UnknownPoint(p.as_ref().into())))
        })
        .collect::<Result<_, _>>()?;
    let dists: Vec<Vec<Option<usize>>> = idx.iter().map(|&v| g.bfs(v).0).collect();
    let mut out = Vec::new();
    for x in 0..idx.len() {
        for y in x + 1..idx.len() {
            let (a, b) = (points[x].as_ref(), points[y].as_ref());
            let ab = dists[x][idx[y]].filter(|&d| d <= nstar);
            let ba = dists[y][idx[x]].filter(|&d| d <= nstar);
            let entry = match (ab, ba) {
                (None, None) => return Err(GirthError::PairBeyondNstar(a.into(), b.into())),
                (Some(d), None) if !(n % 2 == 1 && d == nstar) => {
                    DirectedDistance::directed(a, b, d as Distance)
                }
                (None, Some(d)) if !(n % 2 == 1 && d == nstar) => {
                    DirectedDistance::directed(b, a, d as Distance)
                }
                // both directions within nstar and no cycle <= n: odd n, both nstar
                _ => DirectedDistance::bidirected(a, b),
            };
            out.push(entry);
        }
    }
    DirectedDistanceStructure::new(
        n,
        points.iter().map(|p| p.as_ref().to_string()).collect(),
        out,
    )
}

/// Shortest chains in `s` restricted to `keep`, never stepping directly
/// between a point of `xs` and a point of `ys`.
fn through_base_closure(
    s: &DirectedDistanceStructure,
    keep: &[usize],
    xs: &BTreeSet<usize>,
    ys: &BTreeSet<usize>,
) -> Closure {
    let cap = u64::from(s.bound) + 1;
    Closure::new(keep.len(), Some(cap), |i, j| {
        let (a, b) = (keep[i], keep[j]);
        if (xs.contains(&a) && ys.contains(&b)) || (ys.contains(&a) && xs.contains(&b)) {
            return None;
        }
        s.arc(a, b)
    })
}

/// Free amalgam of two structures sharing the points they have in common.
///
/// A cross pair gets the length and direction of the shortest chain through
/// the shared points when that chain has length `<= nstar`; otherwise it
/// gets `nstar`, bidirected for odd `n` and pointing from the
/// lexicographically smaller name to the larger for even `n`.
pub fn dd_free_amalgam(
    left: &DirectedDistanceStructure,
    right: &DirectedDistanceStructure,
) -> Result<DirectedDistanceStructure, GirthError> {
    if left.bound != right.bound {
        return Err(GirthError::Precondition(format!(
            "bounds differ: {} and {}",
            left.bound, right.bound
        )));
    }
    for (side, s) in [("left", left), ("right", right)] {
        let r = dd_validate(s);
        if !r.is_ok() {
            return Err(GirthError::Precondition(format!(
                "{side} structure inconsistent: {r}"
            )));
        }
    }
    let shared: Vec<&String> = left
        .points
        .iter()
        .filter(|p| right.index_of(p).is_some())
        .collect();
    for (x, p) in shared.iter().enumerate() {
        for q in &shared[x + 1..] {
            if left.get(p, q) != right.get(p, q) {
                return Err(GirthError::Precondition(format!(
                    "structures disagree on {p}-{q}"
                )));
            }
        }
    }
    let n = left.bound;
    let nstar = nstar_of(n);
    let all: BTreeSet<String> = left.points.iter().chain(&right.points).cloned().collect();
    let mut assignments: Vec<DirectedDistance> = left.assignments();
    assignments.extend(right.assignments().into_iter().filter(|a| {
        let (p, q) = a.endpoints();
        !(left.index_of(p).is_some() && left.index_of(q).is_some())
    }));
    // provisional structure without cross pairs, used for the chains
    let mut partial = DirectedDistanceStructure {
        bound: n,
        points: all.iter().cloned().collect(),
        pairs: BTreeMap::new(),
    };
    for a in assignments.iter().cloned() {
        partial.insert(a)?;
    }
    let xs: BTreeSet<usize> = left
        .points
        .iter()
        .filter(|p| right.index_of(p).is_none())
        .map(|p| partial.index_of(p).unwrap())
        .collect();
    let ys: BTreeSet<usize> = right
        .points
        .iter()
        .filter(|p| left.index_of(p).is_none())
        .map(|p| partial.index_of(p).unwrap())
        .collect();
    let keep: Vec<usize> = (0..partial.len()).collect();
    let closure = through_base_closure(&partial, &keep, &xs, &ys);
    let nstar64 = u64::from(nstar);
    for &x in &xs {
        for &y in &ys {
            let (a, b) = (partial.points[x].as_str(), partial.points[y].as_str());
            let ab = closure.dist(x, y).filter(|&d| d <= nstar64);
            let ba = closure.dist(y, x).filter(|&d| d <= nstar64);
            let entry = match (ab, ba) {
                (Some(d), Some(e)) if d == e && d == nstar64 && n % 2 == 1 => {
                    DirectedDistance::bidirected(a, b)
                }
                (Some(d), Some(e)) => {
                    return Err(GirthError::VerificationFailed(format!(
                        "chains through the base run both ways between {a} and {b} ({d}, {e})"
                    )))
                }
                (Some(d), None) => directed_or_bi(a, b, d as Distance, n),
                (None, Some(d)) => directed_or_bi(b, a, d as Distance, n),
                (None, None) if n % 2 == 1 => DirectedDistance::bidirected(a, b),
                (None, None) => {
                    let (lo, hi) = if a < b { (a, b) } else { (b, a) };
                    DirectedDistance::directed(lo, hi, nstar)
                }
            };
            assignments.push(entry);
        }
    }
    let out = DirectedDistanceStructure::new(n, all.into_iter().collect(), assignments)?;
    let r = dd_validate(&out);
    if !r.is_ok() {
        return Err(GirthError::VerificationFailed(format!(
            "amalgam inconsistent: {r}"
        )));
    }
    Ok(out)
}

fn directed_or_bi(from: &str, to: &str, d: Distance, n: Distance) -> DirectedDistance {
    if n % 2 == 1 && d == nstar_of(n) {
        DirectedDistance::bidirected(from, to)
    } else {
        DirectedDistance::directed(from, to, d)
    }
}

/// First cross pair between `left` and `right` (both taken with `base`)
/// breaking "distance `>= k` over the base": a pair whose shortest chain
/// through the base, inside `left ∪ right`, is shorter than `k` must carry
/// exactly that length and direction; any other pair must have length
/// `>= k`. Fails when the sides meet outside the base.
pub fn dd_below_witness<S: AsRef<str>>(
    s: &DirectedDistanceStructure,
    base: &[S],
    left: &[S],
    right: &[S],
    k: Distance,
) -> Result<Option<DirectedDistance>, GirthError> {
    let lookup = |v: &[S]| -> Result<BTreeSet<usize>, GirthError> {
        v.iter()
            .map(|p| {
                s.index_of(p.as_ref())
                    .ok_or_else(|| SpaceError::UnknownPoint(p.as_ref().into()).into())
            })
            .collect()
    };
    let c = lookup(base)?;
    let xs: BTreeSet<usize> = lookup(left)?.difference(&c).copied().collect();
    let ys: BTreeSet<usize> = lookup(right)?.difference(&c).copied().collect();
    if let Some(&p) = xs.intersection(&ys).next() {
        return Err(GirthError::Precondition(format!(
            "{} lies in both sides outside the base",
            s.points[p]
        )));
    }
    let keep: Vec<usize> = c.iter().chain(&xs).chain(&ys).copied().collect();
    let closure = through_base_closure(s, &keep, &xs, &ys);
    let pos = |v: usize| keep.iter().position(|&x| x == v).unwrap();
    let k64 = u64::from(k);
    for &x in &xs {
        for &y in &ys {
            let ab = closure.dist(pos(x), pos(y));
            let ba = closure.dist(pos(y), pos(x));
            let arc_xy = s.arc(x, y);
            let arc_yx = s.arc(y, x);
            let length = arc_xy.or(arc_yx).expect("total structure");
            let chain = match (ab, ba) {
                (Some(d), _) if d < k64 && ba.is_none_or(|e| d <= e) => Some((d, true)),
                (_, Some(e)) if e < k64 => Some((e, false)),
                _ => None,
            };
            let ok = match chain {
                Some((d, true)) => arc_xy == Some(d) && arc_yx.is_none(),
                Some((d, false)) => arc_yx == Some(d) && arc_xy.is_none(),
                None => length >= k64,
            };
            if !ok {
                let key = (x.min(y), x.max(y));
                return Ok(Some(s.describe(key.0, key.1, s.pairs[&key])));
            }
        }
    }
    Ok(None)
}

/// Undirected graph whose odd girth should exceed an odd bound `n`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OddGirthGraph {
    bound: Distance,
    names: Vec<String>,
    #[serde(skip)]
    index: BTreeMap<String, usize>,
    #[serde(skip)]
    adj: Vec<Vec<usize>>,
}

impl OddGirthGraph {
    pub fn new(bound: Distance) -> Result<Self, GirthError> {
        if bound % 2 == 0 {
            return Err(GirthError::EvenBound(bound));
        }
        Ok(OddGirthGraph {
            bound,
            names: Vec::new(),
            index: BTreeMap::new(),
            adj: Vec::new(),
        })
    }

    pub fn from_edges<S: AsRef<str>>(
        bound: Distance,
        edges: &[(S, S)],
    ) -> Result<Self, GirthError> {
        let mut g = Self::new(bound)?;
        for (u, v) in edges {
            g.add_edge(u.as_ref(), v.as_ref());
        }
        Ok(g)
    }

    pub fn bound(&self) -> Distance {
        self.bound
    }

    pub fn add_vertex(&mut self, name: &str) -> usize {
        if let Some(&i) = self.index.get(name) {
            return i;
        }
        let i = self.names.len();
        self.names.push(name.into());
        self.index.insert(name.into(), i);
        self.adj.push(Vec::new());
        i
    }

    pub fn add_edge(&mut self, u: &str, v: &str) {
        let (a, b) = (self.add_vertex(u), self.add_vertex(v));
        if !self.adj[a].contains(&b) {
            self.adj[a].push(b);
            if a != b {
                self.adj[b].push(a);
            }
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Each undirected edge once, as `(u, v)` with `u` added first.
    pub fn edges(&self) -> Vec<(String, String)> {
        let mut out = Vec::new();
        for (a, ns) in self.adj.iter().enumerate() {
            for &b in ns {
                if a <= b {
                    out.push((self.names[a].clone(), self.names[b].clone()));
                }
            }
        }
        out
    }

    pub fn distances_from(&self, src: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.vertex_count()];
        let mut q = VecDeque::from([src]);
        dist[src] = Some(0);
        while let Some(u) = q.pop_front() {
            for &v in &self.adj[u] {
                if dist[v].is_none() {
                    dist[v] = Some(dist[u].unwrap() + 1);
                    q.push_back(v);
                }
            }
        }
        dist
    }

    /// A shortest odd cycle, found as the shortest odd closed walk (which
    /// is always a simple cycle).
    pub fn shortest_odd_cycle(&self) -> Option<Vec<String>> {
        let k = self.vertex_count();
        let mut best: Option<Vec<usize>> = None;
        for v in 0..k {
            // states: 2 * vertex + parity
            let mut dist = vec![usize::MAX; 2 * k];
            let mut parent = vec![usize::MAX; 2 * k];
            let mut q = VecDeque::from([2 * v]);
            dist[2 * v] = 0;
            while let Some(st) = q.pop_front() {
                if st == 2 * v + 1 {
                    break;
                }
                let (u, par) = (st / 2, st % 2);
                for &w in &self.adj[u] {
                    let nx = 2 * w + (1 - par);
                    if dist[nx] == usize::MAX {
                        dist[nx] = dist[st] + 1;
                        parent[nx] = st;
                        q.push_back(nx);
                    }
                }
            }
            let target = 2 * v + 1;
            if dist[target] == usize::MAX || best.as_ref().is_some_and(|b| b.len() <= dist[target])
            {
                continue;
            }
            let mut walk = Vec::new();
            let mut st = target;
            while st != 2 * v {
                walk.push(st / 2);
                st = parent[st];
            }
            walk.reverse();
            // walk ends at v; rotate so the cycle starts at v
            walk.pop();
            walk.insert(0, v);
            best = Some(walk);
        }
        best.map(|c| c.into_iter().map(|i| self.names[i].clone()).collect())
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OddGirthReport {
    pub bound: Distance,
    /// Shortest odd cycle of the graph, if any.
    pub shortest_odd_cycle: Option<Vec<String>>,
}

impl OddGirthReport {
    /// No odd cycle of length `<= bound`.
    pub fn is_ok(&self) -> bool {
        self.shortest_odd_cycle
            .as_ref()
            .is_none_or(|c| c.len() > self.bound as usize)
    }

    /// The offending cycle, when the check fails.
    pub fn violation(&self) -> Option<&[String]> {
        self.shortest_odd_cycle
            .as_deref()
            .filter(|c| c.len() <= self.bound as usize)
    }
}

pub fn og_validate(g: &OddGirthGraph) -> OddGirthReport {
    OddGirthReport {
        bound: g.bound,
        shortest_odd_cycle: g.shortest_odd_cycle(),
    }
}

/// Realizes undirected distances `<= nstar` in a graph with no odd cycle of
/// length `<= n` by joining each assigned pair with a path of length `d` and
/// a path of length `n + 1 - d` (together an even cycle of length `n + 1`).
///
/// The result is checked for short odd cycles and exact distances on the
/// assigned pairs; either failure is reported as an error.
pub fn og_realize(spec: &PartialDistanceSpec) -> Result<OddGirthGraph, GirthError> {
    let n = spec.bound();
    if n % 2 == 0 {
        return Err(GirthError::EvenBound(n));
    }
    let nstar = nstar_of(n);
    let mut g = OddGirthGraph::new(n)?;
    for p in spec.points() {
        g.add_vertex(p);
    }
    for (p, q, d) in spec.assigned() {
        if d > nstar {
            return Err(GirthError::InvalidAssignment(format!(
                "d({p},{q}) = {d} exceeds nstar = {nstar}"
            )));
        }
        let (i, j) = (g.index_of(p).unwrap(), g.index_of(q).unwrap());
        for (len, tag) in [(d, "s"), (n + 1 - d, "l")] {
            let mut prev = p.to_string();
            for t in 1..len {
                let v = format!("~{i}.{j}.{tag}{t}");
                g.add_edge(&prev, &v);
                prev = v;
            }
            g.add_edge(&prev, q);
        }
    }
    let report = og_validate(&g);
    if let Some(c) = report.violation() {
        return Err(GirthError::VerificationFailed(format!(
            "odd cycle of length {}: {}",
            c.len(),
            c.join(" - ")
        )));
    }
    for (p, q, d) in spec.assigned() {
        let got = g.distances_from(g.index_of(p).unwrap())[g.index_of(q).unwrap()];
        if got != Some(d as usize) {
            return Err(GirthError::VerificationFailed(format!(
                "distance {p}-{q} is {got:?}, expected {d}"
            )));
        }
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn dds(n: Distance, list: Vec<DirectedDistance>) -> DirectedDistanceStructure {
        let mut names = BTreeSet::new();
        for a in &list {
            let (p, q) = a.endpoints();
            names.insert(p.to_string());
            names.insert(q.to_string());
        }
        DirectedDistanceStructure::new(n, names.into_iter().collect(), list).unwrap()
    }

    use DirectedDistance as D;

    #[test]
    fn consistent_chain() {
        let s = dds(
            5,
            vec![
                D::directed("a", "b", 1),
                D::directed("b", "c", 1),
                D::directed("a", "c", 2),
            ],
        );
        assert!(dd_validate(&s).is_ok());
        let g = dd_realize(&s).unwrap();
        assert!(g.graph.shortest_cycle_within(5).is_none());
    }

    #[test]
    fn five_cycle_violates_criterion_two() {
        // a -> b -> c -> a with lengths 1 + 1 + 2; c -> a of length 3 is not
        // a legal directed length for n = 5, so use the closest legal form
        let s = dds(
            5,
            vec![
                D::directed("a", "b", 1),
                D::directed("b", "c", 1),
                D::bidirected("a", "c"),
            ],
        );
        let r = dd_validate(&s);
        assert!(
            r.violations
                .iter()
                .any(|v| matches!(v, DdViolation::ShortCycle { length: 5, .. })),
            "{r}"
        );
    }

    #[test]
    fn shortcut_violates_criterion_one() {
        let s = dds(
            7,
            vec![
                D::directed("a", "b", 1),
                D::directed("b", "c", 1),
                D::directed("a", "c", 3),
            ],
        );
        let r = dd_validate(&s);
        assert!(matches!(
            &r.violations[0],
            DdViolation::ChainShortcut { chain_length: 2, chain, .. } if chain == &pts(&["a", "b", "c"])
        ));
        assert!(dd_realize(&s).is_err());
    }

    #[test]
    fn single_pair_gadget() {
        let s = dds(5, vec![D::directed("a", "b", 2)]);
        let r = dd_realize(&s).unwrap();
        // 1 gadget vertex forward, 3 backward
        assert_eq!(r.graph.vertex_count(), 2 + 1 + 3);
        let (da, _) = r.graph.bfs(r.graph.index_of("a").unwrap());
        let (db, _) = r.graph.bfs(r.graph.index_of("b").unwrap());
        assert_eq!(da[r.graph.index_of("b").unwrap()], Some(2));
        assert_eq!(db[r.graph.index_of("a").unwrap()], Some(4));
    }

    #[test]
    fn bidirected_gadget() {
        let s = dds(5, vec![D::bidirected("a", "b")]);
        let r = dd_realize(&s).unwrap();
        assert_eq!(r.graph.vertex_count(), 2 + 2 + 2);
        let (da, _) = r.graph.bfs(0);
        let (db, _) = r.graph.bfs(1);
        assert_eq!((da[1], db[0]), (Some(3), Some(3)));
    }

    #[test]
    fn empty_structure_realizes_to_isolated_points() {
        let s = DirectedDistanceStructure::new(5, pts(&["a"]), vec![]).unwrap();
        let r = dd_realize(&s).unwrap();
        assert_eq!((r.graph.vertex_count(), r.graph.edge_count()), (1, 0));
        let s = DirectedDistanceStructure::new(5, vec![], vec![]).unwrap();
        assert_eq!(dd_realize(&s).unwrap().graph.vertex_count(), 0);
    }

    #[test]
    fn illegal_assignments_rejected() {
        assert!(matches!(
            DirectedDistanceStructure::new(5, pts(&["a", "b"]), vec![D::directed("a", "b", 3)]),
            Err(GirthError::InvalidAssignment(_))
        ));
        assert!(matches!(
            DirectedDistanceStructure::new(4, pts(&["a", "b"]), vec![D::bidirected("a", "b")]),
            Err(GirthError::InvalidAssignment(_))
        ));
        assert!(matches!(
            DirectedDistanceStructure::new(
                4,
                pts(&["a", "b", "c"]),
                vec![D::directed("a", "b", 1)]
            ),
            Err(GirthError::MissingPair(..))
        ));
        assert!(matches!(
            DirectedDistanceStructure::new(
                4,
                pts(&["a", "b"]),
                vec![D::directed("a", "b", 1), D::directed("b", "a", 1)]
            ),
            Err(GirthError::DuplicatePair(..))
        ));
    }

    #[test]
    fn extraction_cases() {
        let g = Digraph::from_edges(&[("a", "b")]);
        let s = dd_from_digraph(&g, 3).unwrap();
        assert_eq!(s.assignments(), vec![D::directed("a", "b", 1)]);

        let g = Digraph::from_edges(&[("a", "b"), ("b", "c"), ("c", "a")]);
        match dd_from_digraph(&g, 3) {
            Err(GirthError::CycleFound(c)) => assert_eq!(c.len(), 3),
            other => panic!("{other:?}"),
        }

        let g = Digraph::from_edges(&[("a", "b"), ("b", "c"), ("c", "d")]);
        assert!(matches!(
            dd_from_digraph(&g, 3),
            Err(GirthError::PairBeyondNstar(..))
        ));
    }

    #[test]
    fn round_trip_through_realization() {
        let s = dds(
            6,
            vec![
                D::directed("a", "b", 1),
                D::directed("b", "c", 2),
                D::directed("a", "c", 3),
            ],
        );
        let r = dd_realize(&s).unwrap();
        assert_eq!(dd_from_digraph_on(&r.graph, 6, &r.original).unwrap(), s);
    }

    #[test]
    fn amalgam_through_base() {
        let a = dds(5, vec![D::directed("a", "c", 1)]);
        let b = dds(5, vec![D::directed("c", "b", 1)]);
        let out = dd_free_amalgam(&a, &b).unwrap();
        assert_eq!(out.get("a", "b"), Some(D::directed("a", "b", 2)));
    }

    #[test]
    fn amalgam_without_short_chain() {
        let a = dds(5, vec![D::directed("a", "c", 2)]);
        let b = dds(5, vec![D::directed("b", "c", 2)]);
        let out = dd_free_amalgam(&a, &b).unwrap();
        assert_eq!(out.get("a", "b"), Some(D::bidirected("a", "b")));

        let a = dds(4, vec![D::directed("x", "c", 2)]);
        let b = dds(4, vec![D::directed("b", "c", 2)]);
        let out = dd_free_amalgam(&a, &b).unwrap();
        assert_eq!(out.get("x", "b"), Some(D::directed("b", "x", 2)));
    }

    #[test]
    fn amalgam_with_left_equal_to_base() {
        let c = DirectedDistanceStructure::new(5, pts(&["c"]), vec![]).unwrap();
        let b = dds(5, vec![D::directed("c", "b", 2)]);
        assert_eq!(dd_free_amalgam(&c, &b).unwrap(), b);
    }

    #[test]
    fn odd_girth_checks() {
        let pentagon = OddGirthGraph::from_edges(
            5 - 2,
            &[("a", "b"), ("b", "c"), ("c", "d"), ("d", "e"), ("e", "a")],
        )
        .unwrap();
        let r = og_validate(&pentagon);
        assert!(r.is_ok());
        assert_eq!(r.shortest_odd_cycle.unwrap().len(), 5);

        let triangle = OddGirthGraph::from_edges(3, &[("a", "b"), ("b", "c"), ("c", "a")]).unwrap();
        let r = og_validate(&triangle);
        assert_eq!(r.violation().unwrap().len(), 3);
        assert!(matches!(
            OddGirthGraph::new(4),
            Err(GirthError::EvenBound(4))
        ));
    }

    #[test]
    fn odd_cycle_witness_is_a_cycle() {
        let g = OddGirthGraph::from_edges(
            7,
            &[
                ("a", "b"),
                ("b", "c"),
                ("c", "d"),
                ("d", "e"),
                ("e", "f"),
                ("f", "g"),
                ("g", "a"),
                ("x", "a"),
            ],
        )
        .unwrap();
        let c = g.shortest_odd_cycle().unwrap();
        assert_eq!(c.len(), 7);
        for i in 0..c.len() {
            let (u, v) = (
                g.index_of(&c[i]).unwrap(),
                g.index_of(&c[(i + 1) % c.len()]).unwrap(),
            );
            assert!(g.neighbors(u).contains(&v));
        }
    }

    #[test]
    fn odd_girth_realization() {
        let spec = PartialDistanceSpec::from_pairs(5, pts(&["a", "b"]), [("a", "b", 2)]).unwrap();
        let g = og_realize(&spec).unwrap();
        let (a, b) = (g.index_of("a").unwrap(), g.index_of("b").unwrap());
        assert_eq!(g.distances_from(a)[b], Some(2));
        assert!(og_validate(&g).is_ok());
        // the two gadget paths close an even cycle of length n + 1
        assert_eq!(g.vertex_count(), 2 + 1 + 3);
        assert_eq!(g.edges().len(), 6);
    }

    #[test]
    fn odd_girth_rejects_bad_input() {
        let spec = PartialDistanceSpec::from_pairs(5, pts(&["a", "b"]), [("a", "b", 4)]).unwrap();
        assert!(matches!(
            og_realize(&spec),
            Err(GirthError::InvalidAssignment(_))
        ));
        let spec = PartialDistanceSpec::from_pairs(4, pts(&["a", "b"]), [("a", "b", 1)]).unwrap();
        assert!(matches!(og_realize(&spec), Err(GirthError::EvenBound(4))));
        let spec = PartialDistanceSpec::from_pairs(
            7,
            pts(&["a", "b", "c"]),
            [("a", "b", 1), ("b", "c", 1), ("a", "c", 3)],
        )
        .unwrap();
        assert!(matches!(
            og_realize(&spec),
            Err(GirthError::VerificationFailed(_))
        ));
    }
}
