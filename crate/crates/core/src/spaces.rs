//! Metric spaces valued in `{0..n}`: validation, completion of partial
//! distance data, isometric embeddings and exhaustive enumeration.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::minplus::Closure;

pub type Distance = u32;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpaceError {
    #[error("bound must be at least 1")]
    ZeroBound,
    #[error("invalid point name {0:?}")]
    InvalidName(String),
    #[error("duplicate point {0:?}")]
    DuplicatePoint(String),
    #[error("unknown point {0:?}")]
    UnknownPoint(String),
    #[error("distance between {0:?} and itself cannot be assigned")]
    SelfPair(String),
    #[error("distance {value} between {p:?} and {q:?} outside 1..={bound}")]
    OutOfRange {
        p: String,
        q: String,
        value: Distance,
        bound: Distance,
    },
    #[error("conflicting distances {first} and {second} for {p:?}-{q:?}")]
    Conflict {
        p: String,
        q: String,
        first: Distance,
        second: Distance,
    },
    #[error("no distance given for {0:?}-{1:?}")]
    MissingPair(String, String),
    #[error("not a metric: {0}")]
    NotAMetric(ValidationReport),
    #[error("point {0:?} has no image under the mapping")]
    UnmappedPoint(String),
    #[error("mapping is not an isometric embedding")]
    NotAnEmbedding,
    #[error("{what} = {value} exceeds the configured cap {cap}")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },
}

/// Point names are whitespace-free tokens that do not start a comment.
pub fn check_name(name: &str) -> Result<(), SpaceError> {
    if name.is_empty()
        || name.starts_with('~')
        || name.chars().any(|c| c.is_whitespace() || c == '#')
    {
        return Err(SpaceError::InvalidName(name.to_string()));
    }
    Ok(())
}

fn sorted_unique(points: Vec<String>) -> Result<Vec<String>, SpaceError> {
    let mut seen = BTreeSet::new();
    for p in &points {
        check_name(p)?;
        if !seen.insert(p.clone()) {
            return Err(SpaceError::DuplicatePoint(p.clone()));
        }
    }
    Ok(seen.into_iter().collect())
}

/// One broken metric axiom, named by its smallest witness.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    NonzeroDiagonal {
        point: String,
        value: Distance,
    },
    ZeroDistance {
        p: String,
        q: String,
    },
    Asymmetric {
        p: String,
        q: String,
        forward: Distance,
        backward: Distance,
    },
    ExceedsBound {
        p: String,
        q: String,
        value: Distance,
    },
    /// `d(p, q) > d(p, via) + d(via, q)`.
    Triangle {
        p: String,
        via: String,
        q: String,
        direct: Distance,
        through: Distance,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NonzeroDiagonal { point, value } => write!(f, "d({point},{point}) = {value}"),
            Violation::ZeroDistance { p, q } => write!(f, "d({p},{q}) = 0 for distinct points"),
            Violation::Asymmetric { p, q, forward, backward } => {
                write!(f, "d({p},{q}) = {forward} but d({q},{p}) = {backward}")
            }
            Violation::ExceedsBound { p, q, value } => write!(f, "d({p},{q}) = {value} exceeds bound"),
            Violation::Triangle { p, via, q, direct, through } => write!(
                f,
                "triangle ({p},{via},{q}): d({p},{q}) = {direct} > {through} = d({p},{via}) + d({via},{q})"
            ),
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks a total distance table against the axioms of a `{0..bound}`-valued
/// metric. Every violation is listed; nothing is treated as fatal.
///
/// `matrix[i][j]` is the distance from `points[i]` to `points[j]`.
pub fn validate_metric(
    points: &[String],
    matrix: &[Vec<Distance>],
    bound: Distance,
) -> ValidationReport {
    let k = points.len();
    let mut violations = Vec::new();
    for i in 0..k {
        if matrix[i][i] != 0 {
            violations.push(Violation::NonzeroDiagonal {
                point: points[i].clone(),
                value: matrix[i][i],
            });
        }
    }
    for i in 0..k {
        for j in i + 1..k {
            let (p, q) = (&points[i], &points[j]);
            if matrix[i][j] != matrix[j][i] {
                violations.push(Violation::Asymmetric {
                    p: p.clone(),
                    q: q.clone(),
                    forward: matrix[i][j],
                    backward: matrix[j][i],
                });
            }
            if matrix[i][j] == 0 {
                violations.push(Violation::ZeroDistance {
                    p: p.clone(),
                    q: q.clone(),
                });
            }
            if matrix[i][j] > bound {
                violations.push(Violation::ExceedsBound {
                    p: p.clone(),
                    q: q.clone(),
                    value: matrix[i][j],
                });
            }
        }
    }
    let d = |a: usize, b: usize| matrix[a.min(b)][a.max(b)];
    for i in 0..k {
        for j in i + 1..k {
            for via in 0..k {
                if via == i || via == j {
                    continue;
                }
                let through = d(i, via) + d(via, j);
                if d(i, j) > through {
                    violations.push(Violation::Triangle {
                        p: points[i].clone(),
                        via: points[via].clone(),
                        q: points[j].clone(),
                        direct: d(i, j),
                        through,
                    });
                }
            }
        }
    }
    ValidationReport { violations }
}

/// A finite metric space with integer distances in `{0..bound}`.
///
/// Points are kept in lexicographic order; all indices refer to that order.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct BoundedMetricSpace {
    bound: Distance,
    points: Vec<String>,
    dist: Vec<Distance>,
}

impl BoundedMetricSpace {
    /// Builds a space from a full distance matrix indexed like `points`.
    pub fn from_matrix(
        bound: Distance,
        points: Vec<String>,
        matrix: Vec<Vec<Distance>>,
    ) -> Result<Self, SpaceError> {
        if bound == 0 {
            return Err(SpaceError::ZeroBound);
        }
        let sorted = sorted_unique(points.clone())?;
        let report = validate_metric(&points, &matrix, bound);
        if !report.is_ok() {
            return Err(SpaceError::NotAMetric(report));
        }
        let pos: Vec<usize> = sorted
            .iter()
            .map(|p| points.iter().position(|q| q == p).expect("same point set"))
            .collect();
        let k = sorted.len();
        let mut dist = vec![0; k * k];
        for i in 0..k {
            for j in 0..k {
                dist[i * k + j] = matrix[pos[i]][pos[j]];
            }
        }
        Ok(BoundedMetricSpace {
            bound,
            points: sorted,
            dist,
        })
    }

    /// Fast constructor for tables produced inside the crate: `points` must
    /// already be sorted, distinct and valid, and `dist` row-major.
    pub(crate) fn from_sorted_flat(
        bound: Distance,
        points: Vec<String>,
        dist: Vec<Distance>,
    ) -> Result<Self, SpaceError> {
        let k = points.len();
        debug_assert!(points.windows(2).all(|w| w[0] < w[1]));
        let d = |i: usize, j: usize| dist[i * k + j];
        let ok = (0..k).all(|i| {
            d(i, i) == 0
                && (i + 1..k).all(|j| {
                    let x = d(i, j);
                    x == d(j, i) && x != 0 && x <= bound && (0..k).all(|m| x <= d(i, m) + d(m, j))
                })
        });
        if !ok {
            let matrix: Vec<Vec<Distance>> = dist.chunks(k).map(<[_]>::to_vec).collect();
            return Err(SpaceError::NotAMetric(validate_metric(
                &points, &matrix, bound,
            )));
        }
        Ok(BoundedMetricSpace {
            bound,
            points,
            dist,
        })
    }

    /// Builds a space from an explicit list of pair distances; every pair of
    /// distinct points must appear.
    pub fn from_pairs<S: AsRef<str>>(
        bound: Distance,
        points: Vec<String>,
        pairs: impl IntoIterator<Item = (S, S, Distance)>,
    ) -> Result<Self, SpaceError> {
        PartialDistanceSpec::from_pairs(bound, points, pairs)?.into_space()
    }

    pub fn single_point(bound: Distance, name: &str) -> Result<Self, SpaceError> {
        Self::from_matrix(bound, vec![name.to_string()], vec![vec![0]])
    }

    pub fn bound(&self) -> Distance {
        self.bound
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

    pub fn dist(&self, i: usize, j: usize) -> Distance {
        self.dist[i * self.points.len() + j]
    }

    pub fn dist_by_name(&self, p: &str, q: &str) -> Option<Distance> {
        Some(self.dist(self.index_of(p)?, self.index_of(q)?))
    }

    pub fn matrix(&self) -> Vec<Vec<Distance>> {
        let k = self.len();
        (0..k)
            .map(|i| (0..k).map(|j| self.dist(i, j)).collect())
            .collect()
    }

    /// Upper-triangle distances in lexicographic pair order.
    pub fn distance_vector(&self) -> Vec<Distance> {
        let k = self.len();
        let mut v = Vec::with_capacity(k * k.saturating_sub(1) / 2);
        for i in 0..k {
            for j in i + 1..k {
                v.push(self.dist(i, j));
            }
        }
        v
    }

    /// The subspace on the named points.
    pub fn restrict<S: AsRef<str>>(&self, names: &[S]) -> Result<Self, SpaceError> {
        let idx = names
            .iter()
            .map(|n| {
                self.index_of(n.as_ref())
                    .ok_or_else(|| SpaceError::UnknownPoint(n.as_ref().to_string()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        let points = names.iter().map(|n| n.as_ref().to_string()).collect();
        let matrix = idx
            .iter()
            .map(|&i| idx.iter().map(|&j| self.dist(i, j)).collect())
            .collect();
        Self::from_matrix(self.bound, points, matrix)
    }

    pub fn to_partial(&self) -> PartialDistanceSpec {
        let k = self.len();
        let mut assigned = BTreeMap::new();
        for i in 0..k {
            for j in i + 1..k {
                assigned.insert((i, j), self.dist(i, j));
            }
        }
        PartialDistanceSpec {
            bound: self.bound,
            points: self.points.clone(),
            assigned,
        }
    }
}

/// Distances assigned to some pairs of a point set; the input to
/// [`min_plus_complete`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PartialDistanceSpec {
    bound: Distance,
    points: Vec<String>,
    /// Keyed by `(i, j)` with `i < j` in point order.
    assigned: BTreeMap<(usize, usize), Distance>,
}

impl PartialDistanceSpec {
    pub fn new(bound: Distance, points: Vec<String>) -> Result<Self, SpaceError> {
        if bound == 0 {
            return Err(SpaceError::ZeroBound);
        }
        Ok(PartialDistanceSpec {
            bound,
            points: sorted_unique(points)?,
            assigned: BTreeMap::new(),
        })
    }

    pub fn from_pairs<S: AsRef<str>>(
        bound: Distance,
        points: Vec<String>,
        pairs: impl IntoIterator<Item = (S, S, Distance)>,
    ) -> Result<Self, SpaceError> {
        let mut spec = Self::new(bound, points)?;
        for (p, q, d) in pairs {
            spec.assign(p.as_ref(), q.as_ref(), d)?;
        }
        Ok(spec)
    }

    pub fn assign(&mut self, p: &str, q: &str, d: Distance) -> Result<(), SpaceError> {
        let i = self.index(p)?;
        let j = self.index(q)?;
        if i == j {
            return Err(SpaceError::SelfPair(p.to_string()));
        }
        if d == 0 || d > self.bound {
            return Err(SpaceError::OutOfRange {
                p: p.into(),
                q: q.into(),
                value: d,
                bound: self.bound,
            });
        }
        let key = (i.min(j), i.max(j));
        match self.assigned.get(&key) {
            Some(&prev) if prev != d => Err(SpaceError::Conflict {
                p: self.points[key.0].clone(),
                q: self.points[key.1].clone(),
                first: prev,
                second: d,
            }),
            _ => {
                self.assigned.insert(key, d);
                Ok(())
            }
        }
    }

    fn index(&self, name: &str) -> Result<usize, SpaceError> {
        self.points
            .binary_search_by(|p| p.as_str().cmp(name))
            .map_err(|_| SpaceError::UnknownPoint(name.to_string()))
    }

    pub fn bound(&self) -> Distance {
        self.bound
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn get(&self, p: &str, q: &str) -> Option<Distance> {
        let (i, j) = (self.index(p).ok()?, self.index(q).ok()?);
        self.assigned.get(&(i.min(j), i.max(j))).copied()
    }

    /// Assigned pairs as `(p, q, d)` with `p < q`, in lexicographic order.
    pub fn assigned(&self) -> impl Iterator<Item = (&str, &str, Distance)> + '_ {
        self.assigned
            .iter()
            .map(|(&(i, j), &d)| (self.points[i].as_str(), self.points[j].as_str(), d))
    }

    pub fn is_total(&self) -> bool {
        let k = self.points.len();
        self.assigned.len() == k * k.saturating_sub(1) / 2
    }

    /// The space itself, when every pair is assigned and the values form a
    /// metric.
    pub fn into_space(self) -> Result<BoundedMetricSpace, SpaceError> {
        let k = self.points.len();
        let mut matrix = vec![vec![0; k]; k];
        for i in 0..k {
            for j in i + 1..k {
                let d = *self.assigned.get(&(i, j)).ok_or_else(|| {
                    SpaceError::MissingPair(self.points[i].clone(), self.points[j].clone())
                })?;
                matrix[i][j] = d;
                matrix[j][i] = d;
            }
        }
        BoundedMetricSpace::from_matrix(self.bound, self.points, matrix)
    }
}

/// Partial distance data with no metric extension: the assigned distance
/// of `pair` exceeds the length of `chain`, a chain of assigned distances
/// between the same endpoints.
#[derive(Clone, Debug, PartialEq, Eq, Error, Serialize)]
#[error("infeasible: d({}, {}) = {assigned} but chain {} has length {chain_length}", pair.0, pair.1, chain.join("-"))]
pub struct Infeasible {
    pub pair: (String, String),
    pub assigned: Distance,
    pub chain: Vec<String>,
    pub chain_length: Distance,
}

/// Extends partial distance data to a full metric.
///
/// Unassigned pairs receive the length of the shortest chain of assigned
/// distances, capped at the bound; pairs with no chain receive the bound.
/// The extension exists exactly when no assigned distance exceeds the
/// shortest chain between its endpoints.
pub fn min_plus_complete(spec: &PartialDistanceSpec) -> Result<BoundedMetricSpace, Infeasible> {
    let k = spec.points.len();
    let weight = |i: usize, j: usize| {
        spec.assigned
            .get(&(i.min(j), i.max(j)))
            .map(|&d| u64::from(d))
    };
    let closure = Closure::new(k, None, weight);
    for (&(i, j), &d) in &spec.assigned {
        let sp = closure.dist(i, j).expect("assigned pair is reachable");
        if sp < u64::from(d) {
            let chain = closure.path(i, j).expect("finite chain");
            return Err(Infeasible {
                pair: (spec.points[i].clone(), spec.points[j].clone()),
                assigned: d,
                chain: chain.into_iter().map(|v| spec.points[v].clone()).collect(),
                chain_length: sp as Distance,
            });
        }
    }
    let bound = u64::from(spec.bound);
    let mut matrix = vec![vec![0; k]; k];
    for i in 0..k {
        for j in 0..k {
            if i != j {
                matrix[i][j] = closure.dist(i, j).map_or(bound, |d| d.min(bound)) as Distance;
            }
        }
    }
    Ok(
        BoundedMetricSpace::from_matrix(spec.bound, spec.points.clone(), matrix)
            .expect("capped shortest-chain closure is a metric"),
    )
}

/// Whether `map` sends `sub` injectively and distance-preservingly into
/// `sup`. Fails only when a point of `sub` has no image.
pub fn is_isometric_extension(
    sub: &BoundedMetricSpace,
    sup: &BoundedMetricSpace,
    map: &BTreeMap<String, String>,
) -> Result<bool, SpaceError> {
    let mut image = Vec::with_capacity(sub.len());
    for p in sub.points() {
        let target = map
            .get(p)
            .ok_or_else(|| SpaceError::UnmappedPoint(p.clone()))?;
        match sup.index_of(target) {
            Some(t) => image.push(t),
            None => return Ok(false),
        }
    }
    if (0..image.len()).any(|i| image[..i].contains(&image[i])) {
        return Ok(false);
    }
    for i in 0..sub.len() {
        for j in i + 1..sub.len() {
            if sub.dist(i, j) != sup.dist(image[i], image[j]) {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// A point map that was checked to be an isometric embedding when built.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingWitness {
    pub map: BTreeMap<String, String>,
}

impl EmbeddingWitness {
    pub fn new(
        source: &BoundedMetricSpace,
        target: &BoundedMetricSpace,
        map: BTreeMap<String, String>,
    ) -> Result<Self, SpaceError> {
        if !is_isometric_extension(source, target, &map)? {
            return Err(SpaceError::NotAnEmbedding);
        }
        Ok(EmbeddingWitness { map })
    }

    pub fn image(&self, p: &str) -> Option<&str> {
        self.map.get(p).map(String::as_str)
    }
}

/// Size limits for [`enumerate_spaces`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct EnumerationCaps {
    pub max_points: usize,
    pub max_bound: Distance,
}

impl Default for EnumerationCaps {
    fn default() -> Self {
        EnumerationCaps {
            max_points: 5,
            max_bound: 8,
        }
    }
}

/// Every `{0..bound}`-valued metric on `point_count` points named `p0, p1, ...`,
/// each exactly once, in lexicographic order of the distance vector.
pub fn enumerate_spaces(
    point_count: usize,
    bound: Distance,
    caps: EnumerationCaps,
) -> Result<SpaceEnumerator, SpaceError> {
    if point_count > caps.max_points {
        return Err(SpaceError::CapExceeded {
            what: "point count",
            value: point_count,
            cap: caps.max_points,
        });
    }
    if bound > caps.max_bound {
        return Err(SpaceError::CapExceeded {
            what: "bound",
            value: bound as usize,
            cap: caps.max_bound as usize,
        });
    }
    if bound == 0 {
        return Err(SpaceError::ZeroBound);
    }
    Ok(SpaceEnumerator::new(point_count, bound))
}

/// Backtracking enumerator behind [`enumerate_spaces`].
///
/// Pairs are filled in lexicographic order; a triangle is checked as soon as
/// its last side is filled, so the output order is that of a plain odometer
/// with invalid vectors skipped.
pub struct SpaceEnumerator {
    bound: Distance,
    points: Vec<String>,
    pairs: Vec<(usize, usize)>,
    /// For each pair position, the other two sides of every triangle it closes.
    closes: Vec<Vec<(usize, usize)>>,
    values: Vec<Distance>,
    fresh: bool,
    exhausted: bool,
}

impl SpaceEnumerator {
    fn new(point_count: usize, bound: Distance) -> Self {
        let points: Vec<String> = (0..point_count).map(|i| format!("p{i}")).collect();
        let mut pairs = Vec::new();
        for i in 0..point_count {
            for j in i + 1..point_count {
                pairs.push((i, j));
            }
        }
        let pos = |a: usize, b: usize| {
            pairs
                .iter()
                .position(|&p| p == (a.min(b), a.max(b)))
                .unwrap()
        };
        let mut closes = vec![Vec::new(); pairs.len()];
        for a in 0..point_count {
            for b in a + 1..point_count {
                for c in b + 1..point_count {
                    let sides = [pos(a, b), pos(a, c), pos(b, c)];
                    let last = *sides.iter().max().unwrap();
                    let others: Vec<usize> = sides.iter().copied().filter(|&s| s != last).collect();
                    closes[last].push((others[0], others[1]));
                }
            }
        }
        let m = pairs.len();
        SpaceEnumerator {
            bound,
            points,
            pairs,
            closes,
            values: vec![0; m],
            fresh: true,
            exhausted: false,
        }
    }

    fn consistent(&self, pos: usize) -> bool {
        let x = self.values[pos];
        self.closes[pos].iter().all(|&(a, b)| {
            let (y, z) = (self.values[a], self.values[b]);
            x <= y + z && y <= x + z && z <= x + y
        })
    }

    fn build(&self) -> BoundedMetricSpace {
        let k = self.points.len();
        let mut dist = vec![0; k * k];
        for (&(i, j), &d) in self.pairs.iter().zip(&self.values) {
            dist[i * k + j] = d;
            dist[j * k + i] = d;
        }
        // p0..p9 sort the same numerically and lexicographically; larger
        // counts are rejected by the caps long before names would reorder.
        BoundedMetricSpace {
            bound: self.bound,
            points: self.points.clone(),
            dist,
        }
    }
}

impl Iterator for SpaceEnumerator {
    type Item = BoundedMetricSpace;

    fn next(&mut self) -> Option<BoundedMetricSpace> {
        if self.exhausted {
            return None;
        }
        let m = self.pairs.len();
        if m == 0 {
            self.exhausted = true;
            return Some(self.build());
        }
        let mut pos = if self.fresh {
            self.fresh = false;
            self.values[0] = 0;
            0
        } else {
            m - 1
        };
        loop {
            if self.values[pos] < self.bound {
                self.values[pos] += 1;
                if self.consistent(pos) {
                    if pos + 1 == m {
                        return Some(self.build());
                    }
                    pos += 1;
                    self.values[pos] = 0;
                }
            } else if pos == 0 {
                self.exhausted = true;
                return None;
            } else {
                pos -= 1;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn names(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    /// Triangle check written independently of `validate_metric`.
    fn naive_is_metric(k: usize, values: &[Distance]) -> bool {
        let mut m = vec![vec![0; k]; k];
        let mut it = values.iter();
        for i in 0..k {
            for j in i + 1..k {
                let d = *it.next().unwrap();
                m[i][j] = d;
                m[j][i] = d;
            }
        }
        (0..k).all(|a| (0..k).all(|b| (0..k).all(|c| m[a][c] <= m[a][b] + m[b][c])))
    }

    fn odometer(k: usize, n: Distance) -> Vec<Vec<Distance>> {
        let pairs = k * k.saturating_sub(1) / 2;
        let mut out = Vec::new();
        let total = (n as usize).pow(pairs as u32);
        for mut code in 0..total {
            let mut v = vec![0; pairs];
            for slot in v.iter_mut().rev() {
                *slot = (code % n as usize) as Distance + 1;
                code /= n as usize;
            }
            if naive_is_metric(k, &v) {
                out.push(v);
            }
        }
        out
    }

    #[test]
    fn single_point_is_ok() {
        let r = validate_metric(&names(&["a"]), &[vec![0]], 3);
        assert!(r.is_ok());
    }

    #[test]
    fn long_side_is_reported() {
        let m = vec![vec![0, 1, 3], vec![1, 0, 1], vec![3, 1, 0]];
        let r = validate_metric(&names(&["a", "b", "c"]), &m, 3);
        assert_eq!(
            r.violations,
            vec![Violation::Triangle {
                p: "a".into(),
                via: "b".into(),
                q: "c".into(),
                direct: 3,
                through: 2
            }]
        );
    }

    #[test]
    fn pair_at_bound_is_ok() {
        assert!(validate_metric(&names(&["a", "b"]), &[vec![0, 2], vec![2, 0]], 2).is_ok());
    }

    #[test]
    fn every_axiom_violation_is_listed() {
        let m = vec![vec![1, 0, 5], vec![0, 0, 2], vec![4, 2, 0]];
        let r = validate_metric(&names(&["a", "b", "c"]), &m, 4);
        let kinds: Vec<_> = r
            .violations
            .iter()
            .map(|v| match v {
                Violation::NonzeroDiagonal { .. } => "diag",
                Violation::ZeroDistance { .. } => "zero",
                Violation::Asymmetric { .. } => "asym",
                Violation::ExceedsBound { .. } => "bound",
                Violation::Triangle { .. } => "tri",
            })
            .collect();
        assert!(kinds.contains(&"diag"));
        assert!(kinds.contains(&"zero"));
        assert!(kinds.contains(&"asym"));
        assert!(kinds.contains(&"bound"));
        assert!(kinds.contains(&"tri"));
    }

    #[test]
    fn completes_through_chain() {
        let spec = PartialDistanceSpec::from_pairs(
            4,
            names(&["a", "b", "c"]),
            [("a", "b", 1), ("b", "c", 1)],
        )
        .unwrap();
        let s = min_plus_complete(&spec).unwrap();
        assert_eq!(s.dist_by_name("a", "c"), Some(2));
    }

    #[test]
    fn empty_closure_caps_at_bound() {
        let spec = PartialDistanceSpec::new(5, names(&["a", "b"])).unwrap();
        assert_eq!(
            min_plus_complete(&spec).unwrap().dist_by_name("a", "b"),
            Some(5)
        );
    }

    #[test]
    fn infeasible_names_the_triangle() {
        let spec = PartialDistanceSpec::from_pairs(
            3,
            names(&["a", "b", "c"]),
            [("a", "b", 1), ("a", "c", 1), ("b", "c", 3)],
        )
        .unwrap();
        let err = min_plus_complete(&spec).unwrap_err();
        assert_eq!(err.pair, ("b".to_string(), "c".to_string()));
        assert_eq!(err.chain, names(&["b", "a", "c"]));
        assert_eq!(err.chain_length, 2);
    }

    #[test]
    fn infeasible_along_long_chain() {
        let spec = PartialDistanceSpec::from_pairs(
            6,
            names(&["a", "b", "c", "d"]),
            [("a", "b", 1), ("b", "c", 1), ("c", "d", 1), ("a", "d", 5)],
        )
        .unwrap();
        let err = min_plus_complete(&spec).unwrap_err();
        assert_eq!(err.chain, names(&["a", "b", "c", "d"]));
    }

    #[test]
    fn completion_of_total_metric_is_identity() {
        for s in enumerate_spaces(4, 4, EnumerationCaps::default()).unwrap() {
            assert_eq!(min_plus_complete(&s.to_partial()).unwrap(), s);
        }
    }

    /// Completion succeeds exactly when some total extension is a metric,
    /// for every partial spec on up to 4 points with n <= 6.
    #[test]
    fn completion_matches_extension_search() {
        use std::collections::HashSet;
        for k in 2..=4usize {
            let pairs: Vec<(usize, usize)> = (0..k)
                .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
                .collect();
            let pts: Vec<String> = (0..k).map(|i| format!("p{i}")).collect();
            for n in 1..=6 as Distance {
                let metrics: HashSet<Vec<Distance>> = odometer(k, n).into_iter().collect();
                let base = n as usize + 1;
                for code in 0..base.pow(pairs.len() as u32) {
                    let mut c = code;
                    let mut spec = PartialDistanceSpec::new(n, pts.clone()).unwrap();
                    let mut fixed = vec![0; pairs.len()];
                    for (slot, &(i, j)) in pairs.iter().enumerate() {
                        let v = (c % base) as Distance;
                        c /= base;
                        if v > 0 {
                            spec.assign(&pts[i], &pts[j], v).unwrap();
                            fixed[slot] = v;
                        }
                    }
                    let free: Vec<usize> = (0..pairs.len()).filter(|&s| fixed[s] == 0).collect();
                    let exists = (0..(n as usize).pow(free.len() as u32)).any(|mut fc| {
                        let mut full = fixed.clone();
                        for &s in &free {
                            full[s] = (fc % n as usize) as Distance + 1;
                            fc /= n as usize;
                        }
                        metrics.contains(&full)
                    });
                    match min_plus_complete(&spec) {
                        Ok(s) => {
                            assert!(exists);
                            for (slot, &(i, j)) in pairs.iter().enumerate() {
                                if fixed[slot] > 0 {
                                    assert_eq!(s.dist(i, j), fixed[slot]);
                                }
                            }
                        }
                        Err(_) => assert!(!exists, "k={k} n={n} code={code}"),
                    }
                }
            }
        }
    }

    #[test]
    fn enumeration_small_counts() {
        let caps = EnumerationCaps::default();
        assert_eq!(enumerate_spaces(1, 7, caps).unwrap().count(), 1);
        assert_eq!(enumerate_spaces(2, 3, caps).unwrap().count(), 3);
        // every vector of {1,2}^3 is a metric
        assert_eq!(odometer(3, 2).len(), 8);
        assert_eq!(enumerate_spaces(3, 2, caps).unwrap().count(), 8);
    }

    #[test]
    fn enumeration_matches_odometer() {
        let caps = EnumerationCaps::default();
        for k in 0..=4 {
            for n in 1..=4 {
                let got: Vec<Vec<Distance>> = enumerate_spaces(k, n, caps)
                    .unwrap()
                    .map(|s| s.distance_vector())
                    .collect();
                let want = if k == 0 { vec![vec![]] } else { odometer(k, n) };
                assert_eq!(got, want, "k={k} n={n}");
                for v in &got {
                    assert!(naive_is_metric(k, v));
                }
            }
        }
    }

    #[test]
    fn enumeration_caps() {
        let caps = EnumerationCaps::default();
        assert!(matches!(
            enumerate_spaces(6, 3, caps),
            Err(SpaceError::CapExceeded { .. })
        ));
        assert!(matches!(
            enumerate_spaces(3, 9, caps),
            Err(SpaceError::CapExceeded { .. })
        ));
    }

    #[test]
    fn isometric_extension_cases() {
        let ab = BoundedMetricSpace::from_pairs(3, names(&["a", "b"]), [("a", "b", 2)]).unwrap();
        let abc = BoundedMetricSpace::from_pairs(
            3,
            names(&["a", "b", "c"]),
            [("a", "b", 2), ("a", "c", 3), ("b", "c", 1)],
        )
        .unwrap();
        let id: BTreeMap<_, _> = ab.points().iter().map(|p| (p.clone(), p.clone())).collect();
        assert!(is_isometric_extension(&ab, &ab, &id).unwrap());
        assert!(is_isometric_extension(&ab, &abc, &id).unwrap());
        let onto_three: BTreeMap<_, _> = [
            ("a".to_string(), "a".to_string()),
            ("b".to_string(), "c".to_string()),
        ]
        .into();
        assert!(!is_isometric_extension(&ab, &abc, &onto_three).unwrap());
        let partial: BTreeMap<_, _> = [("a".to_string(), "a".to_string())].into();
        assert_eq!(
            is_isometric_extension(&ab, &abc, &partial),
            Err(SpaceError::UnmappedPoint("b".into()))
        );
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(
            PartialDistanceSpec::from_pairs(3, names(&["a", "b"]), [("a", "b", 4)]),
            Err(SpaceError::OutOfRange { .. })
        ));
        assert!(matches!(
            BoundedMetricSpace::from_pairs(3, names(&["a", "b", "c"]), [("a", "b", 1)]),
            Err(SpaceError::MissingPair(..))
        ));
        assert!(matches!(
            PartialDistanceSpec::new(3, names(&["a", "a"])),
            Err(SpaceError::DuplicatePoint(_))
        ));
        assert!(matches!(
            PartialDistanceSpec::new(3, names(&["a b"])),
            Err(SpaceError::InvalidName(_))
        ));
    }
}
