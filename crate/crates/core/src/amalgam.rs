//! Free amalgamation of bounded metric spaces over a common base, the
//! "distance at least / at most k over C" predicates, and the checks built
//! on them.
//!
//! For `a` outside the base on one side and `b` outside it on the other, two
//! numbers constrain any amalgam:
//!
//! * the *sum bound* `min_c d(a,c) + d(c,b)`, an upper bound on `d(a,b)`;
//! * the *gap bound* `max_c |d(a,c) - d(c,b)|`, a lower bound on `d(a,b)`.
//!
//! The free amalgam with parameter `nstar` takes the sum bound when it is
//! below `nstar`, the gap bound when it is above `nstar`, and `nstar`
//! otherwise.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::spaces::{
    validate_metric, BoundedMetricSpace, Distance, EmbeddingWitness, SpaceError, ValidationReport,
};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AmalgamError {
    #[error(transparent)]
    Space(#[from] SpaceError),
    #[error("nstar = {nstar} outside [ceil({n}/2), {n}]")]
    InvalidNstar { n: Distance, nstar: Distance },
    #[error("spaces have different bounds {0} and {1}")]
    BoundMismatch(Distance, Distance),
    #[error("base is empty")]
    EmptyBase,
    #[error("base does not embed isometrically into the {0} space")]
    NotEmbedded(&'static str),
    #[error("point {0:?} lies in both sides but not in the base")]
    Overlap(String),
    #[error(
        "need 1 <= k1 <= nstar <= k2 <= n, got k1 = {k1}, k2 = {k2}, nstar = {nstar}, n = {n}"
    )]
    ParameterRange {
        k1: Distance,
        k2: Distance,
        nstar: Distance,
        n: Distance,
    },
    #[error("inconsistent copy blocks: {0}")]
    InconsistentBlocks(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("constructed table is not a metric: {0}")]
    NotAMetric(ValidationReport),
}

/// Smallest admissible `nstar` for bound `n`, `ceil(n / 2)`.
pub fn default_nstar(n: Distance) -> Distance {
    n.div_ceil(2)
}

pub fn check_nstar(n: Distance, nstar: Distance) -> Result<(), AmalgamError> {
    if nstar < default_nstar(n) || nstar > n {
        return Err(AmalgamError::InvalidNstar { n, nstar });
    }
    Ok(())
}

/// `(sum bound, gap bound)` for one cross pair. The sum bound is `None` over
/// an empty base.
fn pair_bounds(
    base_len: usize,
    left: impl Fn(usize) -> Distance,
    right: impl Fn(usize) -> Distance,
) -> (Option<Distance>, Distance) {
    let sum = (0..base_len).map(|c| left(c) + right(c)).min();
    let gap = (0..base_len)
        .map(|c| left(c).abs_diff(right(c)))
        .max()
        .unwrap_or(0);
    (sum, gap)
}

/// Which rule of the free amalgam fixes a cross distance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AmalgamCase {
    /// Sum bound below `nstar`.
    ThroughBase,
    /// Gap bound above `nstar`.
    Spread,
    /// Neither; the distance is `nstar`.
    Default,
}

pub fn amalgam_case(sum: Option<Distance>, gap: Distance, nstar: Distance) -> AmalgamCase {
    match sum {
        Some(s) if s < nstar => AmalgamCase::ThroughBase,
        _ if gap > nstar => AmalgamCase::Spread,
        _ => AmalgamCase::Default,
    }
}

pub fn amalgam_value(sum: Option<Distance>, gap: Distance, nstar: Distance) -> Distance {
    match amalgam_case(sum, gap, nstar) {
        AmalgamCase::ThroughBase => sum.expect("through-base case has a sum"),
        AmalgamCase::Spread => gap,
        AmalgamCase::Default => nstar,
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CrossPair {
    pub left: String,
    pub right: String,
    /// `min_c d(a,c) + d(c,b)`.
    pub sum_bound: Distance,
    /// `max_c |d(a,c) - d(c,b)|`.
    pub gap_bound: Distance,
    /// Distance in the ambient space, when there is one.
    pub actual: Option<Distance>,
}

impl fmt::Display for CrossPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "({}, {}): sum bound {}, gap bound {}",
            self.left, self.right, self.sum_bound, self.gap_bound
        )?;
        if let Some(d) = self.actual {
            write!(f, ", distance {d}")?;
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize)]
pub struct CrossPairProfile {
    pub pairs: Vec<CrossPair>,
}

impl CrossPairProfile {
    fn push(&mut self, pair: CrossPair) -> Result<(), AmalgamError> {
        if pair.sum_bound < pair.gap_bound {
            return Err(AmalgamError::Precondition(format!(
                "sum bound below gap bound at {pair}"
            )));
        }
        self.pairs.push(pair);
        Ok(())
    }

    pub fn get(&self, left: &str, right: &str) -> Option<&CrossPair> {
        self.pairs
            .iter()
            .find(|p| p.left == left && p.right == right)
    }
}

/// Cross pairs between `xs` and `ys` over `base`, all inside one space.
fn ambient_pairs<'a>(
    space: &'a BoundedMetricSpace,
    base: &'a [usize],
    xs: &'a [usize],
    ys: &'a [usize],
) -> impl Iterator<Item = (usize, usize, Option<Distance>, Distance)> + 'a {
    xs.iter().flat_map(move |&a| {
        ys.iter().map(move |&b| {
            let (sum, gap) = pair_bounds(
                base.len(),
                |c| space.dist(a, base[c]),
                |c| space.dist(b, base[c]),
            );
            (a, b, sum, gap)
        })
    })
}

fn ambient_cross(
    space: &BoundedMetricSpace,
    a: usize,
    b: usize,
    sum: Option<Distance>,
    gap: Distance,
) -> CrossPair {
    CrossPair {
        left: space.points()[a].clone(),
        right: space.points()[b].clone(),
        sum_bound: sum.unwrap_or(Distance::MAX),
        gap_bound: gap,
        actual: Some(space.dist(a, b)),
    }
}

/// First cross pair with `d < k` that is not realized through the base.
fn first_below(
    space: &BoundedMetricSpace,
    base: &[usize],
    xs: &[usize],
    ys: &[usize],
    k: Distance,
) -> Option<CrossPair> {
    ambient_pairs(space, base, xs, ys)
        .find(|&(a, b, sum, _)| {
            let d = space.dist(a, b);
            d < k && Some(d) != sum
        })
        .map(|(a, b, sum, gap)| ambient_cross(space, a, b, sum, gap))
}

/// First cross pair with `d > k` that does not sit at the gap bound.
fn first_above(
    space: &BoundedMetricSpace,
    base: &[usize],
    xs: &[usize],
    ys: &[usize],
    k: Distance,
) -> Option<CrossPair> {
    ambient_pairs(space, base, xs, ys)
        .find(|&(a, b, _, gap)| {
            let d = space.dist(a, b);
            d > k && d != gap
        })
        .map(|(a, b, sum, gap)| ambient_cross(space, a, b, sum, gap))
}

/// First cross pair whose distance differs from the free-amalgam value.
fn first_not_free(
    space: &BoundedMetricSpace,
    base: &[usize],
    xs: &[usize],
    ys: &[usize],
    nstar: Distance,
) -> Option<CrossPair> {
    ambient_pairs(space, base, xs, ys)
        .find(|&(a, b, sum, gap)| space.dist(a, b) != amalgam_value(sum, gap, nstar))
        .map(|(a, b, sum, gap)| ambient_cross(space, a, b, sum, gap))
}

fn index_set<S: AsRef<str>>(
    space: &BoundedMetricSpace,
    names: &[S],
) -> Result<BTreeSet<usize>, AmalgamError> {
    names
        .iter()
        .map(|n| {
            space
                .index_of(n.as_ref())
                .ok_or_else(|| SpaceError::UnknownPoint(n.as_ref().to_string()).into())
        })
        .collect()
}

fn minus(a: &[usize], b: &[usize]) -> Vec<usize> {
    a.iter().copied().filter(|x| !b.contains(x)).collect()
}

fn names_of(space: &BoundedMetricSpace, idx: &[usize]) -> Vec<String> {
    idx.iter().map(|&i| space.points()[i].clone()).collect()
}

/// An ambient space with marked subsets `C ⊆ A` and `C ⊆ B`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Configuration {
    space: BoundedMetricSpace,
    nstar: Distance,
    base: Vec<usize>,
    left: Vec<usize>,
    right: Vec<usize>,
}

impl Configuration {
    /// `left` and `right` are taken together with the base.
    pub fn new<S: AsRef<str>>(
        space: BoundedMetricSpace,
        nstar: Distance,
        base: &[S],
        left: &[S],
        right: &[S],
    ) -> Result<Self, AmalgamError> {
        check_nstar(space.bound(), nstar)?;
        let base = index_set(&space, base)?;
        let left: BTreeSet<usize> = index_set(&space, left)?.union(&base).copied().collect();
        let right: BTreeSet<usize> = index_set(&space, right)?.union(&base).copied().collect();
        Ok(Configuration {
            space,
            nstar,
            base: base.into_iter().collect(),
            left: left.into_iter().collect(),
            right: right.into_iter().collect(),
        })
    }

    pub fn space(&self) -> &BoundedMetricSpace {
        &self.space
    }

    pub fn nstar(&self) -> Distance {
        self.nstar
    }

    pub fn base_points(&self) -> Vec<String> {
        names_of(&self.space, &self.base)
    }

    pub fn left_points(&self) -> Vec<String> {
        names_of(&self.space, &self.left)
    }

    pub fn right_points(&self) -> Vec<String> {
        names_of(&self.space, &self.right)
    }

    pub(crate) fn left_only(&self) -> Vec<usize> {
        minus(&self.left, &self.base)
    }

    pub(crate) fn right_only(&self) -> Vec<usize> {
        minus(&self.right, &self.base)
    }

    /// Whether `A ∩ B = C`.
    pub fn is_disjoint_over_base(&self) -> bool {
        self.overlap().is_none()
    }

    fn overlap(&self) -> Option<usize> {
        self.left_only()
            .into_iter()
            .find(|x| self.right.contains(x))
    }

    fn require_disjoint(&self) -> Result<(), AmalgamError> {
        match self.overlap() {
            Some(x) => Err(AmalgamError::Overlap(self.space.points()[x].clone())),
            None => Ok(()),
        }
    }

    pub fn cross_profile(&self) -> Result<CrossPairProfile, AmalgamError> {
        if self.base.is_empty() {
            return Err(AmalgamError::EmptyBase);
        }
        self.require_disjoint()?;
        let mut profile = CrossPairProfile::default();
        for (a, b, sum, gap) in ambient_pairs(
            &self.space,
            &self.base,
            &self.left_only(),
            &self.right_only(),
        ) {
            profile.push(ambient_cross(&self.space, a, b, sum, gap))?;
        }
        Ok(profile)
    }

    /// Every cross distance is at least `k` or equals the sum bound.
    pub fn distance_at_least(&self, k: Distance) -> Result<bool, AmalgamError> {
        Ok(self.below_witness(k)?.is_none())
    }

    /// Every cross distance is at most `k` or equals the gap bound.
    pub fn distance_at_most(&self, k: Distance) -> Result<bool, AmalgamError> {
        Ok(self.above_witness(k)?.is_none())
    }

    /// The first pair breaking [`Self::distance_at_least`], if any.
    pub fn below_witness(&self, k: Distance) -> Result<Option<CrossPair>, AmalgamError> {
        self.require_disjoint()?;
        Ok(first_below(
            &self.space,
            &self.base,
            &self.left_only(),
            &self.right_only(),
            k,
        ))
    }

    /// The first pair breaking [`Self::distance_at_most`], if any.
    pub fn above_witness(&self, k: Distance) -> Result<Option<CrossPair>, AmalgamError> {
        self.require_disjoint()?;
        Ok(first_above(
            &self.space,
            &self.base,
            &self.left_only(),
            &self.right_only(),
            k,
        ))
    }

    /// Whether every cross distance is the free-amalgam value over the base.
    pub fn is_freely_amalgamated(&self) -> Result<bool, AmalgamError> {
        self.require_disjoint()?;
        Ok(first_not_free(
            &self.space,
            &self.base,
            &self.left_only(),
            &self.right_only(),
            self.nstar,
        )
        .is_none())
    }

    /// The sub-configuration on `A ∪ B`.
    pub fn restricted(&self) -> Result<Configuration, AmalgamError> {
        let keep: BTreeSet<usize> = self.left.iter().chain(&self.right).copied().collect();
        let names: Vec<String> = keep
            .iter()
            .map(|&i| self.space.points()[i].clone())
            .collect();
        let space = self.space.restrict(&names)?;
        Configuration::new(
            space,
            self.nstar,
            &self.base_points(),
            &self.left_points(),
            &self.right_points(),
        )
    }
}

/// Two spaces with isometric copies of a common base, ready to amalgamate.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AmalgamationTriple {
    base: BoundedMetricSpace,
    left: BoundedMetricSpace,
    right: BoundedMetricSpace,
    left_embedding: BTreeMap<String, String>,
    right_embedding: BTreeMap<String, String>,
    nstar: Distance,
    /// Side indices of the base images (in base order) and of the points
    /// outside the base.
    #[serde(skip)]
    layout: Layout,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
struct Layout {
    left_base: Vec<usize>,
    right_base: Vec<usize>,
    left_only: Vec<usize>,
    right_only: Vec<usize>,
}

impl AmalgamationTriple {
    pub fn new(
        base: BoundedMetricSpace,
        left: BoundedMetricSpace,
        right: BoundedMetricSpace,
        left_embedding: BTreeMap<String, String>,
        right_embedding: BTreeMap<String, String>,
        nstar: Distance,
    ) -> Result<Self, AmalgamError> {
        let n = base.bound();
        for side in [&left, &right] {
            if side.bound() != n {
                return Err(AmalgamError::BoundMismatch(n, side.bound()));
            }
        }
        check_nstar(n, nstar)?;
        if !crate::spaces::is_isometric_extension(&base, &left, &left_embedding)? {
            return Err(AmalgamError::NotEmbedded("left"));
        }
        if !crate::spaces::is_isometric_extension(&base, &right, &right_embedding)? {
            return Err(AmalgamError::NotEmbedded("right"));
        }
        let image = |side: &BoundedMetricSpace, emb: &BTreeMap<String, String>| -> Vec<usize> {
            base.points()
                .iter()
                .map(|c| side.index_of(&emb[c]).expect("checked embedding"))
                .collect()
        };
        let (left_base, right_base) = (
            image(&left, &left_embedding),
            image(&right, &right_embedding),
        );
        let rest = |len: usize, img: &[usize]| -> Vec<usize> {
            (0..len).filter(|i| !img.contains(i)).collect()
        };
        let layout = Layout {
            left_only: rest(left.len(), &left_base),
            right_only: rest(right.len(), &right_base),
            left_base,
            right_base,
        };
        Ok(AmalgamationTriple {
            base,
            left,
            right,
            left_embedding,
            right_embedding,
            nstar,
            layout,
        })
    }

    /// Triple whose base is the subspace of `left` on `base_points`, embedded
    /// by name into both sides. `nstar` defaults to `ceil(n / 2)`.
    pub fn over_shared_points<S: AsRef<str>>(
        left: BoundedMetricSpace,
        right: BoundedMetricSpace,
        base_points: &[S],
        nstar: Option<Distance>,
    ) -> Result<Self, AmalgamError> {
        let base = left.restrict(base_points)?;
        let id: BTreeMap<String, String> = base
            .points()
            .iter()
            .map(|p| (p.clone(), p.clone()))
            .collect();
        let nstar = nstar.unwrap_or_else(|| default_nstar(left.bound()));
        Self::new(base, left, right, id.clone(), id, nstar)
    }

    pub fn bound(&self) -> Distance {
        self.base.bound()
    }

    pub fn nstar(&self) -> Distance {
        self.nstar
    }

    pub fn set_nstar(&mut self, nstar: Distance) -> Result<(), AmalgamError> {
        check_nstar(self.bound(), nstar)?;
        self.nstar = nstar;
        Ok(())
    }

    pub fn base(&self) -> &BoundedMetricSpace {
        &self.base
    }

    pub fn left(&self) -> &BoundedMetricSpace {
        &self.left
    }

    pub fn right(&self) -> &BoundedMetricSpace {
        &self.right
    }

    fn left_base(&self) -> &[usize] {
        &self.layout.left_base
    }

    fn right_base(&self) -> &[usize] {
        &self.layout.right_base
    }

    fn left_only(&self) -> &[usize] {
        &self.layout.left_only
    }

    fn right_only(&self) -> &[usize] {
        &self.layout.right_only
    }

    fn bounds(
        &self,
        a: usize,
        b: usize,
        lb: &[usize],
        rb: &[usize],
    ) -> (Option<Distance>, Distance) {
        pair_bounds(
            lb.len(),
            |c| self.left.dist(a, lb[c]),
            |c| self.right.dist(b, rb[c]),
        )
    }

    pub fn cross_profile(&self) -> Result<CrossPairProfile, AmalgamError> {
        if self.base.is_empty() {
            return Err(AmalgamError::EmptyBase);
        }
        let (lb, rb) = (self.left_base(), self.right_base());
        let mut profile = CrossPairProfile::default();
        for &a in self.left_only() {
            for &b in self.right_only() {
                let (sum, gap) = self.bounds(a, b, lb, rb);
                profile.push(CrossPair {
                    left: self.left.points()[a].clone(),
                    right: self.right.points()[b].clone(),
                    sum_bound: sum.expect("nonempty base"),
                    gap_bound: gap,
                    actual: None,
                })?;
            }
        }
        Ok(profile)
    }
}

/// Output of [`free_amalgam`]: the amalgam and both embeddings into it.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Amalgam {
    pub space: BoundedMetricSpace,
    pub left: EmbeddingWitness,
    pub right: EmbeddingWitness,
    pub base_points: Vec<String>,
    nstar: Distance,
}

impl Amalgam {
    /// The amalgam as a configuration with `A`, `B` the embedded images.
    pub fn configuration(&self) -> Configuration {
        let left: Vec<&String> = self.left.map.values().collect();
        let right: Vec<&String> = self.right.map.values().collect();
        let base: Vec<&String> = self.base_points.iter().collect();
        Configuration::new(self.space.clone(), self.nstar, &base, &left, &right)
            .expect("amalgam points exist")
    }
}

fn fresh_name(name: &str, tag: &str, taken: &[&str]) -> String {
    if !taken.contains(&name) {
        return name.to_string();
    }
    let mut candidate = format!("{name}.{tag}");
    while taken.contains(&candidate.as_str()) {
        candidate.push('\'');
    }
    candidate
}

/// Glues `A` and `B` along the base, giving every cross pair the free value.
///
/// Base points keep their base names; other points keep their own names
/// unless that would clash, in which case they get a `.L` / `.R` suffix.
pub fn free_amalgam(triple: &AmalgamationTriple) -> Result<Amalgam, AmalgamError> {
    let (lb, rb) = (triple.left_base(), triple.right_base());
    let (lo, ro) = (triple.left_only(), triple.right_only());
    let base_names = triple.base.points();
    let (lp, rp) = (triple.left.points(), triple.right.points());

    // A side point keeps its name unless a base point, a point of the other
    // side or an already chosen name has it.
    let mut left_new: Vec<String> = Vec::with_capacity(lo.len());
    for &a in lo {
        let mut blocked: Vec<&str> = base_names.iter().map(String::as_str).collect();
        blocked.extend(ro.iter().map(|&b| rp[b].as_str()));
        blocked.extend(left_new.iter().map(String::as_str));
        let name = fresh_name(&lp[a], "L", &blocked);
        left_new.push(name);
    }
    let mut right_new: Vec<String> = Vec::with_capacity(ro.len());
    for &b in ro {
        let mut blocked: Vec<&str> = base_names.iter().map(String::as_str).collect();
        blocked.extend(lo.iter().map(|&a| lp[a].as_str()));
        blocked.extend(left_new.iter().chain(&right_new).map(String::as_str));
        let name = fresh_name(&rp[b], "R", &blocked);
        right_new.push(name);
    }

    // Slots: base, left-only, right-only.
    #[derive(Clone, Copy)]
    enum Slot {
        Base(usize),
        Left(usize),
        Right(usize),
    }
    let mut slots: Vec<(&str, Slot)> = Vec::with_capacity(lb.len() + lo.len() + ro.len());
    slots.extend(
        base_names
            .iter()
            .enumerate()
            .map(|(c, n)| (n.as_str(), Slot::Base(c))),
    );
    slots.extend(
        lo.iter()
            .zip(&left_new)
            .map(|(&a, n)| (n.as_str(), Slot::Left(a))),
    );
    slots.extend(
        ro.iter()
            .zip(&right_new)
            .map(|(&b, n)| (n.as_str(), Slot::Right(b))),
    );
    slots.sort_unstable_by(|x, y| x.0.cmp(y.0));
    let dist = |x: Slot, y: Slot| -> Distance {
        match (x, y) {
            (Slot::Base(c), Slot::Base(e)) => triple.base.dist(c, e),
            (Slot::Base(c), Slot::Left(a)) | (Slot::Left(a), Slot::Base(c)) => {
                triple.left.dist(a, lb[c])
            }
            (Slot::Base(c), Slot::Right(b)) | (Slot::Right(b), Slot::Base(c)) => {
                triple.right.dist(b, rb[c])
            }
            (Slot::Left(a), Slot::Left(a2)) => triple.left.dist(a, a2),
            (Slot::Right(b), Slot::Right(b2)) => triple.right.dist(b, b2),
            (Slot::Left(a), Slot::Right(b)) | (Slot::Right(b), Slot::Left(a)) => {
                let (sum, gap) = triple.bounds(a, b, lb, rb);
                amalgam_value(sum, gap, triple.nstar)
            }
        }
    };
    let table: Vec<Distance> = slots
        .iter()
        .flat_map(|&(_, x)| slots.iter().map(move |&(_, y)| dist(x, y)))
        .collect();
    let names: Vec<String> = slots.iter().map(|(n, _)| n.to_string()).collect();
    let space = match BoundedMetricSpace::from_sorted_flat(triple.bound(), names, table) {
        Ok(s) => s,
        Err(SpaceError::NotAMetric(report)) => return Err(AmalgamError::NotAMetric(report)),
        Err(e) => return Err(e.into()),
    };

    let side_map = |points: &[String], base_idx: &[usize], only: &[usize], new: &[String]| {
        let mut map = BTreeMap::new();
        for (c, name) in base_names.iter().enumerate() {
            map.insert(points[base_idx[c]].clone(), name.clone());
        }
        for (&x, name) in only.iter().zip(new) {
            map.insert(points[x].clone(), name.clone());
        }
        map
    };
    let left = EmbeddingWitness::new(&triple.left, &space, side_map(lp, lb, lo, &left_new))?;
    let right = EmbeddingWitness::new(&triple.right, &space, side_map(rp, rb, ro, &right_new))?;
    Ok(Amalgam {
        space,
        left,
        right,
        base_points: base_names.to_vec(),
        nstar: triple.nstar,
    })
}

/// Ambient space with `C ⊆ A, B, D` marked, the setting of the distance
/// composition check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaConfiguration {
    space: BoundedMetricSpace,
    nstar: Distance,
    base: Vec<usize>,
    left: Vec<usize>,
    right: Vec<usize>,
    middle: Vec<usize>,
}

impl LemmaConfiguration {
    /// Sides are taken together with the base. Fails unless `A`, `B` and `D`
    /// pairwise meet exactly in `C`.
    pub fn new<S: AsRef<str>>(
        space: BoundedMetricSpace,
        nstar: Distance,
        base: &[S],
        left: &[S],
        right: &[S],
        middle: &[S],
    ) -> Result<Self, AmalgamError> {
        check_nstar(space.bound(), nstar)?;
        let base = index_set(&space, base)?;
        let widen = |s: BTreeSet<usize>| -> Vec<usize> { s.union(&base).copied().collect() };
        let left = widen(index_set(&space, left)?);
        let right = widen(index_set(&space, right)?);
        let middle = widen(index_set(&space, middle)?);
        let base: Vec<usize> = base.into_iter().collect();
        for (x, y) in [(&left, &right), (&left, &middle), (&right, &middle)] {
            if let Some(&p) = x.iter().find(|p| !base.contains(p) && y.contains(p)) {
                return Err(AmalgamError::Overlap(space.points()[p].clone()));
            }
        }
        Ok(LemmaConfiguration {
            space,
            nstar,
            base,
            left,
            right,
            middle,
        })
    }

    pub fn space(&self) -> &BoundedMetricSpace {
        &self.space
    }

    pub fn nstar(&self) -> Distance {
        self.nstar
    }
}

/// Point sets named in the distance composition check.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Part {
    A,
    B,
    D,
    #[serde(rename = "A ∪ B")]
    AB,
}

impl fmt::Display for Part {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Part::A => "A",
            Part::B => "B",
            Part::D => "D",
            Part::AB => "A ∪ B",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Statement {
    FreelyAmalgamated,
    AtLeast { from: Part, to: Part, k: Distance },
    AtMost { from: Part, to: Part, k: Distance },
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::FreelyAmalgamated => write!(f, "A ∪ D and B ∪ D freely amalgamated over D"),
            Statement::AtLeast { from, to, k } => {
                write!(f, "{from} at distance >= {k} from {to} over C")
            }
            Statement::AtMost { from, to, k } => {
                write!(f, "{from} at distance <= {k} from {to} over C")
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Clause {
    pub statement: Statement,
    pub holds: bool,
    pub witness: Option<CrossPair>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaVerdict {
    Confirmed,
    Refuted,
    PreconditionsNotMet,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LemmaReport {
    pub k1: Distance,
    pub k2: Distance,
    pub preconditions: Vec<Clause>,
    pub conclusions: Vec<Clause>,
}

impl LemmaReport {
    pub fn verdict(&self) -> LemmaVerdict {
        if !self.preconditions.iter().all(|c| c.holds) {
            LemmaVerdict::PreconditionsNotMet
        } else if self.conclusions.iter().all(|c| c.holds) {
            LemmaVerdict::Confirmed
        } else {
            LemmaVerdict::Refuted
        }
    }

    pub fn failing_conclusion(&self) -> Option<&Clause> {
        self.conclusions.iter().find(|c| !c.holds)
    }
}

fn clause(statement: Statement, witness: Option<CrossPair>) -> Clause {
    Clause {
        statement,
        holds: witness.is_none(),
        witness,
    }
}

/// Evaluates the distance composition statement on a configuration:
/// if `A ∪ D` and `B ∪ D` are freely amalgamated over `D` and both `A`, `B`
/// lie at distance `>= k1` and `<= k2` from `D` over `C`, then `A` lies at
/// distance `>= min(nstar, 2 k1)` and `<= max(k2 - k1, nstar)` from `B`, and
/// `D` at distance `>= k1` and `<= k2` from `A ∪ B`, all over `C`.
///
/// Hypotheses and conclusions are all evaluated and reported; the verdict
/// separates a failed hypothesis from a refuted conclusion.
pub fn check_distance_lemma(
    cfg: &LemmaConfiguration,
    k1: Distance,
    k2: Distance,
) -> Result<LemmaReport, AmalgamError> {
    use Part::*;
    use Statement::*;
    let (n, nstar) = (cfg.space.bound(), cfg.nstar);
    if !(1 <= k1 && k1 <= nstar && nstar <= k2 && k2 <= n) {
        return Err(AmalgamError::ParameterRange { k1, k2, nstar, n });
    }
    let s = &cfg.space;
    let c = &cfg.base;
    let a_only = minus(&cfg.left, c);
    let b_only = minus(&cfg.right, c);
    let d_only = minus(&cfg.middle, c);
    let ab_only: Vec<usize> = a_only.iter().chain(&b_only).copied().collect();

    let preconditions = vec![
        clause(
            FreelyAmalgamated,
            first_not_free(s, &cfg.middle, &a_only, &b_only, nstar),
        ),
        clause(
            AtLeast {
                from: A,
                to: D,
                k: k1,
            },
            first_below(s, c, &a_only, &d_only, k1),
        ),
        clause(
            AtMost {
                from: A,
                to: D,
                k: k2,
            },
            first_above(s, c, &a_only, &d_only, k2),
        ),
        clause(
            AtLeast {
                from: B,
                to: D,
                k: k1,
            },
            first_below(s, c, &b_only, &d_only, k1),
        ),
        clause(
            AtMost {
                from: B,
                to: D,
                k: k2,
            },
            first_above(s, c, &b_only, &d_only, k2),
        ),
    ];
    let lower = nstar.min(2 * k1);
    let upper = (k2 - k1).max(nstar);
    let conclusions = vec![
        clause(
            AtLeast {
                from: A,
                to: B,
                k: lower,
            },
            first_below(s, c, &a_only, &b_only, lower),
        ),
        clause(
            AtMost {
                from: A,
                to: B,
                k: upper,
            },
            first_above(s, c, &a_only, &b_only, upper),
        ),
        clause(
            AtLeast {
                from: D,
                to: AB,
                k: k1,
            },
            first_below(s, c, &d_only, &ab_only, k1),
        ),
        clause(
            AtMost {
                from: D,
                to: AB,
                k: k2,
            },
            first_above(s, c, &d_only, &ab_only, k2),
        ),
    ];
    Ok(LemmaReport {
        k1,
        k2,
        preconditions,
        conclusions,
    })
}

/// Input to [`sequence_extension`].
///
/// `joint` is a space on `C ∪ A ∪ B_0`; `sequence` a space on `C` and all
/// copies `B_0, B_1, ...`. `copies[i]` lists the points of `B_i` outside the
/// base, in the order matching the points of `B_0`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SequenceInput {
    pub joint: BoundedMetricSpace,
    pub sequence: BoundedMetricSpace,
    pub base: Vec<String>,
    pub left: Vec<String>,
    pub copies: Vec<Vec<String>>,
    pub nstar: Distance,
}

/// The candidate table `d*` on `A ∪ B_0 ∪ B_1 ∪ ...` and its metric check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SequenceExtension {
    pub bound: Distance,
    pub points: Vec<String>,
    pub matrix: Vec<Vec<Distance>>,
    pub report: ValidationReport,
}

impl SequenceExtension {
    pub fn is_metric(&self) -> bool {
        self.report.is_ok()
    }

    pub fn into_space(self) -> Result<BoundedMetricSpace, SpaceError> {
        BoundedMetricSpace::from_matrix(self.bound, self.points, self.matrix)
    }
}

fn lookup(space: &BoundedMetricSpace, name: &str, what: &str) -> Result<usize, AmalgamError> {
    space.index_of(name).ok_or_else(|| {
        AmalgamError::InconsistentBlocks(format!("{name:?} missing from {what} space"))
    })
}

/// Copies the `A × B_0` distance pattern onto every `A × B_i` block while
/// keeping the given distances among the copies, then checks the result.
///
/// Requires `A` and `B_0` to be at distance `>= nstar` and `<= nstar + 1`
/// over `C` in `joint`, and every `B_i` to be isometric to `B_0` over `C`
/// under the listed enumeration.
pub fn sequence_extension(input: &SequenceInput) -> Result<SequenceExtension, AmalgamError> {
    let (joint, seq) = (&input.joint, &input.sequence);
    if joint.bound() != seq.bound() {
        return Err(AmalgamError::BoundMismatch(joint.bound(), seq.bound()));
    }
    let n = joint.bound();
    check_nstar(n, input.nstar)?;
    let Some(first) = input.copies.first() else {
        return Err(AmalgamError::InconsistentBlocks("no copies given".into()));
    };

    let mut seen = BTreeSet::new();
    for p in input
        .base
        .iter()
        .chain(&input.left)
        .chain(input.copies.iter().flatten())
    {
        if !seen.insert(p.as_str()) {
            return Err(AmalgamError::InconsistentBlocks(format!(
                "point {p:?} listed twice"
            )));
        }
    }
    let joint_expected: BTreeSet<&str> = input
        .base
        .iter()
        .chain(&input.left)
        .chain(first)
        .map(String::as_str)
        .collect();
    if joint
        .points()
        .iter()
        .map(String::as_str)
        .collect::<BTreeSet<_>>()
        != joint_expected
    {
        return Err(AmalgamError::InconsistentBlocks(
            "joint space must hold exactly C, A and B_0".into(),
        ));
    }
    let seq_expected: BTreeSet<&str> = input
        .base
        .iter()
        .chain(input.copies.iter().flatten())
        .map(String::as_str)
        .collect();
    if seq
        .points()
        .iter()
        .map(String::as_str)
        .collect::<BTreeSet<_>>()
        != seq_expected
    {
        return Err(AmalgamError::InconsistentBlocks(
            "sequence space must hold exactly C and the copies".into(),
        ));
    }

    let shared: Vec<&String> = input.base.iter().chain(first).collect();
    for (i, p) in shared.iter().enumerate() {
        for q in &shared[i + 1..] {
            if joint.dist_by_name(p, q) != seq.dist_by_name(p, q) {
                return Err(AmalgamError::InconsistentBlocks(format!(
                    "joint and sequence disagree on d({p},{q})"
                )));
            }
        }
    }
    for (ci, copy) in input.copies.iter().enumerate().skip(1) {
        if copy.len() != first.len() {
            return Err(AmalgamError::InconsistentBlocks(format!(
                "copy {ci} has {} points, expected {}",
                copy.len(),
                first.len()
            )));
        }
        let x: Vec<&String> = input.base.iter().chain(first.iter()).collect();
        let y: Vec<&String> = input.base.iter().chain(copy.iter()).collect();
        for i in 0..x.len() {
            for j in i + 1..x.len() {
                if seq.dist_by_name(x[i], x[j]) != seq.dist_by_name(y[i], y[j]) {
                    return Err(AmalgamError::InconsistentBlocks(format!(
                        "copy {ci} not isometric to copy 0 over the base at ({}, {})",
                        y[i], y[j]
                    )));
                }
            }
        }
    }

    let base_idx: Vec<usize> = input
        .base
        .iter()
        .map(|p| lookup(joint, p, "joint"))
        .collect::<Result<_, _>>()?;
    let a_idx: Vec<usize> = input
        .left
        .iter()
        .map(|p| lookup(joint, p, "joint"))
        .collect::<Result<_, _>>()?;
    let b_idx: Vec<usize> = first
        .iter()
        .map(|p| lookup(joint, p, "joint"))
        .collect::<Result<_, _>>()?;
    if let Some(w) = first_below(joint, &base_idx, &a_idx, &b_idx, input.nstar) {
        return Err(AmalgamError::Precondition(format!(
            "A and B_0 not at distance >= {} over C: {w}",
            input.nstar
        )));
    }
    if let Some(w) = first_above(joint, &base_idx, &a_idx, &b_idx, input.nstar + 1) {
        return Err(AmalgamError::Precondition(format!(
            "A and B_0 not at distance <= {} over C: {w}",
            input.nstar + 1
        )));
    }

    // Point -> (role, index) for the table.
    enum Role {
        Left,
        Copy(usize),
        Base,
    }
    let mut points: Vec<String> = seen.iter().map(|s| s.to_string()).collect();
    points.sort();
    let role = |p: &str| -> Role {
        if input.left.iter().any(|x| x == p) {
            return Role::Left;
        }
        for copy in &input.copies {
            if let Some(j) = copy.iter().position(|x| x == p) {
                return Role::Copy(j);
            }
        }
        Role::Base
    };
    let d = |p: &str, q: &str| -> Distance {
        match (role(p), role(q)) {
            (Role::Left | Role::Base, Role::Left | Role::Base) => joint.dist_by_name(p, q).unwrap(),
            (Role::Copy(_) | Role::Base, Role::Copy(_) | Role::Base) => {
                seq.dist_by_name(p, q).unwrap()
            }
            (Role::Left, Role::Copy(j)) => joint.dist_by_name(p, &first[j]).unwrap(),
            (Role::Copy(j), Role::Left) => joint.dist_by_name(&first[j], q).unwrap(),
        }
    };
    let matrix: Vec<Vec<Distance>> = points
        .iter()
        .map(|p| points.iter().map(|q| d(p, q)).collect())
        .collect();
    let report = validate_metric(&points, &matrix, n);
    Ok(SequenceExtension {
        bound: n,
        points,
        matrix,
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn star(n: Distance, dac: Distance, dbc: Distance) -> (BoundedMetricSpace, BoundedMetricSpace) {
        let a = BoundedMetricSpace::from_pairs(n, pts(&["a", "c"]), [("a", "c", dac)]).unwrap();
        let b = BoundedMetricSpace::from_pairs(n, pts(&["b", "c"]), [("b", "c", dbc)]).unwrap();
        (a, b)
    }

    /// Independent recomputation of the amalgam value straight from the rule.
    fn oracle_value(dac: &[Distance], dbc: &[Distance], nstar: Distance) -> Distance {
        let sum = dac.iter().zip(dbc).map(|(x, y)| x + y).min().unwrap();
        let gap = dac
            .iter()
            .zip(dbc)
            .map(|(x, y)| x.abs_diff(*y))
            .max()
            .unwrap();
        if sum < nstar {
            sum
        } else if gap > nstar {
            gap
        } else {
            nstar
        }
    }

    #[test]
    fn profile_single_base_point() {
        let (a, b) = star(8, 1, 2);
        let t = AmalgamationTriple::over_shared_points(a, b, &["c"], Some(4)).unwrap();
        let p = t.cross_profile().unwrap();
        assert_eq!((p.pairs[0].sum_bound, p.pairs[0].gap_bound), (3, 1));

        let (a, b) = star(8, 1, 7);
        let t = AmalgamationTriple::over_shared_points(a, b, &["c"], Some(4)).unwrap();
        let p = t.cross_profile().unwrap();
        assert_eq!((p.pairs[0].sum_bound, p.pairs[0].gap_bound), (8, 6));
    }

    #[test]
    fn profile_two_base_points() {
        let a = BoundedMetricSpace::from_pairs(
            4,
            pts(&["a", "c1", "c2"]),
            [("a", "c1", 1), ("a", "c2", 2), ("c1", "c2", 1)],
        )
        .unwrap();
        let b = BoundedMetricSpace::from_pairs(
            4,
            pts(&["b", "c1", "c2"]),
            [("b", "c1", 2), ("b", "c2", 1), ("c1", "c2", 1)],
        )
        .unwrap();
        let t = AmalgamationTriple::over_shared_points(a, b, &["c1", "c2"], None).unwrap();
        let p = t.cross_profile().unwrap();
        // brute force over both base points
        let sum = [1 + 2, 2 + 1].into_iter().min().unwrap();
        let gap = [1u32.abs_diff(2), 2u32.abs_diff(1)]
            .into_iter()
            .max()
            .unwrap();
        assert_eq!((p.pairs[0].sum_bound, p.pairs[0].gap_bound), (sum, gap));
        assert_eq!((sum, gap), (3, 1));
    }

    #[test]
    fn empty_base_profile_fails() {
        let a = BoundedMetricSpace::single_point(3, "a").unwrap();
        let b = BoundedMetricSpace::single_point(3, "b").unwrap();
        let empty: [&str; 0] = [];
        let t = AmalgamationTriple::over_shared_points(a, b, &empty, None).unwrap();
        assert_eq!(t.cross_profile(), Err(AmalgamError::EmptyBase));
        // the amalgam itself is still defined: everything at nstar
        let d = free_amalgam(&t).unwrap();
        assert_eq!(d.space.dist_by_name("a", "b"), Some(2));
    }

    #[test]
    fn amalgam_cases() {
        for (n, nstar, dac, dbc, want) in [(8, 4, 1, 2, 3), (8, 4, 1, 7, 6), (4, 2, 1, 3, 2)] {
            assert_eq!(oracle_value(&[dac], &[dbc], nstar), want);
            let (a, b) = star(n, dac, dbc);
            let t = AmalgamationTriple::over_shared_points(a, b, &["c"], Some(nstar)).unwrap();
            let d = free_amalgam(&t).unwrap();
            assert_eq!(d.space.dist_by_name("a", "b"), Some(want));
            assert!(validate_metric(d.space.points(), &d.space.matrix(), n).is_ok());
        }
    }

    #[test]
    fn base_equal_to_left_reproduces_right() {
        let c = BoundedMetricSpace::from_pairs(4, pts(&["c1", "c2"]), [("c1", "c2", 2)]).unwrap();
        let b = BoundedMetricSpace::from_pairs(
            4,
            pts(&["b", "c1", "c2"]),
            [("b", "c1", 1), ("b", "c2", 3), ("c1", "c2", 2)],
        )
        .unwrap();
        let t = AmalgamationTriple::over_shared_points(c, b.clone(), &["c1", "c2"], None).unwrap();
        let d = free_amalgam(&t).unwrap();
        assert_eq!(d.space, b);
    }

    #[test]
    fn clashing_names_are_suffixed() {
        let (a, _) = star(4, 1, 1);
        let b = BoundedMetricSpace::from_pairs(4, pts(&["a", "c"]), [("a", "c", 3)]).unwrap();
        let t = AmalgamationTriple::over_shared_points(a, b, &["c"], None).unwrap();
        let d = free_amalgam(&t).unwrap();
        assert_eq!(d.space.points(), &pts(&["a.L", "a.R", "c"])[..]);
        assert_eq!(d.space.dist_by_name("a.L", "a.R"), Some(2));
    }

    #[test]
    fn renaming_embeddings() {
        let c = BoundedMetricSpace::single_point(4, "base").unwrap();
        let (a, b) = star(4, 1, 1);
        let emb: BTreeMap<String, String> = [("base".to_string(), "c".to_string())].into();
        let t = AmalgamationTriple::new(c, a, b, emb.clone(), emb, 2).unwrap();
        let d = free_amalgam(&t).unwrap();
        assert_eq!(d.space.points(), &pts(&["a", "b", "base"])[..]);
        assert_eq!(d.left.image("c"), Some("base"));
        assert_eq!(d.space.dist_by_name("a", "b"), Some(2));
    }

    #[test]
    fn rejects_bad_nstar_and_embedding() {
        let (a, b) = star(8, 1, 2);
        assert_eq!(
            AmalgamationTriple::over_shared_points(a.clone(), b.clone(), &["c"], Some(3))
                .unwrap_err(),
            AmalgamError::InvalidNstar { n: 8, nstar: 3 }
        );
        let c = BoundedMetricSpace::from_pairs(8, pts(&["a", "c"]), [("a", "c", 5)]).unwrap();
        let id: BTreeMap<String, String> = [("a", "a"), ("c", "c")]
            .iter()
            .map(|(x, y)| (x.to_string(), y.to_string()))
            .collect();
        assert_eq!(
            AmalgamationTriple::new(c, a.clone(), a, id.clone(), id, 4).unwrap_err(),
            AmalgamError::NotEmbedded("left")
        );
    }

    fn abc(n: Distance, ac: Distance, bc: Distance, ab: Distance) -> BoundedMetricSpace {
        BoundedMetricSpace::from_pairs(
            n,
            pts(&["a", "b", "c"]),
            [("a", "c", ac), ("b", "c", bc), ("a", "b", ab)],
        )
        .unwrap()
    }

    #[test]
    fn distance_predicates() {
        // all cross distances equal k
        let cfg = Configuration::new(abc(4, 2, 2, 3), 2, &["c"], &["a"], &["b"]).unwrap();
        assert!(cfg.distance_at_least(3).unwrap());
        assert!(cfg.distance_at_most(3).unwrap());
        // below k and below the sum bound: sum bound 2 with d(a,b) = 1
        let cfg = Configuration::new(abc(4, 1, 1, 1), 2, &["c"], &["a"], &["b"]).unwrap();
        assert_eq!(cfg.cross_profile().unwrap().pairs[0].sum_bound, 2);
        assert!(!cfg.distance_at_least(2).unwrap());
        // realized through the base
        let cfg = Configuration::new(abc(4, 1, 1, 2), 2, &["c"], &["a"], &["b"]).unwrap();
        assert!(cfg.distance_at_least(4).unwrap());
        // above k and above the gap bound
        let cfg = Configuration::new(abc(8, 1, 7, 7), 4, &["c"], &["a"], &["b"]).unwrap();
        assert_eq!(cfg.cross_profile().unwrap().pairs[0].gap_bound, 6);
        assert!(!cfg.distance_at_most(5).unwrap());
        let cfg = Configuration::new(abc(8, 1, 7, 6), 4, &["c"], &["a"], &["b"]).unwrap();
        assert!(cfg.distance_at_most(5).unwrap());
    }

    #[test]
    fn predicates_reject_overlap() {
        let cfg = Configuration::new(abc(4, 1, 1, 2), 2, &["c"], &["a", "b"], &["b"]).unwrap();
        assert_eq!(
            cfg.distance_at_least(1),
            Err(AmalgamError::Overlap("b".into()))
        );
        assert_eq!(
            cfg.distance_at_most(1),
            Err(AmalgamError::Overlap("b".into()))
        );
    }

    #[test]
    fn lemma_vacuous_when_sides_are_base() {
        let s = BoundedMetricSpace::from_pairs(4, pts(&["c", "d"]), [("c", "d", 2)]).unwrap();
        let cfg = LemmaConfiguration::new(s, 2, &["c"], &["c"], &["c"], &["d"]).unwrap();
        let r = check_distance_lemma(&cfg, 1, 3).unwrap();
        assert_eq!(r.verdict(), LemmaVerdict::Confirmed);
    }

    #[test]
    fn lemma_parameter_range() {
        let s = BoundedMetricSpace::single_point(4, "c").unwrap();
        let cfg = LemmaConfiguration::new(s, 2, &["c"], &["c"], &["c"], &["c"]).unwrap();
        assert!(matches!(
            check_distance_lemma(&cfg, 3, 4),
            Err(AmalgamError::ParameterRange { .. })
        ));
        assert!(matches!(
            check_distance_lemma(&cfg, 1, 1),
            Err(AmalgamError::ParameterRange { .. })
        ));
    }

    /// Builds `A ∪ D` and `B ∪ D` over `D = {c, d}`, amalgamates them freely
    /// over `D`, and checks the report on the result.
    fn lemma_instance(
        n: Distance,
        nstar: Distance,
        ad: [Distance; 2],
        bd: [Distance; 2],
        cd: Distance,
    ) -> Option<LemmaConfiguration> {
        // ad = [d(a,c), d(a,d)]
        let left = BoundedMetricSpace::from_pairs(
            n,
            pts(&["a", "c", "d"]),
            [("a", "c", ad[0]), ("a", "d", ad[1]), ("c", "d", cd)],
        )
        .ok()?;
        let right = BoundedMetricSpace::from_pairs(
            n,
            pts(&["b", "c", "d"]),
            [("b", "c", bd[0]), ("b", "d", bd[1]), ("c", "d", cd)],
        )
        .ok()?;
        let t =
            AmalgamationTriple::over_shared_points(left, right, &["c", "d"], Some(nstar)).ok()?;
        let d = free_amalgam(&t).ok()?;
        LemmaConfiguration::new(d.space, nstar, &["c"], &["a"], &["b"], &["d"]).ok()
    }

    #[test]
    fn lemma_confirmed_on_free_amalgams() {
        let mut checked = 0;
        for n in 2..=6 {
            for nstar in default_nstar(n)..=n {
                for x in 1..=n {
                    for y in 1..=n {
                        for u in 1..=n {
                            for v in 1..=n {
                                for cd in 1..=n {
                                    let Some(cfg) = lemma_instance(n, nstar, [x, y], [u, v], cd)
                                    else {
                                        continue;
                                    };
                                    for k1 in 1..=nstar {
                                        for k2 in nstar..=n {
                                            let r = check_distance_lemma(&cfg, k1, k2).unwrap();
                                            assert_ne!(r.verdict(), LemmaVerdict::Refuted, "{r:?}");
                                            checked +=
                                                (r.verdict() == LemmaVerdict::Confirmed) as usize;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
        }
        assert!(checked > 0);
    }

    #[test]
    fn perturbed_cross_distance_is_refuted() {
        // Search by mutation for a metric whose A-B distance drops below
        // min(nstar, 2 k1) without being realized through C.
        let mut found = false;
        'outer: for n in 4..=6 {
            let nstar = default_nstar(n);
            for x in 1..=n {
                for y in 1..=n {
                    for cd in 1..=n {
                        let Some(cfg) = lemma_instance(n, nstar, [x, y], [x, y], cd) else {
                            continue;
                        };
                        let k1 = nstar.min(2);
                        if check_distance_lemma(&cfg, k1, nstar).unwrap().verdict()
                            != LemmaVerdict::Confirmed
                        {
                            continue;
                        }
                        let s = cfg.space();
                        let (ia, ib) = (s.index_of("a").unwrap(), s.index_of("b").unwrap());
                        let sum =
                            s.dist_by_name("a", "c").unwrap() + s.dist_by_name("b", "c").unwrap();
                        for bad in 1..nstar.min(2 * k1) {
                            if bad == sum {
                                continue;
                            }
                            let mut m = s.matrix();
                            m[ia][ib] = bad;
                            m[ib][ia] = bad;
                            let Ok(mutated) =
                                BoundedMetricSpace::from_matrix(n, s.points().to_vec(), m)
                            else {
                                continue;
                            };
                            let cfg2 = LemmaConfiguration::new(
                                mutated,
                                nstar,
                                &["c"],
                                &["a"],
                                &["b"],
                                &["d"],
                            )
                            .unwrap();
                            let r = check_distance_lemma(&cfg2, k1, nstar).unwrap();
                            let w = r.conclusions[0]
                                .witness
                                .as_ref()
                                .expect("refuted with witness");
                            assert_eq!(
                                (w.left.as_str(), w.right.as_str(), w.actual),
                                ("a", "b", Some(bad))
                            );
                            assert_eq!(r.verdict(), LemmaVerdict::PreconditionsNotMet);
                            found = true;
                            break 'outer;
                        }
                    }
                }
            }
        }
        assert!(found);
    }

    fn seq_input(
        n: Distance,
        nstar: Distance,
        ab: Distance,
        ac: Distance,
        bc: Distance,
        b0b1: Distance,
    ) -> SequenceInput {
        let joint = BoundedMetricSpace::from_pairs(
            n,
            pts(&["a", "b0", "c"]),
            [("a", "b0", ab), ("a", "c", ac), ("b0", "c", bc)],
        )
        .unwrap();
        let sequence = BoundedMetricSpace::from_pairs(
            n,
            pts(&["b0", "b1", "c"]),
            [("b0", "b1", b0b1), ("b0", "c", bc), ("b1", "c", bc)],
        )
        .unwrap();
        SequenceInput {
            joint,
            sequence,
            base: pts(&["c"]),
            left: pts(&["a"]),
            copies: vec![pts(&["b0"]), pts(&["b1"])],
            nstar,
        }
    }

    #[test]
    fn one_copy_reproduces_joint() {
        let mut input = seq_input(4, 2, 2, 1, 2, 1);
        input.copies.truncate(1);
        input.sequence = input.joint.restrict(&["b0", "c"]).unwrap();
        let ext = sequence_extension(&input).unwrap();
        assert_eq!(ext.into_space().unwrap(), input.joint);
    }

    #[test]
    fn two_copies_in_window_are_metric() {
        // A-to-copy distances in {2, 3}, n = 4, nstar = 2
        let input = seq_input(4, 2, 3, 1, 2, 1);
        let ext = sequence_extension(&input).unwrap();
        assert!(ext.is_metric(), "{}", ext.report);
        assert_eq!(ext.matrix[0][2], 3);
    }

    #[test]
    fn unrealized_short_distance_rejected() {
        // d(a, b0) = 1 < nstar with sum bound 1 + 2 = 3
        let input = seq_input(4, 2, 1, 1, 2, 1);
        assert!(matches!(
            sequence_extension(&input),
            Err(AmalgamError::Precondition(_))
        ));
    }

    #[test]
    fn non_isometric_copies_rejected() {
        let mut input = seq_input(4, 2, 2, 1, 2, 1);
        input.sequence = BoundedMetricSpace::from_pairs(
            4,
            pts(&["b0", "b1", "c"]),
            [("b0", "b1", 1), ("b0", "c", 2), ("b1", "c", 3)],
        )
        .unwrap();
        assert!(matches!(
            sequence_extension(&input),
            Err(AmalgamError::InconsistentBlocks(_))
        ));
    }
}
