//! The ladder of distance-window independence relations and the iterated
//! free amalgamation that spreads a configuration into a sequence of copies.
//!
//! Level 0 is disjointness over the base. Level `m >= 1` asks for distance
//! at least `min(2^m, nstar)` and at most `max(nstar, n - (2^m - 1))` over
//! the base.

use std::collections::BTreeMap;

use serde::Serialize;
use thiserror::Error;

use crate::amalgam::{free_amalgam, AmalgamError, AmalgamationTriple, Configuration};
use crate::spaces::{BoundedMetricSpace, Distance};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum IndependenceError {
    #[error(transparent)]
    Amalgam(#[from] AmalgamError),
    #[error("level 0 has no distance bounds, only disjointness")]
    LevelZero,
    #[error("copy count must be at least 1")]
    ZeroCount,
    #[error("precondition failed: {0}")]
    Precondition(String),
    /// A construction check failed; this indicates a bug, not bad input.
    #[error("internal consistency failure: {0}")]
    Internal(String),
}

impl From<crate::spaces::SpaceError> for IndependenceError {
    fn from(e: crate::spaces::SpaceError) -> Self {
        IndependenceError::Amalgam(e.into())
    }
}

/// `(lower, upper)` window of level `m >= 1`.
pub fn level_bounds(
    m: u32,
    n: Distance,
    nstar: Distance,
) -> Result<(Distance, Distance), IndependenceError> {
    if m == 0 {
        return Err(IndependenceError::LevelZero);
    }
    let pow = 1u64
        .checked_shl(m)
        .filter(|&p| p <= u64::from(u32::MAX))
        .unwrap_or(u64::from(u32::MAX));
    let lower = pow.min(u64::from(nstar)) as Distance;
    let upper = u64::from(n).saturating_sub(pow - 1).max(u64::from(nstar)) as Distance;
    Ok((lower, upper))
}

/// A level of the ladder for a fixed bound and `nstar`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct IndependenceLevel {
    pub level: u32,
    pub bound: Distance,
    pub nstar: Distance,
}

impl IndependenceLevel {
    /// `None` at level 0.
    pub fn bounds(&self) -> Option<(Distance, Distance)> {
        level_bounds(self.level, self.bound, self.nstar).ok()
    }

    /// The `(k1, k2)` hypothesis window used to climb from this level:
    /// `(1, n)` at level 0, the level's own bounds above it.
    pub fn hypothesis_window(&self) -> (Distance, Distance) {
        self.bounds().unwrap_or((1, self.bound))
    }
}

/// Whether `A` and `B` are independent over `C` at level `m`.
pub fn indep_at_level(config: &Configuration, m: u32) -> bool {
    if !config.is_disjoint_over_base() {
        return false;
    }
    if m == 0 {
        return true;
    }
    let (lo, hi) = level_bounds(m, config.space().bound(), config.nstar()).expect("m >= 1");
    config.distance_at_least(lo).unwrap_or(false) && config.distance_at_most(hi).unwrap_or(false)
}

/// Copies `B_0 = B, B_1, ...` of `B` inside one ambient space with `A`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SpreadSequence {
    pub space: BoundedMetricSpace,
    pub nstar: Distance,
    /// Level the input configuration satisfied.
    pub level: u32,
    pub base: Vec<String>,
    /// `A`, base included.
    pub left: Vec<String>,
    /// Points of each copy outside the base, aligned with those of `B_0`.
    pub copies: Vec<Vec<String>>,
}

impl SpreadSequence {
    fn with_base(&self, parts: &[&[String]]) -> Vec<String> {
        let mut v = self.base.clone();
        for p in parts {
            v.extend(p.iter().cloned());
        }
        v
    }

    /// `C ⊆ X, Y` with `X = C ∪ copies[xs]` and `Y = C ∪ copies[ys]`.
    pub fn copies_config(&self, xs: &[usize], ys: &[usize]) -> Result<Configuration, AmalgamError> {
        let x: Vec<&[String]> = xs.iter().map(|&j| self.copies[j].as_slice()).collect();
        let y: Vec<&[String]> = ys.iter().map(|&j| self.copies[j].as_slice()).collect();
        Configuration::new(
            self.space.clone(),
            self.nstar,
            &self.base,
            &self.with_base(&x),
            &self.with_base(&y),
        )
    }

    /// `C ⊆ A` against `C ∪ copies[ys]`.
    pub fn left_config(&self, ys: &[usize]) -> Result<Configuration, AmalgamError> {
        let y: Vec<&[String]> = ys.iter().map(|&j| self.copies[j].as_slice()).collect();
        Configuration::new(
            self.space.clone(),
            self.nstar,
            &self.base,
            &self.left,
            &self.with_base(&y),
        )
    }

    /// Distances between two copies, as a block indexed by enumeration.
    fn block(&self, j: usize, k: usize) -> Vec<Distance> {
        let mut v = Vec::new();
        for p in &self.copies[j] {
            for q in &self.copies[k] {
                v.push(self.space.dist_by_name(p, q).unwrap());
            }
        }
        v
    }

    /// Finite surrogate for indiscernibility over `A`: every `A ∪ B_j` is
    /// isometric to `A ∪ B_0` under the enumeration, every block between two
    /// copies equals the `(B_0, B_1)` block, and every triple of copies has
    /// the pattern of `(B_0, B_1, B_2)`.
    pub fn check_indiscernible(&self) -> Result<(), String> {
        let left_only: Vec<&String> = self
            .left
            .iter()
            .filter(|p| !self.base.contains(p))
            .collect();
        let anchors: Vec<&String> = self.base.iter().chain(left_only.iter().copied()).collect();
        for j in 1..self.copies.len() {
            for (idx, q) in self.copies[j].iter().enumerate() {
                let q0 = &self.copies[0][idx];
                for a in &anchors {
                    if self.space.dist_by_name(a, q) != self.space.dist_by_name(a, q0) {
                        return Err(format!("A ∪ B_{j} not isometric to A ∪ B_0 at ({a}, {q})"));
                    }
                }
                for (idx2, q2) in self.copies[j].iter().enumerate() {
                    if self.space.dist_by_name(q, q2)
                        != self.space.dist_by_name(q0, &self.copies[0][idx2])
                    {
                        return Err(format!("B_{j} not isometric to B_0 at ({q}, {q2})"));
                    }
                }
            }
        }
        let m = self.copies.len();
        if m >= 2 {
            let reference = self.block(0, 1);
            for j in 0..m {
                for k in j + 1..m {
                    if self.block(j, k) != reference {
                        return Err(format!("block (B_{j}, B_{k}) differs from (B_0, B_1)"));
                    }
                }
            }
        }
        if m >= 3 {
            let triple = |j: usize, k: usize, l: usize| {
                [self.block(j, k), self.block(j, l), self.block(k, l)]
            };
            let reference = triple(0, 1, 2);
            for j in 0..m {
                for k in j + 1..m {
                    for l in k + 1..m {
                        if triple(j, k, l) != reference {
                            return Err(format!(
                                "triple (B_{j}, B_{k}, B_{l}) differs from (B_0, B_1, B_2)"
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Builds `count` copies of `B` over `A` by repeated free amalgamation: each
/// `B_{j+1}` comes from amalgamating `A ∪ B_0 ∪ ... ∪ B_j` with a fresh copy
/// of `A ∪ B` over `A`.
///
/// Before returning it checks that the copies are indiscernible in the
/// finite sense of [`SpreadSequence::check_indiscernible`], that each `B_j`
/// is independent at level `level + 1` from `B_0 ∪ ... ∪ B_{j-1}` over `C`,
/// and that `A` is still independent at `level` from all copies together.
pub fn spread_sequence(
    config: &Configuration,
    level: u32,
    count: usize,
) -> Result<SpreadSequence, IndependenceError> {
    if count == 0 {
        return Err(IndependenceError::ZeroCount);
    }
    if !indep_at_level(config, level) {
        return Err(IndependenceError::Precondition(format!(
            "configuration is not independent at level {level}"
        )));
    }
    let config = config.restricted()?;
    let nstar = config.nstar();
    let base = config.base_points();
    let left = config.left_points();
    let b_only: Vec<String> = config
        .right_points()
        .into_iter()
        .filter(|p| !base.contains(p))
        .collect();
    let pair_space = config.space().clone();
    let left_space = pair_space.restrict(&left)?;
    let identity: BTreeMap<String, String> = left.iter().map(|p| (p.clone(), p.clone())).collect();

    let mut space = pair_space.clone();
    let mut copies = vec![b_only.clone()];
    for j in 1..count {
        let rename: BTreeMap<String, String> = b_only
            .iter()
            .map(|p| (p.clone(), format!("B{j}/{p}")))
            .collect();
        let names: Vec<String> = pair_space
            .points()
            .iter()
            .map(|p| rename.get(p).cloned().unwrap_or_else(|| p.clone()))
            .collect();
        let fresh =
            BoundedMetricSpace::from_matrix(pair_space.bound(), names, pair_space.matrix())?;
        let triple = AmalgamationTriple::new(
            left_space.clone(),
            space,
            fresh,
            identity.clone(),
            identity.clone(),
            nstar,
        )?;
        let amalgam = free_amalgam(&triple)?;
        let placed: Vec<String> = b_only
            .iter()
            .map(|p| {
                amalgam
                    .right
                    .image(&rename[p])
                    .expect("copy point embedded")
                    .to_string()
            })
            .collect();
        // earlier copies may have been renamed on a clash
        copies = copies
            .iter()
            .map(|c| {
                c.iter()
                    .map(|p| {
                        amalgam
                            .left
                            .image(p)
                            .expect("left point embedded")
                            .to_string()
                    })
                    .collect()
            })
            .collect();
        copies.push(placed);
        space = amalgam.space;
    }

    let seq = SpreadSequence {
        space,
        nstar,
        level,
        base,
        left,
        copies,
    };
    seq.check_indiscernible()
        .map_err(IndependenceError::Internal)?;
    for j in 1..count {
        let earlier: Vec<usize> = (0..j).collect();
        let cfg = seq.copies_config(&earlier, &[j])?;
        if !indep_at_level(&cfg, level + 1) {
            return Err(IndependenceError::Internal(format!(
                "B_{j} not independent at level {} from earlier copies",
                level + 1
            )));
        }
    }
    let all: Vec<usize> = (0..count).collect();
    if !indep_at_level(&seq.left_config(&all)?, level) {
        return Err(IndependenceError::Internal(format!(
            "A lost level {level} against the copies"
        )));
    }
    Ok(seq)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Rung {
    pub level: u32,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LadderReport {
    pub target: u32,
    pub rungs: Vec<Rung>,
}

impl LadderReport {
    pub fn passed(&self) -> bool {
        self.rungs.len() == self.target as usize + 1 && self.rungs.iter().all(|r| r.passed)
    }
}

/// Climbs from level 0 to `target`: at each rung the current pair is spread
/// into `count` copies, every pair of copies is checked at the next level,
/// and the first two copies become the pair for the next rung.
pub fn ladder_check(
    config: &Configuration,
    target: u32,
    count: usize,
) -> Result<LadderReport, IndependenceError> {
    if count < 2 {
        return Err(IndependenceError::Precondition(
            "a ladder rung needs at least two copies".into(),
        ));
    }
    let mut rungs = Vec::new();
    if !indep_at_level(config, 0) {
        rungs.push(Rung {
            level: 0,
            passed: false,
            detail: "A ∩ B strictly contains C".into(),
        });
        return Ok(LadderReport { target, rungs });
    }
    rungs.push(Rung {
        level: 0,
        passed: true,
        detail: "A ∩ B = C".into(),
    });
    let mut current = config.restricted()?;
    for level in 0..target {
        let seq = match spread_sequence(&current, level, count) {
            Ok(s) => s,
            Err(e) => {
                rungs.push(Rung {
                    level: level + 1,
                    passed: false,
                    detail: e.to_string(),
                });
                break;
            }
        };
        let mut failure = None;
        'pairs: for j in 0..count {
            for k in j + 1..count {
                let cfg = seq.copies_config(&[j], &[k])?;
                if !indep_at_level(&cfg, level + 1) {
                    failure = Some(format!(
                        "copies B_{j}, B_{k} not independent at level {}",
                        level + 1
                    ));
                    break 'pairs;
                }
            }
        }
        if let Some(detail) = failure {
            rungs.push(Rung {
                level: level + 1,
                passed: false,
                detail,
            });
            break;
        }
        let window = IndependenceLevel {
            level: level + 1,
            bound: current.space().bound(),
            nstar: current.nstar(),
        }
        .bounds()
        .expect("level >= 1");
        rungs.push(Rung {
            level: level + 1,
            passed: true,
            detail: format!(
                "{count} copies pairwise within [{}, {}]",
                window.0, window.1
            ),
        });
        current = seq.copies_config(&[0], &[1])?.restricted()?;
    }
    Ok(LadderReport { target, rungs })
}
