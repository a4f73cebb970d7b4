//! Finite constructions over bounded-distance structures.
//!
//! The crate covers four families of objects:
//!
//! * integer metric spaces valued in `{0..n}`, their completion from partial
//!   data and their free amalgamation over a shared base ([`spaces`],
//!   [`amalgam`]);
//! * the ladder of distance-window independence relations and the iterated
//!   amalgamation that spreads one configuration into a sequence of copies
//!   ([`independence`]);
//! * directed graphs without short directed cycles (and undirected graphs
//!   without short odd cycles), described by their directed-distance data and
//!   realized by path gadgets ([`girth`]);
//! * relation paths of exact length and the `2^(n+1) + 1` cycle certificate
//!   ([`sop`]).
//!
//! Every construction re-verifies its output before returning, and
//! [`harness`] drives the exhaustive small-instance sweeps used as acceptance
//! checks.

pub mod amalgam;
pub mod digraph;
pub mod format;
pub mod girth;
pub mod harness;
pub mod independence;
pub mod minplus;
pub mod sop;
pub mod spaces;

pub use amalgam::{
    check_distance_lemma, free_amalgam, sequence_extension, Amalgam, AmalgamError,
    AmalgamationTriple, Configuration, CrossPair, CrossPairProfile, LemmaConfiguration,
    LemmaReport,
};
pub use digraph::Digraph;
pub use girth::{
    dd_free_amalgam, dd_from_digraph, dd_realize, dd_validate, og_realize, og_validate,
    DirectedDistance, DirectedDistanceStructure, GirthError, OddGirthGraph, RealizedDigraph,
};
pub use independence::{indep_at_level, ladder_check, level_bounds, spread_sequence};
pub use sop::{base_case_contradiction, path_concat, r_k_holds, shortest_cycle_at_most};
pub use spaces::{
    enumerate_spaces, is_isometric_extension, min_plus_complete, validate_metric,
    BoundedMetricSpace, Distance, EnumerationCaps, PartialDistanceSpec, SpaceError,
    ValidationReport, Violation,
};
