//! Desk-scale toolkit for coloured graphs, walls, brambles and MSO2 logic.
//!
//! The crate is organised around a handful of interlocking pieces:
//!
//! * [`graph`] — finite simple graphs with vertex/edge colours, paths and
//!   disjoint path systems, grid and wall constructors, and a plain text
//!   exchange format.
//! * [`topo`] — exhaustive, work-capped searches for topological minors,
//!   wall recognition with explicit certificates, and isomorphism checks.
//! * [`treewidth`] — exact treewidth for small graphs.
//! * [`logic`] — an MSO2 formula AST (two individual sorts, two set sorts),
//!   an s-expression parser/printer, and a brute-force evaluator with work
//!   caps, memoisation and a witness mode.
//! * [`bramble`] — brambles, bramble order, greedy hitting paths, segment
//!   decompositions and path systems connecting the segments pairwise.
//! * [`flow`] — vertex-disjoint path counting via unit-capacity max flow.
//! * [`minor`] — clique-minor search and independent transversals in
//!   intersection graphs.
//! * [`pseudowall`] — coloured pseudo-walls: planted hosts that encode a
//!   word on the top row of a wall of intersecting path systems, validators
//!   that decode the word back, and an exhaustive enumerator.
//! * [`pipeline`] — the bramble-to-pseudo-wall construction: hitting path,
//!   segment decomposition, pairwise connector families, a clique-minor
//!   test on pairs of families, and either a simple wall from an
//!   independent transversal or a complex wall assembled from branch sets.
//! * [`definability`] — MSO2 formulas that recognise pseudo-walls inside a
//!   host graph, plus an independent semantic checker and a
//!   cross-validation harness.
//! * [`transduction`] — set-parameterised MSO2 transductions: image
//!   construction, formula translation, and an interpretation checker.
//! * [`reduction`] — nondeterministic Turing machines, their simulation on
//!   configuration graphs, computation-table formulas over coloured walls,
//!   word encodings by colouring or edge deletion, and the CNF
//!   satisfiability pipeline built on top of the transduction machinery.
//!
//! Everything favours explicit certificates and honest three-valued
//! outcomes: searches return what they found, that nothing exists, or that
//! a work cap was hit — a cap is never reported as a "no".

#![forbid(unsafe_code)]

pub mod bramble;
pub mod caps;
pub mod definability;
pub mod flow;
pub mod graph;
pub mod logic;
pub mod minor;
pub mod pipeline;
pub mod pseudowall;
pub mod reduction;
pub mod topo;
pub mod transduction;
pub mod treewidth;

pub use caps::{CapExceeded, Caps, Search, WorkBudget};
pub use graph::{ColouredGraph, GraphError, Path, PathSystem, Signature};
