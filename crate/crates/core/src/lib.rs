//! Symbolic verification of rational blow-down constructions.
//!
//! Blow-up calculus on curve configurations, Wahl-chain recognition,
//! invariant bookkeeping through rational blow-down, intersection lattices,
//! cyclic Van Kampen derivations and double-cover lifts.

pub mod config;
pub mod cover;
pub mod fundgroup;
pub mod hjcf;
pub mod lattice;
pub mod scenario;
pub mod surgery;
pub mod verify;
