//! Numerical checks of the area bound, its supporting identities and its
//! corollaries, each producing a [`VerificationReport`].

mod attest;
mod checks;
mod integrals;
pub mod lemmas;
mod report;
mod suite;

pub use attest::{Attestation, AttestedSurface};
pub use checks::*;
pub use report::{inputs_digest, render_table, surface_digest, RngRecord, VerificationReport};
pub use suite::{run_suite, suite_passed, to_json, Job};
