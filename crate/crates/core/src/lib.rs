//! Compute-forward achievable rate regions for K-user discrete memoryless
//! multiple-access channels with nested linear codes.
//!
//! The crate is organized around five pieces:
//!
//! - [`gflin`]: exact linear algebra over prime fields F_q (ranks, reduced
//!   row echelon forms, left nullspaces, and enumeration of full-rank
//!   matrix families by row span),
//! - [`channel`]: an exact probability engine that builds the joint pmf of
//!   `(U_1, ..., U_K, Y)` induced by a channel description and evaluates
//!   entropies and mutual informations, including of linear-combination
//!   variables `W_F = F [U_1 ... U_K]^T`,
//! - [`regions`]: polyhedral algebra for rate regions in the nonnegative
//!   orthant (unions of intersections of subset-sum half-spaces),
//! - [`achievability`]: the rate-region constructions themselves (joint
//!   decoding, sequential decoding, two-user corollaries, the MAC region,
//!   and the two-user Gaussian closed form),
//! - [`simulator`]: a desk-scale Monte Carlo implementation of the nested
//!   linear coding scheme (random generator matrix plus dithers,
//!   multicoding encoder, joint-typicality sumset decoder) together with
//!   exhaustive counting oracles for the error-event partition.
//!
//! User indices are zero-based throughout the API; the text serialization
//! formats in [`regions`] use one-based index sets.

pub mod achievability;
pub mod channel;
pub mod gflin;
pub mod regions;
pub mod simulator;
