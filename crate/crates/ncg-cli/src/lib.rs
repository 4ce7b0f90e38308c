//! Library surface of the batch verification driver: configuration
//! handling and the verification suites. The binary and the acceptance
//! tests both build on this.

pub mod config;
pub mod suites;
