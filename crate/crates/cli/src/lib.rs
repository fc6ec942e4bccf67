//! Configuration, file formats, and experiment orchestration around
//! `qslp-core`, plus the `qslp` command-line front end.

// validation predicates are written `!(x > 0.0)` so that NaN fails them
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod csvio;
pub mod runner;
