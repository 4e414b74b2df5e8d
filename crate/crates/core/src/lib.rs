//! Value-range analysis for a small CFG intermediate language over 32-bit
//! machine integers.
//!
//! The analysis is a non-relational abstract interpretation combining a
//! signed and an unsigned interval per variable. Fixpoints are computed by an
//! untrusted iterator and then validated by a separate checker; when
//! validation fails the analysis falls back to the trivial result.

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod concrete;
pub mod domain;
pub mod fixpoint;
pub mod intervals;
pub mod ir;
pub mod machine_int;
pub mod mem;
pub mod num_env;
