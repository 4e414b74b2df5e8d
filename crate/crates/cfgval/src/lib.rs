//! Text format, reports and program generators for the value-range
//! analyzer in `cfgval-core`.

pub mod gen;
pub mod parse;
pub mod print;
pub mod report;

pub use cfgval_core as core;
pub use parse::{parse, ParseError};
pub use print::print_program;
