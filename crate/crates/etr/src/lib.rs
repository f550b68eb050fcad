//! Exact compiler toolkit that lowers existential real-arithmetic formulas
//! through a chain of restricted fragments, producing rational witness maps
//! and interval certificates at every step.

pub mod error;
pub mod formula;
pub mod json;
pub mod length;
pub mod oracle;
pub mod parser;
pub mod passes;
pub mod poly;
pub mod range;
pub mod rational;
pub mod validate;
pub mod witness;

pub use error::{Error, Result};
