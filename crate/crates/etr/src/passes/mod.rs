//! The lowering passes between adjacent fragments.
//!
//! Each pass consumes an instance of one fragment and emits the next
//! fragment's instance together with a witness pair and a size report.

pub mod ami;
pub(crate) mod annot;
pub mod compact;
pub mod conj;
pub mod inv;
pub mod pipeline;
pub mod shift;
pub mod small;
pub mod square;

use std::time::Duration;

use crate::formula::Instance;
use crate::length::instance_length;

/// How tower-of-exponents constants are sized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TowerMode {
    /// Height derived from the input size, as the constructions demand.
    /// Emitted instances are sound, but the chain constants cannot be
    /// materialized as plain rationals within any reasonable budget.
    PaperExact,
    /// Caller-chosen small height, for tests and for inputs whose solutions
    /// are known to be small.
    Test(u32),
}

/// Size and shape accounting for one pass run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PassReport {
    pub stage: String,
    pub input_length: u64,
    pub output_length: u64,
    pub new_vars: usize,
    pub constraint_count: usize,
    pub tower_height: Option<u64>,
    pub elapsed: Duration,
}

impl PassReport {
    pub(crate) fn new(
        stage: &str,
        input_length: u64,
        input_vars: usize,
        output: &Instance,
        tower_height: Option<u64>,
        started: std::time::Instant,
    ) -> PassReport {
        PassReport {
            stage: stage.to_string(),
            input_length,
            output_length: instance_length(output),
            new_vars: output.n_vars().saturating_sub(input_vars),
            constraint_count: output.constraints.len(),
            tower_height,
            elapsed: started.elapsed(),
        }
    }
}

/// Adds a variable named `base`, or `base#2`, `base#3`, ... if taken.
/// Pass output naming is deterministic: bases are derived from the input
/// variable names and a per-pass emission order.
pub(crate) fn add_unique_var(inst: &mut Instance, base: &str) -> usize {
    if inst.vars.lookup(base).is_none() {
        return inst.add_var(base);
    }
    let mut k = 2usize;
    loop {
        let cand = format!("{base}#{k}");
        if inst.vars.lookup(&cand).is_none() {
            return inst.add_var(&cand);
        }
        k += 1;
    }
}
