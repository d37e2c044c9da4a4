#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod baselines;
pub mod bench;
pub mod compression;
pub mod error;
pub mod instances;
pub mod json;
pub mod learner;
pub mod linalg;
pub mod lp;
pub mod oracle;
pub mod prior;
pub mod rng;
