#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod capacity;
pub mod error;
pub mod quadrature;
pub mod scenario;
pub mod sensing;
pub mod specfun;
pub mod optimizer;
pub mod search;
pub mod config;
pub mod experiments;
pub mod oracle;
pub mod validation;
