#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cocycle;
pub mod exec;
pub mod experiments;
pub mod irregular;
pub mod linalg;
pub mod lyapunov;
pub mod symbolic;
