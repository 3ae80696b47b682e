//! Exact quadratic optimal transport on metric trees.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod boundary;
pub mod dynamics;
pub mod ends;
pub mod io;
pub mod metric_tree;
pub mod radon;
pub mod transport;
