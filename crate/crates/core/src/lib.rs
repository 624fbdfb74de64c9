#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod config;
pub mod doubling;
pub mod geometry;
pub mod harness;
pub mod output;
pub mod signals;
pub mod solver;
