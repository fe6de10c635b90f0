//! Slow, direct implementations used to cross-check the library. Shared by
//! the core integration tests and the CLI acceptance suite.
#![allow(dead_code)]

pub mod geometry;
pub mod hier;
pub mod kmeans;
pub mod validity;
