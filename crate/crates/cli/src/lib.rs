//! Library surface of the experiment runner, used by the binary and by
//! integration tests.

pub mod config;
pub mod experiment;
pub mod tables;
