#![allow(dead_code)]

#[path = "../../../core/tests/support/oracles.rs"]
pub mod oracles;
pub mod rayleigh_lamb;
