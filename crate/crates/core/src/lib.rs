//! Rigorous interval computations for Sharkovskii-type periodic orbit theorems
//! in ordinary and delay differential equations.

pub mod dde;
pub mod driver;
pub mod flow;
pub mod hset;
pub mod interval;
pub mod perturbation;
pub mod sharkovskii;
