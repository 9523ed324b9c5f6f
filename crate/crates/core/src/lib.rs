pub mod combinatorics;
pub mod conformal;
pub mod error;
pub mod geometry;
pub mod harness;
pub mod ising;
pub mod lattice;
pub mod loewner;
pub mod multisle;
pub mod partition;
pub mod randomcluster;
pub mod rng;

pub use error::{Error, Result};
