#![no_std]
extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod clifford;
pub mod error;
pub mod hamiltonian;
pub mod linalg;
pub mod mps;
pub mod realize;
pub mod report;
pub mod repr;
pub mod spt;

pub use error::{Error, Result};
