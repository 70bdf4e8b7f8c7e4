//! Two-sided secure distributed matrix multiplication with aligned secret
//! sharing: both inputs stay hidden from any `ell` colluding servers, and
//! key-dependent product terms are packed onto shared exponents so that more
//! of each answer carries the actual product.

pub mod cli;
pub mod codec;
pub mod error;
pub mod ffield;
pub mod partition;
pub mod security;
pub mod simulator;

pub use codec::{decode, encode, server_compute, Partition, SchemeParams};
pub use error::{Error, Result};
pub use ffield::{FieldMatrix, FieldPrime};
pub use partition::{OptimizationResult, RationalRate};
