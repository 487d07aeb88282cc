pub mod arith;
pub mod cli;
pub mod conjecture;
pub(crate) mod bigfmt;
pub mod descent;
pub mod error;
pub mod pell;
pub mod poly;
pub mod reduction;
pub mod sieve;

pub use error::{Error, Result};
