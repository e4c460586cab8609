pub mod asymptotics;
pub mod circle;
pub mod cli;
pub mod error;
pub mod exponents;
pub mod hp;
pub mod primesieve;
pub mod repcount;
pub mod selftest;
pub mod seqeval;
pub mod summation;
pub mod window;

pub use error::{Error, Result};
