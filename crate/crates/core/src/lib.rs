pub mod cli;
pub mod discriminate;
pub mod error;
pub mod fgl;
pub mod lazard;
pub mod selftest;
pub mod sentences;
pub mod series;
pub mod zp;

pub use error::{Error, Result};
