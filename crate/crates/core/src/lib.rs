pub mod cli;
pub mod demo;
pub mod distance;
pub mod error;
pub mod eval;
pub mod lm;
pub mod mine;
pub mod select;
pub mod synth;
pub mod text;
pub mod word_align;

pub use error::{Error, Result};
