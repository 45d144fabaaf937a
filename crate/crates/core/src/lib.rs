pub mod assess;
pub mod candidates;
pub mod corpus;
pub mod demo;
pub mod domain;
pub mod error;
pub mod eval;
pub mod infer;
pub mod pipeline;
pub(crate) mod profile;
pub mod select;
pub mod store;
pub mod synth;

pub use error::{Error, Result};
