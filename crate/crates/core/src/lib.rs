//! Idiom identification, collocation extraction and idiom embeddings for
//! reverse-dictionary search over English idioms.

pub mod artifacts;
pub mod colloc;
pub mod corpus;
pub mod embed;
mod error;
pub mod idiomify;
pub mod lexicon;
pub mod matcher;
pub mod sample;

pub use error::{Error, Result};
